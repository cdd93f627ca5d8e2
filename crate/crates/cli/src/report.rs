//! JSON form of a diagnostics report.

use anyhow::Result;
use serde::{Deserialize, Serialize};
use tsne_forensics_core::diagnostics::Statistic;
use tsne_forensics_core::DiagnosticsReport;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub statistics: Vec<Statistic>,
}

impl From<&DiagnosticsReport> for ReportDocument {
    fn from(report: &DiagnosticsReport) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            statistics: report.statistics.clone(),
        }
    }
}

impl ReportDocument {
    pub fn into_report(self) -> DiagnosticsReport {
        DiagnosticsReport {
            statistics: self.statistics,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
