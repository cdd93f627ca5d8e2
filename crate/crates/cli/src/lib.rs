//! Experiment harness for exact t-SNE: file formats, configs, named
//! experiments and the `tsne-forensics` command line.

pub mod cli;
pub mod config;
pub mod diagnose;
pub mod experiments;
pub mod io;
pub mod pipeline;
pub mod report;
pub mod svg;
