use crate::error::{Error, Result};

/// Upper bound on the normalized measure of a distance-`r` cap of
/// `S^{d−1}`: `(2πd)^{−1/2} · (r / √(1 − r²/4))^{d−1}`, evaluated in log space.
pub fn cap_measure_bound(r: f64, d: usize) -> Result<f64> {
    if !(r > 0.0 && r < 2.0) {
        return Err(Error::param("r", "must lie in (0, 2)"));
    }
    if d < 2 {
        return Err(Error::param("d", "must be at least 2"));
    }
    let d = d as f64;
    let log_base = libm::log(r) - 0.5 * libm::log(1.0 - r * r / 4.0);
    let log_bound = -0.5 * libm::log(2.0 * core::f64::consts::PI * d) + (d - 1.0) * log_base;
    Ok(libm::exp(log_bound))
}
