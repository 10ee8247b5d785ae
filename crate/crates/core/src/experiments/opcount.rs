use crate::error::{config, Result};
use serde::{Deserialize, Serialize};

/// Operation counts of one quantum reservoir step (`2^(10+n)` shots of a
/// circuit with `xi n` gates) against a dense classical update of size
/// `n_res_classical`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpcountRecord {
    pub n: u32,
    pub xi: f64,
    pub n_res_classical: f64,
    pub quantum_cost: f64,
    pub classical_cost: f64,
    /// `quantum_cost < classical_cost`.
    pub quantum_cheaper: bool,
    /// `2^10 xi N log2 N < N^2` with `N = n_res_classical`.
    pub n_form_holds: bool,
}

/// `n_res_classical` defaults to `2^n`, the quantum reservoir dimension.
pub fn opcount_estimate(n: u32, xi: f64, n_res_classical: Option<f64>) -> Result<OpcountRecord> {
    if n == 0 {
        return Err(config("opcount needs n >= 1"));
    }
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(config(format!("xi = {xi} must be positive")));
    }
    let big_n = n_res_classical.unwrap_or_else(|| 2f64.powi(n as i32));
    if !(big_n >= 1.0) {
        return Err(config("classical reservoir size must be at least 1"));
    }
    let quantum_cost = 2f64.powi(10 + n as i32) * xi * f64::from(n);
    let classical_cost = big_n * big_n;
    Ok(OpcountRecord {
        n,
        xi,
        n_res_classical: big_n,
        quantum_cost,
        classical_cost,
        quantum_cheaper: quantum_cost < classical_cost,
        n_form_holds: 1024.0 * xi * big_n * big_n.log2() < big_n * big_n,
    })
}

/// Estimates for every `n` in `range`.
pub fn opcount_scan(range: std::ops::RangeInclusive<u32>, xi: f64) -> Result<Vec<OpcountRecord>> {
    range.map(|n| opcount_estimate(n, xi, None)).collect()
}

/// Smallest `n` of a scan at which the quantum count is lower.
pub fn crossover(scan: &[OpcountRecord]) -> Option<u32> {
    scan.iter().find(|r| r.quantum_cheaper).map(|r| r.n)
}
