//! Error norms, residual norms, `c0` sweeps and table reproduction.

mod domain;
mod norms;
mod quadrature;
mod report;
mod sweep;

pub use domain::{Bound, Domain, Interval};
pub use norms::{error_norm_exact, exact_residual_norm, residual_norm_operator, NormSpec};
pub use quadrature::{
    gauss_legendre, radical_inverse, Integrand, QuadratureRegistry, QuadratureRule, QuadratureSpec, QuasiRandom,
    RuleFactory, SymbolicRule, TensorGauss, DEFAULT_SEED,
};
pub use report::{reproduce_table, DiagnosticsReport, ReportRow, TableOptions};
pub use sweep::{parse_grid, sweep_c0, SweepCell, SweepResult};

use rug::Float;

use crate::error::{Error, Result};

/// Scientific notation with five significant digits.
pub fn format_sci(v: &Float) -> String {
    if v.is_zero() {
        return "0.00000e0".into();
    }
    format!("{:.5e}", v)
}

/// Fitted CPU-time curves `(t_H, t_S) = (exp(-3.2 + 0.95 d), exp(-7.6 + 2.9 d))`
/// in seconds for the fifth-order series and a sparse-grid reference solver.
pub fn cpu_time_models(d: u32) -> Result<(f64, f64)> {
    if d < 3 {
        return Err(Error::Domain(format!("the CPU-time fits hold for d >= 3, got {d}")));
    }
    let d = d as f64;
    Ok(((-3.2 + 0.95 * d).exp(), (-7.6 + 2.9 * d).exp()))
}
