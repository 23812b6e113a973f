//! Correlation function `K(x)`, the correlation factors `K_kappa` and `F`,
//! and the design-adapted tuning parameter.
//!
//! `K(x)` is the smallest number of atoms on `sqrt(n) S^{n-1}` whose
//! symmetric convex hull, inflated by `1 + x`, contains every column. Exact
//! values are out of reach, so everything here is a certified upper bound:
//! each reported `K` comes with a dictionary that passes a membership audit.
//! Upper bounds on `K` give upper bounds on both factors and hence a larger,
//! still valid, tuning parameter.

mod membership;
mod profile;
mod search;
mod structural;

pub use membership::{sconv_membership, Dictionary};
pub use profile::{
    correlation_factor_f, correlation_factor_kappa, correlation_profile, default_x_grid, f_factor_at,
    kappa_factor_at, CorrelationProfile, ProfileOptions,
};
pub use search::{
    audit_certificate, correlation_function_upper, correlation_function_upper_with, SearchOptions, Strategy,
    DEFAULT_TOL,
};
pub use structural::{structural_bounds, StructuralBound, StructureKind};

use crate::design::DesignMatrix;
use crate::error::{Error, Result};

/// `sup_{beta != 0} |eps^T X beta| / ||beta||_1 = max_j |eps^T X^(j)|`.
pub fn dual_norm_sup(design: &DesignMatrix, eps: &[f64]) -> Result<f64> {
    if eps.len() != design.n() {
        return Err(Error::DimensionMismatch(format!(
            "noise of length {} for {} rows",
            eps.len(),
            design.n()
        )));
    }
    Ok(design.matrix().tr_matvec(eps)?.max_abs())
}

/// Whether `2 sigma max_j |eps^T X^(j)| <= lambda`.
pub fn event_t_holds(design: &DesignMatrix, eps: &[f64], sigma: f64, lambda: f64) -> Result<bool> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} must be >= 0")));
    }
    if sigma == 0.0 {
        return Ok(true);
    }
    Ok(2.0 * sigma * dual_norm_sup(design, eps)? <= lambda)
}

/// `K_kappa 2 sigma sqrt(2 n log(2p / kappa))`.
pub fn tuning_lambda_kappa(k_kappa: f64, sigma: f64, n: usize, p: usize, kappa: f64) -> f64 {
    k_kappa * 2.0 * sigma * (2.0 * n as f64 * (2.0 * p as f64 / kappa).ln()).sqrt()
}

/// `F sigma sqrt(8 n log(1 + p) / 3) M`.
pub fn expectation_bound(f: f64, sigma: f64, n: usize, p: usize, m: f64) -> f64 {
    f * sigma * (8.0 * n as f64 * (1.0 + p as f64).ln() / 3.0).sqrt() * m
}

pub(crate) fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::InvalidParameter(format!("kappa = {kappa} must lie in (0, 1]")));
    }
    Ok(())
}
