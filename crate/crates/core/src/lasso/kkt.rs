use serde::Serialize;

use crate::design::DesignMatrix;
use crate::error::{Error, Result};

/// Subgradient optimality certificate for `||Y - X b||^2 + lambda ||b||_1`.
#[derive(Debug, Clone, Serialize)]
pub struct KktReport {
    /// `max_j (|g_j| - lambda)_+` with `g = 2 X^T (Y - X b)`.
    pub max_gradient_violation: f64,
    /// `|g_j - lambda sign(b_j)| <= tol` on every nonzero coefficient.
    pub sign_consistency: bool,
    pub active_set: Vec<usize>,
    pub tol: f64,
}

impl KktReport {
    pub fn pass(&self) -> bool {
        self.max_gradient_violation <= self.tol && self.sign_consistency
    }
}

pub fn kkt_check(design: &DesignMatrix, y: &[f64], beta: &[f64], lambda: f64, tol: f64) -> Result<KktReport> {
    let x = design.matrix();
    if y.len() != x.rows() || beta.len() != x.cols() {
        return Err(Error::DimensionMismatch("kkt_check".into()));
    }
    let fit = x.matvec(beta)?;
    let resid: Vec<f64> = y.iter().zip(fit.iter()).map(|(a, b)| a - b).collect();
    let g = x.tr_matvec(&resid)?;
    let mut max_violation = 0.0f64;
    let mut sign_consistency = true;
    let mut active_set = Vec::new();
    for (j, (gj, bj)) in g.iter().zip(beta).enumerate() {
        let gj = 2.0 * gj;
        max_violation = max_violation.max(gj.abs() - lambda);
        if *bj != 0.0 {
            active_set.push(j);
            if (gj - lambda * bj.signum()).abs() > tol {
                sign_consistency = false;
            }
        }
    }
    Ok(KktReport {
        max_gradient_violation: max_violation.max(0.0),
        sign_consistency,
        active_set,
        tol,
    })
}
