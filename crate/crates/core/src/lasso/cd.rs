//! Cyclic coordinate descent for the Lasso, used as an independent check
//! on the homotopy solver.

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::simcore::{dot, Vector};

pub const MAX_CYCLES: usize = 100_000;

/// Minimizes `||Y - X b||^2 + lambda ||b||_1` by cycling over coordinates
/// `0..p` until the largest coefficient change in a cycle is at most `tol`.
pub fn coordinate_descent_solve(design: &DesignMatrix, y: &[f64], lambda: f64, tol: f64) -> Result<Vector> {
    if !(lambda >= 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda = {lambda}, tol = {tol}"
        )));
    }
    let x = design.matrix();
    if y.len() != x.rows() {
        return Err(Error::DimensionMismatch("coordinate_descent_solve".into()));
    }
    let cols = x.columns();
    let sq: Vec<f64> = cols.iter().map(|c| dot(c, c)).collect();
    let half = lambda / 2.0;
    let mut beta = vec![0.0; x.cols()];
    let mut resid = y.to_vec();
    let mut last_change = f64::INFINITY;
    for _ in 0..MAX_CYCLES {
        last_change = 0.0;
        for (j, col) in cols.iter().enumerate() {
            let rho = dot(col, &resid) + sq[j] * beta[j];
            let new = soft_threshold(rho, half) / sq[j];
            let delta = new - beta[j];
            if delta != 0.0 {
                for (r, c) in resid.iter_mut().zip(col) {
                    *r -= delta * c;
                }
                beta[j] = new;
                last_change = last_change.max(delta.abs());
            }
        }
        if last_change <= tol {
            return Vector::new(beta);
        }
    }
    Err(Error::NotConverged {
        cycles: MAX_CYCLES,
        last_change,
        last_iterate: beta,
    })
}

pub fn soft_threshold(z: f64, t: f64) -> f64 {
    z.signum() * (z.abs() - t).max(0.0)
}
