use serde::{Deserialize, Serialize};

use super::check_kappa;
use crate::error::{Error, Result};

/// Design structures with closed-form factor bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StructureKind {
    /// Columns span a space of dimension at most `w`.
    LowDim { w: usize },
    /// Every column has at most `d` nonzero entries out of `n`.
    Sparse { d: usize, n: usize },
    /// The columns take at most `v` distinct values.
    EqualColumns { v: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructuralBound {
    pub kind: StructureKind,
    pub k_kappa_bound: f64,
    pub f_bound: f64,
}

impl StructuralBound {
    /// Both factors are at most 1 for any design, so a bound of 1 or more
    /// carries no information.
    pub fn kappa_vacuous(&self) -> bool {
        self.k_kappa_bound >= 1.0
    }

    pub fn f_vacuous(&self) -> bool {
        self.f_bound >= 1.0
    }
}

pub fn structural_bounds(kind: StructureKind, p: usize, kappa: f64) -> Result<StructuralBound> {
    check_kappa(kappa)?;
    if p == 0 {
        return Err(Error::EmptyInput("p"));
    }
    let lk = (2.0 * p as f64 / kappa).ln();
    let lf = (1.0 + p as f64).ln();
    let ratio_k = |m: f64| ((2.0 * m / kappa).ln() / lk).sqrt();
    let ratio_f = |m: f64| ((1.0 + m).ln() / lf).sqrt();
    let (k_kappa_bound, f_bound) = match kind {
        StructureKind::LowDim { w } => {
            if w == 0 {
                return Err(Error::InvalidParameter("W must be >= 1".into()));
            }
            let w = w as f64;
            ((1.0 + w.sqrt()) * ratio_k(w), (1.0 + w.sqrt()) * ratio_f(w))
        }
        StructureKind::Sparse { d, n } => {
            if d == 0 || d > n {
                return Err(Error::InvalidParameter(format!("need 1 <= d = {d} <= n = {n}")));
            }
            let d = (d as f64).sqrt();
            (d * ratio_k(n as f64), d * ratio_f(n as f64))
        }
        StructureKind::EqualColumns { v } => {
            if v == 0 || v > p {
                return Err(Error::InvalidParameter(format!("need 1 <= v = {v} <= p = {p}")));
            }
            (ratio_k(v as f64), ratio_f(v as f64))
        }
    };
    if !(k_kappa_bound > 0.0 && f_bound > 0.0 && k_kappa_bound.is_finite() && f_bound.is_finite()) {
        return Err(Error::NonFinite("structural bound"));
    }
    Ok(StructuralBound {
        kind,
        k_kappa_bound,
        f_bound,
    })
}
