//! Certified upper bounds on the correlation function `K(x)`.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::membership::Dictionary;
use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::simcore::{dot, Vector};

pub const DEFAULT_TOL: f64 = 1e-6;

/// How dictionary atoms are proposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Columns in ascending order become atoms unless already covered.
    GreedyCluster,
    /// Columns visited farthest-point first, after any seed atoms.
    ColumnSubset,
    /// `2(n-1)` atoms `a +- z b_i` around the leading singular direction `a`.
    AnchoredCross,
    /// An orthonormal basis of the column span.
    SpanBasis,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::GreedyCluster,
        Strategy::ColumnSubset,
        Strategy::AnchoredCross,
        Strategy::SpanBasis,
    ];
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::GreedyCluster => "greedy-cluster",
            Strategy::ColumnSubset => "column-subset",
            Strategy::AnchoredCross => "anchored-cross",
            Strategy::SpanBasis => "span-basis",
        })
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Strategy::ALL
            .into_iter()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| format!("unknown strategy `{s}`"))
    }
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    /// Membership residual tolerance, relative to `sqrt(n)`.
    pub tol: f64,
    /// Atoms placed in the dictionary before `ColumnSubset` visits columns.
    pub seeds: Vec<Vector>,
    /// Give up once the dictionary would exceed this many atoms.
    pub max_atoms: Option<usize>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            tol: DEFAULT_TOL,
            seeds: Vec::new(),
            max_atoms: None,
        }
    }
}

/// Design columns rescaled to norm `sqrt(n)`.
pub(crate) fn root_n_columns(design: &DesignMatrix) -> Vec<Vec<f64>> {
    let r = (design.n() as f64).sqrt();
    design
        .matrix()
        .columns()
        .into_iter()
        .map(|c| {
            let s = r / dot(&c, &c).sqrt();
            c.into_iter().map(|v| v * s).collect()
        })
        .collect()
}

/// Upper bound on `K(x)` with a certificate that covers every column with
/// budget `1 + x`. Falls back to the columns themselves (`K = p`) when the
/// strategy does not produce anything smaller.
pub fn correlation_function_upper(design: &DesignMatrix, x: f64, strategy: Strategy) -> Result<(usize, Vec<Vector>)> {
    correlation_function_upper_with(design, x, strategy, &SearchOptions::default())
}

pub fn correlation_function_upper_with(
    design: &DesignMatrix,
    x: f64,
    strategy: Strategy,
    opts: &SearchOptions,
) -> Result<(usize, Vec<Vector>)> {
    check_x(x)?;
    let columns = root_n_columns(design);
    match search(&columns, x, strategy, opts)? {
        Some(dict) if dict.len() < columns.len() => Ok((dict.len(), dict.into_vectors())),
        _ => {
            let trivial = columns.into_iter().map(Vector::from_vec_unchecked).collect::<Vec<_>>();
            Ok((trivial.len(), trivial))
        }
    }
}

pub(crate) fn check_x(x: f64) -> Result<()> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::InvalidParameter(format!("x = {x} must be finite and >= 0")));
    }
    Ok(())
}

/// Runs one strategy on `sqrt(n)`-scaled columns. `None` means the strategy
/// did not certify a dictionary within the atom cap.
pub(crate) fn search(columns: &[Vec<f64>], x: f64, strategy: Strategy, opts: &SearchOptions) -> Result<Option<Dictionary>> {
    let budget = 1.0 + x;
    let cap = opts.max_atoms.unwrap_or(usize::MAX);
    if columns.is_empty() {
        return Err(Error::EmptyInput("design columns"));
    }
    Ok(match strategy {
        Strategy::GreedyCluster => greedy_cluster(columns, budget, opts.tol, cap),
        Strategy::ColumnSubset => column_subset(columns, &opts.seeds, budget, opts.tol, cap)?,
        Strategy::AnchoredCross => anchored_cross(columns, budget, opts.tol, cap),
        Strategy::SpanBasis => span_basis(columns, budget, opts.tol, cap),
    })
}

/// True iff every column lies in `budget * sconv(dict)`. Columns are tried
/// in `order`, hardest first, so failures surface early.
pub(crate) fn audit_in_order(dict: &Dictionary, columns: &[Vec<f64>], order: &[usize], budget: f64, tol: f64) -> bool {
    order.par_iter().all(|&m| dict.contains(&columns[m], budget, tol))
}

/// Re-runs membership for every column of `design` against `certificate`.
pub fn audit_certificate(design: &DesignMatrix, certificate: &[Vector], x: f64, tol: f64) -> bool {
    let Ok(dict) = Dictionary::from_atoms(certificate) else {
        return false;
    };
    if dict.n() != design.n() {
        return false;
    }
    let columns = root_n_columns(design);
    let order: Vec<usize> = (0..columns.len()).collect();
    audit_in_order(&dict, &columns, &order, 1.0 + x, tol)
}

/// Ascending visit order; a column becomes an atom iff the atoms chosen so
/// far do not cover it. Chunks of columns are tested speculatively in
/// parallel: a positive answer stays valid as the dictionary grows.
fn greedy_cluster(columns: &[Vec<f64>], budget: f64, tol: f64, cap: usize) -> Option<Dictionary> {
    let n = columns[0].len();
    let mut dict = Dictionary::new(n);
    let chunk = 2 * rayon::current_num_threads();
    let mut pending: VecDeque<usize> = (0..columns.len()).collect();
    while !pending.is_empty() {
        let batch: Vec<usize> = pending.drain(..chunk.min(pending.len())).collect();
        let covered: Vec<bool> = batch
            .par_iter()
            .map(|&m| !dict.is_empty() && dict.contains(&columns[m], budget, tol))
            .collect();
        let Some(first) = covered.iter().position(|c| !c) else {
            continue;
        };
        if dict.len() >= cap {
            return None;
        }
        dict.push(&columns[batch[first]]).ok()?;
        for k in (first + 1..batch.len()).rev() {
            if !covered[k] {
                pending.push_front(batch[k]);
            }
        }
    }
    Some(dict)
}

/// `1 - |cos|` between two vectors of norm `sqrt(n)`.
fn angular_gap(a: &[f64], b: &[f64], n: usize) -> f64 {
    1.0 - (dot(a, b) / n as f64).abs()
}

fn column_subset(columns: &[Vec<f64>], seeds: &[Vector], budget: f64, tol: f64, cap: usize) -> Result<Option<Dictionary>> {
    let n = columns[0].len();
    let p = columns.len();
    let mut dict = Dictionary::new(n);
    for s in seeds {
        dict.push(s)?;
    }
    if dict.len() > cap {
        return Ok(None);
    }
    let mut gap = vec![1.0f64; p];
    for a in dict.atoms() {
        for (g, c) in gap.iter_mut().zip(columns) {
            *g = g.min(angular_gap(a, c, n));
        }
    }
    let mut visited = vec![false; p];
    for _ in 0..p {
        let next = (0..p)
            .filter(|&j| !visited[j])
            .max_by(|&i, &j| gap[i].total_cmp(&gap[j]).then(j.cmp(&i)))
            .expect("unvisited column remains");
        visited[next] = true;
        if !dict.is_empty() && dict.contains(&columns[next], budget, tol) {
            continue;
        }
        if dict.len() >= cap {
            return Ok(None);
        }
        dict.push(&columns[next])?;
        let atom = dict.atoms().last().expect("just pushed");
        for (g, c) in gap.iter_mut().zip(columns) {
            *g = g.min(angular_gap(atom, c, n));
        }
    }
    Ok(Some(dict))
}

/// Leading left singular vector of the column matrix, unit norm, oriented
/// so that its coordinates sum to a nonnegative value.
pub(crate) fn leading_direction(columns: &[Vec<f64>]) -> Vec<f64> {
    let n = columns[0].len();
    let mut m = vec![vec![0.0; n]; n];
    for c in columns {
        for i in 0..n {
            let ci = c[i];
            for (mij, cj) in m[i].iter_mut().zip(c) {
                *mij += ci * cj;
            }
        }
    }
    let mut v: Vec<f64> = columns.iter().fold(vec![0.0; n], |mut acc, c| {
        let s = if dot(c, &columns[0]) >= 0.0 { 1.0 } else { -1.0 };
        acc.iter_mut().zip(c).for_each(|(a, ci)| *a += s * ci);
        acc
    });
    if dot(&v, &v) == 0.0 {
        v = vec![1.0; n];
    }
    normalize(&mut v);
    for _ in 0..1000 {
        let mut w: Vec<f64> = m.iter().map(|row| dot(row, &v)).collect();
        if dot(&w, &w) == 0.0 {
            break;
        }
        normalize(&mut w);
        let change: f64 = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        if change < 1e-14 {
            break;
        }
    }
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

fn normalize(v: &mut [f64]) {
    let norm = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

/// Each column is `alpha_m a + r_m` with `a = sqrt(n) u` and `r_m` orthogonal
/// to `u`. Writing `r_m` in an orthonormal basis `b_i` of `u`'s complement
/// (columns of a Householder reflection), the atoms `a +- z b_i` with
/// `z = max_m ||r_m||_1 / |alpha_m|` represent column `m` with coefficient
/// mass `|alpha_m| sqrt(1 + z^2 / n)` after normalization.
fn anchored_cross(columns: &[Vec<f64>], budget: f64, tol: f64, cap: usize) -> Option<Dictionary> {
    let n = columns[0].len();
    let u = leading_direction(columns);
    let root_n = (n as f64).sqrt();
    // Householder vector mapping u to a multiple of e_0
    let mut h = u.clone();
    h[0] += if u[0] >= 0.0 { 1.0 } else { -1.0 };
    let hh = dot(&h, &h);
    let basis = |i: usize| -> Vec<f64> {
        let f = 2.0 * h[i] / hh;
        let mut b: Vec<f64> = h.iter().map(|hk| -f * hk).collect();
        b[i] += 1.0;
        b
    };

    let mut alpha = Vec::with_capacity(columns.len());
    let mut z: f64 = 0.0;
    for c in columns {
        let a = dot(c, &u) / root_n;
        let hc = dot(&h, c);
        // coordinates <c, b_i> = c_i - 2 h_i <h, c> / <h, h>, i >= 1
        let r_l1: f64 = (1..n).map(|i| (c[i] - 2.0 * h[i] * hc / hh).abs()).sum();
        if a.abs() < 1e-12 {
            return None;
        }
        z = z.max(r_l1 / a.abs());
        alpha.push(a.abs());
    }

    let mut dict = Dictionary::new(n);
    let anchor: Vec<f64> = u.iter().map(|v| v * root_n).collect();
    if z <= 1e-12 * root_n || n == 1 {
        dict.push(&anchor).ok()?;
    } else {
        if 2 * (n - 1) > cap {
            return None;
        }
        for i in 1..n {
            let b = basis(i);
            for sign in [1.0, -1.0] {
                let atom: Vec<f64> = anchor.iter().zip(&b).map(|(a, bi)| a + sign * z * bi).collect();
                dict.push(&atom).ok()?;
            }
        }
    }
    if dict.len() > cap {
        return None;
    }
    let mut order: Vec<usize> = (0..columns.len()).collect();
    order.sort_by(|&i, &j| alpha[j].total_cmp(&alpha[i]).then(i.cmp(&j)));
    audit_in_order(&dict, columns, &order, budget, tol).then_some(dict)
}

/// Orthonormal basis of the column span by modified Gram-Schmidt with one
/// reorthogonalization pass, scaled to norm `sqrt(n)`.
pub(crate) fn span_atoms(columns: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = columns[0].len();
    let mut q: Vec<Vec<f64>> = Vec::new();
    for c in columns {
        if q.len() == n {
            break;
        }
        let mut v = c.clone();
        let norm0 = dot(&v, &v).sqrt();
        for _ in 0..2 {
            for b in &q {
                let proj = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= proj * bi);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-8 * norm0 {
            v.iter_mut().for_each(|vi| *vi /= norm);
            q.push(v);
        }
    }
    let r = (n as f64).sqrt();
    q.into_iter().map(|b| b.into_iter().map(|v| v * r).collect()).collect()
}

fn span_basis(columns: &[Vec<f64>], budget: f64, tol: f64, cap: usize) -> Option<Dictionary> {
    let atoms = span_atoms(columns);
    if atoms.len() > cap {
        return None;
    }
    let n = columns[0].len() as f64;
    // coefficients are unique: ||c||_1 = sum_i |<col, atom_i>| / n
    let need: Vec<f64> = columns
        .iter()
        .map(|c| atoms.iter().map(|a| dot(a, c).abs()).sum::<f64>() / n)
        .collect();
    let worst = need.iter().cloned().fold(0.0, f64::max);
    if worst > budget * (1.0 + 1e-6) + tol {
        return None;
    }
    let dict = Dictionary::from_atoms(&atoms).ok()?;
    let mut order: Vec<usize> = (0..columns.len()).collect();
    order.sort_by(|&i, &j| need[j].total_cmp(&need[i]).then(i.cmp(&j)));
    audit_in_order(&dict, columns, &order, budget, tol).then_some(dict)
}
