//! Exact Lasso homotopy (LARS with the Lasso drop rule).
//!
//! Objective: `||Y - X b||^2 + lambda ||b||_1`, no 1/2 factor. The solver
//! tracks `c = X^T (Y - X b)` and reports knots as `lambda = 2 max |c_j|`.

use std::io::Write;

use crate::design::{format_f64, parse_f64, DesignMatrix};
use crate::error::{Error, Result};
use crate::simcore::{dot, Cholesky, Matrix, Vector};

/// Pivot threshold (relative to the column's squared norm) below which a
/// candidate column is treated as linearly dependent on the active set.
const DEPENDENCE_TOL: f64 = 1e-10;

/// Relative tolerance for simultaneous events.
const EVENT_TOL: f64 = 1e-12;

/// A point of the path where the active set changes.
#[derive(Debug, Clone, PartialEq)]
pub struct Knot {
    pub lambda: f64,
    pub beta: Vec<f64>,
}

/// Piecewise-linear Lasso solution path.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoPath {
    p: usize,
    knots: Vec<f64>,
    coefs: Vec<Vec<f64>>,
    active_sets: Vec<Vec<usize>>,
}

/// `beta(lambda) = base + lambda * slope` on `[lower, upper]`.
#[derive(Debug, Clone)]
pub struct Segment {
    pub upper: f64,
    pub lower: f64,
    pub base: Vector,
    pub slope: Vector,
    pub active: Vec<usize>,
}

impl LassoPath {
    pub fn p(&self) -> usize {
        self.p
    }

    /// Knot values, strictly decreasing, ending at 0.
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Coefficients at each knot.
    pub fn knot_coefs(&self) -> &[Vec<f64>] {
        &self.coefs
    }

    pub fn lambda_max(&self) -> f64 {
        self.knots[0]
    }

    pub fn active_sets(&self) -> &[Vec<usize>] {
        &self.active_sets
    }

    pub fn segments(&self) -> Vec<Segment> {
        (0..self.knots.len().saturating_sub(1))
            .map(|k| {
                let (hi, lo) = (self.knots[k], self.knots[k + 1]);
                let width = hi - lo;
                let slope: Vec<f64> = self.coefs[k]
                    .iter()
                    .zip(&self.coefs[k + 1])
                    .map(|(a, b)| (a - b) / width)
                    .collect();
                let base: Vec<f64> = self.coefs[k]
                    .iter()
                    .zip(&slope)
                    .map(|(a, s)| a - hi * s)
                    .collect();
                Segment {
                    upper: hi,
                    lower: lo,
                    base: Vector::from_vec_unchecked(base),
                    slope: Vector::from_vec_unchecked(slope),
                    active: self.active_sets[k].clone(),
                }
            })
            .collect()
    }

    /// Largest active-set size along the path.
    pub fn max_active(&self) -> usize {
        self.active_sets.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Coefficients at `lambda` by segment lookup and linear interpolation.
    pub fn solve_at(&self, lambda: f64) -> Result<Vector> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda = {lambda}")));
        }
        if lambda >= self.knots[0] {
            return Ok(Vector::zeros(self.p));
        }
        let last = self.knots.len() - 1;
        if lambda <= self.knots[last] {
            return Ok(Vector::from_vec_unchecked(self.coefs[last].clone()));
        }
        // first index with knots[k] < lambda
        let k = self.knots.partition_point(|v| *v >= lambda);
        let (hi, lo) = (self.knots[k - 1], self.knots[k]);
        let t = (hi - lambda) / (hi - lo);
        let beta = self.coefs[k - 1]
            .iter()
            .zip(&self.coefs[k])
            .map(|(a, b)| a + t * (b - a))
            .collect();
        Ok(Vector::from_vec_unchecked(beta))
    }

    /// One row per knot: `lambda,beta_1,…,beta_p`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# lambda,beta_1..beta_{}", self.p)?;
        let mut line = String::new();
        for (lambda, beta) in self.knots.iter().zip(&self.coefs) {
            line.clear();
            line.push_str(&format_f64(*lambda));
            for b in beta {
                line.push(',');
                line.push_str(&format_f64(*b));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    /// Reads the format of [`LassoPath::write_csv`]. Knots must be strictly
    /// decreasing and nonnegative; active sets are rebuilt from the
    /// coefficients.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut knots = Vec::new();
        let mut coefs: Vec<Vec<f64>> = Vec::new();
        let mut p = None;
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut values = line.split(',').map(|t| parse_f64(t, lineno));
            let lambda = values.next().expect("split yields at least one item")?;
            let beta = values.collect::<Result<Vec<f64>>>()?;
            if beta.is_empty() {
                return Err(Error::parse(lineno, "row has no coefficients"));
            }
            match p {
                None => p = Some(beta.len()),
                Some(q) if q != beta.len() => {
                    return Err(Error::parse(
                        lineno,
                        format!("expected {q} coefficients, found {}", beta.len()),
                    ))
                }
                _ => {}
            }
            if lambda < 0.0 || knots.last().is_some_and(|prev| lambda >= *prev) {
                return Err(Error::parse(lineno, "knots must be nonnegative and strictly decreasing"));
            }
            knots.push(lambda);
            coefs.push(beta);
        }
        let p = p.ok_or_else(|| Error::parse(1, "no knots"))?;
        let active_sets = (0..knots.len().saturating_sub(1))
            .map(|k| {
                (0..p)
                    .filter(|j| coefs[k][*j] != 0.0 || coefs[k + 1][*j] != 0.0)
                    .collect()
            })
            .collect();
        Ok(LassoPath {
            p,
            knots,
            coefs,
            active_sets,
        })
    }
}

/// Full Lasso path of `y` on a normalized design.
pub fn lars_lasso_path(design: &DesignMatrix, y: &Vector) -> Result<LassoPath> {
    lasso_path_matrix(design.matrix(), y)
}

/// Full Lasso path of `y` on an arbitrary matrix with nonzero columns.
pub fn lasso_path_matrix(x: &Matrix, y: &[f64]) -> Result<LassoPath> {
    let mut homotopy = Homotopy::new(x, y)?;
    let mut knots = Vec::new();
    let mut coefs = Vec::new();
    let mut active_sets = Vec::new();
    while let Some(step) = homotopy.next_knot()? {
        if !knots.is_empty() {
            active_sets.push(step.active_before);
        }
        knots.push(step.knot.lambda);
        coefs.push(step.knot.beta);
    }
    Ok(LassoPath {
        p: x.cols(),
        knots,
        coefs,
        active_sets,
    })
}

pub(crate) struct Step {
    pub knot: Knot,
    /// Active set on the segment that ends at this knot.
    pub active_before: Vec<usize>,
}

/// Incremental path generator. Yields the knot at `lambda_max` first and
/// the least-squares end point at `lambda = 0` last.
pub(crate) struct Homotopy<'a> {
    source: Source<'a>,
    col_sq: Vec<f64>,
    beta: Vec<f64>,
    corr: Vec<f64>,
    c_max: f64,
    active: Vec<usize>,
    signs: Vec<f64>,
    is_active: Vec<bool>,
    blocked: Vec<bool>,
    just_dropped: Vec<usize>,
    chol: Cholesky,
    started: bool,
    done: bool,
    iterations: usize,
    max_iterations: usize,
}

enum Source<'a> {
    Dense { x: &'a Matrix, y: &'a [f64] },
    /// `X^T X` and `X^T y` only; used when many responses share one matrix.
    Gram { gram: &'a [Vec<f64>], xty: Vec<f64> },
}

impl<'a> Homotopy<'a> {
    pub fn new(x: &'a Matrix, y: &'a [f64]) -> Result<Self> {
        if y.len() != x.rows() {
            return Err(Error::DimensionMismatch(format!(
                "response of length {} for {} rows",
                y.len(),
                x.rows()
            )));
        }
        let col_sq = x.column_norms_sq();
        let corr = x.tr_matvec(y)?.into_inner();
        let max_iterations = 50 * (x.rows() + x.cols()) + 100;
        Self::build(Source::Dense { x, y }, col_sq, corr, max_iterations)
    }

    /// Path from the rows of the Gram matrix `X^T X` and the correlations
    /// `X^T y`.
    pub fn from_gram(gram: &'a [Vec<f64>], xty: Vec<f64>) -> Result<Self> {
        let p = gram.len();
        if xty.len() != p || gram.iter().any(|row| row.len() != p) {
            return Err(Error::DimensionMismatch(format!(
                "gram with {p} rows and {} correlations",
                xty.len()
            )));
        }
        let col_sq = (0..p).map(|j| gram[j][j]).collect();
        let corr = xty.clone();
        Self::build(Source::Gram { gram, xty }, col_sq, corr, 100 * p + 100)
    }

    fn build(source: Source<'a>, col_sq: Vec<f64>, corr: Vec<f64>, max_iterations: usize) -> Result<Self> {
        if let Some(j) = col_sq.iter().position(|v| !(*v > 0.0)) {
            return Err(Error::InvalidParameter(format!("column {j} is zero")));
        }
        let p = col_sq.len();
        let c_max = corr.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Homotopy {
            source,
            col_sq,
            beta: vec![0.0; p],
            corr,
            c_max,
            active: Vec::new(),
            signs: Vec::new(),
            is_active: vec![false; p],
            blocked: vec![false; p],
            just_dropped: Vec::new(),
            chol: Cholesky::new(),
            started: false,
            done: false,
            iterations: 0,
            max_iterations,
        })
    }

    fn lambda(&self) -> f64 {
        2.0 * self.c_max
    }

    fn try_activate(&mut self, j: usize) {
        let cross: Vec<f64> = self
            .active
            .iter()
            .map(|&k| self.gram(j, k))
            .collect();
        if self.chol.try_push(&cross, self.col_sq[j], DEPENDENCE_TOL) {
            self.active.push(j);
            self.signs.push(self.corr[j].signum());
            self.is_active[j] = true;
        } else {
            self.blocked[j] = true;
        }
    }

    fn gram(&self, j: usize, k: usize) -> f64 {
        match &self.source {
            Source::Dense { x, .. } => (0..x.rows()).map(|i| x.get(i, j) * x.get(i, k)).sum(),
            Source::Gram { gram, .. } => gram[j][k],
        }
    }

    /// `X^T X_A w` for the active set `A`.
    fn direction(&self, w: &[f64]) -> Vec<f64> {
        match &self.source {
            Source::Dense { x, .. } => {
                let mut u = vec![0.0; x.rows()];
                for (i, ui) in u.iter_mut().enumerate() {
                    let row = x.row(i);
                    *ui = self.active.iter().zip(w).map(|(&j, wj)| row[j] * wj).sum();
                }
                x.tr_matvec(&u).expect("shapes checked").into_inner()
            }
            Source::Gram { gram, .. } => {
                let mut a = vec![0.0; gram.len()];
                for (&j, wj) in self.active.iter().zip(w) {
                    for (ai, g) in a.iter_mut().zip(&gram[j]) {
                        *ai += g * wj;
                    }
                }
                a
            }
        }
    }

    fn refactor(&mut self) {
        let active = std::mem::take(&mut self.active);
        let signs = std::mem::take(&mut self.signs);
        self.chol = Cholesky::new();
        for (j, s) in active.into_iter().zip(signs) {
            let cross: Vec<f64> = self.active.iter().map(|&k| self.gram(j, k)).collect();
            // columns that were independent stay independent after a removal
            let ok = self.chol.try_push(&cross, self.col_sq[j], 0.0);
            debug_assert!(ok);
            self.active.push(j);
            self.signs.push(s);
        }
    }

    fn refresh_correlations(&mut self) {
        self.corr = match &self.source {
            Source::Dense { x, y } => {
                let mut resid = y.to_vec();
                for (i, r) in resid.iter_mut().enumerate() {
                    let row = x.row(i);
                    *r -= self.active.iter().map(|&j| row[j] * self.beta[j]).sum::<f64>();
                }
                x.tr_matvec(&resid).expect("shapes checked").into_inner()
            }
            Source::Gram { gram, xty } => {
                let mut c = xty.clone();
                for &j in &self.active {
                    let bj = self.beta[j];
                    for (ci, g) in c.iter_mut().zip(&gram[j]) {
                        *ci -= g * bj;
                    }
                }
                c
            }
        };
    }

    /// Advances to the next knot. Returns `None` after the `lambda = 0` knot.
    pub fn next_knot(&mut self) -> Result<Option<Step>> {
        if self.done {
            return Ok(None);
        }
        if !self.started {
            self.started = true;
            if self.c_max == 0.0 {
                self.done = true;
            } else {
                // lowest index among the maximal correlations
                let c = self.c_max;
                let first = (0..self.corr.len())
                    .find(|&j| self.corr[j].abs() >= c * (1.0 - EVENT_TOL))
                    .expect("maximum is attained");
                self.try_activate(first);
            }
            return Ok(Some(Step {
                knot: Knot {
                    lambda: self.lambda(),
                    beta: self.beta.clone(),
                },
                active_before: Vec::new(),
            }));
        }
        loop {
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(Error::Degenerate(self.lambda()));
            }
            if self.active.is_empty() {
                return Err(Error::Degenerate(self.lambda()));
            }
            let c = self.c_max;
            let w = self.chol.solve(&self.signs);
            let a = self.direction(&w);

            // step to the end of the path
            let mut gamma = c;
            let mut entering: Vec<(usize, f64)> = Vec::new();
            for j in 0..self.corr.len() {
                if self.is_active[j] || self.blocked[j] {
                    continue;
                }
                // a column dropped at this knot sits on the boundary; only a
                // later crossing can bring it back
                let floor = if self.just_dropped.contains(&j) { c * 1e-9 } else { -1.0 };
                let cj = self.corr[j];
                let aj = a[j];
                let mut g = f64::INFINITY;
                if 1.0 - aj > 1e-14 {
                    let r = (c - cj).max(0.0) / (1.0 - aj);
                    if r > floor {
                        g = g.min(r);
                    }
                }
                if 1.0 + aj > 1e-14 {
                    let r = (c + cj).max(0.0) / (1.0 + aj);
                    if r > floor {
                        g = g.min(r);
                    }
                }
                if g < c * (1.0 - EVENT_TOL) {
                    entering.push((j, g));
                    gamma = gamma.min(g);
                }
            }
            let mut dropping: Vec<(usize, f64)> = Vec::new();
            for (k, &j) in self.active.iter().enumerate() {
                if self.beta[j] * w[k] < 0.0 {
                    let g = -self.beta[j] / w[k];
                    dropping.push((k, g));
                    gamma = gamma.min(g);
                }
            }
            let tol = EVENT_TOL * c;
            let finishing = gamma >= c * (1.0 - EVENT_TOL);
            let active_before = self.active.clone();

            for (k, &j) in self.active.iter().enumerate() {
                self.beta[j] += gamma * w[k];
            }
            if gamma > tol {
                self.just_dropped.clear();
            }

            if finishing {
                self.c_max = 0.0;
                self.done = true;
                return Ok(Some(Step {
                    knot: Knot {
                        lambda: 0.0,
                        beta: self.beta.clone(),
                    },
                    active_before,
                }));
            }
            self.c_max = c - gamma;

            let drops: Vec<usize> = dropping
                .iter()
                .filter(|(_, g)| *g <= gamma + tol)
                .map(|(k, _)| self.active[*k])
                .collect();
            if !drops.is_empty() {
                for &j in &drops {
                    self.beta[j] = 0.0;
                    self.is_active[j] = false;
                }
                let keep: Vec<(usize, f64)> = self
                    .active
                    .iter()
                    .zip(&self.signs)
                    .filter(|(j, _)| !drops.contains(j))
                    .map(|(j, s)| (*j, *s))
                    .collect();
                self.active = keep.iter().map(|v| v.0).collect();
                self.signs = keep.iter().map(|v| v.1).collect();
                self.refactor();
                self.blocked.iter_mut().for_each(|b| *b = false);
                self.just_dropped.extend(drops);
            }
            self.refresh_correlations();
            let mut entries: Vec<usize> = entering
                .iter()
                .filter(|(_, g)| *g <= gamma + tol)
                .map(|(j, _)| *j)
                .collect();
            entries.sort_unstable();
            for j in entries {
                self.try_activate(j);
            }
            if gamma > tol {
                return Ok(Some(Step {
                    knot: Knot {
                        lambda: self.lambda(),
                        beta: self.beta.clone(),
                    },
                    active_before,
                }));
            }
        }
    }
}

/// `||X (beta - beta0)||_2^2`.
pub fn prediction_error(design: &DesignMatrix, beta: &[f64], beta0: &[f64]) -> Result<f64> {
    if beta.len() != design.p() || beta0.len() != design.p() {
        return Err(Error::DimensionMismatch("prediction_error".into()));
    }
    let diff: Vec<f64> = beta.iter().zip(beta0).map(|(a, b)| a - b).collect();
    let fit = design.matrix().matvec(&diff)?;
    Ok(dot(&fit, &fit))
}

/// Exact minimizer of `PE(lambda) = ||X (beta(lambda) - beta0)||^2` over
/// `[0, lambda_max]`. PE is quadratic on each segment. Ties go to the
/// larger `lambda`.
pub fn optimal_lambda(path: &LassoPath, design: &DesignMatrix, beta0: &[f64]) -> Result<(f64, f64)> {
    let x = design.matrix();
    let knots = path.knots();
    let fits: Vec<Vector> = path
        .knot_coefs()
        .iter()
        .map(|b| {
            let diff: Vec<f64> = b.iter().zip(beta0).map(|(a, t)| a - t).collect();
            x.matvec(&diff)
        })
        .collect::<Result<_>>()?;
    let mut best_lambda = knots[0];
    let mut best_pe = dot(&fits[0], &fits[0]);
    for k in 0..knots.len().saturating_sub(1) {
        // PE(t) = ||lo + t (hi - lo)||^2, t = 0 at the lower knot
        let lo = &fits[k + 1];
        let d: Vec<f64> = fits[k].iter().zip(lo.iter()).map(|(h, l)| h - l).collect();
        let dd = dot(&d, &d);
        let t = if dd > 0.0 {
            (-dot(lo, &d) / dd).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let pe: f64 = lo
            .iter()
            .zip(&d)
            .map(|(l, di)| (l + t * di).powi(2))
            .sum();
        if pe < best_pe {
            best_pe = pe;
            best_lambda = knots[k + 1] + t * (knots[k] - knots[k + 1]);
        }
    }
    Ok((best_lambda, best_pe))
}
