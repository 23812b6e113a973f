//! Prediction-error bounds for the Lasso and the quantities they depend on.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::simcore::{dot, fill_normal, Matrix, Seed, Vector};

/// `2 lambda ||beta0||_1`, valid for any design on the event `T`.
pub fn slow_rate_bound(lambda: f64, beta0: &[f64]) -> f64 {
    2.0 * lambda * l1(beta0)
}

/// `2 lambda min(||beta0||_1, ||(betahat - beta0)_J0||_1)` with
/// `J0 = support(beta0)`.
pub fn improved_slow_rate(lambda: f64, beta0: &[f64], betahat: &[f64]) -> Result<f64> {
    if beta0.len() != betahat.len() {
        return Err(Error::DimensionMismatch(format!(
            "beta0 has {} entries, betahat {}",
            beta0.len(),
            betahat.len()
        )));
    }
    let on_support: f64 = beta0
        .iter()
        .zip(betahat)
        .filter(|(b0, _)| **b0 != 0.0)
        .map(|(b0, b)| (b - b0).abs())
        .sum();
    Ok(2.0 * lambda * l1(beta0).min(on_support))
}

/// `lambda^2 sbar / (n phi^2)`, valid on `T` under the restricted
/// eigenvalue condition.
pub fn fast_rate_bound(lambda: f64, sbar: usize, phi: f64, n: usize) -> Result<f64> {
    if !(phi > 0.0) {
        return Err(Error::ReViolated(phi));
    }
    if n == 0 {
        return Err(Error::EmptyInput("n"));
    }
    Ok(lambda * lambda * sbar as f64 / (n as f64 * phi * phi))
}

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|b| b.abs()).sum()
}

/// Best restricted-eigenvalue witness found by the search. `phi_hat` is
/// attained by the witness, so it is an upper bound on `phi(sbar)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReConstantEstimate {
    pub sbar: usize,
    pub phi_hat: f64,
    pub j0: Vec<usize>,
    pub delta: Vector,
    pub samples: usize,
}

/// `||X delta||_2 / (sqrt(n) ||delta_J0||_2)`.
pub fn re_ratio(x: &Matrix, j0: &[usize], delta: &[f64]) -> f64 {
    let fit = x.matvec(delta).expect("shape checked by caller");
    let on: f64 = j0.iter().map(|&j| delta[j] * delta[j]).sum();
    (dot(&fit, &fit) / (x.rows() as f64 * on)).sqrt()
}

/// Whether `||delta_{J0^c}||_1 <= 3 ||delta_J0||_1 + 1e-9`.
pub fn in_cone(j0: &[usize], delta: &[f64]) -> bool {
    let on: f64 = j0.iter().map(|&j| delta[j].abs()).sum();
    let total = l1(delta);
    total - on <= 3.0 * on + 1e-9
}

const DESCENT_ITERS: usize = 60;

/// Upper estimate of `phi(sbar)`: the smallest ratio over `budget` random
/// feasible pairs plus near-duplicate column pairs, each refined by
/// projected gradient descent inside the cone. Candidate `k` is drawn from
/// `seed.derive(k)`, so raising `budget` never raises the estimate.
pub fn re_constant_estimate(design: &DesignMatrix, sbar: usize, budget: usize, seed: Seed) -> Result<ReConstantEstimate> {
    let p = design.p();
    if sbar == 0 || sbar > p {
        return Err(Error::InvalidParameter(format!("sbar = {sbar} must lie in 1..={p}")));
    }
    let x = design.matrix();
    let gram_diag = x.column_norms_sq();

    let mut starts: Vec<(Vec<usize>, Vec<f64>)> = pair_candidates(x, &gram_diag, sbar);
    starts.extend((0..budget).map(|k| random_candidate(p, sbar, &mut seed.derive(k as u64).rng(), k % 2 == 0)));
    let samples = starts.len();

    let best = starts
        .into_par_iter()
        .map(|(j0, delta)| descend(x, j0, delta, sbar))
        .reduce_with(|a, b| if b.2 < a.2 { b } else { a })
        .expect("at least one candidate");
    let (j0, delta, phi_hat) = best;
    debug_assert!(in_cone(&j0, &delta));
    Ok(ReConstantEstimate {
        sbar,
        phi_hat,
        j0,
        delta: Vector::new(delta)?,
        samples,
    })
}

/// `delta = e_j - sign e_k` for the most correlated column pairs, `J0 = {j}`.
fn pair_candidates(x: &Matrix, diag: &[f64], sbar: usize) -> Vec<(Vec<usize>, Vec<f64>)> {
    let p = x.cols();
    if p < 2 {
        return Vec::new();
    }
    let cols = x.columns();
    let mut pairs: Vec<(f64, usize, usize, f64)> = Vec::new();
    for j in 0..p {
        for k in j + 1..p {
            let c = dot(&cols[j], &cols[k]) / (diag[j] * diag[k]).sqrt();
            pairs.push((c.abs(), j, k, c.signum()));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    pairs
        .into_iter()
        .take(8)
        .map(|(_, j, k, s)| {
            let mut delta = vec![0.0; p];
            delta[j] = 1.0;
            delta[k] = -s;
            let mut j0 = vec![j];
            // pad J0 with further indices; they carry zero mass
            j0.extend((0..p).filter(|&i| i != j && i != k).take(sbar - 1));
            j0.sort_unstable();
            (j0, delta)
        })
        .collect()
}

fn random_candidate(p: usize, sbar: usize, rng: &mut ChaCha8Rng, on_support_only: bool) -> (Vec<usize>, Vec<f64>) {
    let mut idx: Vec<usize> = (0..p).collect();
    for i in 0..sbar {
        let k = rng.random_range(i..p);
        idx.swap(i, k);
    }
    let mut j0 = idx[..sbar].to_vec();
    j0.sort_unstable();
    let z = fill_normal(rng, p);
    let mut delta = vec![0.0; p];
    for &j in &j0 {
        delta[j] = z[j];
    }
    if !on_support_only {
        let on = l1(&delta);
        let off_l1: f64 = (0..p).filter(|j| !j0.contains(j)).map(|j| z[j].abs()).sum();
        if off_l1 > 0.0 {
            let scale = 3.0 * on * rng.random::<f64>() / off_l1;
            for j in (0..p).filter(|j| !j0.contains(j)) {
                delta[j] = z[j] * scale;
            }
        }
    }
    (j0, delta)
}

/// Euclidean projection of `v` onto the l1 ball of radius `r`.
pub(crate) fn project_l1_ball(v: &mut [f64], r: f64) {
    if l1(v) <= r {
        return;
    }
    if r <= 0.0 {
        v.iter_mut().for_each(|x| *x = 0.0);
        return;
    }
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, m) in mags.iter().enumerate() {
        cum += m;
        let t = (cum - r) / (i + 1) as f64;
        if *m > t {
            theta = t;
        }
    }
    v.iter_mut().for_each(|x| *x = x.signum() * (x.abs() - theta).max(0.0));
}

/// Feasible point near `delta`: the off-support part is projected onto the
/// l1 ball of radius `3 ||delta_J0||_1`.
fn make_feasible(j0: &[usize], delta: &mut [f64]) {
    let on: f64 = j0.iter().map(|&j| delta[j].abs()).sum();
    let off_idx: Vec<usize> = (0..delta.len()).filter(|j| j0.binary_search(j).is_err()).collect();
    let mut off: Vec<f64> = off_idx.iter().map(|&j| delta[j]).collect();
    // shrink slightly below the boundary so rounding keeps it inside
    project_l1_ball(&mut off, 3.0 * on * (1.0 - 1e-12));
    for (&j, v) in off_idx.iter().zip(off) {
        delta[j] = v;
    }
}

/// Projected gradient descent on the squared ratio with backtracking.
/// Afterwards `J0` is moved to the `sbar` largest entries when that keeps
/// the point feasible and lowers the ratio.
fn descend(x: &Matrix, mut j0: Vec<usize>, mut delta: Vec<f64>, sbar: usize) -> (Vec<usize>, Vec<f64>, f64) {
    let n = x.rows() as f64;
    make_feasible(&j0, &mut delta);
    if j0.iter().all(|&j| delta[j] == 0.0) {
        return (j0, delta, f64::INFINITY);
    }
    let mut ratio = re_ratio(x, &j0, &delta);
    let mut step = 1.0;
    for _ in 0..DESCENT_ITERS {
        if ratio == 0.0 {
            break;
        }
        let on_sq: f64 = j0.iter().map(|&j| delta[j] * delta[j]).sum();
        let fit = x.matvec(&delta).expect("shapes agree");
        let fit_sq = dot(&fit, &fit);
        let mut grad = x.tr_matvec(&fit).expect("shapes agree").into_inner();
        grad.iter_mut().for_each(|g| *g *= 2.0 / (n * on_sq));
        for &j in &j0 {
            grad[j] -= 2.0 * fit_sq * delta[j] / (n * on_sq * on_sq);
        }
        let scale = on_sq.sqrt();
        let mut improved = false;
        for _ in 0..40 {
            let mut trial: Vec<f64> = delta.iter().zip(&grad).map(|(d, g)| d - step * scale * scale * g).collect();
            make_feasible(&j0, &mut trial);
            if j0.iter().any(|&j| trial[j] != 0.0) {
                let r = re_ratio(x, &j0, &trial);
                if r < ratio {
                    delta = trial;
                    ratio = r;
                    improved = true;
                    step *= 2.0;
                    break;
                }
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
        let norm = delta.iter().map(|d| d * d).sum::<f64>().sqrt();
        delta.iter_mut().for_each(|d| *d /= norm);
    }
    let mut by_mag: Vec<usize> = (0..delta.len()).collect();
    by_mag.sort_by(|&a, &b| delta[b].abs().total_cmp(&delta[a].abs()).then(a.cmp(&b)));
    let mut top = by_mag[..sbar].to_vec();
    top.sort_unstable();
    if top != j0 && in_cone(&top, &delta) {
        let r = re_ratio(x, &top, &delta);
        if r < ratio {
            j0 = top;
            ratio = r;
        }
    }
    (j0, delta, ratio)
}

/// Inputs to the high-correlation bound. `c` stands in for the constant
/// `C(alpha, A)`, whose existence is asserted without a value; it defaults
/// to 1 and every numeric result scales with it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HighCorrParams {
    pub alpha: f64,
    /// Used directly when present; otherwise formed from `sigma`, `c`,
    /// `kappa` as `sigma C sqrt(n^(2 - alpha) log(2 / kappa))`.
    pub lambda_tilde: Option<f64>,
    pub c: f64,
    pub a: f64,
    pub kappa: f64,
    pub sigma: f64,
}

impl HighCorrParams {
    pub fn new(alpha: f64) -> Self {
        HighCorrParams {
            alpha,
            lambda_tilde: None,
            c: 1.0,
            a: 1.0,
            kappa: 0.05,
            sigma: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HighCorrBound {
    pub lambda_tilde: f64,
    /// `(2 lt n^(alpha - 1))^(2 / (1 + alpha)) ||beta0||_1^((alpha - 1) / (1 + alpha))`.
    pub lambda: f64,
    /// `(21/2) (2 lt n^(alpha - 1))^(2 / (1 + alpha)) ||beta0||_1^(2 alpha / (1 + alpha))`.
    pub bound: f64,
    /// The same bound with `lt` written out, as
    /// `(21/2) (sigma C sqrt(n^alpha log(2 / kappa)))^(2 / (1 + alpha)) ||beta0||_1^(2 alpha / (1 + alpha))`.
    /// Substituting `lt` into `bound` gives this times `2^(2 / (1 + alpha))`.
    pub display_bound: f64,
}

pub fn high_corr_bound(params: &HighCorrParams, n: usize, beta0_l1: f64) -> Result<HighCorrBound> {
    let alpha = params.alpha;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    if !(beta0_l1 > 0.0) || n == 0 {
        return Err(Error::InvalidParameter("need ||beta0||_1 > 0 and n > 0".into()));
    }
    if !(params.kappa > 0.0) {
        return Err(Error::InvalidParameter(format!("kappa = {} must be > 0", params.kappa)));
    }
    let nf = n as f64;
    let log_term = (2.0 / params.kappa).ln();
    let lambda_tilde = match params.lambda_tilde {
        Some(lt) => lt,
        None => params.sigma * params.c * (nf.powf(2.0 - alpha) * log_term).sqrt(),
    };
    let e = 2.0 / (1.0 + alpha);
    let base = (2.0 * lambda_tilde * nf.powf(alpha - 1.0)).powf(e);
    let lambda = base * beta0_l1.powf((alpha - 1.0) / (1.0 + alpha));
    let bound = 10.5 * base * beta0_l1.powf(2.0 * alpha / (1.0 + alpha));
    let display_bound = 10.5
        * (params.sigma * params.c * (nf.powf(alpha) * log_term).sqrt()).powf(e)
        * beta0_l1.powf(2.0 * alpha / (1.0 + alpha));
    Ok(HighCorrBound {
        lambda_tilde,
        lambda,
        bound,
        display_bound,
    })
}

/// Optimistic estimate of `P(T_alpha)`: per noise draw the supremum of
/// `2 sigma |eps^T X b| / (||X b||^(1 - alpha) ||b||_1^alpha)` is bounded
/// from below by basis vectors, random directions and pairwise moves, and
/// the draw counts as inside when that lower bound is at most
/// `lambda_tilde`. The true supremum can be larger, so the estimate can
/// only overstate the probability.
pub fn event_t_alpha_estimate(
    design: &DesignMatrix,
    sigma: f64,
    alpha: f64,
    lambda_tilde: f64,
    draws: usize,
    search_budget: usize,
    seed: Seed,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    if draws == 0 {
        return Err(Error::EmptyInput("draws"));
    }
    let x = design.matrix();
    let (n, p) = (x.rows(), x.cols());
    let cols = x.columns();
    let norms: Vec<f64> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    // random directions shared by all draws, as (fit, ||b||_1)
    let mut rng = seed.derive(u64::MAX).rng();
    let directions: Vec<(Vec<f64>, f64)> = (0..search_budget)
        .map(|_| {
            let k = 1 + rng.random_range(0..p.min(4));
            let mut b = vec![0.0; p];
            for _ in 0..k {
                b[rng.random_range(0..p)] = fill_normal(&mut rng, 1)[0];
            }
            if b.iter().all(|v| *v == 0.0) {
                b[0] = 1.0;
            }
            let fit = x.matvec(&b).expect("shape").into_inner();
            (fit, l1(&b))
        })
        .collect();
    let stat = |num: f64, fit_norm: f64, b_l1: f64| -> f64 {
        if num == 0.0 {
            return 0.0;
        }
        if fit_norm == 0.0 {
            return f64::INFINITY;
        }
        2.0 * sigma * num / (fit_norm.powf(1.0 - alpha) * b_l1.powf(alpha))
    };
    let inside = (0..draws)
        .into_par_iter()
        .filter(|&d| {
            let eps = fill_normal(&mut seed.derive(d as u64).rng(), n);
            let corr: Vec<f64> = cols.iter().map(|c| dot(c, &eps)).collect();
            for j in 0..p {
                if stat(corr[j].abs(), norms[j], 1.0) > lambda_tilde {
                    return false;
                }
            }
            for (fit, b_l1) in &directions {
                let fit_norm = dot(fit, fit).sqrt();
                if stat(dot(fit, &eps).abs(), fit_norm, *b_l1) > lambda_tilde {
                    return false;
                }
            }
            // pair moves around the two most correlated columns
            let mut order: Vec<usize> = (0..p).collect();
            order.sort_by(|&a, &b| corr[b].abs().total_cmp(&corr[a].abs()));
            let top = &order[..p.min(6)];
            for (ia, &a) in top.iter().enumerate() {
                for &b in &top[ia + 1..] {
                    for s in [1.0, -1.0] {
                        let fit: Vec<f64> = cols[a].iter().zip(&cols[b]).map(|(u, v)| u + s * v).collect();
                        let num = (corr[a] + s * corr[b]).abs();
                        if stat(num, dot(&fit, &fit).sqrt(), 2.0) > lambda_tilde {
                            return false;
                        }
                    }
                }
            }
            true
        })
        .count();
    Ok(inside as f64 / draws as f64)
}
