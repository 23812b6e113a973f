use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::check_kappa;
use super::membership::Dictionary;
use super::search::{root_n_columns, search, SearchOptions, Strategy, DEFAULT_TOL};
use super::tuning_lambda_kappa;
use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::simcore::Vector;

/// Certified upper bounds on `K(x)` over a grid, and the factors and tuning
/// parameter derived from them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationProfile {
    pub kappa: f64,
    pub sigma: f64,
    pub n: usize,
    pub p: usize,
    pub x_grid: Vec<f64>,
    #[serde(rename = "K_upper")]
    pub k_upper: Vec<usize>,
    #[serde(rename = "K_kappa_hat")]
    pub k_kappa_hat: f64,
    #[serde(rename = "F_hat")]
    pub f_hat: f64,
    pub lambda_kappa: f64,
    /// Dictionary witnessing each entry of `k_upper`; neighbouring grid
    /// points often share one.
    #[serde(skip)]
    pub certificate: Vec<Arc<Vec<Vector>>>,
}

impl CorrelationProfile {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses an exported profile (without certificates) and checks its
    /// invariants.
    pub fn from_json(text: &str) -> Result<Self> {
        let profile: CorrelationProfile = serde_json::from_str(text)?;
        if profile.x_grid.len() != profile.k_upper.len() || profile.x_grid.is_empty() {
            return Err(Error::InvalidParameter("x_grid and K_upper lengths differ".into()));
        }
        check_grid(&profile.x_grid)?;
        check_kappa(profile.kappa)?;
        if profile.k_upper.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter("K_upper must be nonincreasing".into()));
        }
        if profile.k_upper.iter().any(|&k| k == 0 || k > profile.p) {
            return Err(Error::InvalidParameter("K_upper entries must lie in 1..=p".into()));
        }
        for v in [profile.k_kappa_hat, profile.f_hat, profile.lambda_kappa, profile.sigma] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::NonFinite("profile scalar"));
            }
        }
        Ok(profile)
    }
}

#[derive(Debug, Clone)]
pub struct ProfileOptions {
    pub kappa: f64,
    pub sigma: f64,
    pub x_grid: Vec<f64>,
    pub tol: f64,
    pub strategies: Vec<Strategy>,
    /// Seed atoms for `ColumnSubset`, e.g. a scaled standard basis.
    pub seeds: Vec<Vector>,
    /// Skip searches that cannot lower either correlation factor. `K_upper`
    /// stays valid but may be looser at such grid points.
    pub prune: bool,
}

impl ProfileOptions {
    pub fn new(n: usize, kappa: f64) -> Self {
        ProfileOptions {
            kappa,
            sigma: 1.0,
            x_grid: default_x_grid(n),
            tol: DEFAULT_TOL,
            strategies: Strategy::ALL.to_vec(),
            seeds: Vec::new(),
            prune: true,
        }
    }
}

/// `{0, 0.25, 0.5, 1, 2, 4, sqrt(n)}`, sorted.
pub fn default_x_grid(n: usize) -> Vec<f64> {
    let mut grid = vec![0.0, 0.25, 0.5, 1.0, 2.0, 4.0, (n as f64).sqrt()];
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.first() != Some(&0.0) {
        return Err(Error::InvalidParameter("x grid must start at 0".into()));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("x grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// `(1 + x) sqrt(log(2K / kappa) / log(2p / kappa))`.
pub fn kappa_factor_at(k: usize, p: usize, x: f64, kappa: f64) -> f64 {
    (1.0 + x) * ((2.0 * k as f64 / kappa).ln() / (2.0 * p as f64 / kappa).ln()).sqrt()
}

/// `(1 + x) sqrt(log(1 + K) / log(1 + p))`.
pub fn f_factor_at(k: usize, p: usize, x: f64) -> f64 {
    (1.0 + x) * ((1.0 + k as f64).ln() / (1.0 + p as f64).ln()).sqrt()
}

/// Largest `k` in `0..=hi` with `pred(k)`, for `pred` true on a prefix.
fn last_true(hi: usize, pred: impl Fn(usize) -> bool) -> usize {
    if hi == 0 || !pred(1) {
        return 0;
    }
    let (mut lo, mut hi) = (1, hi);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

struct Best {
    k: Vec<usize>,
    cert: Vec<Arc<Vec<Vector>>>,
}

impl Best {
    /// Records `dict` at grid index `i` and every later index it improves.
    fn offer(&mut self, i: usize, dict: Dictionary) {
        let len = dict.len();
        let cert = Arc::new(dict.into_vectors());
        for j in i..self.k.len() {
            if len < self.k[j] {
                self.k[j] = len;
                self.cert[j] = cert.clone();
            }
        }
    }
}

/// Profiles `K(x)` on the grid with every requested strategy and keeps the
/// smallest certified dictionary per grid point. A dictionary certified at
/// `x` also certifies every larger `x`, which keeps `K_upper` nonincreasing.
pub fn correlation_profile(design: &DesignMatrix, opts: &ProfileOptions) -> Result<CorrelationProfile> {
    check_kappa(opts.kappa)?;
    check_grid(&opts.x_grid)?;
    if !(opts.sigma >= 0.0 && opts.sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma = {} must be >= 0", opts.sigma)));
    }
    let (n, p) = (design.n(), design.p());
    let columns = root_n_columns(design);
    let grid = &opts.x_grid;
    let trivial = Arc::new(columns.iter().cloned().map(Vector::from_vec_unchecked).collect::<Vec<_>>());
    let mut best = Best {
        k: vec![p; grid.len()],
        cert: vec![trivial; grid.len()],
    };

    let factors = |best: &Best| -> (f64, f64) {
        let kk = (0..grid.len())
            .map(|i| kappa_factor_at(best.k[i], p, grid[i], opts.kappa))
            .fold(f64::INFINITY, f64::min);
        let ff = (0..grid.len())
            .map(|i| f_factor_at(best.k[i], p, grid[i]))
            .fold(f64::INFINITY, f64::min);
        (kk, ff)
    };
    // largest dictionary worth searching for at grid index i
    let cap_at = |best: &Best, i: usize| -> usize {
        let room = best.k[i].saturating_sub(1);
        if !opts.prune {
            return room;
        }
        let (kk, ff) = factors(best);
        let x = grid[i];
        let useful = last_true(room, |k| kappa_factor_at(k, p, x, opts.kappa) < kk || f_factor_at(k, p, x) < ff);
        useful.min(room)
    };

    // fixed dictionaries: certify at the smallest grid point that works
    for strategy in [Strategy::SpanBasis, Strategy::AnchoredCross] {
        if !opts.strategies.contains(&strategy) {
            continue;
        }
        for i in 0..grid.len() {
            let cap = cap_at(&best, i);
            if cap == 0 {
                continue;
            }
            let search_opts = SearchOptions {
                tol: opts.tol,
                seeds: Vec::new(),
                max_atoms: Some(cap),
            };
            if let Some(dict) = search(&columns, grid[i], strategy, &search_opts)? {
                best.offer(i, dict);
                break;
            }
        }
    }
    // data-driven dictionaries depend on x
    for i in 0..grid.len() {
        for strategy in [Strategy::ColumnSubset, Strategy::GreedyCluster] {
            if !opts.strategies.contains(&strategy) {
                continue;
            }
            let cap = cap_at(&best, i);
            if cap == 0 {
                continue;
            }
            let search_opts = SearchOptions {
                tol: opts.tol,
                seeds: if strategy == Strategy::ColumnSubset {
                    opts.seeds.clone()
                } else {
                    Vec::new()
                },
                max_atoms: Some(cap),
            };
            if let Some(dict) = search(&columns, grid[i], strategy, &search_opts)? {
                best.offer(i, dict);
            }
        }
    }

    let (k_kappa_hat, f_hat) = factors(&best);
    Ok(CorrelationProfile {
        kappa: opts.kappa,
        sigma: opts.sigma,
        n,
        p,
        x_grid: grid.clone(),
        k_upper: best.k,
        k_kappa_hat,
        f_hat,
        lambda_kappa: tuning_lambda_kappa(k_kappa_hat, opts.sigma, n, p, opts.kappa),
        certificate: best.cert,
    })
}

/// Upper bound on `K_kappa`: the minimum over the grid of
/// `(1 + x) sqrt(log(2 K(x) / kappa) / log(2p / kappa))` with certified `K`.
pub fn correlation_factor_kappa(design: &DesignMatrix, kappa: f64, x_grid: &[f64]) -> Result<f64> {
    let mut opts = ProfileOptions::new(design.n(), kappa);
    opts.x_grid = x_grid.to_vec();
    Ok(correlation_profile(design, &opts)?.k_kappa_hat)
}

/// Upper bound on `F`, analogous to [`correlation_factor_kappa`].
pub fn correlation_factor_f(design: &DesignMatrix, x_grid: &[f64]) -> Result<f64> {
    let mut opts = ProfileOptions::new(design.n(), 0.05);
    opts.x_grid = x_grid.to_vec();
    Ok(correlation_profile(design, &opts)?.f_hat)
}
