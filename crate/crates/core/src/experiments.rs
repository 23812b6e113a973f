//! Monte-Carlo replication of the tuning-parameter experiments.
//!
//! Replicate `r` draws everything from `base_seed.derive(r)`: the base design
//! from child 0, the noise from child 1 and the expansion from child 2. The
//! two algorithms therefore see the same base design and noise per
//! replicate, and results do not depend on the number of worker threads.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{improved_slow_rate, slow_rate_bound};
use crate::correlation::{correlation_profile, event_t_holds, ProfileOptions};
use crate::design::{expand_design, gen_clustered, gen_equicorrelated, gen_instance, DesignMatrix};
use crate::error::{Error, Result};
use crate::lasso::{lars_lasso_path, optimal_lambda, prediction_error};
use crate::simcore::{fill_normal, Seed};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DesignFamily {
    /// Rows with unit variances and common correlation `rho`.
    Equicorrelated,
    /// An equicorrelated base with `p - 1` perturbed copies per column.
    Expanded { eta: f64 },
    /// The all-ones column plus `p - 1` copies perturbed by `nu`.
    Clustered { nu: f64 },
}

/// Column scale the experiment fits on. Designs are generated with columns
/// of norm `sqrt(n)`; `Unit` rescales them to norm 1 before expansion and
/// fitting, which is the scale the reference values in [`table1_configs`]
/// and the figure presets correspond to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnScale {
    RootN,
    Unit,
}

impl fmt::Display for ColumnScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColumnScale::RootN => "root-n",
            ColumnScale::Unit => "unit",
        })
    }
}

impl FromStr for ColumnScale {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "root-n" => Ok(ColumnScale::RootN),
            "unit" => Ok(ColumnScale::Unit),
            _ => Err(format!("unknown column scale `{s}` (expected root-n or unit)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridSpec {
    /// 101 points on `[0, 10]`.
    pub fn figure() -> Self {
        GridSpec {
            min: 0.0,
            max: 10.0,
            count: 101,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|k| self.min + step * k as f64).collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.min >= 0.0 && self.max > self.min && self.max.is_finite()) || self.count < 2 {
            return Err(Error::InvalidParameter(format!(
                "lambda grid [{}, {}] with {} points",
                self.min, self.max, self.count
            )));
        }
        Ok(())
    }
}

/// How the per-replicate optimum is found.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LambdaMode {
    /// Closed-form minimum of the prediction error along the path.
    Exact,
    /// Minimum over grid points, ties to the larger `lambda`.
    Grid(GridSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub sigma: f64,
    pub rho: f64,
    pub family: DesignFamily,
    pub scale: ColumnScale,
    pub replicates: usize,
    pub lambda_mode: LambdaMode,
    /// Grid for prediction-error curves and `T` indicators. Defaults to the
    /// optimum grid in grid mode.
    pub curve: Option<GridSpec>,
    pub base_seed: Seed,
    pub kappa: f64,
}

impl ExperimentConfig {
    /// Algorithm 1 on an equicorrelated design with exact optima.
    pub fn algorithm1(n: usize, p: usize, s: usize, sigma: f64, rho: f64) -> Self {
        ExperimentConfig {
            n,
            p,
            s,
            sigma,
            rho,
            family: DesignFamily::Equicorrelated,
            scale: ColumnScale::Unit,
            replicates: 1000,
            lambda_mode: LambdaMode::Exact,
            curve: None,
            base_seed: Seed(1),
            kappa: 0.05,
        }
    }

    pub fn algorithm2(n: usize, p: usize, s: usize, sigma: f64, rho: f64, eta: f64) -> Self {
        ExperimentConfig {
            family: DesignFamily::Expanded { eta },
            ..Self::algorithm1(n, p, s, sigma, rho)
        }
    }

    pub fn eta(&self) -> Option<f64> {
        match self.family {
            DesignFamily::Expanded { eta } => Some(eta),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidParameter("replicates must be >= 1".into()));
        }
        if self.n == 0 || self.p == 0 {
            return Err(Error::EmptyInput("design dimensions"));
        }
        if self.s > self.p {
            return Err(Error::InvalidParameter(format!("s = {} > p = {}", self.s, self.p)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma = {}", self.sigma)));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::InvalidParameter(format!("rho = {} outside [0, 1)", self.rho)));
        }
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return Err(Error::InvalidParameter(format!("kappa = {} outside (0, 1]", self.kappa)));
        }
        if let LambdaMode::Grid(g) = self.lambda_mode {
            g.validate()?;
        }
        if let Some(g) = self.curve {
            g.validate()?;
        }
        match self.family {
            DesignFamily::Expanded { eta } if !(eta > 0.0 && eta.is_finite()) => {
                Err(Error::InvalidParameter(format!("eta = {eta} must be > 0")))
            }
            DesignFamily::Clustered { nu } if !(nu >= 0.0 && nu.is_finite()) => {
                Err(Error::InvalidParameter(format!("nu = {nu} must be >= 0")))
            }
            _ => Ok(()),
        }
    }

    fn curve_points(&self) -> Vec<f64> {
        match (self.curve, self.lambda_mode) {
            (Some(g), _) | (None, LambdaMode::Grid(g)) => g.points(),
            (None, LambdaMode::Exact) => Vec::new(),
        }
    }

    fn algorithm_label(&self) -> &'static str {
        match self.family {
            DesignFamily::Equicorrelated => "algorithm1",
            DesignFamily::Expanded { .. } => "algorithm2",
            DesignFamily::Clustered { .. } => "clustered",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub lambda_star: f64,
    pub pe_star: f64,
    pub pe_curve: Vec<f64>,
    pub t_indicator: Vec<bool>,
    pub seed_used: Seed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub config: ExperimentConfig,
    pub replicates: usize,
    pub lambda_min_mean: f64,
    pub lambda_min_se: f64,
    pub pe_min_mean: f64,
    pub pe_min_se: f64,
    pub curve_lambda: Vec<f64>,
    pub curve_mean: Vec<f64>,
    pub curve_ci_low: Vec<f64>,
    pub curve_ci_high: Vec<f64>,
}

/// Design for replicate seed `seed`, in the experiment's column scale.
pub fn replicate_design(config: &ExperimentConfig, seed: Seed) -> Result<DesignMatrix> {
    let design_seed = seed.derive(0);
    let base = match config.family {
        DesignFamily::Clustered { nu } => gen_clustered(config.n, config.p, nu, design_seed)?,
        _ => gen_equicorrelated(config.n, config.p, config.rho, design_seed)?,
    };
    let base = match config.scale {
        ColumnScale::RootN => base,
        ColumnScale::Unit => base.with_column_norm(1.0)?,
    };
    match config.family {
        DesignFamily::Expanded { eta } => expand_design(&base, eta, seed.derive(2)),
        _ => Ok(base),
    }
}

fn run_replicate(config: &ExperimentConfig, r: usize, grid: &[f64]) -> Result<ReplicateResult> {
    let seed = config.base_seed.derive(r as u64);
    let design = replicate_design(config, seed)?;
    let inst = gen_instance(&design, config.s, config.sigma, seed.derive(1))?;
    let path = lars_lasso_path(&design, &inst.y)?;
    let mut pe_curve = Vec::with_capacity(grid.len());
    let mut t_indicator = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let beta = path.solve_at(lambda)?;
        pe_curve.push(prediction_error(&design, &beta, &inst.beta0)?);
        t_indicator.push(event_t_holds(&design, &inst.eps, config.sigma, lambda)?);
    }
    let (lambda_star, pe_star) = match config.lambda_mode {
        LambdaMode::Exact => optimal_lambda(&path, &design, &inst.beta0)?,
        LambdaMode::Grid(g) => {
            let points = g.points();
            let mut best = (f64::NAN, f64::INFINITY);
            for &lambda in points.iter().rev() {
                let pe = prediction_error(&design, &path.solve_at(lambda)?, &inst.beta0)?;
                if pe < best.1 {
                    best = (lambda, pe);
                }
            }
            best
        }
    };
    Ok(ReplicateResult {
        lambda_star,
        pe_star,
        pe_curve,
        t_indicator,
        seed_used: seed,
    })
}

fn run(config: &ExperimentConfig) -> Result<Vec<ReplicateResult>> {
    config.validate()?;
    let grid = config.curve_points();
    (0..config.replicates)
        .into_par_iter()
        .map(|r| run_replicate(config, r, &grid))
        .collect()
}

pub fn run_algorithm1(config: &ExperimentConfig) -> Result<Vec<ReplicateResult>> {
    if config.family != DesignFamily::Equicorrelated {
        return Err(Error::InvalidParameter("algorithm 1 needs an equicorrelated design".into()));
    }
    run(config)
}

pub fn run_algorithm2(config: &ExperimentConfig) -> Result<Vec<ReplicateResult>> {
    if config.eta().is_none() {
        return Err(Error::InvalidParameter("algorithm 2 needs an expansion eta".into()));
    }
    run(config)
}

/// Any design family.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ReplicateResult>> {
    run(config)
}

/// Mean and standard error (sample SD with `R - 1`, over `sqrt(R)`; zero
/// when `R = 1`). Sums run in index order.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
    (mean, (var / r).sqrt())
}

/// Means, standard errors and `mean +- 1.96 se` curves.
pub fn summarize(results: &[ReplicateResult], config: &ExperimentConfig) -> Result<SummaryRow> {
    if results.is_empty() {
        return Err(Error::EmptyInput("replicate results"));
    }
    let lambdas: Vec<f64> = results.iter().map(|r| r.lambda_star).collect();
    let pes: Vec<f64> = results.iter().map(|r| r.pe_star).collect();
    let (lambda_min_mean, lambda_min_se) = mean_se(&lambdas);
    let (pe_min_mean, pe_min_se) = mean_se(&pes);
    let len = results[0].pe_curve.len();
    if results.iter().any(|r| r.pe_curve.len() != len) {
        return Err(Error::DimensionMismatch("curves of different lengths".into()));
    }
    let mut curve_mean = Vec::with_capacity(len);
    let mut curve_ci_low = Vec::with_capacity(len);
    let mut curve_ci_high = Vec::with_capacity(len);
    for k in 0..len {
        let column: Vec<f64> = results.iter().map(|r| r.pe_curve[k]).collect();
        let (m, se) = mean_se(&column);
        curve_mean.push(m);
        curve_ci_low.push(m - 1.96 * se);
        curve_ci_high.push(m + 1.96 * se);
    }
    let curve_lambda = config.curve_points();
    let curve_lambda = if curve_lambda.len() == len { curve_lambda } else { Vec::new() };
    Ok(SummaryRow {
        config: *config,
        replicates: results.len(),
        lambda_min_mean,
        lambda_min_se,
        pe_min_mean,
        pe_min_se,
        curve_lambda,
        curve_mean,
        curve_ci_low,
        curve_ci_high,
    })
}

/// The fifteen `(n, p, s, sigma, rho)` settings of the reference table, in
/// its row order, with its reported `(lambda_min, pe_min)` means.
pub const TABLE1_ROWS: [((usize, usize, usize, f64, f64), (f64, f64)); 15] = [
    ((20, 40, 4, 1.0, 0.99), (0.69, 1.77)),
    ((20, 40, 4, 1.0, 0.9), (1.58, 2.37)),
    ((20, 40, 4, 1.0, 0.0), (3.60, 3.17)),
    ((50, 40, 4, 1.0, 0.99), (0.67, 1.29)),
    ((50, 40, 4, 1.0, 0.9), (1.71, 1.85)),
    ((50, 40, 4, 1.0, 0.0), (3.91, 3.48)),
    ((20, 400, 4, 1.0, 0.99), (0.97, 1.75)),
    ((20, 400, 4, 1.0, 0.9), (2.11, 2.58)),
    ((20, 400, 4, 1.0, 0.0), (4.82, 3.34)),
    ((20, 40, 10, 1.0, 0.99), (0.59, 6.50)),
    ((20, 40, 10, 1.0, 0.9), (1.46, 7.97)),
    ((20, 40, 10, 1.0, 0.0), (2.90, 6.65)),
    ((20, 40, 4, 3.0, 0.99), (2.42, 6.16)),
    ((20, 40, 4, 3.0, 0.9), (5.33, 6.47)),
    ((20, 40, 4, 3.0, 0.0), (12.33, 3.80)),
];

/// Reported standard errors for [`TABLE1_ROWS`], `(lambda_se, pe_se)`.
pub const TABLE1_SE: [(f64, f64); 15] = [
    (0.03, 0.05),
    (0.03, 0.04),
    (0.03, 0.03),
    (0.03, 0.04),
    (0.03, 0.03),
    (0.03, 0.02),
    (0.03, 0.05),
    (0.04, 0.04),
    (0.03, 0.03),
    (0.03, 0.22),
    (0.03, 0.19),
    (0.03, 0.06),
    (0.15, 0.17),
    (0.13, 0.14),
    (0.10, 0.03),
];

pub fn table1_configs(replicates: usize, base_seed: Seed) -> Vec<ExperimentConfig> {
    TABLE1_ROWS
        .iter()
        .enumerate()
        .map(|(i, &((n, p, s, sigma, rho), _))| ExperimentConfig {
            replicates,
            base_seed: base_seed.derive(i as u64),
            ..ExperimentConfig::algorithm1(n, p, s, sigma, rho)
        })
        .collect()
}

/// One summary row per configuration, in input order.
pub fn table1(rows: &[ExperimentConfig]) -> Result<Vec<SummaryRow>> {
    rows.iter()
        .map(|config| {
            let results = run_algorithm1(config)?;
            summarize(&results, config)
        })
        .collect()
}

/// Algorithm 1 and Algorithm 2 settings for a figure: `(20, 40, 4, 1, 0)`
/// with the given expansion, exact optima, curves on 101 points of `[0, 10]`.
pub fn figure_configs(eta: f64, replicates: usize, base_seed: Seed) -> (ExperimentConfig, ExperimentConfig) {
    let a1 = ExperimentConfig {
        replicates,
        base_seed,
        curve: Some(GridSpec::figure()),
        ..ExperimentConfig::algorithm1(20, 40, 4, 1.0, 0.0)
    };
    let a2 = ExperimentConfig {
        family: DesignFamily::Expanded { eta },
        ..a1
    };
    (a1, a2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViolationRow {
    pub replicate: usize,
    pub lambda: f64,
    pub on_t: bool,
    pub pe: f64,
    pub slow_bound: f64,
    pub improved_bound: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub rows: Vec<ViolationRow>,
    pub pairs: usize,
    pub pairs_on_t: usize,
    pub slow_violations: usize,
    pub improved_violations: usize,
    /// Pairs where the improved bound exceeds the slow bound.
    pub ordering_violations: usize,
}

/// Absolute slack for the bound comparisons.
pub const BOUND_SLACK: f64 = 1e-8;

/// Checks the slow-rate bound and its improved form at every grid `lambda`
/// of every replicate. A pair counts as violated only when the event `T`
/// holds there.
pub fn bound_validation(config: &ExperimentConfig) -> Result<ViolationReport> {
    config.validate()?;
    let grid = config.curve_points();
    if grid.is_empty() {
        return Err(Error::InvalidParameter("bound validation needs a lambda grid".into()));
    }
    let per_rep: Vec<Vec<ViolationRow>> = (0..config.replicates)
        .into_par_iter()
        .map(|r| -> Result<Vec<ViolationRow>> {
            let seed = config.base_seed.derive(r as u64);
            let design = replicate_design(config, seed)?;
            let inst = gen_instance(&design, config.s, config.sigma, seed.derive(1))?;
            let path = lars_lasso_path(&design, &inst.y)?;
            grid.iter()
                .map(|&lambda| {
                    let beta = path.solve_at(lambda)?;
                    let pe = prediction_error(&design, &beta, &inst.beta0)?;
                    let on_t = event_t_holds(&design, &inst.eps, config.sigma, lambda)?;
                    let slow_bound = slow_rate_bound(lambda, &inst.beta0);
                    let improved_bound = improved_slow_rate(lambda, &inst.beta0, &beta)?;
                    let violated = on_t && (pe > slow_bound + BOUND_SLACK || pe > improved_bound + BOUND_SLACK);
                    Ok(ViolationRow {
                        replicate: r,
                        lambda,
                        on_t,
                        pe,
                        slow_bound,
                        improved_bound,
                        violated,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let rows: Vec<ViolationRow> = per_rep.into_iter().flatten().collect();
    let on_t: Vec<&ViolationRow> = rows.iter().filter(|v| v.on_t).collect();
    Ok(ViolationReport {
        pairs: rows.len(),
        pairs_on_t: on_t.len(),
        slow_violations: on_t.iter().filter(|v| v.pe > v.slow_bound + BOUND_SLACK).count(),
        improved_violations: on_t.iter().filter(|v| v.pe > v.improved_bound + BOUND_SLACK).count(),
        ordering_violations: rows.iter().filter(|v| v.improved_bound > v.slow_bound + BOUND_SLACK).count(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub kappa: f64,
    pub k_kappa_hat: f64,
    pub lambda_kappa: f64,
    pub draws: usize,
    pub frequency: f64,
    /// `1 - kappa - 3 sqrt(kappa (1 - kappa) / draws)`.
    pub threshold: f64,
}

/// Builds `lambda_kappa` from the certified profile of one design draw and
/// counts how often `T` holds over `config.replicates` noise draws.
/// `profile` overrides the default profile options (grid, seeds).
pub fn coverage_check(config: &ExperimentConfig, kappa: f64, profile: Option<ProfileOptions>) -> Result<CoverageReport> {
    config.validate()?;
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::InvalidParameter(format!("kappa = {kappa} outside (0, 1]")));
    }
    let design = replicate_design(config, config.base_seed.derive(0))?;
    let mut opts = profile.unwrap_or_else(|| ProfileOptions::new(config.n, kappa));
    opts.kappa = kappa;
    opts.sigma = config.sigma;
    let prof = correlation_profile(&design, &opts)?;
    // lambda_kappa assumes columns of norm sqrt(n); it scales with the norm
    let norm = design
        .common_column_norm()
        .ok_or_else(|| Error::InvalidParameter("coverage needs a common column norm".into()))?;
    let lambda = prof.lambda_kappa * norm / (config.n as f64).sqrt();
    let draws = config.replicates;
    let noise_seed = config.base_seed.derive(1);
    let hits = (0..draws)
        .into_par_iter()
        .map(|k| {
            let eps = fill_normal(&mut noise_seed.derive(k as u64).rng(), config.n);
            event_t_holds(&design, &eps, config.sigma, lambda)
        })
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|h| *h)
        .count();
    Ok(CoverageReport {
        kappa,
        k_kappa_hat: prof.k_kappa_hat,
        lambda_kappa: lambda,
        draws,
        frequency: hits as f64 / draws as f64,
        threshold: 1.0 - kappa - 3.0 * (kappa * (1.0 - kappa) / draws as f64).sqrt(),
    })
}

/// `summary.csv`: configuration columns plus the optimum statistics.
pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n",
        "p",
        "s",
        "sigma",
        "rho",
        "eta",
        "algorithm",
        "scale",
        "replicates",
        "lambda_min_mean",
        "lambda_min_se",
        "pe_min_mean",
        "pe_min_se",
    ])
    .map_err(csv_err)?;
    for row in rows {
        let c = &row.config;
        w.write_record([
            c.n.to_string(),
            c.p.to_string(),
            c.s.to_string(),
            c.sigma.to_string(),
            c.rho.to_string(),
            c.eta().map(|e| e.to_string()).unwrap_or_default(),
            c.algorithm_label().to_string(),
            c.scale.to_string(),
            row.replicates.to_string(),
            row.lambda_min_mean.to_string(),
            row.lambda_min_se.to_string(),
            row.pe_min_mean.to_string(),
            row.pe_min_se.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `curve.csv`: one series per summary row, tagged with its algorithm.
pub fn write_curve_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "pe_mean", "ci_low", "ci_high", "algorithm"])
        .map_err(csv_err)?;
    for row in rows {
        for k in 0..row.curve_lambda.len() {
            w.write_record([
                row.curve_lambda[k].to_string(),
                row.curve_mean[k].to_string(),
                row.curve_ci_low[k].to_string(),
                row.curve_ci_high[k].to_string(),
                row.config.algorithm_label().to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `violations.csv`.
pub fn write_violations_csv<W: Write>(report: &ViolationReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["replicate", "lambda", "onT", "pe", "slow_bound", "improved_bound", "violated"])
        .map_err(csv_err)?;
    for v in &report.rows {
        w.write_record([
            v.replicate.to_string(),
            v.lambda.to_string(),
            u8::from(v.on_t).to_string(),
            v.pe.to_string(),
            v.slow_bound.to_string(),
            v.improved_bound.to_string(),
            u8::from(v.violated).to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(replicates: usize) -> ExperimentConfig {
        ExperimentConfig {
            replicates,
            ..ExperimentConfig::algorithm1(20, 40, 4, 1.0, 0.0)
        }
    }

    #[test]
    fn noiseless_runs_have_zero_prediction_error() {
        let config = ExperimentConfig {
            sigma: 0.0,
            ..small(10)
        };
        let rows = table1(&[config]).unwrap();
        assert!(rows[0].pe_min_mean.abs() < 1e-9, "{}", rows[0].pe_min_mean);
    }

    #[test]
    fn single_replicate_is_deterministic() {
        let config = small(1);
        let a = run_algorithm1(&config).unwrap();
        let b = run_algorithm1(&config).unwrap();
        assert_eq!(a, b);
        let row = summarize(&a, &config).unwrap();
        assert_eq!(row.lambda_min_se, 0.0);
        assert_eq!(row.pe_min_se, 0.0);
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let config = ExperimentConfig {
            curve: Some(GridSpec::figure()),
            ..small(12)
        };
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_algorithm1(&config).unwrap());
        let three = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap()
            .install(|| run_algorithm1(&config).unwrap());
        assert_eq!(one, three);
    }

    #[test]
    fn summary_arithmetic() {
        let values = [1.0, 2.0, 4.0, 7.0, 11.0];
        let results: Vec<ReplicateResult> = values
            .iter()
            .map(|&v| ReplicateResult {
                lambda_star: v,
                pe_star: 2.0 * v,
                pe_curve: vec![v, 3.0],
                t_indicator: vec![true, true],
                seed_used: Seed(0),
            })
            .collect();
        let config = ExperimentConfig {
            curve: Some(GridSpec {
                min: 0.0,
                max: 1.0,
                count: 2,
            }),
            ..small(5)
        };
        let row = summarize(&results, &config).unwrap();
        // mean 5, deviations -4 -3 -1 2 6, sum of squares 66, var 16.5
        let se = (16.5f64 / 5.0).sqrt();
        assert!((row.lambda_min_mean - 5.0).abs() < 1e-12);
        assert!((row.lambda_min_se - se).abs() < 1e-12);
        assert!((row.pe_min_mean - 10.0).abs() < 1e-12);
        assert!((row.pe_min_se - 2.0 * se).abs() < 1e-12);
        assert!((row.curve_ci_high[0] - (5.0 + 1.96 * se)).abs() < 1e-12);
        assert_eq!(row.curve_ci_low[1], 3.0);
        assert_eq!(row.curve_ci_high[1], 3.0);
        assert!(summarize(&[], &config).is_err());
    }

    #[test]
    fn exact_optimum_dominates_grid() {
        let exact = ExperimentConfig {
            curve: Some(GridSpec::figure()),
            ..small(30)
        };
        let grid = ExperimentConfig {
            lambda_mode: LambdaMode::Grid(GridSpec::figure()),
            curve: None,
            ..exact
        };
        let a = run_algorithm1(&exact).unwrap();
        let b = run_algorithm1(&grid).unwrap();
        for (x, y) in a.iter().zip(&b) {
            let curve_min = x.pe_curve.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(x.pe_star <= curve_min + 1e-9);
            assert!(x.pe_star <= y.pe_star + 1e-9);
        }
    }

    #[test]
    fn tiny_expansion_keeps_optimum() {
        let base = small(40);
        let expanded = ExperimentConfig {
            family: DesignFamily::Expanded { eta: 1e-12 },
            ..base
        };
        let a = run_algorithm1(&base).unwrap();
        let b = run_algorithm2(&expanded).unwrap();
        let mean_diff: f64 = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x.lambda_star - y.lambda_star).abs())
            .sum::<f64>()
            / a.len() as f64;
        assert!(mean_diff < 0.05, "{mean_diff}");
    }

    #[test]
    fn algorithm_guards() {
        let base = small(2);
        assert!(run_algorithm2(&base).is_err());
        let expanded = ExperimentConfig {
            family: DesignFamily::Expanded { eta: 0.1 },
            ..base
        };
        assert!(run_algorithm1(&expanded).is_err());
        assert!(run_algorithm1(&small(0)).is_err());
        let bad_grid = ExperimentConfig {
            lambda_mode: LambdaMode::Grid(GridSpec {
                min: 0.0,
                max: 1.0,
                count: 1,
            }),
            ..base
        };
        assert!(run_algorithm1(&bad_grid).is_err());
    }

    #[test]
    fn table1_defaults_have_fifteen_rows_in_order() {
        let rows = table1_configs(5, Seed(3));
        assert_eq!(rows.len(), 15);
        assert_eq!((rows[0].n, rows[0].p, rows[0].rho), (20, 40, 0.99));
        assert_eq!((rows[14].sigma, rows[14].rho), (3.0, 0.0));
    }

    #[test]
    fn noiseless_bound_validation() {
        let config = ExperimentConfig {
            sigma: 0.0,
            curve: Some(GridSpec::figure()),
            ..small(5)
        };
        let report = bound_validation(&config).unwrap();
        assert_eq!(report.pairs, 5 * 101);
        assert_eq!(report.pairs_on_t, report.pairs);
        assert_eq!(report.slow_violations + report.improved_violations, 0);
    }

    #[test]
    fn lambda_zero_is_off_t_with_noise() {
        let config = ExperimentConfig {
            curve: Some(GridSpec::figure()),
            ..small(5)
        };
        let report = bound_validation(&config).unwrap();
        assert!(report.rows.iter().filter(|v| v.lambda == 0.0).all(|v| !v.on_t));
        assert_eq!(report.slow_violations, 0);
        assert_eq!(report.improved_violations, 0);
        assert_eq!(report.ordering_violations, 0);
    }

    #[test]
    fn noiseless_coverage_is_one() {
        let config = ExperimentConfig {
            sigma: 0.0,
            scale: ColumnScale::RootN,
            ..small(50)
        };
        let rep = coverage_check(&config, 0.05, None).unwrap();
        assert_eq!(rep.frequency, 1.0);
    }

    #[test]
    fn csv_outputs_have_headers() {
        let config = ExperimentConfig {
            curve: Some(GridSpec {
                min: 0.0,
                max: 5.0,
                count: 3,
            }),
            ..small(3)
        };
        let res = run_algorithm1(&config).unwrap();
        let row = summarize(&res, &config).unwrap();
        let mut buf = Vec::new();
        write_summary_csv(std::slice::from_ref(&row), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,p,s,sigma,rho,eta,algorithm,scale,replicates,lambda_min_mean"));
        assert_eq!(text.lines().count(), 2);
        let mut buf = Vec::new();
        write_curve_csv(&[row], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 4);
    }
}
