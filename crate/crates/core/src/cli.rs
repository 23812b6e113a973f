//! Command-line front end. Every subcommand writes its outputs plus a
//! `manifest.json` recording the argument vector, parameters, seed and
//! SHA-256 digests of the files it produced.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::correlation::{default_x_grid, correlation_profile, ProfileOptions, Strategy};
use crate::design::{expand_design, gen_clustered, gen_equicorrelated, gen_instance, parse_vector_csv, vector_to_csv, DesignMatrix};
use crate::error::{Error, Result};
use crate::experiments::{
    bound_validation, coverage_check, figure_configs, run_experiment, summarize, table1, table1_configs,
    write_curve_csv, write_summary_csv, write_violations_csv, ColumnScale, DesignFamily, ExperimentConfig, GridSpec,
    LambdaMode,
};
use crate::lasso::{kkt_check, lars_lasso_path};
use crate::simcore::Seed;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_AUDIT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "lasso-corr", version, about = "Lasso paths, correlation factors and tuning-parameter experiments")]
pub struct Cli {
    /// Worker threads for replicate and audit parallelism. Outputs do not
    /// depend on this value.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a design matrix, optionally with a response.
    ///
    /// Writes design.csv (`# n,p,normalized,provenance` header, one row per
    /// line). With --s also writes beta0.csv, eps.csv and y.csv (one value
    /// per line).
    Generate(GenerateArgs),
    /// Compute the full Lasso path of a response on a design.
    ///
    /// Writes path.csv (one knot per row: lambda,beta_1..beta_p) and
    /// kkt.json (the optimality audit at every knot and segment midpoint).
    /// Exits with 3 if the audit fails.
    Path(PathArgs),
    /// Certified correlation profile of a design.
    ///
    /// Writes profile.json with kappa, sigma, n, p, x_grid, K_upper,
    /// K_kappa_hat, F_hat and lambda_kappa.
    Corr(CorrArgs),
    /// Monte-Carlo tuning-parameter experiment.
    ///
    /// Writes summary.csv (n,p,s,sigma,rho,eta,algorithm,scale,replicates,
    /// lambda_min_mean,lambda_min_se,pe_min_mean,pe_min_se) and, when a
    /// curve grid is set, curve.csv (lambda,pe_mean,ci_low,ci_high,algorithm).
    /// Standard errors use the sample SD with R-1 over sqrt(R); confidence
    /// bands are mean +- 1.96 SE.
    Experiment(ExperimentArgs),
    /// Check the slow-rate bounds on the event T over a lambda grid.
    ///
    /// Writes violations.csv (replicate,lambda,onT,pe,slow_bound,
    /// improved_bound,violated) and bounds.json with the counts. Exits with 3
    /// on any violation.
    ValidateBounds(ValidateArgs),
    /// Empirical probability of the event T at the certified lambda_kappa.
    ///
    /// Writes coverage.json.
    Coverage(CoverageArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Equicorrelated,
    Expanded,
    Clustered,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long)]
    pub n: usize,
    /// Columns; for `expanded` the base column count (output has p^2).
    #[arg(long)]
    pub p: usize,
    /// Equicorrelation of the base design.
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
    /// Perturbation size of the expansion (required for `expanded`).
    #[arg(long)]
    pub eta: Option<f64>,
    /// Perturbation size of the clustered design (required for `clustered`).
    #[arg(long)]
    pub nu: Option<f64>,
    /// Sparsity of beta0; when set a response is drawn too.
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct PathArgs {
    /// Design CSV as written by `generate`.
    #[arg(long)]
    pub design: PathBuf,
    /// Response file, one value per line.
    #[arg(long)]
    pub response: PathBuf,
    /// KKT tolerance, relative to max(1, lambda_max).
    #[arg(long, default_value_t = 1e-8)]
    pub kkt_tol: f64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CorrArgs {
    #[arg(long)]
    pub design: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Comma-separated inflation grid starting at 0 [default: 0,0.25,0.5,1,2,4,sqrt(n)].
    #[arg(long, value_delimiter = ',')]
    pub x_grid: Option<Vec<f64>>,
    /// Search strategies to run [default: all].
    #[arg(long, value_delimiter = ',')]
    pub strategies: Option<Vec<String>>,
    /// Run every search even when it cannot improve either factor.
    #[arg(long)]
    pub no_prune: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// The fifteen table settings, exact optima.
    Table1,
    /// Both algorithms at eta = 0.001 with curves on [0, 10].
    Fig1,
    /// Both algorithms at eta = 0.1 with curves on [0, 10].
    Fig2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleArg {
    RootN,
    Unit,
}

impl From<ScaleArg> for ColumnScale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::RootN => ColumnScale::RootN,
            ScaleArg::Unit => ColumnScale::Unit,
        }
    }
}

/// Shared description of one experiment setting.
#[derive(Debug, Args, Serialize)]
pub struct ConfigArgs {
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, default_value_t = 40)]
    pub p: usize,
    #[arg(long, default_value_t = 4)]
    pub s: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
    /// Expansion size; selects the second algorithm.
    #[arg(long, conflicts_with = "nu")]
    pub eta: Option<f64>,
    /// Clustered design with this perturbation instead of an equicorrelated one.
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    /// Column scale used for fitting.
    #[arg(long, value_enum, default_value_t = ScaleArg::Unit)]
    pub scale: ScaleArg,
    #[arg(long)]
    pub seed: u64,
}

impl ConfigArgs {
    fn config(&self) -> ExperimentConfig {
        let family = match (self.eta, self.nu) {
            (Some(eta), _) => DesignFamily::Expanded { eta },
            (None, Some(nu)) => DesignFamily::Clustered { nu },
            (None, None) => DesignFamily::Equicorrelated,
        };
        ExperimentConfig {
            family,
            scale: self.scale.into(),
            replicates: self.replicates,
            base_seed: Seed(self.seed),
            ..ExperimentConfig::algorithm1(self.n, self.p, self.s, self.sigma, self.rho)
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ExperimentArgs {
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Optimum over a grid `min:max:count` instead of the exact path optimum.
    #[arg(long, value_parser = parse_grid)]
    pub lambda_grid: Option<GridSpec>,
    /// Grid `min:max:count` for prediction-error curves.
    #[arg(long, value_parser = parse_grid)]
    pub curve: Option<GridSpec>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Lambda grid `min:max:count`.
    #[arg(long, value_parser = parse_grid, default_value = "0:10:101")]
    pub grid: GridSpec,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CoverageArgs {
    /// Noise draws are taken from --replicates.
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, default_value_t = 0.05)]
    pub kappa: f64,
    /// Comma-separated inflation grid for the profile.
    #[arg(long, value_delimiter = ',')]
    pub x_grid: Option<Vec<f64>>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

fn parse_grid(s: &str) -> std::result::Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected min:max:count, got `{s}`"));
    }
    let min = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let max = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let count = parts[2].trim().parse::<usize>().map_err(|e| e.to_string())?;
    Ok(GridSpec { min, max, count })
}

/// Record written next to every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub argv: Vec<String>,
    pub params: serde_json::Value,
    pub base_seed: Option<u64>,
    pub version: String,
    /// File name to lowercase hex SHA-256.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn from_json(text: &str) -> Result<Self> {
        let m: RunManifest = serde_json::from_str(text)?;
        if m.subcommand.is_empty() || m.argv.is_empty() {
            return Err(Error::InvalidParameter("manifest lacks subcommand or argv".into()));
        }
        for (name, digest) in &m.outputs {
            if name.contains(['/', '\\']) || digest.len() != 64 || hex::decode(digest).is_err() {
                return Err(Error::InvalidParameter(format!("bad output entry `{name}`")));
            }
        }
        Ok(m)
    }

    /// Recomputes the digests of the listed outputs in `dir` and returns the
    /// names that differ or are missing.
    pub fn verify(&self, dir: &Path) -> Vec<String> {
        self.outputs
            .iter()
            .filter(|(name, digest)| fs::read(dir.join(name)).map(|b| sha256_hex(&b) != **digest).unwrap_or(true))
            .map(|(name, _)| name.clone())
            .collect()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects output files and writes the manifest last.
struct Outputs {
    dir: PathBuf,
    files: BTreeMap<String, String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            files: BTreeMap::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.files.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    fn finish(self, subcommand: &str, argv: &[String], params: &impl Serialize, seed: Option<u64>) -> Result<()> {
        let manifest = RunManifest {
            subcommand: subcommand.to_string(),
            argv: argv.to_vec(),
            params: serde_json::to_value(params)?,
            base_seed: seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: self.files,
        };
        fs::write(self.dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }
}

/// Why a subcommand stopped early.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Audit(String),
    Other(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Audit(_) => EXIT_AUDIT,
            Failure::Other(_) => EXIT_FAILURE,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Audit(m) | Failure::Other(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::Other(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn read_text(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn with_file<T>(path: &Path, r: Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(|e| match e {
        Error::Io(_) => Failure::Other(format!("{}: {e}", path.display())),
        _ => Failure::Usage(format!("{}: {e}", path.display())),
    })
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli, argv) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.exit_code()
        }
    }
}

pub fn execute(cli: Cli, argv: &[String]) -> std::result::Result<(), Failure> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Failure::Usage("--jobs must be >= 1".into()));
        }
        // a pool installed by an earlier call in the same process is kept
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match cli.command {
        Command::Generate(a) => cmd_generate(&a, argv),
        Command::Path(a) => cmd_path(&a, argv),
        Command::Corr(a) => cmd_corr(&a, argv),
        Command::Experiment(a) => cmd_experiment(&a, argv),
        Command::ValidateBounds(a) => cmd_validate(&a, argv),
        Command::Coverage(a) => cmd_coverage(&a, argv),
    }
}

fn cmd_generate(a: &GenerateArgs, argv: &[String]) -> std::result::Result<(), Failure> {
    let seed = Seed(a.seed);
    let design = match a.kind {
        Kind::Equicorrelated => gen_equicorrelated(a.n, a.p, a.rho, seed.derive(0))?,
        Kind::Expanded => {
            let eta = a.eta.ok_or_else(|| Failure::Usage("--kind expanded needs --eta".into()))?;
            let base = gen_equicorrelated(a.n, a.p, a.rho, seed.derive(0))?;
            expand_design(&base, eta, seed.derive(2))?
        }
        Kind::Clustered => {
            let nu = a.nu.ok_or_else(|| Failure::Usage("--kind clustered needs --nu".into()))?;
            gen_clustered(a.n, a.p, nu, seed.derive(0))?
        }
    };
    let mut out = Outputs::new(&a.out)?;
    out.write("design.csv", design.to_csv_string().as_bytes())?;
    if let Some(s) = a.s {
        let inst = gen_instance(&design, s, a.sigma, seed.derive(1))?;
        out.write("beta0.csv", vector_to_csv(&inst.beta0).as_bytes())?;
        out.write("eps.csv", vector_to_csv(&inst.eps).as_bytes())?;
        out.write("y.csv", vector_to_csv(&inst.y).as_bytes())?;
    }
    out.finish("generate", argv, a, Some(a.seed))?;
    Ok(())
}

#[derive(Serialize)]
struct KktPoint {
    lambda: f64,
    knot: bool,
    max_gradient_violation: f64,
    sign_consistency: bool,
    pass: bool,
}

fn cmd_path(a: &PathArgs, argv: &[String]) -> std::result::Result<(), Failure> {
    let design = with_file(&a.design, DesignMatrix::parse_csv(&read_text(&a.design)?))?;
    let y = with_file(&a.response, parse_vector_csv(&read_text(&a.response)?))?;
    if y.len() != design.n() {
        return Err(Failure::Usage(format!(
            "response has {} values for a design with {} rows",
            y.len(),
            design.n()
        )));
    }
    let path = lars_lasso_path(&design, &y)?;
    let tol = a.kkt_tol * path.lambda_max().max(1.0);
    let knots = path.knots();
    let mut lambdas: Vec<(f64, bool)> = Vec::new();
    for (k, &lambda) in knots.iter().enumerate() {
        lambdas.push((lambda, true));
        if let Some(&next) = knots.get(k + 1) {
            lambdas.push((0.5 * (lambda + next), false));
        }
    }
    let mut points = Vec::with_capacity(lambdas.len());
    for (lambda, knot) in lambdas {
        let beta = path.solve_at(lambda)?;
        let rep = kkt_check(&design, &y, &beta, lambda, tol)?;
        points.push(KktPoint {
            lambda,
            knot,
            max_gradient_violation: rep.max_gradient_violation,
            sign_consistency: rep.sign_consistency,
            pass: rep.pass(),
        });
    }
    let failed = points.iter().filter(|p| !p.pass).count();
    let mut csv = Vec::new();
    path.write_csv(&mut csv)?;
    let mut out = Outputs::new(&a.out)?;
    out.write("path.csv", &csv)?;
    let report = serde_json::json!({ "tol": tol, "failed": failed, "points": points });
    out.write("kkt.json", serde_json::to_string_pretty(&report).map_err(Error::from)?.as_bytes())?;
    out.finish("path", argv, a, None)?;
    if failed > 0 {
        return Err(Failure::Audit(format!("KKT audit failed at {failed} points")));
    }
    Ok(())
}

fn parse_strategies(names: &Option<Vec<String>>) -> std::result::Result<Vec<Strategy>, Failure> {
    match names {
        None => Ok(Strategy::ALL.to_vec()),
        Some(list) => list
            .iter()
            .map(|s| s.parse::<Strategy>().map_err(Failure::Usage))
            .collect(),
    }
}

fn cmd_corr(a: &CorrArgs, argv: &[String]) -> std::result::Result<(), Failure> {
    let design = with_file(&a.design, DesignMatrix::parse_csv(&read_text(&a.design)?))?;
    let mut opts = ProfileOptions::new(design.n(), a.kappa);
    opts.sigma = a.sigma;
    opts.x_grid = a.x_grid.clone().unwrap_or_else(|| default_x_grid(design.n()));
    opts.strategies = parse_strategies(&a.strategies)?;
    opts.prune = !a.no_prune;
    let profile = correlation_profile(&design, &opts)?;
    let mut out = Outputs::new(&a.out)?;
    out.write("profile.json", profile.to_json()?.as_bytes())?;
    out.finish("corr", argv, a, None)?;
    Ok(())
}

fn cmd_experiment(a: &ExperimentArgs, argv: &[String]) -> std::result::Result<(), Failure> {
    let c = &a.config;
    if c.replicates == 0 {
        return Err(Failure::Usage("--replicates must be >= 1".into()));
    }
    let seed = Seed(c.seed);
    let rows = match a.preset {
        Some(Preset::Table1) => table1(&table1_configs(c.replicates, seed))?,
        Some(p @ (Preset::Fig1 | Preset::Fig2)) => {
            let eta = if p == Preset::Fig1 { 0.001 } else { 0.1 };
            let (a1, a2) = figure_configs(eta, c.replicates, seed);
            let mut rows = Vec::new();
            for config in [a1, a2] {
                rows.push(summarize(&run_experiment(&config)?, &config)?);
            }
            rows
        }
        None => {
            let config = ExperimentConfig {
                lambda_mode: a.lambda_grid.map_or(LambdaMode::Exact, LambdaMode::Grid),
                curve: a.curve,
                ..c.config()
            };
            vec![summarize(&run_experiment(&config)?, &config)?]
        }
    };
    let mut out = Outputs::new(&a.out)?;
    let mut buf = Vec::new();
    write_summary_csv(&rows, &mut buf)?;
    out.write("summary.csv", &buf)?;
    if rows.iter().any(|r| !r.curve_lambda.is_empty()) {
        let mut buf = Vec::new();
        write_curve_csv(&rows, &mut buf)?;
        out.write("curve.csv", &buf)?;
    }
    out.finish("experiment", argv, a, Some(c.seed))?;
    Ok(())
}

fn cmd_validate(a: &ValidateArgs, argv: &[String]) -> std::result::Result<(), Failure> {
    if a.config.replicates == 0 {
        return Err(Failure::Usage("--replicates must be >= 1".into()));
    }
    let config = ExperimentConfig {
        curve: Some(a.grid),
        ..a.config.config()
    };
    let report = bound_validation(&config)?;
    let mut out = Outputs::new(&a.out)?;
    let mut buf = Vec::new();
    write_violations_csv(&report, &mut buf)?;
    out.write("violations.csv", &buf)?;
    let counts = serde_json::json!({
        "pairs": report.pairs,
        "pairs_on_t": report.pairs_on_t,
        "slow_violations": report.slow_violations,
        "improved_violations": report.improved_violations,
        "ordering_violations": report.ordering_violations,
    });
    out.write("bounds.json", serde_json::to_string_pretty(&counts).map_err(Error::from)?.as_bytes())?;
    out.finish("validate-bounds", argv, a, Some(a.config.seed))?;
    let bad = report.slow_violations + report.improved_violations + report.ordering_violations;
    if bad > 0 {
        return Err(Failure::Audit(format!("{bad} bound violations on T")));
    }
    Ok(())
}

fn cmd_coverage(a: &CoverageArgs, argv: &[String]) -> std::result::Result<(), Failure> {
    if a.config.replicates == 0 {
        return Err(Failure::Usage("--replicates must be >= 1".into()));
    }
    let config = a.config.config();
    let profile = a.x_grid.as_ref().map(|grid| {
        let mut opts = ProfileOptions::new(config.n, a.kappa);
        opts.x_grid = grid.clone();
        opts
    });
    let report = coverage_check(&config, a.kappa, profile)?;
    let mut out = Outputs::new(&a.out)?;
    out.write("coverage.json", serde_json::to_string_pretty(&report).map_err(Error::from)?.as_bytes())?;
    out.finish("coverage", argv, a, Some(a.config.seed))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parser() {
        assert_eq!(
            parse_grid("0:10:101").unwrap(),
            GridSpec {
                min: 0.0,
                max: 10.0,
                count: 101
            }
        );
        assert!(parse_grid("0:10").is_err());
        assert!(parse_grid("a:1:2").is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn manifest_rejects_bad_digests() {
        let good = RunManifest {
            subcommand: "corr".into(),
            argv: vec!["lasso-corr".into()],
            params: serde_json::Value::Null,
            base_seed: None,
            version: "0".into(),
            outputs: BTreeMap::from([("a.csv".to_string(), sha256_hex(b"x"))]),
        };
        let text = serde_json::to_string(&good).unwrap();
        assert_eq!(RunManifest::from_json(&text).unwrap(), good);
        let mut bad = good.clone();
        bad.outputs.insert("../b".into(), sha256_hex(b"y"));
        assert!(RunManifest::from_json(&serde_json::to_string(&bad).unwrap()).is_err());
        let mut short = good;
        short.outputs.insert("c".into(), "abc".into());
        assert!(RunManifest::from_json(&serde_json::to_string(&short).unwrap()).is_err());
    }

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
