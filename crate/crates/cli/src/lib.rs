//! Commands behind the `smooth-lsvi` binary.
//!
//! Exit codes: 0 success, 1 check or runtime failure, 2 usage, 3 design
//! failure, 4 environment failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use smooth_lsvi::env::{env_by_name, grid_dp_oracle, EnvError, GenerativeModel, MdpSpec, OracleResult};
use smooth_lsvi::harmonics::{kernel_l1_norm, Quadrature};
use smooth_lsvi::kernel_sampler::{KernelTable, Part, DEFAULT_TABLE_POINTS};
use smooth_lsvi::lsvi::{choose_degree, greedy_policy, train, LsviError, QEstimate, StageDiagnostics, TrainConfig};
use smooth_lsvi::validation::{ks_distance, projection_leak, reproduction_error, start_grid_gap, GapReport};

pub const THREADS_VAR: &str = "SMOOTH_LSVI_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("check failed: {0}")]
    Check(String),
    #[error("design failure: {0}")]
    Design(String),
    #[error("environment failure: {0}")]
    Env(String),
    #[error("{0}")]
    Runtime(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Check(_) | CliError::Runtime(_) | CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Design(_) => 3,
            CliError::Env(_) => 4,
        }
    }
}

impl From<LsviError> for CliError {
    fn from(e: LsviError) -> Self {
        match e {
            LsviError::Config(_) => CliError::Usage(e.to_string()),
            LsviError::Design(_) | LsviError::DesignFailed { .. } => CliError::Design(e.to_string()),
            LsviError::Env { .. } => CliError::Env(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<EnvError> for CliError {
    fn from(e: EnvError) -> Self {
        match e {
            EnvError::Unknown(_) | EnvError::Params(_) => CliError::Usage(e.to_string()),
            _ => CliError::Env(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Sizes the global worker pool from `SMOOTH_LSVI_THREADS` when set.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_VAR} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Runtime(e.to_string()))
}

#[derive(Debug, Parser)]
#[command(name = "smooth-lsvi", version, about = "Kernel-perturbed least-squares value iteration")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the kernel and sampler invariants for one degree.
    KernelCheck(KernelCheckArgs),
    /// Train on an environment and compare with the grid oracle.
    Train(TrainArgs),
    /// Search the smallest passing n_tot for each target accuracy.
    Sweep(SweepArgs),
    /// Evaluate a saved estimate against the grid oracle.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Args)]
pub struct KernelCheckArgs {
    #[arg(long, default_value_t = 4)]
    pub degree: usize,
    /// Table points G.
    #[arg(long, default_value_t = DEFAULT_TABLE_POINTS)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EnvArgs {
    #[arg(long)]
    pub env: String,
    #[arg(long)]
    pub horizon: Option<usize>,
    /// JSON object of environment parameters.
    #[arg(long)]
    pub env_params: Option<String>,
}

impl EnvArgs {
    pub fn params(&self) -> Result<serde_json::Value> {
        match &self.env_params {
            None => Ok(serde_json::Value::Null),
            Some(s) => serde_json::from_str(s).map_err(|e| CliError::Usage(format!("--env-params: {e}"))),
        }
    }

    pub fn model(&self) -> Result<MdpSpec> {
        Ok(env_by_name(&self.env, self.horizon, &self.params()?)?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    /// Oracle grid points per axis.
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    #[arg(long, default_value_t = 200)]
    pub oracle_mc: usize,
    #[arg(long, default_value_t = 7)]
    pub oracle_seed: u64,
    /// Rollouts per start state.
    #[arg(long, default_value_t = 300)]
    pub episodes: usize,
}

impl OracleArgs {
    fn check(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(CliError::Usage("--episodes must be at least 1".into()));
        }
        Ok(())
    }

    fn oracle(&self, model: &dyn GenerativeModel) -> Result<OracleResult> {
        Ok(grid_dp_oracle(model, self.grid, self.oracle_mc, self.oracle_seed)?)
    }

    fn summary(&self, oracle: &OracleResult) -> OracleSummary {
        OracleSummary {
            grid_m: oracle.grid_m,
            mc_per_cell: oracle.mc_per_cell,
            seed: self.oracle_seed,
            error_budget: oracle.error_budget,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub env: EnvArgs,
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long, default_value_t = 2000)]
    pub n_tot: u64,
    /// Smoothness used with --epsilon to pick the degree.
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Constant in the degree rule.
    #[arg(long, default_value_t = 1.0)]
    pub degree_c: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eps_prime: f64,
    #[arg(long, default_value_t = smooth_lsvi::lsvi::DEFAULT_ACTION_GRID)]
    pub action_grid: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = smooth_lsvi::lsvi::DEFAULT_RIDGE)]
    pub ridge: f64,
    #[command(flatten)]
    pub oracle: OracleArgs,
    /// Output directory for estimate.json and run.json.
    #[arg(long)]
    pub out: PathBuf,
}

impl TrainArgs {
    pub fn config(&self) -> Result<TrainConfig> {
        let degree = match (self.degree, self.epsilon) {
            (Some(n), _) => n,
            (None, Some(eps)) => {
                let nu = self.nu.ok_or_else(|| CliError::Usage("--epsilon needs --nu".into()))?;
                check_epsilon(eps)?;
                choose_degree(eps, nu, self.degree_c)
            }
            (None, None) => TrainConfig::default().degree,
        };
        let config = TrainConfig {
            degree,
            n_tot: self.n_tot,
            nu: self.nu,
            eps_prime: self.eps_prime,
            action_grid_m: self.action_grid,
            seed: self.seed,
            ridge: self.ridge,
            ..TrainConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub env: EnvArgs,
    /// Target accuracies, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub epsilon: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
    pub seeds: Vec<u64>,
    #[arg(long)]
    pub nu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub degree_c: f64,
    /// First n_tot tried.
    #[arg(long, default_value_t = 250)]
    pub n_tot: u64,
    /// Largest n_tot tried.
    #[arg(long, default_value_t = 64_000)]
    pub cap: u64,
    #[arg(long, default_value_t = 0.1)]
    pub eps_prime: f64,
    #[arg(long, default_value_t = smooth_lsvi::lsvi::DEFAULT_ACTION_GRID)]
    pub action_grid: usize,
    #[arg(long, default_value_t = smooth_lsvi::lsvi::DEFAULT_RIDGE)]
    pub ridge: f64,
    #[command(flatten)]
    pub oracle: OracleArgs,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub estimate: PathBuf,
    #[command(flatten)]
    pub env: EnvArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub oracle: OracleArgs,
    #[arg(long)]
    pub out: PathBuf,
}

fn check_epsilon(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("epsilon must lie in (0, 1), got {eps}")))
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::KernelCheck(a) => cmd_kernel_check(&a).map(|_| ()),
        Command::Train(a) => cmd_train(&a).map(|_| ()),
        Command::Sweep(a) => cmd_sweep(&a).map(|_| ()),
        Command::Eval(a) => cmd_eval(&a).map(|_| ()),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

// kernel-check

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), value, threshold, pass: value <= threshold }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    #[serde(rename = "N")]
    pub degree: usize,
    #[serde(rename = "G")]
    pub points: usize,
    /// `||D_N||_1` from the table.
    pub l1_norm: f64,
    /// `||D_N||_1` by Gauss-Legendre panels.
    pub l1_norm_quadrature: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    pub reproduction_error_d1: f64,
    /// Skipped above degree 16.
    pub reproduction_error_d2: Option<f64>,
    pub projection_leak_d1: f64,
    pub ks_plus: f64,
    pub ks_minus: Option<f64>,
    pub ks_critical: f64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

pub const KS_DRAWS: usize = 20_000;

pub fn cmd_kernel_check(args: &KernelCheckArgs) -> Result<KernelReport> {
    let n = args.degree;
    if n < 2 || n % 2 == 1 {
        return Err(CliError::Usage(format!("--degree must be even and >= 2, got {n}")));
    }
    if args.points < 64 * n {
        return Err(CliError::Usage(format!("--points must be at least 64 N = {}", 64 * n)));
    }
    let runtime = |e: &dyn std::fmt::Display| CliError::Runtime(e.to_string());
    let table = KernelTable::build(n, args.points).map_err(|e| runtime(&e))?;
    let quad = Quadrature::new(1, 512).map_err(|e| runtime(&e))?;
    let l1_quad = kernel_l1_norm(n, &quad).map_err(|e| runtime(&e))?;
    let rep1 = reproduction_error(1, n, 20, args.seed).map_err(|e| runtime(&e))?;
    let rep2 = if n <= 16 { Some(reproduction_error(2, n, 5, args.seed).map_err(|e| runtime(&e))?) } else { None };
    let leak = projection_leak(1, n, 2 * n + 4, 10, args.seed).map_err(|e| runtime(&e))?;
    let ks_plus = ks_distance(&table, Part::Plus, KS_DRAWS, args.seed).map_err(|e| runtime(&e))?;
    let ks_minus = if table.beta_minus() > 0.0 {
        Some(ks_distance(&table, Part::Minus, KS_DRAWS, args.seed).map_err(|e| runtime(&e))?)
    } else {
        None
    };
    // 1% critical value
    let ks_critical = 1.63 / (KS_DRAWS as f64).sqrt();

    let mut checks = vec![
        Check::at_most("unit_mass", (table.beta_plus() - table.beta_minus() - 1.0).abs(), 1e-9),
        Check::at_most("l1_norm_agreement", (table.lambda_hat() - l1_quad).abs(), 1e-6),
        Check::at_most("reproduction_d1", rep1, 1e-6),
    ];
    if let Some(r) = rep2 {
        checks.push(Check::at_most("reproduction_d2", r, 1e-6));
    }
    checks.push(Check::at_most("projection_leak_d1", leak, 1e-8));
    checks.push(Check::at_most("ks_plus", ks_plus, ks_critical));
    if let Some(k) = ks_minus {
        checks.push(Check::at_most("ks_minus", k, ks_critical));
    }
    let pass = checks.iter().all(|c| c.pass);
    let report = KernelReport {
        degree: n,
        points: args.points,
        l1_norm: table.lambda_hat(),
        l1_norm_quadrature: l1_quad,
        beta_plus: table.beta_plus(),
        beta_minus: table.beta_minus(),
        reproduction_error_d1: rep1,
        reproduction_error_d2: rep2,
        projection_leak_d1: leak,
        ks_plus,
        ks_minus,
        ks_critical,
        checks,
        pass,
    };
    write_file(&args.out, &to_json(&report))?;
    match report.checks.iter().find(|c| !c.pass) {
        Some(c) => Err(CliError::Check(format!("{}: {:e} > {:e}", c.name, c.value, c.threshold))),
        None => Ok(report),
    }
}

// train

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub grid_m: usize,
    pub mc_per_cell: usize,
    pub seed: u64,
    pub error_budget: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub env: String,
    pub horizon: usize,
    pub env_params: serde_json::Value,
    pub config: TrainConfig,
    pub seed: u64,
    pub n_queries_total: u64,
    /// `max_s (V*_1(s) - V^pi_1(s))` over the start grid.
    pub value_gap: f64,
    pub value_gap_std_error: f64,
    pub episodes: usize,
    pub oracle: OracleSummary,
    pub stages: Vec<StageDiagnostics>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct TrainRun {
    pub estimate: QEstimate,
    pub record: RunRecord,
    pub estimate_path: PathBuf,
    pub record_path: PathBuf,
}

pub fn estimate_path(dir: &Path) -> PathBuf {
    dir.join("estimate.json")
}

pub fn record_path(dir: &Path) -> PathBuf {
    dir.join("run.json")
}

pub fn cmd_train(args: &TrainArgs) -> Result<TrainRun> {
    let start = Instant::now();
    let model = args.env.model()?;
    let config = args.config()?;
    args.oracle.check()?;
    let out = train(&model, &config)?;
    let oracle = args.oracle.oracle(&model)?;
    let gap = evaluate(&model, &out.estimate, &oracle, &args.oracle, config.seed)?;
    let record = RunRecord {
        env: model.name.clone(),
        horizon: model.horizon,
        env_params: args.env.params()?,
        seed: config.seed,
        config,
        n_queries_total: out.ledger_total(),
        value_gap: gap.max_gap,
        value_gap_std_error: gap.max_std_error,
        episodes: args.oracle.episodes,
        oracle: args.oracle.summary(&oracle),
        stages: out.estimate.stages.iter().map(|s| s.diagnostics.clone()).collect(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    if !record.value_gap.is_finite() {
        return Err(CliError::Runtime(format!("value gap is {}", record.value_gap)));
    }
    let (ep, rp) = (estimate_path(&args.out), record_path(&args.out));
    write_file(&ep, &out.estimate.to_json())?;
    write_file(&rp, &to_json(&record))?;
    Ok(TrainRun { estimate: out.estimate, record, estimate_path: ep, record_path: rp })
}

fn evaluate(
    model: &MdpSpec,
    est: &QEstimate,
    oracle: &OracleResult,
    args: &OracleArgs,
    seed: u64,
) -> Result<GapReport> {
    let policy = greedy_policy(est)?;
    let gap = start_grid_gap(model, oracle, &policy.as_fn(), args.episodes, seed);
    Ok(gap)
}

// sweep

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub nu: f64,
    #[serde(rename = "N")]
    pub degree: usize,
    pub n_tot: u64,
    pub n_queries: u64,
    pub gap_median: f64,
    pub seeds_passed: usize,
    pub wall_time_s: f64,
    /// `ok` or `cap_exceeded`.
    pub status: String,
    /// Closed-form sample size with the measured kernel norm.
    pub n_tot_reference: f64,
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}

/// `ceil((sigma sqrt(8 p log(2 k / delta)) / (lambda^d eps))^2)`.
pub fn reference_n_tot(est: &QEstimate, epsilon: f64) -> f64 {
    let d = (est.d_state + est.d_action) as i32;
    let k = est.design.grid_points as f64;
    let root = est.sigma_bound * (8.0 * est.n_features as f64 * (2.0 * k / est.config.delta).ln()).sqrt()
        / (est.lambda_hat.powi(d) * epsilon);
    (root * root).ceil()
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<Vec<SweepRow>> {
    if args.epsilon.len() < 2 {
        return Err(CliError::Usage("--epsilon needs at least two values".into()));
    }
    if args.seeds.is_empty() {
        return Err(CliError::Usage("--seeds is empty".into()));
    }
    if args.n_tot == 0 || args.cap < args.n_tot {
        return Err(CliError::Usage(format!("need 1 <= --n-tot <= --cap, got {} and {}", args.n_tot, args.cap)));
    }
    for &e in &args.epsilon {
        check_epsilon(e)?;
    }
    args.oracle.check()?;
    let model = args.env.model()?;
    let oracle = args.oracle.oracle(&model)?;
    let mut eps = args.epsilon.clone();
    eps.sort_by(|a, b| b.total_cmp(a));

    let mut rows = Vec::with_capacity(eps.len());
    let mut n = args.n_tot;
    for &epsilon in &eps {
        let start = Instant::now();
        let degree = choose_degree(epsilon, args.nu, args.degree_c);
        let row = loop {
            let config = TrainConfig {
                degree,
                n_tot: n,
                nu: Some(args.nu),
                eps_prime: args.eps_prime,
                action_grid_m: args.action_grid,
                ridge: args.ridge,
                ..TrainConfig::default()
            };
            config.validate()?;
            let runs: Vec<(f64, u64, QEstimate)> = args
                .seeds
                .par_iter()
                .map(|&seed| {
                    let config = TrainConfig { seed, ..config.clone() };
                    let out = train(&model, &config)?;
                    let gap = evaluate(&model, &out.estimate, &oracle, &args.oracle, seed)?;
                    Ok((gap.max_gap, out.ledger_total(), out.estimate))
                })
                .collect::<Result<_>>()?;
            let gaps: Vec<f64> = runs.iter().map(|r| r.0).collect();
            let passed = gaps.iter().filter(|&&g| g <= epsilon).count();
            let ok = 5 * passed >= 4 * args.seeds.len();
            let capped = !ok && n.saturating_mul(2) > args.cap;
            if ok || capped {
                break SweepRow {
                    epsilon,
                    nu: args.nu,
                    degree,
                    n_tot: n,
                    n_queries: runs[0].1,
                    gap_median: median(&gaps),
                    seeds_passed: passed,
                    wall_time_s: start.elapsed().as_secs_f64(),
                    status: if ok { "ok".into() } else { "cap_exceeded".into() },
                    n_tot_reference: reference_n_tot(&runs[0].2, epsilon),
                };
            }
            n *= 2;
        };
        if row.status != "ok" {
            eprintln!("warning: epsilon {epsilon} not reached within cap {}", args.cap);
        }
        rows.push(row);
    }
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(&args.out).map_err(|e| CliError::Runtime(e.to_string()))?;
    for r in &rows {
        w.serialize(r).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    w.flush()?;
    Ok(rows)
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Runtime(e.to_string()))?;
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(|e| CliError::Runtime(e.to_string()))
}

// eval

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub env: String,
    pub horizon: usize,
    pub seed: u64,
    pub episodes: usize,
    pub oracle: OracleSummary,
    pub max_gap: f64,
    pub max_std_error: f64,
    pub starts: Vec<smooth_lsvi::validation::StartGap>,
}

pub fn cmd_eval(args: &EvalArgs) -> Result<EvalReport> {
    args.oracle.check()?;
    let text = fs::read_to_string(&args.estimate)?;
    let est = QEstimate::from_json(&text).map_err(|e| CliError::Usage(format!("{}: {e}", args.estimate.display())))?;
    let model = args.env.model()?;
    if (est.d_state, est.d_action, est.horizon) != (model.d_state, model.d_action, model.horizon) {
        return Err(CliError::Usage(format!(
            "estimate has (d_S, d_A, H) = ({}, {}, {}), environment has ({}, {}, {})",
            est.d_state, est.d_action, est.horizon, model.d_state, model.d_action, model.horizon
        )));
    }
    let oracle = args.oracle.oracle(&model)?;
    let gap = evaluate(&model, &est, &oracle, &args.oracle, args.seed)?;
    let report = EvalReport {
        env: model.name.clone(),
        horizon: model.horizon,
        seed: args.seed,
        episodes: args.oracle.episodes,
        oracle: args.oracle.summary(&oracle),
        max_gap: gap.max_gap,
        max_std_error: gap.max_std_error,
        starts: gap.starts,
    };
    write_file(&args.out, &to_json(&report))?;
    Ok(report)
}
