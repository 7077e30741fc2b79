use std::io::Write;
use std::path::{Path as FsPath, PathBuf};

use clap::{Args, Parser, Subcommand};
use rou_core::simulate::{InitialState, SimConfig};
use rou_core::ROUParams;

use crate::commands;
use crate::config::ExperimentConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "rou",
    version,
    about = "Reflected Ornstein-Uhlenbeck simulation and ergodic estimation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one path and write `index,time,value` rows.
    Simulate(SimulateArgs),
    /// Estimate (kappa, theta, sigma) from a CSV path and print a JSON report.
    Estimate(EstimateArgs),
    /// Run the multi-seed, multi-n experiment and write per-cell rows plus medians.
    Table1(Table1Args),
    /// Tabulate (1/h) d g3 / d sigma^2 over a sigma grid.
    DerivCurve(DerivArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON experiment configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Observation step.
    #[arg(long)]
    pub h: Option<f64>,
    /// Output file; stdout when omitted (table1: `<output_dir>/table1.csv`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(h) = self.h {
            cfg.h = h;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of observations (default: largest entry of n_list).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub substeps: Option<usize>,
    /// Fixed initial state; drawn from the invariant law when omitted.
    #[arg(long)]
    pub x0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub common: Common,
    /// CSV with a header row and a `value` column (or a single column).
    #[arg(long)]
    pub input: PathBuf,
    /// Spectral truncation level.
    #[arg(long = "truncation")]
    pub truncation: Option<usize>,
    #[arg(long)]
    pub sigma_lo: Option<f64>,
    #[arg(long)]
    pub sigma_hi: Option<f64>,
}

#[derive(Debug, Args)]
pub struct Table1Args {
    #[command(flatten)]
    pub common: Common,
    /// Run a single seed.
    #[arg(long, conflicts_with = "seeds")]
    pub seed: Option<u64>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long)]
    pub substeps: Option<usize>,
    #[arg(long = "truncation")]
    pub truncation: Option<usize>,
    /// Where to write the pivoted medians (default: next to the main table).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DerivArgs {
    #[command(flatten)]
    pub common: Common,
    /// Defaults to theta of the configuration.
    #[arg(long)]
    pub u: Option<f64>,
    /// Defaults to the value implied by the configuration's parameters.
    #[arg(long)]
    pub v: Option<f64>,
    #[arg(long = "truncation")]
    pub truncation: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub sigma_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub sigma_max: f64,
    #[arg(long, default_value_t = 0.02)]
    pub sigma_step: f64,
    /// Explicit comma-separated grid; replaces min/max/step.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub sigmas: Option<Vec<f64>>,
}

fn emit(out: Option<&FsPath>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(p) => write_file(p, bytes),
        None => std::io::stdout()
            .lock()
            .write_all(bytes)
            .map_err(|e| CliError::io(FsPath::new("<stdout>"), e)),
    }
}

fn write_file(p: &FsPath, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(p, bytes).map_err(|e| CliError::io(p, e))
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => run_simulate(a),
        Command::Estimate(a) => run_estimate(a),
        Command::Table1(a) => run_table1(a),
        Command::DerivCurve(a) => run_deriv(a),
    }
}

fn run_simulate(a: SimulateArgs) -> Result<(), CliError> {
    let cfg = a.common.config()?;
    let tp = cfg.true_params;
    let params = ROUParams {
        kappa: a.kappa.unwrap_or(tp.kappa),
        theta: a.theta.unwrap_or(tp.theta),
        sigma: a.sigma.unwrap_or(tp.sigma),
    };
    let sim = SimConfig {
        h: cfg.h,
        n: a.n
            .unwrap_or_else(|| cfg.n_list.iter().copied().max().unwrap_or(0)),
        substeps: a.substeps.unwrap_or(cfg.substeps),
        seed: a.seed.or_else(|| cfg.seeds.first().copied()).unwrap_or(0),
        x0: a.x0.map_or(InitialState::Stationary, InitialState::Value),
    };
    let path = commands::simulate(&params, &sim)?;
    emit(a.common.out.as_deref(), &commands::path_csv(&path))
}

fn run_estimate(a: EstimateArgs) -> Result<(), CliError> {
    let mut cfg = a.common.config()?;
    if a.common.config.is_none() && a.common.h.is_none() {
        return Err(CliError::Usage(
            "estimate needs the observation step via --h or --config".into(),
        ));
    }
    if let Some(n) = a.truncation {
        cfg.truncation = n;
    }
    if let Some(lo) = a.sigma_lo {
        cfg.sigma_domain[0] = lo;
    }
    if let Some(hi) = a.sigma_hi {
        cfg.sigma_domain[1] = hi;
    }
    if !(cfg.h > 0.0 && cfg.h.is_finite()) {
        return Err(CliError::Usage(format!(
            "h must be positive, got {}",
            cfg.h
        )));
    }
    if cfg.truncation == 0 {
        return Err(CliError::Usage("truncation must be >= 1".into()));
    }
    let est = cfg.estimate_config()?;
    let file = std::fs::File::open(&a.input).map_err(|e| CliError::io(&a.input, e))?;
    let values = commands::read_series(file, &a.input.display().to_string())?;
    let report = commands::estimate(&values, cfg.h, &est)?;
    emit(a.common.out.as_deref(), report.to_json().as_bytes())
}

fn summary_path(main: &FsPath) -> PathBuf {
    let stem = main
        .file_stem()
        .map_or("table1".into(), |s| s.to_string_lossy().into_owned());
    main.with_file_name(format!("{stem}_summary.csv"))
}

fn run_table1(a: Table1Args) -> Result<(), CliError> {
    let mut cfg = a.common.config()?;
    if let Some(s) = a.seed {
        cfg.seeds = vec![s];
    }
    if let Some(s) = a.seeds {
        cfg.seeds = s;
    }
    if let Some(n) = a.n {
        cfg.n_list = n;
    }
    if let Some(k) = a.substeps {
        cfg.substeps = k;
    }
    if let Some(n) = a.truncation {
        cfg.truncation = n;
    }
    let rows = commands::table1(&cfg)?;
    let main = a
        .common
        .out
        .unwrap_or_else(|| cfg.output_dir.join("table1.csv"));
    write_file(&main, &commands::table1_csv(&rows, &cfg.true_params))?;
    let summary = commands::table1_summary(&rows, &cfg.true_params);
    let spath = a.summary.unwrap_or_else(|| summary_path(&main));
    write_file(&spath, &commands::summary_csv(&summary))
}

fn run_deriv(a: DerivArgs) -> Result<(), CliError> {
    let mut cfg = a.common.config()?;
    if let Some(n) = a.truncation {
        cfg.truncation = n;
    }
    if cfg.truncation == 0 {
        return Err(CliError::Usage("truncation must be >= 1".into()));
    }
    let q = cfg.true_params.to_uv();
    let (u, v) = (a.u.unwrap_or(q.u), a.v.unwrap_or(q.v));
    let grid = match a.sigmas {
        Some(g) => g,
        None => commands::sigma_grid(a.sigma_min, a.sigma_max, a.sigma_step)?,
    };
    let curve = commands::deriv_curve(u, v, cfg.h, cfg.truncation, &grid)?;
    emit(a.common.out.as_deref(), &commands::curve_csv(&curve))
}
