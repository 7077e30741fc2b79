//! The work behind each subcommand, kept free of argument parsing so that
//! it can be driven from tests.

use std::io::Read;

use rayon::prelude::*;
use rou_core::estimate::{estimate_values, Boundary, EstimateConfig, EstimationResult};
use rou_core::simulate::{simulate_path, InitialState, Path, SimConfig};
use rou_core::spectral::SpectralBasis;
use rou_core::stats::median;
use rou_core::ROUParams;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::format::{fmt10, round10};

fn csv_bytes<F>(header: &[&str], rows: F) -> Vec<u8>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    rows(&mut w).expect("in-memory write");
    w.into_inner().expect("in-memory flush")
}

/// `index,time,value` with index 1..=n and time = index·h.
pub fn path_csv(path: &Path) -> Vec<u8> {
    let h = path.h();
    csv_bytes(&["index", "time", "value"], |w| {
        for (k, x) in path.values.iter().enumerate() {
            let i = k + 1;
            w.write_record([i.to_string(), fmt10(i as f64 * h), fmt10(*x)])?;
        }
        Ok(())
    })
}

pub fn simulate(params: &ROUParams, cfg: &SimConfig) -> Result<Path, CliError> {
    if cfg.n == 0 {
        return Err(CliError::Usage("n must be >= 1".into()));
    }
    params
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(simulate_path(params, cfg)?)
}

/// Reads the observation column of a CSV with a header row.
///
/// The column is the one named `value`, or the only column if there is just
/// one. Line numbers in errors are 1-based and count the header.
pub fn read_series<R: Read>(input: R, name: &str) -> Result<Vec<f64>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let parse_err = |line: u64, msg: String| CliError::Parse {
        path: name.to_string(),
        line,
        msg,
    };
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let col = match headers.iter().position(|h| h == "value") {
        Some(c) => c,
        None if headers.len() == 1 => 0,
        None => return Err(parse_err(1, "no `value` column in header".into())),
    };
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = rec.get(col).unwrap_or("");
        let x: f64 = field
            .parse()
            .map_err(|_| parse_err(line, format!("cannot parse `{field}` as a number")))?;
        if !(x >= 0.0 && x.is_finite()) {
            return Err(parse_err(
                line,
                format!("observation {field} is not a finite value >= 0"),
            ));
        }
        out.push(x);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDiagnostics {
    pub residual_uv: f64,
    pub iterations_uv: usize,
    pub residual_sigma: f64,
    pub iterations_sigma: usize,
    pub bracket_sigma: [f64; 2],
    /// `"lo"` or `"hi"` when σ̂ sits on an end of the search interval.
    pub sigma_boundary: Option<String>,
    pub max_dg3_dsigma2: f64,
    pub truncation: usize,
    pub truncation_tail: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
}

/// JSON report of one estimation, numbers rounded to 10 significant digits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub theta_hat: f64,
    pub kappa_hat: f64,
    pub sigma_hat: f64,
    pub sigma_c_hat: f64,
    pub u_hat: f64,
    pub v_hat: f64,
    pub n: usize,
    pub h: f64,
    pub diagnostics: ReportDiagnostics,
}

impl EstimateReport {
    pub fn new(r: &EstimationResult, truncation: usize) -> Self {
        let d = &r.diagnostics;
        Self {
            theta_hat: round10(r.theta_hat),
            kappa_hat: round10(r.kappa_hat),
            sigma_hat: round10(r.sigma_hat),
            sigma_c_hat: round10(r.sigma_c_hat),
            u_hat: round10(r.u_hat),
            v_hat: round10(r.v_hat),
            n: r.moments.n,
            h: round10(r.moments.h),
            diagnostics: ReportDiagnostics {
                residual_uv: round10(d.residual_uv),
                iterations_uv: r.iterations_uv,
                residual_sigma: round10(d.residual_sigma),
                iterations_sigma: d.sigma_iterations,
                bracket_sigma: [round10(r.bracket_sigma.0), round10(r.bracket_sigma.1)],
                sigma_boundary: d.sigma_boundary.map(|b| match b {
                    Boundary::Lo => "lo".to_string(),
                    Boundary::Hi => "hi".to_string(),
                }),
                max_dg3_dsigma2: round10(d.max_dg3_dsigma2),
                truncation,
                truncation_tail: round10(d.truncation_tail),
                m1: round10(r.moments.m1),
                m2: round10(r.moments.m2),
                m3: round10(r.moments.m3),
            },
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn estimate(values: &[f64], h: f64, cfg: &EstimateConfig) -> Result<EstimateReport, CliError> {
    let r = estimate_values(values, h, cfg)?;
    Ok(EstimateReport::new(&r, cfg.truncation))
}

/// One (n, seed) cell of the multi-seed experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub n: usize,
    pub seed: u64,
    pub outcome: Result<EstimationResult, String>,
}

/// Runs every (n, seed) cell. Each seed simulates one path of the largest n
/// and the smaller n use its leading observations. Rows are ordered by
/// (n, seed).
pub fn table1(cfg: &ExperimentConfig) -> Result<Vec<Table1Row>, CliError> {
    cfg.validate()?;
    let est = cfg.estimate_config()?;
    let n_max = *cfg.n_list.iter().max().expect("validated non-empty");
    let per_seed: Vec<Vec<Table1Row>> =
        cfg.seeds
            .par_iter()
            .map(|&seed| {
                let sim = SimConfig {
                    h: cfg.h,
                    n: n_max,
                    substeps: cfg.substeps,
                    seed,
                    x0: InitialState::Stationary,
                };
                let path = simulate_path(&cfg.true_params, &sim);
                cfg.n_list
                    .iter()
                    .map(|&n| {
                        let outcome = match &path {
                            Ok(p) => estimate_values(&p.values[..n], cfg.h, &est)
                                .map_err(|e| e.to_string()),
                            Err(e) => Err(e.to_string()),
                        };
                        Table1Row { n, seed, outcome }
                    })
                    .collect()
            })
            .collect();
    let mut rows: Vec<Table1Row> = per_seed.into_iter().flatten().collect();
    rows.sort_by_key(|r| (r.n, r.seed));
    Ok(rows)
}

pub const TABLE1_HEADER: [&str; 10] = [
    "n",
    "seed",
    "kappa_hat",
    "theta_hat",
    "sigma_hat",
    "sigma_c_hat",
    "kappa_abs_err",
    "theta_abs_err",
    "sigma_abs_err",
    "error",
];

pub fn table1_csv(rows: &[Table1Row], truth: &ROUParams) -> Vec<u8> {
    csv_bytes(&TABLE1_HEADER, |w| {
        for r in rows {
            let mut rec = vec![r.n.to_string(), r.seed.to_string()];
            match &r.outcome {
                Ok(e) => {
                    for x in [e.kappa_hat, e.theta_hat, e.sigma_hat, e.sigma_c_hat] {
                        rec.push(fmt10(x));
                    }
                    rec.push(fmt10((e.kappa_hat - truth.kappa).abs()));
                    rec.push(fmt10((e.theta_hat - truth.theta).abs()));
                    rec.push(fmt10((e.sigma_hat - truth.sigma).abs()));
                    rec.push(String::new());
                }
                Err(msg) => {
                    rec.extend(std::iter::repeat_n(String::new(), 7));
                    rec.push(msg.clone());
                }
            }
            w.write_record(&rec)?;
        }
        Ok(())
    })
}

/// Medians over the successful seeds of one n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Summary {
    pub n: usize,
    pub kappa_hat: f64,
    pub theta_hat: f64,
    pub sigma_hat: f64,
    pub sigma_c_hat: f64,
    pub kappa_abs_err: f64,
    pub theta_abs_err: f64,
    pub sigma_abs_err: f64,
    pub succeeded: usize,
    pub failures: usize,
}

pub fn table1_summary(rows: &[Table1Row], truth: &ROUParams) -> Vec<Table1Summary> {
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.dedup();
    ns.into_iter()
        .map(|n| {
            let ok: Vec<&EstimationResult> = rows
                .iter()
                .filter(|r| r.n == n)
                .filter_map(|r| r.outcome.as_ref().ok())
                .collect();
            let med = |f: &dyn Fn(&EstimationResult) -> f64| {
                median(&ok.iter().map(|e| f(e)).collect::<Vec<_>>())
            };
            Table1Summary {
                n,
                kappa_hat: med(&|e| e.kappa_hat),
                theta_hat: med(&|e| e.theta_hat),
                sigma_hat: med(&|e| e.sigma_hat),
                sigma_c_hat: med(&|e| e.sigma_c_hat),
                kappa_abs_err: med(&|e| (e.kappa_hat - truth.kappa).abs()),
                theta_abs_err: med(&|e| (e.theta_hat - truth.theta).abs()),
                sigma_abs_err: med(&|e| (e.sigma_hat - truth.sigma).abs()),
                succeeded: ok.len(),
                failures: rows
                    .iter()
                    .filter(|r| r.n == n && r.outcome.is_err())
                    .count(),
            }
        })
        .collect()
}

/// Medians pivoted: one row per estimator, one
/// column per n.
pub fn summary_csv(summary: &[Table1Summary]) -> Vec<u8> {
    let mut header = vec!["estimator".to_string()];
    header.extend(summary.iter().map(|s| s.n.to_string()));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    type Pick = fn(&Table1Summary) -> f64;
    let lines: [(&str, Pick); 9] = [
        ("kappa_hat", |s| s.kappa_hat),
        ("theta_hat", |s| s.theta_hat),
        ("sigma_hat", |s| s.sigma_hat),
        ("sigma_c_hat", |s| s.sigma_c_hat),
        ("kappa_abs_err", |s| s.kappa_abs_err),
        ("theta_abs_err", |s| s.theta_abs_err),
        ("sigma_abs_err", |s| s.sigma_abs_err),
        ("succeeded", |s| s.succeeded as f64),
        ("failures", |s| s.failures as f64),
    ];
    csv_bytes(&header_refs, |w| {
        for (name, pick) in lines {
            let mut rec = vec![name.to_string()];
            rec.extend(summary.iter().map(|s| fmt10(pick(s))));
            w.write_record(&rec)?;
        }
        Ok(())
    })
}

/// σ grid `min, min + step, ...` up to `max` inclusive.
pub fn sigma_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(min > 0.0 && step > 0.0 && min.is_finite() && max.is_finite() && step.is_finite()) {
        return Err(CliError::Usage(format!(
            "sigma grid needs min > 0 and step > 0, got min={min} step={step}"
        )));
    }
    if max < min {
        return Err(CliError::Usage(format!(
            "empty sigma grid: max {max} < min {min}"
        )));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| min + k as f64 * step).collect())
}

/// (σ, (1/h)·∂g3/∂σ²) along the grid.
pub fn deriv_curve(
    u: f64,
    v: f64,
    h: f64,
    truncation: usize,
    grid: &[f64],
) -> Result<Vec<(f64, f64)>, CliError> {
    if grid.is_empty() {
        return Err(CliError::Usage("empty sigma grid".into()));
    }
    if let Some(s) = grid.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
        return Err(CliError::Usage(format!(
            "sigma grid values must be positive, got {s}"
        )));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(CliError::Usage(format!("h must be positive, got {h}")));
    }
    let basis = SpectralBasis::new(u, v, truncation)?;
    Ok(grid
        .iter()
        .map(|&s| (s, basis.dg3_dsigma2(s, h) / h))
        .collect())
}

pub fn curve_csv(curve: &[(f64, f64)]) -> Vec<u8> {
    csv_bytes(&["sigma", "deriv"], |w| {
        for (s, d) in curve {
            w.write_record([fmt10(*s), fmt10(*d)])?;
        }
        Ok(())
    })
}
