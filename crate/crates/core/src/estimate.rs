//! Ergodic moment estimators for (κ, θ, σ).
//!
//! The three sample moments `M1 = mean X`, `M2 = mean X²` and
//! `M3 = mean X_k X_{k+1}` are matched to their stationary values in three
//! stages:
//!
//! 1. `(g1, g2)(u, v) = (M1, M2)` is solved for `(û, v̂)` by damped Newton;
//! 2. with `(û, v̂)` frozen, `g3(û, v̂, σ) = M3` is solved for `σ̂` by bisection;
//! 3. `θ̂ = û` and `κ̂ = v̂² σ̂² / (2 û²)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{eta_jacobian, from_uv, g1, g12_jacobian, g2, ROUParams, ReparamUV};
use crate::simulate::{simulate_path, InitialState, Path, SimConfig};
use crate::spectral::{SpectralBasis, DEFAULT_TRUNCATION};
use crate::stats;

/// Search interval for σ used unless configured otherwise.
pub const DEFAULT_SIGMA_DOMAIN: SigmaDomain = SigmaDomain { lo: 0.05, hi: 5.0 };

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_TOL: f64 = 1e-12;
const SIGMA_TOL: f64 = 1e-8;
/// Interior points at which monotonicity of g3 is certified, besides the ends.
const MONOTONE_GRID: usize = 9;

/// Interval [lo, hi] searched for σ̂.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaDomain {
    pub lo: f64,
    pub hi: f64,
}

impl SigmaDomain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma domain needs 0 < lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }
}

impl Default for SigmaDomain {
    fn default() -> Self {
        DEFAULT_SIGMA_DOMAIN
    }
}

/// Sample moments of an equally spaced record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentStats {
    pub m1: f64,
    pub m2: f64,
    /// Mean of the n − 1 consecutive products.
    pub m3: f64,
    pub n: usize,
    pub h: f64,
}

pub fn moment_stats(values: &[f64], h: f64) -> Result<MomentStats> {
    let n = values.len();
    if n < 2 {
        return Err(Error::PathTooShort(n));
    }
    let nf = n as f64;
    let m1 = values.iter().sum::<f64>() / nf;
    let m2 = values.iter().map(|x| x * x).sum::<f64>() / nf;
    let m3 = values.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / (nf - 1.0);
    Ok(MomentStats { m1, m2, m3, n, h })
}

pub fn path_moments(path: &Path) -> Result<MomentStats> {
    moment_stats(&path.values, path.h())
}

/// Realized-variance volatility `sqrt(Σ (X_{k+1} − X_k)² / ((n − 1) h))`.
///
/// Consistent only as h → 0; at fixed h it is biased low.
pub fn sigma_c(values: &[f64], h: f64) -> Result<f64> {
    let n = values.len();
    if n < 2 {
        return Err(Error::PathTooShort(n));
    }
    let qv: f64 = values.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    Ok((qv / ((n - 1) as f64 * h)).sqrt())
}

/// Output of the (u, v) stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UvSolution {
    pub u: f64,
    pub v: f64,
    pub iterations: usize,
    /// Euclidean norm of (g1 − m1, g2 − m2) at the solution.
    pub residual: f64,
}

fn uv_residual(u: f64, v: f64, m1: f64, m2: f64) -> (f64, f64) {
    (g1(u, v) - m1, g2(u, v) - m2)
}

/// Solves g1(u, v) = m1, g2(u, v) = m2 by damped Newton with the analytic Jacobian.
///
/// A truncated normal with positive mean has `1 < m2/m1² < π/2`; moments
/// outside that range have no solution with u, v > 0.
pub fn solve_uv(m1: f64, m2: f64) -> Result<UvSolution> {
    let var = m2 - m1 * m1;
    let ratio = m2 / (m1 * m1);
    if !(m1 > 0.0 && var > 0.0 && ratio < std::f64::consts::FRAC_PI_2) || !m2.is_finite() {
        return Err(Error::InfeasibleMoments { m1, m2 });
    }
    let scale = m2.max(1.0);
    let mut u = m1;
    let mut v = m1 / var.sqrt();
    let (mut r1, mut r2) = uv_residual(u, v, m1, m2);
    let mut norm = r1.hypot(r2);
    for it in 0..NEWTON_MAX_ITER {
        if norm <= NEWTON_TOL * scale {
            return Ok(UvSolution {
                u,
                v,
                iterations: it,
                residual: norm,
            });
        }
        let j = g12_jacobian(u, v);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let du = (j[1][1] * r1 - j[0][1] * r2) / det;
        let dv = (-j[1][0] * r1 + j[0][0] * r2) / det;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let (nu, nv) = (u - step * du, v - step * dv);
            if nu > 0.0 && nv > 0.0 {
                let (a, b) = uv_residual(nu, nv, m1, m2);
                let n_new = a.hypot(b);
                if n_new < norm {
                    u = nu;
                    v = nv;
                    r1 = a;
                    r2 = b;
                    norm = n_new;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            // no descent left: either converged to rounding level or stuck
            if norm <= 1e3 * NEWTON_TOL * scale {
                return Ok(UvSolution {
                    u,
                    v,
                    iterations: it + 1,
                    residual: norm,
                });
            }
            break;
        }
    }
    if norm <= NEWTON_TOL * scale {
        return Ok(UvSolution {
            u,
            v,
            iterations: NEWTON_MAX_ITER,
            residual: norm,
        });
    }
    Err(Error::NewtonNonConvergence {
        iterations: NEWTON_MAX_ITER,
        u,
        v,
        residual: norm,
    })
}

/// Which end of the σ-domain the root landed on, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Lo,
    Hi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaSolution {
    pub sigma: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// g3(σ̂) − m3.
    pub residual: f64,
    pub boundary: Option<Boundary>,
    /// Largest (least negative) value of ∂g3/∂σ² over the certification grid.
    pub max_derivative: f64,
}

/// Solves g3(û, v̂, σ) = m3 on the domain by bisection.
///
/// g3 must be strictly decreasing on the domain; this is certified by
/// ∂g3/∂σ² < 0 at both ends and on an interior grid before the search starts.
/// Far out in σ the exponential weights may underflow; a grid point where g3
/// already equals g1² exactly is accepted as flat.
pub fn solve_sigma(
    basis: &SpectralBasis,
    m3: f64,
    h: f64,
    domain: SigmaDomain,
) -> Result<SigmaSolution> {
    let SigmaDomain { lo, hi } = SigmaDomain::new(domain.lo, domain.hi)?;
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "h must be positive, got {h}"
        )));
    }
    let mut max_derivative = f64::NEG_INFINITY;
    let floor = g1(basis.u(), basis.v()).powi(2);
    for k in 0..=MONOTONE_GRID + 1 {
        let s = lo + (hi - lo) * k as f64 / (MONOTONE_GRID + 1) as f64;
        let d = basis.dg3_dsigma2(s, h);
        max_derivative = max_derivative.max(d);
        // d == 0 is only acceptable once every term has underflowed and g3
        // sits exactly on its limit g1²
        let flat = d == 0.0 && basis.g3(s, h) == floor;
        if !(d < 0.0 || flat) {
            return Err(Error::NotMonotone {
                lo,
                hi,
                at: s,
                deriv: d,
            });
        }
    }
    let g_lo = basis.g3(lo, h);
    let g_hi = basis.g3(hi, h);
    let done = |sigma: f64, iterations: usize, boundary: Option<Boundary>| SigmaSolution {
        sigma,
        bracket: (lo, hi),
        iterations,
        residual: basis.g3(sigma, h) - m3,
        boundary,
        max_derivative,
    };
    if m3 == g_hi {
        return Ok(done(hi, 0, Some(Boundary::Hi)));
    }
    if m3 == g_lo {
        return Ok(done(lo, 0, Some(Boundary::Lo)));
    }
    if !(m3 < g_lo && m3 > g_hi) {
        return Err(Error::NoSignChange {
            m3,
            lo,
            hi,
            g_lo,
            g_hi,
        });
    }
    let (mut a, mut b) = (lo, hi);
    let mut iterations = 0;
    while b - a > SIGMA_TOL {
        let mid = 0.5 * (a + b);
        // g3 decreasing: above the target means σ is still too small
        if basis.g3(mid, h) > m3 {
            a = mid;
        } else {
            b = mid;
        }
        iterations += 1;
    }
    Ok(done(0.5 * (a + b), iterations, None))
}

/// Builds the basis at (û, v̂) with `truncation` terms, then calls [`solve_sigma`].
pub fn solve_sigma_uv(
    u_hat: f64,
    v_hat: f64,
    m3: f64,
    h: f64,
    domain: SigmaDomain,
    truncation: usize,
) -> Result<SigmaSolution> {
    let basis = SpectralBasis::new(u_hat, v_hat, truncation)?;
    solve_sigma(&basis, m3, h, domain)
}

/// Knobs of the full estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig {
    pub sigma_domain: SigmaDomain,
    pub truncation: usize,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            sigma_domain: DEFAULT_SIGMA_DOMAIN,
            truncation: DEFAULT_TRUNCATION,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub residual_uv: f64,
    pub residual_sigma: f64,
    pub sigma_iterations: usize,
    pub sigma_boundary: Option<Boundary>,
    /// Least negative ∂g3/∂σ² seen while certifying monotonicity.
    pub max_dg3_dsigma2: f64,
    /// exp(−λ̃_N σ̂² h)|A_N B_N| at the estimate.
    pub truncation_tail: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub theta_hat: f64,
    pub kappa_hat: f64,
    pub sigma_hat: f64,
    pub u_hat: f64,
    pub v_hat: f64,
    pub sigma_c_hat: f64,
    pub iterations_uv: usize,
    pub bracket_sigma: (f64, f64),
    pub moments: MomentStats,
    pub diagnostics: Diagnostics,
}

impl EstimationResult {
    pub fn params(&self) -> ROUParams {
        ROUParams {
            kappa: self.kappa_hat,
            theta: self.theta_hat,
            sigma: self.sigma_hat,
        }
    }
}

/// Runs moments → (û, v̂) → spectral basis → σ̂ → (θ̂, κ̂) on a record
/// sampled every `h`. Errors carry the name of the failing stage.
pub fn estimate_values(values: &[f64], h: f64, cfg: &EstimateConfig) -> Result<EstimationResult> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(
            Error::InvalidParameter(format!("h must be positive, got {h}")).in_stage("moments"),
        );
    }
    let moments = moment_stats(values, h).map_err(|e| e.in_stage("moments"))?;
    let sigma_c_hat = sigma_c(values, h).map_err(|e| e.in_stage("moments"))?;
    let uv = solve_uv(moments.m1, moments.m2).map_err(|e| e.in_stage("solve_uv"))?;
    let basis =
        SpectralBasis::new(uv.u, uv.v, cfg.truncation).map_err(|e| e.in_stage("spectral"))?;
    let sig = solve_sigma(&basis, moments.m3, h, cfg.sigma_domain)
        .map_err(|e| e.in_stage("solve_sigma"))?;
    let params = from_uv(&ReparamUV {
        u: uv.u,
        v: uv.v,
        sigma: sig.sigma,
    });
    Ok(EstimationResult {
        theta_hat: params.theta,
        kappa_hat: params.kappa,
        sigma_hat: params.sigma,
        u_hat: uv.u,
        v_hat: uv.v,
        sigma_c_hat,
        iterations_uv: uv.iterations,
        bracket_sigma: sig.bracket,
        moments,
        diagnostics: Diagnostics {
            residual_uv: uv.residual,
            residual_sigma: sig.residual,
            sigma_iterations: sig.iterations,
            sigma_boundary: sig.boundary,
            max_dg3_dsigma2: sig.max_derivative,
            truncation_tail: basis.truncation_diagnostic(sig.sigma, h),
        },
    })
}

pub fn estimate_all(path: &Path, cfg: &EstimateConfig) -> Result<EstimationResult> {
    estimate_values(&path.values, path.h(), cfg)
}

/// Monte Carlo description of the sampling distribution of √n(estimate − truth).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McCovariance {
    /// Empirical covariance of √n(θ̂ − θ, κ̂ − κ, σ̂ − σ).
    pub covariance: [[f64; 3]; 3],
    /// Mean of √n(estimate − truth), in the same order.
    pub mean: [f64; 3],
    /// mean / (sd/√reps): standardized bias per parameter.
    pub z_scores: [f64; 3],
    /// ∇η at the true (u, v, σ); rows (θ, κ, σ), columns (u, v, σ).
    pub eta_jacobian: [[f64; 3]; 3],
    /// √n(estimate − truth) per successful replication, in replication order.
    pub scaled_errors: Vec<[f64; 3]>,
    /// Raw estimates (θ̂, κ̂, σ̂) per successful replication.
    pub estimates: Vec<[f64; 3]>,
    pub failures: usize,
    pub reps: usize,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub h: f64,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub substeps: usize,
    pub estimate: EstimateConfig,
}

/// Runs `reps` independent replications (replication r seeded with
/// `seed ^ r`) in parallel and reduces them in replication order.
pub fn mc_covariance(p: &ROUParams, cfg: &McConfig) -> Result<McCovariance> {
    p.validate()?;
    if cfg.reps < 30 {
        return Err(Error::InvalidParameter(format!(
            "mc_covariance needs at least 30 replications, got {}",
            cfg.reps
        )));
    }
    let outcomes: Vec<Result<EstimationResult>> = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|r| {
            let sim = SimConfig {
                h: cfg.h,
                n: cfg.n,
                substeps: cfg.substeps,
                seed: cfg.seed ^ r,
                x0: InitialState::Stationary,
            };
            let path = simulate_path(p, &sim)?;
            estimate_all(&path, &cfg.estimate)
        })
        .collect();
    let root_n = (cfg.n as f64).sqrt();
    let truth = [p.theta, p.kappa, p.sigma];
    let mut estimates = Vec::new();
    let mut scaled = Vec::new();
    let mut failures = 0;
    for o in outcomes {
        match o {
            Ok(e) => {
                let est = [e.theta_hat, e.kappa_hat, e.sigma_hat];
                estimates.push(est);
                scaled.push([
                    root_n * (est[0] - truth[0]),
                    root_n * (est[1] - truth[1]),
                    root_n * (est[2] - truth[2]),
                ]);
            }
            Err(_) => failures += 1,
        }
    }
    if scaled.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "only {} of {} replications succeeded",
            scaled.len(),
            cfg.reps
        )));
    }
    let covariance = stats::covariance3(&scaled);
    let mut mean = [0.0; 3];
    let mut z_scores = [0.0; 3];
    let k = scaled.len() as f64;
    for j in 0..3 {
        mean[j] = scaled.iter().map(|r| r[j]).sum::<f64>() / k;
        z_scores[j] = mean[j] / (covariance[j][j] / k).sqrt();
    }
    Ok(McCovariance {
        covariance,
        mean,
        z_scores,
        eta_jacobian: eta_jacobian(&p.to_uv()),
        scaled_errors: scaled,
        estimates,
        failures,
        reps: cfg.reps,
        n: cfg.n,
    })
}
