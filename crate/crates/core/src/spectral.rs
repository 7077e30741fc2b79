//! Eigen-expansion of the reflected OU transition density.
//!
//! With `z = (v x/u − v)/√2` the generator becomes Hermite's operator, so the
//! eigenfunctions are `H_ν(z)` and the reflecting (Neumann) condition at
//! `x = 0` reads `H_{ν−1}(−v/√2) = 0`. The eigenvalues in the σ-free scaling
//! are `λ̃ = ν v²/(2u²)`, and the truncated kernel is
//!
//! ```text
//! p_{N,h}(x, y) = π(y) + m(y) Σ_{i≤N} exp(−λ̃_i σ² h) φ_i(x) φ_i(y)
//! ```
//!
//! `φ_i` carries a factor σ and `m` a factor σ⁻², so every product
//! `φ_i(x) φ_i(y) m(y)` is σ-free; only the exponential weights move with σ.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::model::{self, density_unchecked, g1};
use crate::quadrature::GaussLegendre;
use crate::specfun::{hermite, hermite_dnu};

/// Truncation level used unless configured otherwise.
pub const DEFAULT_TRUNCATION: usize = 12;

/// Step of the bracketing scan in the order variable.
pub const SCAN_STEP: f64 = 0.05;

const INITIAL_WINDOW: f64 = 50.0;
const MAX_WINDOW: f64 = 3200.0;
const ROOT_TOL: f64 = 1e-12;
const RESIDUAL_LIMIT: f64 = 1e-9;

/// Stationary scales above the mode covered by the moment quadratures.
const MOMENT_SCALES: f64 = 12.0;
const MOMENT_TOL: f64 = 1e-10;
const MIN_PANELS: usize = 8;
const MAX_PANELS: usize = 1024;

/// Truncated eigen-decomposition for one (u, v).
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    u: f64,
    v: f64,
    /// λ̃_i = λ_i/σ², strictly increasing.
    lambdas_tilde: Vec<f64>,
    /// Eigenfunction orders ν_i = 2u²λ̃_i/v².
    orders: Vec<f64>,
    /// φ_i(x)/σ = norm_i · H_{ν_i}(z(x)).
    norm_constants: Vec<f64>,
    /// Δ_i = ∂H_{ν−1}(−v/√2)/∂ν at ν = ν_i.
    deltas: Vec<f64>,
    /// A_i/σ with A_i = ∫ x π(x) φ_i(x) dx.
    a_scaled: Vec<f64>,
    /// B_i·σ with B_i = ∫ y m(y) φ_i(y) dy.
    b_scaled: Vec<f64>,
    residuals: Vec<f64>,
    window: f64,
}

fn boundary_arg(v: f64) -> f64 {
    -v / SQRT_2
}

/// Scaled residual |H(μ)| / (|H(μ − step)| + |H(μ + step)|) of a root μ of `H_μ(z0)`.
fn scaled_residual(mu: f64, z0: f64) -> Result<f64> {
    let at = hermite(mu, z0)?.abs();
    let side = hermite(mu - SCAN_STEP, z0)?.abs() + hermite(mu + SCAN_STEP, z0)?.abs();
    Ok(at / side)
}

fn bisect_order(mut lo: f64, mut hi: f64, z0: f64) -> Result<f64> {
    let mut f_lo = hermite(lo, z0)?;
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        let f_mid = hermite(mid, z0)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The `count` smallest roots μ > 0 of `μ ↦ H_μ(−v/√2)`, with the scan window used.
///
/// Orders below zero are never roots: `H_μ` is a positive integral there.
pub fn boundary_roots(v: f64, count: usize) -> Result<(Vec<f64>, f64)> {
    let z0 = boundary_arg(v);
    let mut roots = Vec::with_capacity(count);
    let mut window = INITIAL_WINDOW;
    let mut mu = 0.0;
    let mut f_prev = hermite(mu, z0)?;
    while roots.len() < count {
        if mu >= window {
            if window >= MAX_WINDOW {
                return Err(Error::EigenBracket {
                    wanted: count,
                    found: roots.len(),
                    window,
                });
            }
            window *= 2.0;
        }
        let next = mu + SCAN_STEP;
        let f_next = hermite(next, z0)?;
        if f_next == 0.0 {
            roots.push(next);
        } else if (f_next > 0.0) != (f_prev > 0.0) && f_prev != 0.0 {
            roots.push(bisect_order(mu, next, z0)?);
        }
        mu = next;
        f_prev = f_next;
    }
    Ok((roots, window))
}

/// The `n` smallest eigenvalues λ̃ = λ/σ² for the given (u, v).
pub fn solve_eigenvalues(u: f64, v: f64, n: usize) -> Result<Vec<f64>> {
    check_uv(u, v)?;
    if n == 0 {
        return Err(Error::InvalidParameter(
            "truncation level must be >= 1".into(),
        ));
    }
    let (roots, _) = boundary_roots(v, n)?;
    Ok(roots
        .iter()
        .map(|mu| order_to_lambda(u, v, mu + 1.0))
        .collect())
}

fn order_to_lambda(u: f64, v: f64, order: f64) -> f64 {
    order * v * v / (2.0 * u * u)
}

fn check_uv(u: f64, v: f64) -> Result<()> {
    if !(u > 0.0 && v > 0.0 && u.is_finite() && v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "u and v must be positive, got ({u}, {v})"
        )));
    }
    Ok(())
}

fn check_positive(name: &str, val: f64) -> Result<()> {
    if !(val > 0.0 && val.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "{name} must be positive, got {val}"
        )));
    }
    Ok(())
}

impl SpectralBasis {
    /// Solves the eigenproblem, fixes the normalization and sign of each
    /// eigenfunction (φ_i(0) > 0) and tabulates the σ-free moment factors.
    pub fn new(u: f64, v: f64, n: usize) -> Result<Self> {
        check_uv(u, v)?;
        if n == 0 {
            return Err(Error::InvalidParameter(
                "truncation level must be >= 1".into(),
            ));
        }
        let z0 = boundary_arg(v);
        let (roots, window) = boundary_roots(v, n)?;
        let prefactor = (v / (SQRT_2 * u)).powf(1.5) * (0.25 * v * v).exp();

        let mut lambdas_tilde = Vec::with_capacity(n);
        let mut orders = Vec::with_capacity(n);
        let mut norm_constants = Vec::with_capacity(n);
        let mut deltas = Vec::with_capacity(n);
        let mut residuals = Vec::with_capacity(n);
        for &mu in &roots {
            let order = mu + 1.0;
            let lambda = order_to_lambda(u, v, order);
            let delta = hermite_dnu(mu, z0)?;
            let h_boundary = hermite(order, z0)?;
            let denom = 2.0 * lambda * delta * h_boundary;
            if !(denom.abs() > 0.0 && denom.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "degenerate normalization at order {order}"
                )));
            }
            let norm = prefactor / denom.abs().sqrt() * h_boundary.signum();
            lambdas_tilde.push(lambda);
            orders.push(order);
            norm_constants.push(norm);
            deltas.push(delta);
            residuals.push(scaled_residual(mu, z0)?);
        }
        if let Some((i, r)) = residuals
            .iter()
            .enumerate()
            .find(|(_, r)| !(**r < RESIDUAL_LIMIT))
        {
            return Err(Error::InvalidParameter(format!(
                "eigenvalue {} has scaled residual {r:e}",
                i + 1
            )));
        }

        let mut basis = Self {
            u,
            v,
            lambdas_tilde,
            orders,
            norm_constants,
            deltas,
            a_scaled: Vec::new(),
            b_scaled: Vec::new(),
            residuals,
            window,
        };
        let (a, b) = basis.moment_factors()?;
        basis.a_scaled = a;
        basis.b_scaled = b;
        Ok(basis)
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    /// Truncation level N.
    pub fn len(&self) -> usize {
        self.lambdas_tilde.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas_tilde.is_empty()
    }

    pub fn lambdas_tilde(&self) -> &[f64] {
        &self.lambdas_tilde
    }

    pub fn orders(&self) -> &[f64] {
        &self.orders
    }

    pub fn norm_constants(&self) -> &[f64] {
        &self.norm_constants
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    /// Scaled residuals of the eigenvalue roots.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// Upper end of the order window the scan had to open.
    pub fn scan_window(&self) -> f64 {
        self.window
    }

    /// σ-free products A_i B_i.
    pub fn moment_products(&self) -> Vec<f64> {
        self.a_scaled
            .iter()
            .zip(&self.b_scaled)
            .map(|(a, b)| a * b)
            .collect()
    }

    /// A_i = ∫ x π(x) φ_i(x) dx at the given σ.
    pub fn moment_a(&self, i: usize, sigma: f64) -> Result<f64> {
        self.check_index(i)?;
        Ok(self.a_scaled[i - 1] * sigma)
    }

    /// B_i = ∫ y m(y) φ_i(y) dy at the given σ.
    pub fn moment_b(&self, i: usize, sigma: f64) -> Result<f64> {
        self.check_index(i)?;
        Ok(self.b_scaled[i - 1] / sigma)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            });
        }
        Ok(())
    }

    fn state_arg(&self, x: f64) -> f64 {
        (self.v * x / self.u - self.v) / SQRT_2
    }

    /// φ_i(x)/σ without argument checks; `i` is zero-based.
    fn unit_eigenfunction(&self, i: usize, x: f64) -> Result<f64> {
        Ok(self.norm_constants[i] * hermite(self.orders[i], self.state_arg(x))?)
    }

    /// Normalized eigenfunction φ_i(x) at volatility σ, `i` in 1..=N.
    pub fn eigenfunction(&self, i: usize, sigma: f64, x: f64) -> Result<f64> {
        self.check_index(i)?;
        check_positive("sigma", sigma)?;
        if x < 0.0 || x.is_nan() {
            return Err(Error::Domain(x));
        }
        Ok(sigma * self.unit_eigenfunction(i - 1, x)?)
    }

    /// Truncated transition density p_{N,h}(x, y). It can dip slightly below
    /// zero far in the tails because of the truncation.
    pub fn transition_density(&self, sigma: f64, h: f64, x: f64, y: f64) -> Result<f64> {
        check_positive("sigma", sigma)?;
        check_positive("h", h)?;
        for s in [x, y] {
            if s < 0.0 || s.is_nan() {
                return Err(Error::Domain(s));
            }
        }
        // m(y) φ_i(x) φ_i(y) = (m(y) σ²) (φ_i(x)/σ) (φ_i(y)/σ)
        let speed = model::speed_unchecked(self.u, self.v, 1.0, y);
        let mut sum = 0.0;
        for i in 0..self.len() {
            let weight = (-self.lambdas_tilde[i] * sigma * sigma * h).exp();
            if weight == 0.0 {
                continue;
            }
            sum += weight * self.unit_eigenfunction(i, x)? * self.unit_eigenfunction(i, y)?;
        }
        Ok(density_unchecked(self.u, self.v, y) + speed * sum)
    }

    /// E[X̃_0 X̃_h] under the truncated kernel:
    /// `g1² + Σ exp(−λ̃_i σ² h) A_i B_i`.
    pub fn g3(&self, sigma: f64, h: f64) -> f64 {
        let m = g1(self.u, self.v);
        let s2h = sigma * sigma * h;
        let tail: f64 = self
            .lambdas_tilde
            .iter()
            .zip(self.a_scaled.iter().zip(&self.b_scaled))
            .map(|(l, (a, b))| (-l * s2h).exp() * a * b)
            .sum();
        m * m + tail
    }

    /// ∂g3/∂(σ²) = −h Σ λ̃_i exp(−λ̃_i σ² h) A_i B_i.
    pub fn dg3_dsigma2(&self, sigma: f64, h: f64) -> f64 {
        let s2h = sigma * sigma * h;
        let sum: f64 = self
            .lambdas_tilde
            .iter()
            .zip(self.a_scaled.iter().zip(&self.b_scaled))
            .map(|(l, (a, b))| l * (-l * s2h).exp() * a * b)
            .sum();
        -h * sum
    }

    /// Magnitude of the last retained term, exp(−λ̃_N σ² h)|A_N B_N|.
    pub fn truncation_diagnostic(&self, sigma: f64, h: f64) -> f64 {
        match self.len() {
            0 => 0.0,
            n => {
                let l = self.lambdas_tilde[n - 1];
                (-l * sigma * sigma * h).exp() * (self.a_scaled[n - 1] * self.b_scaled[n - 1]).abs()
            }
        }
    }

    /// A_i/σ and B_i·σ by panel-doubling Gauss–Legendre on [0, u + 12u/v].
    fn moment_factors(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let upper = model::density_support(self.u, self.v, MOMENT_SCALES);
        let rule = GaussLegendre::standard();
        let n = self.len();
        let mut panels = MIN_PANELS;
        let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
        let mut last_diff = f64::INFINITY;
        while panels <= MAX_PANELS {
            let (xs, ws) = rule.composite(0.0, upper, panels);
            let mut a = vec![0.0; n];
            let mut b = vec![0.0; n];
            for (&x, &w) in xs.iter().zip(&ws) {
                let pi = density_unchecked(self.u, self.v, x);
                let m = model::speed_unchecked(self.u, self.v, 1.0, x);
                for i in 0..n {
                    let phi = self.unit_eigenfunction(i, x)?;
                    a[i] += w * x * pi * phi;
                    b[i] += w * x * m * phi;
                }
            }
            if let Some((pa, pb)) = &prev {
                last_diff = a
                    .iter()
                    .zip(pa)
                    .chain(b.iter().zip(pb))
                    .map(|(new, old)| (new - old).abs() / new.abs().max(1.0))
                    .fold(0.0, f64::max);
                if last_diff < MOMENT_TOL {
                    return Ok((a, b));
                }
            }
            prev = Some((a, b));
            panels *= 2;
        }
        Err(Error::QuadratureNonConvergence {
            a: 0.0,
            b: upper,
            diff: last_diff,
        })
    }
}

fn check_basis(basis: &SpectralBasis, u: f64, v: f64) -> Result<()> {
    if basis.u != u || basis.v != v {
        return Err(Error::InvalidParameter(format!(
            "basis built for (u, v) = ({}, {}), evaluated at ({u}, {v})",
            basis.u, basis.v
        )));
    }
    Ok(())
}

/// E[X̃_0 X̃_h] for the truncated kernel; `basis` must be built for (u, v).
pub fn g3(u: f64, v: f64, sigma: f64, h: f64, basis: &SpectralBasis) -> Result<f64> {
    check_basis(basis, u, v)?;
    check_positive("sigma", sigma)?;
    check_positive("h", h)?;
    Ok(basis.g3(sigma, h))
}

/// ∂g3/∂(σ²); `basis` must be built for (u, v).
pub fn dg3_dsigma2(u: f64, v: f64, sigma: f64, h: f64, basis: &SpectralBasis) -> Result<f64> {
    check_basis(basis, u, v)?;
    check_positive("sigma", sigma)?;
    check_positive("h", h)?;
    Ok(basis.dg3_dsigma2(sigma, h))
}
