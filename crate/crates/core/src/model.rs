//! Model parameterizations, the stationary law and its first two moments.
//!
//! The working coordinates are `u = θ` and `v = √(2κ)θ/σ`. In them the
//! invariant density is a normal density with mean `u` and standard deviation
//! `u/v`, truncated to `[0, ∞)`; it does not depend on σ at all, which is why
//! the first two moments alone cannot identify all three parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::specfun::{normal_cdf, normal_pdf};

/// Model parameters of `dX = κ(θ − X)dt + σ dW + dL`, reflected at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ROUParams {
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
}

impl ROUParams {
    pub fn new(kappa: f64, theta: f64, sigma: f64) -> Result<Self> {
        let p = Self {
            kappa,
            theta,
            sigma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, val) in [
            ("kappa", self.kappa),
            ("theta", self.theta),
            ("sigma", self.sigma),
        ] {
            if !(val > 0.0 && val.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {val}"
                )));
            }
        }
        Ok(())
    }

    pub fn to_uv(&self) -> ReparamUV {
        to_uv(self)
    }
}

/// The (u, v, σ) coordinates used by the moment equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReparamUV {
    pub u: f64,
    pub v: f64,
    pub sigma: f64,
}

impl ReparamUV {
    pub fn new(u: f64, v: f64, sigma: f64) -> Result<Self> {
        for (name, val) in [("u", u), ("v", v), ("sigma", sigma)] {
            if !(val > 0.0 && val.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {val}"
                )));
            }
        }
        Ok(Self { u, v, sigma })
    }

    pub fn to_params(&self) -> ROUParams {
        from_uv(self)
    }

    /// Stationary standard deviation scale `u/v = σ/√(2κ)`.
    pub fn scale(&self) -> f64 {
        self.u / self.v
    }
}

pub fn to_uv(p: &ROUParams) -> ReparamUV {
    ReparamUV {
        u: p.theta,
        v: (2.0 * p.kappa).sqrt() * p.theta / p.sigma,
        sigma: p.sigma,
    }
}

/// The recovery map η: θ = u, κ = v²σ²/(2u²).
pub fn from_uv(q: &ReparamUV) -> ROUParams {
    ROUParams {
        kappa: q.v * q.v * q.sigma * q.sigma / (2.0 * q.u * q.u),
        theta: q.u,
        sigma: q.sigma,
    }
}

/// Jacobian of η. Rows are (θ, κ, σ), columns are (u, v, σ).
pub fn eta_jacobian(q: &ReparamUV) -> [[f64; 3]; 3] {
    let ReparamUV { u, v, sigma } = *q;
    let s2 = sigma * sigma;
    [
        [1.0, 0.0, 0.0],
        [
            -v * v * s2 / (u * u * u),
            v * s2 / (u * u),
            v * v * sigma / (u * u),
        ],
        [0.0, 0.0, 1.0],
    ]
}

fn check_state(x: f64) -> Result<()> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::Domain(x));
    }
    Ok(())
}

/// Inverse Mills ratio φ(v)/(1 − Φ(−v)) = φ(v)/Φ(v).
///
/// Φ(v) comes from the complementary error function, so there is no
/// cancellation in 1 − Φ(−v) for large v.
pub fn hazard(v: f64) -> f64 {
    normal_pdf(v) / normal_cdf(v)
}

/// Invariant density π(x) = (v/u) φ(v x/u − v) / (1 − Φ(−v)).
pub fn invariant_density(q: &ReparamUV, x: f64) -> Result<f64> {
    check_state(x)?;
    Ok(density_unchecked(q.u, q.v, x))
}

pub(crate) fn density_unchecked(u: f64, v: f64, x: f64) -> f64 {
    let a = v / u;
    a * normal_pdf(a * x - v) / normal_cdf(v)
}

/// Speed measure m(x) = (2/σ²) exp(−v²/2 + v²x/u − v²x²/(2u²)).
pub fn speed_measure(q: &ReparamUV, x: f64) -> Result<f64> {
    check_state(x)?;
    Ok(speed_unchecked(q.u, q.v, q.sigma, x))
}

pub(crate) fn speed_unchecked(u: f64, v: f64, sigma: f64, x: f64) -> f64 {
    let z = v * x / u - v;
    2.0 / (sigma * sigma) * (-0.5 * z * z).exp()
}

/// Stationary mean E[X∞] in (u, v) coordinates.
pub fn g1(u: f64, v: f64) -> f64 {
    u + u / v * hazard(v)
}

/// Stationary second moment E[X∞²] in (u, v) coordinates.
pub fn g2(u: f64, v: f64) -> f64 {
    let uu = u * u;
    uu / (v * v) + uu + uu / v * hazard(v)
}

/// Analytic Jacobian [[∂g1/∂u, ∂g1/∂v], [∂g2/∂u, ∂g2/∂v]].
pub fn g12_jacobian(u: f64, v: f64) -> [[f64; 2]; 2] {
    let r = hazard(v);
    // d/dv [φ(v)/Φ(v)] = −r (v + r)
    let dr = -r * (v + r);
    let dg1_du = 1.0 + r / v;
    let dg1_dv = u * (dr / v - r / (v * v));
    let dg2_du = 2.0 * u * (1.0 / (v * v) + 1.0 + r / v);
    let dg2_dv = u * u * (-2.0 / (v * v * v) + dr / v - r / (v * v));
    [[dg1_du, dg1_dv], [dg2_du, dg2_dv]]
}

/// Upper end of the quadrature window for integrals against π, ten stationary
/// scales above the mode.
pub fn density_support(u: f64, v: f64, scales: f64) -> f64 {
    u + scales * u / v
}

/// ∫_0^∞ f(x) π(x) dx by panel-doubling Gauss–Legendre on [0, u + 10u/v].
pub fn stationary_expectation<F: Fn(f64) -> f64>(u: f64, v: f64, f: F) -> Result<f64> {
    let upper = density_support(u, v, 10.0);
    quadrature::integrate(|x| f(x) * density_unchecked(u, v, x), 0.0, upper, 1e-10)
}
