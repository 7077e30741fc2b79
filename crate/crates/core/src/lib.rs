//! Generalized-moment estimation of all three parameters of a reflected
//! Ornstein–Uhlenbeck process sampled at a fixed step `h`.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`]: Gamma, Kummer's M, the normal law, real-order Hermite functions;
//! * [`model`]: parameterizations, invariant density, speed measure, g1 and g2;
//! * [`spectral`]: eigenvalues, eigenfunctions, the truncated transition density and g3;
//! * [`simulate`]: reflected Euler paths and stationary draws;
//! * [`estimate`]: sample moments, the staged solver and the Monte Carlo covariance.

pub mod error;
pub mod estimate;
pub mod model;
pub mod quadrature;
pub mod simulate;
pub mod specfun;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use estimate::{
    estimate_all, estimate_values, mc_covariance, moment_stats, sigma_c, solve_sigma,
    solve_sigma_uv, solve_uv, EstimateConfig, EstimationResult, McConfig, McCovariance,
    MomentStats, SigmaDomain,
};
pub use model::{from_uv, to_uv, ROUParams, ReparamUV};
pub use simulate::{simulate_pairs, simulate_path, InitialState, Path, SimConfig};
pub use spectral::SpectralBasis;
