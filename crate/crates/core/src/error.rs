use thiserror::Error;

/// Errors raised anywhere in the estimation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma function pole at x = {0}")]
    GammaPole(f64),

    #[error("Kummer series parameter b = {0} is a non-positive integer")]
    KummerPole(f64),

    #[error("|z| = {z} exceeds the Kummer series domain limit {limit}")]
    KummerDomain { z: f64, limit: f64 },

    #[error("series did not converge within {terms} terms (last partial sum {partial})")]
    SeriesNonConvergence { terms: usize, partial: f64 },

    #[error("quadrature on [{a}, {b}] did not converge (last difference {diff:e})")]
    QuadratureNonConvergence { a: f64, b: f64, diff: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("x = {0} lies outside the state space [0, inf)")]
    Domain(f64),

    #[error(
        "could not bracket {wanted} eigenvalues: found {found} with order window [0, {window}]"
    )]
    EigenBracket {
        wanted: usize,
        found: usize,
        window: f64,
    },

    #[error("eigenfunction index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("path has {0} observations, at least 2 are required")]
    PathTooShort(usize),

    #[error("infeasible moments: m1 = {m1}, m2 = {m2} (need m1 > 0 and m2 > m1^2)")]
    InfeasibleMoments { m1: f64, m2: f64 },

    #[error("Newton iteration failed after {iterations} iterations at (u, v) = ({u}, {v}), residual {residual:e}")]
    NewtonNonConvergence {
        iterations: usize,
        u: f64,
        v: f64,
        residual: f64,
    },

    #[error("m3 = {m3} not attainable on sigma in [{lo}, {hi}]: g3 ranges over [{g_hi}, {g_lo}]")]
    NoSignChange {
        m3: f64,
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },

    #[error("g3 is not monotone on [{lo}, {hi}]: dg3/dsigma^2 = {deriv} at sigma = {at}")]
    NotMonotone {
        lo: f64,
        hi: f64,
        at: f64,
        deriv: f64,
    },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Name of the estimation stage that failed, if the error was tagged with one.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
