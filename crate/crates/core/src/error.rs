use thiserror::Error;

/// Errors raised by the spectral substrate, the solvers and the verifiers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("lattice mismatch: N={left} vs N={right}")]
    LatticeMismatch { left: usize, right: usize },

    #[error(
        "solver did not converge after {iterations} iterations \
         (last relative residual {residual:.3e}, target {target:.3e})"
    )]
    NonConvergence {
        iterations: usize,
        residual: f64,
        target: f64,
    },

    #[error(
        "iteration diverging at step {step}: increment grew for 3 consecutive steps \
         (last ratio {ratio:.3}); {hint}"
    )]
    Divergence {
        step: usize,
        ratio: f64,
        hint: &'static str,
    },

    #[error("split wavenumber {kappa_bar:.3} exceeds kappa_max/3 = {limit:.3}; the BHT window is empty at this resolution")]
    EmptyWindow { kappa_bar: f64, limit: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("realization {index} (seed {seed}) failed: {source}")]
    Realization {
        index: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown field tag `{0}`")]
    UnknownField(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
