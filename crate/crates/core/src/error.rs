use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Doppler singularity: detuning ω − k·v0 = {detuning:e}")]
    DopplerSingularity { detuning: f64 },

    #[error("quadrature failed for {integrand} at s = {s}: error estimate {error:e} above tolerance")]
    QuadratureFailure {
        integrand: &'static str,
        s: f64,
        error: f64,
    },

    #[error("Fock truncation N = {truncation} too small, use N >= {suggested}")]
    TruncationTooSmall { truncation: usize, suggested: usize },

    #[error("negative eigenvalue {0:e} in a density matrix")]
    NumericalIndefiniteness(f64),

    #[error("degenerate polarization frame: Gram determinant {0:e}")]
    DegenerateFrame(f64),

    #[error("operator dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
