use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum KacError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("order {order} is not supported (maximum {max})")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("inconsistent moments: {0}")]
    InconsistentMoments(String),

    #[error("argument {xi} lies outside the window [-{y0}, {y0}]")]
    OutOfWindow { xi: f64, y0: f64 },

    #[error("perturbation amplitude {epsilon} makes the density negative (max admissible |epsilon| = {max})")]
    Amplitude { epsilon: f64, max: f64 },

    #[error("|xi| = {xi} exceeds the grid half-width {xi_max}")]
    OutOfRange { xi: f64, xi_max: f64 },

    #[error("Wild series needs {needed} terms for tol {tol:e}; the cap of {cap} only reaches {achievable:e}")]
    Truncation {
        needed: usize,
        cap: usize,
        tol: f64,
        achievable: f64,
    },

    #[error("instability at t = {t}: |phi| reached {modulus}")]
    Instability { t: f64, modulus: f64 },

    #[error("characteristic function is {edge:e} at the grid edge; the density would be aliased")]
    Aliasing { edge: f64 },

    #[error("mass defect {defect:e} exceeds 1e-3; distance is unreliable")]
    UnreliableDistance { defect: f64 },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("fit refused: {0}")]
    Fit(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl KacError {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            KacError::Resource(_) | KacError::Truncation { .. } | KacError::Io(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, KacError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(KacError::Domain(msg.into()))
}
