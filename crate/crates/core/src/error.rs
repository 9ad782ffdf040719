use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("overdamped oscillator (Q_m^-1 = {inv_q}): damped frequency undefined for Q_m^-1 >= 2")]
    Overdamped { inv_q: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("integration diverged at tau = {tau}: |c{index}| = {magnitude:e} exceeds 1e12")]
    Divergence {
        tau: f64,
        index: usize,
        magnitude: f64,
    },

    #[error("coefficient c{index} acquired imaginary part {imag:e} at tau = {tau}")]
    ComplexWidth { tau: f64, index: usize, imag: f64 },

    #[error("response function {name} is not real at tau = {tau}: imaginary residue {imag:e}")]
    NonRealResponse {
        name: &'static str,
        tau: f64,
        imag: f64,
    },

    #[error("quadrature not converged at tau = {tau}: order doubling changed -ln(nu) by {relative:e} (relative)")]
    QuadratureNotConverged { tau: f64, relative: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Process exit status for this error: 2 for configuration problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. } | Error::Overdamped { .. } | Error::Config(_) => 2,
            Error::Divergence { .. }
            | Error::ComplexWidth { .. }
            | Error::NonRealResponse { .. }
            | Error::QuadratureNotConverged { .. } => 3,
            Error::Io(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
