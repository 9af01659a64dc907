use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("degenerate state: (phi, phi') = (0, 0) has no Prüfer angle")]
    DegenerateState,

    #[error("modified Prüfer representation invalid at xi = {xi}: V = {v} >= 1")]
    RepresentationInvalid { xi: f64, v: f64 },

    #[error("step size collapsed to {step:e} at t = {at}")]
    Stiffness { at: f64, step: f64 },

    #[error("non-finite state at t = {at}")]
    NonFinite { at: f64 },

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("incompatible inputs: {0}")]
    Incompatible(String),

    #[error("fit failed: {0}")]
    FitFailure(String),

    #[error("insufficient block range: need at least {needed} blocks, got {got}")]
    InsufficientRange { needed: usize, got: usize },

    #[error("no distinguished direction: logR spread {spread:.4} across the scan")]
    NoDistinguishedDirection { spread: f64 },

    #[error("realization {realization}: {source}")]
    Realization {
        realization: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn in_realization(self, realization: u64) -> Self {
        Error::Realization { realization, source: Box::new(self) }
    }
}
