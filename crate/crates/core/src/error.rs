use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("register mismatch: {0}")]
    RegisterMismatch(String),

    #[error("photon number mismatch: expected {expected}, found {found}")]
    PhotonNumber { expected: u32, found: u32 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The all-vacuum pattern carries no information about the retained modes.
    #[error("uninformative herald: the vacuum pattern does not condition the retained modes")]
    UninformativeHerald,

    #[error("herald outcome has zero probability; the conditional state is undefined")]
    ZeroProbability,

    #[error("target fidelity {target} exceeds the attainable maximum {max_achievable}")]
    FidelityCeiling { target: f64, max_achievable: f64 },

    #[error("Fock cutoff exceeded: {requested} photons requested, cutoff is {cutoff}")]
    CutoffExceeded { requested: u32, cutoff: u32 },

    #[error("non-physical state: {0}")]
    NonPhysical(String),
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
