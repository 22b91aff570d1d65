use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("periodic boundary needs every extent >= 3, axis {axis} has extent {extent}")]
    PeriodicTooSmall { axis: usize, extent: usize },

    #[error("a periodic lattice has no boundary sites")]
    NoBoundary,

    #[error("site {site} is out of range for a lattice of {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("site {site} is frozen by the boundary condition")]
    FrozenSite { site: usize },

    #[error("state {state} is not a valid {model} state")]
    InvalidState { state: i8, model: String },

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("zero temperature is only supported by the exact engine")]
    ZeroTemperature,

    #[error("enumeration needs {required} configurations, the cap is {cap}")]
    EnumerationCap { required: u128, cap: u128 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
