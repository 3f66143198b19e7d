use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent or physically invalid configuration.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite state during integration at t = {time} s")]
    NonFinite { time: f64 },

    #[error("unsupported damping regime (damping ratio {zeta}); only underdamped motion is implemented")]
    UnsupportedRegime { zeta: f64 },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("at altitude {altitude} m: {source}")]
    AtAltitude {
        altitude: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures raised by the numerics rather than by the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NonFinite { .. } => true,
            Error::AtAltitude { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn at_altitude(self, altitude: f64) -> Self {
        Error::AtAltitude {
            altitude,
            source: Box::new(self),
        }
    }
}
