use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown point id {0}")]
    UnknownPoint(usize),

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("invalid relation: {0}")]
    InvalidRelation(String),

    #[error("invalid self-map: {0}")]
    InvalidMap(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid simulation function: {0}")]
    InvalidZeta(String),

    #[error("simulation function arguments must be nonnegative, got ({t}, {s})")]
    ZetaDomain { t: f64, s: f64 },

    #[error("simulation table has no entry at ({t}, {s})")]
    ZetaUndefined { t: f64, s: f64 },

    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("start point {value} is not admissible: ({value}, F({value})) is not related")]
    StartNotAdmissible { id: usize, value: f64 },

    #[error("orbit left the relation at step {step}: ({from}, {to}) is not related")]
    OrbitLeftRelation { step: usize, from: f64, to: f64 },

    #[error("solver result {value} is not a fixed point (residual {residual})")]
    NotAFixedPoint { value: f64, residual: f64 },

    #[error("no admissible start point: the set of points related to their image is empty")]
    NoAdmissibleStart,

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit status for this error: 2 for input problems, 1 for
    /// failures discovered while solving a well-formed problem.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::StartNotAdmissible { .. }
            | Error::OrbitLeftRelation { .. }
            | Error::NotAFixedPoint { .. }
            | Error::NoAdmissibleStart => 1,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
