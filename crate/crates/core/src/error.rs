use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("mollification scale {eps} must satisfy 0 < eps < L/4 = {limit}")]
    MollifierScale { eps: f64, limit: f64 },

    #[error("negative-order homogeneous norm is undefined for a field with nonzero mean mode ({mean:e})")]
    NonZeroMean { mean: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("field is not spectrally resolved: {fraction:e} of its energy sits in the top third of the spectrum")]
    Unresolved { fraction: f64 },

    #[error("time step {dt} violates the CFL limit; admissible dt <= {admissible}")]
    Cfl { dt: f64, admissible: f64 },

    #[error("non-finite value detected at t = {time}")]
    NonFinite { time: f64 },

    #[error("not enough samples in fit window: {got} < {need}")]
    DegenerateWindow { got: usize, need: usize },

    #[error("bad snapshot: {0}")]
    Snapshot(String),

    #[error("configuration rejected:\n{0}")]
    Config(crate::config::ConfigErrors),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
