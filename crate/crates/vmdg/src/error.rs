use thiserror::Error;

/// Errors surfaced by mesh construction, operator application, and runs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid axis partition: lo={lo}, hi={hi}, n_cells={n_cells}")]
    InvalidAxis { lo: f64, hi: f64, n_cells: usize },

    #[error("unsupported dimensions d_x={d_x}, d_v={d_v}; this solver handles d_x=1, d_v in {{1,2}}")]
    UnsupportedDims { d_x: usize, d_v: usize },

    #[error("axis {axis} must be {expected} but is {found}")]
    WrongBoundaryKind {
        axis: usize,
        expected: &'static str,
        found: &'static str,
    },

    #[error("basis dimension {0} not supported (need 1..=3)")]
    BadBasisDim(usize),

    #[error("field meshes are incompatible: {0}")]
    MeshMismatch(&'static str),

    #[error("flux kind {flux} requires tangential components but active set is {active}")]
    FluxMaskIncompatible { flux: &'static str, active: String },

    #[error("non-finite state detected at step {step} (t = {time})")]
    NonFinite { step: usize, time: f64 },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
