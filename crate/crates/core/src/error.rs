use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("density profile leaves [0, 1]: value {value} at ({u1}, {u2})")]
    ProfileOutOfRange { value: f64, u1: f64, u2: f64 },

    #[error("the gradient/circulation split is only defined without an external field")]
    FieldNotSupported,

    #[error("time {0} is not a recorded snapshot time")]
    SnapshotNotRecorded(f64),

    #[error("trajectory has no event log; rerun with event recording enabled")]
    EventLogMissing,

    #[error("Poisson solve did not converge: residual {residual:e}")]
    SolverResidual { residual: f64 },

    #[error("time step {dt:e} violates the drift stability bound {limit:e}")]
    StepRejected { dt: f64, limit: f64 },

    #[error("Sobolev order k = {0} must exceed 2")]
    SobolevOrder(f64),

    #[error("malformed input at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
