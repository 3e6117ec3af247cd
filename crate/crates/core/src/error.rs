use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice must have at least one site")]
    EmptyLattice,
    #[error("site index {index} out of range for lattice of {num_sites} sites")]
    SiteOutOfRange { index: usize, num_sites: usize },
    #[error("invalid edge ({0}, {1})")]
    InvalidEdge(usize, usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("the state |0,+> is unphysical")]
    UnphysicalState,
    #[error("Hilbert space dimension exceeds the budget of {budget} states")]
    DimensionBudget { budget: usize },
    #[error("operator kind {0} requires an ancilla-enabled site space")]
    AncillaRequired(&'static str),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("time grid must be ascending and start at zero")]
    InvalidTimeGrid,
    #[error("trajectory covers [0, {covered}] but averaging needs [0, {needed}]")]
    TrajectoryTooShort { covered: f64, needed: f64 },
    #[error("integrator step size underflow at t = {last_good_time}")]
    StepSizeFailure { last_good_time: f64 },
    #[error("unknown population label `{0}`")]
    UnknownLabel(String),
    #[error("trajectory does not carry {0}")]
    MissingData(&'static str),
    #[error("preparation fidelity {fidelity:.4} below floor {floor:.4}")]
    LowFidelity { fidelity: f64, floor: f64 },
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
