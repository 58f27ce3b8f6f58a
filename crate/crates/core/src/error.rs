use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("shape mismatch: {0}")]
    InvalidShape(String),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    ConvergenceFailure { sweeps: usize, off_norm: f64 },

    #[error("reference set is empty")]
    EmptyReferenceSet,

    #[error("centered reference kernel has no eigenvalue above {tol:e}")]
    DegenerateReferenceSet { tol: f64 },

    #[error("reference case 5 needs non-target training samples")]
    MissingNegatives,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("C = {c} is infeasible for N = {n} (need C >= 1/N)")]
    InfeasibleC { c: f64, n: usize },

    #[error("nu = {nu} is infeasible for N = {n} (need nu in (0, 1] and nu * N >= 1)")]
    InfeasibleNu { nu: f64, n: usize },

    #[error("kernel matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    InvalidKernel { min_eigenvalue: f64 },

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("format error at line {line}: {message}")]
    FormatError { line: u64, message: String },

    #[error("no feasible hyperparameter in the grid")]
    NoFeasibleHyperparams,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
