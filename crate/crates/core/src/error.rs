use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the library.
///
/// Numerical failures are always explicit: a non-converged eigenvalue
/// iteration or an exhausted sampler budget is reported as an error, never
/// papered over with partial output.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has non-finite entry {value} at ({row},{col})")]
    NonFiniteEntry { row: usize, col: usize, value: f64 },

    #[error("matrix order must be positive")]
    EmptyMatrix,

    #[error("eigenvalue iteration did not converge for a {order}x{order} matrix")]
    EigenNonConvergence { order: usize },

    #[error(
        "spectrum of a real matrix is not conjugate-symmetric: \
         eigenvalue {re}+{im}i has no partner within tolerance"
    )]
    ConjugateAsymmetry { re: f64, im: f64 },

    #[error("{what}: expected length {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("unknown model name '{0}'")]
    UnknownModel(String),

    #[error("model '{model}' has no branch named '{branch}'")]
    UnknownBranch { model: String, branch: String },

    #[error("branch '{branch}' of model '{model}' does not exist here: {reason}")]
    BranchAbsent {
        model: String,
        branch: String,
        reason: String,
    },

    #[error("closed-form equilibria are limited to family sizes n <= {limit}; '{model}' needs the numeric method")]
    ClosedFormUnavailable { model: String, limit: usize },

    #[error("numeric equilibrium search is only defined for the SEIR family, not '{model}'")]
    NumericUnavailable { model: String },

    #[error("no endemic root found for model '{model}' after {restarts} Newton restarts")]
    NoEndemicRoot { model: String, restarts: usize },

    #[error(
        "sampler exceeded {max_rejections} rejections before accepting {wanted} draws \
         (model '{model}', branch '{branch}'); the ranges may admit no feasible equilibria"
    )]
    TooManyRejections {
        model: String,
        branch: String,
        wanted: usize,
        max_rejections: u64,
    },

    #[error("ensemble is empty")]
    EmptyEnsemble,

    #[error("{what} needs at least {need} samples, got {got}")]
    NotEnoughSamples {
        what: &'static str,
        need: usize,
        got: usize,
    },

    #[error("unknown ensemble kind '{0}'")]
    UnknownEnsembleKind(String),

    #[error("cell ({row},{col}): {source}")]
    Cell {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("draw {draw}: {source}")]
    Draw {
        draw: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(
        "moment combination is infeasible: kurtosis {kurtosis} is below the \
         bound skewness^2 + 1 = {bound}"
    )]
    InfeasibleMoments { kurtosis: f64, bound: f64 },

    #[error("standard deviation must be non-negative and finite, got {0}")]
    InvalidScale(f64),

    #[error("parameter range [{lo}, {hi}] is invalid for '{name}'")]
    InvalidRange { name: String, lo: f64, hi: f64 },

    #[error("covariance matrix is not symmetric positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Wrap an error with the matrix cell it occurred at.
    pub fn at_cell(self, row: usize, col: usize) -> Error {
        Error::Cell {
            row,
            col,
            source: Box::new(self),
        }
    }

    /// Wrap an error with the ensemble draw it occurred at.
    pub fn at_draw(self, draw: usize) -> Error {
        Error::Draw {
            draw,
            source: Box::new(self),
        }
    }
}
