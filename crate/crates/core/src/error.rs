use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure while evaluating a compiled field expression.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("overflow: non-finite value produced by `{0}`")]
    Overflow(&'static str),
    #[error("domain error in `{0}`")]
    Domain(&'static str),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown identifier `{name}` at line {line}, column {column}")]
    UnknownIdentifier {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("arity mismatch: expected {expected} components, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),

    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("config error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("singular linear system (pivot {0:e})")]
    Singular(f64),
    #[error("matrix exponential overflow (norm {0:e})")]
    Overflow(f64),
    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },
    #[error("{what}: routes disagree by {gap:e}")]
    Disagreement { what: &'static str, gap: f64 },

    #[error("{count} of {total} trajectories blew up")]
    BlowUp { count: usize, total: usize },
    #[error("epsilon {epsilon} is not below eps_star {eps_star}; pass the override to run anyway")]
    EpsilonTooLarge { epsilon: f64, eps_star: f64 },
    #[error("gibbs grid too narrow: boundary mass fraction {0:e}")]
    GridTooNarrow(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Numerical failures (as opposed to bad input) map to their own exit code in the CLI.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Eval(_)
                | Error::Singular(_)
                | Error::Overflow(_)
                | Error::NonConvergence { .. }
                | Error::Disagreement { .. }
                | Error::BlowUp { .. }
                | Error::NotPsd(_)
                | Error::NotSymmetric(_)
        )
    }
}
