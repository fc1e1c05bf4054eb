use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LqdError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("pair (A, B) is not controllable: Kalman rank {rank} < {n}")]
    NotControllable { rank: usize, n: usize },

    #[error("B is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPositiveSemidefinite { min_eig: f64 },

    #[error("conjugate time {t} lies in the requested interval")]
    ConjugatePoint { t: f64 },

    #[error("closed form has a pole (denominator {denominator:e})")]
    Pole { denominator: f64 },

    #[error("imaginary residue {residue:e} exceeds tolerance")]
    ImaginaryResidue { residue: f64 },

    #[error("determinant touches zero near t = {t} without a resolvable sign change")]
    AmbiguousRoot { t: f64 },

    #[error("N(t) is numerically singular at t = {t}")]
    SingularN { t: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
}

pub type Result<T> = std::result::Result<T, LqdError>;
