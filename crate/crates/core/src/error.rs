use alloc::string::String;

use crate::algebra::AlgebraKind;
use crate::isometry::IsometryClass;
use crate::sl2::{Sl2Class, Word};

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("algebra kind mismatch: {left} vs {right}")]
    KindMismatch { left: AlgebraKind, right: AlgebraKind },

    #[error("kind {kind} takes {expected} coefficients, got {got}")]
    CoefficientCount {
        kind: AlgebraKind,
        expected: usize,
        got: usize,
    },

    #[error("cannot invert a zero element")]
    ZeroDivisor,

    #[error("invalid space configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("space configuration mismatch")]
    ConfigMismatch,

    #[error("operation is undefined at the point at infinity")]
    AtInfinity,

    #[error("center must be purely imaginary, real part is {0}")]
    RealCenter(f64),

    #[error("expected {expected} horizontal coordinates, got {got}")]
    HorizontalCount { expected: usize, got: usize },

    #[error("cross-ratio needs at most one point at infinity")]
    TooManyInfinities,

    #[error("indeterminate 0/0 cross-ratio")]
    Indeterminate,

    #[error("point is not inside the open ball (<x,x> = {0})")]
    NotInterior(f64),

    #[error("point is not on the boundary sphere (|x|^2 = {0})")]
    NotOnBoundary(f64),

    #[error("invalid isometry: {0}")]
    InvalidIsometry(String),

    #[error("matrix does not preserve the hermitian form (deviation {0:e})")]
    NotFormPreserving(f64),

    #[error("unsupported for this algebra: {0}")]
    Unsupported(&'static str),

    #[error("isometry is not hyperbolic: {0}")]
    NotHyperbolic(IsometryClass),

    #[error("singular factor: {0}")]
    Singular(&'static str),

    #[error("determinant differs from 1 by {0:e}")]
    Determinant(f64),

    #[error("matrix is not loxodromic: {0}")]
    NotLoxodromic(Sl2Class),

    #[error("word {word} is not loxodromic: {class}")]
    WordNotLoxodromic { word: Word, class: Sl2Class },

    #[error("word letters must be nonzero signed generator indices")]
    ZeroLetter,

    #[error("generator index {index} out of range for arity {arity}")]
    GeneratorIndex { index: usize, arity: usize },

    #[error("representation arities differ: {0} vs {1}")]
    ArityMismatch(usize, usize),

    #[error("representation is elementary")]
    Elementary,

    #[error("no length recorded for word {0}")]
    MissingLength(Word),

    #[error("word {0} has zero recorded length")]
    ZeroLength(Word),

    #[error("negative length {length} for word {word}")]
    NegativeLength { word: Word, length: f64 },

    #[error("sequence too short: need at least {needed} terms, got {got}")]
    SequenceTooShort { needed: usize, got: usize },

    #[error("solver did not converge, best residual RMS {best_residual:e}")]
    NonConvergence { best_residual: f64 },
}
