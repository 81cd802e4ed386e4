use thiserror::Error;

/// Errors raised by the library. The CLI maps every variant to exit code 2.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("expected {expected} eigenvalues for dimensions {n}x{m}, got {got}")]
    WrongLength {
        expected: usize,
        got: usize,
        n: usize,
        m: usize,
    },
    #[error("eigenvalue {value} at position {index} is negative beyond tolerance")]
    NegativeEigenvalue { index: usize, value: f64 },
    #[error("non-finite value at position {0}")]
    NonFinite(usize),
    #[error("factor dimensions must be positive, got {n}x{m}")]
    ZeroDimension { n: usize, m: usize },
    #[error("matrix of size {rows}x{cols} does not match dimensions {n}x{m}")]
    DimMismatch {
        rows: usize,
        cols: usize,
        n: usize,
        m: usize,
    },
    #[error("matrix is not hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("ordering is not a bijection onto 1..={0}")]
    NotABijection(usize),
    #[error("ordering is not realizable by any strictly decreasing positive vector")]
    NotRealizable,
    #[error("p = {p} exceeds the enumeration limit {max}")]
    PTooLarge { p: usize, max: usize },
    #[error("expected p = {expected}, got p = {got}")]
    PMismatch { expected: usize, got: usize },
    #[error("quadratic form is {0}, not a violation")]
    NotAViolation(f64),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

pub type Result<T> = std::result::Result<T, Error>;
