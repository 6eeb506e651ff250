use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("chart mismatch: {left} vs {right}")]
    ChartMismatch { left: String, right: String },
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("division is not exact")]
    NonExactDivision,
    #[error("negative power of non-unit substituted for {0:?}")]
    NonUnitLaurentSubstitution(String),
    #[error("invalid root system spec: {0}")]
    InvalidSpec(String),
    #[error("re-expression in invariant generators failed for entry {0}")]
    ReexpressionFailed(String),
    #[error("closed form mismatch: {0}")]
    ClosedFormMismatch(String),
    #[error("determinant mismatch: got {got}, expected {expected}")]
    DetMismatch { got: String, expected: String },
    #[error("matrix is not invertible over Laurent polynomials: {0}")]
    NotInvertible(String),
    #[error("ansatz has no solution: {0}")]
    AnsatzInsufficient(String),
    #[error("B-coefficient recursion disagrees with series at B^{i}_{j}")]
    SeriesRecursionMismatch { i: usize, j: usize },
    #[error("metric block form mismatch: {0}")]
    BlockFormMismatch(String),
    #[error("Christoffel property violated: {0}")]
    PropertyViolation(String),
    #[error("flat metric pattern mismatch: {0}")]
    EtaPatternMismatch(String),
    #[error("third derivatives are not symmetric: {0}")]
    SymmetryViolation(String),
    #[error("third derivatives are not integrable: {0}")]
    IntegrabilityViolation(String),
    #[error("inconsistent linear system: {0}")]
    Inconsistent(String),
    #[error("potential has the wrong shape: {0}")]
    ShapeMismatch(String),
    #[error("direct computation disagrees: {0}")]
    OracleMismatch(String),
    #[error("antiderivative leaves the Laurent ring: {0}")]
    LogarithmicIntegral(String),
    #[error("unknown fixture {0:?} (known: c3k1, c4k1, c4k2)")]
    UnknownFixture(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
