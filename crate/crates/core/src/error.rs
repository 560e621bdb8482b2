use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LaurentError {
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is {rows}x{cols}, not square")]
    NotSquare { rows: usize, cols: usize },
    #[error("size {size} exceeds the cofactor cap {cap} and interpolation is disabled")]
    CapExceeded { size: usize, cap: usize },
    #[error("{required} minors needed, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },
    #[error("minor size {q} out of range for a {rows}x{cols} matrix")]
    BadMinorSize { q: usize, rows: usize, cols: usize },
    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("entry ({row}, {col}) is not a single signed monomial")]
    NotMonomial { row: usize, col: usize },
    #[error("zero coordinate raised to a negative power")]
    ZeroCoordinate,
    #[error("cannot parse rational `{0}`")]
    BadRational(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CechError {
    #[error("datum is invalid: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("dimension {nu} exceeds nerve dimension {max}")]
    InvalidDimension { nu: usize, max: usize },
    #[error("character has {got_free} free and {got_tors} torsion coordinates, datum needs {free} and {tors}")]
    CharacterShape {
        free: usize,
        tors: usize,
        got_free: usize,
        got_tors: usize,
    },
    #[error("bad character: {0}")]
    BadCharacter(String),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
}

/// One violated datum invariant, naming the offending simplex or edge.
#[derive(Debug, Clone, PartialEq, Eq, Error, serde::Serialize)]
pub enum DatumViolation {
    #[error("MissingFace: face {face:?} of simplex {simplex:?} is not listed")]
    MissingFace { simplex: Vec<usize>, face: Vec<usize> },
    #[error("AntisymmetryViolation on edge ({0}, {1})")]
    AntisymmetryViolation(usize, usize),
    #[error("CocycleViolation on triangle ({0}, {1}, {2})")]
    CocycleViolation(usize, usize, usize),
    #[error("Malformed: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThetaError {
    #[error("invalid theta parameters: {0}")]
    InvalidParams(String),
    #[error("truncation radius {needed} exceeds cap {cap}")]
    TruncationFailure { needed: usize, cap: usize },
    #[error("sample {index} is too close to a zero (|value| = {value:e})")]
    NearZeroSample { index: usize, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FamilyError {
    #[error("charts {0} and {1} do not overlap")]
    NoOverlap(usize, usize),
    #[error("point lies outside chart {0}")]
    OutOfChart(usize),
    #[error("stencil leaves chart {0}")]
    StencilOutOfChart(usize),
    #[error("grid point within {0:e} of the divisor")]
    DivisorTooClose(f64),
    #[error("stencil leaves the parameter domain")]
    StencilOutOfDomain,
    #[error("invalid family configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DbarError {
    #[error("point {0} is outside the punctured unit disk")]
    OutOfDomain(f64),
    #[error("radii must satisfy 0 < r1 < r2 < 1 (got {0}, {1})")]
    OutOfAdmissibleRegion(f64, f64),
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("solver hit the iteration cap {0} (relative residual {1:e})")]
    SolverDivergence(usize, f64),
    #[error("weight is not positive and finite at node {0}")]
    SingularWeight(usize),
    #[error("stencil leaves the admissible domain")]
    StencilOutOfDomain,
    #[error("weight is not subharmonic (min Laplacian {0:e})")]
    NotSubharmonic(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}
