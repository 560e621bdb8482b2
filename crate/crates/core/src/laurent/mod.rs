//! Exact arithmetic: cyclotomic coefficients, Laurent polynomials and matrices over them.

pub mod cyclo;
pub mod matrix;
pub mod poly;

pub use cyclo::{lcm_all, Cyclo};
pub use matrix::{
    fitting_generators, laurent_det, laurent_minors, minor_count, numeric_rank, symbolic_rank,
    CycloMatrix, DetOptions, LaurentMatrix, MonomialMatrix, DEFAULT_DET_CAP,
};
pub use poly::{CoeffSerial, LaurentPoly, TermSerial};
