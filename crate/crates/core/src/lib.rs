//! Twisted Čech cohomology of rank-one local systems, Riemann theta functions,
//! flat line-bundle families on an elliptic curve and weighted ∂̄ experiments on
//! the punctured disk.

pub mod cech;
pub mod dbar;
pub mod error;
pub mod family;
pub mod jump;
pub mod theta;
pub mod laurent;

pub use error::{CechError, DatumViolation, DbarError, FamilyError, LaurentError, ThetaError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
