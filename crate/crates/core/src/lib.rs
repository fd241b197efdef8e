//! Finite-dimensional quantum measurement calculus.
//!
//! Effects, observables, instruments and measurement models on `C^d`, built on
//! a small dense complex matrix kernel that is generic over the real scalar.
//! The measurement layers work in `f64`; the aliases below name the concrete
//! kernel types they use.

pub mod cli;
pub mod effects;
pub mod error;
pub mod instruments;
pub mod io;
pub mod label;
pub mod models;
pub mod observables;
pub mod random;
pub mod linalg;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::RealScalar;

/// Complex scalar used by the measurement layers.
pub type C64 = num_complex::Complex<f64>;
/// Dense complex matrix in double precision.
pub type CMatrix = linalg::Matrix<f64>;
/// Hermitian matrix in double precision.
pub type HMatrix = linalg::HermMatrix<f64>;
/// Complex column vector.
pub type CVector = Vec<C64>;
