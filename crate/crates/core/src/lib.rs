//! Quaternionic functional calculi on the S-spectrum.
//!
//! Operators `T = T0 + T1 e1 + T2 e2 + T3 e3` with commuting real matrix
//! components are evaluated under the S-, Q-, P2- and F-calculi by
//! trapezoid quadrature on circles in a complex plane `C_J`.

pub mod error;
pub mod quat;
pub mod qlinalg;
pub mod operators;
pub mod random;
pub mod slicefn;
pub mod kernels;
pub mod contour;
pub mod calculus;
pub mod identities;
pub mod cli;

pub use error::{Error, Result};
pub use operators::CommutingOperator;
pub use qlinalg::QuatMatrix;
pub use quat::{ImaginaryUnit, Quaternion, SpectralSphere};
