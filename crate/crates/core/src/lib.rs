//! Slice-regular functions on the quaternions and their Fock spaces.

pub mod approx;
pub mod config;
pub mod error;
pub mod exec;
pub mod fock;
pub mod kernel;
pub mod linalg;
pub mod operators;
pub mod quadrature;
pub mod quat;
pub mod series;

pub use error::{FockError, Result};
pub use quat::{ImaginaryUnit, Quaternion};
pub use series::SliceSeries;
