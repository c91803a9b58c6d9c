//! Curvature pipeline and verification suites for conformally flat 4-metrics.
//!
//! Metric components are carried as order-3 jets ([`jet::Jet3`]), so every
//! curvature quantity and its first covariant derivative is exact to rounding.

pub mod catalog;
pub mod classify;
pub mod conditions;
pub mod error;
pub mod geometry;
pub mod jet;
pub mod oracle;

pub use error::{Error, Result};

pub const DIM: usize = 4;

pub type Point = [f64; DIM];
pub type Vec4 = [f64; DIM];
pub type Mat4 = [[f64; DIM]; DIM];
pub type Tensor3 = [[[f64; DIM]; DIM]; DIM];
pub type Tensor4 = [[[[f64; DIM]; DIM]; DIM]; DIM];
pub type Tensor5 = [[[[[f64; DIM]; DIM]; DIM]; DIM]; DIM];
