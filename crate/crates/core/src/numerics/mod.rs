//! Numerical primitives shared by the lens, ray and wave modules.

pub mod ode;
pub mod quadrature;
pub mod roots;
pub mod tridiag;

pub use quadrature::{integrate_line, Quadrature, QuadratureResult, Truncation};
