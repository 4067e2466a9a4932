//! Orbital-angular-momentum-dependent magnetic lensing of electron beams.
//!
//! The crate models a round magnetic lens whose vector potential carries a
//! `ρ³` correction over a dispersion length `b`. That term couples the OAM
//! quantum number `m` to the focusing strength. Three levels of description
//! are provided:
//!
//! * [`analytic`]: closed-form thin-lens focal lengths, the dispersion
//!   coefficient, ray-transfer matrices and stacked-lens devices;
//! * [`ray`]: semiclassical radial ray tracing with conserved canonical OAM;
//! * [`wave`]: unitary paraxial propagation of azimuthal-order components.
//!
//! Field models live in [`fields`]; kinematics in [`beam`].

pub mod analytic;
pub mod beam;
pub mod constants;
pub mod error;
pub mod fields;
pub mod numerics;
pub mod ray;
pub mod wave;

pub use beam::{make_beam, BeamParameters};
pub use error::{Error, Result};
pub use fields::{AxialFieldModel, FieldIntegrals, Polarity};
