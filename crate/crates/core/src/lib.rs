//! Rigid body of arbitrary smooth shape moving in a two-dimensional
//! incompressible perfect fluid.
//!
//! The fluid exterior is mapped conformally onto the exterior of the unit
//! disk ([`conformal`]); the Dirichlet Green's function, its image kernels and
//! the potential-flow pieces of the velocity are built on that map
//! ([`fieldkernels`]). Vorticity is carried by desingularised point vortices
//! advected in the body frame ([`dynamics`]); the body is closed with an
//! added-mass decomposition of the pressure integrals ([`rigidbody`]).
//! [`oracle`] and [`diagnostics`] hold the independent finite-difference
//! machinery and the conserved/bounded quantities used for verification.

pub mod conformal;
pub mod corrector;
pub mod diagnostics;
pub mod dynamics;
mod error;
pub mod fieldkernels;
mod geom;
mod spectral;
pub mod oracle;
pub mod rigidbody;
pub mod scenario;
pub mod suites;

#[cfg(feature = "cli")]
pub mod cli;

pub use error::{Error, Result};
pub use geom::Vec2;
