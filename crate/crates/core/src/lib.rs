//! Mechanics of bilayer soft strips modeled as two coupled discrete elastic
//! rods.
//!
//! Each layer is a discrete Kirchhoff rod ([`rod`]) whose natural lengths
//! and curvatures are the actuation inputs. Paired interface edges are held
//! together by penalty energies ([`coupling`]). Gravity, barrier contact,
//! smoothed friction and quadratic drag live in [`external`], and
//! [`integrator`] advances an [`assembly::Assembly`] with implicit Euler and
//! Newton iterations. [`beam2d`] is an independent planar bilayer model used
//! as a cross-check.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod actuation;
pub mod assembly;
pub mod beam2d;
pub mod coupling;
pub mod error;
pub mod external;
pub mod integrator;
pub mod jet;
pub mod linalg;
pub mod rod;
pub mod strip;

pub use error::{Result, SimError};
pub use nalgebra::Vector3;
