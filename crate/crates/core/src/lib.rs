//! Verification engine for leafwise symplectic structures on the Milnor
//! open books of simple elliptic and cusp surface singularities.
//!
//! The crate rebuilds, in explicit coordinates, the monodromy algebra of the
//! links, the contact and fibration data on the nil/solv torus bundles, and
//! every symplectic, contact and foliated form assembled on top of them, then
//! certifies the required identities and inequalities on sample grids.

pub mod constructions;
pub mod error;
pub mod exterior;
pub mod link_model;
pub mod report;
pub mod sl2z;
pub mod verify_suite;

pub use error::{Error, Result};
