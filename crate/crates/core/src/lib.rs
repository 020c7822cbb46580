//! Isotropy-splitting fibrations G/K₁ → G/K: Borel–de Siebenthal enumeration
//! from root data, and numeric verification of the constant-length Killing
//! field and constant-displacement results on small matrix models.

pub mod dynkin;
pub mod error;
pub mod exec;
pub mod homspace;
pub mod liealg;
pub mod rootsys;

pub use error::{Error, Result};
