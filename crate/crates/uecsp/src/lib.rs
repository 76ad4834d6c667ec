//! Uniquely-extendable constraint satisfaction at desk scale: constraint
//! algebra (unique extendability, commutativity, reducibility, composition
//! symmetry, group reconstruction), abelian linear solving, random instance
//! models, 2-core peeling, cluster geometry, and threshold numerics.

pub mod cluster;
pub mod constraint;
mod error;
pub mod experiments;
pub mod group;
pub mod instance;
pub mod linalg;
pub mod peel;
pub mod product;
pub mod quasigroup;
pub mod reducibility;
pub mod rng;
pub mod spins;
pub mod thresholds;

pub use error::{Error, Result};
