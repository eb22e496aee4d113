//! Entropy stable finite volume schemes for special relativistic
//! hydrodynamics on adaptive moving structured meshes.

pub mod adaptation;
pub mod cases;
pub mod driver;
pub mod error;
pub mod fluxes;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod metrics;
pub mod physics;
pub mod solver;

pub use error::{Error, Result};
