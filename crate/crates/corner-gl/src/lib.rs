//! Ginzburg-Landau surface superconductivity near wedge corners.
//!
//! The crate solves the 1D effective model of the boundary layer, builds the
//! cost function used in its lower-bound analysis, meshes the wedge domain,
//! minimizes the 2D Ginzburg-Landau energy with a fixed magnetic potential,
//! and evaluates corner-energy diagnostics.

mod banded;
mod roots;

pub mod costfn;
pub mod effective1d;
pub mod error;
pub mod analysis;
pub mod geometry;
pub mod glsolver;
pub mod mesh;

pub use error::{Error, Result};
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
