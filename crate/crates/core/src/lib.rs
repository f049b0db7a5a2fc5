//! Self-intersections of trajectories in the Z-periodic Lorentz gas and in toy
//! Z^d-extensions, with numerical checks of their limit laws.
//!
//! - [`geometry`]: segments on the cylinder and torus, mod-Z crossing counts
//! - [`billiard`]: the collision map of a periodic table of disks
//! - [`zext`]: Birkhoff sums of the cell displacement, toy doubling-map walks
//! - [`localtime`]: local times and occupation functionals of integer walks
//! - [`selfcross`]: counting self-intersections of a trajectory
//! - [`limitlab`]: the Brownian oracle, constants and limit-law checks
//! - [`runner`]: config-driven runs behind the `zxc` binary
//!
//! The `examples/` directory has one runnable program per capability.

pub mod billiard;
pub mod error;
pub mod geometry;
pub mod limitlab;
pub mod localtime;
pub mod runner;
pub mod seed;
pub mod selfcross;
pub mod zext;

pub use error::{Error, Result};
