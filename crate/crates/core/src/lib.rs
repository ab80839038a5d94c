//! Numerical toolkit for discounted optimal control under time-varying state
//! constraints: inward-pointing checks, neighboring feasible trajectories,
//! exponential tracking, and grid approximations of the value function.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod io;
pub mod ipc;
pub mod linalg;
pub mod lp;
pub mod modulus;
pub mod problem;
pub mod trajectory;
pub mod value;

pub use error::{Error, Result};
