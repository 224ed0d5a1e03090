//! Randomized matrix computations: additive and dual preprocessing, GENP with
//! random multipliers, singular-space approximation, structured Toeplitz
//! solvers and tensor-train compression.

pub mod elimination;
pub mod error;
pub mod linalg;
pub mod lowrank;
pub mod precond;
pub mod rng;
pub mod singspaces;
pub mod solvers;
pub mod structured;
pub mod tt;
pub mod xprec;

pub use error::{Error, Result};
pub use linalg::{Matrix, Norm, SvdFactors};
pub use rng::{Rng, Seed};
pub use xprec::ExtScalar;
