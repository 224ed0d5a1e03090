//! Structured matrices: Toeplitz, circulant and Hankel products, Toeplitz
//! inverse representations and displacement generators.

pub mod displacement;
pub mod exactconv;
pub mod fft;
pub mod gs;
pub mod toeplitz;

pub use displacement::{DisplacementGenerator, Op};
pub use gs::{levinson_symmetric, toeplitz_inverse_gs, GsInverse};
pub use toeplitz::{
    circulant_matvec, f_circulant_matvec, hankel_bridge, hankel_from_toeplitz, toeplitz_matvec, Circulant, Hankel, Side,
    StructuredMatrix, Toeplitz, ToeplitzOp,
};
