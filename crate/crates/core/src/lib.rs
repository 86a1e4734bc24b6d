//! Open quantum maps on the unit torus.
//!
//! The crate evolves density matrices of the quantized baker and Harper maps
//! under a diffusive Kraus channel and provides the diagnostics used to study
//! entropy production and quantum-classical correspondence:
//!
//! - [`kinematics`]: the N-dimensional torus Hilbert space, Fourier kernels,
//!   shift and displacement operators, initial states, linear entropy.
//! - [`maps`]: one-step propagators with FFT-factored application.
//! - [`channel`]: the diffusive operator-sum channel and its diagonal fast path.
//! - [`wigner`]: the discrete Wigner function on the 2N x 2N lattice.
//! - [`classical`]: classical point maps and grid transport.
//! - [`toymodel`]: the element-counting model of entropy growth.
//! - [`runner`]: experiment configs, evolution loops, slope fits and sweeps.

pub mod channel;
pub mod classical;
mod error;
mod fourier;
pub mod kinematics;
pub mod maps;
pub mod runner;
pub mod selftest;
pub mod snapshot;
pub mod toymodel;
pub mod wigner;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Dense complex matrix used throughout.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<Complex64>;
