//! FFT application of the twisted Fourier kernel
//! `G[m][n] = exp(-i 2π (m + χq)(n + χp) / N) / √N`.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::CMatrix;

/// Plans and twiddles for applying G (or G†) of one size to contiguous vectors.
pub(crate) struct TwistedFourier {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    // exp(-i 2π χq n / N)
    pre: Vec<Complex64>,
    // exp(-i 2π χp m / N) · exp(-i 2π χq χp / N) / √N
    post: Vec<Complex64>,
    scratch_len: usize,
}

impl TwistedFourier {
    pub(crate) fn new(n: usize, chi_q: f64, chi_p: f64) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let nf = n as f64;
        let pre = (0..n)
            .map(|j| Complex64::from_polar(1.0, -TAU * chi_q * j as f64 / nf))
            .collect();
        let global = Complex64::from_polar(1.0 / nf.sqrt(), -TAU * chi_q * chi_p / nf);
        let post = (0..n)
            .map(|m| global * Complex64::from_polar(1.0, -TAU * chi_p * m as f64 / nf))
            .collect();
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            n,
            forward,
            inverse,
            pre,
            post,
            scratch_len,
        }
    }

    pub(crate) fn scratch_len(&self) -> usize {
        self.scratch_len
    }

    /// `v <- G v`
    pub(crate) fn apply(&self, v: &mut [Complex64], scratch: &mut [Complex64]) {
        debug_assert_eq!(v.len(), self.n);
        for (x, w) in v.iter_mut().zip(&self.pre) {
            *x *= w;
        }
        self.forward.process_with_scratch(v, scratch);
        for (x, w) in v.iter_mut().zip(&self.post) {
            *x *= w;
        }
    }

    /// `v <- G† v`
    pub(crate) fn apply_adjoint(&self, v: &mut [Complex64], scratch: &mut [Complex64]) {
        debug_assert_eq!(v.len(), self.n);
        for (x, w) in v.iter_mut().zip(&self.post) {
            *x *= w.conj();
        }
        self.inverse.process_with_scratch(v, scratch);
        for (x, w) in v.iter_mut().zip(&self.pre) {
            *x *= w.conj();
        }
    }
}

/// Computes `L ρ L†` where `apply_left` maps one column vector `v <- L v`.
///
/// Columns of a column-major matrix are contiguous, so `L ρ` is a pass over
/// columns; the right factor uses `(L ρ) L† = (L (L ρ)†)†`.
pub(crate) fn conjugate_with<F>(rho: &CMatrix, mut apply_left: F) -> CMatrix
where
    F: FnMut(&mut [Complex64]),
{
    let n = rho.nrows();
    let mut left = rho.clone();
    for col in left.as_mut_slice().chunks_exact_mut(n) {
        apply_left(col);
    }
    let mut both = left.adjoint();
    for col in both.as_mut_slice().chunks_exact_mut(n) {
        apply_left(col);
    }
    both.adjoint()
}
