//! Kinematics of the quantum torus.
//!
//! An N-dimensional Hilbert space with quasi-periodic boundary conditions set
//! by the Floquet angles `χq`, `χp`. Position eigenstates sit at
//! `q_n = (n + χp)/N` and momentum eigenstates at `p_m = (m + χq)/N`.
//!
//! Every operator here is a dense matrix in the position basis. This layer is
//! the reference that the faster paths in [`crate::maps`], [`crate::channel`]
//! and [`crate::wigner`] are checked against.

use std::f64::consts::{PI, TAU};

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::Rng;

use crate::{CMatrix, CVector, Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Hilbert space dimension and Floquet angles.
///
/// The effective Planck constant follows from `2πħN = 1` and is never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceSpec {
    n: usize,
    chi_q: f64,
    chi_p: f64,
}

impl PhaseSpaceSpec {
    /// Antiperiodic space (`χq = χp = 1/2`) of dimension `n`.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_floquet(n, 0.5, 0.5)
    }

    pub fn with_floquet(n: usize, chi_q: f64, chi_p: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("dimension N must be at least 1"));
        }
        for (name, chi) in [("chi_q", chi_q), ("chi_p", chi_p)] {
            if !(0.0..1.0).contains(&chi) {
                return Err(Error::domain(format!("{name} = {chi} is outside [0, 1)")));
            }
        }
        Ok(Self { n, chi_q, chi_p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn chi_q(&self) -> f64 {
        self.chi_q
    }

    pub fn chi_p(&self) -> f64 {
        self.chi_p
    }

    /// `h = 2πħ = 1/N`.
    pub fn h_eff(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn is_antiperiodic(&self) -> bool {
        self.chi_q == 0.5 && self.chi_p == 0.5
    }

    pub fn is_periodic(&self) -> bool {
        self.chi_q == 0.0 && self.chi_p == 0.0
    }

    /// Position eigenvalue `(n + χp)/N`.
    pub fn position_eigenvalue(&self, index: usize) -> f64 {
        (index as f64 + self.chi_p) / self.n as f64
    }

    /// Momentum eigenvalue `(m + χq)/N`.
    pub fn momentum_eigenvalue(&self, index: usize) -> f64 {
        (index as f64 + self.chi_q) / self.n as f64
    }

    /// Phase acquired by `𝒰` when a position label wraps past `N - 1`.
    pub fn position_wrap_phase(&self) -> Complex64 {
        Complex64::from_polar(1.0, -TAU * self.chi_q)
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if found == self.n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.n,
                found,
            })
        }
    }
}

/// Which eigenbasis a vector is expressed in, or which axis an operator acts along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Position,
    Momentum,
}

/// Pure state amplitudes in a stated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: CVector,
    pub basis: Basis,
    /// Eigenvalue location for basis states, `None` otherwise.
    pub location: Option<f64>,
}

impl StateVector {
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// Amplitudes `⟨q_n|ψ⟩`, converting from the momentum basis with G† when needed.
    pub fn in_position(&self, spec: &PhaseSpaceSpec) -> Result<CVector> {
        spec.check_dim(self.dim())?;
        Ok(match self.basis {
            Basis::Position => self.amplitudes.clone(),
            Basis::Momentum => fourier_kernel(spec).elements.adjoint() * &self.amplitudes,
        })
    }
}

/// Dense operator in the position basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub elements: CMatrix,
    pub unitary_hint: bool,
}

impl OperatorMatrix {
    pub fn new(elements: CMatrix, unitary_hint: bool) -> Self {
        Self {
            elements,
            unitary_hint,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(CMatrix::identity(n, n), true)
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.elements.adjoint(), self.unitary_hint)
    }

    /// `max |(U†U − I)_ij|`
    pub fn unitarity_error(&self) -> f64 {
        let n = self.dim();
        let gram = self.elements.adjoint() * &self.elements;
        max_abs_diff(&gram, &CMatrix::identity(n, n))
    }

    /// Integer power; negative exponents use the adjoint and so assume unitarity.
    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 {
            self.elements.adjoint()
        } else {
            self.elements.clone()
        };
        let mut e = k.unsigned_abs();
        let mut acc = CMatrix::identity(self.dim(), self.dim());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        Self::new(acc, self.unitary_hint)
    }
}

impl std::ops::Mul for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix::new(
            &self.elements * &rhs.elements,
            self.unitary_hint && rhs.unitary_hint,
        )
    }
}

/// Largest entrywise modulus of `a − b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Density matrix in the position basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    elements: CMatrix,
}

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-12;
    pub const EIGEN_TOL: f64 = 1e-10;

    /// Wraps a matrix after checking squareness, Hermiticity and unit trace.
    /// Positivity is checked on demand with [`DensityMatrix::validate_positive`].
    pub fn new(elements: CMatrix) -> Result<Self> {
        if !elements.is_square() {
            return Err(Error::domain(format!(
                "density matrix must be square, got {}x{}",
                elements.nrows(),
                elements.ncols()
            )));
        }
        let rho = Self { elements };
        let herm = rho.hermiticity_error();
        if herm > Self::HERMITIAN_TOL {
            return Err(Error::domain(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > Self::TRACE_TOL || tr.im.abs() > Self::TRACE_TOL {
            return Err(Error::domain(format!("trace {tr} is not 1")));
        }
        Ok(rho)
    }

    /// Wraps without validation; used for evolved states whose invariants
    /// are checked on demand.
    pub fn from_matrix_unchecked(elements: CMatrix) -> Self {
        Self { elements }
    }

    /// `|ψ⟩⟨ψ|` for a state in any basis, converted to the position basis.
    pub fn pure(spec: &PhaseSpaceSpec, psi: &StateVector) -> Result<Self> {
        let v = psi.in_position(spec)?;
        let norm = v.norm_squared();
        Ok(Self {
            elements: (&v * v.adjoint()) / Complex64::new(norm, 0.0),
        })
    }

    /// `I/N`
    pub fn maximally_mixed(n: usize) -> Self {
        Self {
            elements: CMatrix::identity(n, n) / Complex64::new(n as f64, 0.0),
        }
    }

    /// Random full-rank state `X X† / Tr(X X†)` with uniform entries.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let x = CMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let y = &x * x.adjoint();
        let tr = y.trace();
        let mut elements = y / tr;
        // exact Hermiticity, independent of rounding in the product
        for i in 0..n {
            elements[(i, i)].im = 0.0;
            for j in 0..i {
                elements[(i, j)] = elements[(j, i)].conj();
            }
        }
        Self { elements }
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn elements(&self) -> &CMatrix {
        &self.elements
    }

    pub fn into_inner(self) -> CMatrix {
        self.elements
    }

    pub fn trace(&self) -> Complex64 {
        self.elements.trace()
    }

    /// `Tr ρ²` for Hermitian ρ, i.e. `Σ |ρ_ij|²`.
    pub fn purity(&self) -> f64 {
        self.elements.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_abs_diff(&self.elements, &self.elements.adjoint())
    }

    /// Ascending eigenvalues of the Hermitian part.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.elements + self.elements.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Checks positivity to [`Self::EIGEN_TOL`].
    pub fn validate_positive(&self) -> Result<()> {
        let min = self.min_eigenvalue();
        if min < -Self::EIGEN_TOL {
            Err(Error::Numerical(format!("negative eigenvalue {min:e}")))
        } else {
            Ok(())
        }
    }

    /// `max |ρ_ij|` over `i ≠ j`.
    pub fn max_off_diagonal(&self) -> f64 {
        let n = self.dim();
        let mut m: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    m = m.max(self.elements[(i, j)].norm());
                }
            }
        }
        m
    }

    /// `U ρ U†` with dense matrices.
    pub fn conjugate_dense(&self, u: &OperatorMatrix) -> Result<Self> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.dim(),
            });
        }
        Ok(Self {
            elements: &u.elements * &self.elements * u.elements.adjoint(),
        })
    }
}

/// `x mod N` for the half-integer-friendly products that appear in phases.
fn reduce(x: f64, n: usize) -> f64 {
    x.rem_euclid(n as f64)
}

/// The kernel `G[m][n] = ⟨p_m|q_n⟩ = exp(−i 2π (m+χq)(n+χp)/N) / √N`.
///
/// Maps position amplitudes to momentum amplitudes.
pub fn fourier_kernel(spec: &PhaseSpaceSpec) -> OperatorMatrix {
    let n = spec.n();
    let nf = n as f64;
    let scale = 1.0 / nf.sqrt();
    let g = CMatrix::from_fn(n, n, |m, k| {
        let x = reduce((m as f64 + spec.chi_q) * (k as f64 + spec.chi_p), n);
        Complex64::from_polar(scale, -TAU * x / nf)
    });
    OperatorMatrix::new(g, true)
}

/// `𝒰^k` in the position basis: `|q_j⟩ → τ^w |q_{(j+k) mod N}⟩`, with
/// `w` the number of times the label wraps and `τ = e^{−i2πχq}`.
fn position_shift_power(spec: &PhaseSpaceSpec, k: i64) -> CMatrix {
    let n = spec.n() as i64;
    let tau = spec.position_wrap_phase();
    let mut u = CMatrix::zeros(n as usize, n as usize);
    for j in 0..n {
        let target = j + k;
        let wraps = target.div_euclid(n);
        u[(target.rem_euclid(n) as usize, j as usize)] = tau.powi(wraps as i32);
    }
    u
}

/// Diagonal of `𝒱^k`: `e^{i2πk(n+χp)/N}`.
fn momentum_shift_phases(spec: &PhaseSpaceSpec, k: i64) -> Vec<Complex64> {
    let n = spec.n();
    (0..n)
        .map(|j| {
            let x = reduce(k as f64 * (j as f64 + spec.chi_p), n);
            Complex64::from_polar(1.0, TAU * x / n as f64)
        })
        .collect()
}

/// Schwinger shifts: `𝒰|q_n⟩ = |q_{n+1}⟩` (axis `Position`) and
/// `𝒱|p_m⟩ = |p_{m+1}⟩` (axis `Momentum`).
///
/// The shifts are cyclic in the label with the boundary phase fixed by the
/// Floquet angles: `𝒰|q_{N−1}⟩ = e^{−i2πχq}|q_0⟩` and
/// `𝒱|p_{N−1}⟩ = e^{i2πχp}|p_0⟩`. With this choice `𝒱 𝒰 = e^{i2π/N} 𝒰 𝒱`,
/// `𝒰` is diagonal in the momentum basis and `𝒱` in the position basis.
pub fn shift_operator(spec: &PhaseSpaceSpec, axis: Basis) -> OperatorMatrix {
    let m = match axis {
        Basis::Position => position_shift_power(spec, 1),
        Basis::Momentum => CMatrix::from_diagonal(&CVector::from_vec(momentum_shift_phases(spec, 1))),
    };
    OperatorMatrix::new(m, true)
}

/// Phase-space displacement `D = 𝒰^dq 𝒱^dp e^{iπ dq dp/N}`.
///
/// Written `D(Δp, Δq)` in some references; the argument order here is always
/// (position step, momentum step). `D(−dq, −dp) = D(dq, dp)†` exactly.
pub fn displacement(spec: &PhaseSpaceSpec, dq: i64, dp: i64) -> OperatorMatrix {
    let n = spec.n();
    let mut d = position_shift_power(spec, dq);
    let phases = momentum_shift_phases(spec, dp);
    let x = reduce((dq as f64) * (dp as f64), 2 * n);
    let global = Complex64::from_polar(1.0, PI * x / n as f64);
    for (j, mut col) in d.column_iter_mut().enumerate() {
        col *= phases[j] * global;
    }
    OperatorMatrix::new(d, true)
}

/// Position or momentum eigenstate, expressed in its own basis.
pub fn basis_state(spec: &PhaseSpaceSpec, kind: Basis, index: usize) -> Result<StateVector> {
    let n = spec.n();
    if index >= n {
        return Err(Error::domain(format!(
            "basis index {index} out of range for N = {n}"
        )));
    }
    let mut amplitudes = CVector::from_element(n, ZERO);
    amplitudes[index] = ONE;
    let location = match kind {
        Basis::Position => spec.position_eigenvalue(index),
        Basis::Momentum => spec.momentum_eigenvalue(index),
    };
    Ok(StateVector {
        amplitudes,
        basis: kind,
        location: Some(location),
    })
}

/// Periodized Gaussian centred at `(q0, p0)` with equal widths in q and p.
///
/// `ψ(x_n) ∝ Σ_{m=−2..2} exp(−πN(x_n−q0+m)² + i2πN p0 (x_n−q0+m))`.
pub fn coherent_state(spec: &PhaseSpaceSpec, q0: f64, p0: f64) -> StateVector {
    let n = spec.n();
    let nf = n as f64;
    let mut amplitudes = CVector::from_fn(n, |j, _| {
        let x = spec.position_eigenvalue(j);
        (-2..=2)
            .map(|m| {
                let d = x - q0 + m as f64;
                Complex64::from_polar((-PI * nf * d * d).exp(), TAU * nf * p0 * d)
            })
            .sum()
    });
    let norm = amplitudes.norm();
    amplitudes /= Complex64::new(norm, 0.0);
    StateVector {
        amplitudes,
        basis: Basis::Position,
        location: None,
    }
}

/// `S = −ln Tr ρ²`
pub fn linear_entropy(rho: &DensityMatrix) -> Result<f64> {
    let p = rho.purity();
    if p <= 0.0 || !p.is_finite() {
        return Err(Error::Numerical(format!("purity {p} is not positive")));
    }
    Ok(-p.ln())
}
