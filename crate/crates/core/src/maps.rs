//! One-step propagators for the quantum baker and Harper maps.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::fourier::{conjugate_with, TwistedFourier};
use crate::kinematics::{fourier_kernel, DensityMatrix, OperatorMatrix, PhaseSpaceSpec};
use crate::{CMatrix, Error, Result};

/// Dimension from which [`unitary_step`] uses the FFT-factored form.
///
/// Smaller dimensions use the dense product. Both forms agree to rounding, so
/// this only affects speed.
pub const FACTORED_THRESHOLD: usize = 64;

/// Structured form of a propagator that can be applied with FFTs.
#[derive(Debug, Clone, PartialEq)]
pub enum FactoredForm {
    /// `G_N⁻¹ · blockdiag(G_{N/2}, G_{N/2})`.
    Baker,
    /// `diag(potential) · G† · diag(kinetic) · G`.
    Kicked {
        potential: Vec<Complex64>,
        kinetic: Vec<Complex64>,
    },
}

/// Which classical map a propagator quantizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapKind {
    Baker,
    Harper { gamma: f64 },
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapKind::Baker => write!(f, "baker"),
            MapKind::Harper { gamma } => write!(f, "harper({gamma})"),
        }
    }
}

/// Unitary for one map step. Immutable after construction; the dense matrix is
/// built on first request.
pub struct UnitaryPropagator {
    spec: PhaseSpaceSpec,
    factored: FactoredForm,
    dense: OnceLock<OperatorMatrix>,
    full: TwistedFourier,
    half: Option<TwistedFourier>,
}

impl fmt::Debug for UnitaryPropagator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UnitaryPropagator")
            .field("spec", &self.spec)
            .field("factored", &self.factored)
            .finish_non_exhaustive()
    }
}

/// Quantum baker map `B = G_N⁻¹ · blockdiag(G_{N/2}, G_{N/2})` with every
/// kernel antiperiodic.
pub fn baker_propagator(spec: &PhaseSpaceSpec) -> Result<UnitaryPropagator> {
    let n = spec.n();
    if n % 2 != 0 {
        return Err(Error::domain(format!("baker map needs even N, got {n}")));
    }
    if !spec.is_antiperiodic() {
        return Err(Error::domain(
            "the baker quantization was later modified to antiperiodic conditions; \
             only chi_q = chi_p = 1/2 is supported",
        ));
    }
    Ok(UnitaryPropagator {
        spec: *spec,
        factored: FactoredForm::Baker,
        dense: OnceLock::new(),
        full: TwistedFourier::new(n, 0.5, 0.5),
        half: Some(TwistedFourier::new(n / 2, 0.5, 0.5)),
    })
}

/// Quantum Harper map `U = U_q G† U_p G` with kicks
/// `exp(−iγN cos(2π(n+χp)/N))` in position and `exp(−iγN cos(2π(k+χq)/N))`
/// in momentum.
pub fn harper_propagator(spec: &PhaseSpaceSpec, gamma: f64) -> UnitaryPropagator {
    let n = spec.n();
    let nf = n as f64;
    let kick = |x: f64| Complex64::from_polar(1.0, -gamma * nf * (TAU * x).cos());
    let potential = (0..n).map(|j| kick(spec.position_eigenvalue(j))).collect();
    let kinetic = (0..n).map(|k| kick(spec.momentum_eigenvalue(k))).collect();
    UnitaryPropagator {
        spec: *spec,
        factored: FactoredForm::Kicked { potential, kinetic },
        dense: OnceLock::new(),
        full: TwistedFourier::new(n, spec.chi_q(), spec.chi_p()),
        half: None,
    }
}

/// Builds the propagator for `kind`.
pub fn propagator(spec: &PhaseSpaceSpec, kind: MapKind) -> Result<UnitaryPropagator> {
    match kind {
        MapKind::Baker => baker_propagator(spec),
        MapKind::Harper { gamma } => Ok(harper_propagator(spec, gamma)),
    }
}

impl UnitaryPropagator {
    pub fn spec(&self) -> &PhaseSpaceSpec {
        &self.spec
    }

    pub fn factored_form(&self) -> &FactoredForm {
        &self.factored
    }

    /// Dense matrix, assembled from the Fourier kernels of [`crate::kinematics`].
    pub fn dense(&self) -> &OperatorMatrix {
        self.dense.get_or_init(|| self.assemble_dense())
    }

    fn assemble_dense(&self) -> OperatorMatrix {
        let n = self.spec.n();
        let g = fourier_kernel(&self.spec).elements;
        let m = match &self.factored {
            FactoredForm::Baker => {
                let half_spec = PhaseSpaceSpec::new(n / 2).expect("even N >= 2");
                let gh = fourier_kernel(&half_spec).elements;
                let mut block = CMatrix::zeros(n, n);
                block.view_mut((0, 0), (n / 2, n / 2)).copy_from(&gh);
                block.view_mut((n / 2, n / 2), (n / 2, n / 2)).copy_from(&gh);
                g.adjoint() * block
            }
            FactoredForm::Kicked { potential, kinetic } => {
                let mut right = g.clone();
                for (mut row, k) in right.row_iter_mut().zip(kinetic) {
                    row *= *k;
                }
                let mut u = g.adjoint() * right;
                for (mut row, v) in u.row_iter_mut().zip(potential) {
                    row *= *v;
                }
                u
            }
        };
        OperatorMatrix::new(m, true)
    }

    /// `v <- U v` using FFTs.
    pub fn apply_factored(&self, v: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let n = self.spec.n();
        if scratch.len() < self.scratch_len() {
            scratch.resize(self.scratch_len(), Complex64::new(0.0, 0.0));
        }
        match &self.factored {
            FactoredForm::Baker => {
                let half = self.half.as_ref().expect("baker has half-size plan");
                let (lo, hi) = v.split_at_mut(n / 2);
                half.apply(lo, scratch);
                half.apply(hi, scratch);
                self.full.apply_adjoint(v, scratch);
            }
            FactoredForm::Kicked { potential, kinetic } => {
                self.full.apply(v, scratch);
                for (x, k) in v.iter_mut().zip(kinetic) {
                    *x *= k;
                }
                self.full.apply_adjoint(v, scratch);
                for (x, p) in v.iter_mut().zip(potential) {
                    *x *= p;
                }
            }
        }
    }

    fn scratch_len(&self) -> usize {
        let half = self.half.as_ref().map_or(0, TwistedFourier::scratch_len);
        self.full.scratch_len().max(half)
    }

    /// `U ρ U†` through the factored form.
    pub fn conjugate_factored(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.spec.check_dim(rho.dim())?;
        let mut scratch = Vec::new();
        let out = conjugate_with(rho.elements(), |col| self.apply_factored(col, &mut scratch));
        Ok(DensityMatrix::from_matrix_unchecked(out))
    }

    /// `U ρ U†` through the dense matrix.
    pub fn conjugate_dense(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.spec.check_dim(rho.dim())?;
        rho.conjugate_dense(self.dense())
    }

    /// `U† ρ U`, the inverse step.
    pub fn conjugate_inverse(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.spec.check_dim(rho.dim())?;
        rho.conjugate_dense(&self.dense().adjoint())
    }
}

/// `ρ' = U ρ U†`. Uses the factored form from [`FACTORED_THRESHOLD`] upward.
pub fn unitary_step(rho: &DensityMatrix, u: &UnitaryPropagator) -> Result<DensityMatrix> {
    if rho.dim() >= FACTORED_THRESHOLD {
        u.conjugate_factored(rho)
    } else {
        u.conjugate_dense(rho)
    }
}
