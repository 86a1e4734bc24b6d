//! Discrete Wigner function on the `2N × 2N` lattice.
//!
//! Point operators are `A(q,p) = (1/2N) 𝒰^q R 𝒱^{−p} e^{iπqp/N}` with `R`
//! the index reflection `n → (−n − 2χp) mod N`, which is `N−1−n` for
//! antiperiodic boundaries. The Wigner function is `W(q,p) = κ Tr(ρ A(q,p))`
//! with `κ` chosen so that the grid sums to `Tr ρ`: the point operators sum
//! to `e^{−i2πχq} I`, so `κ = e^{i2πχq}`.
//!
//! Only `χq = χp ∈ {0, ½}` is supported; for other Floquet angles the point
//! operators are not Hermitian.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::channel::DiffusionChannel;
use crate::kinematics::{displacement, DensityMatrix, OperatorMatrix, PhaseSpaceSpec};
use crate::{CMatrix, Error, Result};

/// Real values on the `2N × 2N` grid, row-major with index `q·2N + p`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    spec: PhaseSpaceSpec,
    values: Vec<f64>,
    imag_residue: f64,
}

impl WignerGrid {
    pub fn new(spec: &PhaseSpaceSpec, values: Vec<f64>) -> Result<Self> {
        let side = 2 * spec.n();
        if values.len() != side * side {
            return Err(Error::DimensionMismatch {
                expected: side * side,
                found: values.len(),
            });
        }
        Ok(Self {
            spec: *spec,
            values,
            imag_residue: 0.0,
        })
    }

    pub fn spec(&self) -> &PhaseSpaceSpec {
        &self.spec
    }

    /// Grid side `2N`.
    pub fn side(&self) -> usize {
        2 * self.spec.n()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Largest `|Im Tr(ρA)|` met while building the grid.
    pub fn imag_residue(&self) -> f64 {
        self.imag_residue
    }

    /// Value at `(q, p)`, indices taken mod `2N`.
    pub fn get(&self, q: i64, p: i64) -> f64 {
        let s = self.side() as i64;
        self.values[(q.rem_euclid(s) * s + p.rem_euclid(s)) as usize]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Sums over `p` for each `q`.
    pub fn q_marginal(&self) -> Vec<f64> {
        self.values.chunks_exact(self.side()).map(|row| row.iter().sum()).collect()
    }

    /// Position probabilities: the `q`-lines `2n + 2χp`, `n = 0..N`.
    pub fn position_marginal(&self) -> Vec<f64> {
        let rows = self.q_marginal();
        let offset = (2.0 * self.spec.chi_p()).round() as usize;
        (0..self.spec.n()).map(|n| rows[2 * n + offset]).collect()
    }

    pub fn max_abs_diff(&self, other: &WignerGrid) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Hermitian point operator with its grid label.
#[derive(Debug, Clone)]
pub struct PointOperator {
    pub q: usize,
    pub p: usize,
    pub matrix: OperatorMatrix,
}

/// `2χ` as an integer, for the supported Floquet angles.
fn supported_twice_chi(spec: &PhaseSpaceSpec) -> Result<i64> {
    let (cq, cp) = (spec.chi_q(), spec.chi_p());
    if cq != cp || !(cq == 0.0 || cq == 0.5) {
        return Err(Error::Unsupported(format!(
            "Wigner function needs chi_q = chi_p in {{0, 1/2}}, got ({cq}, {cp})"
        )));
    }
    Ok((2.0 * cp) as i64)
}

/// Reflected position label `(−n − 2χp) mod N`.
fn reflect(n: usize, twice_chi: i64, dim: usize) -> usize {
    (-(n as i64) - twice_chi).rem_euclid(dim as i64) as usize
}

/// `R|q_n⟩ = |q_{(−n−2χp) mod N}⟩`; for antiperiodic specs `n → N−1−n`.
pub fn reflection_operator(spec: &PhaseSpaceSpec) -> OperatorMatrix {
    let n = spec.n();
    let twice_chi = (2.0 * spec.chi_p()).round() as i64;
    let mut r = CMatrix::zeros(n, n);
    for j in 0..n {
        r[(reflect(j, twice_chi, n), j)] = Complex64::new(1.0, 0.0);
    }
    OperatorMatrix::new(r, true)
}

/// `A(q,p) = (1/2N) 𝒰^q R 𝒱^{−p} e^{iπqp/N}` for `0 ≤ q, p < 2N`.
pub fn point_operator(spec: &PhaseSpaceSpec, q: usize, p: usize) -> Result<PointOperator> {
    let n = spec.n();
    if q >= 2 * n || p >= 2 * n {
        return Err(Error::domain(format!(
            "point ({q}, {p}) is outside the {0}x{0} grid",
            2 * n
        )));
    }
    let u = displacement(spec, q as i64, 0).elements;
    let v = displacement(spec, 0, -(p as i64)).elements;
    let r = reflection_operator(spec).elements;
    let k = (q * p) % (2 * n);
    let phase = Complex64::from_polar(1.0 / (2 * n) as f64, PI * k as f64 / n as f64);
    let matrix = OperatorMatrix::new(u * r * v * phase, false);
    Ok(PointOperator { q, p, matrix })
}

/// `κ = e^{i2πχq}`, real for the supported angles.
fn normalization(twice_chi: i64) -> f64 {
    if twice_chi == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `W(q,p) = κ Tr(ρ A(q,p))`, one length-N FFT per grid row.
///
/// With `j = r(n)`, `m = (j+q) mod N` and `w = ⌊(j+q)/N⌋`,
/// `Tr(ρA) = e^{iπ(qp − 2χp·p)/N}/(2N) · Σ_n τ^w ρ[n,m] e^{−i2πpn/N}`,
/// which for fixed `q` is a forward DFT over `n` evaluated at `p mod N`.
pub fn wigner_transform(spec: &PhaseSpaceSpec, rho: &DensityMatrix) -> Result<WignerGrid> {
    let twice_chi = supported_twice_chi(spec)?;
    spec.check_dim(rho.dim())?;
    let n = spec.n();
    let side = 2 * n;
    let kappa = normalization(twice_chi);
    let tau = spec.position_wrap_phase();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let roots: Vec<Complex64> = (0..side)
        .map(|k| Complex64::from_polar(kappa / side as f64, PI * k as f64 / n as f64))
        .collect();
    let elements = rho.elements();

    let mut values = vec![0.0; side * side];
    let imag_residue = values
        .par_chunks_mut(side)
        .enumerate()
        .map_init(
            || (vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()]),
            |(buf, scratch), (q, row)| {
                for (idx, a) in buf.iter_mut().enumerate() {
                    let shifted = reflect(idx, twice_chi, n) + q;
                    let z = elements[(idx, shifted % n)];
                    *a = if (shifted / n) % 2 == 1 { z * tau } else { z };
                }
                fft.process_with_scratch(buf, scratch);
                let mut residue: f64 = 0.0;
                for (p, out) in row.iter_mut().enumerate() {
                    let k = ((q as i64 * p as i64 - twice_chi * p as i64).rem_euclid(side as i64)) as usize;
                    let z = roots[k] * buf[p % n];
                    *out = z.re;
                    residue = residue.max(z.im.abs());
                }
                residue
            },
        )
        .reduce(|| 0.0, f64::max);

    Ok(WignerGrid {
        spec: *spec,
        values,
        imag_residue,
    })
}

/// Reference evaluation of `κ Tr(ρ A(q,p))` from dense point operators.
pub fn wigner_direct(spec: &PhaseSpaceSpec, rho: &DensityMatrix) -> Result<WignerGrid> {
    let twice_chi = supported_twice_chi(spec)?;
    spec.check_dim(rho.dim())?;
    let side = 2 * spec.n();
    let kappa = normalization(twice_chi);
    let mut values = Vec::with_capacity(side * side);
    let mut imag_residue: f64 = 0.0;
    for q in 0..side {
        for p in 0..side {
            let a = point_operator(spec, q, p)?.matrix.elements;
            let tr = (rho.elements() * a).trace() * kappa;
            imag_residue = imag_residue.max(tr.im.abs());
            values.push(tr.re);
        }
    }
    Ok(WignerGrid {
        spec: *spec,
        values,
        imag_residue,
    })
}

/// Wigner-space diffusion: each point becomes the channel's convex
/// combination of grid translates by `±(2n·dq, 2n·dp)`, indices mod `2N`.
pub fn wigner_diffuse(w: &WignerGrid, channel: &DiffusionChannel) -> Result<WignerGrid> {
    if channel.spec().n() != w.spec.n() {
        return Err(Error::DimensionMismatch {
            expected: channel.spec().n(),
            found: w.spec.n(),
        });
    }
    let values = shift_stencil(&w.values, w.side(), channel, 2);
    Ok(WignerGrid {
        spec: w.spec,
        values,
        imag_residue: w.imag_residue,
    })
}

/// `(1−α) f + α/(2M) Σ_n [f(x + n·step·d) + f(x − n·step·d)]` on a periodic
/// `side × side` row-major grid, where `d` is the channel direction.
pub(crate) fn shift_stencil(
    values: &[f64],
    side: usize,
    channel: &DiffusionChannel,
    step: i64,
) -> Vec<f64> {
    let alpha = channel.alpha();
    if alpha == 0.0 {
        return values.to_vec();
    }
    let m = channel.terms();
    let (dq, dp) = channel.direction();
    let s = side as i64;
    let w = alpha / (2 * m) as f64;
    let mut out: Vec<f64> = values.iter().map(|v| (1.0 - alpha) * v).collect();
    out.par_chunks_mut(side).enumerate().for_each(|(q, row)| {
        for k in 1..=m as i64 {
            for sign in [1, -1] {
                let sq = (q as i64 + sign * k * step * dq).rem_euclid(s) as usize;
                let sp = sign * k * step * dp;
                let src = &values[sq * side..(sq + 1) * side];
                for (p, out) in row.iter_mut().enumerate() {
                    *out += w * src[(p as i64 + sp).rem_euclid(s) as usize];
                }
            }
        }
    });
    out
}
