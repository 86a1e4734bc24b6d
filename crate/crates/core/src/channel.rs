//! Diffusive channel
//!
//! ```text
//! ρ' = (1−α) ρ + α/(2M) Σ_{n=1..M} (D_n ρ D_n† + D_n† ρ D_n),   D_n = D(n·dq, n·dp)
//! ```
//!
//! All `D_n` are powers (up to phase) of one elementary displacement. Along
//! the position and momentum axes the channel is diagonal in a known basis
//! and multiplies `ρ_ij` by a kernel of the index offset. Other directions
//! apply each `D_n` as a monomial matrix (permutation times phases), which
//! costs `O(M N²)` and permutes the diagonal exactly.
//! [`KrausSet::apply`] is the brute-force operator sum.

use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::fourier::{conjugate_with, TwistedFourier};
use crate::kinematics::{displacement, DensityMatrix, OperatorMatrix, PhaseSpaceSpec};
use crate::{CMatrix, Error, Result};

/// Diffusion along one phase-space direction with `M` displacement terms.
pub struct DiffusionChannel {
    spec: PhaseSpaceSpec,
    alpha: f64,
    terms: usize,
    dq: i64,
    dp: i64,
    eigenbasis: OnceLock<Eigenbasis>,
}

/// `D e_j = coeff[j] e_{target[j]}`
struct Monomial {
    target: Vec<usize>,
    coeff: Vec<Complex64>,
}

impl Monomial {
    fn from_dense(d: &CMatrix) -> Self {
        let (target, coeff) = d
            .column_iter()
            .map(|col| {
                let (row, _) = col
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
                    .expect("non-empty column");
                (row, col[row])
            })
            .unzip();
        Self { target, coeff }
    }

    /// `acc += w · D ρ D†`
    fn accumulate(&self, rho: &CMatrix, w: f64, acc: &mut CMatrix) {
        for j in 0..rho.ncols() {
            let cj = self.coeff[j].conj() * w;
            let tj = self.target[j];
            for i in 0..rho.nrows() {
                acc[(self.target[i], tj)] += self.coeff[i] * rho[(i, j)] * cj;
            }
        }
    }
}

enum Eigenbasis {
    /// `D(0, dp)` is diagonal in the position basis.
    Position,
    /// `D(dq, 0)` is diagonal in the momentum basis.
    Momentum(TwistedFourier),
    /// No shared basis is used; `D_n` and `D_n†` for `n = 1..M`.
    General(Vec<Monomial>),
}

impl fmt::Debug for DiffusionChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffusionChannel")
            .field("n", &self.spec.n())
            .field("alpha", &self.alpha)
            .field("terms", &self.terms)
            .field("dq", &self.dq)
            .field("dp", &self.dp)
            .finish()
    }
}

impl Clone for DiffusionChannel {
    fn clone(&self) -> Self {
        Self {
            spec: self.spec,
            alpha: self.alpha,
            terms: self.terms,
            dq: self.dq,
            dp: self.dp,
            eigenbasis: OnceLock::new(),
        }
    }
}

impl DiffusionChannel {
    pub fn new(spec: &PhaseSpaceSpec, alpha: f64, terms: usize, dq: i64, dp: i64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::domain(format!("coupling alpha = {alpha} is outside [0, 1]")));
        }
        if terms == 0 || terms > spec.n() {
            return Err(Error::domain(format!(
                "term count M = {terms} must satisfy 1 <= M <= N = {}",
                spec.n()
            )));
        }
        if dq == 0 && dp == 0 {
            return Err(Error::domain("displacement direction (0, 0) is not a diffusion"));
        }
        Ok(Self {
            spec: *spec,
            alpha,
            terms,
            dq,
            dp,
            eigenbasis: OnceLock::new(),
        })
    }

    /// Diffusion in momentum (`D = 𝒱`), labelled `α_p`.
    pub fn along_momentum(spec: &PhaseSpaceSpec, alpha: f64, terms: usize) -> Result<Self> {
        Self::new(spec, alpha, terms, 0, 1)
    }

    /// Diffusion in position (`D = 𝒰`), labelled `α_q`.
    pub fn along_position(spec: &PhaseSpaceSpec, alpha: f64, terms: usize) -> Result<Self> {
        Self::new(spec, alpha, terms, 1, 0)
    }

    pub fn spec(&self) -> &PhaseSpaceSpec {
        &self.spec
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn terms(&self) -> usize {
        self.terms
    }

    pub fn direction(&self) -> (i64, i64) {
        (self.dq, self.dp)
    }

    /// Same direction and term count, different coupling.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(&self.spec, alpha, self.terms, self.dq, self.dp)
    }

    /// `D_n = D(n·dq, n·dp)`
    pub fn displacement_term(&self, n: usize) -> OperatorMatrix {
        displacement(&self.spec, n as i64 * self.dq, n as i64 * self.dp)
    }

    fn eigenbasis(&self) -> &Eigenbasis {
        self.eigenbasis.get_or_init(|| match (self.dq, self.dp) {
            (0, _) => Eigenbasis::Position,
            (_, 0) => Eigenbasis::Momentum(TwistedFourier::new(
                self.spec.n(),
                self.spec.chi_q(),
                self.spec.chi_p(),
            )),
            _ => Eigenbasis::General(
                (1..=self.terms)
                    .flat_map(|n| {
                        let d = self.displacement_term(n).elements;
                        [Monomial::from_dense(&d), Monomial::from_dense(&d.adjoint())]
                    })
                    .collect(),
            ),
        })
    }
}

/// Multiplier of an off-diagonal element at index offset `k` in the eigenbasis
/// of the elementary displacement:
///
/// `1 − α [1 − cos(πk(M+1)/N) sin(πkM/N) / (M sin(πk/N))]`, and exactly 1
/// when `k ≡ 0 (mod N)`.
pub fn damping_factor(channel: &DiffusionChannel, k: i64) -> f64 {
    let n = channel.spec.n() as i64;
    if k.rem_euclid(n) == 0 {
        return 1.0;
    }
    let m = channel.terms as f64;
    let x = std::f64::consts::PI * k as f64 / n as f64;
    1.0 - channel.alpha * (1.0 - (x * (m + 1.0)).cos() * (x * m).sin() / (m * x.sin()))
}

/// Suppression of the `k = N/2` coherence used by the analytic model.
///
/// `None` gives the large-M limit `1 − α`; `Some(M)` the exact value for `M`
/// terms (`1 − α` for even M, `1 − α(1 + 1/M)` for odd M).
pub fn decoherence_ratio_toy(alpha: f64, terms: Option<usize>) -> f64 {
    match terms {
        Some(m) if m % 2 == 1 => 1.0 - alpha * (1.0 + 1.0 / m as f64),
        _ => 1.0 - alpha,
    }
}

/// Operators `E_k` of an operator-sum representation, weights folded in.
#[derive(Debug, Clone)]
pub struct KrausSet {
    pub operators: Vec<OperatorMatrix>,
}

impl KrausSet {
    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// `max |Σ E_k† E_k − I|`
    pub fn completeness_error(&self) -> f64 {
        let Some(first) = self.operators.first() else {
            return f64::INFINITY;
        };
        let n = first.dim();
        let sum = self
            .operators
            .iter()
            .fold(CMatrix::zeros(n, n), |acc, e| acc + e.elements.adjoint() * &e.elements);
        crate::kinematics::max_abs_diff(&sum, &CMatrix::identity(n, n))
    }

    /// `Σ E_k ρ E_k†`
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let n = rho.dim();
        let mut out = CMatrix::zeros(n, n);
        for e in &self.operators {
            if e.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: e.dim(),
                    found: n,
                });
            }
            out += &e.elements * rho.elements() * e.elements.adjoint();
        }
        Ok(DensityMatrix::from_matrix_unchecked(out))
    }
}

/// `√(1−α) I` followed by `√(α/2M) D_n`, `√(α/2M) D_n†` for `n = 1..M`.
pub fn kraus_set(channel: &DiffusionChannel) -> KrausSet {
    let n = channel.spec.n();
    let m = channel.terms;
    let w0 = Complex64::new((1.0 - channel.alpha).sqrt(), 0.0);
    let w = Complex64::new((channel.alpha / (2.0 * m as f64)).sqrt(), 0.0);
    let mut operators = Vec::with_capacity(2 * m + 1);
    operators.push(OperatorMatrix::new(CMatrix::identity(n, n) * w0, false));
    for k in 1..=m {
        let d = channel.displacement_term(k);
        operators.push(OperatorMatrix::new(&d.elements * w, false));
        operators.push(OperatorMatrix::new(d.elements.adjoint() * w, false));
    }
    KrausSet { operators }
}

/// Convex mixture of displacements in arbitrary, possibly non-collinear,
/// directions: `(1−α) ρ + α/(2K) Σ_k (D_k ρ D_k† + D_k† ρ D_k)`.
///
/// There is no diagonal form for such mixtures; apply the returned set with
/// [`KrausSet::apply`].
pub fn displacement_mixture(
    spec: &PhaseSpaceSpec,
    alpha: f64,
    directions: &[(i64, i64)],
) -> Result<KrausSet> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain(format!("coupling alpha = {alpha} is outside [0, 1]")));
    }
    if directions.is_empty() {
        return Err(Error::domain("a displacement mixture needs at least one direction"));
    }
    let n = spec.n();
    let w0 = Complex64::new((1.0 - alpha).sqrt(), 0.0);
    let w = Complex64::new((alpha / (2.0 * directions.len() as f64)).sqrt(), 0.0);
    let mut operators = vec![OperatorMatrix::new(CMatrix::identity(n, n) * w0, false)];
    for &(dq, dp) in directions {
        let d = displacement(spec, dq, dp);
        operators.push(OperatorMatrix::new(&d.elements * w, false));
        operators.push(OperatorMatrix::new(d.elements.adjoint() * w, false));
    }
    Ok(KrausSet { operators })
}

/// Applies the channel through its diagonal form in the displacement eigenbasis.
pub fn apply_diffusion(rho: &DensityMatrix, channel: &DiffusionChannel) -> Result<DensityMatrix> {
    channel.spec.check_dim(rho.dim())?;
    if channel.alpha == 0.0 {
        return Ok(rho.clone());
    }
    let out = match channel.eigenbasis() {
        Eigenbasis::Position => {
            let f = offset_kernel(channel, channel.dp);
            let mut m = rho.elements().clone();
            damp_by_offset(&mut m, &f);
            m
        }
        Eigenbasis::Momentum(fourier) => {
            let f = offset_kernel(channel, channel.dq);
            let mut scratch = vec![Complex64::new(0.0, 0.0); fourier.scratch_len()];
            let mut m = conjugate_with(rho.elements(), |col| fourier.apply(col, &mut scratch));
            damp_by_offset(&mut m, &f);
            conjugate_with(&m, |col| fourier.apply_adjoint(col, &mut scratch))
        }
        Eigenbasis::General(terms) => {
            let mut m = rho.elements() * Complex64::from(1.0 - channel.alpha);
            let w = channel.alpha / terms.len() as f64;
            for d in terms {
                d.accumulate(rho.elements(), w, &mut m);
            }
            m
        }
    };
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// `f[k] = damping_factor(step · k)` for `k = 0..N`.
fn offset_kernel(channel: &DiffusionChannel, step: i64) -> Vec<f64> {
    (0..channel.spec.n() as i64)
        .map(|k| damping_factor(channel, step * k))
        .collect()
}

fn damp_by_offset(m: &mut CMatrix, f: &[f64]) {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..n {
            m[(i, j)] *= f[(i + n - j) % n];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{linear_entropy, max_abs_diff};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(n: usize) -> PhaseSpaceSpec {
        PhaseSpaceSpec::new(n).unwrap()
    }

    #[test]
    fn channel_validation() {
        let s = spec(4);
        assert!(DiffusionChannel::new(&s, 1.1, 1, 0, 1).is_err());
        assert!(DiffusionChannel::new(&s, -0.1, 1, 0, 1).is_err());
        assert!(DiffusionChannel::new(&s, 0.5, 0, 0, 1).is_err());
        assert!(DiffusionChannel::new(&s, 0.5, 5, 0, 1).is_err());
        assert!(DiffusionChannel::new(&s, 0.5, 1, 0, 0).is_err());
        assert!(DiffusionChannel::new(&s, 0.5, 4, 1, 1).is_ok());
    }

    #[test]
    fn kraus_alpha_zero_is_identity() {
        let c = DiffusionChannel::along_momentum(&spec(4), 0.0, 2).unwrap();
        let k = kraus_set(&c);
        assert_eq!(k.len(), 5);
        assert!(max_abs_diff(&k.operators[0].elements, &CMatrix::identity(4, 4)) < 1e-15);
        for e in &k.operators[1..] {
            assert!(e.elements.iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn kraus_completeness() {
        let c = DiffusionChannel::along_momentum(&spec(4), 0.5, 1).unwrap();
        assert!(kraus_set(&c).completeness_error() < 1e-14);
        let c = DiffusionChannel::new(&spec(7), 0.3, 5, 2, -1).unwrap();
        assert!(kraus_set(&c).completeness_error() < 1e-12);
    }

    #[test]
    fn kraus_operators_are_weighted_displacements() {
        let s = spec(6);
        let c = DiffusionChannel::new(&s, 0.4, 2, 1, 1).unwrap();
        let k = kraus_set(&c);
        let w = Complex64::new((0.4f64 / 4.0).sqrt(), 0.0);
        for n in 1..=2i64 {
            let d = displacement(&s, n, n).elements;
            let idx = 2 * n as usize - 1;
            assert!(max_abs_diff(&(&k.operators[idx].elements / w), &d) < 1e-14);
            assert!(max_abs_diff(&(&k.operators[idx + 1].elements / w), &d.adjoint()) < 1e-14);
        }
        // D(2,2) is D(1,1)² up to a global phase
        let d1 = displacement(&s, 1, 1).elements;
        let d2 = displacement(&s, 2, 2).elements;
        let sq = &d1 * &d1;
        let (a, b) = sq.iter().zip(d2.iter()).find(|(a, _)| a.norm() > 0.5).unwrap();
        let phase = b / a;
        assert!((phase.norm() - 1.0).abs() < 1e-13);
        assert!(max_abs_diff(&(sq * phase), &d2) < 1e-13);
    }

    #[test]
    fn damping_factor_examples() {
        let c = DiffusionChannel::along_momentum(&spec(4), 0.5, 1).unwrap();
        assert_eq!(damping_factor(&c, 0), 1.0);
        assert_eq!(damping_factor(&c, 4), 1.0);
        assert!((damping_factor(&c, 1) - 0.5).abs() < 1e-15);
        // M = 1 at an offset where cos(2πk/N) = 1
        let c = DiffusionChannel::along_momentum(&spec(6), 0.7, 1).unwrap();
        assert!((damping_factor(&c, 6) - 1.0).abs() < 1e-15);
        assert!((damping_factor(&c, -12) - 1.0).abs() < 1e-15);
        for k in -12..12 {
            assert!(damping_factor(&c, k).abs() <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn damping_factor_n4_by_explicit_kraus_sum() {
        let s = spec(4);
        let c = DiffusionChannel::along_momentum(&s, 0.5, 1).unwrap();
        // rank-one ρ = |ψ⟩⟨ψ| with uniform amplitudes; element (1,0) has offset k = 1
        let psi = nalgebra::DVector::from_element(4, Complex64::new(0.5, 0.0));
        let rho = DensityMatrix::new(&psi * psi.adjoint()).unwrap();
        let out = kraus_set(&c).apply(&rho).unwrap();
        let ratio = out.elements()[(1, 0)] / rho.elements()[(1, 0)];
        assert!((ratio - Complex64::new(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn toy_ratio() {
        assert_eq!(decoherence_ratio_toy(0.0, None), 1.0);
        assert_eq!(decoherence_ratio_toy(0.5, None), 0.5);
        let c = DiffusionChannel::along_momentum(&spec(16), 0.5, 16).unwrap();
        let exact = damping_factor(&c, 8);
        assert!((exact - decoherence_ratio_toy(0.5, Some(16))).abs() < 1e-14);
        assert!((exact - decoherence_ratio_toy(0.5, None)).abs() <= 1.0 / 16.0);
        let c = DiffusionChannel::along_momentum(&spec(16), 0.3, 3).unwrap();
        assert!((damping_factor(&c, 8) - decoherence_ratio_toy(0.3, Some(3))).abs() < 1e-14);
    }

    #[test]
    fn fast_path_matches_kraus_in_every_eigenbasis() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = spec(8);
        let rho = DensityMatrix::random(8, &mut rng);
        for (dq, dp) in [(0, 1), (1, 0), (0, -3), (2, 0), (1, 1), (2, -1), (3, 2)] {
            let c = DiffusionChannel::new(&s, 0.7, 3, dq, dp).unwrap();
            let fast = apply_diffusion(&rho, &c).unwrap();
            let brute = kraus_set(&c).apply(&rho).unwrap();
            let err = max_abs_diff(fast.elements(), brute.elements());
            assert!(err < 1e-12, "direction ({dq},{dp}) deviates by {err:e}");
        }
    }

    #[test]
    fn full_decoherence_in_one_step() {
        let s = spec(8);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = DensityMatrix::random(8, &mut rng);
        let c = DiffusionChannel::along_momentum(&s, 1.0, 8).unwrap();
        let out = apply_diffusion(&rho, &c).unwrap();
        assert!(out.max_off_diagonal() < 1e-12);
        // weaker coupling reaches the same limit after repeated steps
        let c = DiffusionChannel::along_momentum(&s, 0.6, 8).unwrap();
        let mut r = rho.clone();
        for _ in 0..40 {
            r = apply_diffusion(&r, &c).unwrap();
        }
        assert!(r.max_off_diagonal() < 1e-12);
    }

    #[test]
    fn unital_trace_preserving_and_entropy_monotone() {
        let s = spec(6);
        let c = DiffusionChannel::new(&s, 0.35, 4, 1, 2).unwrap();
        let mixed = DensityMatrix::maximally_mixed(6);
        let out = apply_diffusion(&mixed, &c).unwrap();
        assert!(max_abs_diff(out.elements(), mixed.elements()) < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut rho = DensityMatrix::random(6, &mut rng);
        for _ in 0..20 {
            let next = apply_diffusion(&rho, &c).unwrap();
            assert!((next.trace().re - 1.0).abs() < 1e-12);
            assert!(next.hermiticity_error() < 1e-12);
            assert!(linear_entropy(&next).unwrap() >= linear_entropy(&rho).unwrap() - 1e-10);
            rho = next;
        }
    }

    #[test]
    fn mixture_in_two_directions() {
        let s = spec(5);
        let k = displacement_mixture(&s, 0.4, &[(1, 0), (0, 1)]).unwrap();
        assert_eq!(k.len(), 5);
        assert!(k.completeness_error() < 1e-13);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rho = DensityMatrix::random(5, &mut rng);
        let out = k.apply(&rho).unwrap();
        assert!((out.trace().re - 1.0).abs() < 1e-12);
        assert!(out.min_eigenvalue() > -1e-10);
        assert!(displacement_mixture(&s, 0.4, &[]).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let c = DiffusionChannel::along_position(&spec(4), 0.3, 1).unwrap();
        let rho = DensityMatrix::maximally_mixed(5);
        assert!(matches!(apply_diffusion(&rho, &c), Err(Error::DimensionMismatch { .. })));
    }
}
