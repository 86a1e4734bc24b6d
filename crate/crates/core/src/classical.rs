//! Classical counterparts on the unit torus: point maps, Liouville transport
//! of a cell-mass grid, the matching diffusion stencil and a linear entropy.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::channel::DiffusionChannel;
use crate::maps::MapKind;
use crate::wigner::shift_stencil;
use crate::{Error, Result};

const MASS_TOL: f64 = 1e-12;

/// Nonnegative cell masses on a `G × G` grid, row-major with index `i·G + j`
/// where `i` is the position cell and `j` the momentum cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalDensity {
    grid: usize,
    values: Vec<f64>,
}

impl ClassicalDensity {
    /// Validates shape, nonnegativity and unit mass.
    pub fn new(grid: usize, values: Vec<f64>) -> Result<Self> {
        if grid == 0 {
            return Err(Error::domain("classical grid must have at least one cell"));
        }
        if values.len() != grid * grid {
            return Err(Error::DimensionMismatch {
                expected: grid * grid,
                found: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::domain(format!("negative or non-finite cell mass {v}")));
        }
        let mass: f64 = values.iter().sum();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::domain(format!("total mass {mass} is not 1")));
        }
        Ok(Self { grid, values })
    }

    pub fn uniform(grid: usize) -> Result<Self> {
        let cells = grid * grid;
        Self::new(grid, vec![1.0 / cells as f64; cells])
    }

    /// Unit mass in cell `(i, j)`.
    pub fn delta(grid: usize, i: usize, j: usize) -> Result<Self> {
        if i >= grid || j >= grid {
            return Err(Error::domain(format!("cell ({i}, {j}) outside a {grid}x{grid} grid")));
        }
        let mut values = vec![0.0; grid * grid];
        values[i * grid + j] = 1.0;
        Self::new(grid, values)
    }

    /// Periodized Gaussian `∝ exp(−2πN[(q−q0)² + (p−p0)²])` sampled at cell
    /// centres: the phase-space density of a coherent state at `ħ = 1/(2πN)`.
    pub fn gaussian(grid: usize, q0: f64, p0: f64, n: usize) -> Result<Self> {
        let width = TAU * n as f64;
        let profile = |centre: f64| -> Vec<f64> {
            (0..grid)
                .map(|i| {
                    let x = (i as f64 + 0.5) / grid as f64;
                    (-3..=3)
                        .map(|m| (-width * (x - centre + m as f64).powi(2)).exp())
                        .sum()
                })
                .collect()
        };
        let fq = profile(q0);
        let fp = profile(p0);
        let mut values: Vec<f64> = fq.iter().flat_map(|a| fp.iter().map(move |b| a * b)).collect();
        let total: f64 = values.iter().sum();
        values.iter_mut().for_each(|v| *v /= total);
        Self::new(grid, values)
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Mass of cell `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid + j]
    }

    /// Sum of absolute cell differences.
    pub fn l1_distance(&self, other: &ClassicalDensity) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::DimensionMismatch {
                expected: self.grid,
                found: other.grid,
            });
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).sum())
    }
}

/// `q' = 2q − ⌊2q⌋`, `p' = (p + ⌊2q⌋)/2`.
pub fn classical_baker_point(q: f64, p: f64) -> (f64, f64) {
    let b = (2.0 * q).floor();
    (2.0 * q - b, (p + b) / 2.0)
}

pub fn classical_baker_inverse(q: f64, p: f64) -> (f64, f64) {
    let b = (2.0 * p).floor();
    ((q + b) / 2.0, 2.0 * p - b)
}

/// `q' = q − γ sin 2πp`, then `p' = p + γ sin 2πq'`, both mod 1.
pub fn classical_harper_point(q: f64, p: f64, gamma: f64) -> (f64, f64) {
    let q1 = q - gamma * (TAU * p).sin();
    let p1 = p + gamma * (TAU * q1).sin();
    (q1.rem_euclid(1.0), p1.rem_euclid(1.0))
}

pub fn classical_harper_inverse(q: f64, p: f64, gamma: f64) -> (f64, f64) {
    let p0 = p - gamma * (TAU * q).sin();
    let q0 = q + gamma * (TAU * p0).sin();
    (q0.rem_euclid(1.0), p0.rem_euclid(1.0))
}

/// One step of Liouville transport under the classical map.
pub fn classical_grid_step(rho: &ClassicalDensity, map: &MapKind) -> Result<ClassicalDensity> {
    match *map {
        MapKind::Baker => baker_transport(rho),
        MapKind::Harper { gamma } => Ok(harper_transport(rho, gamma)),
    }
}

/// Cells `(i, 2m)` and `(i, 2m+1)` are compressed into half of momentum cell
/// `m + b·G/2` and stretched over position cells `2i`, `2i+1` (mod G), where
/// `b = 1` on the right half of the square.
fn baker_transport(rho: &ClassicalDensity) -> Result<ClassicalDensity> {
    let g = rho.grid;
    if g % 2 != 0 {
        return Err(Error::domain(format!("baker transport needs an even grid, got G = {g}")));
    }
    let half = g / 2;
    let mut out = vec![0.0; g * g];
    for i in 0..g {
        let b = usize::from(i >= half);
        let rows = [(2 * i) % g, (2 * i + 1) % g];
        for m in 0..half {
            let pair = rho.values[i * g + 2 * m] + rho.values[i * g + 2 * m + 1];
            let col = m + b * half;
            for r in rows {
                out[r * g + col] += 0.5 * pair;
            }
        }
    }
    Ok(ClassicalDensity { grid: g, values: out })
}

/// Backward semi-Lagrangian step: each cell centre takes the bilinear
/// interpolant of the old density at its preimage, then mass is renormalized.
fn harper_transport(rho: &ClassicalDensity, gamma: f64) -> ClassicalDensity {
    let g = rho.grid;
    let gf = g as f64;
    let mut out = vec![0.0; g * g];
    out.par_chunks_mut(g).enumerate().for_each(|(i, row)| {
        let q = (i as f64 + 0.5) / gf;
        for (j, v) in row.iter_mut().enumerate() {
            let p = (j as f64 + 0.5) / gf;
            let (q0, p0) = classical_harper_inverse(q, p, gamma);
            *v = bilinear(&rho.values, g, q0, p0);
        }
    });
    let total: f64 = out.iter().sum();
    if total > 0.0 {
        out.iter_mut().for_each(|v| *v /= total);
    }
    ClassicalDensity { grid: g, values: out }
}

/// Periodic bilinear interpolation of cell-centred values.
fn bilinear(values: &[f64], g: usize, q: f64, p: f64) -> f64 {
    let x = q * g as f64 - 0.5;
    let y = p * g as f64 - 0.5;
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let gi = g as i64;
    let i0 = (x0 as i64).rem_euclid(gi) as usize;
    let j0 = (y0 as i64).rem_euclid(gi) as usize;
    let i1 = (i0 + 1) % g;
    let j1 = (j0 + 1) % g;
    let at = |i: usize, j: usize| values[i * g + j];
    (1.0 - fx) * ((1.0 - fy) * at(i0, j0) + fy * at(i0, j1))
        + fx * ((1.0 - fy) * at(i1, j0) + fy * at(i1, j1))
}

/// The Wigner-space diffusion stencil on the classical grid: a displacement
/// by `(dq, dp)` moves mass `dq·G/N` and `dp·G/N` cells.
pub fn classical_diffuse(rho: &ClassicalDensity, channel: &DiffusionChannel) -> Result<ClassicalDensity> {
    let g = rho.grid;
    let n = channel.spec().n();
    if g % n != 0 {
        return Err(Error::domain(format!(
            "classical grid G = {g} must be a multiple of N = {n} to carry the diffusion stencil"
        )));
    }
    let values = shift_stencil(&rho.values, g, channel, (g / n) as i64);
    Ok(ClassicalDensity { grid: g, values })
}

/// `S_c = −ln Σ w²`: 0 for a single occupied cell, `2 ln G` when uniform.
pub fn classical_linear_entropy(rho: &ClassicalDensity) -> f64 {
    -rho.values.iter().map(|w| w * w).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::PhaseSpaceSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Circular mean of a coordinate on the unit circle, in `[0, 1)`.
    fn circular_mean(weights: impl Iterator<Item = (f64, f64)>) -> f64 {
        let (s, c) = weights.fold((0.0, 0.0), |(s, c), (x, w)| {
            (s + w * (TAU * x).sin(), c + w * (TAU * x).cos())
        });
        (s.atan2(c) / TAU).rem_euclid(1.0)
    }

    fn close(a: (f64, f64), b: (f64, f64), tol: f64) -> bool {
        (a.0 - b.0).abs() < tol && (a.1 - b.1).abs() < tol
    }

    #[test]
    fn baker_point_examples() {
        assert!(close(classical_baker_point(0.3, 0.6), (0.6, 0.3), 1e-15));
        assert!(close(classical_baker_point(0.7, 0.2), (0.4, 0.6), 1e-15));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let (q, p) = (rng.random::<f64>(), rng.random::<f64>());
            let (a, b) = classical_baker_point(q, p);
            assert!(close(classical_baker_inverse(a, b), (q, p), 1e-15));
        }
    }

    #[test]
    fn harper_point_examples() {
        assert_eq!(classical_harper_point(0.3, 0.8, 0.0), (0.3, 0.8));
        assert!(close(classical_harper_point(0.25, 0.0, 0.2), (0.25, 0.2), 1e-15));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let (q, p) = (rng.random::<f64>(), rng.random::<f64>());
            let (a, b) = classical_harper_point(q, p, 0.37);
            let (c, d) = classical_harper_inverse(a, b, 0.37);
            let wrap = |x: f64| x.min(1.0 - x);
            assert!(wrap((c - q).rem_euclid(1.0)) < 1e-13);
            assert!(wrap((d - p).rem_euclid(1.0)) < 1e-13);
        }
    }

    #[test]
    fn harper_jacobian_is_one() {
        // unwrapped map, so finite differences see no jumps
        let f = |q: f64, p: f64, g: f64| {
            let q1 = q - g * (TAU * p).sin();
            (q1, p + g * (TAU * q1).sin())
        };
        // five-point central differences
        let diff = |g: &dyn Fn(f64) -> (f64, f64), x: f64| {
            let h = 1e-4;
            let (a, b, c, d) = (g(x - 2.0 * h), g(x - h), g(x + h), g(x + 2.0 * h));
            let k = |m2: f64, m1: f64, p1: f64, p2: f64| (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
            (k(a.0, b.0, c.0, d.0), k(a.1, b.1, c.1, d.1))
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let (q, p) = (rng.random::<f64>(), rng.random::<f64>());
            let gamma = rng.random_range(0.0..0.6);
            let (a, c) = diff(&|x| f(x, p, gamma), q);
            let (b, d) = diff(&|y| f(q, y, gamma), p);
            assert!((a * d - b * c - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn uniform_is_invariant() {
        let u = ClassicalDensity::uniform(16).unwrap();
        let b = classical_grid_step(&u, &MapKind::Baker).unwrap();
        assert!(b.values().iter().all(|v| (v - 1.0 / 256.0).abs() < 1e-15));
        let h = classical_grid_step(&u, &MapKind::Harper { gamma: 0.3 }).unwrap();
        assert!(h.values().iter().all(|v| (v - 1.0 / 256.0).abs() < 1e-15));
    }

    #[test]
    fn baker_hand_transport_g4() {
        let d = ClassicalDensity::delta(4, 0, 0).unwrap();
        let out = classical_grid_step(&d, &MapKind::Baker).unwrap();
        let mut want = vec![0.0; 16];
        want[0] = 0.5; // (0, 0)
        want[4] = 0.5; // (1, 0)
        assert_eq!(out.values(), &want[..]);

        // (3, 1) lies in the right half: q' ∈ [0.5, 1), p' ∈ [0.625, 0.75)
        let d = ClassicalDensity::delta(4, 3, 1).unwrap();
        let out = classical_grid_step(&d, &MapKind::Baker).unwrap();
        let mut want = vec![0.0; 16];
        want[2 * 4 + 2] = 0.5;
        want[3 * 4 + 2] = 0.5;
        assert_eq!(out.values(), &want[..]);
    }

    #[test]
    fn baker_transport_matches_point_map() {
        // every sub-cell sample point lands in a cell that receives mass
        let g = 8;
        for i in 0..g {
            for j in 0..g {
                let d = ClassicalDensity::delta(g, i, j).unwrap();
                let out = classical_grid_step(&d, &MapKind::Baker).unwrap();
                for s in 0..4 {
                    let q = (i as f64 + 0.125 + 0.25 * s as f64) / g as f64;
                    let p = (j as f64 + 0.5) / g as f64;
                    let (a, b) = classical_baker_point(q, p);
                    let cell = (a * g as f64) as usize * g + (b * g as f64) as usize;
                    assert!(out.values()[cell] > 0.0);
                }
            }
        }
    }

    #[test]
    fn baker_rejects_odd_grid_and_stays_nonnegative() {
        let d = ClassicalDensity::uniform(5).unwrap();
        assert!(classical_grid_step(&d, &MapKind::Baker).is_err());
        let mut rho = ClassicalDensity::gaussian(32, 0.3, 0.4, 16).unwrap();
        for _ in 0..200 {
            rho = classical_grid_step(&rho, &MapKind::Baker).unwrap();
            assert!(rho.values().iter().all(|v| *v >= 0.0));
            assert!((rho.mass() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn harper_gamma_zero_and_mass() {
        let rho = ClassicalDensity::gaussian(24, 0.2, 0.7, 12).unwrap();
        let same = classical_grid_step(&rho, &MapKind::Harper { gamma: 0.0 }).unwrap();
        let diff = same.values().iter().zip(rho.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
        let mut r = rho;
        for _ in 0..30 {
            r = classical_grid_step(&r, &MapKind::Harper { gamma: 0.45 }).unwrap();
            assert!((r.mass() - 1.0).abs() < 1e-12);
            assert!(r.values().iter().all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn harper_transport_follows_centroid() {
        let n = 64;
        let rho = ClassicalDensity::gaussian(256, 0.3, 0.2, n).unwrap();
        let out = classical_grid_step(&rho, &MapKind::Harper { gamma: 0.05 }).unwrap();
        let g = rho.grid();
        let cq = |r: &ClassicalDensity| {
            circular_mean((0..g * g).map(|k| ((k / g) as f64 / g as f64 + 0.5 / g as f64, r.values()[k])))
        };
        let cp = |r: &ClassicalDensity| {
            circular_mean((0..g * g).map(|k| ((k % g) as f64 / g as f64 + 0.5 / g as f64, r.values()[k])))
        };
        let (q1, p1) = classical_harper_point(cq(&rho), cp(&rho), 0.05);
        assert!((cq(&out) - q1).abs() < 2e-3);
        assert!((cp(&out) - p1).abs() < 2e-3);
    }

    #[test]
    fn diffusion_stencil() {
        let spec = PhaseSpaceSpec::new(4).unwrap();
        let d = ClassicalDensity::delta(8, 3, 3).unwrap();
        let c = DiffusionChannel::along_momentum(&spec, 0.0, 1).unwrap();
        assert_eq!(classical_diffuse(&d, &c).unwrap(), d);
        let c = DiffusionChannel::along_momentum(&spec, 0.5, 1).unwrap();
        let out = classical_diffuse(&d, &c).unwrap();
        assert_eq!(out.get(3, 3), 0.5);
        assert_eq!(out.get(3, 5), 0.25);
        assert_eq!(out.get(3, 1), 0.25);
        assert_eq!(out.mass(), 1.0);
        let c = DiffusionChannel::along_position(&spec, 0.5, 1).unwrap();
        let out = classical_diffuse(&d, &c).unwrap();
        assert_eq!(out.get(5, 3), 0.25);
        assert_eq!(out.get(1, 3), 0.25);
        let bad = ClassicalDensity::uniform(6).unwrap();
        assert!(classical_diffuse(&bad, &c).is_err());
    }

    #[test]
    fn entropy_anchors_and_monotone() {
        let g = 8;
        assert_eq!(classical_linear_entropy(&ClassicalDensity::delta(g, 2, 5).unwrap()), 0.0);
        let u = classical_linear_entropy(&ClassicalDensity::uniform(g).unwrap());
        assert!((u - 2.0 * (g as f64).ln()).abs() < 1e-12);
        let rho = ClassicalDensity::gaussian(g, 0.4, 0.1, 4).unwrap();
        let brute: f64 = {
            let mut s = 0.0;
            for i in 0..g {
                for j in 0..g {
                    s += rho.get(i, j) * rho.get(i, j);
                }
            }
            -s.ln()
        };
        assert!((classical_linear_entropy(&rho) - brute).abs() < 1e-14);
        let spec = PhaseSpaceSpec::new(4).unwrap();
        let c = DiffusionChannel::new(&spec, 0.3, 2, 1, 1).unwrap();
        let mut r = rho;
        for _ in 0..20 {
            let next = classical_diffuse(&r, &c).unwrap();
            assert!(classical_linear_entropy(&next) >= classical_linear_entropy(&r) - 1e-12);
            r = next;
        }
    }

    #[test]
    fn validation() {
        assert!(ClassicalDensity::new(2, vec![0.5, 0.5, 0.0]).is_err());
        assert!(ClassicalDensity::new(2, vec![0.5, 0.6, 0.0, -0.1]).is_err());
        assert!(ClassicalDensity::new(2, vec![0.5, 0.6, 0.0, 0.0]).is_err());
        assert!(ClassicalDensity::delta(2, 2, 0).is_err());
    }
}
