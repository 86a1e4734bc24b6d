//! Oracle equivalence checks between fast paths and their brute-force
//! definitions, small enough to run in a second.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{apply_diffusion, kraus_set, DiffusionChannel};
use crate::kinematics::{max_abs_diff, DensityMatrix, PhaseSpaceSpec};
use crate::maps::{baker_propagator, harper_propagator};
use crate::snapshot::{read_wigner, write_wigner};
use crate::toymodel::{toy_purity, ToyModelParams};
use crate::wigner::{wigner_diffuse, wigner_direct, wigner_transform};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub deviation: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.deviation <= self.tolerance
    }
}

fn spec(n: usize) -> Result<PhaseSpaceSpec> {
    PhaseSpaceSpec::new(n)
}

fn propagators() -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for n in [2, 8, 16, 64] {
        let s = spec(n)?;
        let rho = DensityMatrix::random(n, &mut rng);
        for u in [baker_propagator(&s)?, harper_propagator(&s, 0.45)] {
            let a = u.conjugate_factored(&rho)?;
            let b = u.conjugate_dense(&rho)?;
            worst = worst.max(max_abs_diff(a.elements(), b.elements()));
        }
    }
    Ok(worst)
}

fn diffusion() -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for (n, m, dq, dp) in [(8, 1, 0, 1), (8, 3, 1, 0), (9, 4, 1, 1), (16, 16, 0, 1), (12, 5, 2, -1)] {
        let s = spec(n)?;
        let c = DiffusionChannel::new(&s, 0.6, m, dq, dp)?;
        let rho = DensityMatrix::random(n, &mut rng);
        let fast = apply_diffusion(&rho, &c)?;
        let slow = kraus_set(&c).apply(&rho)?;
        worst = worst.max(max_abs_diff(fast.elements(), slow.elements()));
    }
    Ok(worst)
}

fn wigner_paths() -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for n in [3, 6, 8] {
        let s = spec(n)?;
        let rho = DensityMatrix::random(n, &mut rng);
        worst = worst.max(wigner_transform(&s, &rho)?.max_abs_diff(&wigner_direct(&s, &rho)?));
    }
    Ok(worst)
}

fn commuting_diagram() -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for (n, m, dq, dp) in [(8, 2, 0, 1), (10, 3, 1, 0), (12, 2, 1, 1)] {
        let s = spec(n)?;
        let c = DiffusionChannel::new(&s, 0.4, m, dq, dp)?;
        let rho = DensityMatrix::random(n, &mut rng);
        let lhs = wigner_transform(&s, &apply_diffusion(&rho, &c)?)?;
        let rhs = wigner_diffuse(&wigner_transform(&s, &rho)?, &c)?;
        worst = worst.max(lhs.max_abs_diff(&rhs));
    }
    Ok(worst)
}

fn toy_census() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for alpha in [0.1f64, 0.3, 0.5, 0.9] {
        for t in 0..20u32 {
            let mut census = 2f64.powi(-(t as i32));
            for n in 1..=t as i32 {
                census += 2f64.powi(n - t as i32 - 1) * (1.0 - alpha).powi(2 * n);
            }
            let p = toy_purity(&ToyModelParams::new(alpha, t)?);
            worst = worst.max(((p - census) / census).abs());
        }
    }
    Ok(worst)
}

fn snapshot_round_trip() -> Result<f64> {
    let s = spec(8)?;
    let rho = DensityMatrix::random(8, &mut ChaCha8Rng::seed_from_u64(5));
    let w = wigner_transform(&s, &rho)?;
    let mut buf = Vec::new();
    write_wigner(&mut buf, &w)?;
    let back = read_wigner(&mut buf.as_slice())?;
    let mismatches = back
        .values()
        .iter()
        .zip(w.values())
        .filter(|(a, b)| a.to_bits() != b.to_bits())
        .count();
    Ok(mismatches as f64)
}

/// Runs every check; an `Err` means a check could not be evaluated at all.
pub fn run_selftest() -> Result<Vec<CheckResult>> {
    let checks: [(&'static str, fn() -> Result<f64>, f64); 6] = [
        ("factored propagators match dense", propagators, 1e-10),
        ("diffusion fast path matches Kraus sum", diffusion, 1e-12),
        ("FFT Wigner transform matches trace definition", wigner_paths, 1e-10),
        ("Wigner diffusion commutes with transform", commuting_diagram, 1e-10),
        ("toy purity matches element census", toy_census, 1e-12),
        ("snapshot round trip is bit exact", snapshot_round_trip, 0.0),
    ];
    checks
        .iter()
        .map(|(name, f, tolerance)| {
            Ok(CheckResult {
                name,
                deviation: f()?,
                tolerance: *tolerance,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in run_selftest().unwrap() {
            assert!(c.passed(), "{}: {:e} > {:e}", c.name, c.deviation, c.tolerance);
        }
    }
}
