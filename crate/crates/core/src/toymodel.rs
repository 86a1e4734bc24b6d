//! Analytic entropy model for the baker map with strong diffusion.
//!
//! After `t` steps the density matrix is modelled by an element census: `2^t`
//! diagonal entries of value `2^{−t}` and, for each `n = 1..t`, `2^{t+n−1}`
//! off-diagonal entries of value `2^{−t}(1−α)^n`. Summing squares gives
//!
//! ```text
//! Tr ρ² = 2^{−t} [1 + (1−α)² (x^t − 1)/(x − 1)],   x = 2(1−α)²
//! ```
//!
//! The entropy slope saturates at `ln 2` above `α_c = 1 − 2^{−1/2}` and equals
//! `−2 ln(1−α)` below it.

use std::f64::consts::LN_2;

use crate::{Error, Result};

/// Coupling and iteration count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyModelParams {
    alpha: f64,
    t: u32,
}

impl ToyModelParams {
    pub fn new(alpha: f64, t: u32) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::domain(format!("coupling alpha = {alpha} is outside [0, 1]")));
        }
        Ok(Self { alpha, t })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn t(&self) -> u32 {
        self.t
    }
}

/// `ln Tr ρ²` from the closed form, evaluated in log space.
fn log_purity(p: &ToyModelParams) -> f64 {
    let t = p.t as f64;
    let r2 = (1.0 - p.alpha).powi(2);
    let x = 2.0 * r2;
    let tln2 = t * LN_2;
    if r2 == 0.0 || p.t == 0 {
        return -tln2;
    }
    let dx = x - 1.0;
    if dx.abs() < 1e-9 {
        // first-order expansion of the geometric sum around x = 1
        let s = t * (1.0 + 0.5 * (t - 1.0) * dx);
        return -tln2 + (1.0 + r2 * s).ln();
    }
    if x < 1.0 {
        let s = (1.0 - x.powf(t)) / (1.0 - x);
        -tln2 + (1.0 + r2 * s).ln()
    } else {
        // bracket ≈ r2 x^t / (x−1) for large t; keep it factored
        let lx = t * x.ln();
        let head = (r2 / dx).ln() + lx;
        let tail = (1.0 + (-lx).exp() * (dx / r2 - 1.0)).ln();
        -tln2 + head + tail
    }
}

/// Purity `Tr ρ²` of the census model.
pub fn toy_purity(params: &ToyModelParams) -> f64 {
    log_purity(params).exp()
}

/// Linear entropy `−ln Tr ρ²` of the census model.
pub fn toy_entropy(params: &ToyModelParams) -> f64 {
    -log_purity(params)
}

/// `α_c = 1 − 2^{−1/2}`, where `2(1−α)² = 1`.
pub fn alpha_critical() -> f64 {
    1.0 - std::f64::consts::FRAC_1_SQRT_2
}

/// Large-t entropy slope `min(ln 2, −2 ln(1−α))`.
pub fn asymptotic_slope(alpha: f64) -> f64 {
    if alpha >= 1.0 {
        return LN_2;
    }
    (-2.0 * (1.0 - alpha).ln()).min(LN_2)
}

/// Entropy series `S(0..=t_max)`.
pub fn toy_series(alpha: f64, t_max: u32) -> Result<Vec<f64>> {
    (0..=t_max)
        .map(|t| ToyModelParams::new(alpha, t).map(|p| toy_entropy(&p)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn census_purity(alpha: f64, t: u32) -> f64 {
        let two = 2f64;
        let mut sum = two.powi(t as i32) * two.powi(-(t as i32)).powi(2);
        for n in 1..=t as i32 {
            let count = two.powi(t as i32 + n - 1);
            let value = two.powi(-(t as i32)) * (1.0 - alpha).powi(n);
            sum += count * value * value;
        }
        sum
    }

    fn s(alpha: f64, t: u32) -> f64 {
        toy_entropy(&ToyModelParams::new(alpha, t).unwrap())
    }

    #[test]
    fn pure_at_start_and_without_coupling() {
        assert_eq!(toy_purity(&ToyModelParams::new(0.4, 0).unwrap()), 1.0);
        for t in [0, 1, 5, 30, 200] {
            assert!(s(0.0, t).abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn closed_form_matches_census() {
        for alpha in [0.05, 0.1, 0.25, alpha_critical(), 0.3, 0.5, 0.8, 0.99, 1.0] {
            for t in 0..=30 {
                let p = ToyModelParams::new(alpha, t).unwrap();
                let want = census_purity(alpha, t);
                let got = toy_purity(&p);
                assert!(
                    ((got - want) / want).abs() < 1e-12,
                    "alpha {alpha} t {t}: {got} vs {want}"
                );
            }
        }
        let p = ToyModelParams::new(0.5, 6).unwrap();
        assert!((toy_purity(&p) - census_purity(0.5, 6)).abs() < 1e-15);
    }

    #[test]
    fn branch_slopes() {
        assert!((s(0.8, 11) - s(0.8, 10) - LN_2).abs() < 1e-3);
        let weak = s(0.1, 401) - s(0.1, 400);
        assert!((weak + 2.0 * 0.9f64.ln()).abs() < 1e-3);
        assert!((-2.0 * 0.9f64.ln() - 0.2107).abs() < 1e-4);
    }

    #[test]
    fn critical_coupling() {
        let a = alpha_critical();
        assert!(a > 0.29 && a < 0.30);
        assert!((2.0 * (1.0 - a).powi(2) - 1.0).abs() < 1e-15);
        assert!((asymptotic_slope(a) - LN_2).abs() < 1e-15);
        // slope approaches ln 2 from both sides
        let below = asymptotic_slope(a - 1e-6);
        let above = asymptotic_slope(a + 1e-6);
        assert!((below - LN_2).abs() < 1e-5 && (above - LN_2).abs() < 1e-15);
        let at = s(a, 4001) - s(a, 4000);
        assert!((at - LN_2).abs() < 1e-3);
    }

    #[test]
    fn large_t_is_finite() {
        for alpha in [0.01, 0.2, 0.5, 0.9] {
            let v = s(alpha, 5000);
            assert!(v.is_finite() && v > 0.0);
        }
    }

    #[test]
    fn slope_grid_at_t40() {
        let mut alpha = 0.0;
        while alpha < 1.0 - 1e-9 {
            let fd = s(alpha, 41) - s(alpha, 40);
            let gap = (alpha - alpha_critical()).abs();
            if gap > 0.04 {
                assert!(
                    (fd - asymptotic_slope(alpha)).abs() < 1e-3,
                    "alpha {alpha}: {fd} vs {}",
                    asymptotic_slope(alpha)
                );
            }
            alpha += 0.02;
        }
    }

    #[test]
    fn monotone_in_t_and_alpha() {
        for i in 0..50 {
            let alpha = i as f64 * 0.02;
            for t in 0..60 {
                assert!(s(alpha, t + 1) >= s(alpha, t) - 1e-12);
                assert!(s(alpha + 0.02, t) >= s(alpha, t) - 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_alpha() {
        assert!(ToyModelParams::new(1.5, 2).is_err());
        assert!(ToyModelParams::new(-0.5, 2).is_err());
    }
}
