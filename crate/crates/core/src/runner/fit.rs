//! Least-squares entropy slopes over a selected window.

use super::experiment::EntropySeries;

/// How the fitting window is chosen. Thresholds are fractions of `ln N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowPolicy {
    /// Points from the first with `S > lower·ln N` up to, not including, the
    /// first later point with `S > upper·ln N`.
    Band {
        lower: f64,
        upper: f64,
        min_points: usize,
    },
    /// The steepest run of `width` consecutive points lying strictly inside
    /// `(lower·ln N, upper·ln N)`.
    Steepest { width: usize, lower: f64, upper: f64 },
    /// Fixed inclusive step range.
    Range { start: usize, end: usize },
}

impl Default for WindowPolicy {
    /// Pre-saturation band `0.1 ln N < S ≤ 0.75 ln N`, at least 4 points.
    fn default() -> Self {
        WindowPolicy::Band {
            lower: 0.1,
            upper: 0.75,
            min_points: 4,
        }
    }
}

impl WindowPolicy {
    /// Four-point windows inside `(0.1 ln N, 0.85 ln N)`.
    pub fn steepest() -> Self {
        WindowPolicy::Steepest {
            width: 4,
            lower: 0.1,
            upper: 0.85,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Inclusive step range used.
    pub window: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitOutcome {
    Fit(SlopeFit),
    NoLinearRegime,
}

impl FitOutcome {
    pub fn slope(&self) -> Option<f64> {
        match self {
            FitOutcome::Fit(f) => Some(f.slope),
            FitOutcome::NoLinearRegime => None,
        }
    }

    pub fn fit(&self) -> Option<&SlopeFit> {
        match self {
            FitOutcome::Fit(f) => Some(f),
            FitOutcome::NoLinearRegime => None,
        }
    }
}

/// Ordinary least squares of `y` against `x`; `None` below two distinct abscissae.
pub fn least_squares(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

fn fit_range(values: &[f64], start: usize, end: usize) -> Option<SlopeFit> {
    if end >= values.len() || end <= start {
        return None;
    }
    let x: Vec<f64> = (start..=end).map(|t| t as f64).collect();
    least_squares(&x, &values[start..=end]).map(|(slope, intercept)| SlopeFit {
        slope,
        intercept,
        window: (start, end),
    })
}

/// Inclusive step range the band policy selects, if it has `min_points`.
pub fn band_window(values: &[f64], scale: f64, lower: f64, upper: f64, min_points: usize) -> Option<(usize, usize)> {
    let start = values.iter().position(|s| *s > lower * scale)?;
    let stop = values[start..]
        .iter()
        .position(|s| *s > upper * scale)
        .map_or(values.len(), |k| start + k);
    (stop >= start + min_points.max(2)).then(|| (start, stop - 1))
}

/// Fits `S(t)` with `t = 0, 1, …`, thresholds measured in units of `scale`.
pub fn fit_values(values: &[f64], scale: f64, policy: WindowPolicy) -> FitOutcome {
    let fit = match policy {
        WindowPolicy::Band {
            lower,
            upper,
            min_points,
        } => band_window(values, scale, lower, upper, min_points).and_then(|(a, b)| fit_range(values, a, b)),
        WindowPolicy::Steepest { width, lower, upper } => {
            let width = width.max(2);
            (0..values.len().saturating_sub(width - 1))
                .filter(|&i| {
                    values[i..i + width]
                        .iter()
                        .all(|s| *s > lower * scale && *s < upper * scale)
                })
                .filter_map(|i| fit_range(values, i, i + width - 1))
                .fold(None, |best: Option<SlopeFit>, f| match best {
                    Some(b) if b.slope >= f.slope => Some(b),
                    _ => Some(f),
                })
        }
        WindowPolicy::Range { start, end } => fit_range(values, start, end),
    };
    fit.map_or(FitOutcome::NoLinearRegime, FitOutcome::Fit)
}

/// Slope of the quantum entropy with thresholds in units of `ln N`.
pub fn fit_slope(series: &EntropySeries, policy: WindowPolicy) -> FitOutcome {
    fit_values(&series.quantum(), (series.n() as f64).ln(), policy)
}

/// Intersection of the band windows of several series, for rate comparisons
/// over a shared range.
pub fn common_window(series: &[&EntropySeries], lower: f64, upper: f64) -> Option<(usize, usize)> {
    let mut out: Option<(usize, usize)> = None;
    for s in series {
        let values = s.quantum();
        let scale = (s.n() as f64).ln();
        let inside: Vec<usize> = (0..values.len())
            .filter(|&t| values[t] > lower * scale && values[t] < upper * scale)
            .collect();
        let (a, b) = (*inside.first()?, *inside.last()?);
        out = Some(match out {
            None => (a, b),
            Some((x, y)) => (x.max(a), y.min(b)),
        });
    }
    out.filter(|(a, b)| b > a)
}
