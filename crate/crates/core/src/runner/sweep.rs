//! Parameter sweeps over coupling grids or dimension lists.

use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::runner::config::ExperimentConfig;
use crate::runner::experiment::{run_experiment, EntropySeries};
use crate::runner::fit::{fit_slope, FitOutcome, WindowPolicy};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    Alpha(Vec<f64>),
    N(Vec<usize>),
}

impl SweepAxis {
    pub fn len(&self) -> usize {
        match self {
            SweepAxis::Alpha(v) => v.len(),
            SweepAxis::N(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `start:stop:step` (inclusive, empty when `start > stop`) or a comma list.
fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse()
            .map_err(|_| Error::config("axis", format!("cannot parse `{s}`")))
    };
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [a, b, c] => {
            let (start, stop, step) = (num(a)?, num(b)?, num(c)?);
            if !(step > 0.0) {
                return Err(Error::config("axis", "grid step must be positive"));
            }
            if start > stop {
                return Ok(Vec::new());
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            // round to the step's decimal resolution so 0.05·k prints as written
            Ok((0..count).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect())
        }
        [single] => single.split(',').filter(|s| !s.trim().is_empty()).map(num).collect(),
        _ => Err(Error::config("axis", format!("expected start:stop:step or a list, got `{text}`"))),
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    /// `alpha=0.05:0.95:0.05`, `alpha=0.1,0.5`, or `n=64,128,256`.
    fn from_str(s: &str) -> Result<Self> {
        let (key, grid) = s
            .split_once('=')
            .ok_or_else(|| Error::config("axis", format!("expected name=values, got `{s}`")))?;
        match key.trim().to_ascii_lowercase().as_str() {
            "alpha" => {
                let values = parse_grid(grid)?;
                if let Some(a) = values.iter().find(|a| !(0.0..=1.0).contains(*a)) {
                    return Err(Error::config("axis", format!("alpha = {a} is outside [0, 1]")));
                }
                Ok(SweepAxis::Alpha(values))
            }
            "n" => {
                let values = parse_grid(grid)?;
                values
                    .iter()
                    .map(|v| {
                        if *v >= 1.0 && v.fract() == 0.0 {
                            Ok(*v as usize)
                        } else {
                            Err(Error::config("axis", format!("N = {v} is not a positive integer")))
                        }
                    })
                    .collect::<Result<_>>()
                    .map(SweepAxis::N)
            }
            other => Err(Error::config("axis", format!("unknown sweep axis `{other}`"))),
        }
    }
}

/// One grid point: its axis value and the run's series, or the error it met.
#[derive(Debug)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: Result<EntropySeries>,
}

#[derive(Debug)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub policy: WindowPolicy,
    pub rows: Vec<SweepRow>,
}

/// Runs the template at every axis value, in parallel. Per-run errors are
/// kept in their row and do not stop the sweep.
pub fn sweep(template: &ExperimentConfig, axis: &SweepAxis) -> SweepTable {
    let configs: Vec<(f64, ExperimentConfig)> = match axis {
        SweepAxis::Alpha(values) => values
            .iter()
            .map(|a| (*a, ExperimentConfig { alpha: *a, ..template.clone() }))
            .collect(),
        SweepAxis::N(values) => values
            .iter()
            .map(|n| (*n as f64, ExperimentConfig { n: *n, ..template.clone() }))
            .collect(),
    };
    let rows = configs
        .into_par_iter()
        .map(|(value, mut config)| {
            // snapshots are not part of sweep output
            config.outputs.retain(|o| !matches!(o, crate::runner::config::OutputRequest::WignerEvery(_)));
            SweepRow {
                value,
                outcome: run_experiment(&config).map(|o| o.series),
            }
        })
        .collect();
    SweepTable {
        axis: axis.clone(),
        policy: template.slope_policy().unwrap_or_default(),
        rows,
    }
}

impl SweepTable {
    /// Fitted slope per row, `None` for failed runs.
    pub fn slopes(&self) -> Vec<Option<FitOutcome>> {
        self.rows
            .iter()
            .map(|r| r.outcome.as_ref().ok().map(|s| fit_slope(s, self.policy)))
            .collect()
    }

    /// Alpha sweeps: `alpha,slope,window_start,window_end,error`.
    /// N sweeps: `n,t,t_over_ln_n,s_over_ln_n,error`, the rescaled curves.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        let mut text = String::new();
        match self.axis {
            SweepAxis::Alpha(_) => {
                text.push_str("alpha,slope,window_start,window_end,error\n");
                for (row, fit) in self.rows.iter().zip(self.slopes()) {
                    match (&row.outcome, fit) {
                        (Err(e), _) => text.push_str(&format!("{:.16e},,,,{}\n", row.value, csv_escape(&e.to_string()))),
                        (Ok(_), Some(FitOutcome::Fit(f))) => text.push_str(&format!(
                            "{:.16e},{:.16e},{},{},\n",
                            row.value, f.slope, f.window.0, f.window.1
                        )),
                        (Ok(_), _) => text.push_str(&format!("{:.16e},,,,no linear regime\n", row.value)),
                    }
                }
            }
            SweepAxis::N(_) => {
                text.push_str("n,t,t_over_ln_n,s_over_ln_n,error\n");
                for row in &self.rows {
                    match &row.outcome {
                        Err(e) => text.push_str(&format!("{},,,,{}\n", row.value, csv_escape(&e.to_string()))),
                        Ok(series) => {
                            let ln_n = (series.n() as f64).ln();
                            for r in series.records() {
                                text.push_str(&format!(
                                    "{},{},{:.16e},{:.16e},\n",
                                    series.n(),
                                    r.t,
                                    r.t as f64 / ln_n,
                                    r.s_quantum / ln_n
                                ));
                            }
                        }
                    }
                }
            }
        }
        out.write_all(text.as_bytes())?;
        Ok(())
    }
}

fn csv_escape(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// Largest pointwise spread of `S/ln N` between rescaled curves
/// `(t/ln N, S/ln N)`, compared on `samples` points of the shared abscissa
/// range by linear interpolation, where every curve is below `upper`.
pub fn collapse_spread(curves: &[&EntropySeries], upper: f64, samples: usize) -> Option<f64> {
    let rescaled: Vec<(Vec<f64>, Vec<f64>)> = curves
        .iter()
        .map(|s| {
            let ln_n = (s.n() as f64).ln();
            s.records()
                .iter()
                .map(|r| (r.t as f64 / ln_n, r.s_quantum / ln_n))
                .unzip()
        })
        .collect();
    let x_max = rescaled
        .iter()
        .map(|(x, _)| x.last().copied())
        .collect::<Option<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if rescaled.len() < 2 || samples < 2 {
        return None;
    }
    let mut worst: Option<f64> = None;
    for k in 0..samples {
        let x = x_max * k as f64 / (samples - 1) as f64;
        let ys: Vec<f64> = rescaled.iter().map(|(xs, ys)| interpolate(xs, ys, x)).collect();
        let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
        if hi < upper {
            worst = Some(worst.map_or(hi - lo, |w: f64| w.max(hi - lo)));
        }
    }
    worst
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let k = xs.partition_point(|v| *v <= x);
    if k == 0 {
        return ys[0];
    }
    if k >= xs.len() {
        return ys[xs.len() - 1];
    }
    let (x0, x1) = (xs[k - 1], xs[k]);
    ys[k - 1] + (ys[k] - ys[k - 1]) * (x - x0) / (x1 - x0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing() {
        let a: SweepAxis = "alpha=0.05:0.95:0.05".parse().unwrap();
        match a {
            SweepAxis::Alpha(v) => {
                assert_eq!(v.len(), 19);
                assert_eq!(v[0], 0.05);
                assert_eq!(v[18], 0.95);
                assert_eq!(v[5], 0.3);
            }
            _ => panic!(),
        }
        assert_eq!("n=64,128,256".parse::<SweepAxis>().unwrap(), SweepAxis::N(vec![64, 128, 256]));
        assert_eq!("alpha=0.5:0.1:0.1".parse::<SweepAxis>().unwrap(), SweepAxis::Alpha(vec![]));
        assert_eq!("alpha=".parse::<SweepAxis>().unwrap(), SweepAxis::Alpha(vec![]));
        assert!("alpha=0:1:0".parse::<SweepAxis>().is_err());
        assert!("alpha=0.5,1.5".parse::<SweepAxis>().is_err());
        assert!("n=12.5".parse::<SweepAxis>().is_err());
        assert!("beta=1".parse::<SweepAxis>().is_err());
        assert!("alpha".parse::<SweepAxis>().is_err());
    }

    #[test]
    fn empty_sweep() {
        let t = sweep(&ExperimentConfig::baker(16, 0.1, 5), &SweepAxis::Alpha(vec![]));
        assert!(t.rows.is_empty());
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "alpha,slope,window_start,window_end,error\n");
    }

    #[test]
    fn per_row_errors_do_not_stop_the_sweep() {
        let t = sweep(&ExperimentConfig::baker(16, 0.6, 12), &SweepAxis::N(vec![16, 15, 32]));
        assert!(t.rows[0].outcome.is_ok());
        assert!(t.rows[1].outcome.is_err());
        assert!(t.rows[2].outcome.is_ok());
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().any(|l| l.starts_with("15,,,,\"config error")));
        assert_eq!(text.lines().filter(|l| l.starts_with("32,")).count(), 13);
    }

    #[test]
    fn alpha_rows_in_order() {
        let t = sweep(&ExperimentConfig::baker(32, 0.0, 20), &SweepAxis::Alpha(vec![0.2, 0.6, 0.9]));
        let values: Vec<f64> = t.rows.iter().map(|r| r.value).collect();
        assert_eq!(values, vec![0.2, 0.6, 0.9]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 4);
    }

    #[test]
    fn collapse_of_identical_and_shifted_curves() {
        let s = |n: usize, f: &dyn Fn(f64) -> f64| {
            let ln = (n as f64).ln();
            let v: Vec<f64> = (0..40).map(|t| f(t as f64 / ln) * ln).collect();
            EntropySeries::from_values(n, &v)
        };
        let a = s(64, &|x| (0.5 * x).min(0.9));
        let b = s(256, &|x| (0.5 * x).min(0.9));
        assert!(collapse_spread(&[&a, &b], 0.75, 400).unwrap() < 1e-12);
        let c = s(256, &|x| (0.5 * x + 0.05).min(0.9));
        let d = collapse_spread(&[&a, &c], 0.75, 400).unwrap();
        assert!((d - 0.05).abs() < 1e-12);
    }
}
