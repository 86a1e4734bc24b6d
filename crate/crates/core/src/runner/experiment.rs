//! The evolution loop: unitary step, diffusive step, record.

use std::io::Write;

use crate::channel::apply_diffusion;
use crate::classical::{classical_diffuse, classical_grid_step, classical_linear_entropy, ClassicalDensity};
use crate::kinematics::{basis_state, coherent_state, linear_entropy, Basis, DensityMatrix, PhaseSpaceSpec};
use crate::maps::{propagator, unitary_step};
use crate::runner::config::{ExperimentConfig, InitialState};
use crate::runner::fit::{fit_slope, FitOutcome};
use crate::wigner::{wigner_transform, WignerGrid};
use crate::{Error, Result};

/// Largest tolerated `|Tr ρ − 1|` before a run is aborted.
pub const TRACE_RESIDUAL_LIMIT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub s_quantum: f64,
    pub s_classical: Option<f64>,
    pub trace_residual: f64,
}

/// Entropy per map iteration, starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropySeries {
    n: usize,
    records: Vec<StepRecord>,
}

impl EntropySeries {
    pub fn new(n: usize) -> Self {
        Self { n, records: Vec::new() }
    }

    /// Series from bare entropy values at `t = 0, 1, …`.
    pub fn from_values(n: usize, values: &[f64]) -> Self {
        let records = values
            .iter()
            .enumerate()
            .map(|(t, s)| StepRecord {
                t,
                s_quantum: *s,
                s_classical: None,
                trace_residual: 0.0,
            })
            .collect();
        Self { n, records }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn quantum(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.s_quantum).collect()
    }

    pub fn classical(&self) -> Option<Vec<f64>> {
        self.records.iter().map(|r| r.s_classical).collect()
    }

    pub fn max_trace_residual(&self) -> f64 {
        self.records.iter().map(|r| r.trace_residual).fold(0.0, f64::max)
    }

    /// Appends a record after checking the series invariants.
    pub fn push(&mut self, record: StepRecord) -> Result<()> {
        if let Some(last) = self.records.last() {
            if record.t <= last.t {
                return Err(Error::Numerical(format!("step {} does not follow step {}", record.t, last.t)));
            }
        } else if record.t != 0 {
            return Err(Error::Numerical("series must start at t = 0".into()));
        }
        let ceiling = (self.n as f64).ln() + 1e-9;
        if !(record.s_quantum >= -1e-10 && record.s_quantum <= ceiling) {
            return Err(Error::Numerical(format!(
                "entropy {} at t = {} is outside [0, ln N]",
                record.s_quantum, record.t
            )));
        }
        if !(record.trace_residual <= TRACE_RESIDUAL_LIMIT) {
            return Err(Error::Numerical(format!(
                "trace residual {:e} at t = {} exceeds {TRACE_RESIDUAL_LIMIT:e}",
                record.trace_residual, record.t
            )));
        }
        self.records.push(record);
        Ok(())
    }

    /// `t,s_quantum,s_classical,trace_residual` with 17 significant digits;
    /// the classical column is empty when not computed.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        let mut text = String::from("t,s_quantum,s_classical,trace_residual\n");
        for r in &self.records {
            let classical = r.s_classical.map(|v| format!("{v:.16e}")).unwrap_or_default();
            text.push_str(&format!("{},{:.16e},{},{:.16e}\n", r.t, r.s_quantum, classical, r.trace_residual));
        }
        out.write_all(text.as_bytes())?;
        Ok(())
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub series: EntropySeries,
    pub wigner: Vec<(usize, WignerGrid)>,
    pub classical: Vec<(usize, ClassicalDensity)>,
    pub fit: Option<FitOutcome>,
}

pub fn initial_density(spec: &PhaseSpaceSpec, initial: InitialState) -> Result<DensityMatrix> {
    let psi = match initial {
        InitialState::Coherent { q0, p0 } => coherent_state(spec, q0, p0),
        InitialState::Position(k) => basis_state(spec, Basis::Position, k)?,
        InitialState::Momentum(k) => basis_state(spec, Basis::Momentum, k)?,
    };
    DensityMatrix::pure(spec, &psi)
}

/// Classical density matching the initial quantum state on a `G × G` grid.
///
/// Eigenstates become a strip of unit mass at the eigenvalue, split evenly
/// between two cells when it falls on a cell boundary.
pub fn initial_classical(spec: &PhaseSpaceSpec, initial: InitialState, grid: usize) -> Result<ClassicalDensity> {
    let strip = |x: f64| -> Vec<(usize, f64)> {
        let c = x * grid as f64;
        if (c - c.round()).abs() < 1e-9 {
            let hi = (c.round() as usize) % grid;
            let lo = (hi + grid - 1) % grid;
            vec![(lo, 0.5), (hi, 0.5)]
        } else {
            vec![((c.floor() as usize) % grid, 1.0)]
        }
    };
    let mut values = vec![0.0; grid * grid];
    let share = 1.0 / grid as f64;
    match initial {
        InitialState::Coherent { q0, p0 } => return ClassicalDensity::gaussian(grid, q0, p0, spec.n()),
        InitialState::Position(k) => {
            for (i, w) in strip(spec.position_eigenvalue(k)) {
                values[i * grid..(i + 1) * grid].iter_mut().for_each(|v| *v += w * share);
            }
        }
        InitialState::Momentum(k) => {
            for (j, w) in strip(spec.momentum_eigenvalue(k)) {
                for i in 0..grid {
                    values[i * grid + j] += w * share;
                }
            }
        }
    }
    ClassicalDensity::new(grid, values)
}

/// Runs the configured evolution. No randomness enters, so identical configs
/// give bit-identical outputs.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let spec = config.spec()?;
    let u = propagator(&spec, config.map)?;
    let channel = config.channel()?;
    let mut rho = initial_density(&spec, config.initial)?;
    let every = config.wigner_every();
    let mut classical = if config.classical_parallel() {
        Some(initial_classical(&spec, config.initial, config.classical_grid_side())?)
    } else {
        None
    };

    let mut out = RunOutput {
        series: EntropySeries::new(spec.n()),
        wigner: Vec::new(),
        classical: Vec::new(),
        fit: None,
    };
    for t in 0..=config.steps {
        if t > 0 {
            rho = unitary_step(&rho, &u)?;
            rho = apply_diffusion(&rho, &channel)?;
            if let Some(c) = classical.as_mut() {
                *c = classical_diffuse(&classical_grid_step(c, &config.map)?, &channel)?;
            }
        }
        out.series.push(StepRecord {
            t,
            s_quantum: linear_entropy(&rho)?,
            s_classical: classical.as_ref().map(classical_linear_entropy),
            trace_residual: (rho.trace().re - 1.0).abs(),
        })?;
        if let Some(k) = every {
            if t % k == 0 {
                out.wigner.push((t, wigner_transform(&spec, &rho)?));
                if let Some(c) = &classical {
                    out.classical.push((t, c.clone()));
                }
            }
        }
    }
    out.fit = config.slope_policy().map(|p| fit_slope(&out.series, p));
    Ok(out)
}
