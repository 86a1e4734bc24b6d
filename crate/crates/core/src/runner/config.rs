//! Experiment configuration from flat `key = value` files.
//!
//! ```text
//! # baker map, momentum diffusion
//! map = baker            # or: harper, with gamma = 0.45
//! n = 128
//! initial = coherent     # q0, p0 default to 1/3; or: position / momentum with index = k
//! alpha = 0.6
//! terms = 1              # or N/32
//! direction = alpha_p    # alpha_q, or custom with dq, dp
//! steps = 40
//! outputs = entropy_series, slope_fit(steepest), wigner_every(5), classical_parallel
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::channel::DiffusionChannel;
use crate::kinematics::PhaseSpaceSpec;
use crate::maps::MapKind;
use crate::runner::fit::WindowPolicy;
use crate::{Error, Result};

/// Dimension used by `--paper-scale`.
pub const PAPER_SCALE_N: usize = 1594;

/// Default coherent-state centre, away from short periodic orbits.
pub const DEFAULT_CENTRE: (f64, f64) = (1.0 / 3.0, 1.0 / 3.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    Coherent { q0: f64, p0: f64 },
    Position(usize),
    Momentum(usize),
}

/// Diffusion direction: `alpha_q` displaces in position, `alpha_p` in momentum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    AlphaQ,
    AlphaP,
    Custom { dq: i64, dp: i64 },
}

impl Direction {
    pub fn vector(self) -> (i64, i64) {
        match self {
            Direction::AlphaQ => (1, 0),
            Direction::AlphaP => (0, 1),
            Direction::Custom { dq, dp } => (dq, dp),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::AlphaQ => write!(f, "alpha_q"),
            Direction::AlphaP => write!(f, "alpha_p"),
            Direction::Custom { dq, dp } => write!(f, "custom({dq},{dp})"),
        }
    }
}

/// Term count, fixed or as a fraction `N/k` of the dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terms {
    Fixed(usize),
    PerDimension(usize),
}

impl Terms {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            Terms::Fixed(m) => m,
            Terms::PerDimension(k) => (n / k).max(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutputRequest {
    EntropySeries,
    WignerEvery(usize),
    ClassicalParallel,
    SlopeFit(WindowPolicy),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub map: MapKind,
    pub n: usize,
    pub initial: InitialState,
    pub alpha: f64,
    pub terms: Terms,
    pub direction: Direction,
    pub steps: usize,
    /// Side of the classical grid; `None` means `2N`.
    pub classical_grid: Option<usize>,
    pub outputs: Vec<OutputRequest>,
}

impl ExperimentConfig {
    /// Baker map with momentum diffusion from the default coherent state.
    pub fn baker(n: usize, alpha: f64, steps: usize) -> Self {
        Self {
            map: MapKind::Baker,
            n,
            initial: InitialState::Coherent {
                q0: DEFAULT_CENTRE.0,
                p0: DEFAULT_CENTRE.1,
            },
            alpha,
            terms: Terms::Fixed(1),
            direction: Direction::AlphaP,
            steps,
            classical_grid: None,
            outputs: vec![OutputRequest::EntropySeries],
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("file", format!("cannot read {}: {e}", path.display())))?;
        text.parse()
    }

    pub fn spec(&self) -> Result<PhaseSpaceSpec> {
        PhaseSpaceSpec::new(self.n).map_err(|e| Error::config("n", e.to_string()))
    }

    pub fn channel(&self) -> Result<DiffusionChannel> {
        let spec = self.spec()?;
        let (dq, dp) = self.direction.vector();
        DiffusionChannel::new(&spec, self.alpha, self.terms.resolve(self.n), dq, dp).map_err(|e| {
            let field = if !(0.0..=1.0).contains(&self.alpha) {
                "alpha"
            } else if (dq, dp) == (0, 0) {
                "direction"
            } else {
                "terms"
            };
            Error::config(field, e.to_string())
        })
    }

    pub fn classical_grid_side(&self) -> usize {
        self.classical_grid.unwrap_or(2 * self.n)
    }

    pub fn wants(&self, pred: impl Fn(&OutputRequest) -> bool) -> bool {
        self.outputs.iter().any(pred)
    }

    pub fn wigner_every(&self) -> Option<usize> {
        self.outputs.iter().find_map(|o| match o {
            OutputRequest::WignerEvery(k) => Some(*k),
            _ => None,
        })
    }

    pub fn slope_policy(&self) -> Option<WindowPolicy> {
        self.outputs.iter().find_map(|o| match o {
            OutputRequest::SlopeFit(p) => Some(*p),
            _ => None,
        })
    }

    pub fn classical_parallel(&self) -> bool {
        self.wants(|o| matches!(o, OutputRequest::ClassicalParallel))
    }

    /// Checks every module precondition the run will meet.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("n", "dimension must be positive"));
        }
        if let MapKind::Baker = self.map {
            if self.n % 2 != 0 {
                return Err(Error::config("n", format!("baker map needs even N, got {}", self.n)));
            }
        }
        if let MapKind::Harper { gamma } = self.map {
            if !gamma.is_finite() {
                return Err(Error::config("gamma", "must be finite"));
            }
        }
        if let Terms::PerDimension(0) = self.terms {
            return Err(Error::config("terms", "N/0 is not a term count"));
        }
        self.channel()?;
        match self.initial {
            InitialState::Coherent { q0, p0 } => {
                for (name, v) in [("q0", q0), ("p0", p0)] {
                    if !(0.0..1.0).contains(&v) {
                        return Err(Error::config(name, format!("{v} is outside [0, 1)")));
                    }
                }
            }
            InitialState::Position(k) | InitialState::Momentum(k) => {
                if k >= self.n {
                    return Err(Error::config("index", format!("{k} is out of range for N = {}", self.n)));
                }
            }
        }
        if self.wigner_every() == Some(0) {
            return Err(Error::config("outputs", "wigner_every needs a positive cadence"));
        }
        if self.classical_parallel() {
            let g = self.classical_grid_side();
            if g == 0 || g % self.n != 0 {
                return Err(Error::config(
                    "classical_grid",
                    format!("G = {g} must be a positive multiple of N = {}", self.n),
                ));
            }
            if self.map == MapKind::Baker && g % 2 != 0 {
                return Err(Error::config("classical_grid", "baker transport needs an even grid"));
            }
        }
        Ok(())
    }
}

fn parse_num<T: FromStr>(field: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(field, format!("cannot parse `{value}`")))
}

fn parse_terms(value: &str) -> Result<Terms> {
    let compact: String = value.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(k) = compact.strip_prefix("N/").or_else(|| compact.strip_prefix("n/")) {
        return Ok(Terms::PerDimension(parse_num("terms", k)?));
    }
    Ok(Terms::Fixed(parse_num("terms", &compact)?))
}

fn parse_policy(arg: &str) -> Result<WindowPolicy> {
    match arg.trim() {
        "" | "default" => Ok(WindowPolicy::default()),
        "steepest" => Ok(WindowPolicy::steepest()),
        other => {
            let range = other.strip_prefix("t=").unwrap_or(other);
            let (a, b) = range
                .split_once("..")
                .ok_or_else(|| Error::config("outputs", format!("unknown slope_fit policy `{other}`")))?;
            Ok(WindowPolicy::Range {
                start: parse_num("outputs", a.trim())?,
                end: parse_num("outputs", b.trim())?,
            })
        }
    }
}

fn parse_outputs(value: &str) -> Result<Vec<OutputRequest>> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, arg) = match item.split_once('(') {
            Some((name, rest)) => {
                let arg = rest
                    .strip_suffix(')')
                    .ok_or_else(|| Error::config("outputs", format!("unbalanced parentheses in `{item}`")))?;
                (name.trim(), Some(arg))
            }
            None => (item, None),
        };
        let req = match (name, arg) {
            ("entropy_series", None) => OutputRequest::EntropySeries,
            ("classical_parallel", None) => OutputRequest::ClassicalParallel,
            ("wigner_every", Some(k)) => OutputRequest::WignerEvery(parse_num("outputs", k.trim())?),
            ("slope_fit", arg) => OutputRequest::SlopeFit(parse_policy(arg.unwrap_or(""))?),
            _ => return Err(Error::config("outputs", format!("unknown output `{item}`"))),
        };
        out.push(req);
    }
    Ok(out)
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}", lineno + 1), format!("expected `key = value`, got `{line}`"))
            })?;
            let key = key.trim().to_ascii_lowercase();
            if kv.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::config(key, "given more than once"));
            }
        }
        let mut take = |k: &str| kv.remove(k);

        let map_name = take("map").ok_or_else(|| Error::config("map", "missing"))?;
        let gamma = take("gamma");
        let map = match map_name.as_str() {
            "baker" => MapKind::Baker,
            "harper" => MapKind::Harper {
                gamma: parse_num("gamma", gamma.as_deref().ok_or_else(|| Error::config("gamma", "missing for harper"))?)?,
            },
            other => return Err(Error::config("map", format!("unknown map `{other}`"))),
        };
        let n = parse_num("n", &take("n").ok_or_else(|| Error::config("n", "missing"))?)?;
        let alpha = parse_num("alpha", &take("alpha").ok_or_else(|| Error::config("alpha", "missing"))?)?;
        let steps = parse_num("steps", &take("steps").ok_or_else(|| Error::config("steps", "missing"))?)?;
        let terms = take("terms").map(|v| parse_terms(&v)).transpose()?.unwrap_or(Terms::Fixed(1));

        let q0 = take("q0").map(|v| parse_num("q0", &v)).transpose()?;
        let p0 = take("p0").map(|v| parse_num("p0", &v)).transpose()?;
        let index = take("index").map(|v| parse_num::<usize>("index", &v)).transpose()?;
        let initial = match take("initial").as_deref().unwrap_or("coherent") {
            "coherent" => InitialState::Coherent {
                q0: q0.unwrap_or(DEFAULT_CENTRE.0),
                p0: p0.unwrap_or(DEFAULT_CENTRE.1),
            },
            "position" => InitialState::Position(index.ok_or_else(|| Error::config("index", "missing"))?),
            "momentum" => InitialState::Momentum(index.ok_or_else(|| Error::config("index", "missing"))?),
            other => return Err(Error::config("initial", format!("unknown initial state `{other}`"))),
        };

        let dq = take("dq").map(|v| parse_num("dq", &v)).transpose()?;
        let dp = take("dp").map(|v| parse_num("dp", &v)).transpose()?;
        let direction = match take("direction").as_deref().unwrap_or("alpha_p") {
            "alpha_p" => Direction::AlphaP,
            "alpha_q" => Direction::AlphaQ,
            "custom" => Direction::Custom {
                dq: dq.ok_or_else(|| Error::config("dq", "missing for custom direction"))?,
                dp: dp.ok_or_else(|| Error::config("dp", "missing for custom direction"))?,
            },
            other => return Err(Error::config("direction", format!("unknown direction `{other}`"))),
        };
        let classical_grid = take("classical_grid").map(|v| parse_num("classical_grid", &v)).transpose()?;
        let outputs = match take("outputs") {
            Some(v) => parse_outputs(&v)?,
            None => vec![OutputRequest::EntropySeries],
        };
        if let Some(key) = kv.keys().next() {
            return Err(Error::config(key.clone(), "unknown key"));
        }

        let config = Self {
            map,
            n,
            initial,
            alpha,
            terms,
            direction,
            steps,
            classical_grid,
            outputs,
        };
        config.validate()?;
        Ok(config)
    }
}
