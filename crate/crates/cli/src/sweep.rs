//! Sweep files: flat `key = value` lines naming one axis, its values and what to evaluate.

use std::fmt;
use std::path::Path;

use fdiab::config::key_values;
use fdiab::{Duplex, RawParams};

use crate::CliError;

/// Swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    BiasRatioDb,
    EtaDb,
    Xi,
    DensityRatio,
    QAdc,
    TauDb,
}

impl Axis {
    pub const ALL: [Axis; 6] = [Axis::BiasRatioDb, Axis::EtaDb, Axis::Xi, Axis::DensityRatio, Axis::QAdc, Axis::TauDb];

    pub fn name(self) -> &'static str {
        match self {
            Axis::BiasRatioDb => "bias_ratio_db",
            Axis::EtaDb => "eta_db",
            Axis::Xi => "xi",
            Axis::DensityRatio => "density_ratio",
            Axis::QAdc => "q_adc",
            Axis::TauDb => "tau_db",
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| CliError::Parse(format!("unknown axis `{s}` (expected one of {})", Self::names())))
    }

    fn names() -> String {
        Self::ALL.map(Axis::name).join(", ")
    }

    /// Applies one axis value to a raw config; the threshold axis leaves it untouched.
    pub fn apply(self, raw: &mut RawParams, value: f64) -> Result<(), CliError> {
        if self == Axis::TauDb {
            return Ok(());
        }
        raw.set(self.name(), &value.to_string()).map_err(|e| CliError::Parse(e.to_string()))
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MetricKind {
    Association,
    Coverage,
    CapOutage,
    Ergodic,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [MetricKind::Association, MetricKind::Coverage, MetricKind::CapOutage, MetricKind::Ergodic];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Association => "association",
            MetricKind::Coverage => "coverage",
            MetricKind::CapOutage => "cap_outage",
            MetricKind::Ergodic => "ergodic",
        }
    }

    fn parse(s: &str) -> Result<Self, CliError> {
        Self::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| CliError::Parse(format!("unknown metric `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Engine {
    Analytic,
    Mc,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::Mc => "mc",
        }
    }

    /// `analytic`, `mc` or `both`.
    pub fn parse_set(s: &str) -> Result<Vec<Engine>, CliError> {
        match s {
            "analytic" => Ok(vec![Engine::Analytic]),
            "mc" => Ok(vec![Engine::Mc]),
            "both" => Ok(vec![Engine::Analytic, Engine::Mc]),
            other => Err(CliError::Parse(format!("unknown engine `{other}` (expected analytic, mc or both)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
    pub metrics: Vec<MetricKind>,
    pub engines: Vec<Engine>,
    /// Threshold for coverage and capacity with outage when the axis is not `tau_db`.
    pub tau_db: f64,
    pub mc_iterations: usize,
    pub seed: u64,
    /// Duplex modes to evaluate; empty means the config's own mode.
    pub duplex: Vec<Duplex>,
}

impl SweepSpec {
    pub fn new(axis: Axis, values: Vec<f64>, metrics: Vec<MetricKind>, engines: Vec<Engine>) -> Self {
        Self { axis, values, metrics, engines, tau_db: 0.0, mc_iterations: 100_000, seed: 1, duplex: Vec::new() }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let parse_err = |e: fdiab::ConfigError| CliError::Parse(e.to_string());
        let mut axis = None;
        let mut values: Option<Vec<f64>> = None;
        let mut metrics = vec![MetricKind::Coverage];
        let mut engines = vec![Engine::Analytic];
        let mut spec_tau = 0.0;
        let mut iters = 100_000;
        let mut seed = 1;
        let mut duplex = Vec::new();
        for (key, value, line) in key_values(text).map_err(parse_err)? {
            let at = |msg: String| CliError::Parse(format!("sweep line {line}: {msg}"));
            let list = || value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect::<Vec<_>>();
            match key.as_str() {
                "axis" => axis = Some(Axis::parse(&value).map_err(|e| at(e.to_string()))?),
                "values" => values = Some(list().iter().map(|v| number(v)).collect::<Result<_, _>>().map_err(at)?),
                "grid" => values = Some(grid(&list()).map_err(at)?),
                "metrics" => {
                    metrics = list().iter().map(|m| MetricKind::parse(m)).collect::<Result<_, _>>().map_err(|e| at(e.to_string()))?;
                    metrics.sort();
                    metrics.dedup();
                }
                "engines" | "engine" => engines = Engine::parse_set(&value).map_err(|e| at(e.to_string()))?,
                "tau_db" => spec_tau = number(&value).map_err(at)?,
                "mc_iterations" => iters = count(&value).map_err(at)?,
                "seed" => seed = value.parse().map_err(|_| at(format!("seed `{value}` is not an unsigned integer")))?,
                "duplex" => {
                    duplex = list()
                        .iter()
                        .map(|d| match *d {
                            "ibfd" => Ok(Duplex::Ibfd),
                            "hd" => Ok(Duplex::Hd),
                            other => Err(at(format!("unknown duplex mode `{other}`"))),
                        })
                        .collect::<Result<_, _>>()?
                }
                other => return Err(at(format!("unknown sweep key `{other}`"))),
            }
        }
        let axis = axis.ok_or_else(|| CliError::Parse("sweep has no `axis`".into()))?;
        let values = values.ok_or_else(|| CliError::Parse("sweep has neither `values` nor `grid`".into()))?;
        if values.is_empty() {
            return Err(CliError::Parse("sweep grid is empty".into()));
        }
        if metrics.is_empty() {
            return Err(CliError::Parse("sweep lists no metrics".into()));
        }
        Ok(Self { axis, values, metrics, engines, tau_db: spec_tau, mc_iterations: iters, seed, duplex })
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

fn number(s: &str) -> Result<f64, String> {
    s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| format!("`{s}` is not a finite number"))
}

fn count(s: &str) -> Result<usize, String> {
    // accept 1e5 style counts
    let v = number(s)?;
    if v < 0.0 || v.fract() != 0.0 {
        return Err(format!("`{s}` is not a non-negative integer"));
    }
    Ok(v as usize)
}

/// `start, stop, count` evenly spaced values including both ends.
fn grid(parts: &[&str]) -> Result<Vec<f64>, String> {
    let [a, b, n] = parts else {
        return Err("grid needs `start, stop, count`".into());
    };
    let (a, b, n) = (number(a)?, number(b)?, count(n)?);
    Ok(match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    })
}
