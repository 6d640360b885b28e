//! Scenario files: a TOML description of one experiment.
//!
//! ```toml
//! name = "fig2"
//! mode = "event-driven"          # or "periodic-event", "periodic-laplacian"
//! horizon = 50.0
//! x0 = [-1.0, 0.0, 2.0, 2.0, 1.0]
//! sigma = 0.999                  # scalar or one value per agent
//! # epsilon = [...]              # optional per-agent cooldowns
//! # h = 0.1                      # sampling period for periodic modes
//! # rounds = "single-round"      # or "until-admissible" (default)
//! # ties = "simultaneous"        # or "serial" (default)
//!
//! [graph]
//! n = 5
//! edges = [{ from = 1, to = 2, weight = 1.0 }, ...]
//! ```
//!
//! Vertex ids in files are 1-based. An edge `from -> to` means `to` is an
//! out-neighbor of `from`. `undirected = true` in a graph table adds the
//! reverse of every edge. A switching run replaces `[graph]` with
//! `[[schedule]]` entries carrying `at` and `graph`, optionally repeated
//! with period `schedule_period`.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{SimConfig, TieBreak, Topology, DEFAULT_SAMPLE_DT, DEFAULT_ZENO_CEILING};
use crate::graph::{GraphError, WeightedDigraph};
use crate::periodic::{PeriodicConfig, PeriodicMode, Resolution, SufficiencyCheck};
use crate::triggers::{TriggerError, TriggerParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    EventDriven,
    PeriodicEvent,
    PeriodicLaplacian,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::EventDriven => "event-driven",
            Mode::PeriodicEvent => "periodic-event",
            Mode::PeriodicLaplacian => "periodic-laplacian",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Sufficiency {
    Off,
    #[default]
    Warn,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Ties {
    #[default]
    Serial,
    Simultaneous,
}

impl From<Ties> for TieBreak {
    fn from(t: Ties) -> Self {
        match t {
            Ties::Serial => TieBreak::Serial,
            Ties::Simultaneous => TieBreak::Simultaneous,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RoundPolicy {
    SingleRound,
    #[default]
    UntilAdmissible,
}

impl From<RoundPolicy> for Resolution {
    fn from(r: RoundPolicy) -> Self {
        match r {
            RoundPolicy::SingleRound => Resolution::SingleRound,
            RoundPolicy::UntilAdmissible => Resolution::UntilAdmissible,
        }
    }
}

impl From<Sufficiency> for SufficiencyCheck {
    fn from(s: Sufficiency) -> Self {
        match s {
            Sufficiency::Off => SufficiencyCheck::Off,
            Sufficiency::Warn => SufficiencyCheck::Warn,
            Sufficiency::Reject => SufficiencyCheck::Reject,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub from: usize,
    pub to: usize,
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub n: usize,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub undirected: bool,
    pub edges: Vec<EdgeSpec>,
}

impl GraphSpec {
    pub fn build(&self) -> Result<WeightedDigraph<f64>, GraphError> {
        let base = self.edges.iter().map(|e| (e.from.wrapping_sub(1), e.to.wrapping_sub(1), e.weight));
        if self.undirected {
            WeightedDigraph::undirected(self.n, base)
        } else {
            WeightedDigraph::new(self.n, base)
        }
    }

    /// Directed, 1-based description of `g`.
    pub fn from_graph(g: &WeightedDigraph<f64>) -> Self {
        Self {
            n: g.n(),
            undirected: false,
            edges: g.edges().iter().map(|e| EdgeSpec { from: e.tail + 1, to: e.head + 1, weight: e.weight }).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleEntry {
    pub at: f64,
    pub graph: GraphSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SigmaSpec {
    Uniform(f64),
    PerAgent(Vec<f64>),
}

impl SigmaSpec {
    pub fn expand(&self, n: usize) -> Vec<f64> {
        match self {
            SigmaSpec::Uniform(s) => vec![*s; n],
            SigmaSpec::PerAgent(v) => v.clone(),
        }
    }
}

/// Parsed scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub mode: Mode,
    pub horizon: f64,
    pub x0: Vec<f64>,
    pub sigma: SigmaSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default = "yes")]
    pub cooldown: bool,
    #[serde(default = "default_sample_dt")]
    pub sample_dt: f64,
    #[serde(default = "default_zeno_ceiling")]
    pub zeno_ceiling: usize,
    #[serde(default)]
    pub sufficiency: Sufficiency,
    #[serde(default)]
    pub rounds: RoundPolicy,
    #[serde(default)]
    pub ties: Ties,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub allow_unbalanced: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule_period: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub schedule: Vec<ScheduleEntry>,
}

fn yes() -> bool {
    true
}

fn default_sample_dt() -> f64 {
    DEFAULT_SAMPLE_DT
}

fn default_zeno_ceiling() -> usize {
    DEFAULT_ZENO_CEILING
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("{field}: {source}")]
    Graph { field: String, source: GraphError },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Trigger(#[from] TriggerError),
}

impl ScenarioError {
    /// Schema and validation problems, as opposed to I/O failures.
    pub fn is_validation(&self) -> bool {
        !matches!(self, ScenarioError::Io { .. })
    }
}

/// A validated scenario ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub sim: SimConfig<f64>,
    pub periodic: Option<PeriodicConfig<f64>>,
    pub warnings: Vec<String>,
}

impl ScenarioConfig {
    pub fn from_toml_str(src: &str) -> Result<Self, ScenarioError> {
        toml::from_str(src).map_err(|e| ScenarioError::Schema(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let src = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.into(), source })?;
        let mut cfg = Self::from_toml_str(&src)?;
        if cfg.name.is_none() {
            cfg.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        Ok(cfg)
    }

    pub fn write(&self, path: &Path) -> Result<(), ScenarioError> {
        std::fs::write(path, self.to_toml_string()).map_err(|source| ScenarioError::Io { path: path.into(), source })
    }

    pub fn display_name(&self) -> &str {
        self.name.as_deref().unwrap_or("scenario")
    }

    pub fn n(&self) -> Option<usize> {
        self.graph.as_ref().or(self.schedule.first().map(|s| &s.graph)).map(|g| g.n)
    }

    /// Expands the switching schedule (with `schedule_period` repetition)
    /// over the horizon.
    fn topology(&self) -> Result<Topology<f64>, ScenarioError> {
        match (&self.graph, self.schedule.is_empty()) {
            (Some(_), false) => Err(ScenarioError::Invalid("give either [graph] or [[schedule]], not both".into())),
            (None, true) => Err(ScenarioError::Invalid("missing [graph] or [[schedule]]".into())),
            (Some(g), true) => {
                let g = g.build().map_err(|source| ScenarioError::Graph { field: "graph".into(), source })?;
                Ok(Topology::Static(g))
            }
            (None, false) => {
                let mut base = Vec::new();
                for (k, entry) in self.schedule.iter().enumerate() {
                    let g = entry
                        .graph
                        .build()
                        .map_err(|source| ScenarioError::Graph { field: format!("schedule[{k}].graph"), source })?;
                    base.push((entry.at, g));
                }
                if base[0].0 != 0.0 {
                    return Err(ScenarioError::Invalid("schedule must start at = 0".into()));
                }
                if base.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(ScenarioError::Invalid("schedule times must be strictly increasing".into()));
                }
                let Some(period) = self.schedule_period else {
                    return Ok(Topology::Switching(base));
                };
                if !(period > base.last().unwrap().0) {
                    return Err(ScenarioError::Invalid(
                        "schedule_period must exceed the last activation time".into(),
                    ));
                }
                let mut expanded = Vec::new();
                let mut cycle = 0usize;
                'outer: loop {
                    let offset = cycle as f64 * period;
                    for (at, g) in &base {
                        let t = offset + at;
                        if t >= self.horizon {
                            break 'outer;
                        }
                        expanded.push((t, g.clone()));
                    }
                    cycle += 1;
                }
                Ok(Topology::Switching(expanded))
            }
        }
    }

    /// Builds graphs and trigger parameters and runs every structural check.
    pub fn prepare(&self) -> Result<Prepared, ScenarioError> {
        let topology = self.topology()?;
        let n = topology.initial().n();
        if self.x0.len() != n {
            return Err(ScenarioError::Invalid(format!("x0 has {} entries but the graph has {n} vertices", self.x0.len())));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(ScenarioError::Invalid(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !(self.sample_dt > 0.0) {
            return Err(ScenarioError::Invalid(format!("sample_dt must be positive, got {}", self.sample_dt)));
        }
        let sigma = self.sigma.expand(n);
        let graphs = topology.graphs();
        // The Laplacian baseline ignores σ and ε, but they are still checked so
        // that one scenario file can be switched between modes.
        let params = TriggerParams::for_graphs(&graphs, sigma, self.epsilon.clone())?;

        let periodic = match self.mode {
            Mode::EventDriven => None,
            Mode::PeriodicEvent | Mode::PeriodicLaplacian => {
                let h = self
                    .h
                    .ok_or_else(|| ScenarioError::Invalid(format!("mode {} needs a sampling period h", self.mode)))?;
                if !(h > 0.0) || !h.is_finite() {
                    return Err(ScenarioError::Invalid(format!("h must be positive, got {h}")));
                }
                if matches!(topology, Topology::Switching(_)) {
                    return Err(ScenarioError::Invalid("periodic modes need a fixed graph".into()));
                }
                let mode = if self.mode == Mode::PeriodicEvent {
                    PeriodicMode::EventTriggered
                } else {
                    PeriodicMode::Laplacian
                };
                Some(PeriodicConfig { h, mode, sufficiency: self.sufficiency.into(), resolution: self.rounds.into() })
            }
        };

        let sim = SimConfig {
            topology,
            x0: self.x0.clone(),
            params,
            horizon: self.horizon,
            cooldown: self.cooldown,
            sample_dt: Some(self.sample_dt),
            zeno_ceiling: self.zeno_ceiling,
            allow_unbalanced: self.allow_unbalanced,
            ties: self.ties.into(),
        };
        let warnings = sim.validate().map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        Ok(Prepared { sim, periodic, warnings })
    }
}
