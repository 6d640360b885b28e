use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use etconsensus::analysis::rate_certificate;
use etconsensus::scenario::{ScenarioConfig, SigmaSpec, Sufficiency};
use etconsensus::trace::{write_trace, MetricsReport};
use etconsensus::{run, run_periodic, Certificate, Mode, Run, Topology};

use crate::error::CliError;

/// Command-line overrides applied on top of a scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub h: Option<f64>,
    pub horizon: Option<f64>,
    pub sigma: Option<f64>,
    pub no_cooldown: bool,
    pub allow_unbalanced: bool,
    pub sufficiency: Option<Sufficiency>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ScenarioConfig) {
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if let Some(h) = self.h {
            cfg.h = Some(h);
        }
        if let Some(t) = self.horizon {
            cfg.horizon = t;
        }
        if let Some(s) = self.sigma {
            cfg.sigma = SigmaSpec::Uniform(s);
        }
        if self.no_cooldown {
            cfg.cooldown = false;
        }
        if self.allow_unbalanced {
            cfg.allow_unbalanced = true;
        }
        if let Some(s) = self.sufficiency {
            cfg.sufficiency = s;
        }
    }
}

pub struct Outcome {
    pub traj: Run,
    pub certificate: Option<Certificate>,
}

/// Validates and runs one scenario in its configured mode.
pub fn execute(cfg: &ScenarioConfig) -> Result<Outcome, CliError> {
    let prepared = cfg.prepare()?;
    let traj = match &prepared.periodic {
        None => run(&prepared.sim)?,
        Some(pc) => run_periodic(&prepared.sim, pc)?,
    };
    // The certificate covers the continuously checked law on a fixed graph.
    let certificate = match (&prepared.sim.topology, cfg.mode) {
        (Topology::Static(g), Mode::EventDriven) => rate_certificate(g, &prepared.sim.params).ok(),
        _ => None,
    };
    Ok(Outcome { traj, certificate })
}

pub struct Written {
    pub trace: PathBuf,
    pub metrics: PathBuf,
    pub report: MetricsReport,
}

pub fn write_outputs(dir: &Path, stem: &str, cfg: &ScenarioConfig, out: &Outcome) -> Result<Written, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    let trace = dir.join(format!("{stem}.trace.csv"));
    let metrics = dir.join(format!("{stem}.metrics.json"));

    let file = File::create(&trace).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", trace.display())))?;
    let mut w = BufWriter::new(file);
    write_trace(&mut w, &out.traj)?;
    w.flush()?;

    let report = MetricsReport::build(stem, &cfg.mode.to_string(), cfg.horizon, &out.traj, out.certificate.as_ref());
    fs::write(&metrics, report.to_json() + "\n")
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", metrics.display())))?;
    Ok(Written { trace, metrics, report })
}

pub fn output_dir(cfg: &ScenarioConfig, flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf).or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"))
}

pub fn summarize(r: &MetricsReport) -> String {
    let mut s = format!(
        "{}: {} over [0, {}], {} broadcasts at {} instants, final disagreement {:.3e}",
        r.scenario, r.mode, r.horizon, r.event_count, r.event_instants, r.final_disagreement
    );
    if let Some(g) = r.min_interevent_overall {
        s += &format!(", min inter-event {g:.3e}");
    }
    if let Some(c) = &r.certificate {
        let verdict = if c.bound_holds { "holds" } else { "VIOLATED" };
        s += &format!("\ncertified rate {:.6e} (A = {:.6e}), bound {verdict}", c.rate, c.a);
    }
    if let Some(rate) = r.empirical_rate {
        s += &format!("\nempirical rate {rate:.6e}");
    }
    s
}
