use etconsensus::analysis::RateCertificate;
use etconsensus::graph::spectral;
use etconsensus::periodic::{sufficiency_violation, PeriodicMode, SufficiencyCheck};
use etconsensus::scenario::ScenarioConfig;
use etconsensus::trace::fmt_f64;
use etconsensus::{Digraph, Topology, WeightedDigraph};

use crate::error::CliError;

fn list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("[{}]", items.join(", "))
}

/// Runs every check a `run` would perform before simulating and describes
/// the scenario.
pub fn validate(cfg: &ScenarioConfig) -> Result<String, CliError> {
    let p = cfg.prepare()?;
    let mut warnings = p.warnings.clone();
    let mut out = format!("{}: valid\n", cfg.display_name());
    out += &format!("  agents {}, mode {}, horizon {}\n", p.sim.x0.len(), cfg.mode, cfg.horizon);
    match &p.sim.topology {
        Topology::Static(g) => {
            out += &format!(
                "  graph: {} edges, weight-balanced {}, strongly connected {}\n",
                g.edges().len(),
                g.is_weight_balanced(1e-9),
                g.is_strongly_connected()
            );
        }
        Topology::Switching(s) => {
            let union = WeightedDigraph::union(s.iter().map(|e| &e.1)).expect("shared vertex set");
            out += &format!(
                "  schedule: {} activations, union strongly connected {}\n",
                s.len(),
                union.is_strongly_connected()
            );
        }
    }
    out += &format!("  sigma {}\n  epsilon {}\n", list(p.sim.params.sigma()), list(p.sim.params.epsilon()));
    if let (Some(pc), Topology::Static(g)) = (&p.periodic, &p.sim.topology) {
        out += &format!("  sampling period h = {}\n", pc.h);
        if pc.mode == PeriodicMode::EventTriggered {
            if let Some(err) = sufficiency_violation(g, p.sim.params.sigma_max(), pc.h) {
                match pc.sufficiency {
                    SufficiencyCheck::Reject => return Err(err.into()),
                    SufficiencyCheck::Warn => warnings.push(err.to_string()),
                    SufficiencyCheck::Off => {}
                }
            }
        }
    }
    for w in warnings {
        out += &format!("  warning: {w}\n");
    }
    Ok(out)
}

fn describe(label: &str, g: &Digraph, sigma_max: f64) -> String {
    let mut out = format!("{label}\n  n          {}\n  edges      {}\n", g.n(), g.edges().len());
    match spectral(g) {
        Ok(s) => {
            let d_min = g.degrees().d_min_out + 0.0;
            out += &format!("  lambda2    {}\n  lambda_N   {}\n  d_min_out  {}\n", fmt_f64(s.lambda2), fmt_f64(s.lambda_n), fmt_f64(d_min));
            match RateCertificate::from_parts(s, d_min, sigma_max) {
                Ok(c) => out += &format!("  A          {}\n  rate       {}\n", fmt_f64(c.a), fmt_f64(c.rate)),
                Err(e) => out += &format!("  no certificate: {e}\n"),
            }
        }
        Err(e) => out += &format!("  spectrum unavailable: {e}\n"),
    }
    out
}

/// Spectral data of `Sym(L)` and the rate certificate for every graph of the
/// scenario (and their union when the topology switches).
pub fn spectral_report(cfg: &ScenarioConfig) -> Result<String, CliError> {
    let n = cfg.n().ok_or_else(|| CliError::Validation("scenario has no graph".into()))?;
    let sigma_max = cfg.sigma.expand(n).into_iter().fold(f64::NEG_INFINITY, f64::max);
    let build = |spec: &etconsensus::scenario::GraphSpec, field: String| {
        spec.build().map_err(|e| CliError::Validation(format!("{field}: {e}")))
    };
    let mut out = format!("{} (sigma_max = {sigma_max})\n", cfg.display_name());
    if let Some(spec) = &cfg.graph {
        out += &describe("graph", &build(spec, "graph".into())?, sigma_max);
    }
    let mut graphs = Vec::new();
    for (k, entry) in cfg.schedule.iter().enumerate() {
        let g = build(&entry.graph, format!("schedule[{k}].graph"))?;
        out += &describe(&format!("schedule[{k}] (at {})", entry.at), &g, sigma_max);
        graphs.push(g);
    }
    if let Some(union) = WeightedDigraph::union(graphs.iter()) {
        out += &describe("union", &union, sigma_max);
    }
    Ok(out)
}
