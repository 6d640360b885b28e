//! CSV traces and JSON metric reports.

use std::io::{self, Write};

use serde::Serialize;

use crate::analysis::{run_metrics, verify_exponential_bound, RateCertificate};
use crate::engine::Trajectory;

/// Fixed-width scientific notation with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn trace_header(n: usize) -> String {
    let mut cols = vec!["t".to_string(), "kind".into(), "agent".into()];
    cols.extend((1..=n).map(|i| format!("x{i}")));
    cols.push("V".into());
    cols.push("N_E".into());
    cols.join(",")
}

/// One row per sample: grid samples are labelled `sample`, event samples
/// carry the event kind and the 1-based agent id.
pub fn write_trace<W: Write>(mut w: W, traj: &Trajectory<f64>) -> io::Result<()> {
    let n = traj.initial().x.len();
    writeln!(w, "{}", trace_header(n))?;
    let events = traj.events.events();
    for s in &traj.samples {
        let (kind, agent) = match s.event.map(|k| &events[k]) {
            Some(ev) => (ev.kind.label(), ev.agent.map(|a| (a + 1).to_string()).unwrap_or_default()),
            None => ("sample", String::new()),
        };
        write!(w, "{},{kind},{agent}", fmt_f64(s.t))?;
        for &x in &s.x {
            write!(w, ",{}", fmt_f64(x))?;
        }
        writeln!(w, ",{},{}", fmt_f64(s.v), s.n_events)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    #[serde(rename = "A")]
    pub a: f64,
    pub rate: f64,
    pub lambda2: f64,
    pub lambda_n: f64,
    pub d_min_out: f64,
    pub sigma_max: f64,
    pub bound_holds: bool,
    pub bound_max_ratio: f64,
    pub bound_first_violation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub scenario: String,
    pub mode: String,
    pub horizon: f64,
    pub final_disagreement: f64,
    pub final_v: f64,
    pub event_count: usize,
    pub event_instants: usize,
    pub per_agent_events: Vec<usize>,
    /// `null` entries mean fewer than two broadcasts.
    pub min_interevent: Vec<Option<f64>>,
    pub min_interevent_overall: Option<f64>,
    pub empirical_rate: Option<f64>,
    pub certificate: Option<CertificateReport>,
    pub warnings: Vec<String>,
}

impl MetricsReport {
    pub fn build(
        scenario: &str,
        mode: &str,
        horizon: f64,
        traj: &Trajectory<f64>,
        cert: Option<&RateCertificate<f64>>,
    ) -> Self {
        let m = run_metrics(traj);
        let certificate = cert.map(|c| {
            let check = verify_exponential_bound(traj, c);
            CertificateReport {
                a: c.a,
                rate: c.rate,
                lambda2: c.lambda2,
                lambda_n: c.lambda_n,
                d_min_out: c.d_min_out,
                sigma_max: c.sigma_max,
                bound_holds: check.holds,
                bound_max_ratio: check.max_ratio,
                bound_first_violation: check.first_violation,
            }
        });
        Self {
            scenario: scenario.to_string(),
            mode: mode.to_string(),
            horizon,
            final_disagreement: m.final_disagreement,
            final_v: m.final_v,
            event_count: m.stats.total,
            event_instants: m.stats.instants,
            per_agent_events: m.stats.per_agent.clone(),
            min_interevent_overall: m.stats.min_interevent_overall(),
            min_interevent: m.stats.min_interevent,
            empirical_rate: m.empirical_rate,
            certificate,
            warnings: traj.warnings.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-1.0), "-1.0000000000000000e0");
        let v = 0.8000000000000003f64;
        assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn header_layout() {
        assert_eq!(trace_header(2), "t,kind,agent,x1,x2,V,N_E");
    }
}
