use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::thread;

use etconsensus::scenario::{ScenarioConfig, SigmaSpec};
use etconsensus::trace::{fmt_f64, MetricsReport};

use crate::error::CliError;
use crate::exec::{execute, write_outputs};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub sigma: Option<f64>,
    pub h: Option<f64>,
}

impl Point {
    fn label(&self, base: &str) -> String {
        let mut s = base.to_string();
        if let Some(v) = self.sigma {
            s += &format!("_sigma{v}");
        }
        if let Some(v) = self.h {
            s += &format!("_h{v}");
        }
        s
    }
}

pub struct PointResult {
    pub point: Point,
    pub outcome: Result<MetricsReport, CliError>,
}

/// Cartesian product of the given values; an axis left empty keeps the
/// scenario's own value.
pub fn grid(sigmas: &[f64], hs: &[f64]) -> Result<Vec<Point>, CliError> {
    if sigmas.is_empty() && hs.is_empty() {
        return Err(CliError::Validation("empty parameter grid: give --sigma and/or --h values".into()));
    }
    let s: Vec<Option<f64>> = if sigmas.is_empty() { vec![None] } else { sigmas.iter().copied().map(Some).collect() };
    let h: Vec<Option<f64>> = if hs.is_empty() { vec![None] } else { hs.iter().copied().map(Some).collect() };
    Ok(s.iter().flat_map(|&sigma| h.iter().map(move |&h| Point { sigma, h })).collect())
}

fn run_point(base: &ScenarioConfig, point: Point, dir: &Path) -> Result<MetricsReport, CliError> {
    let mut cfg = base.clone();
    if let Some(s) = point.sigma {
        cfg.sigma = SigmaSpec::Uniform(s);
    }
    if let Some(h) = point.h {
        cfg.h = Some(h);
    }
    let out = execute(&cfg)?;
    Ok(write_outputs(dir, &point.label(base.display_name()), &cfg, &out)?.report)
}

/// Runs every point on its own thread; a failing point does not stop the
/// others. Results come back in grid order.
pub fn run_sweep(base: &ScenarioConfig, points: &[Point], dir: &Path) -> Vec<PointResult> {
    thread::scope(|scope| {
        let handles: Vec<_> = points.iter().map(|&p| scope.spawn(move || run_point(base, p, dir))).collect();
        points
            .iter()
            .zip(handles)
            .map(|(&point, h)| PointResult {
                point,
                outcome: h.join().unwrap_or_else(|_| Err(CliError::Runtime("sweep point panicked".into()))),
            })
            .collect()
    })
}

pub fn table(results: &[PointResult]) -> String {
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    let mut s = String::from(
        "sigma,h,status,event_count,event_instants,final_disagreement,min_interevent,empirical_rate,certified_rate,error\n",
    );
    for r in results {
        let (sigma, h) = (opt(r.point.sigma), opt(r.point.h));
        match &r.outcome {
            Ok(m) => {
                let _ = writeln!(
                    s,
                    "{sigma},{h},ok,{},{},{},{},{},{},",
                    m.event_count,
                    m.event_instants,
                    fmt_f64(m.final_disagreement),
                    opt(m.min_interevent_overall),
                    opt(m.empirical_rate),
                    opt(m.certificate.as_ref().map(|c| c.rate)),
                );
            }
            Err(e) => {
                let msg = e.to_string().replace(['"', '\n'], " ");
                let _ = writeln!(s, "{sigma},{h},failed,,,,,,,\"{msg}\"");
            }
        }
    }
    s
}

pub fn write_table(dir: &Path, name: &str, results: &[PointResult]) -> Result<std::path::PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{name}.sweep.csv"));
    fs::write(&path, table(results)).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shapes() {
        assert!(grid(&[], &[]).is_err());
        assert_eq!(grid(&[0.2, 0.5], &[]).unwrap().len(), 2);
        let g = grid(&[0.2, 0.5], &[0.1, 0.02, 0.01]).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g[1], Point { sigma: Some(0.2), h: Some(0.02) });
    }

    #[test]
    fn labels() {
        assert_eq!(Point { sigma: Some(0.2), h: None }.label("fig3"), "fig3_sigma0.2");
        assert_eq!(Point { sigma: None, h: Some(0.1) }.label("fig3"), "fig3_h0.1");
    }
}
