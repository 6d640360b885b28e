//! Disagreement metrics, the exponential-rate certificate and event
//! statistics over finished runs.

use thiserror::Error;

use crate::engine::{EventKind, EventLog, Sample, Trajectory};
use crate::graph::{spectral, SpectralData, SpectralError, WeightedDigraph};
use crate::scalar::Real;
use crate::triggers::TriggerParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("algebraic connectivity is {0}; the graph is not strongly connected")]
    Disconnected(f64),
    #[error("minimum out-degree is zero")]
    ZeroOutDegree,
}

pub fn mean<T: Real>(x: &[T]) -> T {
    x.iter().copied().sum::<T>() / T::from_usize_lossy(x.len())
}

/// `V(x) = ½‖x - x̄ 1‖²` with `x̄` the mean of `x`.
pub fn lyapunov<T: Real>(x: &[T]) -> T {
    let m = mean(x);
    x.iter().map(|&xi| (xi - m) * (xi - m)).sum::<T>() * T::lit(0.5)
}

/// Guaranteed decay `V(t) <= V(0) exp(rate t)` for the continuously
/// checked law on a fixed weight-balanced, strongly connected digraph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCertificate<T> {
    /// `(1 / 2λ₂) (1 + sqrt(λ_N σ_max / (2 d_min^out)))²`.
    pub a: T,
    /// `(σ_max - 1) / (2a)`, negative.
    pub rate: T,
    pub lambda2: T,
    pub lambda_n: T,
    pub d_min_out: T,
    pub sigma_max: T,
}

impl<T: Real> RateCertificate<T> {
    pub fn from_parts(spec: SpectralData<T>, d_min_out: T, sigma_max: T) -> Result<Self, AnalysisError> {
        if !(spec.lambda2 > T::eigen_tol()) {
            return Err(AnalysisError::Disconnected(spec.lambda2.to_f64_lossy()));
        }
        if !(d_min_out > T::zero()) {
            return Err(AnalysisError::ZeroOutDegree);
        }
        let two = T::lit(2.0);
        let inner = T::one() + (spec.lambda_n * sigma_max / (two * d_min_out)).sqrt();
        let a = inner * inner / (two * spec.lambda2);
        Ok(Self {
            a,
            rate: (sigma_max - T::one()) / (two * a),
            lambda2: spec.lambda2,
            lambda_n: spec.lambda_n,
            d_min_out,
            sigma_max,
        })
    }

    /// `V(0) exp(rate t)`.
    pub fn bound(&self, v0: T, t: T) -> T {
        v0 * (self.rate * t).exp()
    }
}

pub fn rate_certificate<T: Real>(
    g: &WeightedDigraph<T>,
    params: &TriggerParams<T>,
) -> Result<RateCertificate<T>, AnalysisError> {
    let spec = spectral(g)?;
    RateCertificate::from_parts(spec, g.degrees().d_min_out, params.sigma_max())
}

pub const BOUND_REL_TOL: f64 = 1e-8;
pub const BOUND_ABS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport<T> {
    pub holds: bool,
    pub checked: usize,
    /// Largest `V(t) / bound(t)` over samples with a nonzero bound; values
    /// well below one mean the certificate is conservative.
    pub max_ratio: T,
    pub first_violation: Option<T>,
}

/// Checks `V(t) <= V(0) exp(rate t) (1 + 1e-8) + 1e-12` at every sample.
pub fn verify_exponential_bound<T: Real>(traj: &Trajectory<T>, cert: &RateCertificate<T>) -> BoundReport<T> {
    let v0 = traj.initial().v;
    let rel = T::lit(BOUND_REL_TOL);
    let abs = T::lit(BOUND_ABS_TOL);
    let mut report = BoundReport { holds: true, checked: 0, max_ratio: T::zero(), first_violation: None };
    for s in &traj.samples {
        let b = cert.bound(v0, s.t);
        report.checked += 1;
        if b > T::zero() {
            report.max_ratio = report.max_ratio.max(s.v / b);
        }
        if s.v > b * (T::one() + rel) + abs && report.first_violation.is_none() {
            report.holds = false;
            report.first_violation = Some(s.t);
        }
    }
    report
}

/// Largest `|mean(x(t)) - mean(x(0))|` over all samples.
pub fn max_mean_drift<T: Real>(traj: &Trajectory<T>) -> T {
    let m0 = mean(&traj.initial().x);
    traj.samples.iter().map(|s| (mean(&s.x) - m0).abs()).fold(T::zero(), T::max)
}

/// Rounding error carried by each coordinate of a state whose entries are
/// bounded by those of `x0`: a few units in the last place of `max |x0_i|`.
pub fn state_resolution<T: Real>(x0: &[T]) -> T {
    let scale = x0.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    T::lit(8.0) * T::epsilon() * scale
}

/// First sample time at which `V` rose by more than `rel_tol` relative to
/// the previous sample, beyond what a perturbation of `coord_err` in every
/// coordinate can explain (`sqrt(2 n V) δ + n δ² / 2`).
pub fn first_v_increase<T: Real>(samples: &[Sample<T>], rel_tol: T, coord_err: T) -> Option<T> {
    samples
        .windows(2)
        .find(|w| {
            let n = T::from_usize_lossy(w[0].x.len());
            let v = w[0].v;
            let rounding = (T::lit(2.0) * n * v).sqrt() * coord_err + n * coord_err * coord_err / T::lit(2.0);
            w[1].v > v * (T::one() + rel_tol) + rounding
        })
        .map(|w| w[1].t)
}

/// Least-squares slope of `ln V` against time, restricted to samples with
/// `V > 1e-10 V(0)`. `None` if fewer than two usable samples.
pub fn empirical_decay_rate<T: Real>(samples: &[Sample<T>]) -> Option<T> {
    let v0 = samples.first()?.v;
    let floor = v0 * T::lit(1e-10);
    let pts: Vec<(T, T)> = samples.iter().filter(|s| s.v > floor && s.v > T::zero()).map(|s| (s.t, s.v.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = T::from_usize_lossy(pts.len());
    let mt = pts.iter().map(|p| p.0).sum::<T>() / k;
    let my = pts.iter().map(|p| p.1).sum::<T>() / k;
    let sxx: T = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    let sxy: T = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    if sxx == T::zero() {
        return None;
    }
    Some(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventStats<T> {
    pub total: usize,
    pub per_agent: Vec<usize>,
    /// Distinct instants with at least one broadcast.
    pub instants: usize,
    /// Smallest positive gap between consecutive broadcasts of each agent;
    /// `None` stands for infinity.
    pub min_interevent: Vec<Option<T>>,
    /// `(t, N_E(t))` after each broadcast instant.
    pub cumulative: Vec<(T, usize)>,
}

impl<T: Real> EventStats<T> {
    pub fn min_interevent_overall(&self) -> Option<T> {
        self.min_interevent.iter().flatten().copied().reduce(T::min)
    }
}

pub fn event_stats<T: Real>(log: &EventLog<T>, n: usize) -> EventStats<T> {
    let mut per_agent = vec![0; n];
    let mut last: Vec<Option<T>> = vec![None; n];
    let mut min_gap: Vec<Option<T>> = vec![None; n];
    let mut cumulative: Vec<(T, usize)> = Vec::new();
    let mut total = 0;
    for ev in log.broadcasts() {
        total += 1;
        match cumulative.last_mut() {
            Some(c) if c.0 == ev.t => c.1 = total,
            _ => cumulative.push((ev.t, total)),
        }
        let Some(i) = ev.agent else { continue };
        per_agent[i] += 1;
        if let Some(prev) = last[i] {
            let gap = ev.t - prev;
            if gap > T::zero() {
                min_gap[i] = Some(min_gap[i].map_or(gap, |m: T| m.min(gap)));
            }
        }
        last[i] = Some(ev.t);
    }
    EventStats { total, per_agent, instants: cumulative.len(), min_interevent: min_gap, cumulative }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics<T> {
    pub stats: EventStats<T>,
    /// `max_i |x_i(T) - mean(x(0))|`.
    pub final_disagreement: T,
    pub final_v: T,
    pub v_trace: Vec<(T, T)>,
    pub empirical_rate: Option<T>,
}

pub fn run_metrics<T: Real>(traj: &Trajectory<T>) -> RunMetrics<T> {
    let x0 = &traj.initial().x;
    let m0 = mean(x0);
    let last = traj.last();
    RunMetrics {
        stats: event_stats(&traj.events, x0.len()),
        final_disagreement: last.x.iter().map(|&x| (x - m0).abs()).fold(T::zero(), T::max),
        final_v: last.v,
        v_trace: traj.samples.iter().map(|s| (s.t, s.v)).collect(),
        empirical_rate: empirical_decay_rate(&traj.samples),
    }
}

/// A crossing-driven broadcast that came sooner than the fresh-broadcast
/// inter-event floor although the agent received nothing in between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloorViolation<T> {
    pub agent: usize,
    pub t: T,
    pub gap: T,
    pub floor: T,
}

/// Checks every `TriggerBroadcast` whose agent heard no neighbor since its
/// previous broadcast (or since the start) against
/// `sqrt(σ_i / (4 d_i^out w_i^max |N_i^out|)) - slack`. Only meaningful for
/// runs on the fixed graph `g`.
pub fn interevent_floor_violations<T: Real>(
    log: &EventLog<T>,
    g: &WeightedDigraph<T>,
    params: &TriggerParams<T>,
    slack: T,
) -> (usize, Vec<FloorViolation<T>>) {
    let n = g.n();
    let deg = g.degrees();
    let mut last_t = vec![T::zero(); n];
    let mut heard = vec![false; n];
    let mut checked = 0;
    let mut out = Vec::new();
    for ev in log.events() {
        let Some(k) = ev.agent else { continue };
        if !ev.kind.is_broadcast() {
            continue;
        }
        if ev.kind == EventKind::TriggerBroadcast && !heard[k] {
            checked += 1;
            let floor = deg.interevent_floor(k, params.sigma()[k]);
            let gap = ev.t - last_t[k];
            if gap < floor - slack {
                out.push(FloorViolation { agent: k, t: ev.t, gap, floor });
            }
        }
        last_t[k] = ev.t;
        heard[k] = false;
        for &(j, _) in g.in_neighbors(k) {
            heard[j] = true;
        }
    }
    (checked, out)
}
