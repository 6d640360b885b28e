//! Periodically checked triggers and the periodic Laplacian baseline.
//!
//! Agents act only at `t_ℓ = ℓh`; in between, controls are frozen and the
//! states move exactly along straight lines.

use log::warn;
use thiserror::Error;

use crate::engine::{EngineError, EventKind, EventLog, Recorder, SimConfig, SimEvent, Topology, Trajectory};
use crate::graph::WeightedDigraph;
use crate::scalar::Real;
use crate::triggers::{should_broadcast_with, TriggerSnapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeriodicMode {
    /// Triggers evaluated at sampling instants only.
    EventTriggered,
    /// Every agent broadcasts at every sampling instant.
    Laplacian,
}

/// What to do when the sampling period breaks the sufficient condition for
/// convergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SufficiencyCheck {
    Off,
    #[default]
    Warn,
    Reject,
}

/// How broadcasts are resolved within one sampling instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Resolution {
    /// Triggers are checked once against the pre-instant broadcast values.
    SingleRound,
    /// Further synchronous rounds run until no trigger is violated.
    #[default]
    UntilAdmissible,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicConfig<T> {
    pub h: T,
    pub mode: PeriodicMode,
    pub sufficiency: SufficiencyCheck,
    pub resolution: Resolution,
}

impl<T> PeriodicConfig<T> {
    pub fn new(h: T, mode: PeriodicMode) -> Self {
        Self { h, mode, sufficiency: SufficiencyCheck::default(), resolution: Resolution::default() }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PeriodicError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("sampling period must be positive and finite, got {0}")]
    BadPeriod(f64),
    #[error("periodic modes need a fixed graph")]
    SwitchingUnsupported,
    #[error("sampling period h = {h} violates sigma_max + 4 h w_max |N_max^out| < 1 (value {value}, need h < {limit})")]
    Insufficient { h: f64, value: f64, limit: f64 },
    #[error("periodic Laplacian consensus needs h < 1/d_max = {limit}, got h = {h}")]
    LaplacianStep { h: f64, limit: f64 },
}

/// Largest period satisfying `σ_max + 4 h w_max |N_max^out| < 1` (exclusive).
pub fn sufficient_period<T: Real>(g: &WeightedDigraph<T>, sigma_max: T) -> T {
    let d = g.degrees();
    (T::one() - sigma_max) / (T::lit(4.0) * d.w_max * T::from_usize_lossy(d.n_out_max))
}

/// `Some(Insufficient)` when `h` breaks `σ_max + 4 h w_max |N_max^out| < 1`.
pub fn sufficiency_violation<T: Real>(g: &WeightedDigraph<T>, sigma_max: T, h: T) -> Option<PeriodicError> {
    let limit = sufficient_period(g, sigma_max);
    if h < limit {
        return None;
    }
    let d = g.degrees();
    let value = sigma_max + T::lit(4.0) * h * d.w_max * T::from_usize_lossy(d.n_out_max);
    Some(PeriodicError::Insufficient { h: h.to_f64_lossy(), value: value.to_f64_lossy(), limit: limit.to_f64_lossy() })
}

/// Largest admissible step of the Laplacian baseline (exclusive).
pub fn laplacian_period_limit<T: Real>(g: &WeightedDigraph<T>) -> T {
    T::one() / g.degrees().d_max
}

fn static_graph<T: Real>(cfg: &SimConfig<T>) -> Result<&WeightedDigraph<T>, PeriodicError> {
    match &cfg.topology {
        Topology::Static(g) => Ok(g),
        Topology::Switching(_) => Err(PeriodicError::SwitchingUnsupported),
    }
}

/// Number of sampling instants in `[0, horizon)`.
fn sample_count<T: Real>(horizon: T, h: T) -> usize {
    let ratio = horizon / h;
    let k = (ratio - ratio * T::lit(1e-12)).ceil();
    k.to_usize().unwrap_or(0)
}

pub fn run_periodic<T: Real>(cfg: &SimConfig<T>, pc: &PeriodicConfig<T>) -> Result<Trajectory<T>, PeriodicError> {
    match pc.mode {
        PeriodicMode::EventTriggered => run_periodic_event(cfg, pc),
        PeriodicMode::Laplacian => run_periodic_laplacian(cfg, pc),
    }
}

/// Periodically checked event-triggered law.
///
/// At each `t_ℓ` every agent checks its trigger against the broadcast values
/// held before the instant, and all firing agents broadcast together. With
/// [`Resolution::UntilAdmissible`], an agent left with `f_i > 0` by the new
/// values broadcasts in a further synchronous round at the same instant, so
/// every sampling instant ends with `f_i(e_i(t_ℓ)) <= 0` for all agents.
pub fn run_periodic_event<T: Real>(cfg: &SimConfig<T>, pc: &PeriodicConfig<T>) -> Result<Trajectory<T>, PeriodicError> {
    let mut warnings = cfg.validate()?;
    let g = static_graph(cfg)?;
    check_period(pc.h)?;
    if let Some(err) = sufficiency_violation(g, cfg.params.sigma_max(), pc.h) {
        match pc.sufficiency {
            SufficiencyCheck::Reject => return Err(err),
            SufficiencyCheck::Warn => {
                warn!("{err}");
                warnings.push(err.to_string());
            }
            SufficiencyCheck::Off => {}
        }
    }

    let n = g.n();
    let mut x = cfg.x0.clone();
    let mut xhat = cfg.x0.clone();
    let mut snap = TriggerSnapshot::compute(g, &xhat, &cfg.params);
    let mut log = EventLog::new();
    let mut rec = Recorder::new();
    rec.grid(T::zero(), x.clone(), xhat.clone());

    let steps = sample_count(cfg.horizon, pc.h);
    let mut grid = Grid::new(cfg.sample_dt);
    for ell in 0..steps {
        let t = T::from_usize_lossy(ell) * pc.h;
        let mut fired = vec![false; n];
        loop {
            let round: Vec<usize> = (0..n)
                .filter(|&i| !fired[i] && should_broadcast_with(xhat[i] - x[i], snap.phi[i], snap.threshold[i]))
                .collect();
            if round.is_empty() {
                break;
            }
            for &i in &round {
                xhat[i] = x[i];
                fired[i] = true;
                log.push(SimEvent { t, kind: EventKind::PeriodicSample, agent: Some(i), cause: None, crossing: None });
            }
            snap = TriggerSnapshot::compute(g, &xhat, &cfg.params);
            if pc.resolution == Resolution::SingleRound {
                break;
            }
        }
        rec.events(&log, &x, &xhat);
        let t_next = (T::from_usize_lossy(ell + 1) * pc.h).min(cfg.horizon);
        advance(&mut x, &snap.zhat, t, t_next, &xhat, &mut grid, &mut rec);
    }
    finish(cfg.horizon, &x, &xhat, &mut rec);
    Ok(Trajectory { samples: rec.samples, events: log, warnings })
}

/// Sampled Laplacian consensus `x(t_{ℓ+1}) = x(t_ℓ) - h L x(t_ℓ)`.
pub fn run_periodic_laplacian<T: Real>(
    cfg: &SimConfig<T>,
    pc: &PeriodicConfig<T>,
) -> Result<Trajectory<T>, PeriodicError> {
    let warnings = cfg.validate()?;
    let g = static_graph(cfg)?;
    check_period(pc.h)?;
    let limit = laplacian_period_limit(g);
    if !(pc.h < limit) {
        return Err(PeriodicError::LaplacianStep { h: pc.h.to_f64_lossy(), limit: limit.to_f64_lossy() });
    }

    let n = g.n();
    let mut x = cfg.x0.clone();
    let mut xhat = cfg.x0.clone();
    let mut log = EventLog::new();
    let mut rec = Recorder::new();
    rec.grid(T::zero(), x.clone(), xhat.clone());

    let steps = sample_count(cfg.horizon, pc.h);
    let mut grid = Grid::new(cfg.sample_dt);
    for ell in 0..steps {
        let t = T::from_usize_lossy(ell) * pc.h;
        xhat.clone_from(&x);
        for i in 0..n {
            log.push(SimEvent { t, kind: EventKind::PeriodicSample, agent: Some(i), cause: None, crossing: None });
        }
        rec.events(&log, &x, &xhat);
        let u: Vec<T> = g.laplacian_apply(&xhat).into_iter().map(|v| -v).collect();
        let t_next = (T::from_usize_lossy(ell + 1) * pc.h).min(cfg.horizon);
        advance(&mut x, &u, t, t_next, &xhat, &mut grid, &mut rec);
    }
    finish(cfg.horizon, &x, &xhat, &mut rec);
    Ok(Trajectory { samples: rec.samples, events: log, warnings })
}

fn check_period<T: Real>(h: T) -> Result<(), PeriodicError> {
    if !(h > T::zero()) || !h.is_finite() {
        return Err(PeriodicError::BadPeriod(h.to_f64_lossy()));
    }
    Ok(())
}

struct Grid<T> {
    dt: Option<T>,
    k: usize,
}

impl<T: Real> Grid<T> {
    fn new(dt: Option<T>) -> Self {
        Self { dt, k: 1 }
    }
}

/// Moves `x` from `t0` to `t1` under constant `u`, emitting grid samples
/// strictly inside `(t0, t1)`.
fn advance<T: Real>(
    x: &mut [T],
    u: &[T],
    t0: T,
    t1: T,
    xhat: &[T],
    grid: &mut Grid<T>,
    rec: &mut Recorder<T>,
) {
    if let Some(dt) = grid.dt {
        loop {
            let tg = T::from_usize_lossy(grid.k) * dt;
            if tg >= t1 {
                break;
            }
            if tg > t0 {
                let xs: Vec<T> = x.iter().zip(u).map(|(&xi, &ui)| xi + (tg - t0) * ui).collect();
                rec.grid(tg, xs, xhat.to_vec());
            }
            grid.k += 1;
        }
    }
    for (xi, &ui) in x.iter_mut().zip(u) {
        *xi += (t1 - t0) * ui;
    }
}

fn finish<T: Real>(horizon: T, x: &[T], xhat: &[T], rec: &mut Recorder<T>) {
    if rec.samples.last().is_none_or(|s| s.t < horizon) {
        rec.grid(horizon, x.to_vec(), xhat.to_vec());
    }
}
