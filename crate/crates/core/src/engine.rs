//! Exact event-driven execution of the event-triggered consensus law.
//!
//! Controls only change at broadcasts, so between two events every state
//! moves along a straight line. The engine keeps one analytically computed
//! crossing time per agent in a priority queue, jumps from event to event and
//! resolves same-instant cascades (cooldown rebroadcasts and triggers made
//! positive by a neighbor's new value) to a fixed point.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, VecDeque};

use log::warn;
use thiserror::Error;

use crate::analysis::lyapunov;
use crate::graph::{DegreeData, WeightedDigraph};
use crate::scalar::Real;
use crate::triggers::{
    cooldown_rebroadcast, next_crossing, phi, should_broadcast_with, threshold, zhat, TriggerError, TriggerParams,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("initial state has {got} entries but the graph has {expected} vertices")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("horizon must be positive and finite, got {0}")]
    BadHorizon(f64),
    #[error("graph is not weight-balanced: vertex {vertex} has |d_out - d_in| = {imbalance}")]
    NotBalanced { vertex: usize, imbalance: f64 },
    #[error("graph is not strongly connected: vertex {vertex} is not mutually reachable with vertex 0")]
    NotStronglyConnected { vertex: usize },
    #[error("invalid switching schedule: {0}")]
    BadSchedule(String),
    #[error(transparent)]
    Trigger(#[from] TriggerError),
    #[error("cannot step from t = {from} back to t = {to}")]
    StepBackwards { from: f64, to: f64 },
    #[error("a crossing is scheduled at t = {event} before the step target t = {target}")]
    StepPastEvent { event: f64, target: f64 },
    #[error("agent {agent} would broadcast twice at t = {t}")]
    CascadeOverflow { agent: usize, t: f64 },
    #[error("zeno guard: {count} broadcasts within one time unit ending at t = {t}")]
    ZenoGuard { count: usize, t: f64 },
}

/// Per-agent dynamic state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState<T> {
    pub x: T,
    /// Last broadcast value.
    pub xhat: T,
    /// `xhat - x`.
    pub e: T,
    /// Current control, equal to `ẑ_i`.
    pub u: T,
    pub t_last: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    /// Own trigger crossed its threshold.
    TriggerBroadcast,
    /// Broadcast forced at the same instant by a neighbor's broadcast.
    CascadeBroadcast,
    /// Broadcast forced by a change of the agent's neighborhood.
    SwitchBroadcast,
    /// Communication graph replaced.
    TopologySwitch,
    /// Broadcast decided at a periodic sampling instant.
    PeriodicSample,
}

impl EventKind {
    pub fn is_broadcast(self) -> bool {
        !matches!(self, EventKind::TopologySwitch)
    }

    pub fn label(self) -> &'static str {
        match self {
            EventKind::TriggerBroadcast => "trigger",
            EventKind::CascadeBroadcast => "cascade",
            EventKind::SwitchBroadcast => "switch-broadcast",
            EventKind::TopologySwitch => "topology-switch",
            EventKind::PeriodicSample => "periodic",
        }
    }
}

/// Error and threshold right before a crossing-driven broadcast.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingCheck<T> {
    pub error_sq: T,
    pub threshold: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEvent<T> {
    pub t: T,
    pub kind: EventKind,
    pub agent: Option<usize>,
    /// Broadcaster whose message induced this cascade.
    pub cause: Option<usize>,
    pub crossing: Option<CrossingCheck<T>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventLog<T> {
    events: Vec<SimEvent<T>>,
}

impl<T: Real> EventLog<T> {
    pub fn new() -> Self {
        Self { events: Vec::new() }
    }

    pub fn push(&mut self, ev: SimEvent<T>) {
        debug_assert!(self.events.last().is_none_or(|l| l.t <= ev.t), "log must be time-ordered");
        self.events.push(ev);
    }

    pub fn events(&self) -> &[SimEvent<T>] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn broadcasts(&self) -> impl Iterator<Item = &SimEvent<T>> {
        self.events.iter().filter(|e| e.kind.is_broadcast())
    }

    pub fn broadcast_count(&self) -> usize {
        self.broadcasts().count()
    }
}

/// State snapshot taken on the sampling grid or right after an event.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    pub t: T,
    pub x: Vec<T>,
    pub xhat: Vec<T>,
    pub v: T,
    /// Cumulative number of broadcasts up to and including this sample.
    pub n_events: usize,
    /// Index into the event log when the sample was taken for an event.
    pub event: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub samples: Vec<Sample<T>>,
    pub events: EventLog<T>,
    pub warnings: Vec<String>,
}

impl<T: Real> Trajectory<T> {
    pub fn initial(&self) -> &Sample<T> {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample<T> {
        self.samples.last().expect("trajectory has at least one sample")
    }
}

/// Collects samples while a run progresses.
pub(crate) struct Recorder<T> {
    pub samples: Vec<Sample<T>>,
    logged: usize,
    broadcasts: usize,
}

impl<T: Real> Recorder<T> {
    pub fn new() -> Self {
        Self { samples: Vec::new(), logged: 0, broadcasts: 0 }
    }

    pub fn grid(&mut self, t: T, x: Vec<T>, xhat: Vec<T>) {
        let v = lyapunov(&x);
        self.samples.push(Sample { t, x, xhat, v, n_events: self.broadcasts, event: None });
    }

    /// One sample per event logged since the last call, all carrying the
    /// current state.
    pub fn events(&mut self, log: &EventLog<T>, x: &[T], xhat: &[T]) {
        let v = lyapunov(x);
        for (idx, ev) in log.events().iter().enumerate().skip(self.logged) {
            if ev.kind.is_broadcast() {
                self.broadcasts += 1;
            }
            self.samples.push(Sample {
                t: ev.t,
                x: x.to_vec(),
                xhat: xhat.to_vec(),
                v,
                n_events: self.broadcasts,
                event: Some(idx),
            });
        }
        self.logged = log.len();
    }
}

/// Communication topology over a run.
#[derive(Debug, Clone, PartialEq)]
pub enum Topology<T> {
    Static(WeightedDigraph<T>),
    /// Graphs with activation times; the first activates at zero.
    Switching(Vec<(T, WeightedDigraph<T>)>),
}

impl<T: Real> Topology<T> {
    pub fn initial(&self) -> &WeightedDigraph<T> {
        match self {
            Topology::Static(g) => g,
            Topology::Switching(s) => &s[0].1,
        }
    }

    pub fn graphs(&self) -> Vec<&WeightedDigraph<T>> {
        match self {
            Topology::Static(g) => vec![g],
            Topology::Switching(s) => s.iter().map(|(_, g)| g).collect(),
        }
    }
}

pub const DEFAULT_SAMPLE_DT: f64 = 0.01;
pub const DEFAULT_ZENO_CEILING: usize = 100_000;

/// Resolution of crossings that fall on the same instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// One crossing at a time in ascending agent order, each followed by its
    /// cascade; later crossings are re-checked against the updated state.
    #[default]
    Serial,
    /// Every crossing due at the instant seeds one common cascade.
    Simultaneous,
}

/// Everything needed for one deterministic run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig<T> {
    pub topology: Topology<T>,
    pub x0: Vec<T>,
    pub params: TriggerParams<T>,
    pub horizon: T,
    /// Enables the cooldown rebroadcast rule.
    pub cooldown: bool,
    /// Sampling grid spacing in addition to event instants.
    pub sample_dt: Option<T>,
    /// Maximum broadcasts tolerated within any unit-length time window.
    pub zeno_ceiling: usize,
    /// Run on graphs that are not weight-balanced or strongly connected,
    /// with a warning instead of an error.
    pub allow_unbalanced: bool,
    pub ties: TieBreak,
}

impl<T: Real> SimConfig<T> {
    pub fn new(graph: WeightedDigraph<T>, x0: Vec<T>, params: TriggerParams<T>, horizon: T) -> Self {
        Self {
            topology: Topology::Static(graph),
            x0,
            params,
            horizon,
            cooldown: true,
            sample_dt: Some(T::lit(DEFAULT_SAMPLE_DT)),
            zeno_ceiling: DEFAULT_ZENO_CEILING,
            allow_unbalanced: false,
            ties: TieBreak::Serial,
        }
    }

    /// Structural checks shared by every execution mode. Returns warnings
    /// for violations that `allow_unbalanced` downgrades.
    pub fn validate(&self) -> Result<Vec<String>, EngineError> {
        let mut warnings = Vec::new();
        if !(self.horizon > T::zero()) || !self.horizon.is_finite() {
            return Err(EngineError::BadHorizon(self.horizon.to_f64_lossy()));
        }
        let n = self.topology.initial().n();
        if self.x0.len() != n {
            return Err(EngineError::DimensionMismatch { expected: n, got: self.x0.len() });
        }
        if self.params.len() != n {
            return Err(TriggerError::LengthMismatch { expected: n, got: self.params.len() }.into());
        }
        if let Some(dt) = self.sample_dt {
            if !(dt > T::zero()) {
                return Err(EngineError::BadSchedule(format!("sampling step must be positive, got {dt}")));
            }
        }
        let mut soft = |err: EngineError| -> Result<(), EngineError> {
            if self.allow_unbalanced {
                warn!("{err}");
                warnings.push(err.to_string());
                Ok(())
            } else {
                Err(err)
            }
        };
        match &self.topology {
            Topology::Static(g) => {
                check_balanced(g).or_else(&mut soft)?;
                if let Some(vertex) = g.connectivity_witness() {
                    soft(EngineError::NotStronglyConnected { vertex })?;
                }
            }
            Topology::Switching(schedule) => {
                if schedule.is_empty() || schedule[0].0 != T::zero() {
                    return Err(EngineError::BadSchedule("schedule must start at t = 0".into()));
                }
                for w in schedule.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return Err(EngineError::BadSchedule(format!(
                            "activation times must be strictly increasing ({} then {})",
                            w[0].0, w[1].0
                        )));
                    }
                }
                for (_, g) in schedule {
                    if g.n() != n {
                        return Err(EngineError::BadSchedule("all graphs must share the vertex set".into()));
                    }
                    check_balanced(g).or_else(&mut soft)?;
                }
                let union = WeightedDigraph::union(schedule.iter().map(|(_, g)| g)).expect("same vertex set");
                if let Some(vertex) = union.connectivity_witness() {
                    soft(EngineError::NotStronglyConnected { vertex })?;
                }
            }
        }
        Ok(warnings)
    }
}

pub(crate) fn check_balanced<T: Real>(g: &WeightedDigraph<T>) -> Result<(), EngineError> {
    let (vertex, imbalance) = g.max_imbalance();
    if imbalance > T::balance_tol() {
        Err(EngineError::NotBalanced { vertex, imbalance: imbalance.to_f64_lossy() })
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Scheduled<T> {
    t: T,
    agent: usize,
    generation: u64,
}

impl<T: Real> PartialEq for Scheduled<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Real> Eq for Scheduled<T> {}

impl<T: Real> PartialOrd for Scheduled<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Scheduled<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.t
            .partial_cmp(&other.t)
            .expect("scheduled times are finite")
            .then(self.agent.cmp(&other.agent))
            .then(self.generation.cmp(&other.generation))
    }
}

/// Sliding one-time-unit window over broadcast instants.
#[derive(Debug, Clone)]
struct ZenoGuard<T> {
    ceiling: usize,
    window: VecDeque<T>,
}

impl<T: Real> ZenoGuard<T> {
    fn record(&mut self, t: T) -> Result<(), EngineError> {
        self.window.push_back(t);
        while self.window.front().is_some_and(|&f| f <= t - T::one()) {
            self.window.pop_front();
        }
        if self.window.len() > self.ceiling {
            return Err(EngineError::ZenoGuard { count: self.window.len(), t: t.to_f64_lossy() });
        }
        Ok(())
    }
}

/// Mutable simulation state of one network.
#[derive(Debug, Clone)]
pub struct Network<T: Real> {
    graph: WeightedDigraph<T>,
    degrees: DegreeData<T>,
    params: TriggerParams<T>,
    cooldown: bool,
    t: T,
    agents: Vec<AgentState<T>>,
    phi: Vec<T>,
    threshold: Vec<T>,
    generation: Vec<u64>,
    queue: BinaryHeap<Reverse<Scheduled<T>>>,
    log: EventLog<T>,
    zeno: ZenoGuard<T>,
}

impl<T: Real> Network<T> {
    /// Starts at `t = 0` with every agent having just broadcast its initial
    /// state. That initialization is not logged as an event.
    pub fn new(
        graph: WeightedDigraph<T>,
        params: TriggerParams<T>,
        x0: &[T],
        cooldown: bool,
        zeno_ceiling: usize,
    ) -> Result<Self, EngineError> {
        let n = graph.n();
        if x0.len() != n {
            return Err(EngineError::DimensionMismatch { expected: n, got: x0.len() });
        }
        if params.len() != n {
            return Err(TriggerError::LengthMismatch { expected: n, got: params.len() }.into());
        }
        let agents = x0
            .iter()
            .map(|&x| AgentState { x, xhat: x, e: T::zero(), u: T::zero(), t_last: T::zero() })
            .collect();
        let mut net = Self {
            degrees: graph.degrees(),
            graph,
            params,
            cooldown,
            t: T::zero(),
            agents,
            phi: vec![T::zero(); n],
            threshold: vec![T::zero(); n],
            generation: vec![0; n],
            queue: BinaryHeap::new(),
            log: EventLog::new(),
            zeno: ZenoGuard { ceiling: zeno_ceiling, window: VecDeque::new() },
        };
        for i in 0..n {
            net.refresh(i);
        }
        for i in 0..n {
            net.reschedule(i)?;
        }
        Ok(net)
    }

    pub fn time(&self) -> T {
        self.t
    }

    pub fn graph(&self) -> &WeightedDigraph<T> {
        &self.graph
    }

    pub fn params(&self) -> &TriggerParams<T> {
        &self.params
    }

    pub fn agents(&self) -> &[AgentState<T>] {
        &self.agents
    }

    pub fn x(&self) -> Vec<T> {
        self.agents.iter().map(|a| a.x).collect()
    }

    pub fn xhat(&self) -> Vec<T> {
        self.agents.iter().map(|a| a.xhat).collect()
    }

    pub fn phi(&self) -> &[T] {
        &self.phi
    }

    pub fn thresholds(&self) -> &[T] {
        &self.threshold
    }

    pub fn log(&self) -> &EventLog<T> {
        &self.log
    }

    pub fn into_log(self) -> EventLog<T> {
        self.log
    }

    /// Recomputes control, `φ` and threshold of agent `i` from current `x̂`.
    fn refresh(&mut self, i: usize) {
        let xhat = self.xhat();
        self.agents[i].u = zhat(&self.graph, &xhat, i);
        self.phi[i] = phi(&self.graph, &xhat, i);
        self.threshold[i] = threshold(self.params.sigma()[i], self.phi[i], self.degrees.d_out[i]);
    }

    /// Invalidates agent `i`'s queued crossing and schedules a fresh one.
    fn reschedule(&mut self, i: usize) -> Result<(), EngineError> {
        self.generation[i] += 1;
        let a = self.agents[i];
        let dt = next_crossing(a.e, a.u, self.threshold[i])?;
        if dt.is_finite() {
            self.queue.push(Reverse(Scheduled { t: self.t + dt, agent: i, generation: self.generation[i] }));
        }
        Ok(())
    }

    fn drop_stale(&mut self) {
        while let Some(Reverse(top)) = self.queue.peek() {
            if top.generation == self.generation[top.agent] {
                break;
            }
            self.queue.pop();
        }
    }

    /// Earliest pending crossing as `(time, agent)`.
    pub fn next_crossing(&mut self) -> Option<(T, usize)> {
        self.drop_stale();
        self.queue.peek().map(|Reverse(s)| (s.t, s.agent))
    }

    /// Advances every state along its current control to `t_target`.
    pub fn step_to(&mut self, t_target: T) -> Result<(), EngineError> {
        if t_target < self.t {
            return Err(EngineError::StepBackwards { from: self.t.to_f64_lossy(), to: t_target.to_f64_lossy() });
        }
        if let Some((t_event, _)) = self.next_crossing() {
            if t_event < t_target {
                return Err(EngineError::StepPastEvent {
                    event: t_event.to_f64_lossy(),
                    target: t_target.to_f64_lossy(),
                });
            }
        }
        let dt = t_target - self.t;
        for a in &mut self.agents {
            a.x += dt * a.u;
            a.e = a.xhat - a.x;
        }
        self.t = t_target;
        Ok(())
    }

    /// Steps to the earliest crossing and processes it. Returns the agents
    /// that broadcast at that instant.
    pub fn fire_next_crossing(&mut self) -> Result<Option<Vec<usize>>, EngineError> {
        let Some((t, i)) = self.next_crossing() else {
            return Ok(None);
        };
        self.step_to(t)?;
        self.queue.pop();
        let check = CrossingCheck { error_sq: self.agents[i].e * self.agents[i].e, threshold: self.threshold[i] };
        self.closure(vec![(i, EventKind::TriggerBroadcast, None, Some(check))]).map(Some)
    }

    /// Steps to the earliest crossing and fires every agent whose crossing
    /// falls on that same instant as one cascade.
    pub fn fire_simultaneous_crossings(&mut self) -> Result<Option<Vec<usize>>, EngineError> {
        let Some((t, _)) = self.next_crossing() else {
            return Ok(None);
        };
        self.step_to(t)?;
        let mut seeds = Vec::new();
        while let Some((t_k, k)) = self.next_crossing() {
            if t_k != t {
                break;
            }
            self.queue.pop();
            let check = CrossingCheck { error_sq: self.agents[k].e * self.agents[k].e, threshold: self.threshold[k] };
            seeds.push((k, EventKind::TriggerBroadcast, None, Some(check)));
        }
        self.closure(seeds).map(Some)
    }

    /// Agent `i` broadcasts at the current time; resolves the same-instant
    /// cascade and returns every agent that broadcast, in broadcast order.
    pub fn process_broadcast(&mut self, i: usize) -> Result<Vec<usize>, EngineError> {
        self.closure(vec![(i, EventKind::TriggerBroadcast, None, None)])
    }

    fn emit(&mut self, ev: SimEvent<T>) -> Result<(), EngineError> {
        if ev.kind.is_broadcast() {
            self.zeno.record(ev.t)?;
        }
        self.log.push(ev);
        Ok(())
    }

    #[allow(clippy::type_complexity)]
    fn closure(
        &mut self,
        seeds: Vec<(usize, EventKind, Option<usize>, Option<CrossingCheck<T>>)>,
    ) -> Result<Vec<usize>, EngineError> {
        let n = self.graph.n();
        let mut queued = vec![false; n];
        let mut fired = vec![false; n];
        let mut order = Vec::new();
        let mut pending: VecDeque<_> = seeds.into_iter().collect();
        for &(i, ..) in &pending {
            queued[i] = true;
        }
        let mut touched = vec![false; n];

        while let Some((k, kind, cause, crossing)) = pending.pop_front() {
            if fired[k] {
                return Err(EngineError::CascadeOverflow { agent: k, t: self.t.to_f64_lossy() });
            }
            let a = &mut self.agents[k];
            a.xhat = a.x;
            a.e = T::zero();
            a.t_last = self.t;
            fired[k] = true;
            touched[k] = true;
            order.push(k);
            self.emit(SimEvent { t: self.t, kind, agent: Some(k), cause, crossing })?;

            self.refresh(k);
            let receivers: Vec<usize> = self.graph.in_neighbors(k).iter().map(|&(j, _)| j).collect();
            for j in receivers {
                self.refresh(j);
                touched[j] = true;
                let a = self.agents[j];
                let forced = self.cooldown && cooldown_rebroadcast(self.t, a.t_last, self.params.epsilon()[j]);
                let violated = should_broadcast_with(a.e, self.phi[j], self.threshold[j]);
                if !(forced || violated) {
                    continue;
                }
                if fired[j] {
                    return Err(EngineError::CascadeOverflow { agent: j, t: self.t.to_f64_lossy() });
                }
                if !queued[j] {
                    queued[j] = true;
                    pending.push_back((j, EventKind::CascadeBroadcast, Some(k), None));
                }
            }
        }
        for i in (0..n).filter(|&i| touched[i]) {
            self.reschedule(i)?;
        }
        Ok(order)
    }

    /// Replaces the communication graph at the current time. Agents whose
    /// weighted in- or out-neighborhood changed broadcast immediately.
    pub fn apply_topology_switch(&mut self, g_new: WeightedDigraph<T>) -> Result<Vec<usize>, EngineError> {
        if g_new.n() != self.graph.n() {
            return Err(EngineError::BadSchedule("switch changes the vertex set".into()));
        }
        check_balanced(&g_new)?;
        let n = g_new.n();
        let changed: Vec<usize> = (0..n)
            .filter(|&i| {
                g_new.out_neighbors(i) != self.graph.out_neighbors(i)
                    || g_new.in_neighbors(i) != self.graph.in_neighbors(i)
            })
            .collect();
        self.degrees = g_new.degrees();
        self.graph = g_new;
        self.emit(SimEvent { t: self.t, kind: EventKind::TopologySwitch, agent: None, cause: None, crossing: None })?;
        for i in 0..n {
            self.refresh(i);
        }
        let seeds = changed.iter().map(|&i| (i, EventKind::SwitchBroadcast, None, None)).collect();
        let fired = self.closure(seeds)?;
        for i in 0..n {
            self.reschedule(i)?;
        }
        Ok(fired)
    }
}

/// Runs the event-triggered law over `[0, horizon]`.
///
/// Precedence at coinciding instants: topology switch, then crossings in
/// ascending agent order, then the sampling grid. Events at exactly the
/// horizon are not processed.
pub fn run<T: Real>(cfg: &SimConfig<T>) -> Result<Trajectory<T>, EngineError> {
    let warnings = cfg.validate()?;
    let graphs = cfg.topology.graphs();
    if graphs.len() > 1 && !cfg.allow_unbalanced {
        // ε must respect every graph the agents may see.
        TriggerParams::for_graphs(&graphs, cfg.params.sigma().to_vec(), Some(cfg.params.epsilon().to_vec()))?;
    }
    let switches: &[(T, WeightedDigraph<T>)] = match &cfg.topology {
        Topology::Static(_) => &[],
        Topology::Switching(s) => &s[1..],
    };
    let mut net = Network::new(
        cfg.topology.initial().clone(),
        cfg.params.clone(),
        &cfg.x0,
        cfg.cooldown,
        cfg.zeno_ceiling,
    )?;
    let mut rec = Recorder::new();
    rec.grid(T::zero(), net.x(), net.xhat());

    let mut next_switch = 0;
    let mut grid_k: usize = 1;
    loop {
        let t_switch = switches.get(next_switch).map(|s| s.0);
        let t_cross = net.next_crossing().map(|c| c.0);
        let t_grid = cfg.sample_dt.map(|dt| T::from_usize_lossy(grid_k) * dt);
        let t_next = [t_switch, t_cross, t_grid].into_iter().flatten().fold(T::infinity(), T::min);
        if !(t_next < cfg.horizon) {
            break;
        }
        if t_switch == Some(t_next) {
            net.step_to(t_next)?;
            net.apply_topology_switch(switches[next_switch].1.clone())?;
            next_switch += 1;
            rec.events(net.log(), &net.x(), &net.xhat());
        } else if t_cross == Some(t_next) {
            match cfg.ties {
                TieBreak::Serial => net.fire_next_crossing()?,
                TieBreak::Simultaneous => net.fire_simultaneous_crossings()?,
            };
            rec.events(net.log(), &net.x(), &net.xhat());
        } else {
            net.step_to(t_next)?;
            rec.grid(t_next, net.x(), net.xhat());
            grid_k += 1;
        }
    }
    net.step_to(cfg.horizon)?;
    if rec.samples.last().is_none_or(|s| s.t < cfg.horizon) {
        rec.grid(cfg.horizon, net.x(), net.xhat());
    }
    Ok(Trajectory { samples: rec.samples, events: net.into_log(), warnings })
}
