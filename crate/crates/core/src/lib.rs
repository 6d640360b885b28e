//! Event-triggered average consensus on weight-balanced digraphs.
//!
//! Agents with single-integrator dynamics `ẋ_i = u_i` drive their controls
//! from the last broadcast values of their out-neighbors,
//! `u_i = -Σ_j w_ij (x̂_i - x̂_j)`, and decide locally when to rebroadcast.
//! The crate provides
//!
//! * [`graph`]: weighted digraphs, Laplacians, balance/connectivity checks
//!   and the extreme eigenvalues of `Sym(L)`;
//! * [`triggers`]: triggering functions, broadcast rules and closed-form
//!   crossing times;
//! * [`engine`]: an exact event-driven simulator, including cooldown
//!   cascades and switching topologies;
//! * [`periodic`]: periodically checked triggers and the sampled Laplacian
//!   baseline;
//! * [`analysis`]: Lyapunov values, the exponential-rate certificate and
//!   event statistics;
//! * [`scenario`] and [`trace`]: scenario files and run exports.
//!
//! Numerics are generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the double-precision types used by the file formats.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod engine;
pub mod graph;
pub mod linalg;
pub mod periodic;
pub mod scalar;
pub mod scenario;
pub mod trace;
pub mod triggers;

pub use analysis::{lyapunov, rate_certificate, RateCertificate};
pub use engine::{run, EngineError, EventKind, Network, SimConfig, TieBreak, Topology, Trajectory};
pub use graph::{spectral, SpectralData, WeightedDigraph};
pub use periodic::{run_periodic, PeriodicConfig, PeriodicMode, SufficiencyCheck};
pub use scalar::Real;
pub use scenario::{Mode, ScenarioConfig};
pub use triggers::TriggerParams;

pub type Digraph = WeightedDigraph<f64>;
pub type Digraph32 = WeightedDigraph<f32>;
pub type Params = TriggerParams<f64>;
pub type Params32 = TriggerParams<f32>;
pub type Config = SimConfig<f64>;
pub type Config32 = SimConfig<f32>;
pub type Run = Trajectory<f64>;
pub type Run32 = Trajectory<f32>;
pub type Certificate = RateCertificate<f64>;
