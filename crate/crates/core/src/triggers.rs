//! Local triggering functions and broadcast rules.
//!
//! Agent `i` keeps its broadcast error `e_i = x̂_i - x_i` inside
//! `e_i² <= σ_i φ_i / (4 d_i^out)` where
//! `φ_i = Σ_{j ∈ N_i^out} w_ij (x̂_i - x̂_j)²`. Between broadcasts every
//! control is constant, so the error is affine in time and the next
//! violation can be solved for in closed form.

use thiserror::Error;

use crate::graph::{DegreeData, WeightedDigraph};
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TriggerError {
    #[error("expected {expected} per-agent values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("agent {agent}: sigma = {sigma} must lie in (0, 1)")]
    SigmaOutOfRange { agent: usize, sigma: f64 },
    #[error("agent {agent}: epsilon = {epsilon} must be positive and finite")]
    EpsilonNonPositive { agent: usize, epsilon: f64 },
    #[error(
        "agent {agent}: epsilon = {epsilon} violates the cooldown bound \
         epsilon < sqrt(sigma / (4 d_out w_max |N_out|)) = {bound}"
    )]
    EpsilonTooLarge { agent: usize, epsilon: f64, bound: f64 },
    #[error("inconsistent state: error² = {error_sq} already exceeds threshold {threshold}")]
    InconsistentState { error_sq: f64, threshold: f64 },
}

/// Per-agent trigger design parameters `σ_i` and cooldown window `ε_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriggerParams<T> {
    sigma: Vec<T>,
    epsilon: Vec<T>,
}

/// Fallback cooldown for agents that have no out-neighbor in any graph (their
/// inter-event bound is infinite).
const ISOLATED_EPSILON: f64 = 1.0;

impl<T: Real> TriggerParams<T> {
    /// Validates `sigma` and `epsilon` against every graph the agents will
    /// communicate over. Missing `epsilon` defaults to half of each agent's
    /// bound.
    pub fn for_graphs(
        graphs: &[&WeightedDigraph<T>],
        sigma: Vec<T>,
        epsilon: Option<Vec<T>>,
    ) -> Result<Self, TriggerError> {
        let n = graphs.first().map_or(sigma.len(), |g| g.n());
        if sigma.len() != n {
            return Err(TriggerError::LengthMismatch { expected: n, got: sigma.len() });
        }
        for (agent, &s) in sigma.iter().enumerate() {
            if !(s > T::zero() && s < T::one()) {
                return Err(TriggerError::SigmaOutOfRange { agent, sigma: s.to_f64_lossy() });
            }
        }
        let degrees: Vec<DegreeData<T>> = graphs.iter().map(|g| g.degrees()).collect();
        let bounds: Vec<T> = (0..n)
            .map(|i| {
                degrees
                    .iter()
                    .map(|d| d.interevent_floor(i, sigma[i]))
                    .fold(T::infinity(), T::min)
            })
            .collect();

        let epsilon = match epsilon {
            Some(eps) => {
                if eps.len() != n {
                    return Err(TriggerError::LengthMismatch { expected: n, got: eps.len() });
                }
                for (agent, (&e, &b)) in eps.iter().zip(&bounds).enumerate() {
                    if !(e > T::zero()) || !e.is_finite() {
                        return Err(TriggerError::EpsilonNonPositive { agent, epsilon: e.to_f64_lossy() });
                    }
                    if !(e < b) {
                        return Err(TriggerError::EpsilonTooLarge {
                            agent,
                            epsilon: e.to_f64_lossy(),
                            bound: b.to_f64_lossy(),
                        });
                    }
                }
                eps
            }
            None => bounds
                .iter()
                .map(|&b| if b.is_finite() { b * T::lit(0.5) } else { T::lit(ISOLATED_EPSILON) })
                .collect(),
        };
        Ok(Self { sigma, epsilon })
    }

    pub fn new(g: &WeightedDigraph<T>, sigma: Vec<T>, epsilon: Option<Vec<T>>) -> Result<Self, TriggerError> {
        Self::for_graphs(&[g], sigma, epsilon)
    }

    /// Same `σ` for every agent, default cooldowns.
    pub fn uniform(g: &WeightedDigraph<T>, sigma: T) -> Result<Self, TriggerError> {
        Self::new(g, vec![sigma; g.n()], None)
    }

    /// Skips every validity check. Only meant for building deliberately
    /// broken configurations in tests and diagnostics.
    pub fn unchecked(sigma: Vec<T>, epsilon: Vec<T>) -> Self {
        assert_eq!(sigma.len(), epsilon.len());
        Self { sigma, epsilon }
    }

    pub fn sigma(&self) -> &[T] {
        &self.sigma
    }

    pub fn epsilon(&self) -> &[T] {
        &self.epsilon
    }

    pub fn sigma_max(&self) -> T {
        self.sigma.iter().copied().fold(T::zero(), T::max)
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }
}

/// Upper bound on `ε_i` for a single graph: the fresh-broadcast inter-event
/// floor of agent `i`.
pub fn epsilon_bound<T: Real>(g: &WeightedDigraph<T>, i: usize, sigma: T) -> T {
    g.degrees().interevent_floor(i, sigma)
}

/// `φ_i = Σ_{j ∈ N_i^out} w_ij (x̂_i - x̂_j)²`.
pub fn phi<T: Real>(g: &WeightedDigraph<T>, xhat: &[T], i: usize) -> T {
    g.out_neighbors(i)
        .iter()
        .map(|&(j, w)| {
            let d = xhat[i] - xhat[j];
            w * d * d
        })
        .sum()
}

/// `ẑ_i = Σ_{j ∈ N_i^out} w_ij (x̂_j - x̂_i)`, the control of agent `i`.
pub fn zhat<T: Real>(g: &WeightedDigraph<T>, xhat: &[T], i: usize) -> T {
    g.out_neighbors(i).iter().map(|&(j, w)| w * (xhat[j] - xhat[i])).sum()
}

/// `σ_i φ_i / (4 d_i^out)`; zero for an agent without out-neighbors.
pub fn threshold<T: Real>(sigma: T, phi: T, d_out: T) -> T {
    if d_out == T::zero() {
        T::zero()
    } else {
        sigma * phi / (T::lit(4.0) * d_out)
    }
}

/// Triggering function `f_i(e_i) = e_i² - σ_i φ_i / (4 d_i^out)`.
pub fn triggering_function<T: Real>(g: &WeightedDigraph<T>, xhat: &[T], i: usize, e_i: T, sigma_i: T) -> T {
    let d_out = g.out_neighbors(i).iter().map(|&(_, w)| w).sum();
    e_i * e_i - threshold(sigma_i, phi(g, xhat, i), d_out)
}

/// Broadcast rule on precomputed quantities: fire when `f_i > 0`, or when
/// `f_i = 0` (to relative tolerance) and `φ_i ≠ 0`.
pub fn should_broadcast_with<T: Real>(e_i: T, phi_i: T, threshold_i: T) -> bool {
    let e2 = e_i * e_i;
    if phi_i == T::zero() {
        return e2 > T::zero();
    }
    e2 >= threshold_i * (T::one() - T::trigger_eq_tol())
}

pub fn should_broadcast<T: Real>(
    g: &WeightedDigraph<T>,
    xhat: &[T],
    i: usize,
    e_i: T,
    params: &TriggerParams<T>,
) -> bool {
    let p = phi(g, xhat, i);
    let d_out = g.out_neighbors(i).iter().map(|&(_, w)| w).sum();
    should_broadcast_with(e_i, p, threshold(params.sigma[i], p, d_out))
}

/// Cooldown rule: a reception at `t` forces a rebroadcast iff
/// `t ∈ (t_last, t_last + ε)`.
pub fn cooldown_rebroadcast<T: Real>(t: T, t_last: T, eps: T) -> bool {
    t > t_last && t < t_last + eps
}

/// Time until `(e0 - Δ ẑ)² = threshold`, or infinity when `ẑ = 0`.
///
/// Requires `e0² <= threshold` up to the equality tolerance. A result of
/// zero means the error sits on the boundary and is moving outward.
pub fn next_crossing<T: Real>(e0: T, zhat: T, threshold: T) -> Result<T, TriggerError> {
    let e2 = e0 * e0;
    if e2 > threshold * (T::one() + T::trigger_eq_tol()) {
        return Err(TriggerError::InconsistentState {
            error_sq: e2.to_f64_lossy(),
            threshold: threshold.to_f64_lossy(),
        });
    }
    if zhat == T::zero() {
        return Ok(T::infinity());
    }
    let root = threshold.sqrt();
    let dt = (root + zhat.signum() * e0) / zhat.abs();
    Ok(dt.max(T::zero()))
}

/// `φ`, thresholds and `ẑ` for all agents at one broadcast configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct TriggerSnapshot<T> {
    pub phi: Vec<T>,
    pub threshold: Vec<T>,
    pub zhat: Vec<T>,
}

impl<T: Real> TriggerSnapshot<T> {
    pub fn compute(g: &WeightedDigraph<T>, xhat: &[T], params: &TriggerParams<T>) -> Self {
        let d = g.degrees();
        let phi: Vec<T> = (0..g.n()).map(|i| phi(g, xhat, i)).collect();
        let threshold = (0..g.n()).map(|i| threshold(params.sigma[i], phi[i], d.d_out[i])).collect();
        let zhat = (0..g.n()).map(|i| zhat(g, xhat, i)).collect();
        Self { phi, threshold, zhat }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fig2() -> WeightedDigraph<f64> {
        WeightedDigraph::new(
            5,
            [(0, 1, 1.0), (1, 2, 1.0), (1, 3, 0.5), (2, 3, 1.0), (3, 4, 1.5), (4, 0, 1.0), (4, 1, 0.5)],
        )
        .unwrap()
    }

    const X0: [f64; 5] = [-1.0, 0.0, 2.0, 2.0, 1.0];

    #[test]
    fn phi_values() {
        let g = fig2();
        assert_eq!(phi(&g, &[3.0; 5], 2), 0.0);
        assert_eq!(phi(&g, &X0, 0), 1.0);
        assert_eq!(phi(&g, &X0, 1), 6.0);
    }

    #[test]
    fn triggering_function_values() {
        let g = fig2();
        assert_abs_diff_eq!(triggering_function(&g, &X0, 0, 0.3, 0.999), -0.15975, epsilon = 1e-15);
        assert_abs_diff_eq!(triggering_function(&g, &[1.0; 5], 0, 0.1, 0.5), 0.01, epsilon = 1e-15);
        let f0 = triggering_function(&g, &X0, 1, 0.0, 0.5);
        assert_abs_diff_eq!(f0, -0.5 * 6.0 / (4.0 * 1.5), epsilon = 1e-15);
    }

    #[test]
    fn broadcast_rule() {
        let g = fig2();
        let p = TriggerParams::uniform(&g, 0.999).unwrap();
        assert!(!should_broadcast(&g, &X0, 0, 0.0, &p));
        assert!(should_broadcast(&g, &[1.0; 5], 0, 0.1, &p));
        assert!(!should_broadcast(&g, &[1.0; 5], 0, 0.0, &p));
        // exactly on the boundary with φ > 0 fires
        assert!(should_broadcast_with(0.5, 1.0, 0.25));
        assert!(!should_broadcast_with(0.49, 1.0, 0.25));
        assert!(should_broadcast_with(0.51, 1.0, 0.25));
    }

    #[test]
    fn cooldown_window_is_open() {
        assert!(!cooldown_rebroadcast(1.0, 1.0, 0.2));
        assert!(cooldown_rebroadcast(1.1, 1.0, 0.2));
        assert!(!cooldown_rebroadcast(1.25, 1.0, 0.25));
        assert!(!cooldown_rebroadcast(2.0, 1.0, 0.25));
    }

    #[test]
    fn next_crossing_cases() {
        assert_eq!(next_crossing(0.0, 0.0, 0.0).unwrap(), f64::INFINITY);
        // single out-neighbor, x̂_i = 1, x̂_j = 0: ẑ = -1, threshold = 0.999/4
        let dt = next_crossing(0.0, -1.0, 0.24975).unwrap();
        assert_abs_diff_eq!(dt, 0.4997499374687305, epsilon = 1e-12);
        // nonzero start moving inward crosses the far boundary
        assert_abs_diff_eq!(next_crossing(0.5, 1.0, 1.0).unwrap(), 1.5, epsilon = 1e-15);
        // on the boundary moving outward
        assert_eq!(next_crossing(1.0, -1.0, 1.0).unwrap(), 0.0);
        assert!(matches!(next_crossing(2.0, 1.0, 1.0), Err(TriggerError::InconsistentState { .. })));
    }

    #[test]
    fn params_validation() {
        let g = fig2();
        assert!(matches!(
            TriggerParams::uniform(&g, 1.0),
            Err(TriggerError::SigmaOutOfRange { agent: 0, .. })
        ));
        assert!(matches!(TriggerParams::uniform(&g, 0.0), Err(TriggerError::SigmaOutOfRange { .. })));
        let p = TriggerParams::uniform(&g, 0.999).unwrap();
        let bound0 = (0.999f64 / 4.0).sqrt();
        assert_abs_diff_eq!(p.epsilon()[0], 0.5 * bound0, epsilon = 1e-15);
        let err = TriggerParams::new(&g, vec![0.999; 5], Some(vec![bound0; 5])).unwrap_err();
        assert!(matches!(err, TriggerError::EpsilonTooLarge { agent: 0, .. }));
        assert!(err.to_string().contains("sqrt(sigma / (4 d_out w_max |N_out|))"));
        assert!(matches!(
            TriggerParams::new(&g, vec![0.5; 4], None),
            Err(TriggerError::LengthMismatch { expected: 5, got: 4 })
        ));
        assert!(matches!(
            TriggerParams::new(&g, vec![0.5; 5], Some(vec![0.0; 5])),
            Err(TriggerError::EpsilonNonPositive { .. })
        ));
    }

    #[test]
    fn snapshot_sum_identity() {
        let g = fig2();
        let p = TriggerParams::uniform(&g, 0.5).unwrap();
        let s = TriggerSnapshot::compute(&g, &X0, &p);
        let total: f64 = s.phi.iter().sum();
        assert_abs_diff_eq!(total, 2.0 * g.laplacian_quadratic(&X0), epsilon = 1e-12);
        for i in 0..5 {
            assert_eq!(s.zhat[i], -g.laplacian_apply(&X0)[i]);
        }
    }
}
