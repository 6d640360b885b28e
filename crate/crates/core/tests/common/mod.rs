#![allow(dead_code)]

use etconsensus::{Digraph, WeightedDigraph};
use proptest::prelude::*;

pub const X0: [f64; 5] = [-1.0, 0.0, 2.0, 2.0, 1.0];

pub fn fig1() -> Digraph {
    WeightedDigraph::undirected(5, [(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (3, 4, 1.0)]).unwrap()
}

pub fn fig2() -> Digraph {
    WeightedDigraph::new(
        5,
        [(0, 1, 1.0), (1, 2, 1.0), (1, 3, 0.5), (2, 3, 1.0), (3, 4, 1.5), (4, 0, 1.0), (4, 1, 0.5)],
    )
    .unwrap()
}

/// 1 -> 2 -> 3 -> 1 and 3 -> 4 -> 5 -> 3.
pub fn switching_pair() -> (Digraph, Digraph) {
    let a = WeightedDigraph::new(5, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]).unwrap();
    let b = WeightedDigraph::new(5, [(2, 3, 1.0), (3, 4, 1.0), (4, 2, 1.0)]).unwrap();
    (a, b)
}

/// Sum of weighted directed cycles. The first cycle visits every vertex, so
/// the result is strongly connected; every cycle adds the same weight to the
/// in- and out-degree of its vertices, so the result is weight-balanced.
pub fn cycle_union(n: usize, cycles: &[(Vec<usize>, f64)]) -> Digraph {
    let mut w = vec![vec![0.0; n]; n];
    for (order, weight) in cycles {
        for k in 0..order.len() {
            let (a, b) = (order[k], order[(k + 1) % order.len()]);
            if a != b {
                w[a][b] += weight;
            }
        }
    }
    let edges = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| w[i][j] > 0.0).map(|(i, j)| (i, j, w[i][j]));
    WeightedDigraph::new(n, edges.collect::<Vec<_>>()).unwrap()
}

fn weight() -> impl Strategy<Value = f64> {
    (1u32..=8).prop_map(|k| k as f64 * 0.25)
}

/// Random weight-balanced, strongly connected digraph on 2..=7 vertices.
pub fn balanced_graph() -> impl Strategy<Value = Digraph> {
    (2usize..=7)
        .prop_flat_map(|n| {
            let ham = (Just((0..n).collect::<Vec<_>>()).prop_shuffle(), weight());
            let extra = prop::collection::vec(
                (prop::collection::vec(0..n, 2..=n).prop_map(|mut v| {
                    v.sort_unstable();
                    v.dedup();
                    v
                }), weight()),
                0..3,
            );
            (Just(n), ham, extra)
        })
        .prop_map(|(n, ham, extra)| {
            let mut cycles = vec![ham];
            cycles.extend(extra.into_iter().filter(|(v, _)| v.len() >= 2));
            cycle_union(n, &cycles)
        })
}

pub fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, n)
}
