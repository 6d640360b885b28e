//! Weighted digraphs, their Laplacians, structural checks and the spectrum of
//! the symmetric part of the Laplacian.
//!
//! Vertices are `0..n`. An edge `(i, j, w)` makes `j` an out-neighbor of `i`:
//! agent `i` receives `j`'s broadcasts and `j` receives nothing from `i`
//! through this edge.

use std::collections::{HashSet, VecDeque};

use thiserror::Error;

use crate::linalg::{dot, symmetric_eigen, DenseMatrix, EigenError};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T> {
    pub tail: usize,
    pub head: usize,
    pub weight: T,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph must have at least one vertex")]
    Empty,
    #[error("edge {tail}->{head} references a vertex outside 0..{n}")]
    VertexOutOfRange { tail: usize, head: usize, n: usize },
    #[error("self-loop on vertex {vertex}")]
    SelfLoop { vertex: usize },
    #[error("edge {tail}->{head} has non-positive or non-finite weight {weight}")]
    BadWeight { tail: usize, head: usize, weight: f64 },
    #[error("duplicate edge {tail}->{head}")]
    DuplicateEdge { tail: usize, head: usize },
}

/// Directed graph with strictly positive edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph<T> {
    n: usize,
    edges: Vec<Edge<T>>,
    out_nbrs: Vec<Vec<(usize, T)>>,
    in_nbrs: Vec<Vec<(usize, T)>>,
}

impl<T: Real> WeightedDigraph<T> {
    /// Validates and indexes an edge list. Duplicates are rejected rather
    /// than merged.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, T)>) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut seen = HashSet::new();
        let mut out_nbrs = vec![Vec::new(); n];
        let mut in_nbrs = vec![Vec::new(); n];
        let mut list = Vec::new();
        for (tail, head, weight) in edges {
            if tail >= n || head >= n {
                return Err(GraphError::VertexOutOfRange { tail, head, n });
            }
            if tail == head {
                return Err(GraphError::SelfLoop { vertex: tail });
            }
            if !(weight > T::zero()) || !weight.is_finite() {
                return Err(GraphError::BadWeight { tail, head, weight: weight.to_f64_lossy() });
            }
            if !seen.insert((tail, head)) {
                return Err(GraphError::DuplicateEdge { tail, head });
            }
            out_nbrs[tail].push((head, weight));
            in_nbrs[head].push((tail, weight));
            list.push(Edge { tail, head, weight });
        }
        for nbrs in out_nbrs.iter_mut().chain(in_nbrs.iter_mut()) {
            nbrs.sort_by_key(|&(v, _)| v);
        }
        Ok(Self { n, edges: list, out_nbrs, in_nbrs })
    }

    /// Each undirected pair becomes two directed edges of the same weight.
    pub fn undirected(n: usize, pairs: impl IntoIterator<Item = (usize, usize, T)>) -> Result<Self, GraphError> {
        let edges: Vec<_> = pairs.into_iter().flat_map(|(a, b, w)| [(a, b, w), (b, a, w)]).collect();
        Self::new(n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    /// Out-neighbors of `i` with weights, sorted by vertex id.
    pub fn out_neighbors(&self, i: usize) -> &[(usize, T)] {
        &self.out_nbrs[i]
    }

    /// In-neighbors of `i` with weights, sorted by vertex id.
    pub fn in_neighbors(&self, i: usize) -> &[(usize, T)] {
        &self.in_nbrs[i]
    }

    pub fn weight(&self, i: usize, j: usize) -> T {
        self.out_nbrs[i]
            .binary_search_by_key(&j, |&(v, _)| v)
            .map_or(T::zero(), |k| self.out_nbrs[i][k].1)
    }

    pub fn degrees(&self) -> DegreeData<T> {
        DegreeData::of(self)
    }

    /// `L = D_out - W`.
    pub fn laplacian(&self) -> DenseMatrix<T> {
        let mut l = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let mut d = T::zero();
            for &(j, w) in &self.out_nbrs[i] {
                l[(i, j)] = -w;
                d += w;
            }
            l[(i, i)] = d;
        }
        l
    }

    /// `xᵀ L x` evaluated edge-wise, without forming `L`.
    pub fn laplacian_quadratic(&self, x: &[T]) -> T {
        dot(x, &self.laplacian_apply(x))
    }

    /// `L x`.
    pub fn laplacian_apply(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| self.out_nbrs[i].iter().map(|&(j, w)| w * (x[i] - x[j])).sum())
            .collect()
    }

    /// Largest absolute gap between weighted out- and in-degree, with the
    /// vertex where it occurs.
    pub fn max_imbalance(&self) -> (usize, T) {
        let d = self.degrees();
        (0..self.n)
            .map(|i| (i, (d.d_out[i] - d.d_in[i]).abs()))
            .fold((0, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best })
    }

    pub fn is_weight_balanced(&self, tol: T) -> bool {
        self.max_imbalance().1 <= tol
    }

    /// Vertices reachable from `src` along directed edges.
    fn reach(&self, src: usize, forward: bool) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([src]);
        seen[src] = true;
        while let Some(v) = queue.pop_front() {
            let nbrs = if forward { &self.out_nbrs[v] } else { &self.in_nbrs[v] };
            for &(u, _) in nbrs {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        seen
    }

    /// First vertex that is either unreachable from vertex 0 or cannot reach
    /// it, if any.
    pub fn connectivity_witness(&self) -> Option<usize> {
        let fwd = self.reach(0, true);
        let bwd = self.reach(0, false);
        (0..self.n).find(|&v| !fwd[v] || !bwd[v])
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.connectivity_witness().is_none()
    }

    /// Union of several graphs on the same vertex set (weights summed).
    pub fn union<'a>(graphs: impl IntoIterator<Item = &'a Self>) -> Option<Self> {
        let mut graphs = graphs.into_iter().peekable();
        let n = graphs.peek()?.n;
        let mut acc: Vec<Vec<T>> = vec![vec![T::zero(); n]; n];
        for g in graphs {
            if g.n != n {
                return None;
            }
            for e in &g.edges {
                acc[e.tail][e.head] += e.weight;
            }
        }
        let edges = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| acc[i][j] > T::zero())
            .map(|(i, j)| (i, j, acc[i][j]))
            .collect::<Vec<_>>();
        Self::new(n, edges).ok()
    }

    /// Same graph with vertex `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self, GraphError> {
        Self::new(self.n, self.edges.iter().map(|e| (perm[e.tail], perm[e.head], e.weight)))
    }
}

/// Degree quantities entering the trigger and convergence bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeData<T> {
    pub d_out: Vec<T>,
    pub d_in: Vec<T>,
    pub d_min_out: T,
    /// Maximum weighted out-degree.
    pub d_max: T,
    /// Largest outgoing weight per vertex (zero when there is none).
    pub w_i_max: Vec<T>,
    pub w_max: T,
    pub n_out: Vec<usize>,
    pub n_out_max: usize,
}

impl<T: Real> DegreeData<T> {
    pub fn of(g: &WeightedDigraph<T>) -> Self {
        let n = g.n();
        let d_out: Vec<T> = (0..n).map(|i| g.out_neighbors(i).iter().map(|&(_, w)| w).sum()).collect();
        let d_in: Vec<T> = (0..n).map(|i| g.in_neighbors(i).iter().map(|&(_, w)| w).sum()).collect();
        let w_i_max: Vec<T> = (0..n)
            .map(|i| g.out_neighbors(i).iter().fold(T::zero(), |m, &(_, w)| m.max(w)))
            .collect();
        let n_out: Vec<usize> = (0..n).map(|i| g.out_neighbors(i).len()).collect();
        Self {
            d_min_out: d_out.iter().copied().fold(T::infinity(), T::min),
            d_max: d_out.iter().copied().fold(T::zero(), T::max),
            w_max: w_i_max.iter().copied().fold(T::zero(), T::max),
            n_out_max: n_out.iter().copied().max().unwrap_or(0),
            d_out,
            d_in,
            w_i_max,
            n_out,
        }
    }

    /// Fresh-broadcast inter-event lower bound
    /// `sqrt(σ_i / (4 d_i w_i^max |N_i|))`; infinite for a vertex without
    /// out-neighbors.
    pub fn interevent_floor(&self, i: usize, sigma: T) -> T {
        let denom = T::lit(4.0) * self.d_out[i] * self.w_i_max[i] * T::from_usize_lossy(self.n_out[i]);
        if denom == T::zero() {
            T::infinity()
        } else {
            (sigma / denom).sqrt()
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("spectral data needs at least two vertices")]
    TooSmall,
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("spectral bound check failed: {0}")]
    BoundViolated(String),
}

/// Extreme nonzero part of the spectrum of `Sym(L) = (L + Lᵀ)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralData<T> {
    /// Second-smallest eigenvalue (algebraic connectivity).
    pub lambda2: T,
    /// Largest eigenvalue.
    pub lambda_n: T,
}

/// Eigenvalues of `Sym(L)` via cyclic Jacobi.
///
/// The result is cross-checked against `xᵀLx >= λ₂‖x - x̄‖²` and
/// `xᵀLx <= λ_N‖x - x̄‖²` on the basis differences `e_i - e_j` before it is
/// returned.
pub fn spectral<T: Real>(g: &WeightedDigraph<T>) -> Result<SpectralData<T>, SpectralError> {
    let n = g.n();
    if n < 2 {
        return Err(SpectralError::TooSmall);
    }
    let sym = g.laplacian().symmetric_part();
    let eig = symmetric_eigen(&sym, T::eigen_tol())?;
    let data = SpectralData { lambda2: eig.values[1], lambda_n: eig.values[n - 1] };

    // ‖e_i - e_j - mean‖² = 2 for every pair.
    let slack = T::lit(1e3) * T::eigen_tol() * sym.frobenius_norm().max(T::one());
    let two = T::lit(2.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut x = vec![T::zero(); n];
            x[i] = T::one();
            x[j] = -T::one();
            let q = g.laplacian_quadratic(&x);
            if q < data.lambda2 * two - slack || q > data.lambda_n * two + slack {
                return Err(SpectralError::BoundViolated(format!(
                    "pair ({i},{j}): xᵀLx = {q} outside [{}, {}]",
                    data.lambda2 * two,
                    data.lambda_n * two
                )));
            }
        }
    }
    Ok(data)
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

    #[test]
    fn two_node_laplacian() {
        let g = WeightedDigraph::undirected(2, [(0, 1, 1.0)]).unwrap();
        assert_eq!(g.laplacian().to_rows(), vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
    }

    #[test]
    fn fig2_rows_and_columns_sum_to_zero() {
        let l = fig2().laplacian();
        assert!(l.row_sums().iter().all(|&s| s == 0.0));
        assert!(l.col_sums().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn balance_checks() {
        assert!(fig2().is_weight_balanced(1e-9));
        let fig1 = WeightedDigraph::undirected(5, [(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (3, 4, 1.0)]).unwrap();
        assert!(fig1.is_weight_balanced(1e-9));
        let one_way = WeightedDigraph::new(2, [(0, 1, 1.0)]).unwrap();
        assert!(!one_way.is_weight_balanced(1e-9));
        assert_eq!(one_way.max_imbalance(), (0, 1.0));
    }

    #[test]
    fn connectivity() {
        assert!(fig2().is_strongly_connected());
        let one_way = WeightedDigraph::new(2, [(0, 1, 1.0)]).unwrap();
        assert!(!one_way.is_strongly_connected());
        assert_eq!(one_way.connectivity_witness(), Some(1));
        let k3 = WeightedDigraph::undirected(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]).unwrap();
        assert!(k3.is_strongly_connected());
        let single = WeightedDigraph::<f64>::new(1, []).unwrap();
        assert!(single.is_strongly_connected());
    }

    #[test]
    fn constructor_rejects_bad_edges() {
        assert_eq!(WeightedDigraph::<f64>::new(0, []), Err(GraphError::Empty));
        assert!(matches!(WeightedDigraph::new(2, [(0, 0, 1.0)]), Err(GraphError::SelfLoop { vertex: 0 })));
        assert!(matches!(WeightedDigraph::new(2, [(0, 2, 1.0)]), Err(GraphError::VertexOutOfRange { .. })));
        assert!(matches!(WeightedDigraph::new(2, [(0, 1, 0.0)]), Err(GraphError::BadWeight { .. })));
        assert!(matches!(WeightedDigraph::new(2, [(0, 1, f64::NAN)]), Err(GraphError::BadWeight { .. })));
        assert_eq!(
            WeightedDigraph::new(2, [(0, 1, 1.0), (0, 1, 2.0)]),
            Err(GraphError::DuplicateEdge { tail: 0, head: 1 })
        );
    }

    #[test]
    fn fig2_degrees() {
        let d = fig2().degrees();
        assert_eq!(d.d_out, vec![1.0, 1.5, 1.0, 1.5, 1.5]);
        assert_eq!(d.d_in, d.d_out);
        assert_eq!(d.d_min_out, 1.0);
        assert_eq!(d.d_max, 1.5);
        assert_eq!(d.w_i_max, vec![1.0, 1.0, 1.0, 1.5, 1.0]);
        assert_eq!(d.w_max, 1.5);
        assert_eq!(d.n_out, vec![1, 2, 1, 1, 2]);
        assert_eq!(d.n_out_max, 2);
    }

    #[test]
    fn small_spectra() {
        let g = WeightedDigraph::undirected(2, [(0, 1, 1.0)]).unwrap();
        let s = spectral(&g).unwrap();
        assert_abs_diff_eq!(s.lambda2, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.lambda_n, 2.0, epsilon = 1e-12);

        let k3 = WeightedDigraph::undirected(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]).unwrap();
        let s = spectral(&k3).unwrap();
        assert_abs_diff_eq!(s.lambda2, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.lambda_n, 3.0, epsilon = 1e-12);

        assert_eq!(spectral(&WeightedDigraph::<f64>::new(1, []).unwrap()), Err(SpectralError::TooSmall));
    }

    #[test]
    fn weight_lookup_and_union() {
        let g = fig2();
        assert_eq!(g.weight(1, 3), 0.5);
        assert_eq!(g.weight(3, 1), 0.0);
        let a = WeightedDigraph::new(3, [(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let b = WeightedDigraph::new(3, [(1, 2, 1.0), (2, 1, 1.0), (0, 1, 1.0)]).unwrap();
        let u = WeightedDigraph::union([&a, &b]).unwrap();
        assert!(u.is_strongly_connected());
        assert_eq!(u.weight(0, 1), 2.0);
    }
}
