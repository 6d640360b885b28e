mod common;

use approx::assert_abs_diff_eq;
use common::{fig1, fig2};
use etconsensus::{spectral, Digraph, WeightedDigraph};

/// Characteristic polynomial coefficients of an integer matrix, constant
/// term first, leading coefficient 1 (Faddeev-LeVerrier, exact in i128).
fn char_poly(a: &[Vec<i128>]) -> Vec<i128> {
    let n = a.len();
    let mut c = vec![0i128; n + 1];
    c[n] = 1;
    let mut m = vec![vec![0i128; n]; n];
    for k in 1..=n {
        let mut next = vec![vec![0i128; n]; n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = (0..n).map(|l| a[i][l] * m[l][j]).sum::<i128>();
            }
            next[i][i] += c[n - k + 1];
        }
        m = next;
        let trace: i128 = (0..n).map(|i| (0..n).map(|l| a[i][l] * m[l][i]).sum::<i128>()).sum();
        assert_eq!(trace % k as i128, 0);
        c[n - k] = -trace / k as i128;
    }
    c
}

fn eval(c: &[i128], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k as f64)
}

/// Simple real roots of `c` in `[lo, hi]`, by sign changes on a fine grid
/// refined with bisection.
fn roots(c: &[i128], lo: f64, hi: f64) -> Vec<f64> {
    let steps = 200_000;
    let dx = (hi - lo) / steps as f64;
    let mut out = Vec::new();
    for k in 0..steps {
        let (mut a, mut b) = (lo + k as f64 * dx, lo + (k + 1) as f64 * dx);
        let (fa, fb) = (eval(c, a), eval(c, b));
        if fa == 0.0 {
            out.push(a);
            continue;
        }
        if fa * fb > 0.0 {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if eval(c, a) * eval(c, m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        out.push(0.5 * (a + b));
    }
    out
}

/// Eigenvalues of `Sym(L)` for graphs whose weights are multiples of 0.5.
fn oracle(g: &Digraph) -> Vec<f64> {
    let s = g.laplacian().symmetric_part();
    let n = g.n();
    let a: Vec<Vec<i128>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let v = 4.0 * s[(i, j)];
                    assert_eq!(v, v.round());
                    v as i128
                })
                .collect()
        })
        .collect();
    let c = char_poly(&a);
    assert_eq!(c[0], 0, "zero must be an eigenvalue");
    let reduced = &c[1..];
    let bound = a.iter().map(|r| r.iter().map(|v| v.abs()).sum::<i128>()).max().unwrap() as f64 + 1.0;
    let r = roots(reduced, 1e-6, bound);
    assert_eq!(r.len(), n - 1, "expected simple nonzero roots, got {r:?}");
    let mut ev: Vec<f64> = r.into_iter().map(|mu| mu / 4.0).collect();
    ev.insert(0, 0.0);
    ev
}

#[test]
fn characteristic_polynomial_sanity() {
    // diag(1, 2): (x - 1)(x - 2) = 2 - 3x + x^2
    assert_eq!(char_poly(&[vec![1, 0], vec![0, 2]]), vec![2, -3, 1]);
    assert_eq!(char_poly(&[vec![1, -1], vec![-1, 1]]), vec![0, -2, 1]);
}

#[test]
fn fig2_matches_polynomial_oracle() {
    let g = fig2();
    let ev = oracle(&g);
    let s = spectral(&g).unwrap();
    assert_abs_diff_eq!(s.lambda2, ev[1], epsilon = 1e-10);
    assert_abs_diff_eq!(s.lambda_n, ev[4], epsilon = 1e-10);
    assert_abs_diff_eq!(s.lambda2, 0.8246094703208939, epsilon = 1e-10);
    assert_abs_diff_eq!(s.lambda_n, 2.4253905296791065, epsilon = 1e-10);
}

#[test]
fn fig1_matches_polynomial_oracle() {
    let g = fig1();
    let ev = oracle(&g);
    let s = spectral(&g).unwrap();
    assert_abs_diff_eq!(s.lambda2, ev[1], epsilon = 1e-10);
    assert_abs_diff_eq!(s.lambda_n, ev[4], epsilon = 1e-10);
}

#[test]
fn small_known_spectra() {
    let pair = WeightedDigraph::undirected(2, [(0, 1, 1.0)]).unwrap();
    let s = spectral(&pair).unwrap();
    assert_abs_diff_eq!(s.lambda2, 2.0, epsilon = 1e-12);
    assert_abs_diff_eq!(s.lambda_n, 2.0, epsilon = 1e-12);

    let k3 = WeightedDigraph::undirected(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]).unwrap();
    let s = spectral(&k3).unwrap();
    assert_abs_diff_eq!(s.lambda2, 3.0, epsilon = 1e-12);
    assert_abs_diff_eq!(s.lambda_n, 3.0, epsilon = 1e-12);
}

#[test]
fn f32_spectrum_tracks_f64() {
    let g = fig2();
    let g32 = WeightedDigraph::new(5, g.edges().iter().map(|e| (e.tail, e.head, e.weight as f32))).unwrap();
    let s = spectral(&g32).unwrap();
    assert!((s.lambda2 as f64 - 0.8246094703208939).abs() < 1e-5);
    assert!((s.lambda_n as f64 - 2.4253905296791065).abs() < 1e-5);
}
