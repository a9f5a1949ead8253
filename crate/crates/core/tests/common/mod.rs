//! Independent reference computations shared by the integration tests.
//! Nothing here calls the closed forms it is used to check.

#![allow(dead_code)]

use halpern_sopt::{Ball, ConvexFunction, OperatorExpr, Point};
use proptest::prelude::*;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Minimizes a unimodal scalar function on `[lo, hi]` by golden-section
/// search down to a bracket of width `tol`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Brute-force prox: golden-section minimization of
/// `f(y) + ||z - y||^2 / (2 gamma)` one coordinate at a time, using only
/// `f.eval`. The objective is separable, so one sweep is exact up to the
/// line-search tolerance.
pub fn prox_oracle(f: &ConvexFunction, gamma: f64, z: &[f64]) -> Vec<f64> {
    let mut y = z.to_vec();
    let radius = 2.0 + z.iter().map(|v| v.abs()).fold(0.0, f64::max) * 2.0 + gamma * 20.0;
    for j in 0..z.len() {
        let objective = |t: f64| {
            let mut trial = y.clone();
            trial[j] = t;
            let p = Point::new(trial).unwrap();
            f.eval(&p).unwrap() + (z[j] - t) * (z[j] - t) / (2.0 * gamma)
        };
        y[j] = golden_section_min(objective, z[j] - radius, z[j] + radius, 1e-10);
    }
    y
}

/// Stationary law by power iteration `pi <- pi P` until successive
/// iterates differ by less than `1e-14` in sup norm.
pub fn power_iteration_stationary(p: &[Vec<f64>]) -> Vec<f64> {
    let n = p.len();
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..1_000_000 {
        let next: Vec<f64> = (0..n)
            .map(|j| (0..n).map(|i| pi[i] * p[i][j]).sum())
            .collect();
        let delta = next
            .iter()
            .zip(&pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        pi = next;
        if delta < 1e-14 {
            break;
        }
    }
    pi
}

/// Central finite-difference gradient.
pub fn finite_difference_gradient(f: &ConvexFunction, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|j| {
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[j] += h;
            down[j] -= h;
            let fu = f.eval(&Point::new(up).unwrap()).unwrap();
            let fd = f.eval(&Point::new(down).unwrap()).unwrap();
            (fu - fd) / (2.0 * h)
        })
        .collect()
}

pub fn pt(v: Vec<f64>) -> Point {
    Point::new(v).unwrap()
}

pub fn coords(dim: usize, scale: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-scale..scale, dim)
}

pub fn ball(dim: usize) -> impl Strategy<Value = Ball> {
    (coords(dim, 2.0), 0.05..2.0f64).prop_map(|(c, r)| Ball::new(pt(c), r).unwrap())
}

/// Random member of the operator grammar on `R^dim`.
pub fn operator(dim: usize) -> impl Strategy<Value = OperatorExpr> {
    let leaf = prop_oneof![
        Just(OperatorExpr::Identity),
        ball(dim).prop_map(OperatorExpr::ball_projection),
        (ball(dim), prop::collection::vec(ball(dim), 1..4))
            .prop_map(|(o, i)| OperatorExpr::gcfs(o, i).unwrap()),
    ];
    leaf.prop_recursive(3, 8, 1, |inner| inner.prop_map(OperatorExpr::half_averaged))
}

pub fn diag_quadratic(dim: usize) -> impl Strategy<Value = ConvexFunction> {
    (prop::collection::vec(0.0..10.0f64, dim), coords(dim, 2.0))
        .prop_map(|(l, b)| ConvexFunction::diag_quadratic(l, b).unwrap())
}

pub fn weighted_l1(dim: usize) -> impl Strategy<Value = ConvexFunction> {
    (prop::collection::vec(0.01..3.0f64, dim), coords(dim, 2.0))
        .prop_map(|(w, a)| ConvexFunction::weighted_l1(w, a).unwrap())
}

pub fn convex_function(dim: usize) -> impl Strategy<Value = ConvexFunction> {
    prop_oneof![diag_quadratic(dim), weighted_l1(dim)]
}
