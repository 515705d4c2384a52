//! Independent re-derivations shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use subdiff::problem::ProblemSpec;
use subdiff::solver::{GhostPolicy, SchemeKind};

pub const A6: [f64; 5] = [-1.0 / 90.0, 2.0 / 45.0, 14.0 / 15.0, 2.0 / 45.0, -1.0 / 90.0];
pub const B6: [f64; 5] = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
pub const A8: [f64; 7] = [
    1.0 / 560.0,
    -3.0 / 280.0,
    3.0 / 112.0,
    27.0 / 28.0,
    3.0 / 112.0,
    -3.0 / 280.0,
    1.0 / 560.0,
];
pub const B8: [f64; 7] = [
    1.0 / 90.0,
    -3.0 / 20.0,
    3.0 / 2.0,
    -49.0 / 18.0,
    3.0 / 2.0,
    -3.0 / 20.0,
    1.0 / 90.0,
];

pub const GHOST6_1: [f64; 6] = [6.0, -15.0, 20.0, -15.0, 6.0, -1.0];
pub const GHOST8_1: [f64; 8] = [8.0, -28.0, 56.0, -70.0, 56.0, -28.0, 8.0, -1.0];
pub const GHOST8_2: [f64; 8] = [36.0, -168.0, 378.0, -504.0, 420.0, -216.0, 63.0, -8.0];

pub fn rows(scheme: SchemeKind) -> (&'static [f64], &'static [f64]) {
    match scheme {
        SchemeKind::Compact6 => (&A6, &B6),
        SchemeKind::Compact8 => (&A8, &B8),
    }
}

/// Value at node `i` (possibly a ghost) of a level sampled at time `t`.
pub fn extended(
    level: &[f64],
    i: isize,
    t: f64,
    h: f64,
    scheme: SchemeKind,
    policy: GhostPolicy,
    exact: Option<&dyn Fn(f64, f64) -> f64>,
) -> f64 {
    let m = level.len() as isize - 1;
    if (0..=m).contains(&i) {
        return level[i as usize];
    }
    match policy {
        GhostPolicy::Zero => 0.0,
        GhostPolicy::Exact => exact.expect("exact solution")(i as f64 * h, t),
        GhostPolicy::Extrapolate => {
            let (d, node): (isize, Box<dyn Fn(usize) -> f64>) = if i < 0 {
                (-i, Box::new(|n| level[n]))
            } else {
                (i - m, Box::new(|n| level[m as usize - n]))
            };
            let coefs: &[f64] = match (scheme, d) {
                (SchemeKind::Compact6, 1) => &GHOST6_1,
                (SchemeKind::Compact8, 1) => &GHOST8_1,
                (SchemeKind::Compact8, 2) => &GHOST8_2,
                _ => panic!("no ghost formula for distance {d}"),
            };
            coefs.iter().enumerate().map(|(n, c)| c * node(n)).sum()
        }
    }
}

/// Right-hand side of the step `k -> k+1`, written out as plain scalar loops.
#[allow(clippy::too_many_arguments)]
pub fn naive_rhs(
    scheme: SchemeKind,
    policy: GhostPolicy,
    spec: &ProblemSpec,
    levels: &[Vec<f64>],
    g: &[f64],
    tau: f64,
    h: f64,
    k: usize,
) -> Vec<f64> {
    let (a, b) = rows(scheme);
    let r = (a.len() / 2) as isize;
    let m = levels[0].len() - 1;
    let exact_fn = spec.exact.clone();
    let exact: Option<&dyn Fn(f64, f64) -> f64> = exact_fn.as_deref().map(|f| f as &dyn Fn(f64, f64) -> f64);
    let t_new = (k + 1) as f64 * tau;
    let mut known = vec![0.0; m + 1];
    known[0] = (spec.boundary_left)(t_new);
    known[m] = (spec.boundary_right)(t_new);
    let mut out = vec![0.0; m - 1];
    for j in 1..m {
        let mut v = 0.0;
        for s in -r..=r {
            let i = j as isize + s;
            let c = (s + r) as usize;
            v += a[c] * extended(&levels[k], i, k as f64 * tau, h, scheme, policy, exact);
            for (ell, gl) in g.iter().enumerate().take(k + 2).skip(1) {
                let lvl = k + 1 - ell;
                v += gl * b[c] * extended(&levels[lvl], i, lvl as f64 * tau, h, scheme, policy, exact);
            }
            let inside = (0..=m as isize).contains(&i);
            if inside || policy != GhostPolicy::Zero {
                v += tau * a[c] * (spec.source)(i as f64 * h, (k as f64 + 0.5) * tau);
            }
            v -= (a[c] - g[0] * b[c]) * extended(&known, i, t_new, h, scheme, policy, exact);
        }
        out[j - 1] = v;
    }
    out
}

/// Problem with non-trivial data everywhere, used where only the algebra matters.
pub fn busy_problem(alpha: f64, beta: f64) -> ProblemSpec {
    ProblemSpec {
        name: "busy".into(),
        alpha,
        beta,
        diff_a: 0.7,
        diff_b: 1.3,
        length: 1.0,
        horizon: 1.0,
        source: Arc::new(|x, t| (1.0 + t) * x.exp()),
        initial: Arc::new(|x| (2.0 * x).cos() + x),
        boundary_left: Arc::new(|t| 1.0 + t),
        boundary_right: Arc::new(|t| 2.0f64.cos() + 1.0 + t * t),
        exact: Some(Arc::new(|x, t| (2.0 * x).cos() + x + t)),
    }
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}
