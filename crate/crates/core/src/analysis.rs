//! Stability conditions, amplification symbols, circulant eigenvalues and
//! error/order metrics.
//!
//! Symbols are written in `σ = sin²(θ/2)`, `θ` the Fourier phase of a grid mode.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fracweights::combined_weights;
use crate::solver::{SchemeKind, SolutionHistory};

/// Default number of σ samples in `[0, 1]`.
pub const DEFAULT_SWEEP_POINTS: usize = 1001;

/// Upper end of the unconditional region: `-γ² + 4γ - 2 ≤ 0` on `(0, 1)` iff `γ ≤ 2 - √2`.
pub fn unconditional_threshold() -> f64 {
    2.0 - std::f64::consts::SQRT_2
}

/// `-γ² + 4γ - 2`.
pub fn order_quadratic(gamma: f64) -> f64 {
    -gamma * gamma + 4.0 * gamma - 2.0
}

/// Stability bound on the condition value for each scheme.
pub fn stability_bound(scheme: SchemeKind) -> f64 {
    match scheme {
        SchemeKind::Compact6 => 37.0 / 120.0,
        SchemeKind::Compact8 => 279.0 / 952.0,
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::arg("ys", "length differs from xs"));
    }
    if xs.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: xs.len(),
        });
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0)) {
        return Err(Error::arg("values", "log-log fit needs positive data"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::arg("xs", "abscissae must not all coincide"));
    }
    Ok(sxy / sxx)
}

/// Stability verdict for one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub scheme: SchemeKind,
    pub condition_value: f64,
    pub bound: f64,
    pub satisfied: bool,
    pub unconditional: bool,
    /// Largest τ meeting the condition; `None` when every τ does.
    pub max_stable_tau: Option<f64>,
    pub worst_ratio: f64,
    pub p_nonnegative: bool,
    pub min_eigenvalue: f64,
}

/// Condition value and verdict without the sweep and eigenvalue parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityCondition {
    pub condition_value: f64,
    pub bound: f64,
    pub satisfied: bool,
    pub unconditional: bool,
}

fn check_params(alpha: f64, beta: f64, a_coef: f64, b_coef: f64, tau: f64, h: f64) -> Result<()> {
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::arg(name, format!("must lie in (0, 1), got {v}")));
        }
    }
    for (name, v) in [("A", a_coef), ("B", b_coef), ("tau", tau), ("h", h)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::arg(name, format!("must be positive, got {v}")));
        }
    }
    Ok(())
}

fn condition_value(alpha: f64, beta: f64, a_coef: f64, b_coef: f64, tau: f64, h: f64) -> f64 {
    (tau.powf(alpha) * order_quadratic(alpha) * a_coef
        + tau.powf(beta) * order_quadratic(beta) * b_coef)
        / (h * h)
}

/// Evaluates `(τ^α q(α) 𝒜 + τ^β q(β) ℬ) / h²` against the scheme's bound.
pub fn stability_condition(
    scheme: SchemeKind,
    alpha: f64,
    beta: f64,
    a_coef: f64,
    b_coef: f64,
    tau: f64,
    h: f64,
) -> Result<StabilityCondition> {
    check_params(alpha, beta, a_coef, b_coef, tau, h)?;
    let value = condition_value(alpha, beta, a_coef, b_coef, tau, h);
    let bound = stability_bound(scheme);
    let cut = unconditional_threshold();
    Ok(StabilityCondition {
        condition_value: value,
        bound,
        satisfied: value <= bound,
        unconditional: alpha <= cut && beta <= cut,
    })
}

/// Largest τ with condition value ≤ bound, by bisection; `None` if no τ violates it.
///
/// The value `c₁τ^α + c₂τ^β` is zero at τ = 0 and has at most one interior
/// minimum, so the admissible set is an interval `[0, τ*]`.
pub fn max_stable_tau(
    scheme: SchemeKind,
    alpha: f64,
    beta: f64,
    a_coef: f64,
    b_coef: f64,
    h: f64,
) -> Result<Option<f64>> {
    check_params(alpha, beta, a_coef, b_coef, 1.0, h)?;
    let bound = stability_bound(scheme);
    let ok = |tau: f64| condition_value(alpha, beta, a_coef, b_coef, tau, h) <= bound;
    let mut hi = 1.0;
    while ok(hi) {
        hi *= 2.0;
        if hi > 1e300 {
            return Ok(None);
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo))
}

/// Amplification numerator `P` and denominator `Q` at one σ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolPair {
    pub sigma: f64,
    pub q: f64,
    pub p: f64,
}

impl SymbolPair {
    pub fn ratio(&self) -> f64 {
        self.p / self.q
    }
}

/// Closed-form symbols of the left (`Q`) and right (`P`) two-level operators.
pub fn symbols(scheme: SchemeKind, g0: f64, g1: f64, sigma: f64) -> SymbolPair {
    let s = sigma;
    let (mass, stiff) = match scheme {
        SchemeKind::Compact6 => (1.0 - 8.0 / 45.0 * s * s, s * (1.0 + s / 3.0)),
        SchemeKind::Compact8 => (
            1.0 - 4.0 / 35.0 * s * s * s,
            s * (1.0 + s / 3.0 + 8.0 / 45.0 * s * s),
        ),
    };
    SymbolPair {
        sigma,
        q: mass + 4.0 * g0 * stiff,
        p: mass - 4.0 * g1 * stiff,
    }
}

/// `n` evenly spaced samples of `[0, 1]`, both ends included.
pub fn sigma_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

/// Result of sweeping the amplification ratio over σ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub worst_ratio: f64,
    pub p_nonnegative: bool,
    pub q_positive: bool,
    pub samples: Vec<SymbolPair>,
}

/// Evaluates `Q`, `P` on `grid`; `P ≥ 0` is judged with a `1e-12` slack.
pub fn amplification_sweep(scheme: SchemeKind, g0: f64, g1: f64, grid: &[f64]) -> Result<SweepSummary> {
    if !(g0 > 0.0) {
        return Err(Error::arg("g0", format!("must be positive, got {g0}")));
    }
    let samples: Vec<SymbolPair> = grid.iter().map(|&s| symbols(scheme, g0, g1, s)).collect();
    Ok(SweepSummary {
        worst_ratio: samples.iter().map(|p| p.ratio().abs()).fold(0.0, f64::max),
        p_nonnegative: samples.iter().all(|p| p.p >= -1e-12),
        q_positive: samples.iter().all(|p| p.q > 0.0),
        samples,
    })
}

/// Eigenvalues `λ_j`, `j = 1..M-1`, of the circulant model of the left-hand matrix.
pub fn circulant_eigenvalues(scheme: SchemeKind, m: usize, g0: f64) -> Result<Vec<f64>> {
    if m < 3 {
        return Err(Error::GridTooCoarse { m, min: 3 });
    }
    if !(g0 > 0.0) {
        return Err(Error::arg("g0", format!("must be positive, got {g0}")));
    }
    let period = (m - 1) as f64;
    Ok((1..m)
        .map(|j| {
            let s = (std::f64::consts::PI * j as f64 / period).sin().powi(2);
            symbols(scheme, g0, 0.0, s).q
        })
        .collect())
}

/// Full stability report: condition, σ-sweep with the actual weights, circulant minimum.
#[allow(clippy::too_many_arguments)]
pub fn stability_report(
    scheme: SchemeKind,
    alpha: f64,
    beta: f64,
    a_coef: f64,
    b_coef: f64,
    tau: f64,
    h: f64,
    sweep_points: usize,
) -> Result<StabilityReport> {
    let cond = stability_condition(scheme, alpha, beta, a_coef, b_coef, tau, h)?;
    let w = combined_weights(alpha, beta, a_coef, b_coef, tau, h, 1)?;
    let sweep = amplification_sweep(scheme, w.g0(), w.g1(), &sigma_grid(sweep_points))?;
    let m = ((1.0 / h).round() as usize).max(3);
    let min_eigenvalue = circulant_eigenvalues(scheme, m, w.g0())?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(StabilityReport {
        scheme,
        condition_value: cond.condition_value,
        bound: cond.bound,
        satisfied: cond.satisfied,
        unconditional: cond.unconditional,
        max_stable_tau: max_stable_tau(scheme, alpha, beta, a_coef, b_coef, h)?,
        worst_ratio: sweep.worst_ratio,
        p_nonnegative: sweep.p_nonnegative,
        min_eigenvalue,
    })
}

/// `max |U^k_j - u(x_j, t_k)|` over interior nodes and all levels.
pub fn max_error(history: &SolutionHistory, exact: &dyn Fn(f64, f64) -> f64) -> f64 {
    let m = history.intervals;
    let mut worst: f64 = 0.0;
    for (k, level) in history.levels.iter().enumerate() {
        let t = history.t(k);
        for (j, v) in level.iter().enumerate().take(m).skip(1) {
            worst = worst.max((v - exact(history.x(j), t)).abs());
        }
    }
    worst
}

/// Largest `|U|` over the same nodes `max_error` inspects.
pub fn max_magnitude(history: &SolutionHistory) -> f64 {
    let m = history.intervals;
    history
        .levels
        .iter()
        .flat_map(|l| l[1..m].iter())
        .fold(0.0, |a: f64, v| a.max(v.abs()))
}

/// `log₂(e_coarse / e_fine)` for a halved time step.
pub fn temporal_order(e_coarse: f64, e_fine: f64) -> Result<f64> {
    if !(e_coarse > 0.0 && e_fine > 0.0) {
        return Err(Error::arg("error", "orders need positive errors"));
    }
    Ok((e_coarse / e_fine).log2())
}

/// `ln(e1 / e2) / ln(h1 / h2)`.
pub fn spatial_order(e1: f64, h1: f64, e2: f64, h2: f64) -> Result<f64> {
    if !(e1 > 0.0 && e2 > 0.0) {
        return Err(Error::arg("error", "orders need positive errors"));
    }
    if !(h1 > 0.0 && h2 > 0.0) || h1 == h2 {
        return Err(Error::arg("h", "steps must be positive and distinct"));
    }
    Ok((e1 / e2).ln() / (h1 / h2).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::CompactStencil;

    #[test]
    fn slope_of_power_law() {
        let xs = [0.1, 0.05, 0.025];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(6)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 6.0).abs() < 1e-12);
        assert!(loglog_slope(&[1.0], &[1.0]).is_err());
        assert!(loglog_slope(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn condition_examples() {
        let c = stability_condition(SchemeKind::Compact6, 0.25, 0.15, 1.0, 1.0, 0.25, 0.001).unwrap();
        assert!((order_quadratic(0.25) + 1.0625).abs() < 1e-15);
        assert!((order_quadratic(0.15) + 1.4225).abs() < 1e-15);
        assert!(c.condition_value < 0.0 && c.satisfied && c.unconditional);

        let g = unconditional_threshold();
        assert!(order_quadratic(g).abs() < 1e-15);
        let c = stability_condition(SchemeKind::Compact8, g, g, 1.0, 1.0, 0.5, 0.1).unwrap();
        assert!(c.condition_value.abs() < 1e-12 && c.satisfied && c.unconditional);

        assert!(stability_condition(SchemeKind::Compact6, 1.0, 0.5, 1.0, 1.0, 0.1, 0.1).is_err());
        assert!(stability_condition(SchemeKind::Compact6, 0.5, 0.5, 1.0, 0.0, 0.1, 0.1).is_err());
    }

    #[test]
    fn max_stable_tau_solves_scalar_equation() {
        // 2 · 0.79 · τ^0.9 / 0.01 = 37/120
        let tau = max_stable_tau(SchemeKind::Compact6, 0.9, 0.9, 1.0, 1.0, 0.1).unwrap().unwrap();
        let q = order_quadratic(0.9);
        assert!((q - 0.79).abs() < 1e-15);
        let expected = (37.0 / 120.0 * 0.01 / (2.0 * q)).powf(1.0 / 0.9);
        assert!((tau - expected).abs() < 1e-12 * expected);
        let over = stability_condition(SchemeKind::Compact6, 0.9, 0.9, 1.0, 1.0, tau * 1.01, 0.1).unwrap();
        assert!(!over.satisfied);
        assert_eq!(max_stable_tau(SchemeKind::Compact6, 0.3, 0.2, 1.0, 1.0, 0.1).unwrap(), None);
    }

    #[test]
    fn symbols_agree_with_stencils() {
        for scheme in [SchemeKind::Compact6, SchemeKind::Compact8] {
            let (a, b): (CompactStencil, CompactStencil) = scheme.stencils();
            for s in sigma_grid(21) {
                let sp = symbols(scheme, 2.5, -0.7, s);
                assert!((sp.q - (a.symbol(s) - 2.5 * b.symbol(s))).abs() < 1e-12);
                assert!((sp.p - (a.symbol(s) - 0.7 * b.symbol(s))).abs() < 1e-12);
            }
            let z = symbols(scheme, 3.0, 1.0, 0.0);
            assert_eq!((z.q, z.p, z.ratio()), (1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn violated_condition_gives_negative_p() {
        let (alpha, beta, tau, h) = (0.95, 0.95, 1.0, 0.01);
        let c = stability_condition(SchemeKind::Compact6, alpha, beta, 1.0, 1.0, tau, h).unwrap();
        assert!(!c.satisfied);
        let w = combined_weights(alpha, beta, 1.0, 1.0, tau, h, 1).unwrap();
        assert!(symbols(SchemeKind::Compact6, w.g0(), w.g1(), 1.0).p < 0.0);
    }

    #[test]
    fn eigenvalues_basic() {
        let l = circulant_eigenvalues(SchemeKind::Compact6, 12, 0.3).unwrap();
        assert_eq!(l.len(), 11);
        assert!((l[10] - 1.0).abs() < 1e-15);
        assert!(l.iter().all(|&v| v > 0.0));
        assert!(circulant_eigenvalues(SchemeKind::Compact6, 2, 0.3).is_err());
    }

    #[test]
    fn order_helpers() {
        assert_eq!(temporal_order(4.0, 1.0).unwrap(), 2.0);
        assert_eq!(temporal_order(1.0, 1.0).unwrap(), 0.0);
        assert!(temporal_order(0.0, 1.0).is_err());
        let e = |h: f64| h.powi(6);
        assert!((spatial_order(e(0.1), 0.1, e(0.05), 0.05).unwrap() - 6.0).abs() < 1e-12);
        assert!(spatial_order(1.0, 0.1, 1.0, 0.1).is_err());
    }
}
