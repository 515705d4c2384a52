//! Centered differences, compact stencils and the half-point Riemann-Liouville
//! approximation.
//!
//! The compact pairs are never inverted: the sixth-order approximation of `u''`
//! is the relation `A u'' ≈ B u / h²` with `A = 1 - δ⁴/90`, `B = δ² - δ⁴/12`, and
//! the eighth-order one uses `Ã = 1 + δ⁶/560`, `B̃ = δ² - δ⁴/12 + δ⁶/90`.

use crate::analysis::loglog_slope;
use crate::error::{Error, Result};
use crate::fracweights::shifted_weights;

/// An exact rational coefficient `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frac {
    pub num: i64,
    pub den: i64,
}

impl Frac {
    pub const fn new(num: i64, den: i64) -> Self {
        Self { num, den }
    }

    /// Correctly rounded double (both parts are exact in f64).
    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

const fn f(num: i64, den: i64) -> Frac {
    Frac::new(num, den)
}

const A6: [Frac; 5] = [f(-1, 90), f(2, 45), f(14, 15), f(2, 45), f(-1, 90)];
const B6: [Frac; 5] = [f(-1, 12), f(4, 3), f(-5, 2), f(4, 3), f(-1, 12)];
const A8: [Frac; 7] = [
    f(1, 560),
    f(-3, 280),
    f(3, 112),
    f(27, 28),
    f(3, 112),
    f(-3, 280),
    f(1, 560),
];
const B8: [Frac; 7] = [
    f(1, 90),
    f(-3, 20),
    f(3, 2),
    f(-49, 18),
    f(3, 2),
    f(-3, 20),
    f(1, 90),
];

/// Constant interior row of a symmetric banded Toeplitz operator.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactStencil {
    pub half_bandwidth: usize,
    /// Coefficients for offsets `-half_bandwidth..=half_bandwidth`.
    pub row: Vec<f64>,
    pub exact: Vec<Frac>,
}

impl CompactStencil {
    fn from_exact(exact: &[Frac]) -> Self {
        Self {
            half_bandwidth: exact.len() / 2,
            row: exact.iter().map(|c| c.to_f64()).collect(),
            exact: exact.to_vec(),
        }
    }

    /// `A = 1 - δ⁴/90`.
    pub fn a6() -> Self {
        Self::from_exact(&A6)
    }

    /// `B = δ² - δ⁴/12`.
    pub fn b6() -> Self {
        Self::from_exact(&B6)
    }

    /// `Ã = 1 + δ⁶/560`.
    pub fn a8() -> Self {
        Self::from_exact(&A8)
    }

    /// `B̃ = δ² - δ⁴/12 + δ⁶/90`.
    pub fn b8() -> Self {
        Self::from_exact(&B8)
    }

    /// Coefficient at offset `s` (zero outside the band).
    pub fn at(&self, s: isize) -> f64 {
        let r = self.half_bandwidth as isize;
        if s.abs() > r {
            0.0
        } else {
            self.row[(s + r) as usize]
        }
    }

    pub fn offsets(&self) -> impl Iterator<Item = (isize, f64)> + '_ {
        let r = self.half_bandwidth as isize;
        self.row.iter().enumerate().map(move |(i, &c)| (i as isize - r, c))
    }

    /// Fourier symbol at `σ = sin²(θ/2)`; real because the row is symmetric.
    pub fn symbol(&self, sigma: f64) -> f64 {
        // cos(sθ) expressed through the Chebyshev recurrence in cos θ = 1 - 2σ.
        let c = 1.0 - 2.0 * sigma;
        let r = self.half_bandwidth as isize;
        let (mut prev, mut cur) = (1.0, c);
        let mut total = self.at(0);
        for s in 1..=r {
            total += 2.0 * self.at(s) * cur;
            let next = 2.0 * c * cur - prev;
            prev = cur;
            cur = next;
        }
        total
    }
}

/// Which compact pair approximates the second derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompactPair {
    /// `(A, B)`, sixth order.
    Sixth,
    /// `(Ã, B̃)`, eighth order.
    Eighth,
}

impl CompactPair {
    pub fn stencils(self) -> (CompactStencil, CompactStencil) {
        match self {
            CompactPair::Sixth => (CompactStencil::a6(), CompactStencil::b6()),
            CompactPair::Eighth => (CompactStencil::a8(), CompactStencil::b8()),
        }
    }
}

/// Signed binomial coefficients of `δ^p`, offsets `-p/2..=p/2`.
pub fn central_difference_coefficients(p: usize) -> Result<Vec<f64>> {
    if !matches!(p, 2 | 4 | 6) {
        return Err(Error::arg("p", format!("must be 2, 4 or 6, got {p}")));
    }
    let mut c = vec![1.0];
    for _ in 0..p {
        let mut next = vec![0.0; c.len() + 1];
        for (i, v) in c.iter().enumerate() {
            next[i] += v;
            next[i + 1] -= v;
        }
        c = next;
    }
    Ok(c)
}

/// `δ^p u` at every index where the full stencil fits; output length `len(u) - p`.
pub fn central_difference_power(p: usize, u: &[f64]) -> Result<Vec<f64>> {
    let c = central_difference_coefficients(p)?;
    if u.len() < p + 1 {
        return Err(Error::TooShort {
            needed: p + 1,
            got: u.len(),
        });
    }
    Ok(u.windows(p + 1)
        .map(|w| w.iter().zip(&c).map(|(a, b)| a * b).sum())
        .collect())
}

/// Applies a stencil at all fully interior indices.
pub fn apply_stencil(s: &CompactStencil, u: &[f64]) -> Result<Vec<f64>> {
    let width = 2 * s.half_bandwidth + 1;
    if u.len() < width {
        return Err(Error::TooShort {
            needed: width,
            got: u.len(),
        });
    }
    Ok(u.windows(width)
        .map(|w| w.iter().zip(&s.row).map(|(a, b)| a * b).sum())
        .collect())
}

/// A smooth function with its second derivative.
#[derive(Clone, Copy)]
pub struct TestFunction {
    pub value: fn(f64) -> f64,
    pub second: fn(f64) -> f64,
}

impl TestFunction {
    /// `sin(πx)` on `[0, 1]`.
    pub fn sine() -> Self {
        use std::f64::consts::PI;
        Self {
            value: |x| (PI * x).sin(),
            second: |x| -PI * PI * (PI * x).sin(),
        }
    }
}

/// `max_j |A u''(x_j) - B u(x_j) / h²|` over the interior of a uniform grid on `[0, 1]`.
pub fn compact_residual(pair: CompactPair, func: TestFunction, h: f64) -> f64 {
    let (a, b) = pair.stencils();
    let m = (1.0 / h).round() as usize;
    let r = a.half_bandwidth;
    let mut worst: f64 = 0.0;
    for j in r..=m.saturating_sub(r) {
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for (s, ca) in a.offsets() {
            let x = (j as isize + s) as f64 * h;
            lhs += ca * (func.second)(x);
            rhs += b.at(s) * (func.value)(x);
        }
        worst = worst.max((lhs - rhs / (h * h)).abs());
    }
    worst
}

/// Least-squares slope of `log r(h)` against `log h`.
pub fn compact_residual_order(pair: CompactPair, func: TestFunction, hs: &[f64]) -> Result<f64> {
    if hs.len() < 3 {
        return Err(Error::TooShort {
            needed: 3,
            got: hs.len(),
        });
    }
    let errs: Vec<f64> = hs.iter().map(|&h| compact_residual(pair, func, h)).collect();
    loglog_slope(hs, &errs)
}

/// Second-order approximation of the Riemann-Liouville derivative of `order`
/// at the half level `t_{k+1/2}`, from samples `u(t_0)..u(t_{k+1})`.
pub fn rl_derivative_halfpoint(order: f64, history: &[f64], tau: f64) -> Result<f64> {
    if history.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    if !(tau > 0.0) {
        return Err(Error::arg("tau", format!("must be positive, got {tau}")));
    }
    let g = shifted_weights(order, history.len() - 1)?;
    let sum: f64 = g.iter().zip(history.iter().rev()).map(|(w, u)| w * u).sum();
    Ok(sum / tau.powf(order))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn difference_powers_annihilate_polynomials() {
        let sq: Vec<f64> = (0..12).map(|j| (j * j) as f64).collect();
        assert!(central_difference_power(2, &sq).unwrap().iter().all(|&v| v == 2.0));
        let cube: Vec<f64> = (0..12).map(|j| (j * j * j) as f64).collect();
        assert!(central_difference_power(4, &cube).unwrap().iter().all(|&v| v == 0.0));
        let quint: Vec<f64> = (0..12).map(|j| (j as f64).powi(5)).collect();
        let d6 = central_difference_power(6, &quint).unwrap();
        assert_eq!(d6.len(), 6);
        assert!(d6.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn difference_power_errors() {
        assert!(central_difference_power(3, &[0.0; 10]).is_err());
        assert_eq!(
            central_difference_power(6, &[0.0; 6]),
            Err(Error::TooShort { needed: 7, got: 6 })
        );
    }

    #[test]
    fn stencil_application() {
        let ones = vec![1.0; 9];
        for v in apply_stencil(&CompactStencil::a6(), &ones).unwrap() {
            assert!((v - 1.0).abs() < 1e-15);
        }
        for v in apply_stencil(&CompactStencil::b8(), &ones).unwrap() {
            assert!(v.abs() < 1e-14);
        }
        let sq: Vec<f64> = (0..9).map(|j| (j * j) as f64).collect();
        for v in apply_stencil(&CompactStencil::b6(), &sq).unwrap() {
            assert!((v - 2.0).abs() < 1e-12);
        }
        assert!(apply_stencil(&CompactStencil::a8(), &[1.0; 6]).is_err());
    }

    #[test]
    fn symbols_match_closed_forms() {
        for i in 0..=20 {
            let s = i as f64 / 20.0;
            let a = CompactStencil::a6().symbol(s);
            let b = CompactStencil::b6().symbol(s);
            assert!((a - (1.0 - 8.0 / 45.0 * s * s)).abs() < 1e-14);
            assert!((b + 4.0 * s * (1.0 + s / 3.0)).abs() < 1e-13);
            let at = CompactStencil::a8().symbol(s);
            let bt = CompactStencil::b8().symbol(s);
            assert!((at - (1.0 - 4.0 / 35.0 * s.powi(3))).abs() < 1e-14);
            assert!((bt + 4.0 * s * (1.0 + s / 3.0 + 8.0 / 45.0 * s * s)).abs() < 1e-13);
        }
    }

    #[test]
    fn residual_vanishes_on_quadratics() {
        let quad = TestFunction {
            value: |x| 3.0 * x * x - x + 0.5,
            second: |_| 6.0,
        };
        for pair in [CompactPair::Sixth, CompactPair::Eighth] {
            assert!(compact_residual(pair, quad, 1.0 / 32.0) < 1e-10);
        }
    }

    #[test]
    fn residual_order_needs_three_levels() {
        assert!(compact_residual_order(CompactPair::Sixth, TestFunction::sine(), &[0.1, 0.05]).is_err());
    }

    #[test]
    fn rl_halfpoint_basics() {
        assert_eq!(rl_derivative_halfpoint(0.5, &[0.0; 6], 0.1).unwrap(), 0.0);
        assert!(rl_derivative_halfpoint(0.5, &[], 0.1).is_err());
        // single level: g_0 u(t_0) / τ^γ
        let v = rl_derivative_halfpoint(0.5, &[2.0], 0.25).unwrap();
        assert!((v - 0.75 * 2.0 / 0.5).abs() < 1e-15);
    }
}
