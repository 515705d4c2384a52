//! Grünwald-Letnikov weights and their second-order shifted combination.
//!
//! For an order `γ` the raw weights are `ϖ_ℓ = (-1)^ℓ C(γ, ℓ)`, generated by the
//! recurrence `ϖ_ℓ = ϖ_{ℓ-1} (ℓ - 1 - γ) / ℓ`. The shifted weights interpolate the
//! half-shifted central operator back onto the grid:
//! `g_0 = (1+γ)/2`, `g_ℓ = (1+γ)/2 ϖ_ℓ + (1-γ)/2 ϖ_{ℓ-1}`.
//!
//! Tables are built eagerly; time loops only ever read from them.

use crate::error::{Error, Result};

/// Raw Grünwald-Letnikov weights `ϖ_0..ϖ_n` for `0 < order <= 1`.
pub fn gl_weights(order: f64, n: usize) -> Result<Vec<f64>> {
    if !(order > 0.0 && order <= 1.0) {
        return Err(Error::arg("order", format!("must lie in (0, 1], got {order}")));
    }
    let mut w = Vec::with_capacity(n + 1);
    w.push(1.0);
    for ell in 1..=n {
        let prev = w[ell - 1];
        w.push(prev * ((ell as f64 - 1.0 - order) / ell as f64));
    }
    Ok(w)
}

/// Shifted weights `g_0..g_n` for `0 < order < 1`.
pub fn shifted_weights(order: f64, n: usize) -> Result<Vec<f64>> {
    Ok(WeightTable::new(order, n)?.shifted)
}

fn shift(order: f64, raw: &[f64]) -> Vec<f64> {
    let lead = 0.5 * (1.0 + order);
    let lag = 0.5 * (1.0 - order);
    let mut g = Vec::with_capacity(raw.len());
    g.push(lead * raw[0]);
    g.extend(raw.windows(2).map(|w| lead * w[1] + lag * w[0]));
    g
}

/// Raw and shifted weights for one fractional order.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    pub order: f64,
    pub raw: Vec<f64>,
    pub shifted: Vec<f64>,
}

impl WeightTable {
    /// Builds `n + 1` raw and shifted weights. The order must be strictly inside (0, 1).
    pub fn new(order: f64, n: usize) -> Result<Self> {
        if !(order > 0.0 && order < 1.0) {
            return Err(Error::arg("order", format!("must lie in (0, 1), got {order}")));
        }
        let raw = gl_weights(order, n)?;
        let shifted = shift(order, &raw);
        Ok(Self {
            order,
            raw,
            shifted,
        })
    }

    /// Highest weight index `n` stored.
    pub fn length(&self) -> usize {
        self.raw.len() - 1
    }
}

/// Scheme weights `g^(α,β)_ℓ = μ_α g_ℓ^(1-α) + μ_β g_ℓ^(1-β)` with
/// `μ_α = τ^α A / h²` and `μ_β = τ^β B / h²`.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedWeights {
    pub alpha: f64,
    pub beta: f64,
    pub mu_alpha: f64,
    pub mu_beta: f64,
    pub values: Vec<f64>,
}

impl CombinedWeights {
    pub fn g0(&self) -> f64 {
        self.values[0]
    }

    pub fn g1(&self) -> f64 {
        self.values.get(1).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Builds the combined weights `g^(α,β)_0..g^(α,β)_n`.
///
/// `n = N + 1` covers a run of `N` time steps.
#[allow(clippy::too_many_arguments)]
pub fn combined_weights(
    alpha: f64,
    beta: f64,
    a_coef: f64,
    b_coef: f64,
    tau: f64,
    h: f64,
    n: usize,
) -> Result<CombinedWeights> {
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
    let mu_alpha = tau.powf(alpha) * a_coef / (h * h);
    let mu_beta = tau.powf(beta) * b_coef / (h * h);
    let ga = WeightTable::new(1.0 - alpha, n)?;
    let gb = WeightTable::new(1.0 - beta, n)?;
    let values = ga
        .shifted
        .iter()
        .zip(&gb.shifted)
        .map(|(x, y)| mu_alpha * x + mu_beta * y)
        .collect();
    Ok(CombinedWeights {
        alpha,
        beta,
        mu_alpha,
        mu_beta,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_order_collapses() {
        assert_eq!(gl_weights(1.0, 3).unwrap(), vec![1.0, -1.0, 0.0, 0.0]);
    }

    #[test]
    fn half_order_values() {
        assert_eq!(gl_weights(0.5, 2).unwrap(), vec![1.0, -0.5, -0.125]);
        assert_eq!(gl_weights(0.25, 1).unwrap(), vec![1.0, -0.25]);
        assert_eq!(shifted_weights(0.5, 2).unwrap(), vec![0.75, -0.125, -0.21875]);
    }

    #[test]
    fn rejects_bad_orders() {
        assert!(gl_weights(0.0, 3).is_err());
        assert!(gl_weights(1.5, 3).is_err());
        assert!(gl_weights(f64::NAN, 3).is_err());
        assert!(shifted_weights(1.0, 3).is_err());
        assert!(shifted_weights(-0.1, 3).is_err());
    }

    #[test]
    fn zero_length_tables() {
        assert_eq!(gl_weights(0.3, 0).unwrap(), vec![1.0]);
        let t = WeightTable::new(0.3, 0).unwrap();
        assert_eq!(t.shifted, vec![0.65]);
        assert_eq!(t.length(), 0);
    }

    #[test]
    fn first_two_shifted_sum() {
        for i in 1..20 {
            let order = i as f64 * 0.05;
            let g = shifted_weights(order, 1).unwrap();
            // closed form in γ = 1 - order: γ(3 - γ)/2
            let gamma = 1.0 - order;
            let expect = gamma * (3.0 - gamma) / 2.0;
            assert!((g[0] + g[1] - expect).abs() < 1e-14);
            assert!(g[0] + g[1] > 0.0);
        }
    }

    #[test]
    fn combined_rejects_zero_coefficient() {
        assert!(combined_weights(0.3, 0.4, 1.0, 0.0, 0.1, 0.1, 5).is_err());
        assert!(combined_weights(0.3, 0.4, 1.0, 1.0, 0.0, 0.1, 5).is_err());
        assert!(combined_weights(0.3, 1.0, 1.0, 1.0, 0.1, 0.1, 5).is_err());
    }

    #[test]
    fn combined_equal_orders_degenerate() {
        let c = combined_weights(0.4, 0.4, 1.0, 1.0, 0.1, 0.05, 30).unwrap();
        let g = shifted_weights(0.6, 30).unwrap();
        for (v, gl) in c.values.iter().zip(&g) {
            let expect = (c.mu_alpha + c.mu_beta) * gl;
            assert!((v - expect).abs() <= 1e-15 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn combined_mu_values() {
        let c = combined_weights(0.25, 0.15, 1.0, 1.0, 0.25, 1.0 / 1000.0, 2).unwrap();
        let ma = 0.25f64.powf(0.25) * 1e6;
        let mb = 0.25f64.powf(0.15) * 1e6;
        assert!((c.mu_alpha - ma).abs() < 1e-9 * ma);
        assert!((c.mu_beta - mb).abs() < 1e-9 * mb);
        assert!(c.mu_alpha > 0.0 && c.mu_beta > 0.0);
    }
}
