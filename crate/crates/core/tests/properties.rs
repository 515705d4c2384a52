use proptest::prelude::*;
use subdiff::analysis::{
    amplification_sweep, loglog_slope, order_quadratic, sigma_grid, stability_condition, symbols,
    unconditional_threshold,
};
use subdiff::fracweights::{combined_weights, WeightTable};
use subdiff::solver::{ghost_extrapolate, SchemeKind, Side};

fn scheme() -> impl Strategy<Value = SchemeKind> {
    prop_oneof![Just(SchemeKind::Compact6), Just(SchemeKind::Compact8)]
}

proptest! {
    #[test]
    fn weight_signs_and_partial_sums(order in 0.05f64..0.95, n in 2usize..3000) {
        let t = WeightTable::new(order, n).unwrap();
        prop_assert_eq!(t.raw[0], 1.0);
        prop_assert_eq!(t.shifted[0], (1.0 + order) / 2.0);
        let mut raw_tail = 0.0;
        let mut partial = t.shifted[0];
        for ell in 1..=n {
            prop_assert!(t.raw[ell] < 0.0);
            raw_tail -= t.raw[ell];
            prop_assert!(raw_tail < 1.0);
            if ell >= 2 {
                prop_assert!(t.shifted[ell] < 0.0);
            }
            let next = partial + t.shifted[ell];
            prop_assert!(next > 0.0);
            if ell >= 2 {
                prop_assert!(next < partial);
            }
            partial = next;
        }
    }

    #[test]
    fn shifted_closed_form(gamma in 0.05f64..0.95) {
        let t = WeightTable::new(1.0 - gamma, 50).unwrap();
        for ell in 1..=50 {
            let l = ell as f64;
            let factor = (2.0 * l - (2.0 - gamma).powi(2)) / (2.0 * (l + gamma - 2.0));
            let expect = factor * t.raw[ell];
            prop_assert!((t.shifted[ell] - expect).abs() <= 1e-13 * expect.abs().max(1e-300));
        }
        prop_assert!((t.shifted[0] - (2.0 - gamma) / 2.0).abs() < 1e-15);
        prop_assert!((t.shifted[1] - order_quadratic(gamma) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn combined_is_linear_combination(
        alpha in 0.01f64..0.99, beta in 0.01f64..0.99,
        a in 0.1f64..5.0, b in 0.1f64..5.0,
        tau in 1e-4f64..0.5, h in 1e-3f64..0.1,
    ) {
        let w = combined_weights(alpha, beta, a, b, tau, h, 20).unwrap();
        let ta = WeightTable::new(1.0 - alpha, 20).unwrap();
        let tb = WeightTable::new(1.0 - beta, 20).unwrap();
        prop_assert!(w.mu_alpha > 0.0 && w.mu_beta > 0.0);
        for ell in 0..=20 {
            let expect = tau.powf(alpha) * a / (h * h) * ta.shifted[ell] + tau.powf(beta) * b / (h * h) * tb.shifted[ell];
            prop_assert!((w.values[ell] - expect).abs() <= 1e-12 * (w.mu_alpha + w.mu_beta));
        }
    }

    #[test]
    fn amplification_bounded_under_condition(
        s in scheme(),
        alpha in 0.01f64..0.99, beta in 0.01f64..0.99,
        tau in 1e-5f64..0.5, m in 12usize..400,
    ) {
        let h = 1.0 / m as f64;
        let cond = stability_condition(s, alpha, beta, 1.0, 1.0, tau, h).unwrap();
        let w = combined_weights(alpha, beta, 1.0, 1.0, tau, h, 1).unwrap();
        let sweep = amplification_sweep(s, w.g0(), w.g1(), &sigma_grid(201)).unwrap();
        prop_assert!(sweep.q_positive);
        if cond.satisfied {
            prop_assert!(sweep.worst_ratio <= 1.0 + 1e-12, "ratio {}", sweep.worst_ratio);
        }
        let threshold = unconditional_threshold();
        prop_assert_eq!(cond.unconditional, alpha <= threshold && beta <= threshold);
    }

    #[test]
    fn symbol_ratio_never_exceeds_one_from_above(s in scheme(), g0 in 1e-3f64..1e4, frac in -1.0f64..1.0, sigma in 0.0f64..1.0) {
        // g1 is bounded below by -g0 for every admissible order pair.
        let p = symbols(s, g0, frac * g0, sigma);
        prop_assert!(p.q > 0.0);
        prop_assert!(p.ratio() <= 1.0 + 1e-12);
    }

    #[test]
    fn extrapolation_exact_on_polynomials(s in scheme(), coefs in prop::collection::vec(-2.0f64..2.0, 1..6), m in 12usize..40) {
        // Degree <= 5 is reproduced by both closures.
        let f = |x: f64| coefs.iter().rev().fold(0.0, |acc, c| acc * x + c);
        let level: Vec<f64> = (0..=m).map(|j| f(j as f64)).collect();
        let left = ghost_extrapolate(&level, Side::Left, s).unwrap();
        let right = ghost_extrapolate(&level, Side::Right, s).unwrap();
        for (d, (l, r)) in left.iter().zip(&right).enumerate() {
            let d = (d + 1) as f64;
            let (el, er) = (f(-d), f(m as f64 + d));
            prop_assert!((l - el).abs() <= 1e-7 * el.abs().max(1.0));
            prop_assert!((r - er).abs() <= 1e-7 * er.abs().max(1.0));
        }
    }

    #[test]
    fn slope_recovers_power(p in 0.5f64..9.0, c in 1e-3f64..1e3) {
        let xs = [0.1f64, 0.05, 0.025, 0.0125];
        let ys: Vec<f64> = xs.iter().map(|x| c * x.powf(p)).collect();
        prop_assert!((loglog_slope(&xs, &ys).unwrap() - p).abs() < 1e-9);
    }
}
