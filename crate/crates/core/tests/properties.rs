use proptest::prelude::*;

use spatial_fpp::dist::EdgeLengthDistribution;
use spatial_fpp::genmodel::{GChoice, GirgParams};
use spatial_fpp::harness::{hill_estimator, ks_statistic};
use spatial_fpp::perc::{threshold, PercolationRule};
use spatial_fpp::rng;
use spatial_fpp::Length;

fn choice() -> impl Strategy<Value = GChoice> {
    prop_oneof![Just(GChoice::Canonical), Just(GChoice::UpperBound), Just(GChoice::LowerBound), Just(GChoice::Threshold)]
}

/// Sup over all sample points of the gap between the two step functions.
fn ks_brute(a: &[f64], b: &[f64]) -> f64 {
    let f = |s: &[f64], x: f64| s.iter().filter(|&&y| y <= x).count() as f64 / s.len() as f64;
    a.iter().chain(b).map(|&x| (f(a, x) - f(b, x)).abs()).fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn accept_shortcut_agrees_with_probability(
        g in choice(),
        r in 0.0f64..50.0,
        w1 in 1.0f64..200.0,
        w2 in 1.0f64..200.0,
        coin in 0.0f64..1.0,
        alpha in 1.1f64..4.0,
    ) {
        let p = GirgParams::new(2, 2.5, alpha).with_choice(g);
        prop_assert_eq!(p.accepts_at(r, w1, w2, coin), coin <= p.prob_at(r, w1, w2));
    }

    #[test]
    fn canonical_kernel_matches_closed_form(r in 0.01f64..100.0, w1 in 1.0f64..50.0, w2 in 1.0f64..50.0) {
        let p = GirgParams::new(2, 2.5, 1.95);
        let expected = (w1 * w2 / (r * r)).powf(1.95).min(1.0);
        prop_assert!((p.prob_at(r, w1, w2) - expected).abs() <= 1e-12 * expected.max(1e-300));
    }

    #[test]
    fn ks_matches_brute_force(
        a in prop::collection::vec(0u8..20, 1..40),
        b in prop::collection::vec(0u8..20, 1..40),
    ) {
        let a: Vec<f64> = a.into_iter().map(f64::from).collect();
        let b: Vec<f64> = b.into_iter().map(f64::from).collect();
        prop_assert!((ks_statistic(&a, &b).unwrap() - ks_brute(&a, &b)).abs() < 1e-12);
    }

    #[test]
    fn hill_is_scale_invariant(values in prop::collection::vec(1.0f64..1e6, 20..60), scale in 0.01f64..100.0) {
        let scaled: Vec<f64> = values.iter().map(|x| x * scale).collect();
        match (hill_estimator(&values, 10), hill_estimator(&scaled, 10)) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() <= 1e-9 * a),
            (a, b) => prop_assert_eq!(a.is_ok(), b.is_ok()),
        }
    }

    #[test]
    fn exponential_quantile_inverts_cdf(rate in 0.1f64..10.0, q in 1e-9f64..0.999_999) {
        let law = EdgeLengthDistribution::exponential(rate).unwrap();
        let x = law.quantile(q).unwrap();
        prop_assert!((x + (-q).ln_1p() / rate).abs() <= 1e-9 * x.max(1e-12));
        prop_assert!((law.cdf(x) - q).abs() < 1e-9);
    }

    #[test]
    fn pair_coins_are_symmetric_and_open(seed: u64, a: u64, b: u64) {
        let u = rng::pair_uniform(seed, rng::tag::EDGE_COIN, a, b);
        prop_assert_eq!(u, rng::pair_uniform(seed, rng::tag::EDGE_COIN, b, a));
        prop_assert!(u > 0.0 && u < 1.0);
    }

    #[test]
    fn percolation_threshold_of_uniform_law(c in 0.05f64..1.9, w1 in 1.0f64..1e4, w2 in 1.0f64..1e4) {
        let law = EdgeLengthDistribution::uniform(0.0, 1.0).unwrap();
        let rule = PercolationRule::new(c, 0.5, 1.95, law).unwrap();
        let level = (-c * (w1.ln().sqrt() + w2.ln().sqrt())).exp();
        match threshold(&rule, w1, w2) {
            Length::Finite(t) => prop_assert!((t - level).abs() < 1e-12),
            Length::Infinite => prop_assert!(false, "uniform law has bounded thresholds"),
        }
    }
}
