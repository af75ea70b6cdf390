use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;
use singforge::trigpoly::{ParityConstraint, TrigPoly};

fn trig(max_freq: i64, max_terms: usize) -> impl Strategy<Value = TrigPoly> {
    prop::collection::vec((-max_freq..=max_freq, -2.0..2.0f64, -2.0..2.0f64), 1..=max_terms)
        .prop_map(|v| TrigPoly::from_pairs(v.into_iter().map(|(l, a, b)| (l, Complex64::new(a, b)))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_evaluates_pointwise(p in trig(6, 6), q in trig(6, 6), seed in 0u64..1000) {
        let r = &p * &q;
        let bound = 1e-12 * (1.0 + p.c1_norm()) * (1.0 + q.c1_norm());
        for i in 0..1000u64 {
            let t = TAU * (((seed * 7919 + i * 104729) % 100_003) as f64 / 100_003.0);
            prop_assert!((r.eval(t) - p.eval(t) * q.eval(t)).norm() < bound);
        }
    }

    #[test]
    fn derivative_is_second_order_accurate(p in trig(5, 5), t in 0.0..TAU) {
        let d = p.derivative().eval(t);
        let err = |h: f64| (d - (p.eval(t + h) - p.eval(t - h)) / (2.0 * h)).norm();
        let (e1, e2) = (err(1e-3), err(1e-4));
        // Below this the third derivative vanishes at t and only rounding is left.
        prop_assume!(e1 > 1e-9);
        prop_assert!((e1 / e2).log10() >= 1.9, "e(1e-3) = {e1:e}, e(1e-4) = {e2:e}");
    }

    #[test]
    fn approximation_reproduces_conforming_polynomial(p in trig(8, 8)) {
        let n = 64;
        let a = TrigPoly::approximate_uniform(&p.sample(n), ParityConstraint::Any, 8, 1e-9).unwrap();
        prop_assert!(a.poly.max_coeff_diff(&p) < 1e-12);
    }

    #[test]
    fn grid_values_respect_coefficient_sum(p in trig(10, 8)) {
        let bound = p.coeff_sum();
        for z in p.sample(512) {
            prop_assert!(z.norm() <= bound * (1.0 + 1e-15));
        }
    }
}
