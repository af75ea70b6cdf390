use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;
use singforge::braid::Symmetry;
use singforge::looppoly::satisfies_parity_pattern;
use singforge::{Config, LoopPoly, TrigPoly};

const N: usize = 256;

/// `∏(u − r_j)` with well separated constant roots, perturbed by a small
/// loop with even frequencies only, so the roots stay apart and the braid
/// is `u`-even.
fn u_even_loop() -> impl Strategy<Value = LoopPoly> {
    (1usize..=4).prop_flat_map(|s| {
        (
            prop::collection::vec(0.0..TAU, s),
            prop::collection::vec(prop::collection::vec((-2i64..=2, -1.0..1.0f64, -1.0..1.0f64), 0..3), s),
        )
            .prop_map(move |(angles, pert)| {
                let roots: Vec<Complex64> =
                    angles.iter().enumerate().map(|(j, &a)| Complex64::from_polar(1.0 + j as f64, a)).collect();
                let mut c = vec![Complex64::new(1.0, 0.0)];
                for r in &roots {
                    let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
                    for (i, &x) in c.iter().enumerate() {
                        next[i + 1] += x;
                        next[i] -= x * r;
                    }
                    c = next;
                }
                let lower = (0..s)
                    .map(|j| {
                        let p = TrigPoly::from_pairs(pert[j].iter().map(|&(l, a, b)| (2 * l, Complex64::new(a, b) * 0.01)));
                        &TrigPoly::constant(c[j]) + &p
                    })
                    .collect();
                LoopPoly::monic(lower)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn synthesis_inverts_tracking(g in u_even_loop()) {
        let mut cfg = Config::default();
        cfg.set_grid(N).unwrap();
        let b = g.track(N).unwrap();
        let fb = LoopPoly::from_braid(&b, Symmetry::UEven, None, &cfg).unwrap();
        prop_assert!(satisfies_parity_pattern(&fb.loop_poly, Symmetry::UEven));
        let back = fb.loop_poly.track(N).unwrap();
        prop_assert!(back.set_distance(&b) < b.min_sep() / 4.0);
        prop_assert_eq!(back.closure(), b.closure());
        prop_assert_eq!(back.linking_data().canonical(), b.linking_data().canonical());
    }

    #[test]
    fn vieta_product_of_roots(g in u_even_loop(), seed in 0u64..10_000) {
        let s = g.degree();
        let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
        for i in 0..100u64 {
            let t = TAU * ((seed + 37 * i) % 1000) as f64 / 1000.0;
            let prod: Complex64 = g.roots_at(t).unwrap().into_iter().product();
            prop_assert!((prod - g.lowest().eval(t) * sign).norm() < 1e-9);
        }
    }
}
