use std::collections::BTreeSet;

use num_complex::Complex64;
use proptest::prelude::*;
use singforge::mixedpoly::{
    face_function, from_loop_line, g_polynomial, glue, newton, FaceLine, MixedPoly, Tau, WeightVector,
};
use singforge::{LoopPoly, TrigPoly};

/// Random monic loop whose coefficient `A_j` only has frequencies of parity
/// `parity·(s − j)`, so some slope `k` always makes it admissible.
fn monic_loop(max_deg: usize, parity: Option<i64>) -> impl Strategy<Value = LoopPoly> {
    (1..=max_deg, 0i64..=1).prop_flat_map(move |(s, k0)| {
        let k0 = parity.unwrap_or(k0);
        prop::collection::vec(prop::collection::vec((-3i64..=3, -2.0..2.0f64, -2.0..2.0f64), 0..4), s).prop_map(
            move |terms| {
                let lower = terms
                    .into_iter()
                    .enumerate()
                    .map(|(j, ts)| {
                        let p = (k0 * (s - j) as i64) % 2;
                        TrigPoly::from_pairs(ts.into_iter().map(|(m, a, b)| (2 * m + p, Complex64::new(a, b))))
                    })
                    .collect();
                LoopPoly::monic(lower)
            },
        )
    })
}

fn line(g: &LoopPoly) -> FaceLine {
    FaceLine { k: 1, q: 1, top: g.degree(), nu_end: 0 }
}

/// Vertices and faces of `conv(S + ℝ₊²)` found by minimizing every positive
/// weight `(a, b)` with `a, b ≤ 40` over the support.
fn hull_oracle(support: &BTreeSet<(u32, u32)>) -> (BTreeSet<(u32, u32)>, BTreeSet<((u64, u64), (u32, u32), (u32, u32))>) {
    let mut vertices = BTreeSet::new();
    let mut faces = BTreeSet::new();
    for a in 1..=40u64 {
        for b in 1..=40u64 {
            let val = |p: &(u32, u32)| a * p.0 as u64 + b * p.1 as u64;
            let min = support.iter().map(val).min().unwrap();
            let argmin: Vec<(u32, u32)> = support.iter().copied().filter(|p| val(p) == min).collect();
            if argmin.len() == 1 {
                vertices.insert(argmin[0]);
            } else if gcd(a, b) == 1 {
                let lo = *argmin.iter().min_by_key(|p| p.0).unwrap();
                let hi = *argmin.iter().max_by_key(|p| p.0).unwrap();
                faces.insert(((a, b), lo, hi));
                vertices.insert(lo);
                vertices.insert(hi);
            }
        }
    }
    (vertices, faces)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn mixed(max_exp: u32, max_terms: usize) -> impl Strategy<Value = MixedPoly> {
    prop::collection::vec(
        ((0..=max_exp, 0..=max_exp, 0..=max_exp, 0..=max_exp), -2.0..2.0f64, -2.0..2.0f64),
        1..=max_terms,
    )
    .prop_map(|ts| MixedPoly::from_terms(ts.into_iter().map(|((a, b, c, d), x, y)| ([a, b, c, d], Complex64::new(x, y)))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn loop_round_trip_is_exact(g in monic_loop(4, None), extra in 0u32..3) {
        let k0 = line(&g).smallest_admissible(&g, 1, None, 4096).unwrap();
        // Adding 2 to an admissible k keeps it admissible.
        let l = FaceLine { k: k0 + 2 * extra, ..line(&g) };
        let f = from_loop_line(&g, &l).unwrap();
        let back = g_polynomial(&f, &l.weight()).unwrap().to_loop_poly().unwrap();
        prop_assert_eq!(back.max_coeff_diff(&g), 0.0);
    }

    #[test]
    fn even_slope_is_tau_u_symmetric(g in monic_loop(4, Some(0))) {
        let k = line(&g).smallest_admissible(&g, 1, Some(true), 4096).unwrap();
        let f = from_loop_line(&g, &FaceLine { k, ..line(&g) }).unwrap();
        let sign = f.symmetry_sign(Tau::U);
        prop_assert!(sign == Some(1) || sign == Some(-1));
    }

    #[test]
    fn symmetry_matches_evaluation(f in mixed(4, 8), pts in prop::collection::vec((-1.5..1.5f64, -1.5..1.5f64, -1.5..1.5f64, -1.5..1.5f64), 100)) {
        let g = f.apply_symmetry(Tau::U);
        for (a, b, c, d) in pts {
            let (u, v) = (Complex64::new(a, b), Complex64::new(c, d));
            prop_assert!((g.eval(u, v) - f.eval(u, -v)).norm() < 1e-12 * (1.0 + f.coeff_sum() * 40.0));
        }
    }

    #[test]
    fn glued_faces_are_the_parts(
        g1 in monic_loop(3, Some(0)),
        g2 in monic_loop(3, Some(0)),
        b in (0.5..2.0f64, -1.0..1.0f64),
    ) {
        let b = TrigPoly::constant(Complex64::new(b.0, b.1));
        let (s1, s2) = (g1.degree(), g2.degree());
        // Second face: u^{s1}·g2 with the constant lowest coefficient b.
        let mut c2: Vec<TrigPoly> = g2.coeffs().to_vec();
        c2[0] = b.clone();
        let face2 = LoopPoly::unchecked(c2).unwrap().mul_u_power(s1);
        let l2 = FaceLine { k: 1, q: 1, top: s1 + s2, nu_end: 0 };
        let k2 = l2.smallest_admissible(&face2, 1, None, 4096).unwrap();
        let l2 = FaceLine { k: k2, ..l2 };
        // First face: b·g1 with its top coefficient b meeting the shared vertex.
        // A nonzero constant term keeps it a genuine face rather than a vertex.
        let mut c1: Vec<TrigPoly> = g1.coeffs().to_vec();
        c1[0] = &c1[0] + &TrigPoly::constant(Complex64::new(3.0, 0.0));
        prop_assume!(!c1[0].is_zero());
        let face1 = LoopPoly::unchecked(c1).unwrap().mul_trig(&b);
        let l1 = FaceLine { k: 1, q: 1, top: s1, nu_end: k2 * s2 as u32 };
        let k1 = l1.smallest_admissible(&face1, k2 + 1, None, 4096).unwrap();
        let l1 = FaceLine { k: k1, ..l1 };
        let parts = [from_loop_line(&face1, &l1).unwrap(), from_loop_line(&face2, &l2).unwrap()];
        let f = glue(&parts).unwrap();
        for (part, l) in parts.iter().zip([l1, l2]) {
            prop_assert!(face_function(&f, &l.weight()).max_coeff_diff(part) < 1e-15);
        }
        prop_assert_eq!(newton(&f).unwrap().faces.len(), 2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn newton_matches_weight_scan(pts in prop::collection::btree_set((0u32..=12, 0u32..=12), 1..=12)) {
        let f = MixedPoly::from_terms(pts.iter().map(|&(m, n)| ([m, 0, n, 0], Complex64::new(1.0, 0.0))));
        let nd = newton(&f).unwrap();
        let (vertices, faces) = hull_oracle(&pts);
        let got_v: BTreeSet<(u32, u32)> = nd.vertices.iter().copied().collect();
        prop_assert_eq!(got_v, vertices);
        let got_f: BTreeSet<((u64, u64), (u32, u32), (u32, u32))> = nd
            .faces
            .iter()
            .map(|fc| ((fc.weight.p1(), fc.weight.p2()), fc.start.min(fc.end), fc.start.max(fc.end)))
            .collect();
        prop_assert_eq!(got_f, faces);
    }
}

#[test]
fn weight_vectors_order_by_slope() {
    let a = WeightVector::new(5, 1).unwrap();
    let b = WeightVector::new(4, 1).unwrap();
    let c = WeightVector::new(3, 2).unwrap();
    assert!(a > b && b > c);
}
