use proptest::prelude::*;
use singforge::obstruction::{gfp, hartley_check, murasugi_check, times_reflection, Gf2Poly, IntLaurentPoly, Verdict};
use singforge::Config;

fn gf2(bits: &[bool]) -> Gf2Poly {
    Gf2Poly::from_bits(bits.iter().copied())
}

/// Every square of degree ≤ 8 in GF(2)[t], by squaring all polynomials of degree ≤ 4.
fn brute_force_squares() -> Vec<Gf2Poly> {
    (0u32..32).map(|m| {
        let f = gf2(&(0..5).map(|i| m >> i & 1 == 1).collect::<Vec<_>>());
        f.mul(&f)
    }).collect()
}

/// All monic polynomials of exactly degree `d` over GF(p).
fn monics(d: usize, p: u64) -> Vec<gfp::Poly> {
    let count = p.pow(d as u32);
    (0..count).map(|mut idx| {
        let mut c = Vec::with_capacity(d + 1);
        for _ in 0..d {
            c.push(idx % p);
            idx /= p;
        }
        c.push(1);
        c
    }).collect()
}

fn irreducible_by_trial(f: &gfp::Poly, p: u64) -> bool {
    let n = gfp::degree(f).unwrap();
    (1..=n / 2).all(|d| monics(d, p).iter().all(|g| !gfp::rem(f, g, p).is_empty()))
}

#[test]
fn gf2_squares_agree_with_brute_force() {
    let squares = brute_force_squares();
    for m in 0u32..512 {
        let p = gf2(&(0..9).map(|i| m >> i & 1 == 1).collect::<Vec<_>>());
        assert_eq!(p.is_square(), squares.contains(&p), "{p}");
        if let Some(r) = p.sqrt() {
            assert_eq!(r.mul(&r), p);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn murasugi_ignores_shift_and_reversal(
        coeffs in prop::collection::vec(-9i64..=9, 1..10),
        k in -6i64..=6,
    ) {
        let d = IntLaurentPoly::from_coeffs(coeffs);
        prop_assume!(!d.is_zero());
        let base = murasugi_check(&d);
        for other in [d.shift(k), d.reciprocal(), d.reciprocal().shift(k)] {
            let r = murasugi_check(&other);
            prop_assert_eq!(r.verdict, base.verdict);
            prop_assert_eq!(r.irreducible_mod2, base.irreducible_mod2);
        }
    }

    #[test]
    fn gf2_division_identity(a in prop::collection::vec(any::<bool>(), 0..40), b in prop::collection::vec(any::<bool>(), 1..20)) {
        let (a, b) = (gf2(&a), gf2(&b));
        prop_assume!(!b.is_zero());
        let (q, r) = a.div_rem(&b);
        prop_assert_eq!(q.mul(&b).add(&r), a);
        prop_assert!(r.is_zero() || r.degree() < b.degree());
    }

    #[test]
    fn gfp_factors_multiply_back(
        p in prop::sample::select(vec![3u64, 5, 7]),
        coeffs in prop::collection::vec(0u64..7, 2..8),
    ) {
        let f = gfp::trim(coeffs.iter().map(|c| c % p).collect());
        prop_assume!(gfp::degree(&f).unwrap_or(0) >= 1);
        prop_assume!(gfp::is_squarefree(&f, p));
        let (lead, factors) = gfp::factor_squarefree(&f, p);
        let mut prod = vec![lead];
        for g in &factors {
            prop_assert_eq!(*g.last().unwrap(), 1);
            prop_assert!(irreducible_by_trial(g, p), "{:?} reducible mod {}", g, p);
            prod = gfp::mul(&prod, g, p);
        }
        prop_assert_eq!(prod, f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    /// `Δ` built so that `Δ(t²) = f(t)·f(−t)` must pass, with a verified witness.
    #[test]
    fn reflection_products_are_possible(
        inner in prop::collection::vec(-3i64..=3, 0..4),
        ends in (prop::sample::select(vec![-2i64, -1, 1, 2]), prop::sample::select(vec![-2i64, -1, 1, 2])),
    ) {
        let mut f = vec![ends.0];
        f.extend(inner);
        f.push(ends.1);
        let d = times_reflection(&f);
        prop_assert!(d.iter().skip(1).step_by(2).all(|&c| c == 0));
        let delta = IntLaurentPoly::from_coeffs(d.iter().step_by(2).map(|&c| c as i64).collect());
        let r = hartley_check(&delta, &Config::default()).unwrap();
        prop_assert_eq!(r.verdict, Verdict::Possible, "{}: {}", delta, r.reason);
        prop_assert!(r.prime_degrees.iter().all(|p| !p.excludes_half_degree));
        if let (Some(w), Some(sign)) = (&r.witness, r.sign) {
            let back: Vec<i128> = times_reflection(&w.normalized().coeffs).iter().map(|c| c * sign as i128).collect();
            let want: Vec<i128> = r.d.normalized().coeffs.iter().map(|&c| c as i128).collect();
            prop_assert_eq!(back, want);
        }
    }
}
