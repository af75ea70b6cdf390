//! Necessary conditions on the Alexander polynomial of a knot for the two
//! symmetry classes: Murasugi's congruence for 2-periodic knots and the
//! `Δ(t²) = f(t)·f(−t)` factorization for freely 2-periodic ones.
//!
//! A `Possible` verdict only means the test found no obstruction.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::Config;
use crate::roots::poly_roots;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ObstructionError {
    #[error("cannot parse coefficient list: {0}")]
    Parse(String),
    #[error("the zero polynomial has no Alexander polynomial reading")]
    Zero,
    #[error("no factor f(t) found for D(t) of degree {degree} after {tried} sign choices; the search bound was reached")]
    SearchExhausted { degree: usize, tried: u64 },
}

/// Integer Laurent polynomial `t^offset · Σ c_i t^i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntLaurentPoly {
    pub offset: i64,
    pub coeffs: Vec<i64>,
}

impl IntLaurentPoly {
    pub fn new(offset: i64, coeffs: Vec<i64>) -> Self {
        IntLaurentPoly { offset, coeffs }
    }

    /// Lowest-degree-first coefficients with offset 0.
    pub fn from_coeffs(coeffs: Vec<i64>) -> Self {
        IntLaurentPoly { offset: 0, coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Strips zero ends, shifts the lowest exponent to 0 and makes the
    /// leading coefficient positive.
    pub fn normalized(&self) -> IntLaurentPoly {
        let lo = self.coeffs.iter().position(|&c| c != 0);
        let Some(lo) = lo else {
            return IntLaurentPoly::from_coeffs(vec![0]);
        };
        let hi = self.coeffs.iter().rposition(|&c| c != 0).expect("nonzero");
        let mut c = self.coeffs[lo..=hi].to_vec();
        if c[c.len() - 1] < 0 {
            c.iter_mut().for_each(|x| *x = -*x);
        }
        IntLaurentPoly::from_coeffs(c)
    }

    pub fn degree(&self) -> usize {
        self.normalized().coeffs.len() - 1
    }

    /// `Δ(1/t)`.
    pub fn reciprocal(&self) -> IntLaurentPoly {
        let n = self.coeffs.len() as i64;
        let mut c = self.coeffs.clone();
        c.reverse();
        IntLaurentPoly::new(-(self.offset + n - 1), c)
    }

    pub fn shift(&self, k: i64) -> IntLaurentPoly {
        IntLaurentPoly::new(self.offset + k, self.coeffs.clone())
    }

    /// `Δ(t) ≐ Δ(1/t)` up to sign.
    pub fn is_symmetric(&self) -> bool {
        let n = self.normalized();
        let mut r = n.coeffs.clone();
        r.reverse();
        r == n.coeffs || r.iter().zip(&n.coeffs).all(|(a, b)| *a == -*b)
    }

    /// `Δ(t²)` for the normalized polynomial.
    pub fn substitute_square(&self) -> IntLaurentPoly {
        let n = self.normalized();
        let mut c = vec![0; 2 * n.coeffs.len() - 1];
        for (i, &x) in n.coeffs.iter().enumerate() {
            c[2 * i] = x;
        }
        IntLaurentPoly::from_coeffs(c)
    }

    pub fn mod2(&self) -> Gf2Poly {
        Gf2Poly::from_bits(self.normalized().coeffs.iter().map(|c| c.rem_euclid(2) == 1))
    }
}

impl fmt::Display for IntLaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.coeffs.iter().enumerate().map(|(i, &c)| (self.offset + i as i64, c)))
    }
}

fn write_terms(f: &mut fmt::Formatter<'_>, terms: impl Iterator<Item = (i64, i64)>) -> fmt::Result {
    let mut first = true;
    for (e, c) in terms {
        if c == 0 {
            continue;
        }
        let sign = if c < 0 { "-" } else if first { "" } else { "+" };
        let a = c.unsigned_abs();
        let mag = if a == 1 && e != 0 { String::new() } else { a.to_string() };
        let var = match e {
            0 => String::new(),
            1 => "t".to_string(),
            _ => format!("t^{e}"),
        };
        write!(f, "{sign}{mag}{var}")?;
        first = false;
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

impl FromStr for IntLaurentPoly {
    type Err = ObstructionError;

    /// Whitespace or comma separated integers, lowest degree first.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let coeffs = s
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|x| !x.is_empty())
            .map(|x| x.parse::<i64>().map_err(|_| ObstructionError::Parse(format!("'{x}' is not an integer"))))
            .collect::<Result<Vec<_>, _>>()?;
        if coeffs.is_empty() {
            return Err(ObstructionError::Parse("empty coefficient list".into()));
        }
        Ok(IntLaurentPoly::from_coeffs(coeffs))
    }
}

/// Polynomial over GF(2); bit `i` of the limbs is the coefficient of `t^i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gf2Poly {
    limbs: Vec<u64>,
}

impl Gf2Poly {
    pub fn zero() -> Self {
        Gf2Poly { limbs: Vec::new() }
    }

    pub fn one() -> Self {
        Gf2Poly { limbs: vec![1] }
    }

    pub fn monomial(k: usize) -> Self {
        let mut p = Gf2Poly::zero();
        p.set(k, true);
        p
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut p = Gf2Poly::zero();
        for (i, b) in bits.into_iter().enumerate() {
            if b {
                p.set(i, true);
            }
        }
        p
    }

    /// `1 + t + … + t^{λ−1}`.
    pub fn repunit(lambda: usize) -> Self {
        Gf2Poly::from_bits(std::iter::repeat_n(true, lambda))
    }

    fn trim(mut self) -> Self {
        while self.limbs.last() == Some(&0) {
            self.limbs.pop();
        }
        self
    }

    pub fn bit(&self, i: usize) -> bool {
        self.limbs.get(i / 64).is_some_and(|l| l >> (i % 64) & 1 == 1)
    }

    fn set(&mut self, i: usize, b: bool) {
        if self.limbs.len() <= i / 64 {
            self.limbs.resize(i / 64 + 1, 0);
        }
        if b {
            self.limbs[i / 64] |= 1 << (i % 64);
        } else {
            self.limbs[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == 0)
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        let (i, l) = self.limbs.iter().enumerate().rev().find(|(_, l)| **l != 0)?;
        Some(64 * i + 63 - l.leading_zeros() as usize)
    }

    pub fn add(&self, o: &Gf2Poly) -> Gf2Poly {
        let n = self.limbs.len().max(o.limbs.len());
        let limbs = (0..n)
            .map(|i| self.limbs.get(i).copied().unwrap_or(0) ^ o.limbs.get(i).copied().unwrap_or(0))
            .collect();
        Gf2Poly { limbs }.trim()
    }

    fn shl(&self, k: usize) -> Gf2Poly {
        let mut out = Gf2Poly::zero();
        if let Some(d) = self.degree() {
            for i in 0..=d {
                if self.bit(i) {
                    out.set(i + k, true);
                }
            }
        }
        out
    }

    pub fn mul(&self, o: &Gf2Poly) -> Gf2Poly {
        let mut out = Gf2Poly::zero();
        if let Some(d) = self.degree() {
            for i in 0..=d {
                if self.bit(i) {
                    out = out.add(&o.shl(i));
                }
            }
        }
        out
    }

    /// Quotient and remainder; panics on division by zero.
    pub fn div_rem(&self, d: &Gf2Poly) -> (Gf2Poly, Gf2Poly) {
        let dd = d.degree().expect("division by the zero polynomial");
        let mut r = self.clone().trim();
        let mut q = Gf2Poly::zero();
        while let Some(rd) = r.degree() {
            if rd < dd {
                break;
            }
            q.set(rd - dd, true);
            r = r.add(&d.shl(rd - dd));
        }
        (q.trim(), r)
    }

    pub fn rem(&self, d: &Gf2Poly) -> Gf2Poly {
        self.div_rem(d).1
    }

    pub fn gcd(&self, o: &Gf2Poly) -> Gf2Poly {
        let (mut a, mut b) = (self.clone().trim(), o.clone().trim());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }

    /// Strips factors of `t`.
    pub fn strip_t(&self) -> Gf2Poly {
        match (0..).find(|&i| self.bit(i) || self.is_zero()) {
            Some(k) if !self.is_zero() => {
                let d = self.degree().expect("nonzero");
                Gf2Poly::from_bits((k..=d).map(|i| self.bit(i)))
            }
            _ => Gf2Poly::zero(),
        }
    }

    /// Over GF(2) a polynomial is a square exactly when only even powers occur.
    pub fn is_square(&self) -> bool {
        self.degree().is_none_or(|d| (1..=d).step_by(2).all(|i| !self.bit(i)))
    }

    pub fn sqrt(&self) -> Option<Gf2Poly> {
        if !self.is_square() {
            return None;
        }
        let d = self.degree().unwrap_or(0);
        Some(Gf2Poly::from_bits((0..=d / 2).map(|i| self.bit(2 * i))).trim())
    }

    fn mul_mod(&self, o: &Gf2Poly, m: &Gf2Poly) -> Gf2Poly {
        self.mul(o).rem(m)
    }

    /// `t^{2^k} mod m`.
    fn frobenius_t(k: usize, m: &Gf2Poly) -> Gf2Poly {
        let mut x = Gf2Poly::monomial(1).rem(m);
        for _ in 0..k {
            x = x.mul_mod(&x, m);
        }
        x
    }

    /// Rabin's test.
    pub fn is_irreducible(&self) -> bool {
        let Some(n) = self.degree() else {
            return false;
        };
        if n == 0 {
            return false;
        }
        let t = Gf2Poly::monomial(1);
        if Gf2Poly::frobenius_t(n, self).add(&t.rem(self)) != Gf2Poly::zero() {
            return false;
        }
        prime_factors(n as u64).into_iter().all(|q| {
            let h = Gf2Poly::frobenius_t(n / q as usize, self).add(&t);
            self.gcd(&h).degree() == Some(0)
        })
    }
}

impl fmt::Display for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.degree().unwrap_or(0);
        write_terms(f, (0..=d).map(|i| (i as i64, i64::from(self.bit(i)))))
    }
}

impl Serialize for Gf2Poly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Dense polynomials over GF(p), constant term first, always trimmed.
pub mod gfp {
    pub type Poly = Vec<u64>;

    fn inv(a: u64, p: u64) -> u64 {
        pow(a, p - 2, p)
    }

    fn pow(mut a: u64, mut e: u64, p: u64) -> u64 {
        let mut r = 1;
        a %= p;
        while e > 0 {
            if e & 1 == 1 {
                r = r * a % p;
            }
            a = a * a % p;
            e >>= 1;
        }
        r
    }

    pub fn trim(mut a: Poly) -> Poly {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn from_ints(c: &[i64], p: u64) -> Poly {
        trim(c.iter().map(|&x| x.rem_euclid(p as i64) as u64).collect())
    }

    pub fn degree(a: &Poly) -> Option<usize> {
        a.len().checked_sub(1)
    }

    pub fn monic(a: &Poly, p: u64) -> Poly {
        match a.last() {
            None => Vec::new(),
            Some(&l) => {
                let i = inv(l, p);
                a.iter().map(|&x| x * i % p).collect()
            }
        }
    }

    pub fn sub(a: &Poly, b: &Poly, p: u64) -> Poly {
        let n = a.len().max(b.len());
        trim((0..n).map(|i| (a.get(i).copied().unwrap_or(0) + p - b.get(i).copied().unwrap_or(0)) % p).collect())
    }

    pub fn mul(a: &Poly, b: &Poly, p: u64) -> Poly {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % p;
            }
        }
        trim(out)
    }

    pub fn div_rem(a: &Poly, b: &Poly, p: u64) -> (Poly, Poly) {
        let db = degree(b).expect("division by zero");
        let li = inv(b[db], p);
        let mut r = a.clone();
        let mut q = vec![0; a.len().saturating_sub(db).max(1)];
        while let Some(dr) = degree(&r) {
            if dr < db {
                break;
            }
            let c = r[dr] * li % p;
            q[dr - db] = c;
            for (i, &x) in b.iter().enumerate() {
                r[dr - db + i] = (r[dr - db + i] + p - c * x % p) % p;
            }
            r = trim(r);
        }
        (trim(q), r)
    }

    pub fn rem(a: &Poly, b: &Poly, p: u64) -> Poly {
        div_rem(a, b, p).1
    }

    pub fn gcd(a: &Poly, b: &Poly, p: u64) -> Poly {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        monic(&a, p)
    }

    pub fn derivative(a: &Poly, p: u64) -> Poly {
        trim(a.iter().enumerate().skip(1).map(|(i, &x)| (i as u64 % p) * x % p).collect())
    }

    fn pow_mod(a: &Poly, mut e: u64, m: &Poly, p: u64) -> Poly {
        let mut r = vec![1];
        let mut b = rem(a, m, p);
        while e > 0 {
            if e & 1 == 1 {
                r = rem(&mul(&r, &b, p), m, p);
            }
            b = rem(&mul(&b, &b, p), m, p);
            e >>= 1;
        }
        rem(&r, m, p)
    }

    pub fn is_squarefree(a: &Poly, p: u64) -> bool {
        let d = derivative(a, p);
        !d.is_empty() && degree(&gcd(a, &d, p)) == Some(0)
    }

    /// Distinct-degree factorization of a monic square-free polynomial:
    /// `(d, product of its irreducible factors of degree d)`.
    pub fn distinct_degree(f: &Poly, p: u64) -> Vec<(usize, Poly)> {
        let mut out = Vec::new();
        let mut g = f.clone();
        let x = vec![0, 1];
        let mut h = x.clone();
        let mut d = 0;
        while degree(&g).is_some_and(|n| n >= 2 * (d + 1)) {
            d += 1;
            h = pow_mod(&h, p, &g, p);
            let k = gcd(&g, &sub(&h, &x, p), p);
            if degree(&k).is_some_and(|n| n > 0) {
                out.push((d, k.clone()));
                g = div_rem(&g, &k, p).0;
                h = rem(&h, &g, p);
            }
        }
        if let Some(n) = degree(&g) {
            if n > 0 {
                out.push((n, g));
            }
        }
        out
    }

    /// Splits a product of distinct irreducible factors of degree `d`
    /// (odd `p`), trying the polynomials `a` in a fixed enumeration order.
    pub fn equal_degree(f: &Poly, d: usize, p: u64) -> Vec<Poly> {
        let n = degree(f).unwrap_or(0);
        if n <= d {
            return vec![f.clone()];
        }
        let mut counter: u64 = 1;
        loop {
            counter += 1;
            let mut a = Vec::new();
            let mut c = counter;
            while c > 0 {
                a.push(c % p);
                c /= p;
            }
            let a = trim(a);
            if degree(&a).is_none_or(|k| k == 0 || k >= n) {
                continue;
            }
            // a^{(p^d − 1)/2} = (a · a^p · … · a^{p^{d−1}})^{(p−1)/2}.
            let mut prod = vec![1];
            let mut ap = rem(&a, f, p);
            for _ in 0..d {
                prod = rem(&mul(&prod, &ap, p), f, p);
                ap = pow_mod(&ap, p, f, p);
            }
            let b = sub(&pow_mod(&prod, (p - 1) / 2, f, p), &vec![1], p);
            let g = gcd(f, &b, p);
            if degree(&g).is_some_and(|k| k > 0 && k < n) {
                let mut out = equal_degree(&g, d, p);
                out.extend(equal_degree(&div_rem(f, &g, p).0, d, p));
                return out;
            }
        }
    }

    /// Complete factorization of a square-free polynomial into monic
    /// irreducibles, with the leading coefficient returned separately.
    pub fn factor_squarefree(f: &Poly, p: u64) -> (u64, Vec<Poly>) {
        let lead = *f.last().expect("nonzero polynomial");
        let m = monic(f, p);
        let mut out = Vec::new();
        for (d, g) in distinct_degree(&m, p) {
            out.extend(equal_degree(&g, d, p));
        }
        out.sort();
        (lead, out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Possible,
    Obstructed,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Possible => "possible",
            Verdict::Obstructed => "obstructed",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MurasugiWitness {
    pub lambda: usize,
    pub f_mod2: Gf2Poly,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MurasugiResult {
    pub verdict: Verdict,
    pub reduction_mod2: Gf2Poly,
    pub irreducible_mod2: bool,
    pub witness: Option<MurasugiWitness>,
}

/// `Δ ≡ f² · (1 + t + … + t^{λ−1}) mod 2` up to powers of `t`, `λ` odd.
pub fn murasugi_check(delta: &IntLaurentPoly) -> MurasugiResult {
    let r = delta.mod2().strip_t();
    let irreducible_mod2 = r.is_irreducible();
    let deg = r.degree();
    let witness = match deg {
        None => Some(MurasugiWitness { lambda: 1, f_mod2: Gf2Poly::zero() }),
        Some(d) => (1..=d + 1).step_by(2).find_map(|lambda| {
            let (q, rem) = r.div_rem(&Gf2Poly::repunit(lambda));
            if !rem.is_zero() {
                return None;
            }
            q.sqrt().map(|f| MurasugiWitness { lambda, f_mod2: f })
        }),
    };
    let verdict = if witness.is_some() { Verdict::Possible } else { Verdict::Obstructed };
    MurasugiResult { verdict, reduction_mod2: r, irreducible_mod2, witness }
}

/// Factor degrees of `D mod p` for one prime.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrimeFactorDegrees {
    pub prime: u64,
    pub degrees: Vec<usize>,
    /// `deg f = deg D / 2` cannot be written as a sum of these degrees.
    pub excludes_half_degree: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HartleyResult {
    pub verdict: Verdict,
    /// `Δ(t²)` for the normalized `Δ`.
    pub d: IntLaurentPoly,
    /// `f` with `D(t) = sign · f(t) · f(−t)`.
    pub witness: Option<IntLaurentPoly>,
    pub sign: Option<i64>,
    /// Primes at which `D` is irreducible of full degree.
    pub irreducible_mod: Vec<u64>,
    pub prime_degrees: Vec<PrimeFactorDegrees>,
    pub reason: String,
}

fn subset_sums(degrees: &[usize]) -> Vec<bool> {
    let total: usize = degrees.iter().sum();
    let mut reach = vec![false; total + 1];
    reach[0] = true;
    for &d in degrees {
        for s in (d..=total).rev() {
            if reach[s - d] {
                reach[s] = true;
            }
        }
    }
    reach
}

fn int_sqrt(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let r = (n as f64).sqrt().round() as i128;
    (r - 1..=r + 1).find(|&x| x >= 0 && x * x == n)
}

fn int_mul(a: &[i128], b: &[i128]) -> Vec<i128> {
    let mut out = vec![0i128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `f(t)·f(−t)`.
pub fn times_reflection(f: &[i64]) -> Vec<i128> {
    let a: Vec<i128> = f.iter().map(|&x| x as i128).collect();
    let b: Vec<i128> = a.iter().enumerate().map(|(i, &x)| if i % 2 == 1 { -x } else { x }).collect();
    int_mul(&a, &b)
}

/// Replaces each group of nearly equal roots by the group mean. A root of
/// multiplicity `k` comes out of a float solver spread over a circle of
/// radius about `ε^{1/k}`, while the mean of the group stays accurate to `ε`.
fn average_clusters(roots: &[Complex64]) -> Vec<Complex64> {
    let mut out = roots.to_vec();
    let mut done = vec![false; roots.len()];
    for i in 0..roots.len() {
        if done[i] {
            continue;
        }
        let group: Vec<usize> =
            (i..roots.len()).filter(|&j| !done[j] && (roots[j] - roots[i]).norm() < 1e-3 * (1.0 + roots[i].norm())).collect();
        let mean = group.iter().map(|&j| roots[j]).sum::<Complex64>() / group.len() as f64;
        for &j in &group {
            out[j] = mean;
            done[j] = true;
        }
    }
    out
}

/// `Δ(t²) = ±f(t)·f(−t)` for some `f ∈ ℤ[t]`.
pub fn hartley_check(delta: &IntLaurentPoly, cfg: &Config) -> Result<HartleyResult, ObstructionError> {
    if delta.is_zero() {
        return Err(ObstructionError::Zero);
    }
    let dn = delta.normalized();
    let d = delta.substitute_square();
    let n = dn.coeffs.len() - 1;
    let mut result = HartleyResult {
        verdict: Verdict::Obstructed,
        d: d.clone(),
        witness: None,
        sign: None,
        irreducible_mod: Vec::new(),
        prime_degrees: Vec::new(),
        reason: String::new(),
    };
    let lead = *dn.coeffs.last().expect("nonzero") as i128;
    let c0 = dn.coeffs[0] as i128;
    if n == 0 {
        return Ok(match int_sqrt(lead) {
            Some(r) => HartleyResult {
                verdict: Verdict::Possible,
                witness: Some(IntLaurentPoly::from_coeffs(vec![r as i64])),
                sign: Some(1),
                reason: "constant square".into(),
                ..result
            },
            None => HartleyResult { reason: "constant that is not a square".into(), ..result },
        });
    }
    let (Some(lf), Some(cf)) = (int_sqrt(lead), int_sqrt(c0.abs())) else {
        result.reason = "leading or constant coefficient of Δ is not ± a square".into();
        return Ok(result);
    };

    // f mod p is a product of some of the irreducible factors of D mod p.
    for &p in &cfg.search.primes {
        if lead % p as i128 == 0 {
            continue;
        }
        let dp = gfp::from_ints(&d.coeffs, p);
        if !gfp::is_squarefree(&dp, p) {
            continue;
        }
        let (_, factors) = gfp::factor_squarefree(&dp, p);
        let mut degrees: Vec<usize> = factors.iter().map(|f| f.len() - 1).collect();
        degrees.sort_unstable();
        if degrees.len() == 1 {
            result.irreducible_mod.push(p);
        }
        let excludes = !subset_sums(&degrees)[n];
        result.prime_degrees.push(PrimeFactorDegrees { prime: p, degrees, excludes_half_degree: excludes });
    }
    if let Some(pd) = result.prime_degrees.iter().find(|x| x.excludes_half_degree) {
        result.reason = if pd.degrees.len() == 1 {
            format!("D(t) is irreducible modulo {} with full degree, hence irreducible over the integers", pd.prime)
        } else {
            format!("no product of factors of D(t) modulo {} has degree {n}", pd.prime)
        };
        return Ok(result);
    }

    if 2 * n > cfg.search.factor_degree_cap {
        return Err(ObstructionError::SearchExhausted { degree: 2 * n, tried: 0 });
    }
    // The roots of f are one square root of each root of Δ.
    let roots = poly_roots(&dn.coeffs.iter().map(|&c| Complex64::new(c as f64, 0.0)).collect::<Vec<_>>(), None)
        .map_err(|_| ObstructionError::SearchExhausted { degree: 2 * n, tried: 0 })?;
    let sq: Vec<Complex64> = average_clusters(&roots).iter().map(|r| r.sqrt()).collect();
    let choices = 1u64 << (n - 1).min(63);
    let limit = choices.min(cfg.search.max_sign_choices);
    let target: Vec<i128> = d.coeffs.iter().map(|&x| x as i128).collect();
    for mask in 0..limit {
        // The first root keeps its sign: f(t) and f(−t) are interchangeable.
        let mut poly = vec![Complex64::new(lf as f64, 0.0)];
        for (i, &w) in sq.iter().enumerate() {
            let w = if i > 0 && mask >> (i - 1) & 1 == 1 { -w } else { w };
            let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
            for (j, &c) in poly.iter().enumerate() {
                next[j + 1] += c;
                next[j] -= c * w;
            }
            poly = next;
        }
        // Only a filter: every candidate is checked exactly below.
        if poly.iter().any(|c| c.im.abs() > 0.25 || (c.re - c.re.round()).abs() > 0.25) {
            continue;
        }
        let f: Vec<i64> = poly.iter().map(|c| c.re.round() as i64).collect();
        if (f[0] as i128).abs() != cf {
            continue;
        }
        let prod = times_reflection(&f);
        let sign = if prod == target {
            1
        } else if prod.iter().zip(&target).all(|(a, b)| *a == -*b) {
            -1
        } else {
            continue;
        };
        return Ok(HartleyResult {
            verdict: Verdict::Possible,
            witness: Some(IntLaurentPoly::from_coeffs(f).normalized()),
            sign: Some(sign),
            reason: "factor found and verified in exact arithmetic".into(),
            ..result
        });
    }
    if limit < choices {
        return Err(ObstructionError::SearchExhausted { degree: 2 * n, tried: limit });
    }
    result.reason = "no choice of square roots of the roots of Δ gives an integer f".into();
    Ok(result)
}

/// Outcome of the Hartley test inside a report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum HartleyOutcome {
    Decided(HartleyResult),
    Inconclusive { reason: String },
}

impl HartleyOutcome {
    pub fn verdict(&self) -> Option<Verdict> {
        match self {
            HartleyOutcome::Decided(r) => Some(r.verdict),
            HartleyOutcome::Inconclusive { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SymmetryReport {
    pub delta: IntLaurentPoly,
    pub murasugi: MurasugiResult,
    pub hartley: HartleyOutcome,
    pub excluded: bool,
    pub verdict: String,
}

pub const EXCLUDED_TEXT: &str = "excluded: cannot be the link of a weakly isolated singularity of a radially weighted homogeneous inner non-degenerate mixed function";
pub const OPEN_TEXT: &str = "no obstruction: the necessary conditions are satisfied or undecided; this does not show the knot is realizable";

pub fn symmetry_report(delta: &IntLaurentPoly, cfg: &Config) -> Result<SymmetryReport, ObstructionError> {
    if delta.is_zero() {
        return Err(ObstructionError::Zero);
    }
    let murasugi = murasugi_check(delta);
    let hartley = match hartley_check(delta, cfg) {
        Ok(r) => HartleyOutcome::Decided(r),
        Err(e) => HartleyOutcome::Inconclusive { reason: e.to_string() },
    };
    let excluded = murasugi.verdict == Verdict::Obstructed && hartley.verdict() == Some(Verdict::Obstructed);
    let verdict = if excluded { EXCLUDED_TEXT } else { OPEN_TEXT }.to_string();
    Ok(SymmetryReport { delta: delta.normalized(), murasugi, hartley, excluded, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> IntLaurentPoly {
        s.parse().unwrap()
    }

    #[test]
    fn knot_8_16() {
        let cfg = Config::default();
        let d = p("1 -4 8 -9 8 -4 1");
        let m = murasugi_check(&d);
        assert_eq!(m.reduction_mod2.to_string(), "1+t^3+t^6");
        assert!(m.irreducible_mod2);
        assert_eq!(m.verdict, Verdict::Obstructed);
        let h = hartley_check(&d, &cfg).unwrap();
        assert_eq!(h.verdict, Verdict::Obstructed);
        // D(t) splits modulo every listed prime, so the verdict rests on the
        // exhaustive root-sign search.
        assert!(h.irreducible_mod.is_empty());
        assert!(h.witness.is_none());
        assert!(symmetry_report(&d, &cfg).unwrap().excluded);
    }

    #[test]
    fn trefoil_and_unknot() {
        let cfg = Config::default();
        let m = murasugi_check(&p("1 -1 1"));
        assert_eq!(m.verdict, Verdict::Possible);
        assert_eq!(m.witness.unwrap().lambda, 3);
        // Δ(t²) = 1 − t² + t⁴ is the 12th cyclotomic polynomial.
        let h = hartley_check(&p("1 -1 1"), &cfg).unwrap();
        assert_eq!(h.verdict, Verdict::Obstructed);
        assert!(!symmetry_report(&p("1 -1 1"), &cfg).unwrap().excluded);
        let u = symmetry_report(&p("1"), &cfg).unwrap();
        assert!(!u.excluded);
        assert_eq!(u.murasugi.verdict, Verdict::Possible);
        assert_eq!(u.hartley.verdict(), Some(Verdict::Possible));
    }

    #[test]
    fn hartley_finds_factor() {
        let cfg = Config::default();
        // f = 1 + t + t²: f(t) f(−t) = 1 + t² + t⁴, so Δ = 1 + t + t².
        let h = hartley_check(&p("1 1 1"), &cfg).unwrap();
        assert_eq!(h.verdict, Verdict::Possible);
        let f = h.witness.unwrap();
        assert_eq!(times_reflection(&f.coeffs), vec![1, 0, 1, 0, 1]);
    }

    #[test]
    fn gfp_factor_roundtrip() {
        let d = p("1 -4 8 -9 8 -4 1").substitute_square();
        for (q, want) in [(3, vec![6, 6]), (11, vec![2, 2, 4, 4]), (17, vec![1, 1, 1, 1, 2, 2, 2, 2])] {
            let f = gfp::from_ints(&d.coeffs, q);
            assert!(gfp::is_squarefree(&f, q));
            let (lead, fs) = gfp::factor_squarefree(&f, q);
            let prod = fs.iter().fold(vec![lead], |acc, g| gfp::mul(&acc, g, q));
            assert_eq!(prod, f);
            let mut degs: Vec<usize> = fs.iter().map(|g| g.len() - 1).collect();
            degs.sort_unstable();
            assert_eq!(degs, want);
        }
    }
}
