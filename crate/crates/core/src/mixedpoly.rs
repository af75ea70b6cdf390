//! Mixed polynomials `f(u, ū, v, v̄)`, their Newton boundaries, the loops
//! attached to radially weighted homogeneous faces, and certificates for inner
//! non-degeneracy and niceness.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, Status, Witness};
use crate::config::{defaults, Config};
use crate::looppoly::LoopPoly;
use crate::pfibered;
use crate::trigpoly::{TrigPoly, DROP_TOL};

/// Exponents `(μ₁, μ₂, ν₁, ν₂)` of `u^{μ₁} ū^{μ₂} v^{ν₁} v̄^{ν₂}`.
pub type Exponents = [u32; 4];

/// A lattice point `(μ₁+μ₂, ν₁+ν₂)` of the support.
pub type Lattice = (u32, u32);

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum MixedError {
    #[error("the polynomial is zero")]
    ZeroPolynomial,
    #[error(
        "weight k is inadmissible for the term e^({l}it)·u^{j}; smallest admissible even k: {}, odd k: {}",
        fmt_opt(.min_even), fmt_opt(.min_odd)
    )]
    InadmissibleK { j: usize, l: i64, min_even: Option<u32>, min_odd: Option<u32> },
    #[error("term {0:?} does not lie on the face")]
    OffFace(Exponents),
    #[error("the loop involves ū and is not a polynomial in u alone")]
    NotHolomorphic,
    #[error("part {0} is not radially weighted homogeneous with one compact face")]
    NotRadiallyHomogeneous(usize),
    #[error("weight vectors of parts {0} and {1} are not strictly decreasing")]
    WeightOrderViolation(usize, usize),
    #[error("parts {0} and {1} do not share their vertex terms")]
    VertexMismatch(usize, usize),
    #[error("weights must be positive and coprime, got ({0}, {1})")]
    BadWeight(u64, u64),
    #[error("cannot parse polynomial: {0}")]
    Parse(String),
}

fn fmt_opt(v: &Option<u32>) -> String {
    v.map_or_else(|| "none".into(), |k| k.to_string())
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "MixedRepr", into = "MixedRepr")]
pub struct MixedPoly {
    terms: BTreeMap<Exponents, Complex64>,
}

#[derive(Serialize, Deserialize)]
struct MixedRepr {
    terms: Vec<(u32, u32, u32, u32, f64, f64)>,
}

impl From<MixedRepr> for MixedPoly {
    fn from(r: MixedRepr) -> Self {
        MixedPoly::from_terms(r.terms.into_iter().map(|(a, b, c, d, re, im)| ([a, b, c, d], Complex64::new(re, im))))
    }
}

impl From<MixedPoly> for MixedRepr {
    fn from(f: MixedPoly) -> Self {
        MixedRepr { terms: f.terms.into_iter().map(|(e, c)| (e[0], e[1], e[2], e[3], c.re, c.im)).collect() }
    }
}

fn ipow(z: Complex64, n: u32) -> Complex64 {
    let mut r = Complex64::new(1.0, 0.0);
    for _ in 0..n {
        r *= z;
    }
    r
}

impl MixedPoly {
    pub fn zero() -> Self {
        MixedPoly::default()
    }

    pub fn monomial(e: Exponents, c: Complex64) -> Self {
        MixedPoly::from_terms([(e, c)])
    }

    /// Sums repeated exponents and drops negligible coefficients.
    pub fn from_terms<I: IntoIterator<Item = (Exponents, Complex64)>>(terms: I) -> Self {
        let mut map: BTreeMap<Exponents, Complex64> = BTreeMap::new();
        for (e, c) in terms {
            *map.entry(e).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        let max = map.values().map(|c| c.norm()).fold(0.0, f64::max);
        map.retain(|_, c| c.norm() > DROP_TOL * max && c.norm() > 0.0);
        MixedPoly { terms: map }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Exponents, Complex64)> + '_ {
        self.terms.iter().map(|(&e, &c)| (e, c))
    }

    pub fn coeff(&self, e: Exponents) -> Complex64 {
        self.terms.get(&e).copied().unwrap_or_default()
    }

    pub fn support(&self) -> BTreeSet<Lattice> {
        self.terms.keys().map(|e| (e[0] + e[1], e[2] + e[3])).collect()
    }

    pub fn is_semiholomorphic(&self) -> bool {
        self.terms.keys().all(|e| e[1] == 0)
    }

    pub fn coeff_sum(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// Largest coefficient difference to `other`.
    pub fn max_coeff_diff(&self, other: &MixedPoly) -> f64 {
        let keys: BTreeSet<Exponents> = self.terms.keys().chain(other.terms.keys()).copied().collect();
        keys.into_iter().map(|e| (self.coeff(e) - other.coeff(e)).norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: Complex64) -> MixedPoly {
        MixedPoly::from_terms(self.terms().map(|(e, c)| (e, c * s)))
    }

    pub fn multiply_by_u(&self) -> MixedPoly {
        MixedPoly { terms: self.terms().map(|(e, c)| ([e[0] + 1, e[1], e[2], e[3]], c)).collect() }
    }

    pub fn multiply_by_v(&self) -> MixedPoly {
        MixedPoly { terms: self.terms().map(|(e, c)| ([e[0], e[1], e[2] + 1, e[3]], c)).collect() }
    }

    pub fn eval(&self, u: Complex64, v: Complex64) -> Complex64 {
        let (ub, vb) = (u.conj(), v.conj());
        self.terms().map(|(e, c)| c * ipow(u, e[0]) * ipow(ub, e[1]) * ipow(v, e[2]) * ipow(vb, e[3])).sum()
    }

    /// `[∂f/∂u, ∂f/∂ū, ∂f/∂v, ∂f/∂v̄]`.
    pub fn gradient(&self, u: Complex64, v: Complex64) -> [Complex64; 4] {
        let vars = [u, u.conj(), v, v.conj()];
        let mut g = [Complex64::new(0.0, 0.0); 4];
        for (e, c) in self.terms() {
            for (i, gi) in g.iter_mut().enumerate() {
                if e[i] == 0 {
                    continue;
                }
                let mut term = c * e[i] as f64;
                for (k, &x) in vars.iter().enumerate() {
                    term *= ipow(x, if k == i { e[k] - 1 } else { e[k] });
                }
                *gi += term;
            }
        }
        g
    }

    /// Jacobian of `(Re f, Im f)` with respect to `(Re u, Im u, Re v, Im v)`.
    pub fn real_jacobian(&self, u: Complex64, v: Complex64) -> [[f64; 4]; 2] {
        let g = self.gradient(u, v);
        let i = Complex64::new(0.0, 1.0);
        let cols = [g[0] + g[1], i * (g[0] - g[1]), g[2] + g[3], i * (g[2] - g[3])];
        [[cols[0].re, cols[1].re, cols[2].re, cols[3].re], [cols[0].im, cols[1].im, cols[2].im, cols[3].im]]
    }

    pub fn apply_symmetry(&self, tau: Tau) -> MixedPoly {
        MixedPoly { terms: self.terms().map(|(e, c)| (e, c * tau.sign(e) as f64)).collect() }
    }

    /// `λ` with `apply_symmetry(f, τ) = λ·f`, if such a scalar exists.
    pub fn symmetry_sign(&self, tau: Tau) -> Option<i32> {
        let signs: BTreeSet<i32> = self.terms.keys().map(|&e| tau.sign(e)).collect();
        match signs.len() {
            0 => Some(1),
            1 => signs.into_iter().next(),
            _ => None,
        }
    }
}

impl Add for &MixedPoly {
    type Output = MixedPoly;
    fn add(self, rhs: &MixedPoly) -> MixedPoly {
        MixedPoly::from_terms(self.terms().chain(rhs.terms()))
    }
}

impl Sub for &MixedPoly {
    type Output = MixedPoly;
    fn sub(self, rhs: &MixedPoly) -> MixedPoly {
        MixedPoly::from_terms(self.terms().chain(rhs.terms().map(|(e, c)| (e, -c))))
    }
}

impl Neg for &MixedPoly {
    type Output = MixedPoly;
    fn neg(self) -> MixedPoly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &MixedPoly {
    type Output = MixedPoly;
    fn mul(self, rhs: &MixedPoly) -> MixedPoly {
        let mut out = Vec::with_capacity(self.len() * rhs.len());
        for (a, ca) in self.terms() {
            for (b, cb) in rhs.terms() {
                out.push(([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]], ca * cb));
            }
        }
        MixedPoly::from_terms(out)
    }
}

/// The involutions `τ_u: v ↦ −v`, `τ_v: u ↦ −u` and `τ_1: (u, v) ↦ (−u, −v)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tau {
    U,
    V,
    One,
}

impl Tau {
    fn sign(self, e: Exponents) -> i32 {
        let flips = match self {
            Tau::U => e[2] + e[3],
            Tau::V => e[0] + e[1],
            Tau::One => e[0] + e[1] + e[2] + e[3],
        };
        if flips % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

impl FromStr for Tau {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tau_u" => Ok(Tau::U),
            "tau_v" => Ok(Tau::V),
            "tau_1" => Ok(Tau::One),
            _ => Err(format!("unknown involution {s:?}; expected tau_u, tau_v or tau_1")),
        }
    }
}

// ---------------------------------------------------------------------------
// Text form: `u^2 - v^3*vb + (0.5+2i)*u*ub`, with `ub`, `vb` for conjugates.

fn fmt_coeff(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else {
        format!("({}{:+}i)", c.re, c.im)
    }
}

impl fmt::Display for MixedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        // Highest total degree first reads more naturally.
        let mut terms: Vec<_> = self.terms().collect();
        terms.sort_by_key(|(e, _)| std::cmp::Reverse(*e));
        for (e, c) in terms {
            let mut vars = Vec::new();
            for (name, p) in ["u", "ub", "v", "vb"].iter().zip(e) {
                match p {
                    0 => {}
                    1 => vars.push(name.to_string()),
                    _ => vars.push(format!("{name}^{p}")),
                }
            }
            let (neg, mag) = if c.im == 0.0 && c.re < 0.0 { (true, -c) } else { (false, c) };
            let sep = match (first, neg) {
                (true, true) => "-",
                (true, false) => "",
                (false, true) => " - ",
                (false, false) => " + ",
            };
            let body = if vars.is_empty() {
                fmt_coeff(mag)
            } else if mag == Complex64::new(1.0, 0.0) {
                vars.join("*")
            } else {
                format!("{}*{}", fmt_coeff(mag), vars.join("*"))
            };
            write!(f, "{sep}{body}")?;
            first = false;
        }
        Ok(())
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn err(&self, msg: &str) -> MixedError {
        MixedError::Parse(format!("{msg} at byte {}", self.pos))
    }

    fn number(&mut self) -> Result<f64, MixedError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() {
            let c = self.s[self.pos];
            let exp_sign = (c == b'+' || c == b'-') && self.pos > start && matches!(self.s[self.pos - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap_or("");
        text.parse().map_err(|_| self.err("expected a number"))
    }

    /// A real or imaginary literal: `2`, `1.5e-3`, `2i`, `i`.
    fn scalar(&mut self) -> Result<Complex64, MixedError> {
        if self.peek() == Some(b'i') && !self.ident_follows() {
            self.pos += 1;
            return Ok(Complex64::new(0.0, 1.0));
        }
        let x = self.number()?;
        if self.s.get(self.pos) == Some(&b'i') && !self.ident_follows() {
            self.pos += 1;
            Ok(Complex64::new(0.0, x))
        } else {
            Ok(Complex64::new(x, 0.0))
        }
    }

    fn ident_follows(&self) -> bool {
        // After an `i`, an alphabetic character would make it part of a name.
        self.s.get(self.pos + 1).is_some_and(|c| c.is_ascii_alphabetic())
    }

    fn paren_coeff(&mut self) -> Result<Complex64, MixedError> {
        self.pos += 1;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut sign = 1.0;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    sign = 1.0;
                }
                Some(b'-') => {
                    self.pos += 1;
                    sign = -1.0;
                }
                Some(b')') => {
                    self.pos += 1;
                    return Ok(sum);
                }
                Some(_) => {
                    sum += sign * self.scalar()?;
                    sign = 1.0;
                }
                None => return Err(self.err("unclosed parenthesis")),
            }
        }
    }

    fn factor(&mut self, coeff: &mut Complex64, e: &mut Exponents) -> Result<(), MixedError> {
        match self.peek() {
            Some(b'(') => *coeff *= self.paren_coeff()?,
            Some(c) if c.is_ascii_digit() || c == b'.' => *coeff *= self.scalar()?,
            Some(b'u') | Some(b'v') | Some(b'i') => {
                let start = self.pos;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphabetic() {
                    self.pos += 1;
                }
                let name = &self.s[start..self.pos];
                let idx = match name {
                    b"u" => Some(0),
                    b"ub" => Some(1),
                    b"v" => Some(2),
                    b"vb" => Some(3),
                    b"i" => None,
                    _ => return Err(self.err("unknown variable")),
                };
                let mut p = 1u32;
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    p = self.number()? as u32;
                }
                match idx {
                    Some(i) => e[i] += p,
                    None => *coeff *= ipow(Complex64::new(0.0, 1.0), p),
                }
            }
            _ => return Err(self.err("expected a factor")),
        }
        Ok(())
    }

    fn term(&mut self) -> Result<(Exponents, Complex64), MixedError> {
        let mut coeff = Complex64::new(1.0, 0.0);
        let mut e = [0u32; 4];
        self.factor(&mut coeff, &mut e)?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    self.factor(&mut coeff, &mut e)?;
                }
                Some(c) if c == b'(' || c.is_ascii_alphabetic() => self.factor(&mut coeff, &mut e)?,
                _ => return Ok((e, coeff)),
            }
        }
    }
}

impl FromStr for MixedPoly {
    type Err = MixedError;
    fn from_str(s: &str) -> Result<Self, MixedError> {
        let mut p = Parser { s: s.as_bytes(), pos: 0 };
        let mut terms = Vec::new();
        let mut sign = 1.0;
        let mut expect_term = true;
        while let Some(c) = p.peek() {
            match c {
                b'+' | b'-' => {
                    p.pos += 1;
                    if c == b'-' {
                        sign = -sign;
                    }
                    expect_term = true;
                }
                _ if expect_term => {
                    let (e, coeff) = p.term()?;
                    terms.push((e, sign * coeff));
                    sign = 1.0;
                    expect_term = false;
                }
                _ => return Err(p.err("expected + or -")),
            }
        }
        if expect_term {
            return Err(p.err("expected a term"));
        }
        Ok(MixedPoly::from_terms(terms))
    }
}

// ---------------------------------------------------------------------------
// Newton geometry.

/// Primitive weight vector `P = (p₁, p₂)`; `P ≻ Q` iff `p₁/p₂ > q₁/q₂`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(u64, u64)", into = "(u64, u64)")]
pub struct WeightVector {
    p1: u64,
    p2: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl WeightVector {
    pub fn new(p1: u64, p2: u64) -> Result<Self, MixedError> {
        if p1 == 0 || p2 == 0 || gcd(p1, p2) != 1 {
            return Err(MixedError::BadWeight(p1, p2));
        }
        Ok(WeightVector { p1, p2 })
    }

    /// `(a, b)/gcd(a, b)`.
    pub fn primitive(a: u64, b: u64) -> Result<Self, MixedError> {
        let g = gcd(a, b);
        if g == 0 {
            return Err(MixedError::BadWeight(a, b));
        }
        WeightVector::new(a / g, b / g)
    }

    pub fn p1(self) -> u64 {
        self.p1
    }

    pub fn p2(self) -> u64 {
        self.p2
    }

    /// `α_P(μ, ν) = p₁μ + p₂ν`.
    pub fn alpha(self, (mu, nu): Lattice) -> u64 {
        self.p1 * mu as u64 + self.p2 * nu as u64
    }
}

impl TryFrom<(u64, u64)> for WeightVector {
    type Error = MixedError;
    fn try_from((a, b): (u64, u64)) -> Result<Self, MixedError> {
        WeightVector::new(a, b)
    }
}

impl From<WeightVector> for (u64, u64) {
    fn from(w: WeightVector) -> Self {
        (w.p1, w.p2)
    }
}

impl Ord for WeightVector {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.p1 as u128 * other.p2 as u128).cmp(&(other.p1 as u128 * self.p2 as u128))
    }
}

impl PartialOrd for WeightVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.p1, self.p2)
    }
}

/// A compact 1-face of the Newton boundary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Face {
    pub weight: WeightVector,
    /// `d(P; f) = min α_P` over the support.
    pub degree: u64,
    /// Support points on the face, by increasing `μ`.
    pub support: Vec<Lattice>,
    /// Endpoint nearer the `v`-axis.
    pub start: Lattice,
    /// Endpoint nearer the `u`-axis.
    pub end: Lattice,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NewtonData {
    /// Vertices from the `v`-axis end to the `u`-axis end.
    pub vertices: Vec<Lattice>,
    /// Faces `P₁ ≻ … ≻ P_N`.
    pub faces: Vec<Face>,
    pub u_convenient: bool,
    pub v_convenient: bool,
    pub semiholomorphic: bool,
    pub radially_weighted_homogeneous: bool,
}

impl NewtonData {
    /// Vertices other than the two ends.
    pub fn interior_vertices(&self) -> &[Lattice] {
        if self.vertices.len() <= 2 {
            &[]
        } else {
            &self.vertices[1..self.vertices.len() - 1]
        }
    }
}

fn cross(o: Lattice, a: Lattice, b: Lattice) -> i64 {
    let (o0, o1) = (o.0 as i64, o.1 as i64);
    (a.0 as i64 - o0) * (b.1 as i64 - o1) - (a.1 as i64 - o1) * (b.0 as i64 - o0)
}

/// Extreme points of `conv(S + ℝ₊²)`, ordered by increasing first coordinate.
pub fn hull_vertices(support: &BTreeSet<Lattice>) -> Vec<Lattice> {
    // Lowest ν per μ, then the strictly descending staircase.
    let mut lowest: BTreeMap<u32, u32> = BTreeMap::new();
    for &(mu, nu) in support {
        let e = lowest.entry(mu).or_insert(nu);
        *e = (*e).min(nu);
    }
    let mut stair: Vec<Lattice> = Vec::new();
    for (mu, nu) in lowest {
        if stair.last().is_none_or(|&(_, prev)| nu < prev) {
            stair.push((mu, nu));
        }
    }
    let mut hull: Vec<Lattice> = Vec::new();
    for p in stair {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull
}

pub fn newton(f: &MixedPoly) -> Result<NewtonData, MixedError> {
    if f.is_zero() {
        return Err(MixedError::ZeroPolynomial);
    }
    let support = f.support();
    let vertices = hull_vertices(&support);
    let faces: Vec<Face> = vertices
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let weight = WeightVector::primitive((a.1 - b.1) as u64, (b.0 - a.0) as u64).expect("distinct vertices");
            let degree = weight.alpha(a);
            let on: Vec<Lattice> = support.iter().copied().filter(|&p| weight.alpha(p) == degree).collect();
            Face { weight, degree, support: on, start: a, end: b }
        })
        .collect();
    let rwh = match faces.len() {
        0 => support.len() == 1,
        1 => faces[0].support.len() == support.len(),
        _ => false,
    };
    Ok(NewtonData {
        u_convenient: vertices.iter().any(|v| v.1 == 0),
        v_convenient: vertices.iter().any(|v| v.0 == 0),
        semiholomorphic: f.is_semiholomorphic(),
        radially_weighted_homogeneous: rwh,
        vertices,
        faces,
    })
}

/// Terms of `f` on which `α_P` is minimal.
pub fn face_function(f: &MixedPoly, p: &WeightVector) -> MixedPoly {
    let d = f.support().into_iter().map(|x| p.alpha(x)).min();
    match d {
        None => MixedPoly::zero(),
        Some(d) => MixedPoly { terms: f.terms().filter(|(e, _)| p.alpha((e[0] + e[1], e[2] + e[3])) == d).collect() },
    }
}

/// Terms of `f` whose total exponents equal the lattice point `delta`.
pub fn vertex_function(f: &MixedPoly, delta: Lattice) -> MixedPoly {
    MixedPoly { terms: f.terms().filter(|(e, _)| (e[0] + e[1], e[2] + e[3]) == delta).collect() }
}

// ---------------------------------------------------------------------------
// Loops and mixed polynomials.

/// The line on which a loop is placed: the term `u^μ` of the loop lands at
/// total `v`-degree `ν(μ) = nu_end + k(top − μ)/q`, giving weight vector
/// `(k, q)` up to a common factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FaceLine {
    pub k: u32,
    pub q: u32,
    pub top: usize,
    pub nu_end: u32,
}

impl FaceLine {
    pub fn weight(&self) -> WeightVector {
        WeightVector::primitive(self.k as u64, self.q as u64).expect("positive")
    }

    fn nu(&self, mu: usize) -> Option<u32> {
        let num = self.k as u64 * (self.top - mu) as u64;
        (num % self.q as u64 == 0).then(|| self.nu_end + (num / self.q as u64) as u32)
    }

    /// First term of `g` that cannot be placed on this line.
    fn first_violation(&self, g: &LoopPoly) -> Option<(usize, i64)> {
        for (j, a) in g.coeffs().iter().enumerate() {
            for (l, _) in a.iter() {
                let ok = match self.nu(j) {
                    Some(nu) => nu as i64 >= l.abs() && (nu as i64 + l) % 2 == 0,
                    None => false,
                };
                if !ok {
                    return Some((j, l));
                }
            }
        }
        None
    }

    /// Smallest `k ≥ from` (of the given parity, if any) making `g` admissible.
    pub fn smallest_admissible(&self, g: &LoopPoly, from: u32, parity: Option<bool>, max_k: u32) -> Option<u32> {
        (from.max(1)..=max_k)
            .filter(|k| parity.is_none_or(|even| (k % 2 == 0) == even))
            .find(|&k| FaceLine { k, ..*self }.first_violation(g).is_none())
    }
}

/// Places the loop `g` on the line `(k, 1)` through `(s, 0)`:
/// `c·e^{iℓt}u^j ↦ c·u^j v^{(k(s−j)+ℓ)/2} v̄^{(k(s−j)−ℓ)/2}`.
pub fn from_loop(g: &LoopPoly, k: u32) -> Result<MixedPoly, MixedError> {
    from_loop_line(g, &FaceLine { k, q: 1, top: g.degree(), nu_end: 0 })
}

pub fn from_loop_line(g: &LoopPoly, line: &FaceLine) -> Result<MixedPoly, MixedError> {
    if let Some((j, l)) = line.first_violation(g) {
        let max_k = defaults().search.max_k;
        return Err(MixedError::InadmissibleK {
            j,
            l,
            min_even: line.smallest_admissible(g, 1, Some(true), max_k),
            min_odd: line.smallest_admissible(g, 1, Some(false), max_k),
        });
    }
    let mut terms = Vec::new();
    for (j, a) in g.coeffs().iter().enumerate() {
        for (l, c) in a.iter() {
            let nu = line.nu(j).expect("checked") as i64;
            terms.push(([j as u32, 0, ((nu + l) / 2) as u32, ((nu - l) / 2) as u32], c));
        }
    }
    Ok(MixedPoly { terms: terms.into_iter().collect() })
}

/// A loop `Σ A_{ab}(t) x^a x̄^b`. For holomorphic loops (`b = 0` throughout)
/// this is an ordinary [`LoopPoly`].
#[derive(Clone, Debug, PartialEq, Default)]
pub struct MixedLoop {
    pub coeffs: BTreeMap<(u32, u32), TrigPoly>,
}

impl MixedLoop {
    pub fn eval(&self, x: Complex64, t: f64) -> Complex64 {
        self.coeffs.iter().map(|(&(a, b), c)| c.eval(t) * ipow(x, a) * ipow(x.conj(), b)).sum()
    }

    pub fn is_holomorphic(&self) -> bool {
        self.coeffs.keys().all(|&(_, b)| b == 0)
    }

    /// The loop as a polynomial in `x`, without certifying its leading
    /// coefficient.
    pub fn to_loop_poly(&self) -> Result<LoopPoly, MixedError> {
        if !self.is_holomorphic() {
            return Err(MixedError::NotHolomorphic);
        }
        let deg = self.coeffs.keys().map(|&(a, _)| a as usize).max().ok_or(MixedError::ZeroPolynomial)?;
        let mut v = vec![TrigPoly::zero(); deg + 1];
        for (&(a, _), c) in &self.coeffs {
            v[a as usize] = c.clone();
        }
        LoopPoly::unchecked(v).map_err(|_| MixedError::ZeroPolynomial)
    }
}

fn on_face(f: &MixedPoly, p: &WeightVector) -> Result<(), MixedError> {
    let d = f.support().into_iter().map(|x| p.alpha(x)).min().ok_or(MixedError::ZeroPolynomial)?;
    match f.terms().find(|(e, _)| p.alpha((e[0] + e[1], e[2] + e[3])) != d) {
        Some((e, _)) => Err(MixedError::OffFace(e)),
        None => Ok(()),
    }
}

/// `r^{−d} f(r^{p₁}u, r^{p₂}e^{it})`: the term `c u^{μ₁}ū^{μ₂}v^{ν₁}v̄^{ν₂}` of
/// the face contributes `c e^{i(ν₁−ν₂)t}` to the coefficient of `u^{μ₁}ū^{μ₂}`.
pub fn g_polynomial(face: &MixedPoly, p: &WeightVector) -> Result<MixedLoop, MixedError> {
    on_face(face, p)?;
    let mut coeffs: BTreeMap<(u32, u32), Vec<(i64, Complex64)>> = BTreeMap::new();
    for (e, c) in face.terms() {
        coeffs.entry((e[0], e[1])).or_default().push((e[2] as i64 - e[3] as i64, c));
    }
    Ok(MixedLoop { coeffs: coeffs.into_iter().map(|(k, v)| (k, TrigPoly::from_pairs(v))).collect() })
}

/// `R^{−d} f(R^{p₁}e^{iφ}, R^{p₂}v)` as a loop in `v` parametrized by `φ`.
pub fn h_polynomial(face: &MixedPoly, p: &WeightVector) -> Result<MixedLoop, MixedError> {
    on_face(face, p)?;
    let mut coeffs: BTreeMap<(u32, u32), Vec<(i64, Complex64)>> = BTreeMap::new();
    for (e, c) in face.terms() {
        coeffs.entry((e[2], e[3])).or_default().push((e[0] as i64 - e[1] as i64, c));
    }
    Ok(MixedLoop { coeffs: coeffs.into_iter().map(|(k, v)| (k, TrigPoly::from_pairs(v))).collect() })
}

fn single_face(parts: &[MixedPoly]) -> Result<Vec<NewtonData>, MixedError> {
    let mut out = Vec::with_capacity(parts.len());
    for (i, p) in parts.iter().enumerate() {
        let nd = newton(p).map_err(|_| MixedError::NotRadiallyHomogeneous(i))?;
        if nd.faces.len() != 1 || !nd.radially_weighted_homogeneous {
            return Err(MixedError::NotRadiallyHomogeneous(i));
        }
        out.push(nd);
    }
    for i in 1..out.len() {
        if out[i - 1].faces[0].weight <= out[i].faces[0].weight {
            return Err(MixedError::WeightOrderViolation(i - 1, i));
        }
    }
    Ok(out)
}

/// Joins radially weighted homogeneous parts, listed from the `v`-axis end,
/// into one polynomial whose faces are exactly the parts. Consecutive parts
/// must share their common vertex with identical terms; those terms are
/// counted once.
pub fn glue(parts: &[MixedPoly]) -> Result<MixedPoly, MixedError> {
    if parts.is_empty() {
        return Err(MixedError::ZeroPolynomial);
    }
    let nds = single_face(parts)?;
    let mut out = parts[0].clone();
    for i in 1..parts.len() {
        let prev_end = nds[i - 1].faces[0].end;
        let next_start = nds[i].faces[0].start;
        let shared_prev = vertex_function(&parts[i - 1], prev_end);
        let shared_next = vertex_function(&parts[i], next_start);
        let scale = 1.0 + shared_prev.coeff_sum();
        if prev_end != next_start || shared_prev.max_coeff_diff(&shared_next) > 1e-12 * scale {
            return Err(MixedError::VertexMismatch(i - 1, i));
        }
        out = &(&out + &parts[i]) - &shared_next;
    }
    Ok(out)
}

/// The product form `f̃_Δ·f̂ + f̂_{Δ'}·f̃ − f̃_Δ·f̂_{Δ'}`, folded from the right.
/// The faces of the result are the parts multiplied by vertex monomials.
pub fn glue_by_products(parts: &[MixedPoly]) -> Result<MixedPoly, MixedError> {
    let nds = single_face(parts)?;
    let last = parts.len() - 1;
    let mut acc = parts[last].clone();
    let mut acc_start = nds[last].faces[0].start;
    for i in (0..last).rev() {
        let hat = &parts[i];
        let hat_end = nds[i].faces[0].end;
        let tilde_delta = vertex_function(&acc, acc_start);
        let hat_delta = vertex_function(hat, hat_end);
        let next = &(&(&tilde_delta * hat) + &(&hat_delta * &acc)) - &(&tilde_delta * &hat_delta);
        acc_start = (nds[i].faces[0].start.0 + acc_start.0, nds[i].faces[0].start.1 + acc_start.1);
        acc = next;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Certificates.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Strength {
    Weak,
    Strong,
}

/// Inner non-degeneracy: face functions of the extreme faces have no critical
/// points on their zero sets off the respective axis, and every 1-face and
/// non-extreme vertex has none on its zero set in `(ℂ*)²`.
pub fn check_inner_nondegenerate(f: &MixedPoly, cfg: &Config) -> Certificate {
    nondegeneracy(f, cfg, Strength::Weak)
}

/// The strong variant: no critical points at all in those regions.
pub fn check_strongly_inner_nondegenerate(f: &MixedPoly, cfg: &Config) -> Certificate {
    nondegeneracy(f, cfg, Strength::Strong)
}

fn nondegeneracy(f: &MixedPoly, cfg: &Config, strength: Strength) -> Certificate {
    let name = match strength {
        Strength::Weak => "inner-nondegenerate",
        Strength::Strong => "strongly-inner-nondegenerate",
    };
    let nd = match newton(f) {
        Ok(nd) => nd,
        Err(_) => return Certificate::new(name, Status::Fail, 0.0, 0.0, 0).with_note("zero polynomial"),
    };
    let mut parts = Vec::new();
    if nd.faces.is_empty() {
        let region = Region { u_axis: true, v_axis: true };
        parts.push(generic_search(f, region, strength, cfg, &format!("vertex {:?}", nd.vertices[0])));
    }
    let n = nd.faces.len();
    for (i, face) in nd.faces.iter().enumerate() {
        let fp = face_function(f, &face.weight);
        let label = format!("face {} P={}", i + 1, face.weight);
        let mut c = face_check(&fp, face, i == 0, i + 1 == n, &nd, strength, cfg, &label);
        c.check = label;
        parts.push(c);
    }
    for &v in nd.interior_vertices() {
        parts.push(vertex_check(f, v, strength, cfg));
    }
    let mut c = Certificate::combine(name, parts);
    c = c.with_tolerance("witness_defect", cfg.tolerance.witness_defect);
    c
}

fn semiholomorphic_loop(fp: &MixedPoly, w: &WeightVector) -> Option<LoopPoly> {
    g_polynomial(fp, w).ok()?.to_loop_poly().ok()
}

#[allow(clippy::too_many_arguments)]
fn face_check(
    fp: &MixedPoly,
    face: &Face,
    first: bool,
    last: bool,
    nd: &NewtonData,
    strength: Strength,
    cfg: &Config,
    label: &str,
) -> Certificate {
    let n = cfg.grid.loop_samples;
    let lead_samples = cfg.grid.leading_check_samples;
    let region = Region { u_axis: first, v_axis: last };
    let g = match fp.is_semiholomorphic().then(|| semiholomorphic_loop(fp, &face.weight)).flatten() {
        Some(g) if g.leading().certified_nonvanishing(lead_samples) => g,
        _ => return generic_search(fp, region, strength, cfg, label),
    };
    let (q, m) = g.strip_zero_roots();
    let mut parts = Vec::new();

    if first && m >= 2 {
        parts.push(
            Certificate::new("u-axis", Status::Fail, 0.0, 0.0, n)
                .with_note(format!("u = 0 is a root of multiplicity {m} of the face loop"))
                .with_witness(Witness::new("critical point (u, v)", vec![0.0, 0.0, 1.0, 0.0], 0.0)),
        );
    } else if first && m == 1 {
        parts.push(nonvanishing_part("u-axis lowest coefficient", q.lowest(), lead_samples, cfg));
    }

    let main = match strength {
        Strength::Weak => q.simple_root_margin(n).1,
        Strength::Strong => pfibered::certify_function(&q, m, &TrigPoly::one(), n, cfg).certificate,
    };
    parts.push(main);

    if last && !nd.u_convenient {
        parts.push(v_axis_check(fp, face.end, n));
    }
    Certificate::combine(label, parts)
}

fn nonvanishing_part(label: &str, a: &TrigPoly, n: usize, cfg: &Config) -> Certificate {
    let (min, slack) = a.nonvanishing_margin(n);
    let status = if min > slack {
        Status::Pass
    } else if min < cfg.tolerance.witness_defect {
        Status::Fail
    } else {
        Status::Inconclusive
    };
    Certificate::new(label, status, min - slack, slack, n)
}

/// Critical points on `{v = 0}` of a face whose end vertex is off the `u`-axis.
fn v_axis_check(fp: &MixedPoly, end: Lattice, n: usize) -> Certificate {
    let name = "v-axis";
    if end.1 >= 2 {
        return Certificate::new(name, Status::Fail, 0.0, 0.0, n)
            .with_note(format!("the face vanishes to order {} along v = 0", end.1))
            .with_witness(Witness::new("critical point (u, v)", vec![1.0, 0.0, 0.0, 0.0], 0.0));
    }
    let vf = vertex_function(fp, end);
    // Along v = 0 the face is u^a·(c₊ v + c₋ v̄) to first order.
    let mut plus = MixedPoly::zero();
    let mut minus = MixedPoly::zero();
    for (e, c) in vf.terms() {
        let mono = MixedPoly::monomial([e[0], e[1], 0, 0], c);
        if e[2] == 1 {
            plus = &plus + &mono;
        } else {
            minus = &minus + &mono;
        }
    }
    // Compare |c₊(u)| and |c₋(u)| on |u| = 1; the rank drops where they agree.
    let mut margin = f64::INFINITY;
    let mut at = 0.0;
    let samples = 4 * n;
    for k in 0..samples {
        let phi = TAU * k as f64 / samples as f64;
        let u = Complex64::from_polar(1.0, phi);
        let d = (plus.eval(u, Complex64::new(0.0, 0.0)).norm() - minus.eval(u, Complex64::new(0.0, 0.0)).norm()).abs();
        if d < margin {
            margin = d;
            at = phi;
        }
    }
    let slack = (plus.coeff_sum() + minus.coeff_sum()) * (vf.terms().map(|(e, _)| (e[0] + e[1]) as f64).fold(0.0, f64::max)) * (TAU / samples as f64) / 2.0;
    let status = if margin > slack {
        Status::Pass
    } else if margin < 1e-12 {
        Status::Fail
    } else {
        Status::Inconclusive
    };
    Certificate::new(name, status, margin - slack, slack, samples).with_witness(Witness::new("closest |c+| = |c-| (phi)", vec![at], margin))
}

fn vertex_check(f: &MixedPoly, delta: Lattice, strength: Strength, cfg: &Config) -> Certificate {
    let fd = vertex_function(f, delta);
    let label = format!("vertex {delta:?}");
    let nice = nice_vertex(&fd, delta, cfg.grid.nice_grid, cfg);
    let holomorphic_in_u = fd.is_semiholomorphic() && delta.0 >= 1;
    if nice.is_pass() && (strength == Strength::Weak || holomorphic_in_u) {
        let mut c = nice;
        c.check = label;
        return c;
    }
    generic_search(&fd, Region { u_axis: false, v_axis: false }, strength, cfg, &label)
}

/// `f_Δ = R^a r^b Φ(φ, t)`; certifies `min |Φ| > 0`.
fn nice_vertex(fd: &MixedPoly, delta: Lattice, n: usize, cfg: &Config) -> Certificate {
    let phi_of = |phi: f64, t: f64| -> Complex64 {
        fd.terms()
            .map(|(e, c)| c * Complex64::from_polar(1.0, (e[0] as f64 - e[1] as f64) * phi + (e[2] as f64 - e[3] as f64) * t))
            .sum()
    };
    let l_phi: f64 = fd.terms().map(|(e, c)| c.norm() * (e[0] as f64 - e[1] as f64).abs()).sum();
    let l_t: f64 = fd.terms().map(|(e, c)| c.norm() * (e[2] as f64 - e[3] as f64).abs()).sum();
    let h = TAU / n as f64;
    let slack = (l_phi + l_t) * h / 2.0;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let (phi, t) = (i as f64 * h, j as f64 * h);
            let v = phi_of(phi, t).norm();
            if v < best.0 {
                best = (v, phi, t);
            }
        }
    }
    // Polish the closest point with Newton on Φ = 0 (2×2 real system).
    let (mut phi, mut t) = (best.1, best.2);
    let mut val = best.0;
    for _ in 0..cfg.search.newton_steps {
        let p = phi_of(phi, t);
        let dp: Complex64 = fd
            .terms()
            .map(|(e, c)| {
                let w = e[0] as f64 - e[1] as f64;
                c * Complex64::new(0.0, w) * Complex64::from_polar(1.0, w * phi + (e[2] as f64 - e[3] as f64) * t)
            })
            .sum();
        let dt: Complex64 = fd
            .terms()
            .map(|(e, c)| {
                let w = e[2] as f64 - e[3] as f64;
                c * Complex64::new(0.0, w) * Complex64::from_polar(1.0, (e[0] as f64 - e[1] as f64) * phi + w * t)
            })
            .sum();
        let det = dp.re * dt.im - dp.im * dt.re;
        if det.abs() < 1e-300 {
            // Rank one: step along the better-conditioned direction.
            let d = if dp.norm() >= dt.norm() { dp } else { dt };
            if d.norm() == 0.0 {
                break;
            }
            let s = -(p.conj() * d).re / d.norm_sqr();
            if dp.norm() >= dt.norm() {
                phi += s;
            } else {
                t += s;
            }
        } else {
            let sphi = -(dt.im * p.re - dt.re * p.im) / det;
            let st = -(-dp.im * p.re + dp.re * p.im) / det;
            phi += sphi;
            t += st;
        }
        let nv = phi_of(phi, t).norm();
        if !(nv < val) {
            break;
        }
        val = nv;
        if val < 1e-15 {
            break;
        }
    }
    let label = format!("nice vertex {delta:?}");
    if best.0 > slack {
        Certificate::new(label, Status::Pass, best.0 - slack, slack, n)
    } else if val < cfg.tolerance.witness_defect {
        Certificate::new(label, Status::Fail, best.0 - slack, slack, n)
            .with_witness(Witness::new("zero of the vertex function (phi, t)", vec![phi.rem_euclid(TAU), t.rem_euclid(TAU)], val))
    } else {
        Certificate::new(label, Status::Inconclusive, best.0 - slack, slack, n)
            .with_witness(Witness::new("smallest |Phi| (phi, t)", vec![best.1, best.2], best.0))
            .with_note("refine the grid")
    }
}

/// Every non-extreme vertex function has no zeros in `(ℂ*)²`.
pub fn is_nice(f: &MixedPoly, cfg: &Config) -> Certificate {
    let nd = match newton(f) {
        Ok(nd) => nd,
        Err(_) => return Certificate::new("nice", Status::Fail, 0.0, 0.0, 0).with_note("zero polynomial"),
    };
    let parts: Vec<Certificate> = nd
        .interior_vertices()
        .iter()
        .map(|&d| nice_vertex(&vertex_function(f, d), d, cfg.grid.nice_grid, cfg))
        .collect();
    if parts.is_empty() {
        return Certificate::new("nice", Status::Pass, f64::INFINITY, 0.0, cfg.grid.nice_grid).with_note("no non-extreme vertices");
    }
    Certificate::combine("nice", parts)
}

// ---------------------------------------------------------------------------
// Generic critical point search for faces that are not holomorphic in `u`.

/// Which axes belong to the region searched: `u_axis` admits points with
/// `u = 0`, `v_axis` points with `v = 0`.
#[derive(Clone, Copy, Debug)]
struct Region {
    u_axis: bool,
    v_axis: bool,
}

/// Smallest singular value of a real 2×4 matrix.
fn sigma_min(j: &[[f64; 4]; 2]) -> f64 {
    let dot = |a: &[f64; 4], b: &[f64; 4]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let (p, q, r) = (dot(&j[0], &j[0]), dot(&j[1], &j[1]), dot(&j[0], &j[1]));
    let mean = (p + q) / 2.0;
    let rad = (((p - q) / 2.0).powi(2) + r * r).sqrt();
    (mean - rad).max(0.0).sqrt()
}

/// Chart coordinates `(ρ, φ, t)`: chart 0 is `u = ρe^{iφ}, v = e^{it}`,
/// chart 1 is `u = e^{iφ}, v = ρe^{it}`, with `ρ ∈ [0, 1]`. Every orbit of the
/// radial action meets one of them.
fn chart_point(chart: usize, x: [f64; 3]) -> (Complex64, Complex64) {
    let rho = x[0].clamp(0.0, 1.0);
    if chart == 0 {
        (Complex64::from_polar(rho, x[1]), Complex64::from_polar(1.0, x[2]))
    } else {
        (Complex64::from_polar(1.0, x[1]), Complex64::from_polar(rho, x[2]))
    }
}

fn residual(f: &MixedPoly, strength: Strength, u: Complex64, v: Complex64) -> Vec<f64> {
    let s = sigma_min(&f.real_jacobian(u, v));
    match strength {
        Strength::Weak => {
            let val = f.eval(u, v);
            vec![val.re, val.im, s]
        }
        Strength::Strong => vec![s],
    }
}

fn merit(f: &MixedPoly, strength: Strength, u: Complex64, v: Complex64) -> f64 {
    let r = residual(f, strength, u, v);
    match strength {
        Strength::Weak => Complex64::new(r[0], r[1]).norm() + r[2],
        Strength::Strong => r[0],
    }
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if d.abs() < 1e-300 || !d.is_finite() {
        return None;
    }
    let mut x = [0.0; 3];
    for (i, xi) in x.iter_mut().enumerate() {
        let mut m = a;
        for r in 0..3 {
            m[r][i] = b[r];
        }
        *xi = det(m) / d;
    }
    Some(x)
}

/// Levenberg–Marquardt on the residual in chart coordinates.
fn refine(f: &MixedPoly, strength: Strength, chart: usize, mut x: [f64; 3], steps: usize) -> ([f64; 3], f64) {
    let eval = |x: [f64; 3]| {
        let (u, v) = chart_point(chart, x);
        residual(f, strength, u, v)
    };
    let norm2 = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
    let mut r = eval(x);
    let mut lambda = 1e-3;
    for _ in 0..steps {
        let h = 1e-7;
        let mut jac = vec![[0.0; 3]; r.len()];
        for c in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[c] += h;
            xm[c] -= h;
            let (rp, rm) = (eval(xp), eval(xm));
            for i in 0..r.len() {
                jac[i][c] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for i in 0..r.len() {
            for a in 0..3 {
                jtr[a] += jac[i][a] * r[i];
                for b in 0..3 {
                    jtj[a][b] += jac[i][a] * jac[i][b];
                }
            }
        }
        let mut improved = false;
        for _ in 0..8 {
            let mut m = jtj;
            for (a, row) in m.iter_mut().enumerate() {
                row[a] += lambda * (1.0 + jtj[a][a]);
            }
            let Some(d) = solve3(m, [-jtr[0], -jtr[1], -jtr[2]]) else { break };
            let mut xn = [x[0] + d[0], x[1] + d[1], x[2] + d[2]];
            xn[0] = xn[0].clamp(0.0, 1.0);
            let rn = eval(xn);
            if norm2(&rn) < norm2(&r) {
                x = xn;
                r = rn;
                lambda = (lambda / 4.0).max(1e-12);
                improved = true;
                break;
            }
            lambda *= 8.0;
        }
        if !improved || norm2(&r) < 1e-30 {
            break;
        }
    }
    let (u, v) = chart_point(chart, x);
    (x, merit(f, strength, u, v))
}

/// Grid sweep over both charts plus refinement from the lowest seeds. FAIL
/// needs a refined witness inside the region with defect below the configured
/// tolerance; PASS needs the grid minimum of the merit function to clear its
/// Lipschitz slack.
fn generic_search(f: &MixedPoly, region: Region, strength: Strength, cfg: &Config, label: &str) -> Certificate {
    let name = format!("{label} (generic search)");
    let nt = cfg.grid.critical_seed_grid;
    let nr = (nt / 8).max(8);
    let na = (nt / 4).max(8);
    let mut seeds: Vec<(f64, usize, [f64; 3])> = Vec::new();
    let mut grid_min = f64::INFINITY;

    // Torus seeds |u| = |v| = 1.
    let ht = TAU / nt as f64;
    for i in 0..nt {
        for j in 0..nt {
            let x = [1.0, i as f64 * ht, j as f64 * ht];
            let (u, v) = chart_point(0, x);
            seeds.push((merit(f, strength, u, v), 0, x));
        }
    }
    // Solid charts for the certified bound.
    let ha = TAU / na as f64;
    let hr = 1.0 / (nr - 1) as f64;
    for chart in 0..2 {
        for ir in 0..nr {
            for i in 0..na {
                for j in 0..na {
                    let x = [ir as f64 * hr, i as f64 * ha, j as f64 * ha];
                    let (u, v) = chart_point(chart, x);
                    let m = merit(f, strength, u, v);
                    grid_min = grid_min.min(m);
                    seeds.push((m, chart, x));
                }
            }
        }
    }

    // Lipschitz slack of the merit in chart coordinates (|u|, |v| ≤ 1).
    let mut lf = 0.0;
    let mut lj = 0.0;
    for (e, c) in f.terms() {
        let mu = (e[0] + e[1]) as f64;
        let nu = (e[2] + e[3]) as f64;
        let deg = mu + nu;
        let step = mu * hr / 2.0 + mu * ha / 2.0 + nu * ha / 2.0;
        lf += c.norm() * step;
        lj += 4.0 * c.norm() * deg * (deg - 1.0).max(1.0) * (hr / 2.0 + ha);
    }
    let slack = match strength {
        Strength::Weak => lf + lj,
        Strength::Strong => lj,
    };

    seeds.sort_by(|a, b| a.0.total_cmp(&b.0));
    let axis_tol = 1e-6;
    let mut witness: Option<(f64, Complex64, Complex64)> = None;
    for &(_, chart, x) in seeds.iter().take(cfg.search.refine_seeds) {
        let (xr, defect) = refine(f, strength, chart, x, cfg.search.newton_steps);
        let (u, v) = chart_point(chart, xr);
        let inside = (region.u_axis || u.norm() > axis_tol) && (region.v_axis || v.norm() > axis_tol) && (u.norm() > axis_tol || v.norm() > axis_tol);
        if inside && defect < cfg.tolerance.witness_defect && witness.is_none_or(|w| defect < w.0) {
            witness = Some((defect, u, v));
        }
    }
    let margin = grid_min - slack;
    let grid = 2 * nr * na * na;
    let mut c = if let Some((d, u, v)) = witness {
        Certificate::new(name, Status::Fail, margin, slack, grid)
            .with_witness(Witness::new("critical point (Re u, Im u, Re v, Im v)", vec![u.re, u.im, v.re, v.im], d))
    } else if margin > 0.0 {
        Certificate::new(name, Status::Pass, margin, slack, grid)
    } else {
        Certificate::new(name, Status::Inconclusive, margin, slack, grid).with_note("best-effort search; refine the seed grid")
    };
    c = c.with_tolerance("witness_defect", cfg.tolerance.witness_defect);
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> MixedPoly {
        s.parse().unwrap()
    }

    fn e(l: i64) -> TrigPoly {
        TrigPoly::monomial(l, Complex64::new(1.0, 0.0))
    }

    #[test]
    fn parse_and_display() {
        let f = p("u^2 - v^3*vb + (0.5+2i)*u*ub");
        assert_eq!(f.coeff([2, 0, 0, 0]), Complex64::new(1.0, 0.0));
        assert_eq!(f.coeff([0, 0, 3, 1]), Complex64::new(-1.0, 0.0));
        assert_eq!(f.coeff([1, 1, 0, 0]), Complex64::new(0.5, 2.0));
        assert_eq!(p(&f.to_string()), f);
        assert_eq!(p("2i u"), MixedPoly::monomial([1, 0, 0, 0], Complex64::new(0.0, 2.0)));
        assert!("u +".parse::<MixedPoly>().is_err());
    }

    #[test]
    fn newton_examples() {
        let nd = newton(&p("u^2 - v^2")).unwrap();
        assert_eq!(nd.vertices, vec![(0, 2), (2, 0)]);
        assert_eq!(nd.faces[0].weight, WeightVector::new(1, 1).unwrap());
        assert_eq!(nd.faces[0].degree, 2);
        assert!(nd.u_convenient && nd.v_convenient && nd.radially_weighted_homogeneous);

        let f = p("u^3 + u*v^2 + v^5");
        let nd = newton(&f).unwrap();
        assert_eq!(nd.vertices, vec![(0, 5), (1, 2), (3, 0)]);
        assert_eq!(nd.faces[0].weight, WeightVector::new(3, 1).unwrap());
        assert_eq!(nd.faces[1].weight, WeightVector::new(1, 1).unwrap());
        assert_eq!(face_function(&f, &nd.faces[0].weight), p("u*v^2 + v^5"));
        assert_eq!(face_function(&f, &nd.faces[1].weight), p("u*v^2 + u^3"));
        assert_eq!(vertex_function(&f, (1, 2)), p("u*v^2"));

        let nd = newton(&p("u*v")).unwrap();
        assert_eq!(nd.vertices, vec![(1, 1)]);
        assert!(nd.faces.is_empty());
    }

    #[test]
    fn loop_examples() {
        let g = LoopPoly::monic(vec![-&e(2), TrigPoly::zero()]);
        assert_eq!(from_loop(&g, 1).unwrap(), p("u^2 - v^2"));
        let f2 = from_loop(&g, 2).unwrap();
        assert_eq!(f2, p("u^2 - v^3*vb"));
        let back = g_polynomial(&f2, &WeightVector::new(2, 1).unwrap()).unwrap().to_loop_poly().unwrap();
        assert_eq!(back, g);

        let g = LoopPoly::monic(vec![TrigPoly::constant(Complex64::new(-1.0, 0.0))]);
        match from_loop(&g, 1) {
            Err(MixedError::InadmissibleK { j: 0, l: 0, min_even: Some(2), min_odd: None }) => {}
            other => panic!("{other:?}"),
        }
        assert_eq!(from_loop(&g, 2).unwrap(), p("u - v*vb"));
    }

    #[test]
    fn eval_and_gradient() {
        let f = p("u^2 - v^2");
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(f.eval(one, one), Complex64::new(0.0, 0.0));
        let g = f.gradient(one, one);
        assert_eq!(g, [Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(-2.0, 0.0), Complex64::new(0.0, 0.0)]);
        let i = Complex64::new(0.0, 1.0);
        assert_eq!(p("u*vb").eval(i, i), one);
    }

    #[test]
    fn symmetry_signs() {
        assert_eq!(p("u^2 - v^2").symmetry_sign(Tau::U), Some(1));
        assert_eq!(p("u^2 - v^3*vb").symmetry_sign(Tau::U), Some(1));
        assert_eq!(p("u^2 - v").symmetry_sign(Tau::U), None);
        assert_eq!(p("u*v").apply_symmetry(Tau::V), p("-u*v"));
    }

    #[test]
    fn multiply_by_axes() {
        assert_eq!(p("u^2 - v^2").multiply_by_u(), p("u^3 - u*v^2"));
        assert_eq!(p("1").multiply_by_v(), p("v"));
        assert!(MixedPoly::zero().multiply_by_u().is_zero());
    }

    #[test]
    fn glue_two_faces() {
        let hat = p("u^2 - v^3*vb");
        let tilde = p("u^3 + u^2");
        // (2,0) shared, but the second part has no compact face with a vertex
        // off the axis, so it is not a valid part.
        assert!(glue(&[hat.clone(), tilde]).is_err());
        let outer = p("u^2*v^4 - v^14*vb^4");
        let inner = p("u^3 - u^2*v^4");
        let f = glue(&[p("-u^2*v^4 + v^10*vb^4"), inner.clone()]).unwrap();
        assert_eq!(f, p("u^3 - u^2*v^4 + v^10*vb^4"));
        let nd = newton(&f).unwrap();
        assert_eq!(nd.faces.len(), 2);
        assert!(matches!(glue(&[outer, inner]), Err(MixedError::VertexMismatch(0, 1))));
        assert_eq!(glue(&[hat.clone()]).unwrap(), hat);
    }

    #[test]
    fn glue_products_faces() {
        let hat = p("-u^2*v^4 + v^10*vb^4");
        let tilde = p("u^3 - u^2*v^4");
        let f = glue_by_products(&[hat, tilde]).unwrap();
        let nd = newton(&f).unwrap();
        assert_eq!(nd.faces.len(), 2);
    }

    #[test]
    fn certificates_basic() {
        let cfg = Config::default();
        let c = check_inner_nondegenerate(&p("u^2 - v^2"), &cfg);
        assert!(c.is_pass(), "{c:?}");
        assert!(c.margin > 1.9);
        let c = check_strongly_inner_nondegenerate(&p("u^2 - v^2*vb^2"), &cfg);
        assert!(c.is_fail(), "{c:?}");
        assert!(check_inner_nondegenerate(&p("u^2 - v^2*vb^2"), &cfg).is_pass());
    }

    #[test]
    fn niceness() {
        let cfg = Config::default();
        assert!(is_nice(&p("u^3 - u^2*v^4 + v^10*vb^4"), &cfg).is_pass());
        assert!(is_nice(&p("u^2 - v^2"), &cfg).is_pass());
        // The middle vertex (1,1) carries uv + ūv̄ = 2|u||v|cos(φ+t).
        let f = p("u^4 + u*v + ub*vb + v^4");
        let c = is_nice(&f, &cfg);
        assert!(c.is_fail(), "{c:?}");
    }
}
