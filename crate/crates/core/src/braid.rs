//! Braid words and sampled geometric braids in `ℂ × [0, 2π]`.
//!
//! A [`GeometricBraid`] stores its strands on the uniform grid
//! `t_k = 2πk/n`, `k = 0..=n`. A strand that is identically zero is not sampled;
//! it is recorded by a flag so that the count of non-axis strands stays exact.

use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::roots::{greedy_match, min_pairwise};

/// One Artin generator `σ_i^{±1}` (1-based index).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Generator {
    pub index: usize,
    pub positive: bool,
}

impl Generator {
    pub fn pos(index: usize) -> Self {
        Generator { index, positive: true }
    }
    pub fn neg(index: usize) -> Self {
        Generator { index, positive: false }
    }
    pub fn inverse(self) -> Self {
        Generator { index: self.index, positive: !self.positive }
    }
    pub fn sign(self) -> i64 {
        if self.positive {
            1
        } else {
            -1
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum BraidError {
    #[error("cannot parse braid word: {0}")]
    Parse(String),
    #[error("generator s{index} out of range for {strands} strands")]
    IndexOutOfRange { index: usize, strands: usize },
    #[error("strands are not in generic position near t = {t:.6}; rotate all strands and retry")]
    NonGenericPosition { t: f64 },
    #[error("strands collide (minimum separation {min_sep:.3e})")]
    Collision { min_sep: f64 },
    #[error("strand {strand} does not close up: no start point within {tol:.1e} of its end point")]
    Unclosed { strand: usize, tol: f64 },
    #[error("consecutive samples move {motion:.3e}, more than a quarter of the separation {min_sep:.3e}")]
    Undersampled { motion: f64, min_sep: f64 },
    #[error("outer strands enter the tube of radius {tube:.3e} around the axis (closest approach {closest:.3e})")]
    Overlap { tube: f64, closest: f64 },
    #[error("strand samples have inconsistent lengths or too few samples")]
    BadSamples,
    #[error("symmetry detection needs an even number of grid intervals")]
    OddGrid,
    #[error("exponent must be nonzero")]
    ZeroPower,
}

/// A braid word on `strands` strands.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BraidWord {
    pub strands: usize,
    pub word: Vec<Generator>,
}

impl BraidWord {
    pub fn new(strands: usize, word: Vec<Generator>) -> Result<Self, BraidError> {
        if strands == 0 {
            return Err(BraidError::Parse("a braid needs at least one strand".into()));
        }
        for g in &word {
            if g.index == 0 || g.index >= strands {
                return Err(BraidError::IndexOutOfRange { index: g.index, strands });
            }
        }
        Ok(BraidWord { strands, word })
    }

    pub fn identity(strands: usize) -> Self {
        BraidWord { strands, word: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &BraidWord) -> BraidWord {
        assert_eq!(self.strands, other.strands, "strand counts differ");
        let mut word = self.word.clone();
        word.extend_from_slice(&other.word);
        BraidWord { strands: self.strands, word }
    }

    pub fn inverse(&self) -> BraidWord {
        BraidWord { strands: self.strands, word: self.word.iter().rev().map(|g| g.inverse()).collect() }
    }

    pub fn power(&self, p: i64) -> BraidWord {
        let base = if p < 0 { self.inverse() } else { self.clone() };
        let mut word = Vec::with_capacity(base.word.len() * p.unsigned_abs() as usize);
        for _ in 0..p.unsigned_abs() {
            word.extend_from_slice(&base.word);
        }
        BraidWord { strands: self.strands, word }
    }

    /// The same word read on `strands + extra` strands (new strands on the right).
    pub fn include(&self, extra: usize) -> BraidWord {
        BraidWord { strands: self.strands + extra, word: self.word.clone() }
    }

    /// `closure[i]` is the (0-based) end position of the strand starting at position `i`.
    pub fn closure_permutation(&self) -> Vec<usize> {
        let mut occupant: Vec<usize> = (0..self.strands).collect();
        for g in &self.word {
            occupant.swap(g.index - 1, g.index);
        }
        let mut end = vec![0; self.strands];
        for (pos, &strand) in occupant.iter().enumerate() {
            end[strand] = pos;
        }
        end
    }

    pub fn exponent_sum(&self) -> i64 {
        self.word.iter().map(|g| g.sign()).sum()
    }

    /// Signed crossing counts between closure components.
    pub fn linking_data(&self) -> LinkingData {
        let perm = self.closure_permutation();
        let comp = components(&perm);
        let ncomp = comp.iter().max().map_or(0, |m| m + 1);
        let mut matrix = vec![vec![0i64; ncomp]; ncomp];
        let mut occupant: Vec<usize> = (0..self.strands).collect();
        for g in &self.word {
            let a = comp[occupant[g.index - 1]];
            let b = comp[occupant[g.index]];
            matrix[a][b] += g.sign();
            if a != b {
                matrix[b][a] += g.sign();
            }
            occupant.swap(g.index - 1, g.index);
        }
        LinkingData::new(component_sizes(&comp, ncomp), matrix)
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s={}:", self.strands)?;
        for g in &self.word {
            if g.positive {
                write!(f, " s{}", g.index)?;
            } else {
                write!(f, " s{}^-1", g.index)?;
            }
        }
        Ok(())
    }
}

impl FromStr for BraidWord {
    type Err = BraidError;

    /// Parses `s=3: s1 s1 s2^-1`.
    fn from_str(text: &str) -> Result<Self, BraidError> {
        let (head, body) = text
            .split_once(':')
            .ok_or_else(|| BraidError::Parse(format!("missing ':' in {text:?}")))?;
        let strands: usize = head
            .trim()
            .strip_prefix("s=")
            .ok_or_else(|| BraidError::Parse(format!("expected s=<strands>, got {head:?}")))?
            .trim()
            .parse()
            .map_err(|_| BraidError::Parse(format!("bad strand count in {head:?}")))?;
        let mut word = Vec::new();
        for tok in body.split_whitespace() {
            let (base, positive) = match tok.strip_suffix("^-1") {
                Some(b) => (b, false),
                None => (tok, true),
            };
            let index: usize = base
                .strip_prefix('s')
                .and_then(|d| d.parse().ok())
                .ok_or_else(|| BraidError::Parse(format!("bad generator {tok:?}")))?;
            word.push(Generator { index, positive });
        }
        BraidWord::new(strands, word)
    }
}

/// `T^{2m}` on `s+1` strands, with `T = σ_s ⋯ σ_1 σ_1 ⋯ σ_s`.
pub fn torus_word(s: usize, m: usize) -> BraidWord {
    let mut t = Vec::with_capacity(2 * s);
    t.extend((1..=s).rev().map(Generator::pos));
    t.extend((1..=s).map(Generator::pos));
    BraidWord { strands: s + 1, word: t }.power(2 * m as i64)
}

fn components(perm: &[usize]) -> Vec<usize> {
    let mut comp = vec![usize::MAX; perm.len()];
    let mut next = 0;
    for start in 0..perm.len() {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut j = start;
        while comp[j] == usize::MAX {
            comp[j] = next;
            j = perm[j];
        }
        next += 1;
    }
    comp
}

fn component_sizes(comp: &[usize], ncomp: usize) -> Vec<usize> {
    let mut sizes = vec![0; ncomp];
    for &c in comp {
        sizes[c] += 1;
    }
    sizes
}

/// Closure components (by strand count) and signed crossing counts between
/// them. Off-diagonal entries are twice the linking numbers; diagonal entries
/// count signed self-crossings of a component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkingData {
    pub sizes: Vec<usize>,
    pub matrix: Vec<Vec<i64>>,
}

impl LinkingData {
    fn new(sizes: Vec<usize>, matrix: Vec<Vec<i64>>) -> Self {
        LinkingData { sizes, matrix }
    }

    /// Form that is independent of how components are numbered.
    pub fn canonical(&self) -> LinkingData {
        let n = self.sizes.len();
        if n > 8 {
            // Permutation search is too large; fall back to a sorted summary.
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&i| (self.sizes[i], self.matrix[i][i], self.matrix[i].iter().sum::<i64>()));
            return self.permuted(&order);
        }
        let mut best: Option<LinkingData> = None;
        let mut perm: Vec<usize> = (0..n).collect();
        permute_all(&mut perm, 0, &mut |p| {
            let cand = self.permuted(p);
            let better = match &best {
                None => true,
                Some(b) => (&cand.sizes, &cand.matrix) < (&b.sizes, &b.matrix),
            };
            if better {
                best = Some(cand);
            }
        });
        best.unwrap_or_else(|| self.clone())
    }

    fn permuted(&self, order: &[usize]) -> LinkingData {
        let sizes = order.iter().map(|&i| self.sizes[i]).collect();
        let matrix = order.iter().map(|&i| order.iter().map(|&j| self.matrix[i][j]).collect()).collect();
        LinkingData { sizes, matrix }
    }
}

fn permute_all(p: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute_all(p, k + 1, f);
        p.swap(k, i);
    }
}

/// Symmetries of a braid: `u`-even (`(u,t) ↦ (u,t+π)`) and `k`-symmetric
/// (`(u,t) ↦ (u e^{iπ/k}, t+π)`); `KSymmetric(1)` is called odd.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symmetry {
    UEven,
    KSymmetric(u32),
}

impl Symmetry {
    pub const ODD: Symmetry = Symmetry::KSymmetric(1);

    /// For a `2^K`-symmetry returns `K` (odd gives 0); `None` for `u`-even.
    pub fn two_power(self) -> Option<u32> {
        match self {
            Symmetry::UEven => None,
            Symmetry::KSymmetric(k) if k.is_power_of_two() => Some(k.trailing_zeros()),
            Symmetry::KSymmetric(_) => None,
        }
    }
}

impl fmt::Display for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symmetry::UEven => write!(f, "u-even"),
            Symmetry::KSymmetric(1) => write!(f, "odd"),
            Symmetry::KSymmetric(k) => write!(f, "k={k}"),
        }
    }
}

impl FromStr for Symmetry {
    type Err = BraidError;
    fn from_str(s: &str) -> Result<Self, BraidError> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "u-even" | "u_even" | "ueven" => Ok(Symmetry::UEven),
            "odd" => Ok(Symmetry::ODD),
            _ => {
                let num = s
                    .strip_prefix("k=")
                    .or_else(|| s.strip_prefix("k"))
                    .ok_or_else(|| BraidError::Parse(format!("unknown symmetry {s:?}")))?;
                let k: u32 = num.parse().map_err(|_| BraidError::Parse(format!("unknown symmetry {s:?}")))?;
                if k == 0 {
                    return Err(BraidError::Parse("k must be positive".into()));
                }
                Ok(Symmetry::KSymmetric(k))
            }
        }
    }
}

impl Serialize for Symmetry {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Symmetry {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Outcome of testing one symmetry candidate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryCheck {
    pub symmetry: Symmetry,
    pub max_distance: f64,
    pub present: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub detected: Vec<Symmetry>,
    pub divisor_symmetric: bool,
    pub nonzero_strands: usize,
    pub tolerance: f64,
    pub checks: Vec<SymmetryCheck>,
}

impl SymmetryReport {
    pub fn contains(&self, s: Symmetry) -> bool {
        self.detected.contains(&s)
    }
}

/// Sampled closed braid.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricBraid {
    strands: Vec<Vec<Complex64>>,
    zero_strand: bool,
    closure: Vec<usize>,
    min_sep: f64,
}

impl GeometricBraid {
    /// Builds a braid from samples `strands[j][k]`, `k = 0..=n`, checking
    /// closure, separation and sampling density.
    pub fn new(strands: Vec<Vec<Complex64>>, zero_strand: bool, endpoint_tol: f64) -> Result<Self, BraidError> {
        let b = GeometricBraid::assemble(strands, zero_strand, endpoint_tol)?;
        let motion = b.max_motion();
        if motion >= b.min_sep / 4.0 {
            return Err(BraidError::Undersampled { motion, min_sep: b.min_sep });
        }
        Ok(b)
    }

    fn assemble(strands: Vec<Vec<Complex64>>, zero_strand: bool, endpoint_tol: f64) -> Result<Self, BraidError> {
        let len = strands.first().map_or(3, |s| s.len());
        if len < 3 || strands.iter().any(|s| s.len() != len) {
            return Err(BraidError::BadSamples);
        }
        let n = len - 1;
        let mut closure = vec![0; strands.len()];
        for (j, s) in strands.iter().enumerate() {
            let end = s[n];
            let (i, d) = strands
                .iter()
                .enumerate()
                .map(|(i, o)| (i, (o[0] - end).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty");
            if d > endpoint_tol {
                return Err(BraidError::Unclosed { strand: j, tol: endpoint_tol });
            }
            closure[j] = i;
        }
        let mut seen = vec![false; closure.len()];
        for &c in &closure {
            if seen[c] {
                return Err(BraidError::Collision { min_sep: 0.0 });
            }
            seen[c] = true;
        }
        let mut b = GeometricBraid { strands, zero_strand, closure, min_sep: f64::INFINITY };
        let mut min_sep = f64::INFINITY;
        for k in 0..=n {
            min_sep = min_sep.min(min_pairwise(&b.points_at(k)));
        }
        if min_sep.is_nan() || min_sep <= 0.0 {
            return Err(BraidError::Collision { min_sep });
        }
        b.min_sep = min_sep;
        Ok(b)
    }

    /// Wraps tracked root paths; the separation is recomputed from the samples.
    pub(crate) fn from_paths(strands: Vec<Vec<Complex64>>, zero_strand: bool, closure: Vec<usize>) -> Self {
        let mut b = GeometricBraid { strands, zero_strand, closure, min_sep: 0.0 };
        b.recompute_sep();
        b
    }

    /// The braid with no strands at all.
    pub fn empty(samples: usize) -> Self {
        let _ = samples;
        GeometricBraid { strands: Vec::new(), zero_strand: false, closure: Vec::new(), min_sep: f64::INFINITY }
    }

    /// Only the constant strand at 0.
    pub fn zero_only() -> Self {
        GeometricBraid { strands: Vec::new(), zero_strand: true, closure: Vec::new(), min_sep: f64::INFINITY }
    }

    /// Grid intervals `n` (samples are `k = 0..=n`). Braids without sampled
    /// strands report 0.
    pub fn samples(&self) -> usize {
        self.strands.first().map_or(0, |s| s.len() - 1)
    }

    pub fn t(&self, k: usize) -> f64 {
        TAU * k as f64 / self.samples() as f64
    }

    /// Sampled (non-axis) strands.
    pub fn strands(&self) -> &[Vec<Complex64>] {
        &self.strands
    }

    pub fn has_zero_strand(&self) -> bool {
        self.zero_strand
    }

    /// Total strand count `s`, including the axis strand.
    pub fn strand_count(&self) -> usize {
        self.strands.len() + usize::from(self.zero_strand)
    }

    /// Count `s̃` of strands that are not identically zero.
    pub fn nonzero_count(&self) -> usize {
        self.strands.len()
    }

    pub fn closure(&self) -> &[usize] {
        &self.closure
    }

    pub fn min_sep(&self) -> f64 {
        self.min_sep
    }

    /// All strand positions at grid index `k`, the axis strand last.
    pub fn points_at(&self, k: usize) -> Vec<Complex64> {
        let mut p: Vec<Complex64> = self.strands.iter().map(|s| s[k]).collect();
        if self.zero_strand {
            p.push(Complex64::new(0.0, 0.0));
        }
        p
    }

    pub fn max_modulus(&self) -> f64 {
        self.strands.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_modulus(&self) -> f64 {
        if self.zero_strand {
            return 0.0;
        }
        self.strands.iter().flatten().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
    }

    /// Largest distance travelled by a strand between consecutive samples.
    pub fn max_motion(&self) -> f64 {
        self.strands
            .iter()
            .flat_map(|s| s.windows(2).map(|w| (w[1] - w[0]).norm()))
            .fold(0.0, f64::max)
    }

    /// Matching tolerance for symmetry detection: a quarter of the separation,
    /// or a small multiple of the braid's size when there is a single point.
    pub fn symmetry_tolerance(&self) -> f64 {
        if self.min_sep.is_finite() {
            self.min_sep / 4.0
        } else {
            1e-6 * self.max_modulus().max(1.0)
        }
    }

    fn map_strands(&self, f: impl Fn(Complex64) -> Complex64) -> GeometricBraid {
        let strands: Vec<Vec<Complex64>> = self.strands.iter().map(|s| s.iter().map(|&z| f(z)).collect()).collect();
        let mut b = GeometricBraid { strands, zero_strand: self.zero_strand, closure: self.closure.clone(), min_sep: 0.0 };
        b.recompute_sep();
        b
    }

    fn recompute_sep(&mut self) {
        let n = self.samples();
        let mut m = f64::INFINITY;
        if !self.strands.is_empty() {
            for k in 0..=n {
                m = m.min(min_pairwise(&self.points_at(k)));
            }
        }
        self.min_sep = m;
    }

    pub fn scale(&self, eps: f64) -> GeometricBraid {
        self.map_strands(|z| z * eps)
    }

    /// Rotates every strand by the constant angle `theta` (an isotopy).
    pub fn rotate(&self, theta: f64) -> GeometricBraid {
        let r = Complex64::from_polar(1.0, theta);
        self.map_strands(|z| z * r)
    }

    /// Multiplies strand values at `t_k` by `e^{i·w·t_k}`.
    pub fn twist(&self, w: i64) -> GeometricBraid {
        let n = self.samples();
        let strands = self
            .strands
            .iter()
            .map(|s| s.iter().enumerate().map(|(k, &z)| z * Complex64::from_polar(1.0, w as f64 * TAU * k as f64 / n as f64)).collect())
            .collect();
        let mut b = GeometricBraid { strands, zero_strand: self.zero_strand, closure: self.closure.clone(), min_sep: 0.0 };
        b.recompute_sep();
        b
    }

    /// Linear resampling onto `m` grid intervals.
    pub fn resample(&self, m: usize) -> GeometricBraid {
        let n = self.samples();
        if n == m || self.strands.is_empty() {
            return self.clone();
        }
        let strands = self
            .strands
            .iter()
            .map(|s| {
                (0..=m)
                    .map(|k| {
                        let x = k as f64 * n as f64 / m as f64;
                        let i = (x.floor() as usize).min(n - 1);
                        let f = x - i as f64;
                        s[i] * (1.0 - f) + s[i + 1] * f
                    })
                    .collect()
            })
            .collect();
        let mut b = GeometricBraid { strands, zero_strand: self.zero_strand, closure: self.closure.clone(), min_sep: 0.0 };
        b.recompute_sep();
        b
    }

    /// Geometric realization of a word: strands start on the real segment
    /// `[-1, 1]` and each generator swaps two neighbours along a half circle
    /// during an equal share of `[0, 2π]`. The grid starts at `samples` and is
    /// doubled until consecutive samples move less than a quarter of the
    /// strand separation.
    pub fn from_word(w: &BraidWord, samples: usize) -> GeometricBraid {
        let s = w.strands;
        let x: Vec<f64> = if s == 1 { vec![1.0] } else { (0..s).map(|p| -1.0 + 2.0 * p as f64 / (s - 1) as f64).collect() };
        // occupants[g][p]: strand at position p before generator g.
        let mut occupants = vec![(0..s).collect::<Vec<usize>>()];
        for g in &w.word {
            let mut next = occupants.last().expect("nonempty").clone();
            next.swap(g.index - 1, g.index);
            occupants.push(next);
        }
        let len = w.word.len();
        let position = |t: f64| -> Vec<Complex64> {
            let mut out = vec![Complex64::new(0.0, 0.0); s];
            if len == 0 {
                for p in 0..s {
                    out[p] = Complex64::new(x[p], 0.0);
                }
                return out;
            }
            let u = t / TAU * len as f64;
            let g = (u.floor() as usize).min(len - 1);
            let tau = (u - g as f64).clamp(0.0, 1.0);
            let occ = &occupants[g];
            for p in 0..s {
                out[occ[p]] = Complex64::new(x[p], 0.0);
            }
            let gen = w.word[g];
            let (l, r) = (gen.index - 1, gen.index);
            let centre = (x[l] + x[r]) / 2.0;
            let radius = (x[r] - x[l]) / 2.0;
            let theta = if gen.positive { PI * tau } else { -PI * tau };
            out[occ[l]] = Complex64::new(centre, 0.0) + Complex64::from_polar(radius, PI + theta);
            out[occ[r]] = Complex64::new(centre, 0.0) + Complex64::from_polar(radius, theta);
            out
        };
        let mut n = samples.max(4);
        loop {
            let mut strands = vec![Vec::with_capacity(n + 1); s];
            for k in 0..=n {
                let pts = position(TAU * k as f64 / n as f64);
                for j in 0..s {
                    strands[j].push(pts[j]);
                }
            }
            let b = GeometricBraid::assemble(strands, false, 1e-9).expect("word realization is a valid braid");
            if b.max_motion() < b.min_sep / 4.0 || n >= (1 << 22) {
                return b;
            }
            n *= 2;
        }
    }

    /// Reads off a braid word from real-part order changes. Strands are ordered
    /// by real part at `t = 0`; a crossing between positions `p` and `p+1` is
    /// positive when the strand coming from the left passes with the smaller
    /// imaginary part.
    pub fn to_word(&self) -> Result<BraidWord, BraidError> {
        let mut paths: Vec<Vec<Complex64>> = self.strands.clone();
        let n = self.samples();
        if self.zero_strand {
            paths.push(vec![Complex64::new(0.0, 0.0); n.max(1) + 1]);
        }
        let s = paths.len();
        if s == 0 {
            return Err(BraidError::BadSamples);
        }
        if n == 0 {
            return Ok(BraidWord::identity(s));
        }
        let scale = self.max_modulus().max(1.0);
        let tie = 1e-12 * scale;
        let mut order: Vec<usize> = (0..s).collect();
        order.sort_by(|&a, &b| paths[a][0].re.total_cmp(&paths[b][0].re));
        for w in order.windows(2) {
            if (paths[w[1]][0].re - paths[w[0]][0].re).abs() <= tie {
                return Err(BraidError::NonGenericPosition { t: 0.0 });
            }
        }
        let mut pos_of = vec![0; s];
        for (p, &j) in order.iter().enumerate() {
            pos_of[j] = p;
        }
        let mut word = Vec::new();
        for k in 0..n {
            let t = TAU * k as f64 / n as f64;
            // Collect order flips in this interval with interpolated times.
            let mut events: Vec<(f64, usize, usize)> = Vec::new();
            for a in 0..s {
                for b in (a + 1)..s {
                    let d0 = paths[a][k].re - paths[b][k].re;
                    let d1 = paths[a][k + 1].re - paths[b][k + 1].re;
                    let before = (pos_of[a] < pos_of[b]) as i8;
                    let after = if d1.abs() <= tie {
                        // Exactly aligned at the right end: defer to the next interval.
                        before
                    } else {
                        (d1 < 0.0) as i8
                    };
                    if before != after {
                        let tau = if (d0 - d1).abs() > 0.0 { (d0 / (d0 - d1)).clamp(0.0, 1.0) } else { 0.5 };
                        events.push((tau, a, b));
                    }
                }
            }
            events.sort_by(|x, y| x.0.total_cmp(&y.0));
            for i in 1..events.len() {
                let (ta, a1, b1) = events[i - 1];
                let (tb, a2, b2) = events[i];
                let share = a1 == a2 || a1 == b2 || b1 == a2 || b1 == b2;
                if share && (tb - ta).abs() < 1e-9 {
                    return Err(BraidError::NonGenericPosition { t });
                }
            }
            for (tau, a, b) in events {
                let (pa, pb) = (pos_of[a], pos_of[b]);
                if pa.abs_diff(pb) != 1 {
                    return Err(BraidError::NonGenericPosition { t });
                }
                let (left, right) = if pa < pb { (a, b) } else { (b, a) };
                let im = |j: usize| paths[j][k].im * (1.0 - tau) + paths[j][k + 1].im * tau;
                let gap = im(right) - im(left);
                if gap.abs() <= tie {
                    return Err(BraidError::NonGenericPosition { t });
                }
                let p = pa.min(pb);
                word.push(Generator { index: p + 1, positive: gap > 0.0 });
                order.swap(p, p + 1);
                pos_of[order[p]] = p;
                pos_of[order[p + 1]] = p + 1;
            }
        }
        BraidWord::new(s, word)
    }

    /// [`GeometricBraid::to_word`], rotating the whole braid by a few fixed
    /// angles when the first attempt hits a non-generic configuration.
    pub fn to_word_generic(&self) -> Result<BraidWord, BraidError> {
        let mut last = None;
        for theta in [0.0, 0.3141, 0.7, 1.1, 2.2, 2.9] {
            match self.rotate(theta).to_word() {
                Ok(w) => return Ok(w),
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    /// Components and signed crossing counts, computed from the winding of
    /// pairwise differences `u_i − u_j` (axis strand included).
    pub fn linking_data(&self) -> LinkingData {
        let n = self.samples();
        let mut paths: Vec<Vec<Complex64>> = self.strands.clone();
        let mut perm = self.closure.clone();
        if self.zero_strand {
            paths.push(vec![Complex64::new(0.0, 0.0); n.max(1) + 1]);
            perm.push(perm.len());
        }
        let comp = components(&perm);
        let ncomp = comp.iter().max().map_or(0, |m| m + 1);
        let mut total = vec![vec![0.0f64; ncomp]; ncomp];
        for i in 0..paths.len() {
            for j in (i + 1)..paths.len() {
                let mut w = 0.0;
                for k in 0..n {
                    let a = paths[i][k] - paths[j][k];
                    let b = paths[i][k + 1] - paths[j][k + 1];
                    w += (b / a).arg();
                }
                let (ci, cj) = (comp[i], comp[j]);
                total[ci][cj] += w;
                if ci != cj {
                    total[cj][ci] += w;
                }
            }
        }
        let matrix = total.iter().map(|row| row.iter().map(|w| (w / PI).round() as i64).collect()).collect();
        LinkingData::new(component_sizes(&comp, ncomp), matrix)
    }

    /// Applies `(u, t) ↦ (rot·u, t + π)`, relabelling strands through the
    /// closure permutation so that paths stay continuous.
    fn half_period_shift(&self, rot: Complex64) -> Result<GeometricBraid, BraidError> {
        let n = self.samples();
        if self.strands.is_empty() {
            return Ok(self.clone());
        }
        if n % 2 != 0 {
            return Err(BraidError::OddGrid);
        }
        let h = n / 2;
        let strands = (0..self.strands.len())
            .map(|j| {
                (0..=n)
                    .map(|k| {
                        let z = if k <= h { self.strands[j][k + h] } else { self.strands[self.closure[j]][k - h] };
                        z * rot
                    })
                    .collect()
            })
            .collect();
        let mut b = GeometricBraid { strands, zero_strand: self.zero_strand, closure: self.closure.clone(), min_sep: 0.0 };
        b.recompute_sep();
        Ok(b)
    }

    pub fn symmetry_transform(&self, s: Symmetry) -> Result<GeometricBraid, BraidError> {
        match s {
            Symmetry::UEven => self.half_period_shift(Complex64::new(1.0, 0.0)),
            Symmetry::KSymmetric(k) => self.half_period_shift(Complex64::from_polar(1.0, PI / k as f64)),
        }
    }

    /// Largest, over grid times, Hausdorff distance between the point sets of
    /// `self` and `other` (same grid assumed).
    pub fn set_distance(&self, other: &GeometricBraid) -> f64 {
        let n = self.samples().max(other.samples());
        let mut worst: f64 = 0.0;
        for k in 0..=n {
            let a = if self.samples() == 0 { self.points_at(0) } else { self.points_at(k) };
            let b = if other.samples() == 0 { other.points_at(0) } else { other.points_at(k) };
            if a.len() != b.len() {
                return f64::INFINITY;
            }
            let (_, d) = greedy_match(&a, &b);
            worst = worst.max(d);
        }
        worst
    }

    pub fn detect_symmetry(&self) -> Result<SymmetryReport, BraidError> {
        let tol = self.symmetry_tolerance();
        let st = self.nonzero_count();
        let mut candidates = vec![Symmetry::UEven, Symmetry::ODD];
        let mut k = 2u32;
        while (k as usize) <= st {
            candidates.push(Symmetry::KSymmetric(k));
            k *= 2;
        }
        let mut checks = Vec::new();
        for c in candidates {
            let d = self.set_distance(&self.symmetry_transform(c)?);
            checks.push(SymmetryCheck { symmetry: c, max_distance: d, present: d < tol });
        }
        let detected: Vec<Symmetry> = checks.iter().filter(|c| c.present).map(|c| c.symmetry).collect();
        let divisor_symmetric = detected.iter().any(|s| match s {
            Symmetry::KSymmetric(k) => k.is_power_of_two() && st % (*k as usize) == 0,
            Symmetry::UEven => false,
        });
        Ok(SymmetryReport { detected, divisor_symmetric, nonzero_strands: st, tolerance: tol, checks })
    }

    /// `B^p` through the reparametrization `t ↦ p·t`; the grid grows by `|p|`
    /// so that the sampling density is preserved.
    pub fn power(&self, p: i64) -> Result<GeometricBraid, BraidError> {
        if p == 0 {
            return Err(BraidError::ZeroPower);
        }
        if self.strands.is_empty() {
            return Ok(self.clone());
        }
        let n = self.samples();
        let m = self.strands.len();
        let reps = p.unsigned_abs() as usize;
        // Inverse closure for reversed traversal.
        let mut inv = vec![0; m];
        for (j, &c) in self.closure.iter().enumerate() {
            inv[c] = j;
        }
        let (step_perm, base): (Vec<usize>, Vec<Vec<Complex64>>) = if p > 0 {
            (self.closure.clone(), self.strands.clone())
        } else {
            // B^{-1}: strand j at time t is strand inv[j] of B at 2π − t.
            let rev = (0..m).map(|j| self.strands[inv[j]].iter().rev().copied().collect()).collect();
            (inv.clone(), rev)
        };
        let strands = (0..m)
            .map(|j| {
                let mut path = Vec::with_capacity(n * reps + 1);
                let mut label = j;
                for c in 0..reps {
                    let seg = &base[label];
                    let start = if c == 0 { 0 } else { 1 };
                    path.extend_from_slice(&seg[start..]);
                    label = step_perm[label];
                }
                path
            })
            .collect();
        let closure = (0..m)
            .map(|j| {
                let mut l = j;
                for _ in 0..reps {
                    l = step_perm[l];
                }
                l
            })
            .collect();
        Ok(GeometricBraid { strands, zero_strand: self.zero_strand, closure, min_sep: self.min_sep })
    }

    /// Annular nesting: `ε·inner` placed inside the hole of `outer`.
    pub fn nest(inner: &GeometricBraid, outer: &GeometricBraid, eps: Option<f64>) -> Result<GeometricBraid, BraidError> {
        if outer.zero_strand {
            return Err(BraidError::Overlap { tube: 0.0, closest: 0.0 });
        }
        let inner_max = inner.max_modulus();
        let outer_min = outer.min_modulus();
        let eps = eps.unwrap_or_else(|| if inner_max > 0.0 && outer_min.is_finite() { outer_min / (4.0 * inner_max) } else { 1.0 });
        if outer_min.is_finite() && outer_min <= 2.0 * eps * inner_max {
            return Err(BraidError::Overlap { tube: 2.0 * eps * inner_max, closest: outer_min });
        }
        let n = inner.samples().max(outer.samples());
        let a = inner.resample(n).scale(eps);
        let b = outer.resample(n);
        let mut strands = a.strands.clone();
        let mut closure = a.closure.clone();
        let off = strands.len();
        strands.extend(b.strands.iter().cloned());
        closure.extend(b.closure.iter().map(|c| c + off));
        let mut out = GeometricBraid { strands, zero_strand: inner.zero_strand, closure, min_sep: 0.0 };
        out.recompute_sep();
        Ok(out)
    }

    /// Right-fold nesting `B(B_1, B(B_2, …, B_N))`.
    pub fn nest_all(braids: &[GeometricBraid]) -> Result<GeometricBraid, BraidError> {
        let mut it = braids.iter().rev();
        let mut acc = match it.next() {
            Some(b) => b.clone(),
            None => return Ok(GeometricBraid::empty(0)),
        };
        for b in it {
            acc = GeometricBraid::nest(b, &acc, None)?;
        }
        Ok(acc)
    }

    /// CSV with columns `t,strand_id,re,im`; the axis strand is written as zeros.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,strand_id,re,im\n");
        let n = self.samples();
        for (j, s) in self.strands.iter().enumerate() {
            for (k, z) in s.iter().enumerate() {
                out.push_str(&format!("{:.17e},{},{:.17e},{:.17e}\n", TAU * k as f64 / n as f64, j, z.re, z.im));
            }
        }
        if self.zero_strand {
            for k in 0..=n.max(1) {
                out.push_str(&format!("{:.17e},{},0,0\n", TAU * k as f64 / n.max(1) as f64, self.strands.len()));
            }
        }
        out
    }

    /// Parses the CSV written by [`GeometricBraid::to_csv`]. A strand whose
    /// samples are all exactly zero becomes the axis strand.
    pub fn from_csv(text: &str, endpoint_tol: f64) -> Result<GeometricBraid, BraidError> {
        let mut rows: Vec<(usize, f64, Complex64)> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || (ln == 0 && line.starts_with('t')) {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 4 {
                return Err(BraidError::Parse(format!("line {}: expected 4 columns", ln + 1)));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| BraidError::Parse(format!("line {}: bad number {s:?}", ln + 1)));
            let id: usize = f[1].parse().map_err(|_| BraidError::Parse(format!("line {}: bad strand id", ln + 1)))?;
            rows.push((id, num(f[0])?, Complex64::new(num(f[2])?, num(f[3])?)));
        }
        let ids: BTreeSet<usize> = rows.iter().map(|r| r.0).collect();
        let mut strands = Vec::new();
        let mut zero = false;
        for id in ids {
            let mut pts: Vec<(f64, Complex64)> = rows.iter().filter(|r| r.0 == id).map(|r| (r.1, r.2)).collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            if pts.iter().all(|p| p.1 == Complex64::new(0.0, 0.0)) {
                if zero {
                    return Err(BraidError::Collision { min_sep: 0.0 });
                }
                zero = true;
                continue;
            }
            let n = pts.len() - 1;
            for (k, p) in pts.iter().enumerate() {
                if n == 0 || (p.0 - TAU * k as f64 / n as f64).abs() > 1e-6 {
                    return Err(BraidError::Parse(format!("strand {id}: samples are not the uniform grid on [0, 2pi]")));
                }
            }
            strands.push(pts.into_iter().map(|p| p.1).collect());
        }
        if strands.is_empty() {
            return if zero { Ok(GeometricBraid::zero_only()) } else { Err(BraidError::BadSamples) };
        }
        GeometricBraid::new(strands, zero, endpoint_tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let w: BraidWord = "s=3: s1 s1 s2^-1".parse().unwrap();
        assert_eq!(w.word, vec![Generator::pos(1), Generator::pos(1), Generator::neg(2)]);
        assert_eq!(w.to_string(), "s=3: s1 s1 s2^-1");
        assert!("s=2: s2".parse::<BraidWord>().is_err());
        assert!("s1 s2".parse::<BraidWord>().is_err());
    }

    #[test]
    fn torus_words() {
        assert_eq!(torus_word(1, 1), "s=2: s1 s1 s1 s1".parse().unwrap());
        assert_eq!(torus_word(2, 1), "s=3: s2 s1 s1 s2 s2 s1 s1 s2".parse().unwrap());
        assert_eq!(torus_word(1, 2).len(), 8);
    }

    #[test]
    fn closure_permutations() {
        let w: BraidWord = "s=3: s1 s2".parse().unwrap();
        // strand 0 -> pos 1 -> pos 2; strand 1 -> pos 0; strand 2 -> pos 1.
        assert_eq!(w.closure_permutation(), vec![2, 0, 1]);
    }

    #[test]
    fn half_twist_is_square_root() {
        let b = GeometricBraid::from_word(&"s=2: s1".parse().unwrap(), 1024);
        for k in [0usize, 100, 517, 1024] {
            let t = b.t(k);
            let e = Complex64::from_polar(1.0, t / 2.0);
            let pts = b.points_at(k);
            assert!(pts.iter().any(|z| (z - e).norm() < 1e-12));
            assert!(pts.iter().any(|z| (z + e).norm() < 1e-12));
        }
        assert_eq!(b.closure(), &[1, 0]);
    }

    #[test]
    fn symbol_names() {
        assert_eq!("odd".parse::<Symmetry>().unwrap(), Symmetry::ODD);
        assert_eq!("k=4".parse::<Symmetry>().unwrap(), Symmetry::KSymmetric(4));
        assert_eq!(Symmetry::KSymmetric(2).to_string(), "k=2");
        assert_eq!(Symmetry::KSymmetric(4).two_power(), Some(2));
    }
}
