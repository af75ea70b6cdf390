//! Finite Fourier series `t ↦ Σ c_ℓ e^{iℓt}` with complex coefficients.
//!
//! These are the coefficients of loops of polynomials. Storage is sparse and
//! keyed by the signed frequency; coefficients below [`DROP_TOL`] relative to
//! the largest one are discarded on construction.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

/// Relative drop tolerance applied after every construction.
pub const DROP_TOL: f64 = 1e-13;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "TrigPolyRepr", into = "TrigPolyRepr")]
pub struct TrigPoly {
    coeffs: BTreeMap<i64, Complex64>,
}

#[derive(Serialize, Deserialize)]
struct TrigPolyRepr {
    freqs: Vec<(i64, f64, f64)>,
}

impl From<TrigPolyRepr> for TrigPoly {
    fn from(r: TrigPolyRepr) -> Self {
        TrigPoly::from_pairs(r.freqs.into_iter().map(|(l, re, im)| (l, Complex64::new(re, im))))
    }
}

impl From<TrigPoly> for TrigPolyRepr {
    fn from(p: TrigPoly) -> Self {
        TrigPolyRepr { freqs: p.coeffs.iter().map(|(&l, c)| (l, c.re, c.im)).collect() }
    }
}

/// Classification of the stored frequencies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrequencyParity {
    AllEven,
    AllOdd,
    Zero,
    Mixed,
}

/// Which frequencies a projection may keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParityConstraint {
    Any,
    Even,
    Odd,
}

impl ParityConstraint {
    pub fn allows(self, freq: i64) -> bool {
        match self {
            ParityConstraint::Any => true,
            ParityConstraint::Even => freq.rem_euclid(2) == 0,
            ParityConstraint::Odd => freq.rem_euclid(2) == 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ApproxError {
    #[error("projection residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualTooLarge { residual: f64, tol: f64 },
    #[error("{samples} samples cannot resolve frequencies up to {max_freq}; need more than 2*max_freq+1")]
    GridTooCoarse { samples: usize, max_freq: usize },
    #[error("samples are not uniformly spaced on [0, 2pi)")]
    NonUniformGrid,
}

/// Output of a projection: the polynomial and its sup-residual on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Approximation {
    pub poly: TrigPoly,
    pub residual: f64,
}

impl TrigPoly {
    pub fn zero() -> Self {
        TrigPoly::default()
    }

    pub fn constant(c: Complex64) -> Self {
        TrigPoly::monomial(0, c)
    }

    pub fn one() -> Self {
        TrigPoly::constant(Complex64::new(1.0, 0.0))
    }

    /// `c·e^{iℓt}`.
    pub fn monomial(freq: i64, c: Complex64) -> Self {
        TrigPoly::from_pairs([(freq, c)])
    }

    /// Builds from (frequency, coefficient) pairs, summing repeated frequencies.
    pub fn from_pairs<I: IntoIterator<Item = (i64, Complex64)>>(pairs: I) -> Self {
        let mut coeffs = BTreeMap::new();
        for (l, c) in pairs {
            *coeffs.entry(l).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        let mut p = TrigPoly { coeffs };
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        let max = self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max);
        let cut = DROP_TOL * max;
        self.coeffs.retain(|_, c| c.norm() > cut && c.norm() > 0.0);
    }

    /// Zeroes real and imaginary parts of modulus at most `abs`, then drops
    /// vanished coefficients.
    pub fn chop(&self, abs: f64) -> TrigPoly {
        let part = |x: f64| if x.abs() > abs { x } else { 0.0 };
        TrigPoly {
            coeffs: self
                .coeffs
                .iter()
                .map(|(&l, &c)| (l, Complex64::new(part(c.re), part(c.im))))
                .filter(|(_, c)| c.norm() > 0.0)
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, freq: i64) -> Complex64 {
        self.coeffs.get(&freq).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&l, &c)| (l, c))
    }

    pub fn frequencies(&self) -> impl Iterator<Item = i64> + '_ {
        self.coeffs.keys().copied()
    }

    /// Largest `|ℓ|` among stored frequencies (0 for the zero series).
    pub fn max_abs_freq(&self) -> u64 {
        self.coeffs.keys().map(|l| l.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(&l, &c)| c * Complex64::from_polar(1.0, l as f64 * t))
            .sum()
    }

    pub fn derivative(&self) -> TrigPoly {
        TrigPoly::from_pairs(
            self.coeffs
                .iter()
                .filter(|(&l, _)| l != 0)
                .map(|(&l, &c)| (l, c * Complex64::new(0.0, l as f64))),
        )
    }

    pub fn scale(&self, s: Complex64) -> TrigPoly {
        TrigPoly::from_pairs(self.coeffs.iter().map(|(&l, &c)| (l, c * s)))
    }

    /// Multiplies by `e^{idt}`.
    pub fn shift(&self, d: i64) -> TrigPoly {
        TrigPoly { coeffs: self.coeffs.iter().map(|(&l, &c)| (l + d, c)).collect() }
    }

    /// Reparametrizes `t ↦ p·t`, sending every frequency ℓ to pℓ.
    pub fn substitute_power(&self, p: i64) -> TrigPoly {
        if p == 0 {
            return TrigPoly::constant(self.coeffs.values().sum());
        }
        TrigPoly { coeffs: self.coeffs.iter().map(|(&l, &c)| (l * p, c)).collect() }
    }

    /// `Σ|c_ℓ|`, an upper bound for `sup|p|`.
    pub fn coeff_sum(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    /// `Σ|c_ℓ||ℓ|`, an upper bound for `sup|p'|` and hence a Lipschitz constant.
    pub fn lipschitz(&self) -> f64 {
        self.coeffs.iter().map(|(&l, c)| c.norm() * l.unsigned_abs() as f64).sum()
    }

    /// `Σ|c_ℓ|ℓ²`, an upper bound for `sup|p''|`.
    pub fn second_derivative_bound(&self) -> f64 {
        self.coeffs.iter().map(|(&l, c)| c.norm() * (l * l) as f64).sum()
    }

    pub fn c1_norm(&self) -> f64 {
        self.coeffs.iter().map(|(&l, c)| c.norm() * (1.0 + l.unsigned_abs() as f64)).sum()
    }

    pub fn frequency_parity(&self) -> FrequencyParity {
        let mut even = false;
        let mut odd = false;
        for &l in self.coeffs.keys() {
            if l.rem_euclid(2) == 0 {
                even = true;
            } else {
                odd = true;
            }
        }
        match (even, odd) {
            (false, false) => FrequencyParity::Zero,
            (true, false) => FrequencyParity::AllEven,
            (false, true) => FrequencyParity::AllOdd,
            (true, true) => FrequencyParity::Mixed,
        }
    }

    /// Largest coefficient-wise difference `max_ℓ |p_ℓ − q_ℓ|`.
    pub fn max_coeff_diff(&self, other: &TrigPoly) -> f64 {
        let mut m: f64 = 0.0;
        for (&l, &c) in &self.coeffs {
            m = m.max((c - other.coeff(l)).norm());
        }
        for (&l, &c) in &other.coeffs {
            if !self.coeffs.contains_key(&l) {
                m = m.max(c.norm());
            }
        }
        m
    }

    /// Projects uniformly spaced samples `t_k = 2πk/n`, `k = 0..n`, onto the
    /// frequencies `|ℓ| ≤ max_freq` allowed by `parity`.
    pub fn approximate_uniform(
        values: &[Complex64],
        parity: ParityConstraint,
        max_freq: usize,
        tol: f64,
    ) -> Result<Approximation, ApproxError> {
        let n = values.len();
        if n <= 2 * max_freq + 1 {
            return Err(ApproxError::GridTooCoarse { samples: n, max_freq });
        }
        let mut planner = FftPlanner::<f64>::new();
        let mut spec = values.to_vec();
        planner.plan_fft_forward(n).process(&mut spec);
        let scale = 1.0 / n as f64;

        let mut kept = vec![Complex64::new(0.0, 0.0); n];
        let mut pairs = Vec::new();
        for l in -(max_freq as i64)..=(max_freq as i64) {
            if !parity.allows(l) {
                continue;
            }
            let idx = l.rem_euclid(n as i64) as usize;
            let c = spec[idx] * scale;
            kept[idx] = spec[idx];
            pairs.push((l, c));
        }
        let poly = TrigPoly::from_pairs(pairs);

        // Residual on the grid: inverse transform of the retained spectrum.
        planner.plan_fft_inverse(n).process(&mut kept);
        let residual = kept
            .iter()
            .zip(values)
            .map(|(r, v)| (r * scale - v).norm())
            .fold(0.0, f64::max);
        if residual > tol {
            return Err(ApproxError::ResidualTooLarge { residual, tol });
        }
        Ok(Approximation { poly, residual })
    }

    /// Same as [`TrigPoly::approximate_uniform`] but takes explicit `(t_k, value)`
    /// pairs and checks that the abscissae form the uniform grid on `[0, 2π)`.
    pub fn approximate(
        samples: &[(f64, Complex64)],
        parity: ParityConstraint,
        max_freq: usize,
        tol: f64,
    ) -> Result<Approximation, ApproxError> {
        let n = samples.len();
        if n == 0 {
            return Err(ApproxError::GridTooCoarse { samples: 0, max_freq });
        }
        for (k, (t, _)) in samples.iter().enumerate() {
            if (t - TAU * k as f64 / n as f64).abs() > 1e-9 {
                return Err(ApproxError::NonUniformGrid);
            }
        }
        let values: Vec<Complex64> = samples.iter().map(|&(_, v)| v).collect();
        TrigPoly::approximate_uniform(&values, parity, max_freq, tol)
    }

    /// Samples on the uniform grid of `n` points.
    pub fn sample(&self, n: usize) -> Vec<Complex64> {
        (0..n).map(|k| self.eval(TAU * k as f64 / n as f64)).collect()
    }

    /// Grid evidence that `p` never vanishes: returns `(min grid |p|, slack)`
    /// where `slack = lipschitz · (spacing/2)`. Nonvanishing is certified when
    /// `min > slack`.
    pub fn nonvanishing_margin(&self, n: usize) -> (f64, f64) {
        let min = self.sample(n).iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min);
        let slack = self.lipschitz() * (TAU / n as f64) / 2.0;
        (min, slack)
    }

    pub fn certified_nonvanishing(&self, n: usize) -> bool {
        let (min, slack) = self.nonvanishing_margin(n);
        min > slack
    }

    /// `∂ arg p / ∂t = Im(conj(p)·p') / |p|²`, evaluated at `t`.
    pub fn arg_derivative(&self, t: f64) -> f64 {
        let v = self.eval(t);
        let d = self.derivative().eval(t);
        (v.conj() * d).im / v.norm_sqr()
    }
}

impl Add for &TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: &TrigPoly) -> TrigPoly {
        TrigPoly::from_pairs(self.iter().chain(rhs.iter()))
    }
}

impl Sub for &TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: &TrigPoly) -> TrigPoly {
        TrigPoly::from_pairs(self.iter().chain(rhs.iter().map(|(l, c)| (l, -c))))
    }
}

impl Neg for &TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        TrigPoly { coeffs: self.coeffs.iter().map(|(&l, &c)| (l, -c)).collect() }
    }
}

impl Mul for &TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: &TrigPoly) -> TrigPoly {
        let mut acc: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (&a, &ca) in &self.coeffs {
            for (&b, &cb) in &rhs.coeffs {
                *acc.entry(a + b).or_default() += ca * cb;
            }
        }
        let mut p = TrigPoly { coeffs: acc };
        p.normalize();
        p
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for TrigPoly {
            type Output = TrigPoly;
            fn $m(self, rhs: TrigPoly) -> TrigPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_examples() {
        assert!((TrigPoly::monomial(1, c(1.0, 0.0)).eval(0.0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((TrigPoly::monomial(2, c(1.0, 0.0)).eval(PI / 2.0) - c(-1.0, 0.0)).norm() < 1e-15);
        let p = TrigPoly::from_pairs([(-1, c(0.0, 1.0)), (1, c(0.0, 1.0))]);
        assert!((p.eval(PI / 3.0) - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(TrigPoly::monomial(2, c(1.0, 0.0)).derivative(), TrigPoly::monomial(2, c(0.0, 2.0)));
        assert!(TrigPoly::constant(c(5.0, 0.0)).derivative().is_zero());
        assert_eq!(
            TrigPoly::monomial(-3, c(1.0, 1.0)).derivative(),
            TrigPoly::monomial(-3, c(3.0, -3.0))
        );
    }

    #[test]
    fn ring_examples() {
        let e1 = TrigPoly::monomial(1, c(1.0, 0.0));
        let em1 = TrigPoly::monomial(-1, c(1.0, 0.0));
        assert_eq!(&e1 * &em1, TrigPoly::one());
        assert_eq!(&e1 * &e1, TrigPoly::monomial(2, c(1.0, 0.0)));
        assert!((&TrigPoly::one() + &TrigPoly::constant(c(-1.0, 0.0))).is_zero());
    }

    #[test]
    fn parity_examples() {
        let p = TrigPoly::from_pairs([(2, c(1.0, 0.0)), (-4, c(3.0, 0.0))]);
        assert_eq!(p.frequency_parity(), FrequencyParity::AllEven);
        let p = TrigPoly::from_pairs([(1, c(1.0, 0.0)), (3, c(0.0, -1.0))]);
        assert_eq!(p.frequency_parity(), FrequencyParity::AllOdd);
        let p = TrigPoly::from_pairs([(0, c(1.0, 0.0)), (1, c(1.0, 0.0))]);
        assert_eq!(p.frequency_parity(), FrequencyParity::Mixed);
        assert_eq!(TrigPoly::zero().frequency_parity(), FrequencyParity::Zero);
    }

    #[test]
    fn drop_tolerance_is_relative() {
        let p = TrigPoly::from_pairs([(0, c(1.0, 0.0)), (1, c(1e-14, 0.0))]);
        assert_eq!(p.len(), 1);
        let q = TrigPoly::from_pairs([(1, c(1e-14, 0.0))]);
        assert_eq!(q.len(), 1);
    }

    #[test]
    fn json_shape() {
        let p = TrigPoly::from_pairs([(2, c(-1.0, 0.0)), (-1, c(0.5, 0.25))]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"freqs":[[-1,0.5,0.25],[2,-1.0,0.0]]}"#);
        let back: TrigPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn substitute_and_shift() {
        let p = TrigPoly::from_pairs([(1, c(1.0, 0.0)), (-2, c(2.0, 0.0))]);
        let q = p.substitute_power(3);
        assert_eq!(q.coeff(3), c(1.0, 0.0));
        assert_eq!(q.coeff(-6), c(2.0, 0.0));
        assert_eq!(p.shift(2).coeff(0), c(2.0, 0.0));
    }

    #[test]
    fn nonvanishing_certificate() {
        let p = TrigPoly::from_pairs([(0, c(2.0, 0.0)), (1, c(1.0, 0.0))]);
        assert!(p.certified_nonvanishing(4096));
        let q = TrigPoly::from_pairs([(0, c(1.0, 0.0)), (1, c(1.0, 0.0))]);
        assert!(!q.certified_nonvanishing(4096));
    }
}
