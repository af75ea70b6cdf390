//! Loops of polynomials `g(u, e^{it}) = Σ_j A_j(t) u^j` with trigonometric
//! polynomial coefficients.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::braid::{BraidError, GeometricBraid, Symmetry};
use crate::certificate::{Certificate, Status, Witness};
use crate::config::{defaults, Config};
use crate::roots::{greedy_match, horner, poly_roots, track_roots, RootError, TrackError};
use crate::trigpoly::{ApproxError, FrequencyParity, ParityConstraint, TrigPoly};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LoopError {
    #[error("loop has no coefficients")]
    Empty,
    #[error("leading coefficient is not certified nonvanishing (min {min:.3e} vs slack {slack:.3e})")]
    LeadingVanishes { min: f64, slack: f64 },
    #[error(transparent)]
    Approx(#[from] ApproxError),
    #[error("projection moved roots by {drift:.3e}, allowed {allowed:.3e}; raise max_freq")]
    RootDriftTooLarge { drift: f64, allowed: f64 },
    #[error("symmetry {0} is not present in the braid")]
    SymmetryAbsent(Symmetry),
    #[error("symmetry {sym} needs its order to divide the strand count {strands}")]
    NotDivisorSymmetric { sym: Symmetry, strands: usize },
    #[error("the braid has a strand on the axis; split it off first")]
    ZeroStrand,
    #[error(transparent)]
    Braid(#[from] BraidError),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error(transparent)]
    Track(#[from] TrackError),
}

/// `Σ_{j=0}^{s} A_j(t) u^j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LoopRepr", into = "LoopRepr")]
pub struct LoopPoly {
    coeffs: Vec<TrigPoly>,
}

#[derive(Serialize, Deserialize)]
struct LoopRepr {
    degree: usize,
    coeffs: Vec<TrigPoly>,
}

impl TryFrom<LoopRepr> for LoopPoly {
    type Error = String;
    fn try_from(r: LoopRepr) -> Result<Self, String> {
        if r.coeffs.len() != r.degree + 1 {
            return Err(format!("degree {} needs {} coefficients, got {}", r.degree, r.degree + 1, r.coeffs.len()));
        }
        LoopPoly::new(r.coeffs).map_err(|e| e.to_string())
    }
}

impl From<LoopPoly> for LoopRepr {
    fn from(g: LoopPoly) -> Self {
        LoopRepr { degree: g.degree(), coeffs: g.coeffs }
    }
}

impl LoopPoly {
    /// Builds a loop and certifies that its leading coefficient never vanishes.
    pub fn new(coeffs: Vec<TrigPoly>) -> Result<Self, LoopError> {
        let g = LoopPoly::unchecked(coeffs)?;
        let n = defaults().grid.leading_check_samples;
        let lead = g.leading();
        if lead.len() > 1 {
            let (min, slack) = lead.nonvanishing_margin(n);
            if min <= slack {
                return Err(LoopError::LeadingVanishes { min, slack });
            }
        }
        Ok(g)
    }

    /// Builds a loop without certifying the leading coefficient. Trailing zero
    /// coefficients are removed.
    pub fn unchecked(mut coeffs: Vec<TrigPoly>) -> Result<Self, LoopError> {
        while coeffs.len() > 1 && coeffs.last().is_some_and(TrigPoly::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() || coeffs.last().is_some_and(TrigPoly::is_zero) {
            return Err(LoopError::Empty);
        }
        Ok(LoopPoly { coeffs })
    }

    /// Monic loop `u^s + Σ_{j<s} lower[j] u^j`.
    pub fn monic(mut lower: Vec<TrigPoly>) -> Self {
        lower.push(TrigPoly::one());
        LoopPoly { coeffs: lower }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[TrigPoly] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> &TrigPoly {
        &self.coeffs[j]
    }

    pub fn leading(&self) -> &TrigPoly {
        self.coeffs.last().expect("nonempty")
    }

    /// `A_0`, the lowest order coefficient `b(t)` of a monic loop.
    pub fn lowest(&self) -> &TrigPoly {
        &self.coeffs[0]
    }

    pub fn is_monic(&self) -> bool {
        *self.leading() == TrigPoly::one()
    }

    /// Lowest `j` with `A_j ≠ 0`.
    pub fn order_at_zero(&self) -> usize {
        self.coeffs.iter().position(|c| !c.is_zero()).unwrap_or(0)
    }

    pub fn coeffs_at(&self, t: f64) -> Vec<Complex64> {
        self.coeffs.iter().map(|c| c.eval(t)).collect()
    }

    pub fn eval(&self, u: Complex64, t: f64) -> Complex64 {
        horner(&self.coeffs_at(t), u).0
    }

    /// `∂g/∂u`.
    pub fn derivative_u(&self) -> LoopPoly {
        if self.coeffs.len() == 1 {
            return LoopPoly { coeffs: vec![TrigPoly::zero()] };
        }
        let coeffs = self.coeffs[1..].iter().enumerate().map(|(j, c)| c.scale(Complex64::new((j + 1) as f64, 0.0))).collect();
        LoopPoly { coeffs }
    }

    /// `∂g/∂t`.
    pub fn derivative_t(&self) -> Vec<TrigPoly> {
        self.coeffs.iter().map(TrigPoly::derivative).collect()
    }

    /// `a(t)·g`.
    pub fn mul_trig(&self, a: &TrigPoly) -> LoopPoly {
        LoopPoly { coeffs: self.coeffs.iter().map(|c| c * a).collect() }
    }

    /// `u^m·g`.
    pub fn mul_u_power(&self, m: usize) -> LoopPoly {
        let mut coeffs = vec![TrigPoly::zero(); m];
        coeffs.extend(self.coeffs.iter().cloned());
        LoopPoly { coeffs }
    }

    /// `g / u^m` for the largest `m` with `u^m | g`, together with `m`.
    pub fn strip_zero_roots(&self) -> (LoopPoly, usize) {
        let m = self.order_at_zero();
        (LoopPoly { coeffs: self.coeffs[m..].to_vec() }, m)
    }

    /// `Σ_j sup|A_j|` bounded by coefficient sums.
    pub fn coeff_bound(&self) -> f64 {
        self.coeffs.iter().map(TrigPoly::coeff_sum).sum()
    }

    /// Every frequency ℓ becomes pℓ: the loop of `B^p`.
    pub fn substitute_power(&self, p: i64) -> LoopPoly {
        LoopPoly { coeffs: self.coeffs.iter().map(|c| c.substitute_power(p)).collect() }
    }

    pub fn max_coeff_diff(&self, other: &LoopPoly) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = TrigPoly::zero();
        (0..n)
            .map(|j| self.coeffs.get(j).unwrap_or(&zero).max_coeff_diff(other.coeffs.get(j).unwrap_or(&zero)))
            .fold(0.0, f64::max)
    }

    pub fn roots_at(&self, t: f64) -> Result<Vec<Complex64>, LoopError> {
        self.roots_at_seeded(t, None)
    }

    pub fn roots_at_seeded(&self, t: f64, seeds: Option<&[Complex64]>) -> Result<Vec<Complex64>, LoopError> {
        let c = self.coeffs_at(t);
        let roots = poly_roots(&c, seeds)?;
        let bound = 1e-10 * (1.0 + self.coeff_bound());
        for &z in &roots {
            let r = horner(&c, z).0.norm();
            // Relative to the size of the monomials involved at large roots.
            let size = c.iter().enumerate().map(|(j, a)| a.norm() * z.norm().powi(j as i32)).sum::<f64>().max(1.0);
            if r > bound * size {
                return Err(LoopError::Root(RootError::SolverDiverged { residual: r }));
            }
        }
        Ok(roots)
    }

    /// Follows the roots around `t ∈ [0, 2π]` on `n` grid intervals. A root
    /// that is identically zero becomes the axis strand.
    pub fn track(&self, n: usize) -> Result<GeometricBraid, LoopError> {
        let (rest, m) = self.strip_zero_roots();
        if m >= 2 {
            return Err(LoopError::Track(TrackError::MarginViolated { t: 0.0 }));
        }
        if rest.degree() == 0 {
            return Ok(if m == 1 { GeometricBraid::zero_only() } else { GeometricBraid::empty(n) });
        }
        let tr = track_roots(|t| rest.coeffs_at(t), n)?;
        let b = GeometricBraid::from_paths(tr.paths, m == 1, tr.closure);
        if b.min_sep() <= 0.0 {
            return Err(LoopError::Track(TrackError::MarginViolated { t: 0.0 }));
        }
        Ok(b)
    }

    /// Certified lower bound for the pairwise distance of roots over all `t`:
    /// the grid minimum minus `h·V`, where `V` bounds root speed at grid points
    /// through `Σ_i sup|A_i'|·|z|^i / |∂_u g(z)|`.
    pub fn simple_root_margin(&self, n: usize) -> (f64, Certificate) {
        let h = TAU / n as f64;
        let lead_ok = self.leading().len() <= 1 || self.leading().certified_nonvanishing(defaults().grid.leading_check_samples);
        if !lead_ok {
            let c = Certificate::new("simple-roots", Status::Inconclusive, 0.0, 0.0, n)
                .with_note("leading coefficient is not certified nonvanishing");
            return (0.0, c);
        }
        if self.degree() <= 1 {
            return (f64::INFINITY, Certificate::new("simple-roots", Status::Pass, f64::INFINITY, 0.0, n).with_note("at most one root"));
        }
        let tr = match track_roots(|t| self.coeffs_at(t), n) {
            Ok(tr) => tr,
            Err(e) => {
                let t = match e {
                    TrackError::MarginViolated { t } => t,
                    _ => 0.0,
                };
                let mut c = Certificate::new("simple-roots", Status::Fail, 0.0, 0.0, n)
                    .with_note(format!("root tracking failed: {e}"));
                if let Ok(r) = self.roots_at(t) {
                    let (i, j, d) = closest_pair(&r);
                    c = c.with_witness(Witness::new("closest roots", vec![t, r[i].re, r[i].im, r[j].re, r[j].im], d));
                }
                return (0.0, c);
            }
        };
        let lips: Vec<f64> = self.coeffs.iter().map(TrigPoly::lipschitz).collect();
        let du = self.derivative_u();
        let mut speed: f64 = 0.0;
        let mut worst = (0usize, f64::INFINITY);
        for k in 0..=n {
            let t = k as f64 * h;
            let pts: Vec<Complex64> = tr.paths.iter().map(|p| p[k]).collect();
            let (_, _, d) = closest_pair(&pts);
            if d < worst.1 {
                worst = (k, d);
            }
            let dc = du.coeffs_at(t);
            for z in &pts {
                let num: f64 = lips.iter().enumerate().map(|(i, l)| l * z.norm().powi(i as i32)).sum();
                let den = horner(&dc, *z).0.norm();
                speed = speed.max(if den > 0.0 { num / den } else { f64::INFINITY });
            }
        }
        let slack = speed * h;
        let margin = tr.min_sep - slack;
        let status = if margin > 0.0 { Status::Pass } else { Status::Inconclusive };
        let t = worst.0 as f64 * h;
        let c = Certificate::new("simple-roots", status, margin, slack, n)
            .with_tolerance("grid_min_separation", tr.min_sep)
            .with_witness(Witness::new("closest approach", vec![t], worst.1));
        (margin.max(0.0), c)
    }

    /// Synthesizes the monic loop whose roots are the strands of `b`, with the
    /// frequency pattern forced by `sym`. See [`FromBraid`] for the report.
    pub fn from_braid(b: &GeometricBraid, sym: Symmetry, max_freq: Option<usize>, cfg: &Config) -> Result<FromBraid, LoopError> {
        if b.has_zero_strand() {
            return Err(LoopError::ZeroStrand);
        }
        let report = b.detect_symmetry()?;
        if !report.contains(sym) {
            return Err(LoopError::SymmetryAbsent(sym));
        }
        let s = b.nonzero_count();
        if let Symmetry::KSymmetric(k) = sym {
            if !k.is_power_of_two() || s % k as usize != 0 {
                return Err(LoopError::NotDivisorSymmetric { sym, strands: s });
            }
        }
        let n = b.samples();
        let work = if sym == Symmetry::ODD { b.twist(1) } else { b.clone() };

        // Elementary symmetric functions sampled on the grid k = 0..n.
        let mut samples = vec![vec![Complex64::new(0.0, 0.0); n]; s + 1];
        for k in 0..n {
            let mut c = vec![Complex64::new(1.0, 0.0)];
            for z in work.points_at(k) {
                let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
                for (i, &a) in c.iter().enumerate() {
                    next[i + 1] += a;
                    next[i] -= a * z;
                }
                c = next;
            }
            for j in 0..=s {
                samples[j][k] = c[j];
            }
        }

        let cap = cfg.search.max_freq_cap.min((n.saturating_sub(2)) / 2);
        let mut freq = match max_freq {
            Some(f) => f.min(cap),
            None => initial_max_freq(&samples[..s], cap),
        };
        let scale = 1.0 + samples.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
        let tol = cfg.tolerance.projection_residual * scale;
        loop {
            match project(&samples, s, sym, freq, tol, scale).and_then(|(coeffs, residual)| {
                let g = LoopPoly::monic(coeffs);
                let drift = root_drift(&g, b)?;
                let allowed = b.symmetry_tolerance();
                if drift >= allowed {
                    return Err(LoopError::RootDriftTooLarge { drift, allowed });
                }
                Ok(FromBraid { loop_poly: g, max_freq: freq, residual, drift })
            }) {
                Ok(r) => return Ok(r),
                Err(e @ (LoopError::Approx(_) | LoopError::RootDriftTooLarge { .. } | LoopError::Root(_))) => {
                    if freq >= cap || max_freq.is_some() {
                        return Err(e);
                    }
                    freq = (freq * 2).min(cap);
                }
                Err(e) => return Err(e),
            }
        }
    }
}

/// Result of [`LoopPoly::from_braid`].
#[derive(Clone, Debug, PartialEq)]
pub struct FromBraid {
    pub loop_poly: LoopPoly,
    pub max_freq: usize,
    pub residual: f64,
    /// Largest distance between a root of the projected loop and its strand.
    pub drift: f64,
}

fn closest_pair(pts: &[Complex64]) -> (usize, usize, f64) {
    let mut best = (0, 0, f64::INFINITY);
    for i in 0..pts.len() {
        for j in 0..i {
            let d = (pts[i] - pts[j]).norm();
            if d < best.2 {
                best = (i, j, d);
            }
        }
    }
    best
}

/// Four times the smallest power of two above the frequency where the sampled
/// spectra fall below `1e-10` of their peak.
fn initial_max_freq(samples: &[Vec<Complex64>], cap: usize) -> usize {
    let n = samples.first().map_or(0, Vec::len);
    if n == 0 {
        return 1.min(cap);
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let mut spectra = Vec::new();
    for s in samples {
        let mut v = s.clone();
        fft.process(&mut v);
        spectra.push(v);
    }
    let peak = spectra.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
    let mut knee = 0usize;
    for spec in &spectra {
        for (idx, c) in spec.iter().enumerate() {
            let l = if idx <= n / 2 { idx } else { n - idx };
            if c.norm() > 1e-10 * peak {
                knee = knee.max(l);
            }
        }
    }
    let p = (knee + 1).next_power_of_two();
    (4 * p).clamp(1, cap.max(1))
}

/// The frequency constraint on `A_j` imposed by a symmetry (on the working
/// strands, i.e. after the `e^{it}` rotation in the odd case). `None` means the
/// coefficient must vanish.
fn parity_for(sym: Symmetry, s: usize, j: usize) -> Option<ParityConstraint> {
    match sym {
        Symmetry::UEven | Symmetry::KSymmetric(1) => Some(ParityConstraint::Even),
        Symmetry::KSymmetric(k) => {
            let k = k as usize;
            if j % k != 0 {
                None
            } else if ((s + j) / k) % 2 == 0 {
                Some(ParityConstraint::Even)
            } else {
                Some(ParityConstraint::Odd)
            }
        }
    }
}

fn project(samples: &[Vec<Complex64>], s: usize, sym: Symmetry, max_freq: usize, tol: f64, scale: f64) -> Result<(Vec<TrigPoly>, f64), LoopError> {
    let mut coeffs = Vec::with_capacity(s);
    let mut worst: f64 = 0.0;
    for j in 0..s {
        let poly = match parity_for(sym, s, j) {
            None => {
                let r = samples[j].iter().map(|c| c.norm()).fold(0.0, f64::max);
                if r > tol {
                    return Err(ApproxError::ResidualTooLarge { residual: r, tol }.into());
                }
                worst = worst.max(r);
                TrigPoly::zero()
            }
            Some(par) => {
                let a = TrigPoly::approximate_uniform(&samples[j], par, max_freq, tol)?;
                worst = worst.max(a.residual);
                // Round-off from the sampled symmetric functions.
                a.poly.chop(1e-12 * scale)
            }
        };
        coeffs.push(if sym == Symmetry::ODD { poly.shift(j as i64 - s as i64) } else { poly });
    }
    Ok((coeffs, worst))
}

/// Largest distance between roots of `g` and the strands of `b` over the grid.
fn root_drift(g: &LoopPoly, b: &GeometricBraid) -> Result<f64, LoopError> {
    let mut worst: f64 = 0.0;
    for k in 0..=b.samples() {
        let seeds = b.points_at(k);
        let roots = g.roots_at_seeded(b.t(k), Some(&seeds))?;
        let (_, d) = greedy_match(&seeds, &roots);
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Whether every coefficient of `g` has the frequency pattern that `sym`
/// forces on a monic loop of degree `s`.
pub fn satisfies_parity_pattern(g: &LoopPoly, sym: Symmetry) -> bool {
    let s = g.degree();
    g.coeffs().iter().enumerate().take(s).all(|(j, a)| {
        let p = a.frequency_parity();
        if p == FrequencyParity::Zero {
            return true;
        }
        match sym {
            Symmetry::UEven => p == FrequencyParity::AllEven,
            Symmetry::KSymmetric(1) => {
                if (s - j) % 2 == 0 {
                    p == FrequencyParity::AllEven
                } else {
                    p == FrequencyParity::AllOdd
                }
            }
            Symmetry::KSymmetric(k) => match parity_for(sym, s, j) {
                None => false,
                Some(ParityConstraint::Even) => p == FrequencyParity::AllEven,
                Some(ParityConstraint::Odd) => p == FrequencyParity::AllOdd,
                Some(ParityConstraint::Any) => k > 0,
            },
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::braid::BraidWord;

    fn e(l: i64) -> TrigPoly {
        TrigPoly::monomial(l, Complex64::new(1.0, 0.0))
    }

    #[test]
    fn hopf_loop_from_full_twist() {
        let b = GeometricBraid::from_word(&"s=2: s1 s1".parse::<BraidWord>().unwrap(), 1024);
        let r = LoopPoly::from_braid(&b, Symmetry::UEven, None, &Config::default()).unwrap();
        let g = r.loop_poly;
        assert_eq!(g.degree(), 2);
        assert!(g.coeff(0).max_coeff_diff(&(-&e(2))) < 1e-12);
        assert!(g.coeff(1).is_zero());
        assert!(satisfies_parity_pattern(&g, Symmetry::UEven));
    }

    #[test]
    fn track_examples() {
        let g = LoopPoly::monic(vec![-&e(2), TrigPoly::zero()]);
        let b = g.track(512).unwrap();
        assert_eq!(b.closure(), &[0, 1]);
        let g = LoopPoly::monic(vec![-&e(1), TrigPoly::zero()]);
        let b = g.track(512).unwrap();
        assert_eq!(b.closure(), &[1, 0]);
    }

    #[test]
    fn margins() {
        let g = LoopPoly::monic(vec![-&e(2), TrigPoly::zero()]);
        let (m, c) = g.simple_root_margin(1024);
        assert!(c.is_pass() && m > 1.99 && m < 2.0);
        let d = 1e-3;
        // (u-1)(u-1+d) = u^2 - (2-d)u + (1-d)
        let g = LoopPoly::monic(vec![TrigPoly::constant(Complex64::new(1.0 - d, 0.0)), TrigPoly::constant(Complex64::new(-(2.0 - d), 0.0))]);
        let (m, c) = g.simple_root_margin(256);
        assert!(c.is_pass() && (m - d).abs() < 1e-9);
        let g = LoopPoly::monic(vec![TrigPoly::zero(), TrigPoly::zero()]);
        let (m, c) = g.simple_root_margin(256);
        assert_eq!(m, 0.0);
        assert!(!c.is_pass());
    }

    #[test]
    fn json_roundtrip() {
        let g = LoopPoly::monic(vec![-&e(2), TrigPoly::zero()]);
        let s = serde_json::to_string(&g).unwrap();
        assert!(s.starts_with(r#"{"degree":2,"coeffs":"#));
        let back: LoopPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }
}
