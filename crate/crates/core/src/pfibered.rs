//! Fibration certificates for loops of polynomials with an `O`-multiplicity
//! and a coefficient, compatible sequences of such loops, and their
//! realization as strongly inner non-degenerate mixed polynomials.
//!
//! For `F(u, t) = a(t)·u^m·g(u, e^{it})` the argument map fibers exactly when
//! every branch `V_j(t)` of nonzero critical values of `F(·, t)` satisfies
//! `∂ arg V_j/∂t ≠ 0`. At a critical point `∂_u F = 0`, so `V_j' = ∂_t F`,
//! which we evaluate exactly from the trigonometric coefficients.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::braid::{BraidError, BraidWord, Generator, GeometricBraid, Symmetry};
use crate::certificate::{Certificate, Status, Witness};
use crate::config::Config;
use crate::looppoly::{LoopError, LoopPoly};
use crate::mixedpoly::{
    check_inner_nondegenerate, check_strongly_inner_nondegenerate, face_function, from_loop_line, g_polynomial, glue,
    FaceLine, MixedError, MixedPoly, WeightVector,
};
use crate::roots::{greedy_match, horner, poly_roots, track_roots};
use crate::trigpoly::TrigPoly;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum PFiberError {
    #[error("coefficient a(t) is not certified nowhere zero")]
    CoefficientVanishes,
    #[error("expected {expected} multiplicities (one per component), got {got}")]
    MultiplicityCount { expected: usize, got: usize },
    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),
    #[error("sequence is not compatible: {0}")]
    NotCompatible(String),
    #[error("no admissible strictly decreasing weights for face {0} within the k cap")]
    WeightSelectionFailed(usize),
    #[error("critical points could not be followed: {0}")]
    BranchCollision(String),
    #[error("sequence file: {0}")]
    Format(String),
    #[error(transparent)]
    Loop(#[from] LoopError),
    #[error(transparent)]
    Mixed(#[from] MixedError),
    #[error(transparent)]
    Braid(#[from] BraidError),
}

/// A loop with `O`-multiplicity `m`, coefficient `a(t)` and optional
/// multiplicities per closure component.
#[derive(Clone, Debug, PartialEq)]
pub struct PFiberData {
    pub braid_loop: LoopPoly,
    pub o_mult: usize,
    pub coefficient: TrigPoly,
    pub multiplicities: Option<Vec<u32>>,
}

impl PFiberData {
    pub fn new(braid_loop: LoopPoly, o_mult: usize, coefficient: TrigPoly, cfg: &Config) -> Result<Self, PFiberError> {
        if coefficient.len() > 1 && !coefficient.certified_nonvanishing(cfg.grid.leading_check_samples) || coefficient.is_zero() {
            return Err(PFiberError::CoefficientVanishes);
        }
        Ok(PFiberData { braid_loop, o_mult, coefficient, multiplicities: None })
    }

    pub fn plain(braid_loop: LoopPoly) -> Self {
        PFiberData { braid_loop, o_mult: 0, coefficient: TrigPoly::one(), multiplicities: None }
    }

    pub fn with_multiplicities(mut self, m: Vec<u32>, cfg: &Config) -> Result<Self, PFiberError> {
        let b = self.braid_loop.track(cfg.grid.loop_samples)?;
        let expected = cycles(b.closure()).len();
        if m.len() != expected {
            return Err(PFiberError::MultiplicityCount { expected, got: m.len() });
        }
        self.multiplicities = Some(m);
        Ok(self)
    }
}

/// Behaviour of one branch of critical values over the grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchData {
    pub min_speed: f64,
    pub max_speed: f64,
    /// `+1` or `−1` when `∂ arg V/∂t` keeps one sign on the grid, else `0`.
    pub sign: i32,
}

/// Branches joined by the closure permutation, with the winding number of
/// the critical values around `0` along the whole cycle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleWinding {
    pub branches: Vec<usize>,
    pub winding: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PFiberCertificate {
    pub certificate: Certificate,
    pub branches: Vec<BranchData>,
    pub cycles: Vec<CycleWinding>,
}

impl PFiberCertificate {
    pub fn pass(&self) -> bool {
        self.certificate.is_pass()
    }

    pub fn margin(&self) -> f64 {
        self.certificate.margin
    }

    /// Certified range of the speeds over all branches, widened by the slack.
    pub fn speed_range(&self) -> Option<(f64, f64)> {
        let lo = self.branches.iter().map(|b| b.min_speed).reduce(f64::min)?;
        let hi = self.branches.iter().map(|b| b.max_speed).reduce(f64::max)?;
        Some((lo - self.certificate.slack, hi + self.certificate.slack))
    }
}

pub(crate) fn cycles(perm: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for s in 0..perm.len() {
        if seen[s] {
            continue;
        }
        let mut c = Vec::new();
        let mut j = s;
        while !seen[j] {
            seen[j] = true;
            c.push(j);
            j = perm[j];
        }
        out.push(c);
    }
    out
}

/// Coefficients (constant term first) of the polynomial whose roots are the
/// nonzero critical points of `u^m·q(u)`: `m·q + u·q'` for `m ≥ 1`, `q'` for
/// `m = 0`.
fn critical_poly(q: &[Complex64], m: usize) -> Vec<Complex64> {
    if m == 0 {
        q.iter().enumerate().skip(1).map(|(j, c)| c * j as f64).collect()
    } else {
        q.iter().enumerate().map(|(j, c)| c * (m + j) as f64).collect()
    }
}

/// Nonzero critical points of `u ↦ u^m·g(u, e^{it})` (all critical points when
/// `m = 0`).
pub fn critical_points(g: &LoopPoly, m: usize, t: f64) -> Result<Vec<Complex64>, PFiberError> {
    let c = critical_poly(&g.coeffs_at(t), m);
    poly_roots(&c, None).map_err(|e| PFiberError::BranchCollision(e.to_string()))
}

/// `a(t)·c^m·g(c, t)` over the critical points `c`.
pub fn critical_values(data: &PFiberData, t: f64) -> Result<Vec<Complex64>, PFiberError> {
    let a = data.coefficient.eval(t);
    let q = data.braid_loop.coeffs_at(t);
    Ok(critical_points(&data.braid_loop, data.o_mult, t)?
        .into_iter()
        .map(|c| a * c.powu(data.o_mult as u32) * horner(&q, c).0)
        .collect())
}

pub fn certify(data: &PFiberData, cfg: &Config) -> PFiberCertificate {
    match &data.multiplicities {
        None => certify_function(&data.braid_loop, data.o_mult, &data.coefficient, cfg.grid.loop_samples, cfg),
        Some(m) => certify_multiplicities(data, m, cfg),
    }
}

/// Certificate for `a(t)·u^m·q(u, t)`. `q` need not be monic, but its
/// leading coefficient must not vanish.
pub fn certify_function(q: &LoopPoly, m: usize, a: &TrigPoly, n: usize, cfg: &Config) -> PFiberCertificate {
    let name = "p-fibered";
    let cp_len = critical_poly(&q.coeffs_at(0.0), m).len();
    if cp_len <= 1 {
        let c = Certificate::new(name, Status::Pass, f64::INFINITY, 0.0, n).with_note("no nonzero critical points");
        return PFiberCertificate { certificate: c, branches: Vec::new(), cycles: Vec::new() };
    }
    let tracked = match track_roots(|t| critical_poly(&q.coeffs_at(t), m), n) {
        Ok(t) => t,
        Err(e) => {
            let c = Certificate::new(name, Status::Inconclusive, 0.0, 0.0, n)
                .with_note(format!("critical points could not be followed: {e}"));
            return PFiberCertificate { certificate: c, branches: Vec::new(), cycles: Vec::new() };
        }
    };
    let dq = q.derivative_t();
    let da = a.derivative();
    let h = TAU / n as f64;
    let nb = tracked.paths.len();
    let mut values = vec![vec![Complex64::new(0.0, 0.0); n + 1]; nb];
    let mut speeds = vec![vec![0.0; n + 1]; nb];
    let mut scale: f64 = 0.0;
    for k in 0..=n {
        let t = k as f64 * h;
        let qc = q.coeffs_at(t);
        let dqc: Vec<Complex64> = dq.iter().map(|p| p.eval(t)).collect();
        let (av, dav) = (a.eval(t), da.eval(t));
        for j in 0..nb {
            let c = tracked.paths[j][k];
            let cm = c.powu(m as u32);
            let g = horner(&qc, c).0;
            let v = av * cm * g;
            let dv = dav * cm * g + av * cm * horner(&dqc, c).0;
            values[j][k] = v;
            speeds[j][k] = (v.conj() * dv).im / v.norm_sqr();
            scale = scale.max(v.norm());
        }
    }
    assess(name, values, speeds, &tracked.closure, scale, n, cfg)
}

/// Multiplicities variant: critical points of `arg(a u^m ∏(u − u_i)^{w_i})`
/// recomputed at every grid point from the tracked strands; speeds from
/// fourth-order differences of the unwrapped argument.
fn certify_multiplicities(data: &PFiberData, mults: &[u32], cfg: &Config) -> PFiberCertificate {
    let name = "p-fibered-multiplicities";
    let n = cfg.grid.loop_samples;
    let fail = |note: String| PFiberCertificate {
        certificate: Certificate::new(name, Status::Inconclusive, 0.0, 0.0, n).with_note(note),
        branches: Vec::new(),
        cycles: Vec::new(),
    };
    let b = match data.braid_loop.track(n) {
        Ok(b) => b,
        Err(e) => return fail(format!("roots could not be followed: {e}")),
    };
    let comps = cycles(b.closure());
    if comps.len() != mults.len() {
        return fail(format!("expected {} multiplicities, got {}", comps.len(), mults.len()));
    }
    let mut weight = vec![0u32; b.strand_count()];
    for (c, strands) in comps.iter().enumerate() {
        for &s in strands {
            weight[s] = mults[c];
        }
    }
    let m = data.o_mult;
    let h = TAU / n as f64;
    let weighted = |k: usize| -> (Vec<Complex64>, Vec<Complex64>) {
        let z = b.points_at(k);
        // Σ_i w_i ∏_{l≠i}(u − z_l), plus m·∏(u − z_l) times 1/u when m ≥ 1.
        let mut num = vec![Complex64::new(0.0, 0.0); z.len() + 1];
        for i in 0..z.len() {
            let mut p = vec![Complex64::new(weight[i] as f64, 0.0)];
            for (l, &zl) in z.iter().enumerate() {
                if l != i {
                    p = mul_linear(&p, zl);
                }
            }
            let shift = usize::from(m > 0);
            for (j, c) in p.into_iter().enumerate() {
                num[j + shift] += c;
            }
        }
        if m > 0 {
            let mut full = vec![Complex64::new(m as f64, 0.0)];
            for &zl in &z {
                full = mul_linear(&full, zl);
            }
            for (j, c) in full.into_iter().enumerate() {
                num[j] += c;
            }
        }
        while num.len() > 1 && num.last().is_some_and(|c| c.norm() == 0.0) {
            num.pop();
        }
        (num, z)
    };
    let value_at = |k: usize, c: Complex64, z: &[Complex64]| -> Complex64 {
        let mut v = data.coefficient.eval(k as f64 * h) * c.powu(m as u32);
        for (i, &zi) in z.iter().enumerate() {
            v *= (c - zi).powu(weight[i]);
        }
        v
    };
    let mut crit: Vec<Vec<Complex64>> = Vec::new();
    let mut values: Vec<Vec<Complex64>> = Vec::new();
    let mut prev: Option<Vec<Complex64>> = None;
    for k in 0..=n {
        let (num, z) = weighted(k);
        let roots = match poly_roots(&num, prev.as_deref()) {
            Ok(r) => r,
            Err(e) => return fail(format!("critical points not found at t = {:.6}: {e}", k as f64 * h)),
        };
        let roots = match &prev {
            None => roots,
            Some(p) => {
                let (perm, worst) = greedy_match(p, &roots);
                let sep = crate::roots::min_pairwise(p);
                if worst >= sep / 4.0 {
                    return fail(format!("critical points move too fast near t = {:.6}; refine the grid", k as f64 * h));
                }
                perm.iter().map(|&j| roots[j]).collect()
            }
        };
        if crit.is_empty() {
            crit = vec![Vec::new(); roots.len()];
            values = vec![Vec::new(); roots.len()];
        }
        for (j, &c) in roots.iter().enumerate() {
            crit[j].push(c);
            values[j].push(value_at(k, c, &z));
        }
        prev = Some(roots);
    }
    if crit.is_empty() {
        let c = Certificate::new(name, Status::Pass, f64::INFINITY, 0.0, n).with_note("no nonzero critical points");
        return PFiberCertificate { certificate: c, branches: Vec::new(), cycles: Vec::new() };
    }
    let end: Vec<Complex64> = crit.iter().map(|p| p[n]).collect();
    let start: Vec<Complex64> = crit.iter().map(|p| p[0]).collect();
    let (closure, _) = greedy_match(&end, &start);
    let mut scale: f64 = 0.0;
    let speeds: Vec<Vec<f64>> = values
        .iter()
        .map(|vals| {
            let mut theta = vec![0.0; n + 1];
            for k in 1..=n {
                theta[k] = theta[k - 1] + (vals[k] / vals[k - 1]).arg();
            }
            scale = vals.iter().map(|v| v.norm()).fold(scale, f64::max);
            (0..=n)
                .map(|k| {
                    if k >= 2 && k + 2 <= n {
                        (-theta[k + 2] + 8.0 * theta[k + 1] - 8.0 * theta[k - 1] + theta[k - 2]) / (12.0 * h)
                    } else if k == 0 {
                        (theta[1] - theta[0]) / h
                    } else if k == n {
                        (theta[n] - theta[n - 1]) / h
                    } else {
                        (theta[k + 1] - theta[k - 1]) / (2.0 * h)
                    }
                })
                .collect()
        })
        .collect();
    let mut c = assess(name, values, speeds, &closure, scale, n, cfg);
    c.certificate = c.certificate.with_note("speeds from finite differences of the tracked branches");
    c
}

fn mul_linear(p: &[Complex64], z: Complex64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); p.len() + 1];
    for (i, &c) in p.iter().enumerate() {
        out[i + 1] += c;
        out[i] -= c * z;
    }
    out
}

fn assess(
    name: &str,
    values: Vec<Vec<Complex64>>,
    speeds: Vec<Vec<f64>>,
    closure: &[usize],
    scale: f64,
    n: usize,
    cfg: &Config,
) -> PFiberCertificate {
    let h = TAU / n as f64;
    let mut branches = Vec::new();
    let mut slack: f64 = 0.0;
    let mut min_abs = f64::INFINITY;
    let mut worst = (0usize, 0usize, f64::INFINITY);
    let mut sign_change: Option<(usize, usize)> = None;
    let mut collision: Option<(usize, usize)> = None;
    for (j, d) in speeds.iter().enumerate() {
        for k in 0..=n {
            if values[j][k].norm() <= 1e-14 * scale.max(1.0) {
                collision.get_or_insert((j, k));
            }
            if k < n {
                slack = slack.max((d[k + 1] - d[k]).abs());
            }
            if k >= 1 && k < n {
                slack = slack.max((d[k + 1] - 2.0 * d[k] + d[k - 1]).abs());
            }
            if d[k].abs() < worst.2 {
                worst = (j, k, d[k].abs());
            }
        }
        let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sign = if lo > 0.0 {
            1
        } else if hi < 0.0 {
            -1
        } else {
            0
        };
        if sign == 0 && lo < 0.0 && hi > 0.0 {
            sign_change.get_or_insert((j, d.iter().position(|&x| x * d[0] <= 0.0).unwrap_or(0)));
        }
        min_abs = min_abs.min(d.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min));
        branches.push(BranchData { min_speed: lo, max_speed: hi, sign });
    }

    let cycles_out: Vec<CycleWinding> = cycles(closure)
        .into_iter()
        .map(|c| {
            let total: f64 = c
                .iter()
                .map(|&j| (1..=n).map(|k| (values[j][k] / values[j][k - 1]).arg()).sum::<f64>())
                .sum();
            CycleWinding { branches: c, winding: (total / TAU).round() as i64 }
        })
        .collect();

    let defect = cfg.tolerance.witness_defect;
    let margin = min_abs - slack;
    let (status, witness) = if let Some((j, k)) = collision {
        (Status::Fail, Some(Witness::new(format!("critical value zero on branch {j} (t)"), vec![k as f64 * h], 0.0)))
    } else if let Some((j, k)) = sign_change {
        (Status::Fail, Some(Witness::new(format!("branch {j} changes direction (t)"), vec![k as f64 * h], 0.0)))
    } else if min_abs < defect {
        let label = if branches[worst.0].max_speed.abs().max(branches[worst.0].min_speed.abs()) < defect {
            format!("branch {} has constant critical argument (t)", worst.0)
        } else {
            format!("branch {} is stationary (t)", worst.0)
        };
        (Status::Fail, Some(Witness::new(label, vec![worst.1 as f64 * h], worst.2)))
    } else if min_abs > 2.0 * slack {
        (Status::Pass, Some(Witness::new(format!("slowest point on branch {} (t)", worst.0), vec![worst.1 as f64 * h], worst.2)))
    } else {
        (Status::Inconclusive, Some(Witness::new(format!("slowest point on branch {} (t)", worst.0), vec![worst.1 as f64 * h], worst.2)))
    };
    let mut c = Certificate::new(name, status, margin, slack, n).with_tolerance("witness_defect", defect);
    if let Some(w) = witness {
        c = c.with_witness(w);
    }
    if status == Status::Inconclusive {
        c = c.with_note("speed does not clear twice the slack; refine the grid");
    }
    PFiberCertificate { certificate: c, branches, cycles: cycles_out }
}

/// Smallest `|n|` (positive first on ties) such that `a(t) = e^{int}` makes
/// `u^m g` P-fibered, with the certificate for that `n`.
pub fn minimal_coefficient_speed(g: &LoopPoly, m: usize, cfg: &Config) -> Result<(i64, PFiberCertificate), PFiberError> {
    let n = cfg.grid.loop_samples;
    let base = certify_function(g, m, &TrigPoly::one(), n, cfg);
    if base.certificate.status == Status::Inconclusive && base.branches.is_empty() {
        return Err(PFiberError::BranchCollision(base.certificate.notes.join("; ")));
    }
    if base.branches.is_empty() {
        return Ok((0, base));
    }
    let slack = base.certificate.slack;
    let bound = base.branches.iter().map(|b| b.min_speed.abs().max(b.max_speed.abs())).fold(0.0, f64::max) + slack;
    let limit = bound.ceil() as i64 + 2;
    for step in 0..=(2 * limit) {
        let s = if step % 2 == 1 { (step + 1) / 2 } else { -(step / 2) };
        let clear = base.branches.iter().all(|b| s as f64 + b.min_speed - slack > 0.0 || s as f64 + b.max_speed + slack < 0.0);
        if !clear {
            continue;
        }
        let a = TrigPoly::monomial(s, Complex64::new(1.0, 0.0));
        let c = certify_function(g, m, &a, n, cfg);
        if c.pass() {
            return Ok((s, c));
        }
    }
    Err(PFiberError::HypothesisFailed(format!("no coefficient speed up to {limit} certifies")))
}

/// Result of [`minimal_power`].
#[derive(Clone, Debug, Serialize)]
pub struct MinimalPower {
    /// The analytic bound: every `p > q` works.
    pub q: u64,
    pub sup_coefficient_speed: f64,
    pub inf_branch_speed: f64,
    /// Certificate for `p = q + 1`.
    pub next: PFiberCertificate,
    /// `(p, status)` for `p = 1..=cap`.
    pub scan: Vec<(u32, Status)>,
    /// Smallest `p` from which every scanned power passes.
    pub observed: Option<u32>,
}

/// `q = ⌈sup|∂ arg a| / inf_j inf_t |∂ arg v_j|⌉`.
pub fn minimal_power(g: &LoopPoly, m: usize, a: &TrigPoly, cfg: &Config) -> Result<MinimalPower, PFiberError> {
    let n = cfg.grid.loop_samples;
    let plain = certify_function(g, m, &TrigPoly::one(), n, cfg);
    if !plain.pass() {
        return Err(PFiberError::HypothesisFailed(format!(
            "the loop is not P-fibered with constant coefficient ({:?})",
            plain.certificate.status
        )));
    }
    let inf = plain
        .branches
        .iter()
        .map(|b| b.min_speed.abs().min(b.max_speed.abs()))
        .fold(f64::INFINITY, f64::min)
        - plain.certificate.slack;
    let sup = coefficient_speed_bound(a, 4 * n);
    let q = if sup == 0.0 || inf.is_infinite() {
        0
    } else {
        let ratio = sup / inf;
        let r = ratio.round();
        if (ratio - r).abs() < 1e-9 {
            r as u64
        } else {
            ratio.ceil() as u64
        }
    };
    let power = |p: u64| certify_function(&g.substitute_power(p as i64), m, a, n * p as usize, cfg);
    let next = power(q + 1);
    let cap = cfg.search.max_power_scan;
    let scan: Vec<(u32, Status)> = (1..=cap).map(|p| (p, power(p as u64).certificate.status)).collect();
    let observed = scan.iter().rposition(|(_, s)| *s != Status::Pass).map_or(Some(1), |i| (i + 1 < scan.len()).then(|| scan[i + 1].0));
    Ok(MinimalPower { q, sup_coefficient_speed: sup, inf_branch_speed: inf, next, scan, observed })
}

/// Upper bound for `sup_t |∂ arg a/∂t|`: exact for a single frequency, else
/// the grid maximum plus the largest change between neighbouring samples.
fn coefficient_speed_bound(a: &TrigPoly, n: usize) -> f64 {
    if a.len() <= 1 {
        return a.frequencies().next().map_or(0.0, |l| l.abs() as f64);
    }
    let h = TAU / n as f64;
    let s: Vec<f64> = (0..=n).map(|k| a.arg_derivative(k as f64 * h)).collect();
    let max = s.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let jump = s.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    max + jump
}

/// Outcome of [`verify_compatible`].
#[derive(Clone, Debug, Serialize)]
pub struct CompatReport {
    pub compatible: bool,
    /// The first failed condition, if any.
    pub failure: Option<String>,
    /// Every failed condition in order.
    pub failures: Vec<String>,
    pub certificates: Vec<PFiberCertificate>,
}

/// Checks the multiplicity ladder `m_i = Σ_{j<i} s_j`, `a_N ≡ 1`,
/// `a_{i−1} = b_i·a_i` with `b_i` the lowest coefficient of `g_i`, that
/// `B_i` avoids the axis for `i > 1`, and that every entry certifies.
pub fn verify_compatible(seq: &[PFiberData], cfg: &Config) -> CompatReport {
    let mut failures = Vec::new();
    if seq.is_empty() {
        failures.push("empty sequence".to_string());
    }
    let mut expected = 0usize;
    for (i, d) in seq.iter().enumerate() {
        if d.o_mult != expected {
            failures.push(format!("O-multiplicity ladder: m_{} = {} but the strands before it number {}", i + 1, d.o_mult, expected));
        }
        expected += d.braid_loop.degree();
    }
    if let Some(last) = seq.last() {
        if last.coefficient.max_coeff_diff(&TrigPoly::one()) > cfg.tolerance.ladder {
            failures.push(format!("a_{} ≠ 1", seq.len()));
        }
    }
    for i in 1..seq.len() {
        let b = seq[i].braid_loop.lowest();
        if !b.certified_nonvanishing(cfg.grid.leading_check_samples) {
            failures.push(format!("B_{} meets the braid axis (b_{} is not certified nowhere zero)", i + 1, i + 1));
        }
        let prod = b * &seq[i].coefficient;
        if seq[i - 1].coefficient.max_coeff_diff(&prod) > cfg.tolerance.ladder {
            failures.push(format!("a_{{i-1}} ≠ b_i a_i (i = {})", i + 1));
        }
    }
    let certificates: Vec<PFiberCertificate> = seq.iter().map(|d| certify(d, cfg)).collect();
    for (i, c) in certificates.iter().enumerate() {
        if !c.pass() {
            failures.push(format!("B_{} is not certified P-fibered ({:?})", i + 1, c.certificate.status));
        }
    }
    CompatReport { compatible: failures.is_empty(), failure: failures.first().cloned(), failures, certificates }
}

/// A realized compatible sequence.
#[derive(Clone, Debug, Serialize)]
pub struct Realization {
    pub poly: MixedPoly,
    pub symmetries: Vec<Symmetry>,
    pub lines: Vec<FaceLine>,
    pub weights: Vec<WeightVector>,
    /// `G_i = ã_i·u^{m_i}·g̃_i` with the synthesized loops.
    pub face_loops: Vec<LoopPoly>,
    /// Largest coefficient difference between each face's g-polynomial and
    /// `a_i·u^{m_i}·g_i` from the input.
    pub roundtrip_errors: Vec<f64>,
    /// Whether each face's roots close up to the same permutation and
    /// linking data as the input loop.
    pub braid_matches: Vec<bool>,
    pub strong: Certificate,
    pub weak: Certificate,
}

/// Prefers `u`-even, then the smallest divisor-compatible `2^K`, then odd.
pub fn choose_symmetry(b: &GeometricBraid) -> Result<Symmetry, PFiberError> {
    let r = b.detect_symmetry()?;
    if r.contains(Symmetry::UEven) {
        return Ok(Symmetry::UEven);
    }
    let s = b.nonzero_count();
    let mut best = None;
    for &sym in &r.detected {
        if let Symmetry::KSymmetric(k) = sym {
            if k >= 2 && k.is_power_of_two() && s % k as usize == 0 && best.is_none_or(|b: u32| k < b) {
                best = Some(k);
            }
        }
    }
    if let Some(k) = best {
        return Ok(Symmetry::KSymmetric(k));
    }
    if r.contains(Symmetry::ODD) {
        return Ok(Symmetry::ODD);
    }
    Err(PFiberError::Loop(LoopError::SymmetryAbsent(Symmetry::UEven)))
}

/// Denominator `q` of the face line used for a loop with this symmetry.
pub fn denominator(sym: Symmetry) -> u32 {
    match sym {
        Symmetry::KSymmetric(k) if k >= 2 => k,
        _ => 1,
    }
}

/// Builds the strongly inner non-degenerate polynomial of a compatible
/// sequence: each loop is re-synthesized from its braid under the given (or
/// detected) symmetry, placed on a line of strictly decreasing slope chosen
/// greedily from the last face, and the pieces are glued.
pub fn realize(seq: &[PFiberData], symmetries: &[Option<Symmetry>], cfg: &Config) -> Result<Realization, PFiberError> {
    let report = verify_compatible(seq, cfg);
    if !report.compatible {
        return Err(PFiberError::NotCompatible(report.failure.unwrap_or_default()));
    }
    let n = cfg.grid.loop_samples;
    let count = seq.len();
    let mut syms = Vec::with_capacity(count);
    let mut loops = Vec::with_capacity(count);
    let mut braids = Vec::with_capacity(count);
    for (i, d) in seq.iter().enumerate() {
        let b = d.braid_loop.track(n)?;
        let sym = match symmetries.get(i).copied().flatten() {
            Some(s) => s,
            None => choose_symmetry(&b)?,
        };
        let fb = LoopPoly::from_braid(&b, sym, None, cfg)?;
        syms.push(sym);
        loops.push(fb.loop_poly);
        braids.push(b);
    }

    // ã_N = 1, ã_{i−1} = b̃_i·ã_i.
    let mut coeffs = vec![TrigPoly::one(); count];
    for i in (1..count).rev() {
        coeffs[i - 1] = loops[i].lowest() * &coeffs[i];
    }
    let mut face_loops = Vec::with_capacity(count);
    for i in 0..count {
        let m = seq[i].o_mult;
        let mut c = vec![TrigPoly::zero(); m];
        c.extend(loops[i].coeffs().iter().map(|x| x * &coeffs[i]));
        if i > 0 {
            c[m] = coeffs[i - 1].clone();
        }
        *c.last_mut().expect("nonempty") = coeffs[i].clone();
        face_loops.push(LoopPoly::unchecked(c)?);
    }

    // Slopes k_i/q_i strictly decreasing, chosen from the tail.
    let max_k = cfg.search.max_k;
    let mut lines = vec![FaceLine { k: 1, q: 1, top: 0, nu_end: 0 }; count];
    let mut nu_end = 0u32;
    for i in (0..count).rev() {
        let q = denominator(syms[i]);
        let top = face_loops[i].degree();
        let base = FaceLine { k: 1, q, top, nu_end };
        let from = if i + 1 < count {
            let next = lines[i + 1];
            ((next.k as u64 * q as u64) / next.q as u64) as u32 + 1
        } else {
            1
        };
        let k = base.smallest_admissible(&face_loops[i], from, None, max_k).ok_or(PFiberError::WeightSelectionFailed(i + 1))?;
        lines[i] = FaceLine { k, ..base };
        let s_i = loops[i].degree() as u64;
        nu_end += ((k as u64 * s_i) / q as u64) as u32;
    }
    let parts: Vec<MixedPoly> = face_loops.iter().zip(&lines).map(|(g, l)| from_loop_line(g, l)).collect::<Result<_, _>>()?;
    let poly = glue(&parts)?;
    let weights: Vec<WeightVector> = lines.iter().map(FaceLine::weight).collect();

    let mut roundtrip_errors = Vec::with_capacity(count);
    let mut braid_matches = Vec::with_capacity(count);
    for i in 0..count {
        let face = face_function(&poly, &weights[i]);
        let g = g_polynomial(&face, &weights[i])?.to_loop_poly()?;
        let original = seq[i].braid_loop.mul_trig(&seq[i].coefficient).mul_u_power(seq[i].o_mult);
        roundtrip_errors.push(g.max_coeff_diff(&original));
        let (q, _) = g.strip_zero_roots();
        let matches = match q.track(n) {
            Ok(tb) => {
                tb.closure() == braids[i].closure() && tb.linking_data().canonical() == braids[i].linking_data().canonical()
            }
            Err(_) => false,
        };
        braid_matches.push(matches);
    }
    let strong = check_strongly_inner_nondegenerate(&poly, cfg);
    let weak = check_inner_nondegenerate(&poly, cfg);
    Ok(Realization { poly, symmetries: syms, lines, weights, face_loops, roundtrip_errors, braid_matches, strong, weak })
}

/// Outcome of [`proposition_t`].
#[derive(Clone, Debug, Serialize)]
pub struct PropositionT {
    /// Every `m > M` gives a P-fibered `B²` with coefficient `−e^{2imt}`.
    pub m_bound: u64,
    /// Lower bound on the branch speeds of `B²` with constant coefficient,
    /// net of the slack.
    pub branch_speed_lower_bound: f64,
    /// Set when the bound holds for all `m > M` because the coefficient's
    /// speed `2m` grows while the branch speeds do not depend on `m`.
    pub dominance: bool,
    /// Certificates of `B²` with coefficient `−e^{2imt}` for `m = M+1, M+2, M+3`.
    pub certificates: Vec<(u64, PFiberCertificate)>,
    pub realization: Realization,
    /// `T^{2m}ι_s(B²)` for `m = M + 1`.
    pub family_word: BraidWord,
}

/// `T = σ_s σ_{s−1} … σ_1 σ_1 … σ_s` on `s + 1` strands.
pub fn twist_word(s: usize) -> BraidWord {
    let mut w: Vec<Generator> = (1..=s).rev().map(Generator::pos).collect();
    w.extend((1..=s).map(Generator::pos));
    BraidWord::new(s + 1, w).expect("indices in range")
}

/// The sequence `(B² with a = −e^{2imt}, u − e^{2imt} with O-multiplicity s)`.
pub fn proposition_sequence(g2: &LoopPoly, m: u64, cfg: &Config) -> Result<Vec<PFiberData>, PFiberError> {
    let s = g2.degree();
    let e = TrigPoly::monomial(2 * m as i64, Complex64::new(1.0, 0.0));
    let circle = LoopPoly::monic(vec![-&e]);
    Ok(vec![PFiberData::new(g2.clone(), 0, -&e, cfg)?, PFiberData::new(circle, s, TrigPoly::one(), cfg)?])
}

pub fn proposition_t(b: &BraidWord, cfg: &Config) -> Result<PropositionT, PFiberError> {
    let b2 = b.power(2);
    let geo = GeometricBraid::from_word(&b2, cfg.grid.braid_samples);
    let g2 = LoopPoly::from_braid(&geo, Symmetry::UEven, None, cfg)?.loop_poly;
    let base = certify_function(&g2, 0, &TrigPoly::one(), cfg.grid.loop_samples, cfg);
    if base.certificate.status == Status::Inconclusive && base.branches.is_empty() {
        return Err(PFiberError::BranchCollision(base.certificate.notes.join("; ")));
    }
    let lo = base.branches.iter().map(|br| br.min_speed).fold(f64::INFINITY, f64::min) - base.certificate.slack;
    let m_bound = if lo.is_finite() { (-lo / 2.0).floor().max(0.0) as u64 } else { 0 };
    let mut certificates = Vec::new();
    for m in m_bound + 1..=m_bound + 3 {
        let seq = proposition_sequence(&g2, m, cfg)?;
        certificates.push((m, certify(&seq[0], cfg)));
    }
    let dominance = certificates.iter().all(|(_, c)| c.pass());
    let m = m_bound + 1;
    let seq = proposition_sequence(&g2, m, cfg)?;
    let realization = realize(&seq, &[Some(Symmetry::UEven), Some(Symmetry::UEven)], cfg)?;
    let t = twist_word(b.strands);
    let family_word = t.power(2 * m as i64).concat(&b2.include(1));
    Ok(PropositionT { m_bound, branch_speed_lower_bound: lo, dominance, certificates, realization, family_word })
}

/// JSON form of a sequence: `{"braids": [loop...], "o_mults": [...],
/// "coefficients": [trigpoly...]}` with optional `"multiplicities"` and
/// `"symmetries"` (names such as `"u-even"`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub braids: Vec<LoopPoly>,
    pub o_mults: Vec<usize>,
    pub coefficients: Vec<TrigPoly>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplicities: Option<Vec<Option<Vec<u32>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetries: Option<Vec<Option<Symmetry>>>,
}

impl SequenceSpec {
    pub fn to_data(&self, cfg: &Config) -> Result<Vec<PFiberData>, PFiberError> {
        let n = self.braids.len();
        if self.o_mults.len() != n || self.coefficients.len() != n {
            return Err(PFiberError::Format(format!(
                "{} braids, {} o_mults and {} coefficients",
                n,
                self.o_mults.len(),
                self.coefficients.len()
            )));
        }
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut d = PFiberData::new(self.braids[i].clone(), self.o_mults[i], self.coefficients[i].clone(), cfg)?;
            if let Some(Some(m)) = self.multiplicities.as_ref().and_then(|v| v.get(i)) {
                d = d.with_multiplicities(m.clone(), cfg)?;
            }
            out.push(d);
        }
        Ok(out)
    }

    pub fn symmetry_tags(&self) -> Vec<Option<Symmetry>> {
        self.symmetries.clone().unwrap_or_else(|| vec![None; self.braids.len()])
    }
}

/// The closed-form critical value `−(s^s/(s+1)^{s+1})·e^{2im(s+1)t}` of
/// `u^s(u − e^{2imt})`.
pub fn closed_form_circle_value(s: u32, m: u32, t: f64) -> Complex64 {
    let s = s as f64;
    -(s.powf(s) / (s + 1.0).powf(s + 1.0)) * Complex64::from_polar(1.0, 2.0 * m as f64 * (s + 1.0) * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(l: i64) -> TrigPoly {
        TrigPoly::monomial(l, Complex64::new(1.0, 0.0))
    }

    fn cfg() -> Config {
        Config::default()
    }

    #[test]
    fn critical_value_examples() {
        let d = PFiberData::new(LoopPoly::monic(vec![-&e(2)]), 1, TrigPoly::one(), &cfg()).unwrap();
        let v = critical_values(&d, 0.3).unwrap();
        assert_eq!(v.len(), 1);
        assert!((v[0] - closed_form_circle_value(1, 1, 0.3)).norm() < 1e-14);
        let d = PFiberData::plain(LoopPoly::monic(vec![-&e(2), TrigPoly::zero()]));
        let v = critical_values(&d, 0.7).unwrap();
        assert!((v[0] + Complex64::from_polar(1.0, 1.4)).norm() < 1e-14);
    }

    #[test]
    fn certify_examples() {
        let g = LoopPoly::monic(vec![-&e(2), TrigPoly::zero()]);
        let c = certify(&PFiberData::plain(g.clone()), &cfg());
        assert!(c.pass() && (c.margin() - 2.0).abs() < 1e-9);
        let c = certify(&PFiberData::new(g, 0, e(-2), &cfg()).unwrap(), &cfg());
        assert!(c.certificate.is_fail());
        let c = certify(&PFiberData::new(LoopPoly::monic(vec![-&e(2)]), 1, TrigPoly::one(), &cfg()).unwrap(), &cfg());
        assert!(c.pass() && (c.margin() - 4.0).abs() < 1e-9);
        assert_eq!(c.cycles[0].winding, 4);
    }

    #[test]
    fn coefficient_speed_examples() {
        let g = LoopPoly::monic(vec![-&e(2), TrigPoly::zero()]);
        assert_eq!(minimal_coefficient_speed(&g, 0, &cfg()).unwrap().0, 0);
        let g = LoopPoly::monic(vec![-&e(-2), TrigPoly::zero()]);
        assert_eq!(minimal_coefficient_speed(&g, 0, &cfg()).unwrap().0, 0);
        let c = |x: f64| TrigPoly::constant(Complex64::new(x, 0.0));
        let g = LoopPoly::monic(vec![c(2.0), c(-3.0)]);
        assert_eq!(minimal_coefficient_speed(&g, 0, &cfg()).unwrap().0, 1);
    }

    #[test]
    fn power_examples() {
        let mut cfg = cfg();
        cfg.search.max_power_scan = 4;
        let g = LoopPoly::monic(vec![-&e(2), TrigPoly::zero()]);
        let r = minimal_power(&g, 0, &e(-5), &cfg).unwrap();
        assert_eq!(r.q, 3);
        assert!(r.next.pass());
        let r = minimal_power(&g, 0, &e(-4), &cfg).unwrap();
        assert_eq!(r.q, 2);
        assert!(r.next.pass());
        assert_eq!(minimal_power(&g, 0, &TrigPoly::one(), &cfg).unwrap().q, 0);
    }

    #[test]
    fn compatible_examples() {
        let cfg = cfg();
        let g1 = LoopPoly::monic(vec![-&e(2), TrigPoly::zero()]);
        let g2 = LoopPoly::monic(vec![-&e(4)]);
        let seq = vec![
            PFiberData::new(g1.clone(), 0, -&e(4), &cfg).unwrap(),
            PFiberData::new(g2.clone(), 2, TrigPoly::one(), &cfg).unwrap(),
        ];
        let r = verify_compatible(&seq, &cfg);
        assert!(r.compatible, "{:?}", r.failures);
        assert!((r.certificates[0].margin() - 6.0).abs() < 1e-6);
        assert!((r.certificates[1].margin() - 12.0).abs() < 1e-6);
        let bad = vec![PFiberData::plain(g1.clone()), PFiberData::new(g2, 2, TrigPoly::one(), &cfg).unwrap()];
        let r = verify_compatible(&bad, &cfg);
        assert!(!r.compatible);
        assert!(r.failure.unwrap().contains("b_i a_i"));
        assert!(verify_compatible(&[PFiberData::plain(g1)], &cfg).compatible);
    }

    #[test]
    fn twist_word_shape() {
        assert_eq!(twist_word(2).to_string(), "s=3: s2 s1 s1 s2");
    }

    #[test]
    fn realize_two_faces() {
        let cfg = cfg();
        let seq = vec![
            PFiberData::new(LoopPoly::monic(vec![-&e(2), TrigPoly::zero()]), 0, -&e(4), &cfg).unwrap(),
            PFiberData::new(LoopPoly::monic(vec![-&e(4)]), 2, TrigPoly::one(), &cfg).unwrap(),
        ];
        let r = realize(&seq, &[None, None], &cfg).unwrap();
        eprintln!("{} {:?} {:?}", r.poly, r.weights, r.roundtrip_errors);
        assert_eq!(crate::mixedpoly::newton(&r.poly).unwrap().faces.len(), 2);
        assert!(r.roundtrip_errors.iter().all(|&x| x < 1e-10));
        assert!(r.braid_matches.iter().all(|&b| b));
        assert!(r.strong.is_pass(), "{:?}", r.strong);
    }

    #[test]
    fn proposition_instance() {
        let cfg = cfg();
        let w: BraidWord = "s=2: s1".parse().unwrap();
        let p = proposition_t(&w, &cfg).unwrap();
        eprintln!("M={} lo={} {:?}", p.m_bound, p.branch_speed_lower_bound, p.certificates.iter().map(|(m, c)| (*m, c.margin())).collect::<Vec<_>>());
        assert_eq!(p.m_bound, 0);
        assert!(p.dominance);
        for (m, c) in &p.certificates {
            let want = 2.0 * *m as f64 + 2.0;
            assert!((c.margin() - want).abs() / want < 0.05);
        }
    }
}
