//! Univariate complex root finding (Aberth–Ehrlich iteration) and
//! continuation of roots along a closed loop of polynomials.

use std::f64::consts::TAU;

use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum RootError {
    #[error("leading coefficient vanishes")]
    LeadingVanishes,
    #[error("root solver did not converge (residual {residual:.3e})")]
    SolverDiverged { residual: f64 },
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum TrackError {
    #[error("roots come closer than the tracking resolution near t = {t:.6}")]
    MarginViolated { t: f64 },
    #[error(transparent)]
    Root(#[from] RootError),
}

/// Evaluates `Σ c_i z^i` and its derivative by Horner's rule.
pub fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn trim(coeffs: &[Complex64]) -> &[Complex64] {
    let mut n = coeffs.len();
    while n > 0 && coeffs[n - 1] == Complex64::new(0.0, 0.0) {
        n -= 1;
    }
    &coeffs[..n]
}

/// Roots of `Σ_{i=0}^{n} c_i z^i` (coefficients listed from the constant term up).
///
/// `seeds`, when given with exactly `n` entries, warm-starts the iteration.
/// The result has exactly `n` entries, in seed order when seeds were supplied.
pub fn poly_roots(coeffs: &[Complex64], seeds: Option<&[Complex64]>) -> Result<Vec<Complex64>, RootError> {
    let n = coeffs.len().saturating_sub(1);
    if coeffs.is_empty() || trim(coeffs).len() != coeffs.len() {
        return Err(RootError::LeadingVanishes);
    }
    let lead = coeffs[n];
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![-coeffs[0] / lead]),
        _ => {}
    }
    let scale: f64 = coeffs.iter().map(|c| c.norm()).sum();

    let mut z: Vec<Complex64> = match seeds {
        Some(s) if s.len() == n => {
            let mut z = s.to_vec();
            // Separate coincident seeds so the Aberth correction is defined.
            for i in 0..n {
                for j in 0..i {
                    if (z[i] - z[j]).norm() < 1e-12 * (1.0 + z[i].norm()) {
                        let bump = Complex64::from_polar(1e-6 * (1.0 + z[i].norm()), 0.7 + i as f64);
                        z[i] += bump;
                    }
                }
            }
            z
        }
        _ => {
            let r = (0..n)
                .map(|i| (coeffs[i] / lead).norm().powf(1.0 / (n - i) as f64))
                .fold(0.0, f64::max)
                .max(1e-3);
            (0..n).map(|k| Complex64::from_polar(r, 0.4 + TAU * k as f64 / n as f64)).collect()
        }
    };

    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let (p, dp) = horner(coeffs, z[i]);
            if p == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ratio = p / dp;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    s += (z[i] - z[j]).inv();
                }
            }
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if w.is_finite() {
                z[i] -= w;
                max_step = max_step.max(w.norm() / (1.0 + z[i].norm()));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    // Newton polish.
    for zi in z.iter_mut() {
        for _ in 0..2 {
            let (p, dp) = horner(coeffs, *zi);
            if dp.norm() > 0.0 {
                let step = p / dp;
                if step.is_finite() {
                    *zi -= step;
                }
            }
        }
    }
    let residual = z
        .iter()
        .map(|&zi| horner(coeffs, zi).0.norm() / (scale * (1.0 + zi.norm()).powi(n as i32)))
        .fold(0.0, f64::max);
    if !residual.is_finite() || residual > 1e-10 {
        return Err(RootError::SolverDiverged { residual });
    }
    Ok(z)
}

/// Minimum pairwise distance of a point set (`∞` for fewer than two points).
pub fn min_pairwise(points: &[Complex64]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..points.len() {
        for j in 0..i {
            m = m.min((points[i] - points[j]).norm());
        }
    }
    m
}

/// Greedy nearest-neighbour assignment: returns `perm` with `new[perm[i]]`
/// matched to `old[i]`, and the largest matched distance.
pub fn greedy_match(old: &[Complex64], new: &[Complex64]) -> (Vec<usize>, f64) {
    let n = old.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (i, a) in old.iter().enumerate() {
        for (j, b) in new.iter().enumerate() {
            pairs.push(((a - b).norm(), i, j));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; new.len()];
    let mut worst: f64 = 0.0;
    for (d, i, j) in pairs {
        if perm[i] == usize::MAX && !used[j] {
            perm[i] = j;
            used[j] = true;
            worst = worst.max(d);
        }
    }
    (perm, worst)
}

/// Roots followed continuously over the uniform grid `t_k = 2πk/n`, `k = 0..=n`.
#[derive(Clone, Debug)]
pub struct TrackedRoots {
    /// `paths[j][k]` is root `j` at `t_k`.
    pub paths: Vec<Vec<Complex64>>,
    /// Root `j` at `2π` equals root `closure[j]` at `0`.
    pub closure: Vec<usize>,
    /// Smallest pairwise distance seen on the grid.
    pub min_sep: f64,
}

/// Continues the roots of `coeffs_at(t)` (constant term first) around the loop.
/// Between grid points the step is halved whenever a root would move by more
/// than a quarter of the current root separation.
pub fn track_roots<F>(coeffs_at: F, n: usize) -> Result<TrackedRoots, TrackError>
where
    F: Fn(f64) -> Vec<Complex64>,
{
    let h = TAU / n as f64;
    let mut current = poly_roots(&coeffs_at(0.0), None)?;
    current.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let deg = current.len();
    let mut paths: Vec<Vec<Complex64>> = (0..deg).map(|j| vec![current[j]]).collect();
    let mut min_sep = min_pairwise(&current);
    let min_dt = h / (1u64 << 24) as f64;

    for k in 0..n {
        let t_end = if k + 1 == n { TAU } else { (k + 1) as f64 * h };
        let mut t = k as f64 * h;
        let mut dt = h;
        while t < t_end {
            let tn = if t + dt >= t_end - 1e-15 { t_end } else { t + dt };
            let cap = if deg > 1 { min_pairwise(&current) / 4.0 } else { f64::INFINITY };
            let accepted = match poly_roots(&coeffs_at(tn), Some(&current)) {
                Ok(new) => {
                    let (perm, worst) = greedy_match(&current, &new);
                    let sep = min_pairwise(&new);
                    if worst < cap && sep > 0.0 {
                        Some((perm.iter().map(|&j| new[j]).collect::<Vec<_>>(), sep))
                    } else {
                        None
                    }
                }
                Err(_) => None,
            };
            match accepted {
                Some((next, _)) => {
                    current = next;
                    t = tn;
                    dt = (dt * 2.0).min(h);
                }
                None => {
                    dt /= 2.0;
                    if dt < min_dt {
                        return Err(TrackError::MarginViolated { t });
                    }
                }
            }
        }
        min_sep = min_sep.min(min_pairwise(&current));
        for j in 0..deg {
            paths[j].push(current[j]);
        }
    }

    let start: Vec<Complex64> = paths.iter().map(|p| p[0]).collect();
    let (closure, worst) = greedy_match(&current, &start);
    if deg > 1 && worst >= min_sep / 4.0 {
        return Err(TrackError::MarginViolated { t: TAU });
    }
    Ok(TrackedRoots { paths, closure, min_sep })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quadratic_roots() {
        let mut r = poly_roots(&[c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], None).unwrap();
        r.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((r[0] + 1.0).norm() < 1e-14 && (r[1] - 1.0).norm() < 1e-14);
    }

    #[test]
    fn cube_roots_of_minus_one() {
        let r = poly_roots(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], None).unwrap();
        for z in r {
            assert!((z * z * z + 1.0).norm() < 1e-13);
        }
    }

    #[test]
    fn wilkinson_like() {
        // (z-1)(z-2)...(z-8)
        let mut coeffs = vec![c(1.0, 0.0)];
        for k in 1..=8 {
            let mut next = vec![c(0.0, 0.0); coeffs.len() + 1];
            for (i, &a) in coeffs.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= a * k as f64;
            }
            coeffs = next;
        }
        let mut r = poly_roots(&coeffs, None).unwrap();
        r.sort_by(|a, b| a.re.total_cmp(&b.re));
        for (k, z) in r.iter().enumerate() {
            assert!((z - c((k + 1) as f64, 0.0)).norm() < 1e-8);
        }
    }

    #[test]
    fn tracks_square_root_loop() {
        // u^2 - e^{it}: closure swaps the two roots.
        let tr = track_roots(|t| vec![-Complex64::from_polar(1.0, t), c(0.0, 0.0), c(1.0, 0.0)], 256).unwrap();
        assert_eq!(tr.closure, vec![1, 0]);
        assert!((tr.min_sep - 2.0).abs() < 1e-12);
    }
}
