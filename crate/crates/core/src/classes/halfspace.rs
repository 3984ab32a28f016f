//! Halfspaces `1[w . x + b >= 0]` and an exact hard-margin solver for small
//! samples.
//!
//! The maximum-margin separator is determined by at most `dim + 1` support
//! vectors, so it can be found by enumerating candidate support sets: for
//! each set with both labels, solve the equality-constrained problem
//! (minimize `|w|^2` subject to `y_i (w . x_i + b) = 1` on the set), keep the
//! solutions that separate the whole sample with margin at least one, and
//! return the one of smallest norm.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{Instance, Sample, Universe};
use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;
pub const MAX_POINTS: usize = 200;
pub const MAX_SUBSETS: u64 = 20_000_000;

const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub w: Vec<f64>,
    pub b: f64,
}

impl Halfspace {
    pub fn new(w: Vec<f64>, b: f64) -> Self {
        Halfspace { w, b }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn is_finite(&self) -> bool {
        self.b.is_finite() && self.w.iter().all(|v| v.is_finite())
    }

    pub fn score(&self, p: &[f64]) -> f64 {
        self.w.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() + self.b
    }

    pub fn evaluate(&self, x: &Instance) -> Result<bool> {
        match x.as_point() {
            Some(p) if p.len() == self.dim() && p.iter().all(|v| v.is_finite()) => Ok(self.score(p) >= 0.0),
            _ => Err(Error::UniverseMismatch {
                instance: x.to_string(),
                universe: Universe::Real { dim: self.dim() }.to_string(),
            }),
        }
    }
}

/// A solved hard-margin problem: the unit-normalized separator and its
/// geometric margin (`+inf` for single-label samples).
#[derive(Clone, Debug, PartialEq)]
pub struct MaxMargin {
    pub halfspace: Halfspace,
    pub margin: f64,
}

type Labeled = Vec<(Vec<f64>, f64)>;

/// Distinct points with `+1/-1` labels; conflicting duplicates are not
/// separable.
fn distinct_points(sample: &Sample, dim: usize) -> Result<Option<Labeled>> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::limit(
            "max_margin_halfspace",
            format!("dim = {dim} (max {MAX_DIM})"),
        ));
    }
    let universe = Universe::Real { dim };
    sample.check(&universe)?;
    let mut sorted: Vec<(&Instance, bool)> = sample.iter().map(|e| (&e.x, e.y)).collect();
    sorted.sort();
    sorted.dedup();
    let mut out: Vec<(Vec<f64>, f64)> = Vec::with_capacity(sorted.len());
    for w in sorted.windows(2) {
        if w[0].0 == w[1].0 {
            return Ok(None);
        }
    }
    for (x, y) in sorted {
        let p = x.as_point().expect("checked against universe").to_vec();
        out.push((p, if y { 1.0 } else { -1.0 }));
    }
    if out.len() > MAX_POINTS {
        return Err(Error::limit(
            "max_margin_halfspace",
            format!("{} distinct points (max {MAX_POINTS})", out.len()),
        ));
    }
    Ok(Some(out))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves the equality-constrained problem on `set`; returns `(w, b)`.
fn solve_support_set(pts: &[(Vec<f64>, f64)], set: &[usize], dim: usize) -> Option<(Vec<f64>, f64)> {
    let k = set.len();
    let mut m = DMatrix::<f64>::zeros(k + 1, k + 1);
    let mut rhs = DVector::<f64>::zeros(k + 1);
    for (r, &i) in set.iter().enumerate() {
        let (xi, yi) = &pts[i];
        for (c, &j) in set.iter().enumerate() {
            let (xj, yj) = &pts[j];
            m[(r, c)] = yi * yj * dot(xi, xj);
        }
        m[(r, k)] = *yi;
        m[(k, r)] = *yi;
        rhs[r] = 1.0;
    }
    // SVD handles rank-deficient sets (e.g. collinear points); any exact
    // solution of the stationarity system gives the same optimal w.
    let svd = m.clone().svd(true, true);
    let sol = svd.solve(&rhs, 1e-12).ok()?;
    let resid = (&m * &sol - &rhs).amax();
    if !resid.is_finite() || resid > 1e-7 {
        return None;
    }
    let mut w = vec![0.0; dim];
    for (r, &i) in set.iter().enumerate() {
        let (xi, yi) = &pts[i];
        for d in 0..dim {
            w[d] += sol[r] * yi * xi[d];
        }
    }
    Some((w, sol[k]))
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Exact maximum-margin separator of `sample` in `R^dim`.
pub fn solve_max_margin(sample: &Sample, dim: usize) -> Result<MaxMargin> {
    let pts = distinct_points(sample, dim)?.ok_or(Error::NotSeparable)?;
    let has_pos = pts.iter().any(|p| p.1 > 0.0);
    let has_neg = pts.iter().any(|p| p.1 < 0.0);
    if !(has_pos && has_neg) {
        // Canonical choice: w = 0 and the bias fixes the single label.
        let b = if has_neg { -1.0 } else { 1.0 };
        return Ok(MaxMargin {
            halfspace: Halfspace::new(vec![0.0; dim], b),
            margin: f64::INFINITY,
        });
    }
    let n = pts.len() as u64;
    let total: u64 = (2..=(dim as u64 + 1).min(n)).map(|k| binomial(n, k)).sum();
    if total > MAX_SUBSETS {
        return Err(Error::limit(
            "max_margin_halfspace",
            format!("{total} candidate support sets (max {MAX_SUBSETS})"),
        ));
    }

    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    for k in 2..=(dim + 1).min(pts.len()) {
        for set in (0..pts.len()).combinations(k) {
            let first = pts[set[0]].1;
            if set.iter().all(|&i| pts[i].1 == first) {
                continue;
            }
            let Some((w, b)) = solve_support_set(&pts, &set, dim) else {
                continue;
            };
            let norm = dot(&w, &w).sqrt();
            if norm.is_nan() || norm <= 0.0 || !norm.is_finite() {
                continue;
            }
            let feasible = pts.iter().all(|(x, y)| y * (dot(&w, x) + b) >= 1.0 - FEASIBILITY_TOL);
            if !feasible {
                continue;
            }
            let wn: Vec<f64> = w.iter().map(|v| v / norm).collect();
            let bn = b / norm;
            let better = match &best {
                None => true,
                Some((bnorm, bw, bb)) => {
                    if norm < bnorm * (1.0 - 1e-12) {
                        true
                    } else if norm <= bnorm * (1.0 + 1e-12) {
                        // Numerically tied: lexicographically smallest (w, b).
                        lex_less(&wn, bn, bw, *bb)
                    } else {
                        false
                    }
                }
            };
            if better {
                best = Some((norm, wn, bn));
            }
        }
    }
    let (norm, w, b) = best.ok_or(Error::NotSeparable)?;
    Ok(MaxMargin {
        halfspace: Halfspace::new(w, b),
        margin: 1.0 / norm,
    })
}

fn lex_less(w: &[f64], b: f64, w2: &[f64], b2: f64) -> bool {
    for (x, y) in w
        .iter()
        .chain(std::iter::once(&b))
        .zip(w2.iter().chain(std::iter::once(&b2)))
    {
        match x.total_cmp(y) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            _ => {}
        }
    }
    false
}

/// Exact maximum-margin separator, unit-normalized.
pub fn max_margin_halfspace(sample: &Sample, dim: usize) -> Result<Halfspace> {
    solve_max_margin(sample, dim).map(|m| m.halfspace)
}

/// Exact linear-separability test (within the solver's size limits).
pub fn is_separable(sample: &Sample, dim: usize) -> Result<bool> {
    match solve_max_margin(sample, dim) {
        Ok(_) => Ok(true),
        Err(Error::NotSeparable) => Ok(false),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Example;
    use crate::seed::Seed;
    use rand::Rng;

    fn pt(c: &[f64], y: bool) -> Example {
        Example::new(Instance::point(c.to_vec()), y)
    }

    #[test]
    fn one_dimensional_midpoint() {
        let s: Sample = [pt(&[0.0], false), pt(&[2.0], true)].into_iter().collect();
        let m = solve_max_margin(&s, 1).unwrap();
        assert!((m.halfspace.w[0] - 1.0).abs() < 1e-12);
        assert!((m.halfspace.b + 1.0).abs() < 1e-12);
        assert!((m.margin - 1.0).abs() < 1e-12);
    }

    #[test]
    fn perpendicular_bisector() {
        let s: Sample = [pt(&[0.0, 0.0], false), pt(&[2.0, 0.0], true)].into_iter().collect();
        let h = max_margin_halfspace(&s, 2).unwrap();
        assert!((h.w[0] - 1.0).abs() < 1e-12 && h.w[1].abs() < 1e-12);
        assert!((h.b + 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_label_and_conflicts() {
        let s: Sample = [pt(&[0.0, 1.0], true), pt(&[3.0, 1.0], true)].into_iter().collect();
        let h = max_margin_halfspace(&s, 2).unwrap();
        assert_eq!(h, Halfspace::new(vec![0.0, 0.0], 1.0));
        let c: Sample = [pt(&[1.0, 1.0], true), pt(&[1.0, 1.0], false)].into_iter().collect();
        assert!(matches!(max_margin_halfspace(&c, 2), Err(Error::NotSeparable)));
        assert!(!is_separable(&c, 2).unwrap());
    }

    #[test]
    fn xor_is_not_separable() {
        let s: Sample = [
            pt(&[0.0, 0.0], false),
            pt(&[1.0, 1.0], false),
            pt(&[1.0, 0.0], true),
            pt(&[0.0, 1.0], true),
        ]
        .into_iter()
        .collect();
        assert!(!is_separable(&s, 2).unwrap());
    }

    #[test]
    fn limits() {
        let s: Sample = [pt(&[0.0; 4], true)].into_iter().collect();
        assert!(matches!(max_margin_halfspace(&s, 4), Err(Error::LimitExceeded { .. })));
        let s1: Sample = [pt(&[0.0], true)].into_iter().collect();
        assert!(max_margin_halfspace(&s1, 2).is_err());
    }

    /// Margin of the best offset for unit direction `u`.
    fn margin_along(u: &[f64], pts: &[(Vec<f64>, bool)]) -> f64 {
        let lo = pts
            .iter()
            .filter(|p| p.1)
            .map(|p| dot(u, &p.0))
            .fold(f64::INFINITY, f64::min);
        let hi = pts
            .iter()
            .filter(|p| !p.1)
            .map(|p| dot(u, &p.0))
            .fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lo - hi)
    }

    /// Independent oracle: dense angle grid, then golden-section refinement.
    fn grid_margin(pts: &[(Vec<f64>, bool)]) -> f64 {
        let f = |a: f64| margin_along(&[a.cos(), a.sin()], pts);
        let steps = 20_000;
        let h = std::f64::consts::TAU / steps as f64;
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in 0..steps {
            let a = i as f64 * h;
            let v = f(a);
            if v > best.0 {
                best = (v, a);
            }
        }
        let (mut lo, mut hi) = (best.1 - h, best.1 + h);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let m1 = hi - g * (hi - lo);
            let m2 = lo + g * (hi - lo);
            if f(m1) < f(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        best.0.max(f(0.5 * (lo + hi)))
    }

    #[test]
    fn agrees_with_grid_search() {
        let mut rng = Seed::new(2024).rng();
        let mut checked = 0;
        while checked < 60 {
            // Random separable instance: label by a random line, drop points near it.
            let ang: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let off: f64 = rng.random_range(-0.5..0.5);
            let k = rng.random_range(2..9);
            let mut pts = Vec::new();
            while pts.len() < k {
                let p = vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
                let s = ang.cos() * p[0] + ang.sin() * p[1] + off;
                if s.abs() > 0.05 {
                    pts.push((p, s > 0.0));
                }
            }
            if pts.iter().all(|p| p.1) || pts.iter().all(|p| !p.1) {
                continue;
            }
            let sample: Sample = pts.iter().map(|(p, y)| pt(p, *y)).collect();
            let m = solve_max_margin(&sample, 2).unwrap();
            let oracle = grid_margin(&pts);
            assert!((m.margin - oracle).abs() < 1e-6, "{} vs {}", m.margin, oracle);
            for (p, y) in &pts {
                assert_eq!(m.halfspace.evaluate(&Instance::point(p.clone())).unwrap(), *y);
            }
            checked += 1;
        }
    }

    #[test]
    fn deterministic() {
        let s: Sample = [
            pt(&[0.0, 0.0], false),
            pt(&[1.0, 0.0], false),
            pt(&[0.0, 2.0], true),
            pt(&[1.0, 2.0], true),
        ]
        .into_iter()
        .collect();
        let a = max_margin_halfspace(&s, 2).unwrap();
        let b = max_margin_halfspace(&s, 2).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
        assert!(a.w[0].abs() < 1e-9 && (a.w[1] - 1.0).abs() < 1e-9);
    }
}
