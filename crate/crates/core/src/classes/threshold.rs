//! One-dimensional thresholds `1[x >= theta]`.

use crate::data::Sample;
use crate::error::{Error, Result};

/// `(largest x labeled 0, smallest x labeled 1)`, with `-inf` / `+inf` when a
/// label is absent. Non-scalar instances yield `None`.
pub fn label_extremes(sample: &Sample) -> Option<(f64, f64)> {
    let mut max0 = f64::NEG_INFINITY;
    let mut min1 = f64::INFINITY;
    for e in sample.iter() {
        let v = e.x.as_scalar()?;
        if e.y {
            min1 = min1.min(v);
        } else {
            max0 = max0.max(v);
        }
    }
    Some((max0, min1))
}

/// Some threshold labels `sample` perfectly iff every 0 lies strictly left of
/// every 1.
pub fn is_realizable(sample: &Sample) -> bool {
    matches!(label_extremes(sample), Some((max0, min1)) if max0 < min1)
}

/// Smallest `theta` among `{sample points} u {+inf}` minimizing empirical
/// error. In the realizable case this is the smallest point labeled 1.
pub fn erm(sample: &Sample) -> Result<f64> {
    let mut pts: Vec<(f64, bool)> = Vec::with_capacity(sample.len());
    for e in sample.iter() {
        let v =
            e.x.as_scalar()
                .ok_or_else(|| Error::unsupported("threshold erm", format!("instance {}", e.x)))?;
        pts.push((v, e.y));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    // At theta = +inf everything is predicted 0: the errors are the ones.
    let mut err: usize = pts.iter().filter(|p| p.1).count();
    let mut best = (err, f64::INFINITY);
    // Sweep theta downward through the distinct points; lowering theta past
    // a group flips its predictions to 1.
    let mut i = pts.len();
    while i > 0 {
        let v = pts[i - 1].0;
        let mut j = i;
        while j > 0 && pts[j - 1].0 == v {
            if pts[j - 1].1 {
                err -= 1;
            } else {
                err += 1;
            }
            j -= 1;
        }
        if err <= best.0 {
            best = (err, v);
        }
        i = j;
    }
    Ok(best.1)
}

/// Maximum-margin threshold: the midpoint of the gap between the classes.
/// Single-label samples map to `-inf` (all ones) or `+inf` (all zeros).
pub fn max_margin(sample: &Sample) -> Result<f64> {
    let (max0, min1) = label_extremes(sample)
        .ok_or_else(|| Error::unsupported("threshold max-margin", "non-scalar instances".to_string()))?;
    if max0 >= min1 {
        return Err(Error::NotSeparable);
    }
    Ok(match (max0.is_finite(), min1.is_finite()) {
        (true, true) => 0.5 * (max0 + min1),
        (false, _) => f64::NEG_INFINITY,
        (true, false) => f64::INFINITY,
    })
}
