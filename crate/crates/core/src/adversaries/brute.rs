//! Exhaustive search over samples within the edit budget.

use itertools::Itertools;

use super::AttackOutcome;
use crate::data::{Example, Instance, Sample};
use crate::error::{Error, Result};
use crate::learners::Learner;

/// Cap on `C(n, budget) * |universe|^budget`.
pub const BRUTE_LIMIT: f64 = 1e7;

/// `C(n, k) * u^k` as a float (saturates instead of overflowing).
pub fn enumeration_size(n: usize, k: usize, u: usize) -> f64 {
    let k = k.min(n);
    let mut c = 1.0f64;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c * (u as f64).powi(k as i32)
}

/// Calls `visit` on every sample differing from `sample` at exactly `k`
/// positions, with replacements drawn from `universe`, in a fixed order:
/// position sets lexicographically, then replacement tuples by universe
/// index. Returns the first sample accepted by `visit`.
pub(crate) fn search_exact_k(
    sample: &Sample,
    universe: &[Example],
    k: usize,
    mut visit: impl FnMut(&Sample) -> Result<bool>,
) -> Result<Option<Sample>> {
    if k == 0 {
        return Ok(if visit(sample)? { Some(sample.clone()) } else { None });
    }
    let mut work = sample.clone();
    for positions in (0..sample.len()).combinations(k) {
        let options: Vec<Vec<&Example>> = positions
            .iter()
            .map(|&p| universe.iter().filter(|e| **e != sample[p]).collect())
            .collect();
        if options.iter().any(|o| o.is_empty()) {
            continue;
        }
        let mut digits = vec![0usize; k];
        'tuples: loop {
            for (j, &p) in positions.iter().enumerate() {
                work[p] = options[j][digits[j]].clone();
            }
            if visit(&work)? {
                return Ok(Some(work));
            }
            // Odometer, last position fastest.
            let mut j = k;
            loop {
                if j == 0 {
                    break 'tuples;
                }
                j -= 1;
                digits[j] += 1;
                if digits[j] < options[j].len() {
                    break;
                }
                digits[j] = 0;
            }
        }
        for &p in &positions {
            work[p] = sample[p].clone();
        }
    }
    Ok(None)
}

/// Ground-truth adversary: tries every sample with 0, 1, ..., `budget` edits
/// and returns the first that makes `learner` output `target` at `x`.
pub fn brute_force_attack(
    learner: &dyn Learner,
    sample: &Sample,
    x: &Instance,
    target: bool,
    budget: usize,
    universe: &[Example],
) -> Result<AttackOutcome> {
    let size = enumeration_size(sample.len(), budget, universe.len());
    if size > BRUTE_LIMIT {
        return Err(Error::limit(
            "brute_force_attack",
            format!(
                "C({}, {budget}) * {}^{budget} = {size:.3e} > {BRUTE_LIMIT:e}",
                sample.len(),
                universe.len()
            ),
        ));
    }
    for k in 0..=budget.min(sample.len()) {
        let hit = search_exact_k(sample, universe, k, |s| Ok(learner.predict(s, x)? == target))?;
        if let Some(s) = hit {
            return Ok(AttackOutcome {
                success: true,
                sample: s,
                edits: k,
                budget,
                exhaustive: false,
            });
        }
    }
    Ok(AttackOutcome::failure(sample, budget, true))
}
