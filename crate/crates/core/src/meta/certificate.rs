//! Per-query stability certificates for voting hypotheses.

use serde::Serialize;

use super::spv::VotingHypothesis;
use crate::adversaries::brute_force_attack;
use crate::data::{Example, Instance, Sample};
use crate::error::{Error, Result};
use crate::learners::Learner;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    /// Fraction of `n`; no sample within `floor(value * n)` edits changes
    /// the prediction.
    pub value: f64,
    pub x: Instance,
    pub prediction: bool,
    /// Base hypotheses agreeing with the prediction.
    pub agree: usize,
    pub disagree: usize,
    pub n: usize,
}

impl Certificate {
    /// `floor(value * n)`, robust to the division round trip.
    pub fn edits(&self) -> usize {
        (self.value * self.n as f64 + 1e-9).floor() as usize
    }
}

/// Fewest base predictions that must change to overturn the tie-rule vote,
/// given `agree` of `t` votes for `prediction`.
pub fn min_flips(prediction: bool, agree: usize, t: usize) -> usize {
    let half_up = t.div_ceil(2);
    if prediction {
        agree + 1 - half_up
    } else {
        // The disagreeing votes are ones; the vote becomes 1 at ceil(t/2).
        half_up - (t - agree)
    }
}

fn counts(vh: &VotingHypothesis, x: &Instance) -> Result<(bool, usize, usize)> {
    let ones = vh.ones(x)?;
    let t = vh.t();
    let pred = vh.predict(x)?;
    let agree = if pred { ones } else { t - ones };
    Ok((pred, agree, t - agree))
}

/// Tie-aware certificate: `(f_min - 1) / n`. Blocks are disjoint, so `k`
/// edits change at most `k` base hypotheses.
pub fn certificate_exact(vh: &VotingHypothesis, x: &Instance) -> Result<Certificate> {
    let (prediction, agree, disagree) = counts(vh, x)?;
    let f = min_flips(prediction, agree, vh.t());
    let n = vh.n();
    Ok(Certificate {
        value: f.saturating_sub(1) as f64 / n as f64,
        x: x.clone(),
        prediction,
        agree,
        disagree,
        n,
    })
}

/// Margin form `((a - b)/2 - 1) / n`, floored at zero.
pub fn certificate_paper(vh: &VotingHypothesis, x: &Instance) -> Result<Certificate> {
    let (prediction, agree, disagree) = counts(vh, x)?;
    let n = vh.n();
    let raw = ((agree as f64 - disagree as f64) / 2.0 - 1.0) / n as f64;
    Ok(Certificate {
        value: raw.max(0.0),
        x: x.clone(),
        prediction,
        agree,
        disagree,
        n,
    })
}

/// Exhaustive certificate radius over replacements from `universe`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleValue {
    /// Largest `k <= k_max` such that no sample within `k` edits changes
    /// the prediction.
    pub edits: usize,
    /// True when even `k_max` edits never changed it (the true value may be
    /// larger).
    pub saturated: bool,
}

pub const ORACLE_MAX_N: usize = 12;
pub const ORACLE_MAX_UNIVERSE: usize = 8;

/// The largest radius within which `learner`'s prediction at `x` is constant.
pub fn optimal_certificate_oracle(
    learner: &dyn Learner,
    sample: &Sample,
    x: &Instance,
    universe: &[Example],
    k_max: usize,
) -> Result<OracleValue> {
    if sample.len() > ORACLE_MAX_N || universe.len() > ORACLE_MAX_UNIVERSE {
        return Err(Error::limit(
            "optimal_certificate_oracle",
            format!(
                "n = {} (max {ORACLE_MAX_N}), |universe| = {} (max {ORACLE_MAX_UNIVERSE})",
                sample.len(),
                universe.len()
            ),
        ));
    }
    let y = learner.predict(sample, x)?;
    let out = brute_force_attack(learner, sample, x, !y, k_max, universe)?;
    Ok(if out.success {
        OracleValue {
            edits: out.edits - 1,
            saturated: false,
        }
    } else {
        OracleValue {
            edits: k_max,
            saturated: true,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::Hypothesis;
    use crate::learners::constant_learner;
    use crate::meta::partition::Partition;
    use proptest::prelude::*;

    fn vh(votes: &[bool], n: usize) -> VotingHypothesis {
        VotingHypothesis {
            hypotheses: votes.iter().map(|&b| Hypothesis::Constant(b)).collect(),
            partition: Partition::balanced(n, votes.len()).unwrap(),
            eta: None,
            base: "const".into(),
        }
    }

    #[test]
    fn exact_examples() {
        let x = Instance::Id(0);
        let c = certificate_exact(&vh(&[true; 7], 70), &x).unwrap();
        assert_eq!(min_flips(true, 7, 7), 4);
        assert!((c.value - 3.0 / 70.0).abs() < 1e-15);
        assert_eq!(c.edits(), 3);
        let tie = certificate_exact(&vh(&[true, false], 20), &x).unwrap();
        assert!(tie.prediction && tie.value == 0.0);
        assert_eq!(min_flips(true, 1, 2), 1);
        assert_eq!(min_flips(true, 2, 3), 1);
        // Unanimous zeros: four of seven must flip to reach the tie rule.
        assert_eq!(min_flips(false, 7, 7), 4);
        // Even t of zeros: (0,0,0,0) needs two flips to tie, which outputs 1.
        assert_eq!(min_flips(false, 4, 4), 2);
        assert_eq!(min_flips(true, 4, 4), 3);
    }

    #[test]
    fn margin_examples() {
        let x = Instance::Id(0);
        let c = certificate_paper(&vh(&[true; 7], 70), &x).unwrap();
        assert!((c.value - 2.5 / 70.0).abs() < 1e-15);
        assert_eq!(certificate_paper(&vh(&[true, false], 20), &x).unwrap().value, 0.0);
    }

    #[test]
    fn constant_oracle_saturates() {
        let s: Sample = (0..4).map(|i| Example::id(i, true)).collect();
        let u = vec![Example::id(0, false), Example::id(1, true)];
        let o = optimal_certificate_oracle(&constant_learner(true), &s, &Instance::Id(0), &u, 3).unwrap();
        assert_eq!(
            o,
            OracleValue {
                edits: 3,
                saturated: true
            }
        );
    }

    proptest! {
        #[test]
        fn margin_below_exact(t in 1usize..40, ones_frac in 0.0f64..=1.0, extra in 0usize..50) {
            let ones = ((t as f64) * ones_frac).round() as usize;
            let votes: Vec<bool> = (0..t).map(|i| i < ones).collect();
            let v = vh(&votes, t + extra);
            let x = Instance::Id(0);
            let p = certificate_paper(&v, &x).unwrap();
            let e = certificate_exact(&v, &x).unwrap();
            prop_assert!(p.value <= e.value + 1e-15);
            // Overturning needs exactly f_min flips.
            let f = min_flips(e.prediction, e.agree, t);
            let after = |k: usize| {
                let o = if e.prediction { ones - k } else { ones + k };
                crate::data::majority_of_counts(o, t)
            };
            prop_assert_eq!(after(f), !e.prediction);
            if f >= 1 {
                prop_assert_eq!(after(f - 1), e.prediction);
            }
        }
    }
}
