//! Projection of a majority vote back into the class.
//!
//! For a multiset `H'` of size `t`, the projection set at `ell` holds the
//! points where fewer than `t / ell` members disagree with the vote. A class
//! projects `H'` at `ell` if some member agrees with the vote on that whole
//! set; the projection number is the smallest `ell` that works for every
//! finite multiset.

use itertools::Itertools;
use rand::Rng as _;
use serde::Serialize;

use super::{ConceptClass, Hypothesis, Multiset, TabularClass};
use crate::data::{majority_of_counts, Instance};
use crate::error::{Error, Result};
use crate::seed::Seed;

/// Members of `votes` disagreeing with the majority at `x`.
pub fn disagreement_count(votes: &Multiset, x: &Instance) -> Result<usize> {
    let ones = votes.ones(x)?;
    let t = votes.len();
    Ok(if majority_of_counts(ones, t) { t - ones } else { ones })
}

/// `disagreement_count * ell < t`.
pub fn in_projection_set(votes: &Multiset, ell: usize, x: &Instance) -> Result<bool> {
    if ell < 2 {
        return Err(Error::InvalidParameter(format!("ell = {ell} must be >= 2")));
    }
    Ok(disagreement_count(votes, x)? * ell < votes.len())
}

/// A member of `class` agreeing with the vote on the projection set at `ell`.
pub fn project_to_class(class: &ConceptClass, votes: &Multiset, ell: usize) -> Result<Hypothesis> {
    if ell < 2 {
        return Err(Error::InvalidParameter(format!("ell = {ell} must be >= 2")));
    }
    match class {
        ConceptClass::FiniteTabular(t) => {
            let counts = ones_per_point(t.domain(), votes)?;
            project_counts(t, &counts, votes.len(), ell).map(|i| t.hypothesis(i))
        }
        ConceptClass::Threshold1D => {
            let mut thetas = Vec::with_capacity(votes.len());
            for h in votes.members() {
                match h {
                    Hypothesis::Threshold(theta) => thetas.push(*theta),
                    other => {
                        return Err(Error::unsupported(
                            "project_to_class",
                            format!("threshold vote containing {other:?}"),
                        ))
                    }
                }
            }
            Ok(Hypothesis::Threshold(median_threshold(&mut thetas)))
        }
        ConceptClass::Halfspace { .. } => Err(Error::unsupported("project_to_class", class.name())),
    }
}

/// The `ceil(t/2)`-th smallest threshold. `1[x >= theta_i]` has at least
/// `t/2` ones exactly when `x` is at or above it, so it equals the vote
/// pointwise.
pub fn median_threshold(thetas: &mut [f64]) -> f64 {
    thetas.sort_by(|a, b| a.total_cmp(b));
    thetas[thetas.len().div_ceil(2) - 1]
}

fn ones_per_point(domain: u32, votes: &Multiset) -> Result<Vec<usize>> {
    (0..domain).map(|i| votes.ones(&Instance::Id(i))).collect()
}

/// Vote and projection-set masks for per-point one counts.
fn vote_masks(counts: &[usize], t: usize, ell: usize) -> (u64, u64) {
    let mut maj = 0u64;
    let mut proj = 0u64;
    for (i, &ones) in counts.iter().enumerate() {
        let m = majority_of_counts(ones, t);
        let dis = if m { t - ones } else { ones };
        if m {
            maj |= 1 << i;
        }
        if dis * ell < t {
            proj |= 1 << i;
        }
    }
    (maj, proj)
}

/// Lowest-index row matching the vote on the projection set.
fn project_counts(class: &TabularClass, counts: &[usize], t: usize, ell: usize) -> Result<usize> {
    let (maj, proj) = vote_masks(counts, t, ell);
    if let Some(i) = class.rows().iter().position(|r| (r ^ maj) & proj == 0) {
        return Ok(i);
    }
    // Witness: a projection-set point where the closest row still disagrees.
    let closest = class
        .rows()
        .iter()
        .min_by_key(|r| ((*r ^ maj) & proj).count_ones())
        .expect("class is nonempty");
    let bad = (closest ^ maj) & proj;
    Err(Error::NoProjection {
        ell,
        witness: Some(Instance::Id(bad.trailing_zeros())),
    })
}

/// Certified lower bound on the projection number.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProjectionBound {
    /// `k_p >= value`.
    pub value: usize,
    /// Every multiset up to the size cap was examined.
    pub exhaustive: bool,
    pub multisets_examined: usize,
    /// Row indices of a multiset attaining `value`, if it exceeds 2.
    pub witness: Option<Vec<usize>>,
}

const EXHAUSTIVE_MULTISETS: u128 = 200_000;

/// Smallest `ell >= 2` at which the multiset projects; at most `t + 1`, where
/// only unanimous points remain and any member matches.
fn min_projecting_ell(class: &TabularClass, members: &[usize]) -> usize {
    let t = members.len();
    let counts: Vec<usize> = (0..class.domain())
        .map(|x| members.iter().filter(|&&i| class.label(i, x)).count())
        .collect();
    (2..=t + 1)
        .find(|&ell| project_counts(class, &counts, t, ell).is_ok())
        .unwrap_or(t + 1)
}

fn multiset_count(rows: usize, cap: usize) -> u128 {
    // Multisets of size 1..=cap from `rows` kinds: C(rows + cap, cap) - 1.
    let mut c: u128 = 1;
    for i in 0..cap as u128 {
        c = c.saturating_mul(rows as u128 + i + 1) / (i + 1);
        if c > u64::MAX as u128 {
            return u128::MAX;
        }
    }
    c - 1
}

/// For each examined multiset the smallest projecting `ell` is a valid lower
/// bound on `k_p`; returns the maximum. Exhaustive over all multisets of size
/// at most `cap` when that is small enough, otherwise `trials` random ones.
pub fn projection_number_lower_bound(
    class: &ConceptClass,
    cap: usize,
    trials: usize,
    seed: &Seed,
) -> Result<ProjectionBound> {
    let ConceptClass::FiniteTabular(t) = class else {
        return Err(Error::unsupported("projection_number_lower_bound", class.name()));
    };
    if cap == 0 {
        return Err(Error::InvalidParameter("multiset size cap must be >= 1".into()));
    }
    let mut best = ProjectionBound {
        value: 2,
        exhaustive: false,
        multisets_examined: 0,
        witness: None,
    };
    let consider = |members: Vec<usize>, best: &mut ProjectionBound| {
        best.multisets_examined += 1;
        let ell = min_projecting_ell(t, &members);
        if ell > best.value {
            best.value = ell;
            best.witness = Some(members);
        }
    };
    if multiset_count(t.len(), cap) <= EXHAUSTIVE_MULTISETS {
        for size in 1..=cap {
            for m in (0..t.len()).combinations_with_replacement(size) {
                consider(m, &mut best);
            }
        }
        best.exhaustive = true;
    } else {
        let mut rng = seed.rng();
        for _ in 0..trials {
            let size = rng.random_range(1..=cap);
            let mut m: Vec<usize> = (0..size).map(|_| rng.random_range(0..t.len())).collect();
            m.sort_unstable();
            consider(m, &mut best);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::majority;
    use proptest::prelude::*;

    fn consts(bits: &[bool]) -> Multiset {
        Multiset::new(bits.iter().map(|&b| Hypothesis::Constant(b)).collect()).unwrap()
    }

    fn rows(class: &TabularClass, idx: &[usize]) -> Multiset {
        Multiset::new(idx.iter().map(|&i| class.hypothesis(i)).collect()).unwrap()
    }

    #[test]
    fn disagreement_examples() {
        let x = Instance::Id(0);
        assert_eq!(disagreement_count(&consts(&[true, true, false]), &x).unwrap(), 1);
        assert_eq!(disagreement_count(&consts(&[true, false]), &x).unwrap(), 1);
        assert_eq!(disagreement_count(&consts(&[false, false, false]), &x).unwrap(), 0);
    }

    #[test]
    fn projection_set_examples() {
        let x = Instance::Id(0);
        let mut v = vec![true; 6];
        v.extend([false; 4]);
        assert!(in_projection_set(&consts(&v), 2, &x).unwrap());
        let mut w = vec![true; 5];
        w.extend([false; 5]);
        assert!(!in_projection_set(&consts(&w), 2, &x).unwrap());
        assert!(in_projection_set(&consts(&[true; 6]), 6, &x).unwrap());
        assert!(in_projection_set(&consts(&[true]), 1, &x).is_err());
    }

    #[test]
    fn threshold_median() {
        let v = Multiset::new([1.0, 3.0, 2.0].map(Hypothesis::Threshold).to_vec()).unwrap();
        assert_eq!(
            project_to_class(&ConceptClass::Threshold1D, &v, 2).unwrap(),
            Hypothesis::Threshold(2.0)
        );
        let even = Multiset::new([4.0, 1.0, 3.0, 2.0].map(Hypothesis::Threshold).to_vec()).unwrap();
        let Hypothesis::Threshold(m) = project_to_class(&ConceptClass::Threshold1D, &even, 2).unwrap() else {
            panic!()
        };
        for k in 0..60 {
            let x = Instance::scalar(k as f64 * 0.1);
            assert_eq!(x.as_scalar().unwrap() >= m, majority(&even, &x).unwrap());
        }
    }

    #[test]
    fn unanimous_tabular() {
        let c = TabularClass::intervals(5).unwrap();
        let v = rows(&c, &[7, 7, 7]);
        let cc = ConceptClass::FiniteTabular(c.clone());
        assert_eq!(project_to_class(&cc, &v, 2).unwrap(), c.hypothesis(7));
    }

    #[test]
    fn majority_outside_class() {
        // Rows 100, 010, 001: the majority is all-zero, which is not a row.
        let c = TabularClass::new(3, vec![0b001, 0b010, 0b100]).unwrap();
        let cc = ConceptClass::FiniteTabular(c.clone());
        let v = rows(&c, &[0, 1, 2]);
        // Each point has one dissenter out of three: inside the set at ell = 2.
        assert!(matches!(
            project_to_class(&cc, &v, 2),
            Err(Error::NoProjection { ell: 2, .. })
        ));
        // At ell = 3 nothing remains in the set; every row qualifies.
        let h = project_to_class(&cc, &v, 3).unwrap();
        assert!(cc.contains(&h));

        let lb = projection_number_lower_bound(&cc, 3, 0, &Seed::new(1)).unwrap();
        assert!(lb.exhaustive);
        assert!(lb.value >= 3);
    }

    #[test]
    fn lower_bound_examples() {
        let single = ConceptClass::FiniteTabular(TabularClass::new(3, vec![0b101]).unwrap());
        assert_eq!(
            projection_number_lower_bound(&single, 4, 10, &Seed::new(0))
                .unwrap()
                .value,
            2
        );
        let th = ConceptClass::FiniteTabular(TabularClass::thresholds(6).unwrap());
        assert_eq!(
            projection_number_lower_bound(&th, 5, 10, &Seed::new(0)).unwrap().value,
            2
        );
        assert!(projection_number_lower_bound(&ConceptClass::Threshold1D, 3, 3, &Seed::new(0)).is_err());
    }

    proptest! {
        #[test]
        fn projection_set_monotone_in_ell(bits in proptest::collection::vec(any::<bool>(), 1..20), ell in 2usize..12) {
            let v = consts(&bits);
            let x = Instance::Id(0);
            if in_projection_set(&v, ell, &x).unwrap() {
                for smaller in 2..ell {
                    prop_assert!(in_projection_set(&v, smaller, &x).unwrap());
                }
            }
        }

        #[test]
        fn projection_agrees_on_set(
            raw in proptest::collection::vec(0u64..32, 1..6),
            picks in proptest::collection::vec(0usize..6, 1..9),
            ell in 2usize..6,
        ) {
            let mut r = raw.clone();
            r.sort_unstable();
            r.dedup();
            let c = TabularClass::new(5, r).unwrap();
            let idx: Vec<usize> = picks.iter().map(|p| p % c.len()).collect();
            let v = rows(&c, &idx);
            let cc = ConceptClass::FiniteTabular(c.clone());
            match project_to_class(&cc, &v, ell) {
                Ok(h) => {
                    prop_assert!(cc.contains(&h));
                    for x in 0..5u32 {
                        let x = Instance::Id(x);
                        if in_projection_set(&v, ell, &x).unwrap() {
                            prop_assert_eq!(h.evaluate(&x).unwrap(), majority(&v, &x).unwrap());
                        }
                    }
                }
                Err(Error::NoProjection { witness, .. }) => {
                    // Exhaustive confirmation that no row works.
                    for i in 0..c.len() {
                        let h = c.hypothesis(i);
                        let ok = (0..5u32).all(|x| {
                            let x = Instance::Id(x);
                            !in_projection_set(&v, ell, &x).unwrap()
                                || h.evaluate(&x).unwrap() == majority(&v, &x).unwrap()
                        });
                        prop_assert!(!ok);
                    }
                    prop_assert!(witness.is_some());
                }
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }
}
