//! The hard realizable distribution and the relabeling attack against it.
//!
//! Mass concentrates on one point `v1` of a shattered set; the other `d - 1`
//! points carry `eta / 2` each, so a test point other than `v1` typically
//! appears at most `eta n` times and the adversary can relabel all of its
//! occurrences. With the labeling drawn uniformly, a learner cannot tell the
//! two relabeled worlds apart.

use rand::Rng as _;
use serde::Serialize;

use crate::classes::{ConceptClass, Hypothesis};
use crate::data::{hamming_distance, Example, Instance, Sample};
use crate::distribution::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::learners::Learner;
use crate::seed::Seed;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LbConstruction {
    /// `v1, ..., vd` (or `x1, x2` for a one-dimensional class).
    pub points: Vec<Instance>,
    pub labels: Vec<bool>,
    pub mass: Vec<f64>,
    pub d: usize,
}

/// The hard distribution for `class` at budget fraction `eta`, with its
/// labeling drawn from `seed`.
pub fn realizable_lb_distribution(
    class: &ConceptClass,
    eta: f64,
    seed: &Seed,
) -> Result<(DiscreteDistribution, LbConstruction)> {
    let d = class.vc_dimension()?;
    realizable_lb_distribution_with_d(class, d, eta, seed)
}

/// As [`realizable_lb_distribution`], with `d` supplied by the caller.
pub fn realizable_lb_distribution_with_d(
    class: &ConceptClass,
    d: usize,
    eta: f64,
    seed: &Seed,
) -> Result<(DiscreteDistribution, LbConstruction)> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter(format!("eta = {eta} outside (0, 1)")));
    }
    let mut rng = seed.rng();
    let (points, labels, mass) = if d >= 2 {
        if eta > 2.0 / (d - 1) as f64 {
            return Err(Error::InvalidParameter(format!(
                "eta = {eta} exceeds 2/(d-1) = {}",
                2.0 / (d - 1) as f64
            )));
        }
        let points = class.find_shattered_set(d)?;
        let labels: Vec<bool> = (0..d).map(|_| rng.random()).collect();
        let mut mass = vec![eta / 2.0; d];
        mass[0] = 1.0 - eta * (d - 1) as f64 / 2.0;
        (points, labels, mass)
    } else {
        let (x1, x2, h1, h2) = nontrivial_witness(class)?;
        let h = if rng.random::<bool>() { h1 } else { h2 };
        let labels = vec![h.evaluate(&x1)?, h.evaluate(&x2)?];
        (vec![x1, x2], labels, vec![1.0 - eta / 2.0, eta / 2.0])
    };
    let support = points
        .iter()
        .zip(&labels)
        .map(|(x, &y)| Example::new(x.clone(), y))
        .collect();
    let dist = DiscreteDistribution::new(support, mass.clone())?;
    Ok((
        dist,
        LbConstruction {
            points,
            labels,
            mass,
            d,
        },
    ))
}

/// `x1, x2, h1, h2` with `h1(x1) = h2(x1)` and `h1(x2) != h2(x2)`.
fn nontrivial_witness(class: &ConceptClass) -> Result<(Instance, Instance, Hypothesis, Hypothesis)> {
    match class {
        ConceptClass::FiniteTabular(t) => {
            let (a, b, i, j) = t.nontrivial_witness().ok_or(Error::TrivialClass)?;
            Ok((Instance::Id(a), Instance::Id(b), t.hypothesis(i), t.hypothesis(j)))
        }
        ConceptClass::Threshold1D => Ok((
            Instance::scalar(1.0),
            Instance::scalar(0.0),
            Hypothesis::Threshold(0.0),
            Hypothesis::Threshold(0.5),
        )),
        // Halfspaces have d >= 2 and never reach this branch.
        ConceptClass::Halfspace { .. } => Err(Error::TrivialClass),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelabelOutcome {
    /// Every occurrence of `x` labeled 0.
    pub s0: Sample,
    /// Every occurrence of `x` labeled 1.
    pub s1: Sample,
    pub occurrences: usize,
    /// `x` occurs at most `budget` times, so both relabelings are affordable.
    pub hard: bool,
    /// The first of `s0, s1` that is within budget and makes the learner err.
    pub chosen: Option<Sample>,
    pub edits: usize,
}

/// Builds both relabelings of `x` and picks one forcing a prediction other
/// than `y`, if any does within `budget`.
pub fn relabel_target_attack(
    learner: &dyn Learner,
    sample: &Sample,
    x: &Instance,
    y: bool,
    budget: usize,
) -> Result<RelabelOutcome> {
    let relabel = |label: bool| -> Sample {
        sample
            .iter()
            .map(|e| {
                if &e.x == x {
                    Example::new(e.x.clone(), label)
                } else {
                    e.clone()
                }
            })
            .collect()
    };
    let s0 = relabel(false);
    let s1 = relabel(true);
    let occurrences = sample.occurrences(x);
    let mut chosen = None;
    let mut edits = 0;
    for s in [&s0, &s1] {
        let d = hamming_distance(sample, s)?;
        if d <= budget && learner.predict(s, x)? != y {
            chosen = Some(s.clone());
            edits = d;
            break;
        }
    }
    Ok(RelabelOutcome {
        s0,
        s1,
        occurrences,
        hard: occurrences <= budget,
        chosen,
        edits,
    })
}
