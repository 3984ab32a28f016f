//! Deterministic base learners behind one contract.

use std::fmt;

use crate::classes::{halfspace, threshold, ConceptClass, Hypothesis};
use crate::data::{Instance, Sample};
use crate::error::{Error, Result};
use crate::meta::BlockVoting;

pub mod oig;

pub use oig::{oig_predict, orient_min_outdegree, Oig, OneInclusionGraph, Orientation};

/// A deterministic learning rule.
///
/// `predict(S, x)` must equal `learn(S)` evaluated at `x`; transductive
/// learners override `predict` and return a lazily evaluated hypothesis from
/// `learn`.
pub trait Learner: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    fn learn(&self, sample: &Sample) -> Result<Hypothesis>;

    fn predict(&self, sample: &Sample, x: &Instance) -> Result<bool> {
        self.learn(sample)?.evaluate(x)
    }

    /// Partition-and-vote learners expose their structure to the vote-flip
    /// adversary and to certificates.
    fn as_block_voting(&self) -> Option<&dyn BlockVoting> {
        None
    }
}

/// Ignores the sample and predicts `b` everywhere.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Constant(pub bool);

pub fn constant_learner(b: bool) -> Constant {
    Constant(b)
}

impl Learner for Constant {
    fn name(&self) -> String {
        format!("const{}", self.0 as u8)
    }

    fn learn(&self, _sample: &Sample) -> Result<Hypothesis> {
        Ok(Hypothesis::Constant(self.0))
    }

    fn predict(&self, _sample: &Sample, _x: &Instance) -> Result<bool> {
        Ok(self.0)
    }
}

/// Empirical risk minimization with the class's deterministic tie rule.
#[derive(Clone, Debug, PartialEq)]
pub struct Erm {
    pub class: ConceptClass,
}

impl Erm {
    pub fn new(class: ConceptClass) -> Self {
        Erm { class }
    }
}

/// A minimizer of empirical error over `class`.
pub fn erm_learn(class: &ConceptClass, sample: &Sample) -> Result<Hypothesis> {
    sample.check(&class.universe())?;
    match class {
        ConceptClass::FiniteTabular(t) => Ok(t.hypothesis(t.erm_row(sample))),
        ConceptClass::Threshold1D => threshold::erm(sample).map(Hypothesis::Threshold),
        ConceptClass::Halfspace { dim } => match halfspace::max_margin_halfspace(sample, *dim) {
            Ok(h) => Ok(Hypothesis::Halfspace(h)),
            // Agnostic halfspace ERM is NP-hard in general; only the
            // separable case is covered.
            Err(Error::NotSeparable) => Err(Error::unsupported(
                "erm",
                format!("non-separable sample for {}", class.name()),
            )),
            Err(e) => Err(e),
        },
    }
}

impl Learner for Erm {
    fn name(&self) -> String {
        "erm".into()
    }

    fn learn(&self, sample: &Sample) -> Result<Hypothesis> {
        erm_learn(&self.class, sample)
    }

    fn predict(&self, sample: &Sample, x: &Instance) -> Result<bool> {
        if let ConceptClass::FiniteTabular(t) = &self.class {
            sample.check(&self.class.universe())?;
            let id = x
                .as_id()
                .filter(|&i| i < t.domain())
                .ok_or_else(|| Error::UniverseMismatch {
                    instance: x.to_string(),
                    universe: self.class.universe().to_string(),
                })?;
            return Ok(t.label(t.erm_row(sample), id));
        }
        self.learn(sample)?.evaluate(x)
    }
}

/// Hard-margin separator: halfspaces of any supported dimension, or
/// thresholds (the one-dimensional halfspaces with positive orientation).
#[derive(Clone, Debug, PartialEq)]
pub struct MaxMargin {
    pub class: ConceptClass,
}

impl MaxMargin {
    pub fn new(class: ConceptClass) -> Result<Self> {
        match class {
            ConceptClass::FiniteTabular(_) => Err(Error::unsupported("maxmargin", class.name())),
            _ => Ok(MaxMargin { class }),
        }
    }
}

impl Learner for MaxMargin {
    fn name(&self) -> String {
        "maxmargin".into()
    }

    fn learn(&self, sample: &Sample) -> Result<Hypothesis> {
        sample.check(&self.class.universe())?;
        match &self.class {
            ConceptClass::Threshold1D => threshold::max_margin(sample).map(Hypothesis::Threshold),
            ConceptClass::Halfspace { dim } => halfspace::max_margin_halfspace(sample, *dim).map(Hypothesis::Halfspace),
            ConceptClass::FiniteTabular(_) => unreachable!("rejected at construction"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::TabularClass;
    use crate::data::Example;
    use crate::seed::Seed;
    use rand::Rng;

    #[test]
    fn constant() {
        let s: Sample = [Example::id(0, true)].into_iter().collect();
        assert!(!constant_learner(false).predict(&s, &Instance::Id(3)).unwrap());
        assert_eq!(constant_learner(true).name(), "const1");
    }

    #[test]
    fn erm_examples() {
        let c = ConceptClass::FiniteTabular(TabularClass::constants(4).unwrap());
        let s: Sample = [(0, true), (1, true), (2, true), (3, false)]
            .iter()
            .map(|&(i, y)| Example::id(i, y))
            .collect();
        assert_eq!(
            erm_learn(&c, &s).unwrap(),
            Hypothesis::Row {
                index: 1,
                bits: 0b1111,
                domain: 4
            }
        );
        let th: Sample = [(0.0, false), (1.0, true), (2.0, true)]
            .iter()
            .map(|&(x, y)| Example::scalar(x, y))
            .collect();
        assert_eq!(
            erm_learn(&ConceptClass::Threshold1D, &th).unwrap(),
            Hypothesis::Threshold(1.0)
        );
    }

    #[test]
    fn erm_is_optimal_and_consistent_on_random_classes() {
        let mut rng = Seed::new(8).rng();
        for _ in 0..200 {
            let m = rng.random_range(2..7u32);
            let mut rows: Vec<u64> = (0..rng.random_range(1..12))
                .map(|_| rng.random::<u64>() & ((1 << m) - 1))
                .collect();
            rows.sort_unstable();
            rows.dedup();
            let t = TabularClass::new(m, rows).unwrap();
            let c = ConceptClass::FiniteTabular(t.clone());
            let s: Sample = (0..rng.random_range(1..10))
                .map(|_| Example::id(rng.random_range(0..m), rng.random()))
                .collect();
            let h = erm_learn(&c, &s).unwrap();
            let err = ConceptClass::mistakes(&h, &s).unwrap();
            for i in 0..t.len() {
                assert!(ConceptClass::mistakes(&t.hypothesis(i), &s).unwrap() >= err);
            }
            if c.is_realizable(&s).unwrap() {
                assert_eq!(err, 0);
            }
            let l = Erm::new(c.clone());
            for x in 0..m {
                let x = Instance::Id(x);
                assert_eq!(l.predict(&s, &x).unwrap(), h.evaluate(&x).unwrap());
            }
        }
    }

    #[test]
    fn maxmargin_threshold_matches_halfspace() {
        let s: Sample = [(0.0, false), (2.0, true), (3.0, true)]
            .iter()
            .map(|&(x, y)| Example::scalar(x, y))
            .collect();
        let th = MaxMargin::new(ConceptClass::Threshold1D).unwrap().learn(&s).unwrap();
        let hs = MaxMargin::new(ConceptClass::halfspace(1).unwrap())
            .unwrap()
            .learn(&s)
            .unwrap();
        assert_eq!(th, Hypothesis::Threshold(1.0));
        for k in -10..40 {
            let x = Instance::scalar(k as f64 * 0.1);
            assert_eq!(th.evaluate(&x).unwrap(), hs.evaluate(&x).unwrap());
        }
        assert!(MaxMargin::new(ConceptClass::FiniteTabular(TabularClass::constants(2).unwrap())).is_err());
    }
}
