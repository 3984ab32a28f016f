//! Concept classes, hypotheses and majority votes.
//!
//! Three class kinds are supported: finite tabular classes over a domain of at
//! most 64 ids, one-dimensional thresholds `1[x >= theta]`, and halfspaces
//! `1[w . x + b >= 0]` in `R^d`. Every hypothesis evaluates deterministically;
//! improper outputs (votes, transductive predictors) are carried as
//! [`Hypothesis::Free`].

use std::fmt;
use std::sync::Arc;

use crate::data::{majority_of_counts, Instance, Sample, Universe};
use crate::error::{Error, Result};

pub mod halfspace;
pub mod projection;
pub mod tabular;
pub mod threshold;

pub use halfspace::{max_margin_halfspace, Halfspace};
pub use projection::{
    disagreement_count, in_projection_set, project_to_class, projection_number_lower_bound, ProjectionBound,
};
pub use tabular::TabularClass;

/// Arbitrary evaluable map from instances to labels.
pub trait Predictor: Send + Sync + fmt::Debug {
    fn predict(&self, x: &Instance) -> Result<bool>;
}

#[derive(Clone, Debug)]
pub enum Hypothesis {
    Constant(bool),
    /// Row `index` of a tabular class; bit `i` of `bits` is the label of id `i`.
    Row {
        index: usize,
        bits: u64,
        domain: u32,
    },
    /// `1[x >= theta]`; `theta` may be infinite.
    Threshold(f64),
    Halfspace(Halfspace),
    Free(Arc<dyn Predictor>),
}

impl PartialEq for Hypothesis {
    fn eq(&self, other: &Self) -> bool {
        use Hypothesis::*;
        match (self, other) {
            (Constant(a), Constant(b)) => a == b,
            (
                Row {
                    index: i,
                    bits: a,
                    domain: m,
                },
                Row {
                    index: j,
                    bits: b,
                    domain: k,
                },
            ) => i == j && a == b && m == k,
            (Threshold(a), Threshold(b)) => a.to_bits() == b.to_bits(),
            (Halfspace(a), Halfspace(b)) => a == b,
            (Free(a), Free(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl Hypothesis {
    pub fn evaluate(&self, x: &Instance) -> Result<bool> {
        match self {
            Hypothesis::Constant(b) => Ok(*b),
            Hypothesis::Row { bits, domain, .. } => match x {
                Instance::Id(i) if i < domain => Ok((bits >> i) & 1 == 1),
                _ => Err(mismatch(x, Universe::Finite { size: *domain })),
            },
            Hypothesis::Threshold(theta) => match x.as_scalar() {
                Some(v) if v.is_finite() => Ok(v >= *theta),
                _ => Err(mismatch(x, Universe::Real { dim: 1 })),
            },
            Hypothesis::Halfspace(h) => h.evaluate(x),
            Hypothesis::Free(p) => p.predict(x),
        }
    }
}

fn mismatch(x: &Instance, universe: Universe) -> Error {
    Error::UniverseMismatch {
        instance: x.to_string(),
        universe: universe.to_string(),
    }
}

/// `evaluate(h, x)`.
pub fn evaluate(h: &Hypothesis, x: &Instance) -> Result<bool> {
    h.evaluate(x)
}

/// A multiset of hypotheses (repetition allowed), at least one member.
#[derive(Clone, Debug, PartialEq)]
pub struct Multiset {
    members: Vec<Hypothesis>,
}

impl Multiset {
    pub fn new(members: Vec<Hypothesis>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidParameter("multiset must be nonempty".into()));
        }
        Ok(Multiset { members })
    }

    pub fn members(&self) -> &[Hypothesis] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Number of members voting 1 at `x`.
    pub fn ones(&self, x: &Instance) -> Result<usize> {
        let mut ones = 0;
        for h in &self.members {
            ones += h.evaluate(x)? as usize;
        }
        Ok(ones)
    }
}

/// Tie-rule majority vote at `x`: exact ties output 1.
pub fn majority(votes: &Multiset, x: &Instance) -> Result<bool> {
    Ok(majority_of_counts(votes.ones(x)?, votes.len()))
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConceptClass {
    FiniteTabular(TabularClass),
    Threshold1D,
    Halfspace { dim: usize },
}

impl ConceptClass {
    pub fn halfspace(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidClass("halfspace dimension must be >= 1".into()));
        }
        Ok(ConceptClass::Halfspace { dim })
    }

    pub fn universe(&self) -> Universe {
        match self {
            ConceptClass::FiniteTabular(t) => Universe::Finite { size: t.domain() },
            ConceptClass::Threshold1D => Universe::Real { dim: 1 },
            ConceptClass::Halfspace { dim } => Universe::Real { dim: *dim },
        }
    }

    pub fn name(&self) -> String {
        match self {
            ConceptClass::FiniteTabular(t) => {
                format!("finite(m={}, |H|={})", t.domain(), t.len())
            }
            ConceptClass::Threshold1D => "threshold".into(),
            ConceptClass::Halfspace { dim } => format!("halfspace(d={dim})"),
        }
    }

    /// Membership check used to assert properness.
    pub fn contains(&self, h: &Hypothesis) -> bool {
        match (self, h) {
            (ConceptClass::FiniteTabular(t), Hypothesis::Row { index, bits, domain }) => {
                *domain == t.domain() && t.rows().get(*index) == Some(bits)
            }
            (ConceptClass::Threshold1D, Hypothesis::Threshold(theta)) => !theta.is_nan(),
            (ConceptClass::Halfspace { dim }, Hypothesis::Halfspace(hs)) => hs.dim() == *dim && hs.is_finite(),
            _ => false,
        }
    }

    /// True iff some member of the class has zero empirical error on `sample`.
    pub fn is_realizable(&self, sample: &Sample) -> Result<bool> {
        sample.check(&self.universe())?;
        match self {
            ConceptClass::FiniteTabular(t) => Ok(t.consistent_row(sample).is_some()),
            ConceptClass::Threshold1D => Ok(threshold::is_realizable(sample)),
            ConceptClass::Halfspace { dim } => halfspace::is_separable(sample, *dim),
        }
    }

    pub fn vc_dimension(&self) -> Result<usize> {
        match self {
            ConceptClass::FiniteTabular(t) => t.vc_dimension(),
            ConceptClass::Threshold1D => Ok(1),
            ConceptClass::Halfspace { dim } => Ok(dim + 1),
        }
    }

    /// `d` instances on which the class realizes all `2^d` labelings.
    pub fn find_shattered_set(&self, d: usize) -> Result<Vec<Instance>> {
        match self {
            ConceptClass::FiniteTabular(t) => t
                .find_shattered_set(d)?
                .map(|ids| ids.into_iter().map(Instance::Id).collect())
                .ok_or(Error::NotShattered(d)),
            ConceptClass::Threshold1D => match d {
                0 => Ok(vec![]),
                1 => Ok(vec![Instance::scalar(0.0)]),
                _ => Err(Error::NotShattered(d)),
            },
            ConceptClass::Halfspace { dim } => {
                if d > dim + 1 {
                    return Err(Error::NotShattered(d));
                }
                // The origin plus the first d - 1 unit vectors are affinely independent.
                Ok((0..d)
                    .map(|k| {
                        let mut p = vec![0.0; *dim];
                        if k > 0 {
                            p[k - 1] = 1.0;
                        }
                        Instance::point(p)
                    })
                    .collect())
            }
        }
    }

    /// Empirical error count of `h` on `sample`.
    pub fn mistakes(h: &Hypothesis, sample: &Sample) -> Result<usize> {
        let mut k = 0;
        for e in sample.iter() {
            k += (h.evaluate(&e.x)? != e.y) as usize;
        }
        Ok(k)
    }
}
