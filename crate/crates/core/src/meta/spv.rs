//! Partition-and-vote learners.

use std::sync::Arc;

use super::partition::{spv_partition, Partition};
use crate::classes::{project_to_class, ConceptClass, Hypothesis, Multiset, Predictor};
use crate::data::{majority_of_counts, Instance, Sample};
use crate::error::{Error, Result};
use crate::learners::Learner;

/// Structure shared by learners whose prediction at `x` is decided by the
/// base learner's predictions on disjoint consecutive blocks.
pub trait BlockVoting: Send + Sync {
    fn partition(&self, n: usize) -> Result<Partition>;

    fn base(&self) -> &dyn Learner;

    /// True when the prediction at every `x` is exactly the tie-rule
    /// majority of the block predictions.
    fn vote_exact(&self) -> bool;

    /// Base-learner predictions at `x`, one per block.
    fn block_predictions(&self, sample: &Sample, x: &Instance) -> Result<Vec<bool>> {
        let p = self.partition(sample.len())?;
        p.blocks
            .iter()
            .enumerate()
            .map(|(i, r)| {
                self.base()
                    .predict(&sample.sub(r.clone()), x)
                    .map_err(|e| block_error(i, e))
            })
            .collect()
    }
}

fn block_error(block: usize, e: Error) -> Error {
    Error::Block {
        block,
        source: Box::new(e),
    }
}

/// `h_1..h_t` with the partition that produced them.
#[derive(Clone, Debug)]
pub struct VotingHypothesis {
    pub hypotheses: Vec<Hypothesis>,
    pub partition: Partition,
    pub eta: Option<f64>,
    pub base: String,
}

impl VotingHypothesis {
    pub fn t(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn n(&self) -> usize {
        self.partition.n
    }

    /// Number of base hypotheses voting 1 at `x`.
    pub fn ones(&self, x: &Instance) -> Result<usize> {
        let mut k = 0;
        for h in &self.hypotheses {
            k += h.evaluate(x)? as usize;
        }
        Ok(k)
    }

    pub fn predict(&self, x: &Instance) -> Result<bool> {
        Ok(majority_of_counts(self.ones(x)?, self.t()))
    }

    pub fn multiset(&self) -> Multiset {
        Multiset::new(self.hypotheses.clone()).expect("t >= 1")
    }
}

impl Predictor for VotingHypothesis {
    fn predict(&self, x: &Instance) -> Result<bool> {
        VotingHypothesis::predict(self, x)
    }
}

fn fit_blocks(base: &dyn Learner, partition: Partition, sample: &Sample, eta: Option<f64>) -> Result<VotingHypothesis> {
    let hypotheses = partition
        .blocks
        .iter()
        .enumerate()
        .map(|(i, r)| base.learn(&sample.sub(r.clone())).map_err(|e| block_error(i, e)))
        .collect::<Result<Vec<_>>>()?;
    Ok(VotingHypothesis {
        hypotheses,
        partition,
        eta,
        base: base.name(),
    })
}

fn vote_from_predictions(preds: &[bool]) -> bool {
    majority_of_counts(preds.iter().filter(|&&b| b).count(), preds.len())
}

/// How the number of blocks is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Blocks {
    /// `floor(7 eta n)` (or `floor(5 k_p eta n)` for the proper variant).
    FromBudget(f64),
    /// A fixed count, for exhaustive tests at sizes where `n >= 1/eta`
    /// would force too many blocks.
    Fixed(usize),
}

/// Split-and-vote: train the base learner on each block, predict by
/// tie-rule majority.
#[derive(Clone, Debug)]
pub struct Spv {
    pub base: Arc<dyn Learner>,
    pub blocks: Blocks,
}

impl Spv {
    pub fn new(base: Arc<dyn Learner>, eta: f64) -> Self {
        Spv {
            base,
            blocks: Blocks::FromBudget(eta),
        }
    }

    pub fn with_blocks(base: Arc<dyn Learner>, t: usize) -> Self {
        Spv {
            base,
            blocks: Blocks::Fixed(t),
        }
    }

    pub fn fit(&self, sample: &Sample) -> Result<VotingHypothesis> {
        let p = self.partition(sample.len())?;
        fit_blocks(self.base.as_ref(), p, sample, self.eta())
    }

    fn eta(&self) -> Option<f64> {
        match self.blocks {
            Blocks::FromBudget(e) => Some(e),
            Blocks::Fixed(_) => None,
        }
    }
}

/// `spv_learn(base, eta, S)`.
pub fn spv_learn(base: Arc<dyn Learner>, eta: f64, sample: &Sample) -> Result<VotingHypothesis> {
    Spv::new(base, eta).fit(sample)
}

impl BlockVoting for Spv {
    fn partition(&self, n: usize) -> Result<Partition> {
        match self.blocks {
            Blocks::FromBudget(eta) => spv_partition(n, eta, None),
            Blocks::Fixed(t) => Partition::balanced(n, t),
        }
    }

    fn base(&self) -> &dyn Learner {
        self.base.as_ref()
    }

    fn vote_exact(&self) -> bool {
        true
    }
}

impl Learner for Spv {
    fn name(&self) -> String {
        format!("spv({})", self.base.name())
    }

    fn learn(&self, sample: &Sample) -> Result<Hypothesis> {
        Ok(Hypothesis::Free(Arc::new(self.fit(sample)?)))
    }

    fn predict(&self, sample: &Sample, x: &Instance) -> Result<bool> {
        Ok(vote_from_predictions(&self.block_predictions(sample, x)?))
    }

    fn as_block_voting(&self) -> Option<&dyn BlockVoting> {
        Some(self)
    }
}

/// Proper split-and-vote: the vote is projected back into the class at
/// `ell = 2 k_p`.
#[derive(Clone, Debug)]
pub struct Pspv {
    pub base: Arc<dyn Learner>,
    pub class: ConceptClass,
    pub kp: usize,
    pub blocks: Blocks,
}

/// The raw vote and its projection.
#[derive(Clone, Debug)]
pub struct ProperFit {
    pub vote: VotingHypothesis,
    pub projected: Hypothesis,
}

impl Pspv {
    pub fn new(base: Arc<dyn Learner>, class: ConceptClass, kp: usize, eta: f64) -> Result<Self> {
        if kp < 1 {
            return Err(Error::InvalidParameter("k_p must be >= 1".into()));
        }
        Ok(Pspv {
            base,
            class,
            kp,
            blocks: Blocks::FromBudget(eta),
        })
    }

    pub fn with_blocks(base: Arc<dyn Learner>, class: ConceptClass, kp: usize, t: usize) -> Self {
        Pspv {
            base,
            class,
            kp,
            blocks: Blocks::Fixed(t),
        }
    }

    pub fn fit(&self, sample: &Sample) -> Result<ProperFit> {
        let p = self.partition(sample.len())?;
        let eta = match self.blocks {
            Blocks::FromBudget(e) => Some(e),
            Blocks::Fixed(_) => None,
        };
        let vote = fit_blocks(self.base.as_ref(), p, sample, eta)?;
        let projected = project_to_class(&self.class, &vote.multiset(), 2 * self.kp)?;
        Ok(ProperFit { vote, projected })
    }
}

/// `pspv_learn(base, eta, kp, H, S)`; the output is a member of `H`.
pub fn pspv_learn(
    base: Arc<dyn Learner>,
    eta: f64,
    kp: usize,
    class: &ConceptClass,
    sample: &Sample,
) -> Result<Hypothesis> {
    Pspv::new(base, class.clone(), kp, eta)?.learn(sample)
}

impl BlockVoting for Pspv {
    fn partition(&self, n: usize) -> Result<Partition> {
        match self.blocks {
            Blocks::FromBudget(eta) => spv_partition(n, eta, Some(self.kp)),
            Blocks::Fixed(t) => Partition::balanced(n, t),
        }
    }

    fn base(&self) -> &dyn Learner {
        self.base.as_ref()
    }

    /// The median threshold equals the vote everywhere; a finite-class
    /// projection may differ from it off the projection set.
    fn vote_exact(&self) -> bool {
        matches!(self.class, ConceptClass::Threshold1D)
    }
}

impl Learner for Pspv {
    fn name(&self) -> String {
        format!("pspv({}, kp={})", self.base.name(), self.kp)
    }

    fn learn(&self, sample: &Sample) -> Result<Hypothesis> {
        Ok(self.fit(sample)?.projected)
    }

    fn predict(&self, sample: &Sample, x: &Instance) -> Result<bool> {
        if self.vote_exact() {
            return Ok(vote_from_predictions(&self.block_predictions(sample, x)?));
        }
        self.learn(sample)?.evaluate(x)
    }

    fn as_block_voting(&self) -> Option<&dyn BlockVoting> {
        Some(self)
    }
}
