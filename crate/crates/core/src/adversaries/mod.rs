//! Instance-targeted poisoning adversaries.

use serde::Serialize;

use crate::data::{hamming_distance, Example, Instance, Sample};
use crate::error::{Error, Result};
use crate::learners::Learner;

pub mod brute;
pub mod coin;
pub mod lower_bound;
pub mod voteflip;

pub use brute::{brute_force_attack, enumeration_size, BRUTE_LIMIT};
pub use lower_bound::{realizable_lb_distribution, relabel_target_attack, LbConstruction, RelabelOutcome};
pub use voteflip::vote_flip_attack;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttackOutcome {
    /// The learner's prediction at `x` was forced to the target.
    pub success: bool,
    /// The tampered sample (the original on failure).
    pub sample: Sample,
    pub edits: usize,
    pub budget: usize,
    /// On failure: every sample within budget over the declared universe was
    /// ruled out.
    pub exhaustive: bool,
}

impl AttackOutcome {
    pub(crate) fn failure(sample: &Sample, budget: usize, exhaustive: bool) -> Self {
        AttackOutcome {
            success: false,
            sample: sample.clone(),
            edits: 0,
            budget,
            exhaustive,
        }
    }

    /// Checks edit accounting and, on success, replays the learner.
    pub fn verify(&self, learner: &dyn Learner, original: &Sample, x: &Instance, target: bool) -> Result<()> {
        let d = hamming_distance(original, &self.sample)?;
        if d != self.edits || d > self.budget {
            return Err(Error::ReplayMismatch(format!(
                "recorded {} edits (budget {}), measured {d}",
                self.edits, self.budget
            )));
        }
        if self.success && learner.predict(&self.sample, x)? != target {
            return Err(Error::ReplayMismatch(format!(
                "{} does not output {} at {x} on the tampered sample",
                learner.name(),
                target as u8
            )));
        }
        Ok(())
    }
}

/// Adversary selection by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Adversary {
    /// Exhaustive search; exact over the universe but tiny instances only.
    Brute,
    /// Exact for voting learners whose prediction is the block vote.
    VoteFlip,
    /// Relabels every occurrence of the target instance.
    Relabel,
}

impl Adversary {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "brute" => Ok(Adversary::Brute),
            "voteflip" => Ok(Adversary::VoteFlip),
            "relabel" => Ok(Adversary::Relabel),
            other => Err(Error::Config(format!(
                "unknown adversary `{other}` (expected brute, voteflip, relabel)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Adversary::Brute => "brute",
            Adversary::VoteFlip => "voteflip",
            Adversary::Relabel => "relabel",
        }
    }

    /// Whether a failed attack proves that no successful one exists (over
    /// the declared universe).
    pub fn is_exact_for(&self, learner: &dyn Learner) -> bool {
        match self {
            Adversary::Brute => true,
            Adversary::VoteFlip => learner.as_block_voting().is_some_and(|b| b.vote_exact()),
            Adversary::Relabel => false,
        }
    }

    /// Tries to force `learner(S')(x) = target` within `budget` edits.
    pub fn attack(
        &self,
        learner: &dyn Learner,
        sample: &Sample,
        x: &Instance,
        target: bool,
        budget: usize,
        universe: &[Example],
    ) -> Result<AttackOutcome> {
        match self {
            Adversary::Brute => brute_force_attack(learner, sample, x, target, budget, universe),
            Adversary::VoteFlip => vote_flip_attack(learner, sample, x, target, budget, universe),
            Adversary::Relabel => {
                let r = relabel_target_attack(learner, sample, x, !target, budget)?;
                Ok(match r.chosen {
                    Some(s) => AttackOutcome {
                        success: true,
                        edits: r.edits,
                        sample: s,
                        budget,
                        exhaustive: false,
                    },
                    None => AttackOutcome::failure(sample, budget, false),
                })
            }
        }
    }
}
