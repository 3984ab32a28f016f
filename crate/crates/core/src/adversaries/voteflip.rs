//! Optimal attack on block-voting learners.
//!
//! Blocks are disjoint and each base hypothesis sees only its block, so the
//! cheapest way to overturn the vote is to flip the `f` blocks that are
//! individually cheapest to flip, where `f` is the number of block
//! predictions the tie rule requires. Per-block costs are found by
//! exhaustive search level by level, stopping as soon as the cheapest `f`
//! are known or a lower bound exceeds the budget.

use super::brute::{enumeration_size, search_exact_k, BRUTE_LIMIT};
use super::AttackOutcome;
use crate::data::{majority_of_counts, Example, Instance, Sample};
use crate::error::{Error, Result};
use crate::learners::Learner;
use crate::meta::min_flips;

pub const MAX_BLOCK: usize = 30;

pub fn vote_flip_attack(
    learner: &dyn Learner,
    sample: &Sample,
    x: &Instance,
    target: bool,
    budget: usize,
    universe: &[Example],
) -> Result<AttackOutcome> {
    let bv = learner
        .as_block_voting()
        .ok_or_else(|| Error::unsupported("vote_flip_attack", format!("non-voting learner {}", learner.name())))?;
    let exact = bv.vote_exact();
    let partition = bv.partition(sample.len())?;
    let base = bv.base();
    let preds = bv.block_predictions(sample, x)?;
    let t = preds.len();
    let ones = preds.iter().filter(|&&b| b).count();
    let vote = majority_of_counts(ones, t);
    let current = if exact { vote } else { learner.predict(sample, x)? };
    if current == target {
        return Ok(AttackOutcome {
            success: true,
            sample: sample.clone(),
            edits: 0,
            budget,
            exhaustive: false,
        });
    }
    if vote == target {
        // Only reachable for inexact learners: the vote already says target.
        return Ok(AttackOutcome::failure(sample, budget, false));
    }
    let agree = if vote { ones } else { t - ones };
    let need = min_flips(vote, agree, t);
    if need > budget {
        return Ok(AttackOutcome::failure(sample, budget, exact));
    }

    let mut pending: Vec<usize> = (0..t).filter(|&i| preds[i] != target).collect();
    let mut found: Vec<(usize, usize, Sample)> = Vec::new();
    // Each of the other need-1 blocks costs at least one edit.
    let level_cap = budget - (need - 1);
    for k in 1..=level_cap {
        let mut still = Vec::new();
        for &i in &pending {
            if found.len() == need {
                still.push(i);
                continue;
            }
            let block = sample.sub(partition.blocks[i].clone());
            if k > block.len() {
                continue;
            }
            if block.len() > MAX_BLOCK || enumeration_size(block.len(), k, universe.len()) > BRUTE_LIMIT {
                return Err(Error::limit(
                    "vote_flip_attack",
                    format!(
                        "block {i} of size {} at {k} edits with |universe| = {}",
                        block.len(),
                        universe.len()
                    ),
                ));
            }
            let hit = search_exact_k(&block, universe, k, |b| Ok(base.predict(b, x)? == target))?;
            match hit {
                Some(b) => found.push((k, i, b)),
                None => still.push(i),
            }
        }
        pending = still;
        if found.len() == need {
            break;
        }
        let spent: usize = found.iter().map(|f| f.0).sum();
        if found.len() + pending.len() < need || spent + (need - found.len()) * (k + 1) > budget {
            return Ok(AttackOutcome::failure(sample, budget, exact));
        }
    }
    if found.len() < need {
        return Ok(AttackOutcome::failure(sample, budget, exact));
    }
    let edits: usize = found.iter().map(|f| f.0).sum();
    if edits > budget {
        return Ok(AttackOutcome::failure(sample, budget, exact));
    }
    let mut adv = sample.clone();
    for (_, i, b) in &found {
        let r = partition.blocks[*i].clone();
        for (pos, e) in r.zip(b.iter()) {
            adv[pos] = e.clone();
        }
    }
    let replay = learner.predict(&adv, x)?;
    if replay != target {
        if exact {
            return Err(Error::ReplayMismatch(format!(
                "flipping {need} blocks of {} did not move the vote at {x}",
                learner.name()
            )));
        }
        return Ok(AttackOutcome::failure(sample, budget, false));
    }
    Ok(AttackOutcome {
        success: true,
        sample: adv,
        edits,
        budget,
        exhaustive: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversaries::brute_force_attack;
    use crate::classes::{ConceptClass, TabularClass};
    use crate::learners::{constant_learner, Erm};
    use crate::meta::Spv;
    use std::sync::Arc;

    fn universe() -> Vec<Example> {
        vec![
            Example::id(0, false),
            Example::id(0, true),
            Example::id(1, false),
            Example::id(1, true),
        ]
    }

    fn unanimous_seven() -> (Spv, Sample) {
        let class = ConceptClass::FiniteTabular(TabularClass::constants(2).unwrap());
        let spv = Spv::with_blocks(Arc::new(Erm::new(class)), 7);
        let s: Sample = (0..7).map(|_| Example::id(0, true)).collect();
        (spv, s)
    }

    #[test]
    fn unanimous_seven_needs_four() {
        let (spv, s) = unanimous_seven();
        let x = Instance::Id(1);
        let three = vote_flip_attack(&spv, &s, &x, false, 3, &universe()).unwrap();
        assert!(!three.success && three.exhaustive);
        let four = vote_flip_attack(&spv, &s, &x, false, 4, &universe()).unwrap();
        assert!(four.success);
        assert_eq!(four.edits, 4);
        four.verify(&spv, &s, &x, false).unwrap();
    }

    #[test]
    fn matches_brute_on_seven() {
        let (spv, s) = unanimous_seven();
        let x = Instance::Id(1);
        for budget in 0..=4 {
            let a = vote_flip_attack(&spv, &s, &x, false, budget, &universe()).unwrap();
            let b = brute_force_attack(&spv, &s, &x, false, budget, &universe()).unwrap();
            assert_eq!((a.success, a.edits), (b.success, b.edits), "budget {budget}");
        }
    }

    #[test]
    fn rejects_non_voting() {
        let s: Sample = (0..3).map(|_| Example::id(0, true)).collect();
        assert!(vote_flip_attack(&constant_learner(true), &s, &Instance::Id(0), false, 1, &universe()).is_err());
    }
}
