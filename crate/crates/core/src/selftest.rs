//! Exhaustive and randomized invariant suites over tiny instances: the
//! certificate chain, vote-flip versus brute-force optimality, and the
//! risk sandwich. Each suite counts violations instead of stopping at the
//! first one.

use std::sync::Arc;

use itertools::Itertools;
use rand::seq::IndexedRandom;
use rand::Rng as _;
use serde::Serialize;

use crate::adversaries::{brute_force_attack, vote_flip_attack, Adversary};
use crate::classes::{ConceptClass, TabularClass};
use crate::data::{Example, Instance, Sample};
use crate::distribution::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::eval::sandwich_check;
use crate::exec::Execution;
use crate::learners::{constant_learner, Erm, Learner, Oig};
use crate::meta::{certificate_exact, certificate_paper, optimal_certificate_oracle, Partition, Spv};
use crate::seed::Seed;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub instances: usize,
    pub violations: usize,
    /// Suite-specific count (e.g. certificates that are tight).
    pub tight: usize,
    /// The first few violations.
    pub detail: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.instances > 0
    }
}

/// Two ids with both labels.
pub fn tiny_universe() -> Vec<Example> {
    vec![
        Example::id(0, false),
        Example::id(0, true),
        Example::id(1, false),
        Example::id(1, true),
    ]
}

fn tiny_bases() -> Vec<Arc<dyn Learner>> {
    vec![
        Arc::new(Erm::new(ConceptClass::FiniteTabular(
            TabularClass::full_cube(2).unwrap(),
        ))),
        Arc::new(Erm::new(ConceptClass::FiniteTabular(
            TabularClass::constants(2).unwrap(),
        ))),
    ]
}

fn collect(name: &str, rows: Vec<(usize, usize, Vec<String>)>) -> SuiteReport {
    let mut detail = Vec::new();
    let (mut violations, mut tight) = (0, 0);
    for (v, t, d) in &rows {
        violations += v;
        tight += t;
        detail.extend(d.iter().take(5usize.saturating_sub(detail.len())).cloned());
    }
    SuiteReport {
        name: name.to_string(),
        instances: rows.len(),
        violations,
        tight,
        detail,
    }
}

/// Every sample of length at most `n_max` over [`tiny_universe`], split
/// into `t <= t_max` blocks, for ERM bases over tabular classes. Those
/// bases depend only on the counts within a block, so samples are
/// enumerated up to reordering inside each block. For both query points
/// checks `margin <= exact <= oracle`, where the oracle searches every
/// sample within `exact + 1` edits.
pub fn certificate_soundness(n_max: usize, t_max: usize, exec: Execution) -> Result<SuiteReport> {
    let universe = tiny_universe();
    let mut jobs: Vec<(usize, Sample, usize)> = Vec::new();
    for n in 1..=n_max {
        for t in 1..=t_max.min(n) {
            let part = Partition::balanced(n, t)?;
            let per_block: Vec<Vec<Vec<Example>>> = part
                .sizes()
                .into_iter()
                .map(|b| universe.iter().cloned().combinations_with_replacement(b).collect())
                .collect();
            for blocks in per_block.iter().multi_cartesian_product() {
                let s: Sample = blocks.into_iter().flatten().cloned().collect();
                for base in 0..tiny_bases().len() {
                    jobs.push((t, s.clone(), base));
                }
            }
        }
    }
    let rows = exec.try_map(jobs.len(), |i| -> Result<(usize, usize, Vec<String>)> {
        let (t, s, b) = &jobs[i];
        let spv = Spv::with_blocks(tiny_bases()[*b].clone(), *t);
        let vh = spv.fit(s)?;
        let (mut v, mut tight, mut detail) = (0, 0, Vec::new());
        for x in [Instance::Id(0), Instance::Id(1)] {
            let exact = certificate_exact(&vh, &x)?;
            let margin = certificate_paper(&vh, &x)?;
            let k = exact.edits();
            let oracle = optimal_certificate_oracle(&spv, s, &x, &universe, k + 1)?;
            if margin.value > exact.value || oracle.edits < k {
                v += 1;
                detail.push(format!(
                    "{} t={t} x={x}: margin {} exact {} oracle {:?}",
                    spv.name(),
                    margin.edits(),
                    k,
                    oracle
                ));
            } else if oracle.edits == k {
                tight += 1;
            }
        }
        Ok((v, tight, detail))
    })?;
    Ok(collect("certificate_soundness", rows))
}

/// Random voting instances with `n <= 9`, budget at most 3 and replacements
/// from [`tiny_universe`]: the vote-flip attack must match brute force in
/// success and in edits used.
pub fn voteflip_equivalence(count: usize, seed: &Seed, exec: Execution) -> Result<SuiteReport> {
    let universe = tiny_universe();
    let rows = exec.try_map(count, |i| -> Result<(usize, usize, Vec<String>)> {
        let mut rng = seed.child(i as u64).rng();
        let n = rng.random_range(1..=9);
        let t = rng.random_range(1..=n.min(5));
        let base: Arc<dyn Learner> = match rng.random_range(0..3) {
            0 => Arc::new(Oig::new(ConceptClass::FiniteTabular(TabularClass::full_cube(2)?))?),
            b => tiny_bases()[b - 1].clone(),
        };
        let spv = Spv::with_blocks(base, t);
        let s: Sample = (0..n).map(|_| universe.choose(&mut rng).unwrap().clone()).collect();
        let x = Instance::Id(rng.random_range(0..2));
        let budget = rng.random_range(0..=3);
        let target = !spv.predict(&s, &x)?;
        let a = vote_flip_attack(&spv, &s, &x, target, budget, &universe)?;
        let b = brute_force_attack(&spv, &s, &x, target, budget, &universe)?;
        a.verify(&spv, &s, &x, target)?;
        b.verify(&spv, &s, &x, target)?;
        if (a.success, a.edits) != (b.success, b.edits) {
            let d = format!(
                "{} n={n} t={t} budget={budget} x={x}: voteflip ({}, {}) brute ({}, {})",
                spv.name(),
                a.success,
                a.edits,
                b.success,
                b.edits
            );
            return Ok((1, 0, vec![d]));
        }
        Ok((0, a.success as usize, Vec::new()))
    })?;
    Ok(collect("voteflip_equivalence", rows))
}

/// A random two-point distribution, sample size, block count and budget.
#[derive(Clone, Debug)]
pub struct TinyInstance {
    pub dist: DiscreteDistribution,
    pub n: usize,
    pub t: usize,
    pub eta: f64,
    pub base: usize,
    pub constant: Option<bool>,
}

pub fn random_tiny_instance(seed: &Seed) -> Result<TinyInstance> {
    let mut rng = seed.rng();
    let universe = tiny_universe();
    let pair: Vec<Example> = universe.choose_multiple(&mut rng, 2).cloned().collect();
    let m = rng.random_range(0.05..0.95);
    let dist = DiscreteDistribution::new(pair, vec![m, 1.0 - m])?;
    let n = rng.random_range(1..=5);
    let t = rng.random_range(1..=n);
    let budget = rng.random_range(0..=2.min(n));
    let constant = if rng.random_range(0..6) == 0 {
        Some(rng.random())
    } else {
        None
    };
    Ok(TinyInstance {
        dist,
        n,
        t,
        eta: budget as f64 / n as f64,
        base: rng.random_range(0..2),
        constant,
    })
}

/// Exact sandwich on `count` random tiny instances.
pub fn sandwich_suite(count: usize, seed: &Seed, exec: Execution) -> Result<SuiteReport> {
    let rows = exec.try_map(count, |i| -> Result<(usize, usize, Vec<String>)> {
        let inst = random_tiny_instance(&seed.child(i as u64))?;
        let learner: Box<dyn Learner> = match inst.constant {
            Some(b) => Box::new(constant_learner(b)),
            None => Box::new(Spv::with_blocks(tiny_bases()[inst.base].clone(), inst.t)),
        };
        let adversary = if Adversary::VoteFlip.is_exact_for(learner.as_ref()) {
            Adversary::VoteFlip
        } else {
            Adversary::Brute
        };
        match sandwich_check(learner.as_ref(), &inst.dist, inst.n, inst.eta, adversary) {
            Ok(r) => Ok((0, (r.adversarial > r.standard) as usize, Vec::new())),
            Err(Error::SandwichViolation(msg)) => Ok((1, 0, vec![msg])),
            Err(e) => Err(e),
        }
    })?;
    Ok(collect("sandwich", rows))
}

/// The suites at the sizes used by the command-line self test.
pub fn run_all(exec: Execution) -> Result<Vec<SuiteReport>> {
    Ok(vec![
        certificate_soundness(7, 3, exec)?,
        voteflip_equivalence(200, &Seed::new(11), exec)?,
        sandwich_suite(60, &Seed::new(12), exec)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        let c = certificate_soundness(4, 3, Execution::Parallel).unwrap();
        assert!(c.passed(), "{c:?}");
        assert!(c.tight > 0);
        let v = voteflip_equivalence(40, &Seed::new(1), Execution::Parallel).unwrap();
        assert!(v.passed(), "{v:?}");
        let s = sandwich_suite(20, &Seed::new(2), Execution::Parallel).unwrap();
        assert!(s.passed(), "{s:?}");
    }

    #[test]
    fn tiny_instances_are_reproducible() {
        let a = random_tiny_instance(&Seed::new(3)).unwrap();
        let b = random_tiny_instance(&Seed::new(3)).unwrap();
        assert_eq!((a.dist, a.n, a.t, a.eta), (b.dist, b.n, b.t, b.eta));
    }
}
