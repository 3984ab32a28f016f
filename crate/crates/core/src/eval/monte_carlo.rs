//! Monte Carlo estimators. Trial `i` draws its sample and test point from
//! `seed / i`, so every estimator sees the same trials under the same seed.

use serde::Serialize;

use super::RiskReport;
use crate::adversaries::{lower_bound, relabel_target_attack, Adversary};
use crate::classes::ConceptClass;
use crate::data::{budget_edits, Example, Sample};
use crate::distribution::DiscreteDistribution;
use crate::error::Result;
use crate::exec::Execution;
use crate::learners::Learner;
use crate::seed::{role, Seed};

fn draw_trial(d: &DiscreteDistribution, n: usize, ts: &Seed) -> (Sample, Example) {
    let sample = d.sample_iid(n, &ts.child(role::SAMPLE));
    let test = d.draw(&mut ts.child(role::TEST).rng());
    (sample, test)
}

/// Estimate of `Pr[Lrn(S)(x) != y]` over `S ~ D^n, (x, y) ~ D`.
pub fn standard_risk(
    learner: &dyn Learner,
    d: &DiscreteDistribution,
    n: usize,
    trials: usize,
    seed: &Seed,
    exec: Execution,
) -> Result<RiskReport> {
    let losses = exec.try_map(trials, |i| -> Result<bool> {
        let (s, e) = draw_trial(d, n, &seed.child(i as u64));
        Ok(learner.predict(&s, &e.x)? != e.y)
    })?;
    let hits = losses.iter().filter(|&&l| l).count();
    Ok(RiskReport::from_counts("standard_risk", hits, trials, learner.name()))
}

/// Estimate of the probability that some sample within `floor(eta n)`
/// edits makes the learner err at the test point. Replacements come from
/// the support of `D` and its label flips.
#[allow(clippy::too_many_arguments)]
pub fn adversarial_risk(
    learner: &dyn Learner,
    d: &DiscreteDistribution,
    n: usize,
    eta: f64,
    adversary: Adversary,
    trials: usize,
    seed: &Seed,
    exec: Execution,
) -> Result<RiskReport> {
    Ok(adversarial_risk_inspected(learner, d, n, eta, adversary, trials, seed, exec, None)?.0)
}

/// Sample predicate checked on every clean sample and every successful
/// tampered sample.
pub type Inspect<'a> = &'a (dyn Fn(&Sample) -> Result<bool> + Sync);

/// [`adversarial_risk`], also counting samples on which `inspect` fails.
#[allow(clippy::too_many_arguments)]
pub fn adversarial_risk_inspected(
    learner: &dyn Learner,
    d: &DiscreteDistribution,
    n: usize,
    eta: f64,
    adversary: Adversary,
    trials: usize,
    seed: &Seed,
    exec: Execution,
    inspect: Option<Inspect<'_>>,
) -> Result<(RiskReport, usize)> {
    let budget = budget_edits(eta, n);
    let universe = d.support_with_flips();
    let check = |s: &Sample| -> Result<usize> {
        match inspect {
            Some(f) => Ok(!f(s)? as usize),
            None => Ok(0),
        }
    };
    let rows = exec.try_map(trials, |i| -> Result<(bool, usize)> {
        let (s, e) = draw_trial(d, n, &seed.child(i as u64));
        let bad = check(&s)?;
        if learner.predict(&s, &e.x)? != e.y {
            return Ok((true, bad));
        }
        if budget == 0 {
            return Ok((false, bad));
        }
        let out = adversary.attack(learner, &s, &e.x, !e.y, budget, &universe)?;
        out.verify(learner, &s, &e.x, !e.y)?;
        let bad = bad + if out.success { check(&out.sample)? } else { 0 };
        Ok((out.success, bad))
    })?;
    let hits = rows.iter().filter(|r| r.0).count();
    let violations = rows.iter().map(|r| r.1).sum();
    let mut r = RiskReport::from_counts("adversarial_risk", hits, trials, learner.name());
    r.adversary = Some(adversary.name().to_string());
    r.budget = budget;
    r.lower_bound_only = budget > 0 && !adversary.is_exact_for(learner);
    Ok((r, violations))
}

/// Estimate of the probability that some sample within `floor(eta n)`
/// edits changes the prediction at `x ~ D_x`.
#[allow(clippy::too_many_arguments)]
pub fn prediction_stability(
    learner: &dyn Learner,
    d: &DiscreteDistribution,
    n: usize,
    eta: f64,
    adversary: Adversary,
    trials: usize,
    seed: &Seed,
    exec: Execution,
) -> Result<RiskReport> {
    let budget = budget_edits(eta, n);
    let universe = d.support_with_flips();
    let flips = exec.try_map(trials, |i| -> Result<bool> {
        let (s, e) = draw_trial(d, n, &seed.child(i as u64));
        if budget == 0 {
            return Ok(false);
        }
        let p = learner.predict(&s, &e.x)?;
        let out = adversary.attack(learner, &s, &e.x, !p, budget, &universe)?;
        out.verify(learner, &s, &e.x, !p)?;
        Ok(out.success)
    })?;
    let hits = flips.iter().filter(|&&l| l).count();
    let mut r = RiskReport::from_counts("prediction_stability", hits, trials, learner.name());
    r.adversary = Some(adversary.name().to_string());
    r.budget = budget;
    r.lower_bound_only = budget > 0 && !adversary.is_exact_for(learner);
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerBoundReport {
    pub d: usize,
    pub budget: usize,
    /// Error under the relabeling attack.
    pub adversarial: RiskReport,
    /// Frequency of a test point other than `v1` that occurs at most
    /// `budget` times in the sample.
    pub hard: RiskReport,
}

/// Runs the relabeling attack on the hard distribution, redrawing the
/// labeling in every trial.
#[allow(clippy::too_many_arguments)]
pub fn realizable_lower_bound(
    learner: &dyn Learner,
    class: &ConceptClass,
    d: usize,
    eta: f64,
    n: usize,
    trials: usize,
    seed: &Seed,
    exec: Execution,
) -> Result<LowerBoundReport> {
    let budget = budget_edits(eta, n);
    let rows = exec.try_map(trials, |i| -> Result<(bool, bool)> {
        let ts = seed.child(i as u64);
        let (dist, rec) = lower_bound::realizable_lb_distribution_with_d(class, d, eta, &ts.child(role::LABELING))?;
        let (s, e) = draw_trial(&dist, n, &ts);
        let hard = e.x != rec.points[0] && s.occurrences(&e.x) <= budget;
        if learner.predict(&s, &e.x)? != e.y {
            return Ok((true, hard));
        }
        let out = relabel_target_attack(learner, &s, &e.x, e.y, budget)?;
        Ok((out.chosen.is_some(), hard))
    })?;
    let wrong = rows.iter().filter(|r| r.0).count();
    let hard = rows.iter().filter(|r| r.1).count();
    let mut adversarial = RiskReport::from_counts("adversarial_risk", wrong, trials, learner.name());
    adversarial.adversary = Some("relabel".into());
    adversarial.budget = budget;
    adversarial.lower_bound_only = true;
    Ok(LowerBoundReport {
        d,
        budget,
        adversarial,
        hard: RiskReport::from_counts("hard_event", hard, trials, learner.name()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::TabularClass;
    use crate::learners::{constant_learner, Erm};
    use crate::meta::Spv;
    use std::sync::Arc;

    fn coin(p: f64) -> DiscreteDistribution {
        DiscreteDistribution::new(vec![Example::id(0, true), Example::id(0, false)], vec![p, 1.0 - p]).unwrap()
    }

    #[test]
    fn constant_learner_risk() {
        let r = standard_risk(
            &constant_learner(true),
            &coin(0.3),
            5,
            20_000,
            &Seed::new(1),
            Execution::Parallel,
        )
        .unwrap();
        assert!((r.estimate - 0.7).abs() < 4.0 * r.std_error);
        let a = adversarial_risk(
            &constant_learner(true),
            &coin(0.3),
            5,
            0.4,
            Adversary::Brute,
            2000,
            &Seed::new(1),
            Execution::Parallel,
        )
        .unwrap();
        let s = standard_risk(
            &constant_learner(true),
            &coin(0.3),
            5,
            2000,
            &Seed::new(1),
            Execution::Parallel,
        )
        .unwrap();
        assert_eq!(a.hits, s.hits);
        let l = prediction_stability(
            &constant_learner(true),
            &coin(0.3),
            5,
            0.4,
            Adversary::Brute,
            500,
            &Seed::new(1),
            Execution::Parallel,
        )
        .unwrap();
        assert_eq!(l.estimate, 0.0);
    }

    #[test]
    fn budget_zero_is_standard_risk() {
        let class = ConceptClass::FiniteTabular(TabularClass::full_cube(2).unwrap());
        let spv = Spv::new(Arc::new(Erm::new(class)), 0.1);
        let d = DiscreteDistribution::new(
            vec![Example::id(0, true), Example::id(1, false), Example::id(1, true)],
            vec![0.5, 0.3, 0.2],
        )
        .unwrap();
        let s = standard_risk(&spv, &d, 20, 1000, &Seed::new(5), Execution::Parallel).unwrap();
        let a = adversarial_risk(
            &spv,
            &d,
            20,
            0.0,
            Adversary::VoteFlip,
            1000,
            &Seed::new(5),
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!((s.hits, s.estimate.to_bits()), (a.hits, a.estimate.to_bits()));
        let l = prediction_stability(
            &spv,
            &d,
            20,
            0.0,
            Adversary::VoteFlip,
            100,
            &Seed::new(5),
            Execution::Parallel,
        )
        .unwrap();
        assert_eq!(l.hits, 0);
    }

    #[test]
    fn reports_do_not_depend_on_execution() {
        let class = ConceptClass::FiniteTabular(TabularClass::full_cube(2).unwrap());
        let spv = Spv::new(Arc::new(Erm::new(class)), 0.1);
        let d = DiscreteDistribution::new(vec![Example::id(0, true), Example::id(1, false)], vec![0.7, 0.3]).unwrap();
        let a = adversarial_risk(
            &spv,
            &d,
            30,
            0.1,
            Adversary::VoteFlip,
            300,
            &Seed::new(9),
            Execution::Parallel,
        )
        .unwrap();
        let b = adversarial_risk(
            &spv,
            &d,
            30,
            0.1,
            Adversary::VoteFlip,
            300,
            &Seed::new(9),
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(a, b);
        assert!(!a.lower_bound_only);
    }
}
