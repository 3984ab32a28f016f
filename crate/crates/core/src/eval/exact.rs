//! Exhaustive evaluation over every sample and test point, in exact
//! rational arithmetic.

use num::{BigRational, ToPrimitive, Zero};
use serde::Serialize;

use super::RiskReport;
use crate::adversaries::{enumeration_size, Adversary};
use crate::data::{budget_edits, Sample};
use crate::distribution::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::learners::Learner;

/// Cap on `|support|^(n+1)` times the per-attack enumeration size.
pub const EXACT_LIMIT: f64 = 1e7;

#[derive(Clone, Debug, PartialEq)]
pub struct ExactRisks {
    pub standard: BigRational,
    pub stability: BigRational,
    pub adversarial: BigRational,
    pub budget: usize,
    pub samples: usize,
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn rational(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite mass")
}

/// Exact `(standard risk, stability, adversarial risk)` of `learner` on
/// `D^n` at budget `floor(eta n)`. The adversary must be exact for the
/// learner. Masses are taken as the exact binary values of the `f64`s.
pub fn exact_risks(
    learner: &dyn Learner,
    d: &DiscreteDistribution,
    n: usize,
    eta: f64,
    adversary: Adversary,
) -> Result<ExactRisks> {
    let budget = budget_edits(eta, n);
    if budget > 0 && !adversary.is_exact_for(learner) {
        return Err(Error::unsupported(
            "exact_risks",
            format!("{} is not exact for {}", adversary.name(), learner.name()),
        ));
    }
    let universe = d.support_with_flips();
    let k = d.support().len();
    let per_attack = if budget > 0 {
        enumeration_size(n, budget, universe.len()).max(1.0)
    } else {
        1.0
    };
    let size = (k as f64).powi(n as i32 + 1) * per_attack;
    if size > EXACT_LIMIT {
        return Err(Error::limit(
            "exact_risks",
            format!("|support|^(n+1) * attack = {size:.3e} > {EXACT_LIMIT:e}"),
        ));
    }
    let mass: Vec<BigRational> = d.mass().iter().map(|&m| rational(m)).collect();
    let marginal: Vec<_> = d
        .marginal()
        .into_iter()
        .map(|(x, _)| {
            let w = d
                .iter()
                .zip(&mass)
                .filter(|((e, _), _)| e.x == x)
                .fold(BigRational::zero(), |acc, (_, m)| acc + m);
            (x, w)
        })
        .collect();

    let mut standard = BigRational::zero();
    let mut stability = BigRational::zero();
    let mut adversarial = BigRational::zero();
    let mut idx = vec![0usize; n];
    let mut samples = 0;
    loop {
        let sample: Sample = idx.iter().map(|&i| d.support()[i].clone()).collect();
        let weight = idx
            .iter()
            .fold(BigRational::from_integer(1.into()), |acc, &i| acc * &mass[i]);
        samples += 1;
        if !weight.is_zero() {
            for (x, w) in &marginal {
                let p = learner.predict(&sample, x)?;
                if budget > 0 {
                    let out = adversary.attack(learner, &sample, x, !p, budget, &universe)?;
                    out.verify(learner, &sample, x, !p)?;
                    if out.success {
                        stability += &weight * w;
                    }
                }
            }
            for (e, m) in d.support().iter().zip(&mass) {
                let p = learner.predict(&sample, &e.x)?;
                let wm = &weight * m;
                if p != e.y {
                    standard += &wm;
                    adversarial += &wm;
                } else if budget > 0 {
                    let out = adversary.attack(learner, &sample, &e.x, !e.y, budget, &universe)?;
                    out.verify(learner, &sample, &e.x, !e.y)?;
                    if out.success {
                        adversarial += &wm;
                    }
                }
            }
        }
        // Odometer over support indices.
        let mut j = n;
        loop {
            if j == 0 {
                return Ok(ExactRisks {
                    standard,
                    stability,
                    adversarial,
                    budget,
                    samples,
                });
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < k {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// Exact standard risk as a report.
pub fn standard_risk_exact(learner: &dyn Learner, d: &DiscreteDistribution, n: usize) -> Result<RiskReport> {
    let r = exact_risks(learner, d, n, 0.0, Adversary::Brute)?;
    Ok(RiskReport::exact("standard_risk", to_f64(&r.standard), learner.name()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichReport {
    pub standard: f64,
    pub stability: f64,
    pub adversarial: f64,
    pub budget: usize,
    pub samples: usize,
}

/// Computes the three risks exactly and checks
/// `max(eps, lambda) <= eps_adv <= lambda + eps` with no tolerance.
pub fn sandwich_check(
    learner: &dyn Learner,
    d: &DiscreteDistribution,
    n: usize,
    eta: f64,
    adversary: Adversary,
) -> Result<SandwichReport> {
    let r = exact_risks(learner, d, n, eta, adversary)?;
    let lower = r.standard <= r.adversarial && r.stability <= r.adversarial;
    let upper = r.adversarial <= &r.stability + &r.standard;
    let report = SandwichReport {
        standard: to_f64(&r.standard),
        stability: to_f64(&r.stability),
        adversarial: to_f64(&r.adversarial),
        budget: r.budget,
        samples: r.samples,
    };
    if !(lower && upper) {
        return Err(Error::SandwichViolation(format!(
            "{} on n = {n}, budget {}: eps = {}, lambda = {}, eps_adv = {}",
            learner.name(),
            r.budget,
            r.standard,
            r.stability,
            r.adversarial
        )));
    }
    Ok(report)
}
