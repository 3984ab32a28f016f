//! Classes, learners and distributions from their config descriptions.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::config::{ClassSpec, DistributionSpec, LearnerSpec, Marginal};
use crate::adversaries::coin::{CoinLearner, ConstantCoin, CountThresholdCoin, MajorityCoin};
use crate::classes::{ConceptClass, Halfspace, Hypothesis, TabularClass};
use crate::data::{Example, Instance};
use crate::distribution::{random_simplex, DiscreteDistribution};
use crate::error::{Error, Result};
use crate::learners::{constant_learner, Erm, Learner, MaxMargin, Oig};
use crate::meta::{Pspv, Spv};
use crate::seed::Seed;
use crate::textio;

const RANDOM_CLASS_ATTEMPTS: usize = 200;

/// A random class with VC dimension exactly `d` (1 or 2) on `m` ids: a
/// random subset of grid thresholds or intervals, with the domain shuffled.
pub fn random_class(m: u32, d: usize, seed: &Seed) -> Result<TabularClass> {
    let full = match d {
        1 => TabularClass::thresholds(m)?,
        2 => TabularClass::intervals(m)?,
        _ => return Err(Error::unsupported("random_class", format!("d = {d} (supported: 1, 2)"))),
    };
    let mut rng = seed.rng();
    for _ in 0..RANDOM_CLASS_ATTEMPTS {
        let mut perm: Vec<u32> = (0..m).collect();
        perm.shuffle(&mut rng);
        let mut rows: Vec<u64> = full
            .rows()
            .iter()
            .filter(|_| rng.random_bool(0.5))
            .map(|&r| {
                (0..m)
                    .filter(|&i| (r >> i) & 1 == 1)
                    .fold(0u64, |acc, i| acc | 1 << perm[i as usize])
            })
            .collect();
        rows.sort_unstable();
        rows.dedup();
        if rows.len() < 2 {
            continue;
        }
        let class = TabularClass::new(m, rows)?;
        if class.vc_dimension()? == d {
            return Ok(class);
        }
    }
    Err(Error::InvalidClass(format!("no random class with d = {d} on {m} ids")))
}

pub fn build_class(spec: &ClassSpec, d: Option<usize>, seed: &Seed) -> Result<ConceptClass> {
    Ok(match spec {
        ClassSpec::Intervals { m } => ConceptClass::FiniteTabular(TabularClass::intervals(*m)?),
        ClassSpec::FullCube { m } => ConceptClass::FiniteTabular(TabularClass::full_cube(*m)?),
        ClassSpec::GridThresholds { m } => ConceptClass::FiniteTabular(TabularClass::thresholds(*m)?),
        ClassSpec::Constants { m } => ConceptClass::FiniteTabular(TabularClass::constants(*m)?),
        ClassSpec::Table { rows, path } => {
            let t = match path {
                Some(p) => TabularClass::load(p)?,
                None => TabularClass::parse(&rows.join("\n"))?,
            };
            ConceptClass::FiniteTabular(t)
        }
        ClassSpec::Random { m } => {
            let d = d.ok_or_else(|| Error::Config("a random class needs grid.d".into()))?;
            ConceptClass::FiniteTabular(random_class(*m, d, seed)?)
        }
        ClassSpec::Threshold => ConceptClass::Threshold1D,
        ClassSpec::Halfspace { dim } => ConceptClass::halfspace(*dim)?,
    })
}

/// VC dimension used in bound formulas.
pub fn class_dimension(class: &ConceptClass) -> Result<usize> {
    class.vc_dimension()
}

pub fn build_base(spec: &LearnerSpec, class: &ConceptClass) -> Result<Arc<dyn Learner>> {
    Ok(match spec.base.as_str() {
        "oig" => Arc::new(Oig::new(class.clone())?),
        "erm" => Arc::new(Erm::new(class.clone())),
        "max-margin" => Arc::new(MaxMargin::new(class.clone())?),
        "const0" => Arc::new(constant_learner(false)),
        "const1" => Arc::new(constant_learner(true)),
        other => {
            return Err(Error::Config(format!(
                "unknown base learner `{other}` (expected oig, erm, max-margin, const0, const1)"
            )))
        }
    })
}

/// The configured learner; budget-derived block counts use `eta`.
pub fn build_learner(spec: &LearnerSpec, class: &ConceptClass, eta: f64) -> Result<Arc<dyn Learner>> {
    let base = build_base(spec, class)?;
    Ok(match (spec.meta.as_str(), spec.blocks) {
        ("none", _) => base,
        ("spv", None) => Arc::new(Spv::new(base, eta)),
        ("spv", Some(t)) => Arc::new(Spv::with_blocks(base, t)),
        ("pspv", None) => Arc::new(Pspv::new(base, class.clone(), spec.kp, eta)?),
        ("pspv", Some(t)) => {
            if spec.kp < 1 {
                return Err(Error::Config("kp must be >= 1".into()));
            }
            Arc::new(Pspv::with_blocks(base, class.clone(), spec.kp, t))
        }
        (other, _) => {
            return Err(Error::Config(format!(
                "unknown meta learner `{other}` (expected spv, pspv, none)"
            )))
        }
    })
}

pub fn build_coin_learner(name: &str) -> Result<Box<dyn CoinLearner>> {
    Ok(match name {
        "majority" => Box::new(MajorityCoin),
        "const0" => Box::new(ConstantCoin(false)),
        "const1" => Box::new(ConstantCoin(true)),
        other => match other.strip_prefix("count:").map(str::parse::<f64>) {
            Some(Ok(frac)) if (0.0..=1.0).contains(&frac) => Box::new(CountThresholdCoin { frac }),
            _ => {
                return Err(Error::Config(format!(
                    "unknown coin learner `{other}` (expected majority, const0, const1, count:<fraction>)"
                )))
            }
        },
    })
}

fn with_noise(points: Vec<(Instance, bool, f64)>, noise: f64) -> Result<DiscreteDistribution> {
    if !(0.0..=0.5).contains(&noise) {
        return Err(Error::Config(format!("noise = {noise} outside [0, 1/2]")));
    }
    let mut support = Vec::new();
    let mut mass = Vec::new();
    for (x, y, w) in points {
        for (label, share) in [(y, 1.0 - noise), (!y, noise)] {
            if w * share > 0.0 {
                support.push(Example::new(x.clone(), label));
                mass.push(w * share);
            }
        }
    }
    DiscreteDistribution::from_weights(support, mass)
}

/// The configured distribution: labels from a target in the class, then
/// flipped with probability `noise`.
pub fn build_distribution(spec: &DistributionSpec, class: &ConceptClass, seed: &Seed) -> Result<DiscreteDistribution> {
    if let Some(p) = &spec.path {
        let (u, d) = textio::load_distribution(p)?;
        if u != class.universe() {
            return Err(Error::Config(format!(
                "distribution universe {u} does not match class universe {}",
                class.universe()
            )));
        }
        return Ok(d);
    }
    let mut rng = seed.rng();
    let points: Vec<(Instance, bool, f64)> = match class {
        ConceptClass::FiniteTabular(t) => {
            let m = t.domain() as usize;
            let w = match spec.marginal {
                Marginal::Uniform => vec![1.0 / m as f64; m],
                Marginal::Random => random_simplex(m, &mut rng),
            };
            let row = match spec.target_row {
                Some(r) if r < t.len() => r,
                Some(r) => {
                    return Err(Error::Config(format!(
                        "target_row {r} out of range (class has {} rows)",
                        t.len()
                    )))
                }
                None => rng.random_range(0..t.len()),
            };
            (0..m)
                .map(|i| (Instance::Id(i as u32), t.label(row, i as u32), w[i]))
                .collect()
        }
        ConceptClass::Threshold1D => {
            let k = spec.points.max(2);
            let theta = spec.theta.unwrap_or(0.5);
            let h = Hypothesis::Threshold(theta);
            let w = marginal(spec.marginal, k, &mut rng);
            (0..k)
                .map(|i| {
                    let x = Instance::scalar(i as f64 / (k - 1) as f64);
                    let y = h.evaluate(&x)?;
                    Ok((x, y, w[i]))
                })
                .collect::<Result<_>>()?
        }
        ConceptClass::Halfspace { dim } => {
            let w_vec = spec.w.clone().unwrap_or_else(|| vec![1.0; *dim]);
            if w_vec.len() != *dim {
                return Err(Error::Config(format!(
                    "w has {} coordinates, expected {dim}",
                    w_vec.len()
                )));
            }
            let h = Halfspace::new(w_vec, spec.b.unwrap_or(-(*dim as f64) / 2.0));
            let k = spec.points.max(1);
            let w = marginal(spec.marginal, k, &mut rng);
            (0..k)
                .map(|i| {
                    let x = Instance::point((0..*dim).map(|_| rng.random::<f64>()).collect::<Vec<_>>());
                    Ok((x.clone(), h.evaluate(&x)?, w[i]))
                })
                .collect::<Result<_>>()?
        }
    };
    with_noise(points, spec.noise)
}

fn marginal(kind: Marginal, k: usize, rng: &mut crate::seed::Rng) -> Vec<f64> {
    match kind {
        Marginal::Uniform => vec![1.0 / k as f64; k],
        Marginal::Random => random_simplex(k, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_classes_have_requested_dimension() {
        for s in 0..10 {
            for d in [1, 2] {
                let c = random_class(6, d, &Seed::new(s)).unwrap();
                assert_eq!(c.vc_dimension().unwrap(), d);
            }
        }
        assert!(random_class(6, 3, &Seed::new(0)).is_err());
    }

    #[test]
    fn noisy_distribution_masses() {
        let class = ConceptClass::FiniteTabular(TabularClass::intervals(4).unwrap());
        let spec = DistributionSpec {
            target_row: Some(3),
            noise: 0.1,
            ..Default::default()
        };
        let d = build_distribution(&spec, &class, &Seed::new(1)).unwrap();
        assert_eq!(d.support().len(), 8);
        assert!((crate::eval::opt_value(&class, &d).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn threshold_grid() {
        let spec = DistributionSpec {
            points: 5,
            ..Default::default()
        };
        let d = build_distribution(&spec, &ConceptClass::Threshold1D, &Seed::new(1)).unwrap();
        let labels: Vec<bool> = d.support().iter().map(|e| e.y).collect();
        assert_eq!(labels, vec![false, false, true, true, true]);
    }

    #[test]
    fn coin_learners() {
        assert_eq!(build_coin_learner("count:0.7").unwrap().name(), "count>=0.7");
        assert!(build_coin_learner("count:2").is_err());
        assert!(build_coin_learner("median").is_err());
    }
}
