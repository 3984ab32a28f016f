//! Finitely supported distributions over examples and i.i.d. sampling.

use std::collections::{BTreeMap, HashSet};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::Rng as _;

use crate::data::{Example, Instance, Sample, Universe};
use crate::error::{Error, Result};
use crate::seed::{Rng, Seed};

const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct DiscreteDistribution {
    support: Vec<Example>,
    mass: Vec<f64>,
    index: WeightedIndex<f64>,
}

impl PartialEq for DiscreteDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.support == other.support && self.mass == other.mass
    }
}

impl DiscreteDistribution {
    pub fn new(support: Vec<Example>, mass: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if support.len() != mass.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} support points but {} weights",
                support.len(),
                mass.len()
            )));
        }
        if let Some(w) = mass.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("bad weight {w}")));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}, not 1")));
        }
        let mut seen = HashSet::new();
        for e in &support {
            if !seen.insert(e) {
                return Err(Error::InvalidDistribution(format!(
                    "duplicate support point ({}, {})",
                    e.x, e.y as u8
                )));
            }
        }
        let index = WeightedIndex::new(&mass).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
        Ok(DiscreteDistribution { support, mass, index })
    }

    /// Normalizes nonnegative weights before construction.
    pub fn from_weights(support: Vec<Example>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Self::new(support, weights.iter().map(|w| w / total).collect())
    }

    pub fn point_mass(e: Example) -> Self {
        Self::new(vec![e], vec![1.0]).expect("point mass is valid")
    }

    /// Marginal over `0..m` labeled deterministically by `label`.
    pub fn labeled(marginal: &[f64], label: impl Fn(u32) -> bool) -> Result<Self> {
        let mut support = Vec::new();
        let mut mass = Vec::new();
        for (i, &w) in marginal.iter().enumerate() {
            if w > 0.0 {
                support.push(Example::id(i as u32, label(i as u32)));
                mass.push(w);
            }
        }
        Self::from_weights(support, mass)
    }

    pub fn support(&self) -> &[Example] {
        &self.support
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Example, f64)> {
        self.support.iter().zip(self.mass.iter().copied())
    }

    pub fn check(&self, universe: &Universe) -> Result<()> {
        self.support.iter().try_for_each(|e| universe.check(&e.x))
    }

    pub fn draw(&self, rng: &mut Rng) -> Example {
        self.support[self.index.sample(rng)].clone()
    }

    /// Index into the support of one draw.
    pub fn draw_index(&self, rng: &mut Rng) -> usize {
        self.index.sample(rng)
    }

    /// `n` independent draws; reproducible from `seed`.
    pub fn sample_iid(&self, n: usize, seed: &Seed) -> Sample {
        let mut rng = seed.rng();
        (0..n).map(|_| self.draw(&mut rng)).collect()
    }

    /// Marginal distribution over instances, in sorted instance order.
    pub fn marginal(&self) -> Vec<(Instance, f64)> {
        let mut acc: BTreeMap<Instance, f64> = BTreeMap::new();
        for (e, w) in self.iter() {
            *acc.entry(e.x.clone()).or_insert(0.0) += w;
        }
        acc.into_iter().collect()
    }

    /// `Pr[y = 1]`.
    pub fn positive_rate(&self) -> f64 {
        self.iter().filter(|(e, _)| e.y).map(|(_, w)| w).sum()
    }

    /// Draws an instance from the marginal.
    pub fn draw_instance(&self, rng: &mut Rng) -> Instance {
        self.draw(rng).x
    }

    /// The support closed under label flips, in a fixed order: each support
    /// example followed by its flip when that flip is not itself in support.
    pub fn support_with_flips(&self) -> Vec<Example> {
        let mut out: Vec<Example> = Vec::with_capacity(2 * self.support.len());
        let mut seen = HashSet::new();
        for e in &self.support {
            for cand in [e.clone(), e.flipped()] {
                if seen.insert(cand.clone()) {
                    out.push(cand);
                }
            }
        }
        out
    }
}

/// Random weights on `k` points drawn uniformly from the simplex.
pub fn random_simplex(k: usize, rng: &mut Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|v| v / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let a = Example::id(0, true);
        assert!(DiscreteDistribution::new(vec![a.clone()], vec![0.5]).is_err());
        assert!(DiscreteDistribution::new(vec![a.clone(), a.clone()], vec![0.5, 0.5]).is_err());
        assert!(DiscreteDistribution::new(vec![a.clone()], vec![1.0 + 1e-13]).is_ok());
        assert!(DiscreteDistribution::new(vec![], vec![]).is_err());
        assert!(DiscreteDistribution::new(vec![Example::id(0, true), Example::id(0, false)], vec![0.3, 0.7]).is_ok());
    }

    #[test]
    fn point_mass_sampling() {
        let d = DiscreteDistribution::point_mass(Example::id(4, true));
        let s = d.sample_iid(5, &Seed::new(1));
        assert_eq!(s.len(), 5);
        assert!(s.iter().all(|e| *e == Example::id(4, true)));
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = DiscreteDistribution::new(
            vec![Example::id(0, false), Example::id(1, true), Example::id(2, true)],
            vec![0.2, 0.3, 0.5],
        )
        .unwrap();
        let seed = Seed::new(99).child(3);
        assert_eq!(d.sample_iid(50, &seed), d.sample_iid(50, &seed));
        assert_ne!(d.sample_iid(50, &seed), d.sample_iid(50, &seed.child(1)));
    }

    #[test]
    fn uniform_frequencies_concentrate() {
        let d = DiscreteDistribution::new(vec![Example::id(0, false), Example::id(1, true)], vec![0.5, 0.5]).unwrap();
        let s = d.sample_iid(100_000, &Seed::new(5));
        let freq = s.ones() as f64 / s.len() as f64;
        assert!((freq - 0.5).abs() < 0.01, "{freq}");
    }

    #[test]
    fn marginal_merges_labels() {
        let d = DiscreteDistribution::new(
            vec![Example::id(1, true), Example::id(0, false), Example::id(1, false)],
            vec![0.25, 0.5, 0.25],
        )
        .unwrap();
        assert_eq!(d.marginal(), vec![(Instance::Id(0), 0.5), (Instance::Id(1), 0.5)]);
        assert_eq!(d.support_with_flips().len(), 4);
    }
}
