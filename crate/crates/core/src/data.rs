//! Examples, samples, Hamming distance, the adversary's edit budget and the
//! half-up rounding rule used by every majority vote.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A domain point: an id into a finite domain or a real vector.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Instance {
    Id(u32),
    Point(Box<[f64]>),
}

impl Instance {
    pub fn point(coords: impl Into<Vec<f64>>) -> Self {
        Instance::Point(coords.into().into_boxed_slice())
    }

    pub fn scalar(x: f64) -> Self {
        Instance::Point(vec![x].into_boxed_slice())
    }

    pub fn as_id(&self) -> Option<u32> {
        match self {
            Instance::Id(i) => Some(*i),
            Instance::Point(_) => None,
        }
    }

    pub fn as_point(&self) -> Option<&[f64]> {
        match self {
            Instance::Point(p) => Some(p),
            Instance::Id(_) => None,
        }
    }

    /// The single coordinate of a one-dimensional point.
    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Instance::Point(p) if p.len() == 1 => Some(p[0]),
            _ => None,
        }
    }
}

// -0.0 and 0.0 are the same instance.
fn canonical_bits(v: f64) -> u64 {
    (v + 0.0).to_bits()
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Instance::Id(a), Instance::Id(b)) => a == b,
            (Instance::Point(a), Instance::Point(b)) => {
                a.len() == b.len()
                    && a.iter()
                        .zip(b.iter())
                        .all(|(x, y)| canonical_bits(*x) == canonical_bits(*y))
            }
            _ => false,
        }
    }
}

impl Eq for Instance {}

impl Hash for Instance {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Instance::Id(i) => {
                0u8.hash(state);
                i.hash(state);
            }
            Instance::Point(p) => {
                1u8.hash(state);
                p.len().hash(state);
                for v in p.iter() {
                    canonical_bits(*v).hash(state);
                }
            }
        }
    }
}

impl Ord for Instance {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Instance::Id(a), Instance::Id(b)) => a.cmp(b),
            (Instance::Id(_), Instance::Point(_)) => Ordering::Less,
            (Instance::Point(_), Instance::Id(_)) => Ordering::Greater,
            (Instance::Point(a), Instance::Point(b)) => {
                for (x, y) in a.iter().zip(b.iter()) {
                    match (x + 0.0).total_cmp(&(y + 0.0)) {
                        Ordering::Equal => continue,
                        o => return o,
                    }
                }
                a.len().cmp(&b.len())
            }
        }
    }
}

impl PartialOrd for Instance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instance::Id(i) => write!(f, "{i}"),
            Instance::Point(p) => {
                for (k, v) in p.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
        }
    }
}

/// The instance space an experiment is declared over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Universe {
    Finite { size: u32 },
    Real { dim: usize },
}

impl Universe {
    pub fn contains(&self, x: &Instance) -> bool {
        match (self, x) {
            (Universe::Finite { size }, Instance::Id(i)) => i < size,
            (Universe::Real { dim }, Instance::Point(p)) => p.len() == *dim && p.iter().all(|v| v.is_finite()),
            _ => false,
        }
    }

    pub fn check(&self, x: &Instance) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::UniverseMismatch {
                instance: x.to_string(),
                universe: self.to_string(),
            })
        }
    }
}

impl fmt::Display for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Universe::Finite { size } => write!(f, "finite {size}"),
            Universe::Real { dim } => write!(f, "real {dim}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Example {
    pub x: Instance,
    pub y: bool,
}

impl Example {
    pub fn new(x: Instance, y: bool) -> Self {
        Example { x, y }
    }

    pub fn id(i: u32, y: bool) -> Self {
        Example::new(Instance::Id(i), y)
    }

    pub fn scalar(x: f64, y: bool) -> Self {
        Example::new(Instance::scalar(x), y)
    }

    pub fn flipped(&self) -> Self {
        Example::new(self.x.clone(), !self.y)
    }
}

/// An ordered sequence of examples. Position matters: Hamming distance is
/// positional and partitions are consecutive.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sample {
    examples: Vec<Example>,
}

impl Sample {
    pub fn new(examples: Vec<Example>) -> Self {
        Sample { examples }
    }

    pub fn into_inner(self) -> Vec<Example> {
        self.examples
    }

    /// Checks every instance against `universe`.
    pub fn check(&self, universe: &Universe) -> Result<()> {
        self.examples.iter().try_for_each(|e| universe.check(&e.x))
    }

    pub fn ones(&self) -> usize {
        self.examples.iter().filter(|e| e.y).count()
    }

    /// Number of positions holding instance `x`.
    pub fn occurrences(&self, x: &Instance) -> usize {
        self.examples.iter().filter(|e| &e.x == x).count()
    }

    pub fn sub(&self, range: std::ops::Range<usize>) -> Sample {
        Sample::new(self.examples[range].to_vec())
    }
}

impl Deref for Sample {
    type Target = Vec<Example>;

    fn deref(&self) -> &Self::Target {
        &self.examples
    }
}

impl DerefMut for Sample {
    fn deref_mut(&mut self) -> &mut Self::Target {
        &mut self.examples
    }
}

impl FromIterator<Example> for Sample {
    fn from_iter<I: IntoIterator<Item = Example>>(iter: I) -> Self {
        Sample::new(iter.into_iter().collect())
    }
}

/// Number of positions at which the two samples differ.
pub fn hamming_distance(s: &[Example], t: &[Example]) -> Result<usize> {
    if s.len() != t.len() {
        return Err(Error::LengthMismatch {
            left: s.len(),
            right: t.len(),
        });
    }
    Ok(s.iter().zip(t).filter(|(a, b)| a != b).count())
}

/// Largest integer `k` with `k <= eta * n`.
///
/// Products that land within 1e-9 (relative) of an integer are snapped to it,
/// so that e.g. `0.29 * 100` is read as 29 rather than 28.
pub fn budget_edits(eta: f64, n: usize) -> usize {
    let product = eta * n as f64;
    if product <= 0.0 || !product.is_finite() {
        return 0;
    }
    let nearest = product.round();
    if (product - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        product.floor() as usize
    }
}

/// Nearest integer, with half-ties rounded up (`k + 1/2 -> k + 1`).
pub fn nearest_int_round(r: f64) -> i64 {
    let floor = r.floor();
    if r - floor >= 0.5 {
        floor as i64 + 1
    } else {
        floor as i64
    }
}

/// Tie-rule majority of `ones` positive votes out of `total`: 1 iff the mean
/// vote rounds to 1, i.e. `2 * ones >= total`.
pub fn majority_of_counts(ones: usize, total: usize) -> bool {
    debug_assert!(total >= 1);
    2 * ones >= total
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(v: &[(u32, bool)]) -> Vec<Example> {
        v.iter().map(|&(i, y)| Example::id(i, y)).collect()
    }

    #[test]
    fn hamming_examples() {
        let a = s(&[(0, false), (1, true), (0, true)]);
        let b = s(&[(1, false), (1, true), (0, false)]);
        assert_eq!(hamming_distance(&a, &a).unwrap(), 0);
        assert_eq!(hamming_distance(&a, &b).unwrap(), 2);

        let mut c = s(&[(0, false), (1, true), (2, true), (3, false), (4, true)]);
        let orig = c.clone();
        c[3].y = !c[3].y;
        assert_eq!(hamming_distance(&orig, &c).unwrap(), 1);
    }

    #[test]
    fn hamming_length_mismatch() {
        let a = s(&[(0, false)]);
        let b = s(&[(0, false), (1, true)]);
        assert!(matches!(
            hamming_distance(&a, &b),
            Err(Error::LengthMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn budget_examples() {
        assert_eq!(budget_edits(0.1, 100), 10);
        assert_eq!(budget_edits(0.05, 19), 0);
        assert_eq!(budget_edits(1.0 / 7.0, 7), 1);
        assert_eq!(budget_edits(0.29, 100), 29);
        assert_eq!(budget_edits(0.02, 1000), 20);
    }

    #[test]
    fn rounding_examples() {
        assert_eq!(nearest_int_round(2.5), 3);
        assert_eq!(nearest_int_round(1.4), 1);
        assert_eq!(nearest_int_round(0.5), 1);
        assert_eq!(nearest_int_round(-2.5), -2);
        assert_eq!(nearest_int_round(0.49999999999999994), 0);
    }

    #[test]
    fn rounding_is_not_odd_on_half_ties() {
        for k in -50i64..50 {
            let r = k as f64 + 0.5;
            assert_eq!(nearest_int_round(r), k + 1);
            // Symmetry fails exactly on half-ties.
            assert_ne!(nearest_int_round(-r), -nearest_int_round(r));
            let off = k as f64 + 0.3;
            assert_eq!(nearest_int_round(-off), -nearest_int_round(off));
        }
    }

    #[test]
    fn majority_counts_match_rounding() {
        for t in 1..40usize {
            for ones in 0..=t {
                let via_round = nearest_int_round(ones as f64 / t as f64) == 1;
                assert_eq!(majority_of_counts(ones, t), via_round, "{ones}/{t}");
            }
        }
    }

    #[test]
    fn instance_equality_and_universe() {
        assert_eq!(Instance::scalar(0.0), Instance::scalar(-0.0));
        assert_ne!(Instance::Id(0), Instance::scalar(0.0));
        let u = Universe::Real { dim: 2 };
        assert!(u.contains(&Instance::point(vec![1.0, 2.0])));
        assert!(!u.contains(&Instance::point(vec![1.0])));
        assert!(!u.contains(&Instance::point(vec![1.0, f64::NAN])));
        assert!(Universe::Finite { size: 3 }.check(&Instance::Id(3)).is_err());
    }

    fn arb_sample(len: usize) -> impl Strategy<Value = Vec<Example>> {
        proptest::collection::vec((0u32..3, any::<bool>()), len)
            .prop_map(|v| v.into_iter().map(|(i, y)| Example::id(i, y)).collect())
    }

    proptest! {
        #[test]
        fn hamming_is_a_metric((a, b, c) in (1usize..12).prop_flat_map(|n| (arb_sample(n), arb_sample(n), arb_sample(n)))) {
            let ab = hamming_distance(&a, &b).unwrap();
            let ba = hamming_distance(&b, &a).unwrap();
            let bc = hamming_distance(&b, &c).unwrap();
            let ac = hamming_distance(&a, &c).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert_eq!(ab == 0, a == b);
            prop_assert!(ac <= ab + bc);
        }

        #[test]
        fn budget_brackets_product(eta in 0.001f64..0.999, n in 1usize..5000) {
            let k = budget_edits(eta, n);
            let p = eta * n as f64;
            prop_assert!(k as f64 <= p + 1e-9 * p.max(1.0));
            prop_assert!(p < (k + 1) as f64);
        }
    }
}
