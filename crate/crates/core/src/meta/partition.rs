//! Consecutive balanced partitions of sample positions into voting blocks.

use std::ops::Range;

use serde::Serialize;

use crate::data::budget_edits;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub n: usize,
    pub blocks: Vec<Range<usize>>,
    /// Positions not used by any voting block; empty for balanced layouts.
    pub tail: Range<usize>,
}

impl Partition {
    /// `t` consecutive blocks of sizes `floor(n/t)` or `floor(n/t) + 1`,
    /// larger blocks first, covering all of `0..n`.
    pub fn balanced(n: usize, t: usize) -> Result<Self> {
        if t == 0 {
            return Err(Error::InvalidPartition("no voting blocks (t = 0)".into()));
        }
        if t > n {
            return Err(Error::InvalidPartition(format!(
                "t = {t} blocks cannot be nonempty with n = {n}"
            )));
        }
        let base = n / t;
        let extra = n % t;
        let mut blocks = Vec::with_capacity(t);
        let mut start = 0;
        for i in 0..t {
            let len = base + (i < extra) as usize;
            blocks.push(start..start + len);
            start += len;
        }
        Ok(Partition { n, blocks, tail: n..n })
    }

    pub fn t(&self) -> usize {
        self.blocks.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }

    /// Index of the voting block containing position `pos`.
    pub fn block_of(&self, pos: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(&pos))
    }
}

/// Voting partition for budget fraction `eta`: `t = floor(7 eta n)` blocks,
/// or `t = floor(5 k_p eta n)` when `kp_scale = Some(k_p)`.
pub fn spv_partition(n: usize, eta: f64, kp_scale: Option<usize>) -> Result<Partition> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter(format!("eta = {eta} outside (0, 1]")));
    }
    if budget_edits(eta, n) < 1 {
        return Err(Error::InvalidPartition(format!(
            "n = {n} is below 1/eta = {:.3}",
            1.0 / eta
        )));
    }
    let scale = match kp_scale {
        None => 7.0,
        Some(kp) if kp >= 1 => 5.0 * kp as f64,
        Some(_) => return Err(Error::InvalidParameter("k_p must be >= 1".into())),
    };
    let t = budget_edits(scale * eta, n);
    Partition::balanced(n, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(
            spv_partition(100, 0.01, None).unwrap().sizes(),
            vec![15, 15, 14, 14, 14, 14, 14]
        );
        let p = spv_partition(70, 0.1, None).unwrap();
        assert_eq!(p.t(), 49);
        assert!(p.sizes().iter().all(|&s| s == 1 || s == 2));
        assert_eq!(spv_partition(7, 1.0 / 7.0, None).unwrap().sizes(), vec![1; 7]);
        assert_eq!(spv_partition(100, 0.02, Some(2)).unwrap().t(), 20);
    }

    #[test]
    fn errors() {
        assert!(spv_partition(19, 0.05, None).is_err());
        assert!(spv_partition(10, 0.5, None).is_err());
        assert!(spv_partition(10, 0.0, None).is_err());
        assert!(Partition::balanced(3, 0).is_err());
    }

    proptest! {
        #[test]
        fn layout_invariants(eta in 0.005f64..0.14, n in 1usize..3000) {
            match spv_partition(n, eta, None) {
                Ok(p) => {
                    prop_assert!(n as f64 * eta >= 1.0 - 1e-9);
                    let mut next = 0;
                    for b in &p.blocks {
                        prop_assert_eq!(b.start, next);
                        prop_assert!(b.len() >= n / p.t() && !b.is_empty());
                        next = b.end;
                    }
                    prop_assert_eq!(next, n);
                    prop_assert!(p.sizes().windows(2).all(|w| w[0] >= w[1]));
                    // Each edit touches at most one block, so an eta-close
                    // sample changes at most floor(eta n) <= t / 6 blocks.
                    prop_assert!(6 * budget_edits(eta, n) <= p.t());
                }
                Err(_) => prop_assert!(budget_edits(eta, n) < 1),
            }
        }
    }
}
