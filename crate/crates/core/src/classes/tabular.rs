//! Finite tabular classes: each hypothesis is a bit-row over a domain of
//! `m <= 64` ids.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::Hypothesis;
use crate::data::{Instance, Sample};
use crate::error::{Error, Result};

pub const MAX_DOMAIN: u32 = 64;
pub const VC_MAX_DOMAIN: u32 = 24;
pub const VC_MAX_ROWS: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TabularClass {
    domain: u32,
    rows: Vec<u64>,
}

fn domain_mask(m: u32) -> u64 {
    if m == 64 {
        u64::MAX
    } else {
        (1u64 << m) - 1
    }
}

impl TabularClass {
    pub fn new(domain: u32, rows: Vec<u64>) -> Result<Self> {
        if domain == 0 || domain > MAX_DOMAIN {
            return Err(Error::InvalidClass(format!(
                "domain size {domain} outside 1..={MAX_DOMAIN}"
            )));
        }
        if rows.is_empty() {
            return Err(Error::InvalidClass("class has no hypotheses".into()));
        }
        let mask = domain_mask(domain);
        let mut seen = HashSet::new();
        for (i, r) in rows.iter().enumerate() {
            if r & !mask != 0 {
                return Err(Error::InvalidClass(format!("row {i} has bits beyond the domain")));
            }
            if !seen.insert(*r) {
                return Err(Error::InvalidClass(format!("row {i} is a duplicate")));
            }
        }
        Ok(TabularClass { domain, rows })
    }

    /// All `2^m` labelings of `m` points.
    pub fn full_cube(m: u32) -> Result<Self> {
        if m > 16 {
            return Err(Error::limit("full_cube", format!("m = {m} > 16")));
        }
        Self::new(m, (0..(1u64 << m)).collect())
    }

    /// Intervals `{i : a <= i <= b}` on the line `0..m`, plus the empty set.
    pub fn intervals(m: u32) -> Result<Self> {
        let mut rows = vec![0u64];
        for a in 0..m {
            for b in a..m {
                rows.push(domain_mask(b + 1) & !domain_mask(a));
            }
        }
        Self::new(m, rows)
    }

    /// Thresholds on the grid `0..m`: rows `1[i >= k]` for `k = 0..=m`.
    pub fn thresholds(m: u32) -> Result<Self> {
        let rows = (0..=m).map(|k| domain_mask(m) & !domain_mask(k)).collect();
        Self::new(m, rows)
    }

    /// The two constant functions.
    pub fn constants(m: u32) -> Result<Self> {
        Self::new(m, vec![0, domain_mask(m)])
    }

    pub fn domain(&self) -> u32 {
        self.domain
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn hypothesis(&self, index: usize) -> Hypothesis {
        Hypothesis::Row {
            index,
            bits: self.rows[index],
            domain: self.domain,
        }
    }

    pub fn label(&self, index: usize, x: u32) -> bool {
        (self.rows[index] >> x) & 1 == 1
    }

    /// Lowest-index row with zero empirical error.
    pub fn consistent_row(&self, sample: &Sample) -> Option<usize> {
        let (ones, zeros) = label_masks(sample)?;
        self.rows.iter().position(|r| r & ones == ones && r & zeros == 0)
    }

    /// Lowest-index row minimizing empirical error.
    pub fn erm_row(&self, sample: &Sample) -> usize {
        // Per-instance label counts make each row's error a sum over the domain.
        let mut counts = vec![[0usize; 2]; self.domain as usize];
        for e in sample.iter() {
            if let Instance::Id(i) = e.x {
                counts[i as usize][e.y as usize] += 1;
            }
        }
        let touched: Vec<usize> = (0..self.domain as usize)
            .filter(|&i| counts[i][0] + counts[i][1] > 0)
            .collect();
        let mut best = (usize::MAX, 0);
        for (idx, r) in self.rows.iter().enumerate() {
            let err: usize = touched.iter().map(|&i| counts[i][1 - ((r >> i) & 1) as usize]).sum();
            if err < best.0 {
                best = (err, idx);
                if err == 0 {
                    break;
                }
            }
        }
        best.1
    }

    /// Distinct restrictions of the class to `coords`, sorted ascending, where
    /// bit `j` of a pattern is the label of `coords[j]`.
    pub fn patterns(&self, coords: &[u32]) -> Vec<u64> {
        let mut out: Vec<u64> = self.rows.iter().map(|r| project(*r, coords)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn shatters(&self, coords: &[u32], seen: &mut Vec<bool>) -> bool {
        let need = 1usize << coords.len();
        seen.clear();
        seen.resize(need, false);
        let mut hit = 0;
        for r in &self.rows {
            let p = project(*r, coords) as usize;
            if !seen[p] {
                seen[p] = true;
                hit += 1;
                if hit == need {
                    return true;
                }
            }
        }
        false
    }

    fn check_vc_limits(&self) -> Result<()> {
        if self.domain > VC_MAX_DOMAIN || self.rows.len() > VC_MAX_ROWS {
            return Err(Error::limit(
                "vc_dimension",
                format!(
                    "m = {} (max {VC_MAX_DOMAIN}), |H| = {} (max {VC_MAX_ROWS}); supply d externally",
                    self.domain,
                    self.rows.len()
                ),
            ));
        }
        Ok(())
    }

    /// First shattered set of size `d` in lexicographic order, if any.
    pub fn find_shattered_set(&self, d: usize) -> Result<Option<Vec<u32>>> {
        self.check_vc_limits()?;
        if d > self.domain as usize || (d < usize::BITS as usize && (1usize << d) > self.rows.len()) {
            return Ok(None);
        }
        let mut seen = Vec::new();
        for combo in (0..self.domain).combinations(d) {
            if self.shatters(&combo, &mut seen) {
                return Ok(Some(combo));
            }
        }
        Ok(None)
    }

    /// Exact VC dimension by exhaustive search (subsets of shattered sets are
    /// shattered, so the search stops at the first empty level).
    pub fn vc_dimension(&self) -> Result<usize> {
        self.check_vc_limits()?;
        let mut d = 0;
        while self.find_shattered_set(d + 1)?.is_some() {
            d += 1;
        }
        Ok(d)
    }

    /// True iff some pair `(x1, x2)` and rows `h1, h2` have
    /// `h1(x1) = h2(x1)` and `h1(x2) != h2(x2)`.
    pub fn is_nontrivial(&self) -> bool {
        self.nontrivial_witness().is_some()
    }

    /// `(x1, x2, h1, h2)` witnessing non-triviality.
    pub fn nontrivial_witness(&self) -> Option<(u32, u32, usize, usize)> {
        for (i, a) in self.rows.iter().enumerate() {
            for (j, b) in self.rows.iter().enumerate().skip(i + 1) {
                let diff = a ^ b;
                let same = !diff & domain_mask(self.domain);
                if diff != 0 && same != 0 {
                    return Some((same.trailing_zeros(), diff.trailing_zeros(), i, j));
                }
            }
        }
        None
    }

    /// Parses a 0/1 matrix: one hypothesis per line, one column per domain
    /// point. Blank lines and `#` comments are ignored; digits may be
    /// separated by whitespace.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut width: Option<usize> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut bits = 0u64;
            let mut k = 0usize;
            for ch in line.chars().filter(|c| !c.is_whitespace()) {
                let b = match ch {
                    '0' => 0,
                    '1' => 1,
                    other => {
                        return Err(Error::Parse {
                            line: lineno + 1,
                            msg: format!("unexpected character {other:?}"),
                        })
                    }
                };
                if k >= MAX_DOMAIN as usize {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        msg: format!("more than {MAX_DOMAIN} columns"),
                    });
                }
                bits |= b << k;
                k += 1;
            }
            match width {
                None => width = Some(k),
                Some(w) if w != k => {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        msg: format!("row has {k} columns, expected {w}"),
                    })
                }
                _ => {}
            }
            rows.push(bits);
        }
        let width = width.ok_or(Error::Parse {
            line: 0,
            msg: "no rows".into(),
        })?;
        Self::new(width as u32, rows)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.rows {
            for i in 0..self.domain {
                s.push(if (r >> i) & 1 == 1 { '1' } else { '0' });
                if i + 1 < self.domain {
                    s.push(' ');
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn describe(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "m={} |H|={}", self.domain, self.rows.len());
        s
    }
}

/// Bits `(r >> coords[j]) & 1` packed at positions `j`.
pub fn project(r: u64, coords: &[u32]) -> u64 {
    coords
        .iter()
        .enumerate()
        .fold(0u64, |acc, (j, &c)| acc | (((r >> c) & 1) << j))
}

/// Masks of ids labeled 1 and 0 in `sample`; `None` when some id carries both
/// labels or an instance is not an id.
fn label_masks(sample: &Sample) -> Option<(u64, u64)> {
    let mut ones = 0u64;
    let mut zeros = 0u64;
    for e in sample.iter() {
        let i = e.x.as_id()?;
        if i >= 64 {
            return None;
        }
        if e.y {
            ones |= 1 << i;
        } else {
            zeros |= 1 << i;
        }
    }
    if ones & zeros != 0 {
        None
    } else {
        Some((ones, zeros))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Example;
    use crate::seed::Seed;
    use rand::Rng;

    /// Independent oracle: every subset by descending bitmask, distinct
    /// restrictions counted with a hash set.
    fn vc_oracle(c: &TabularClass) -> usize {
        let m = c.domain();
        let mut best = 0;
        for mask in (0u64..(1u64 << m)).rev() {
            let k = mask.count_ones() as usize;
            if k <= best {
                continue;
            }
            let restr: HashSet<u64> = c.rows().iter().map(|r| r & mask).collect();
            if restr.len() == 1usize << k {
                best = k;
            }
        }
        best
    }

    #[test]
    fn generators() {
        assert_eq!(TabularClass::full_cube(2).unwrap().vc_dimension().unwrap(), 2);
        assert_eq!(TabularClass::intervals(8).unwrap().vc_dimension().unwrap(), 2);
        assert_eq!(TabularClass::intervals(8).unwrap().len(), 37);
        assert_eq!(TabularClass::thresholds(6).unwrap().vc_dimension().unwrap(), 1);
        assert_eq!(TabularClass::constants(3).unwrap().vc_dimension().unwrap(), 1);
        assert_eq!(TabularClass::full_cube(4).unwrap().vc_dimension().unwrap(), 4);
    }

    #[test]
    fn shattered_set_of_full_cube() {
        let c = TabularClass::full_cube(2).unwrap();
        assert_eq!(c.find_shattered_set(2).unwrap(), Some(vec![0, 1]));
        assert_eq!(c.find_shattered_set(3).unwrap(), None);
    }

    #[test]
    fn vc_limits() {
        let c = TabularClass::new(30, vec![0, 1]).unwrap();
        assert!(matches!(c.vc_dimension(), Err(Error::LimitExceeded { .. })));
    }

    #[test]
    fn vc_matches_oracle_on_random_classes() {
        let mut rng = Seed::new(42).rng();
        for _ in 0..300 {
            let m = rng.random_range(1..=7u32);
            let k = rng.random_range(1..=20usize);
            let mut rows: Vec<u64> = (0..k).map(|_| rng.random::<u64>() & domain_mask(m)).collect();
            rows.sort_unstable();
            rows.dedup();
            let c = TabularClass::new(m, rows).unwrap();
            assert_eq!(c.vc_dimension().unwrap(), vc_oracle(&c));
        }
    }

    #[test]
    fn consistency_and_erm() {
        let c = TabularClass::constants(4).unwrap();
        let s: Sample = [(0, true), (1, true), (2, true), (3, false)]
            .iter()
            .map(|&(i, y)| Example::id(i, y))
            .collect();
        assert_eq!(c.consistent_row(&s), None);
        assert_eq!(c.erm_row(&s), 1);
        let conflict: Sample = [Example::id(0, true), Example::id(0, false)].into_iter().collect();
        assert_eq!(c.consistent_row(&conflict), None);
    }

    #[test]
    fn parse_roundtrip_and_errors() {
        let c = TabularClass::intervals(5).unwrap();
        assert_eq!(TabularClass::parse(&c.to_text()).unwrap(), c);
        assert!(TabularClass::parse("01\n011\n").is_err());
        assert!(TabularClass::parse("0 2\n").is_err());
        assert!(TabularClass::parse("# only a comment\n").is_err());
        assert!(TabularClass::parse("01\n01\n").is_err());
        assert_eq!(TabularClass::parse("0 1 # a\n1 1\n").unwrap().rows(), &[0b10, 0b11]);
    }

    #[test]
    fn nontrivial() {
        assert!(!TabularClass::constants(1).unwrap().is_nontrivial());
        assert!(!TabularClass::constants(2).unwrap().is_nontrivial());
        assert!(TabularClass::thresholds(2).unwrap().is_nontrivial());
    }
}
