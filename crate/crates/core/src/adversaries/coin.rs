//! The coin game: a learner sees `n` possibly tampered `p`-coins and guesses
//! the next one.
//!
//! Against a deterministic learner the adversary finds the bias `q` at which
//! the learner outputs 1 with probability exactly 1/2, commits to a bias `p`
//! that sits `eta'` further from 1/2, shifts the coins back to law `q` (so
//! the learner cannot tell), and finally pushes the sample across the
//! learner's decision boundary toward the wrong answer.

use itertools::Itertools;
use num::{BigInt, BigRational, One, Zero};
use rand::Rng as _;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::seed::{role, Rng, Seed};

/// Learner in the coin game.
pub trait CoinLearner: Send + Sync {
    fn name(&self) -> String;

    fn decide(&self, coins: &[bool]) -> bool;

    /// The decision as a function of the number of ones, for learners that
    /// only count.
    fn by_count(&self, _n: usize, _ones: usize) -> Option<bool> {
        None
    }
}

/// Tie-rule majority of the coins.
#[derive(Clone, Copy, Debug, Default)]
pub struct MajorityCoin;

impl CoinLearner for MajorityCoin {
    fn name(&self) -> String {
        "majority".into()
    }

    fn decide(&self, coins: &[bool]) -> bool {
        2 * coins.iter().filter(|&&c| c).count() >= coins.len()
    }

    fn by_count(&self, n: usize, ones: usize) -> Option<bool> {
        Some(2 * ones >= n)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ConstantCoin(pub bool);

impl CoinLearner for ConstantCoin {
    fn name(&self) -> String {
        format!("const{}", self.0 as u8)
    }

    fn decide(&self, _coins: &[bool]) -> bool {
        self.0
    }

    fn by_count(&self, _n: usize, _ones: usize) -> Option<bool> {
        Some(self.0)
    }
}

/// Outputs 1 iff at least `ceil(frac * n)` coins are 1.
#[derive(Clone, Copy, Debug)]
pub struct CountThresholdCoin {
    pub frac: f64,
}

impl CountThresholdCoin {
    fn cut(&self, n: usize) -> usize {
        (self.frac * n as f64 - 1e-9).ceil().max(0.0) as usize
    }
}

impl CoinLearner for CountThresholdCoin {
    fn name(&self) -> String {
        format!("count>={}", self.frac)
    }

    fn decide(&self, coins: &[bool]) -> bool {
        coins.iter().filter(|&&c| c).count() >= self.cut(coins.len())
    }

    fn by_count(&self, n: usize, ones: usize) -> Option<bool> {
        Some(ones >= self.cut(n))
    }
}

/// Any deterministic rule on the coin sequence (no counting shortcut).
pub struct FnCoin<F: Fn(&[bool]) -> bool + Send + Sync> {
    pub name: String,
    pub f: F,
}

impl<F: Fn(&[bool]) -> bool + Send + Sync> CoinLearner for FnCoin<F> {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn decide(&self, coins: &[bool]) -> bool {
        (self.f)(coins)
    }
}

pub const MAX_SYMMETRIC_N: usize = 1_000_000;
pub const MAX_GENERAL_N: usize = 20;

fn log_weight(n: usize, k: usize, p: f64) -> f64 {
    // ln(p^k (1-p)^(n-k)) with 0 * ln 0 = 0.
    let a = if k == 0 { 0.0 } else { k as f64 * p.ln() };
    let b = if k == n { 0.0 } else { (n - k) as f64 * (1.0 - p).ln() };
    a + b
}

/// `Pr[Lrn(c) = 1]` for `c ~ X_p^n`, exactly up to floating point.
pub fn coin_alpha(learner: &dyn CoinLearner, n: usize, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
    }
    if learner.by_count(n, 0).is_some() {
        if n > MAX_SYMMETRIC_N {
            return Err(Error::limit("coin_alpha", format!("n = {n} (max {MAX_SYMMETRIC_N})")));
        }
        // Both tails are summed and normalized so constant decisions give
        // exactly 0 or 1.
        let (mut yes, mut no) = (0.0, 0.0);
        for k in 0..=n {
            let lw = log_weight(n, k, p);
            if !lw.is_finite() {
                continue;
            }
            let term = (ln_binomial(n as u64, k as u64) + lw).exp();
            if learner.by_count(n, k) == Some(true) {
                yes += term;
            } else {
                no += term;
            }
        }
        return Ok(yes / (yes + no));
    }
    if n > MAX_GENERAL_N {
        return Err(Error::limit(
            "coin_alpha",
            format!("n = {n} (max {MAX_GENERAL_N} for learners that do not only count)"),
        ));
    }
    let mut coins = vec![false; n];
    let (mut yes, mut no) = (0.0, 0.0);
    for mask in 0u32..(1u32 << n) {
        for (i, c) in coins.iter_mut().enumerate() {
            *c = (mask >> i) & 1 == 1;
        }
        let w = log_weight(n, mask.count_ones() as usize, p).exp();
        if learner.decide(&coins) {
            yes += w;
        } else {
            no += w;
        }
    }
    Ok(yes / (yes + no))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Crossing {
    /// The learner outputs 1 on all zeros.
    OnesOnAllZeros,
    /// The learner outputs 0 on all ones.
    ZerosOnAllOnes,
    /// `alpha(q) = 1/2`.
    At { q: f64, alpha: f64 },
}

pub const CROSSING_TOL: f64 = 1e-12;

/// The bias at which the learner is a fair coin, or the degenerate case.
pub fn coin_crossing(learner: &dyn CoinLearner, n: usize) -> Result<Crossing> {
    if coin_alpha(learner, n, 0.0)? != 0.0 {
        return Ok(Crossing::OnesOnAllZeros);
    }
    if coin_alpha(learner, n, 1.0)? != 1.0 {
        return Ok(Crossing::ZerosOnAllOnes);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut best = (f64::INFINITY, 0.5, 0.5);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        let a = coin_alpha(learner, n, mid)?;
        let gap = (a - 0.5).abs();
        if gap < best.0 {
            best = (gap, mid, a);
        }
        if gap <= CROSSING_TOL || mid <= lo || mid >= hi {
            break;
        }
        if a < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Crossing::At {
        q: best.1,
        alpha: best.2,
    })
}

/// Which coin value may change and with what probability when moving the
/// law from `X_p` to `X_p2`: zeros become ones when `p2 >= p`, ones become
/// zeros otherwise.
pub fn shift_kernel(p: f64, p2: f64) -> (bool, f64) {
    if p2 >= p {
        (false, if p < 1.0 { (p2 - p) / (1.0 - p) } else { 0.0 })
    } else {
        (true, (p - p2) / p)
    }
}

/// Exact form of [`shift_kernel`].
pub fn shift_kernel_exact(p: &BigRational, p2: &BigRational) -> (bool, BigRational) {
    let one = BigRational::one();
    if p2 >= p {
        if *p < one {
            (false, (p2 - p) / (&one - p))
        } else {
            (false, BigRational::zero())
        }
    } else {
        (true, (p - p2) / p)
    }
}

/// Flips each eligible coin independently so the output has law `X_p2^n`
/// when the input has law `X_p^n`. Returns the shifted coins and the number
/// of changes.
pub fn coin_shift(coins: &[bool], p: f64, p2: f64, seed: &Seed) -> (Vec<bool>, usize) {
    let mut rng = seed.rng();
    shift_with(coins, p, p2, &mut rng)
}

fn shift_with(coins: &[bool], p: f64, p2: f64, rng: &mut Rng) -> (Vec<bool>, usize) {
    let (from, prob) = shift_kernel(p, p2);
    let mut edits = 0;
    let out = coins
        .iter()
        .map(|&c| {
            // Draw for every coin so the stream position is input-independent.
            let u: f64 = rng.random();
            if c == from && u < prob {
                edits += 1;
                !c
            } else {
                c
            }
        })
        .collect();
    (out, edits)
}

/// Exact check that the shifted law is `X_p2^n` on every sequence, by
/// summing the kernel over all `2^n` inputs in rational arithmetic.
pub fn coin_shift_law_exact(n: usize, p: &BigRational, p2: &BigRational) -> Result<bool> {
    if n > 12 {
        return Err(Error::limit("coin_shift_law_exact", format!("n = {n} (max 12)")));
    }
    let one = BigRational::one();
    let (from, prob) = shift_kernel_exact(p, p2);
    let coin = |x: bool, q: &BigRational| if x { q.clone() } else { &one - q };
    // Per-coordinate transition T[c][c'].
    let t = |c: bool, c2: bool| -> BigRational {
        if c == from {
            if c2 == c {
                &one - &prob
            } else {
                prob.clone()
            }
        } else if c2 == c {
            one.clone()
        } else {
            BigRational::zero()
        }
    };
    let bits = |m: u32, i: usize| (m >> i) & 1 == 1;
    for out in 0u32..(1 << n) {
        let mut total = BigRational::zero();
        for inp in 0u32..(1 << n) {
            let mut w = one.clone();
            for i in 0..n {
                w *= coin(bits(inp, i), p) * t(bits(inp, i), bits(out, i));
                if w.is_zero() {
                    break;
                }
            }
            total += w;
        }
        let mut want = one.clone();
        for i in 0..n {
            want *= coin(bits(out, i), p2);
        }
        if total != want {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Rational from a decimal with up to nine digits, e.g. `0.3 -> 3/10`.
pub fn decimal_rational(v: f64) -> BigRational {
    let scale = 1_000_000_000i64;
    BigRational::new(BigInt::from((v * scale as f64).round() as i64), BigInt::from(scale))
}

/// Chi-square goodness of fit of the shifted coins at significance `1e-3`:
/// ones frequency (1 dof) and adjacent pairs (3 dof).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftFit {
    pub ones_stat: f64,
    pub ones_critical: f64,
    pub pairs_stat: f64,
    pub pairs_critical: f64,
    pub ones_freq: f64,
    pub mean_edits: f64,
}

impl ShiftFit {
    pub fn passes(&self) -> bool {
        self.ones_stat <= self.ones_critical && self.pairs_stat <= self.pairs_critical
    }
}

pub fn chi_square_critical(dof: f64, alpha: f64) -> f64 {
    ChiSquared::new(dof).expect("dof > 0").inverse_cdf(1.0 - alpha)
}

pub fn coin_shift_chi_square(n: usize, p: f64, p2: f64, seed: &Seed) -> ShiftFit {
    let mut rng = seed.child(role::COINS).rng();
    let coins: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < p).collect();
    let (out, edits) = coin_shift(&coins, p, p2, &seed.child(role::SHIFT));
    let ones = out.iter().filter(|&&c| c).count() as f64;
    let nf = n as f64;
    let e1 = nf * p2;
    let e0 = nf * (1.0 - p2);
    let ones_stat = (ones - e1).powi(2) / e1 + ((nf - ones) - e0).powi(2) / e0;
    let mut cells = [0f64; 4];
    for pair in out.chunks_exact(2) {
        cells[(pair[0] as usize) * 2 + pair[1] as usize] += 1.0;
    }
    let m = (n / 2) as f64;
    let probs = [(1.0 - p2) * (1.0 - p2), (1.0 - p2) * p2, p2 * (1.0 - p2), p2 * p2];
    let pairs_stat = cells
        .iter()
        .zip(probs)
        .map(|(o, q)| (o - m * q).powi(2) / (m * q))
        .sum();
    ShiftFit {
        ones_stat,
        ones_critical: chi_square_critical(1.0, 1e-3),
        pairs_stat,
        pairs_critical: chi_square_critical(3.0, 1e-3),
        ones_freq: ones / nf,
        mean_edits: edits as f64,
    }
}

pub const MAX_BALL_RADIUS: usize = 4;

/// Closest coins within `radius` on which the learner outputs `wrong`.
/// Counting learners move the ones count; others search the Hamming ball
/// (`n <= 20`, radius at most 4). Flips prefer positions in `prefer` (e.g.
/// coins the adversary already changed) so that undoing a change is free.
pub fn misleading_search(
    learner: &dyn CoinLearner,
    coins: &[bool],
    wrong: bool,
    radius: usize,
) -> Result<Option<(Vec<bool>, usize)>> {
    misleading_search_preferring(learner, coins, wrong, radius, &[])
}

fn misleading_search_preferring(
    learner: &dyn CoinLearner,
    coins: &[bool],
    wrong: bool,
    radius: usize,
    prefer: &[bool],
) -> Result<Option<(Vec<bool>, usize)>> {
    let n = coins.len();
    if learner.decide(coins) == wrong {
        return Ok(Some((coins.to_vec(), 0)));
    }
    if learner.by_count(n, 0).is_some() {
        let k = coins.iter().filter(|&&c| c).count();
        for step in 1..=radius {
            for cand in [k.checked_add(step), k.checked_sub(step)].into_iter().flatten() {
                if cand > n || learner.by_count(n, cand) != Some(wrong) {
                    continue;
                }
                let make_ones = cand > k;
                // Flip coins currently equal to !make_ones, preferred first.
                let mut order: Vec<usize> = (0..n).filter(|&i| coins[i] != make_ones).collect();
                order.sort_by_key(|&i| !prefer.get(i).copied().unwrap_or(false));
                let mut out = coins.to_vec();
                for &i in order.iter().take(step) {
                    out[i] = make_ones;
                }
                return Ok(Some((out, step)));
            }
        }
        return Ok(None);
    }
    if n > MAX_GENERAL_N || radius > MAX_BALL_RADIUS {
        return Err(Error::limit(
            "misleading_search",
            format!("n = {n}, radius = {radius} for a learner that does not only count"),
        ));
    }
    let mut out = coins.to_vec();
    for r in 1..=radius.min(n) {
        for set in (0..n).combinations(r) {
            for &i in &set {
                out[i] = !out[i];
            }
            if learner.decide(&out) == wrong {
                return Ok(Some((out, r)));
            }
            for &i in &set {
                out[i] = !out[i];
            }
        }
    }
    Ok(None)
}

/// One round of the game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CoinTrial {
    pub ones_drawn: usize,
    pub ones_shown: usize,
    pub edits: usize,
    pub output: bool,
    pub next: bool,
    /// The adversary would have needed more than the cap; scored as a
    /// learner win.
    pub forfeit: bool,
}

impl CoinTrial {
    pub fn learner_wrong(&self) -> bool {
        !self.forfeit && self.output != self.next
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoinGameResult {
    pub learner: String,
    pub n: usize,
    pub eta_prime: f64,
    pub crossing: Crossing,
    pub p: f64,
    pub opt: f64,
    pub err: f64,
    pub regret: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    /// Per-trial edit cap `floor(eta n)`.
    pub cap: usize,
    pub radius: usize,
    pub forfeits: usize,
    pub trials: Vec<CoinTrial>,
}

/// Edit cap `floor(eta' n + sqrt(n ln n / 2) + sqrt(n ln 2n))`.
pub fn coin_edit_cap(n: usize, eta_prime: f64) -> usize {
    let nf = n as f64;
    (eta_prime * nf + (nf * nf.ln() / 2.0).sqrt() + (nf * (2.0 * nf).ln()).sqrt() + 1e-9).floor() as usize
}

pub fn misleading_radius(n: usize) -> usize {
    let nf = n as f64;
    (nf * (2.0 * nf).ln()).sqrt().floor() as usize
}

pub fn run_coin_game(
    learner: &dyn CoinLearner,
    n: usize,
    eta_prime: f64,
    trials: usize,
    seed: &Seed,
    exec: Execution,
) -> Result<CoinGameResult> {
    if !(0.0..=0.5).contains(&eta_prime) {
        return Err(Error::InvalidParameter(format!("eta' = {eta_prime} outside [0, 1/2]")));
    }
    if n == 0 || trials == 0 {
        return Err(Error::InvalidParameter("n and trials must be >= 1".into()));
    }
    let crossing = coin_crossing(learner, n)?;
    let (p, shift_to) = match crossing {
        Crossing::OnesOnAllZeros => (0.0, None),
        Crossing::ZerosOnAllOnes => (1.0, None),
        Crossing::At { q, .. } if q <= 0.5 => ((q - eta_prime).max(0.0), Some(q)),
        // Mirror: push the bias up instead, so OPT = 1 - p.
        Crossing::At { q, .. } => ((q + eta_prime).min(1.0), Some(q)),
    };
    let opt = p.min(1.0 - p);
    let cap = coin_edit_cap(n, eta_prime);
    let radius = misleading_radius(n);

    let records = exec.try_map(trials, |i| -> Result<CoinTrial> {
        let ts = seed.child(i as u64);
        let mut rng = ts.child(role::COINS).rng();
        let drawn: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < p).collect();
        let next = rng.random::<f64>() < p;
        let ones_drawn = drawn.iter().filter(|&&c| c).count();
        let shifted = match shift_to {
            Some(q) => shift_with(&drawn, p, q, &mut ts.child(role::SHIFT).rng()).0,
            None => drawn.clone(),
        };
        let changed: Vec<bool> = drawn.iter().zip(&shifted).map(|(a, b)| a != b).collect();
        let shown = misleading_search_preferring(learner, &shifted, !next, radius, &changed)?
            .map(|(c, _)| c)
            .unwrap_or(shifted);
        let edits = drawn.iter().zip(&shown).filter(|(a, b)| a != b).count();
        let forfeit = edits > cap;
        let shown = if forfeit { drawn } else { shown };
        Ok(CoinTrial {
            ones_drawn,
            ones_shown: shown.iter().filter(|&&c| c).count(),
            edits: if forfeit { 0 } else { edits },
            output: learner.decide(&shown),
            next,
            forfeit,
        })
    })?;
    let wrong = records.iter().filter(|t| t.learner_wrong()).count();
    let forfeits = records.iter().filter(|t| t.forfeit).count();
    let tn = trials as f64;
    let err = wrong as f64 / tn;
    let stderr = (err * (1.0 - err) / tn).sqrt();
    let ci = crate::eval::wilson_interval(wrong, trials);
    Ok(CoinGameResult {
        learner: learner.name(),
        n,
        eta_prime,
        crossing,
        p,
        opt,
        err,
        regret: err - opt,
        stderr,
        ci95: (ci.0 - opt, ci.1 - opt),
        cap,
        radius,
        forfeits,
        trials: records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_examples() {
        assert!((coin_alpha(&MajorityCoin, 101, 0.5).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(coin_alpha(&ConstantCoin(true), 10, 0.3).unwrap(), 1.0);
        assert!((coin_alpha(&MajorityCoin, 3, 0.2).unwrap() - 0.104).abs() < 1e-12);
        // Endpoints are the decisions on constant sequences.
        assert_eq!(coin_alpha(&MajorityCoin, 7, 0.0).unwrap(), 0.0);
        assert_eq!(coin_alpha(&MajorityCoin, 7, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn general_and_counting_paths_agree() {
        let f = FnCoin {
            name: "maj".into(),
            f: |c: &[bool]| 2 * c.iter().filter(|&&b| b).count() >= c.len(),
        };
        for &p in &[0.0, 0.13, 0.5, 0.77, 1.0] {
            let a = coin_alpha(&f, 9, p).unwrap();
            let b = coin_alpha(&MajorityCoin, 9, p).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
        assert!(coin_alpha(&f, 21, 0.5).is_err());
    }

    #[test]
    fn crossing_examples() {
        match coin_crossing(&MajorityCoin, 101).unwrap() {
            Crossing::At { q, .. } => assert!((q - 0.5).abs() < 1e-9),
            c => panic!("{c:?}"),
        }
        assert_eq!(coin_crossing(&ConstantCoin(true), 5).unwrap(), Crossing::OnesOnAllZeros);
        assert_eq!(
            coin_crossing(&ConstantCoin(false), 5).unwrap(),
            Crossing::ZerosOnAllOnes
        );
        let l = CountThresholdCoin { frac: 0.7 };
        match coin_crossing(&l, 15).unwrap() {
            Crossing::At { q, .. } => {
                assert!(q > 0.5);
                assert!((coin_alpha(&l, 15, q).unwrap() - 0.5).abs() <= CROSSING_TOL);
            }
            c => panic!("{c:?}"),
        }
    }

    #[test]
    fn shift_examples() {
        let coins = vec![true, false, false, true, false];
        let (same, e) = coin_shift(&coins, 0.4, 0.4, &Seed::new(1));
        assert_eq!((same, e), (coins.clone(), 0));
        let (all, e) = coin_shift(&coins, 0.0, 1.0, &Seed::new(1));
        assert!(all.iter().all(|&c| c));
        assert_eq!(e, 3);
    }

    #[test]
    fn shift_law_is_exact() {
        for (p, p2) in [(0.3, 0.5), (0.5, 0.3), (0.0, 0.25), (1.0, 0.6), (0.2, 0.2)] {
            for n in 1..=6 {
                assert!(coin_shift_law_exact(n, &decimal_rational(p), &decimal_rational(p2)).unwrap());
            }
        }
    }

    #[test]
    fn shift_large_n() {
        let fit = coin_shift_chi_square(100_000, 0.3, 0.5, &Seed::new(4));
        assert!((fit.ones_freq - 0.5).abs() < 0.006);
        assert!((fit.mean_edits / 100_000.0 - 0.2).abs() < 0.01);
        assert!(fit.passes(), "{fit:?}");
        assert!((fit.ones_critical - 10.828).abs() < 1e-3);
        assert!((fit.pairs_critical - 16.266).abs() < 1e-3);
    }

    #[test]
    fn misleading_examples() {
        let coins = vec![true, false, false, true, false];
        // Already wrong.
        assert_eq!(
            misleading_search(&MajorityCoin, &coins, false, 0).unwrap().unwrap().1,
            0
        );
        // Count 2 of 5, need 3 ones.
        let (out, e) = misleading_search(&MajorityCoin, &coins, true, 3).unwrap().unwrap();
        assert_eq!(e, 1);
        assert!(MajorityCoin.decide(&out));
        assert!(misleading_search(&MajorityCoin, &coins, true, 0).unwrap().is_none());
        let f = FnCoin {
            name: "first".into(),
            f: |c: &[bool]| c[0],
        };
        let (out, e) = misleading_search(&f, &coins, false, 2).unwrap().unwrap();
        assert_eq!((out[0], e), (false, 1));
    }

    #[test]
    fn degenerate_game() {
        let r = run_coin_game(&ConstantCoin(true), 21, 0.1, 200, &Seed::new(1), Execution::Sequential).unwrap();
        assert_eq!(r.p, 0.0);
        assert_eq!(r.opt, 0.0);
        assert_eq!(r.err, 1.0);
        assert_eq!(r.regret, 1.0);
    }

    #[test]
    fn edits_within_cap_and_deterministic() {
        let a = run_coin_game(&MajorityCoin, 51, 0.1, 300, &Seed::new(2), Execution::Parallel).unwrap();
        let b = run_coin_game(&MajorityCoin, 51, 0.1, 300, &Seed::new(2), Execution::Sequential).unwrap();
        assert_eq!(a, b);
        assert!(a.trials.iter().all(|t| t.edits <= a.cap));
        assert!((a.opt - 0.4).abs() < 1e-9);
    }
}
