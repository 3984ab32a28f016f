//! Risk estimation: standard risk, adversarial risk and prediction
//! stability, by Monte Carlo or exhaustive enumeration, plus OPT and the
//! sandwich relating the three.

use serde::Serialize;

pub mod exact;
pub mod monte_carlo;
pub mod opt;

pub use exact::{exact_risks, sandwich_check, standard_risk_exact, ExactRisks, SandwichReport, EXACT_LIMIT};
pub use monte_carlo::{
    adversarial_risk, adversarial_risk_inspected, prediction_stability, realizable_lower_bound, standard_risk,
    LowerBoundReport,
};
pub use opt::opt_value;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval at 95% for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    MonteCarlo,
    ExactExhaustive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// The true value should not exceed the bound.
    Upper,
    /// The true value should be at least the bound.
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub bound: f64,
    pub kind: BoundKind,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RiskReport {
    pub metric: String,
    pub estimate: f64,
    /// Trials with a loss (or the flipped prediction).
    pub hits: usize,
    pub trials: usize,
    pub std_error: f64,
    pub ci95: (f64, f64),
    pub mode: Mode,
    pub learner: String,
    pub adversary: Option<String>,
    pub budget: usize,
    /// The adversary is heuristic for this learner, so the estimate only
    /// lower-bounds the true value.
    pub lower_bound_only: bool,
    pub bound_checked: Option<BoundCheck>,
}

impl RiskReport {
    pub fn from_counts(metric: &str, hits: usize, trials: usize, learner: String) -> Self {
        let t = trials.max(1) as f64;
        let estimate = hits as f64 / t;
        RiskReport {
            metric: metric.to_string(),
            estimate,
            hits,
            trials,
            std_error: (estimate * (1.0 - estimate) / t).sqrt(),
            ci95: wilson_interval(hits, trials),
            mode: Mode::MonteCarlo,
            learner,
            adversary: None,
            budget: 0,
            lower_bound_only: false,
            bound_checked: None,
        }
    }

    /// An exactly computed value.
    pub fn exact(metric: &str, value: f64, learner: String) -> Self {
        let v = value.clamp(0.0, 1.0);
        RiskReport {
            metric: metric.to_string(),
            estimate: v,
            hits: 0,
            trials: 1,
            std_error: 0.0,
            ci95: (v, v),
            mode: Mode::ExactExhaustive,
            learner,
            adversary: None,
            budget: 0,
            lower_bound_only: false,
            bound_checked: None,
        }
    }

    /// Passes iff `estimate - 3 SE <= bound`.
    pub fn check_upper(&mut self, bound: f64) -> bool {
        let pass = self.estimate - 3.0 * self.std_error <= bound;
        self.bound_checked = Some(BoundCheck {
            bound,
            kind: BoundKind::Upper,
            pass,
        });
        pass
    }

    /// Passes iff `estimate + 3 SE >= bound`.
    pub fn check_lower(&mut self, bound: f64) -> bool {
        let pass = self.estimate + 3.0 * self.std_error >= bound;
        self.bound_checked = Some(BoundCheck {
            bound,
            kind: BoundKind::Lower,
            pass,
        });
        pass
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wilson_examples() {
        assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.036_995).abs() < 1e-5);
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.403_832).abs() < 1e-5 && (hi - 0.596_168).abs() < 1e-5);
    }

    #[test]
    fn bound_checks() {
        let mut r = RiskReport::from_counts("x", 10, 100, "l".into());
        assert!((r.std_error - 0.03).abs() < 1e-12);
        assert!(r.check_upper(0.02));
        assert!(!r.check_upper(0.0099));
        assert!(r.check_lower(0.189));
        assert!(!r.check_lower(0.2));
        let e = RiskReport::exact("x", 0.25, "l".into());
        assert_eq!((e.std_error, e.ci95), (0.0, (0.25, 0.25)));
    }

    proptest! {
        #[test]
        fn wilson_contains_estimate(trials in 1usize..5000, frac in 0.0f64..=1.0) {
            let hits = ((trials as f64) * frac).floor() as usize;
            let (lo, hi) = wilson_interval(hits, trials);
            let p = hits as f64 / trials as f64;
            prop_assert!(0.0 <= lo && lo <= p + 1e-12 && p <= hi + 1e-12 && hi <= 1.0);
        }
    }
}
