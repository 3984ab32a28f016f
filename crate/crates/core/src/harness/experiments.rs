//! One evaluator per experiment kind.

use std::collections::BTreeMap;

use super::build::{build_class, build_coin_learner, build_distribution, build_learner};
use super::config::{ExperimentConfig, GridPoint, Kind};
use super::{CertificateRow, ResultRow, RowContext, Verdict};
use crate::adversaries::coin::{coin_shift_chi_square, coin_shift_law_exact, decimal_rational, run_coin_game};
use crate::adversaries::Adversary;
use crate::classes::ConceptClass;
use crate::data::{Instance, Universe};
use crate::distribution::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::eval::{
    adversarial_risk, adversarial_risk_inspected, opt_value, realizable_lower_bound, standard_risk, BoundKind,
    RiskReport,
};
use crate::meta::{certificate_exact, certificate_paper, optimal_certificate_oracle};
use crate::seed::{role, Seed};
use crate::selftest::sandwich_suite;
use crate::textio;

#[derive(Default)]
pub(crate) struct Collected {
    pub rows: Vec<ResultRow>,
    pub certificates: Vec<CertificateRow>,
    pub notes: Vec<String>,
    directions: BTreeMap<String, BoundKind>,
}

impl Collected {
    pub fn direction(&self, metric: &str) -> BoundKind {
        self.directions.get(metric).copied().unwrap_or(BoundKind::Upper)
    }

    fn push(&mut self, row: ResultRow, dir: BoundKind) {
        self.directions.insert(row.metric.clone(), dir);
        self.rows.push(row);
    }

    fn push_report(&mut self, ctx: &RowContext, r: &RiskReport) {
        let dir = r.bound_checked.map(|b| b.kind).unwrap_or(BoundKind::Upper);
        if r.lower_bound_only && dir == BoundKind::Upper {
            self.notes.push(format!(
                "{} at n = {:?}, eta = {:?}: the adversary is heuristic for {}, so the estimate is a lower bound",
                r.metric, ctx.n, ctx.eta, r.learner
            ));
        }
        self.push(ctx.report(r), dir);
    }
}

pub(crate) fn run_all(cfg: &ExperimentConfig, out: &mut Collected) -> Result<()> {
    let master = Seed::new(cfg.experiment.seed);
    let points = cfg.points();
    match cfg.experiment.kind {
        Kind::Sandwich => return sandwich(cfg, &master, out),
        Kind::CoinGame if !points.is_empty() => coin_extras(cfg, &master, out)?,
        _ => {}
    }
    for (i, p) in points.iter().enumerate() {
        let seed = master.child(i as u64);
        match cfg.experiment.kind {
            Kind::RealizableUpper | Kind::Proper | Kind::Agnostic => upper(cfg, p, &seed, out)?,
            Kind::RealizableLower => lower(cfg, p, &seed, out)?,
            Kind::CoinGame => coin(cfg, p, &seed, out)?,
            Kind::Certify => certify(cfg, p, &seed, out)?,
            Kind::Sandwich => unreachable!(),
        }
    }
    Ok(())
}

fn context(cfg: &ExperimentConfig, p: &GridPoint, d: Option<usize>) -> RowContext {
    RowContext {
        experiment: cfg.experiment.name.clone(),
        kind: cfg.experiment.kind,
        n: Some(p.n),
        eta: Some(p.eta),
        d,
        seed: cfg.experiment.seed,
    }
}

fn class_and_d(cfg: &ExperimentConfig, p: &GridPoint, seed: &Seed) -> Result<(ConceptClass, usize)> {
    let spec = cfg
        .class
        .as_ref()
        .ok_or_else(|| Error::Config("missing [class]".into()))?;
    let class = build_class(spec, p.d, &seed.child(role::INSTANCE))?;
    let d = match cfg.experiment.bound_d {
        Some(d) => d,
        None => class.vc_dimension()?,
    };
    Ok((class, d))
}

fn distribution(cfg: &ExperimentConfig, class: &ConceptClass, seed: &Seed) -> Result<DiscreteDistribution> {
    let spec = cfg.distribution.clone().unwrap_or_default();
    build_distribution(&spec, class, &seed.child(role::LABELING))
}

fn adversary(cfg: &ExperimentConfig, default: Adversary) -> Result<Adversary> {
    match &cfg.adversary {
        Some(a) => Adversary::parse(&a.name),
        None => Ok(default),
    }
}

/// Realizable, proper and agnostic upper bounds.
fn upper(cfg: &ExperimentConfig, p: &GridPoint, seed: &Seed, out: &mut Collected) -> Result<()> {
    let kind = cfg.experiment.kind;
    let exec = cfg.experiment.execution;
    let trials = cfg.experiment.trials;
    let lspec = cfg.learner.as_ref().expect("validated");
    let (class, d) = class_and_d(cfg, p, seed)?;
    let dist = distribution(cfg, &class, seed)?;
    let ctx = context(cfg, p, Some(d));
    let learner = build_learner(lspec, &class, p.eta)?;
    let (df, eta) = (d as f64, p.eta);

    if lspec.meta == "none" {
        let mut r = standard_risk(learner.as_ref(), &dist, p.n, trials, seed, exec)?;
        if kind == Kind::RealizableUpper {
            r.check_upper(df / (p.n as f64 + 1.0));
        }
        out.push_report(&ctx, &r);
        return Ok(());
    }
    let adv = adversary(cfg, Adversary::VoteFlip)?;
    match kind {
        Kind::RealizableUpper => {
            let mut r = adversarial_risk(learner.as_ref(), &dist, p.n, eta, adv, trials, seed, exec)?;
            r.check_upper(42.0 * eta * df);
            out.push_report(&ctx, &r);
            // Base risk at the smallest block size actually used.
            let bv = learner.as_block_voting().expect("voting learner");
            let block = bv.partition(p.n)?.sizes().into_iter().min().unwrap_or(0);
            let base = standard_risk(bv.base(), &dist, block, trials, &seed.child(role::BASE_RISK), exec)?;
            let mut bctx = ctx.clone();
            bctx.n = Some(block);
            out.push(bctx.report(&base), BoundKind::Upper);
            let bound = 6.0 * base.ci95.1;
            let pass = r.estimate - 3.0 * r.std_error <= bound;
            let row = ctx.row(
                "adversarial_risk_vs_base",
                r.estimate,
                r.std_error,
                r.ci95,
                Some(bound),
                if pass { Verdict::Pass } else { Verdict::Fail },
            );
            out.push(row, BoundKind::Upper);
        }
        Kind::Proper => {
            let proper_class = class.clone();
            let l2 = learner.clone();
            let inspect = move |s: &crate::data::Sample| -> Result<bool> { Ok(proper_class.contains(&l2.learn(s)?)) };
            let (mut r, improper) = adversarial_risk_inspected(
                learner.as_ref(),
                &dist,
                p.n,
                eta,
                adv,
                trials,
                seed,
                exec,
                Some(&inspect),
            )?;
            r.check_upper(20.0 * eta * df.powi(3));
            out.push_report(&ctx, &r);
            out.push(ctx.zero_check("improper_outputs", improper, trials), BoundKind::Upper);
        }
        Kind::Agnostic => {
            let opt = opt_value(&class, &dist)?;
            out.push(
                ctx.row("opt", opt, 0.0, (opt, opt), None, Verdict::Info),
                BoundKind::Upper,
            );
            let mut r = adversarial_risk(learner.as_ref(), &dist, p.n, eta, adv, trials, seed, exec)?;
            r.check_upper(6.0 * opt + 10.0 * (df * eta).sqrt());
            out.push_report(&ctx, &r);
        }
        _ => unreachable!(),
    }
    Ok(())
}

fn lower(cfg: &ExperimentConfig, p: &GridPoint, seed: &Seed, out: &mut Collected) -> Result<()> {
    let lspec = cfg.learner.as_ref().expect("validated");
    let (class, d) = class_and_d(cfg, p, seed)?;
    let learner = build_learner(lspec, &class, p.eta)?;
    let ctx = context(cfg, p, Some(d));
    let mut r = realizable_lower_bound(
        learner.as_ref(),
        &class,
        d,
        p.eta,
        p.n,
        cfg.experiment.trials,
        seed,
        cfg.experiment.execution,
    )?;
    let dm1 = d.saturating_sub(1) as f64;
    r.adversarial.check_lower(p.eta * dm1 / 16.0);
    r.hard.check_lower(p.eta * dm1 / 4.0);
    out.push_report(&ctx, &r.adversarial);
    out.push_report(&ctx, &r.hard);
    Ok(())
}

fn coin(cfg: &ExperimentConfig, p: &GridPoint, seed: &Seed, out: &mut Collected) -> Result<()> {
    let spec = cfg.coin.clone().unwrap_or_else(|| super::config::CoinSpec {
        learner: "majority".into(),
        exact_n: Vec::new(),
        chi_square_n: None,
        shift: (0.3, 0.5),
    });
    let learner = build_coin_learner(&spec.learner)?;
    let g = run_coin_game(
        learner.as_ref(),
        p.n,
        p.eta,
        cfg.experiment.trials,
        seed,
        cfg.experiment.execution,
    )?;
    let ctx = context(cfg, p, None);
    let bound = 0.5 + p.eta - 5.0 / p.n as f64;
    let pass = g.regret + 3.0 * g.stderr >= bound;
    out.push(
        ctx.row(
            "regret",
            g.regret,
            g.stderr,
            g.ci95,
            Some(bound),
            if pass { Verdict::Pass } else { Verdict::Fail },
        ),
        BoundKind::Lower,
    );
    out.push(
        ctx.row("opt", g.opt, 0.0, (g.opt, g.opt), None, Verdict::Info),
        BoundKind::Upper,
    );
    let over_cap = g.trials.iter().filter(|t| t.edits > g.cap).count();
    out.push(
        ctx.zero_check("edits_over_cap", over_cap, g.trials.len()),
        BoundKind::Upper,
    );
    let f = RiskReport::from_counts("forfeit_rate", g.forfeits, g.trials.len(), g.learner.clone());
    out.push_report(&ctx, &f);
    Ok(())
}

/// Checks of the coin shift that do not depend on the grid.
fn coin_extras(cfg: &ExperimentConfig, master: &Seed, out: &mut Collected) -> Result<()> {
    let Some(spec) = cfg.coin.as_ref() else {
        return Ok(());
    };
    let (p, p2) = spec.shift;
    let base = RowContext {
        experiment: cfg.experiment.name.clone(),
        kind: Kind::CoinGame,
        n: None,
        eta: None,
        d: None,
        seed: cfg.experiment.seed,
    };
    for &n in &spec.exact_n {
        let ok = coin_shift_law_exact(n, &decimal_rational(p), &decimal_rational(p2))?;
        let mut ctx = base.clone();
        ctx.n = Some(n);
        out.push(ctx.zero_check("shift_law_exact", (!ok) as usize, 1), BoundKind::Upper);
    }
    if let Some(n) = spec.chi_square_n {
        let fit = coin_shift_chi_square(n, p, p2, &master.child(role::SHIFT));
        let mut ctx = base.clone();
        ctx.n = Some(n);
        for (metric, stat, crit) in [
            ("shift_chi_square_ones", fit.ones_stat, fit.ones_critical),
            ("shift_chi_square_pairs", fit.pairs_stat, fit.pairs_critical),
        ] {
            let v = if stat <= crit { Verdict::Pass } else { Verdict::Fail };
            out.push(
                ctx.row(metric, stat, 0.0, (stat, stat), Some(crit), v),
                BoundKind::Upper,
            );
        }
    }
    Ok(())
}

fn certify(cfg: &ExperimentConfig, p: &GridPoint, seed: &Seed, out: &mut Collected) -> Result<()> {
    let lspec = cfg.learner.as_ref().expect("validated");
    let cspec = cfg.certify.clone().unwrap_or(super::config::CertifySpec {
        sample: None,
        oracle: false,
        k_max: 3,
    });
    let (class, d) = class_and_d(cfg, p, seed)?;
    let learner = build_learner(lspec, &class, p.eta)?;
    let bv = learner
        .as_block_voting()
        .ok_or_else(|| Error::Config("certify needs a split-and-vote learner (meta = spv or pspv)".into()))?;
    let (sample, universe) = match &cspec.sample {
        Some(path) => {
            let (u, s) = textio::load_sample(path)?;
            if u != class.universe() {
                return Err(Error::Config(format!(
                    "sample universe {u} does not match {}",
                    class.universe()
                )));
            }
            let mut uni: Vec<_> = s.iter().flat_map(|e| [e.clone(), e.flipped()]).collect();
            uni.sort();
            uni.dedup();
            (s, uni)
        }
        None => {
            let dist = distribution(cfg, &class, seed)?;
            (
                dist.sample_iid(p.n, &seed.child(role::SAMPLE)),
                dist.support_with_flips(),
            )
        }
    };
    let vh = {
        let partition = bv.partition(sample.len())?;
        let hypotheses = partition
            .blocks
            .iter()
            .map(|r| bv.base().learn(&sample.sub(r.clone())))
            .collect::<Result<Vec<_>>>()?;
        crate::meta::VotingHypothesis {
            hypotheses,
            partition,
            eta: Some(p.eta),
            base: bv.base().name(),
        }
    };
    let queries: Vec<Instance> = match class.universe() {
        Universe::Finite { size } => (0..size).map(Instance::Id).collect(),
        Universe::Real { .. } => {
            let mut xs: Vec<Instance> = universe.iter().map(|e| e.x.clone()).collect();
            xs.sort();
            xs.dedup();
            xs
        }
    };
    let mut ctx = context(cfg, p, Some(d));
    ctx.n = Some(sample.len());
    let mut violations = 0;
    let mut exact_sum = 0.0;
    for x in &queries {
        let exact = certificate_exact(&vh, x)?;
        let margin = certificate_paper(&vh, x)?;
        let oracle = if cspec.oracle {
            Some(optimal_certificate_oracle(
                learner.as_ref(),
                &sample,
                x,
                &universe,
                cspec.k_max,
            )?)
        } else {
            None
        };
        let bad = margin.value > exact.value
            || oracle
                .as_ref()
                .is_some_and(|o| o.edits < exact.edits().min(cspec.k_max));
        violations += bad as usize;
        exact_sum += exact.value;
        out.certificates.push(CertificateRow {
            experiment: cfg.experiment.name.clone(),
            n: sample.len(),
            eta: p.eta,
            x: x.to_string(),
            prediction: exact.prediction as u8,
            agree: exact.agree,
            disagree: exact.disagree,
            cert_exact: exact.value,
            cert_paper: margin.value,
            oracle_edits: oracle.as_ref().map(|o| o.edits),
            oracle_saturated: oracle.as_ref().map(|o| o.saturated),
            violation: bad,
        });
    }
    let q = queries.len().max(1);
    let mean = exact_sum / q as f64;
    out.push(
        ctx.row("cert_exact_mean", mean, 0.0, (mean, mean), None, Verdict::Info),
        BoundKind::Upper,
    );
    let covered = out
        .certificates
        .iter()
        .rev()
        .take(queries.len())
        .filter(|c| c.cert_exact >= p.eta)
        .count();
    let cov = covered as f64 / q as f64;
    out.push(
        ctx.row("cert_coverage", cov, 0.0, (cov, cov), None, Verdict::Info),
        BoundKind::Upper,
    );
    out.push(
        ctx.zero_check("cert_violations", violations, queries.len()),
        BoundKind::Upper,
    );
    Ok(())
}

fn sandwich(cfg: &ExperimentConfig, master: &Seed, out: &mut Collected) -> Result<()> {
    let r = sandwich_suite(cfg.experiment.trials, master, cfg.experiment.execution)?;
    let ctx = RowContext {
        experiment: cfg.experiment.name.clone(),
        kind: Kind::Sandwich,
        n: None,
        eta: None,
        d: None,
        seed: cfg.experiment.seed,
    };
    out.push(
        ctx.zero_check("sandwich_violations", r.violations, r.instances),
        BoundKind::Upper,
    );
    out.notes.extend(r.detail);
    Ok(())
}
