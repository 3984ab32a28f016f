//! Experiment configuration (TOML). The grammar is documented in
//! `docs/config.md`; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    RealizableUpper,
    RealizableLower,
    Proper,
    Agnostic,
    CoinGame,
    Certify,
    Sandwich,
}

impl Kind {
    pub const ALL: [Kind; 7] = [
        Kind::RealizableUpper,
        Kind::RealizableLower,
        Kind::Proper,
        Kind::Agnostic,
        Kind::CoinGame,
        Kind::Certify,
        Kind::Sandwich,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Kind::RealizableUpper => "realizable-upper",
            Kind::RealizableLower => "realizable-lower",
            Kind::Proper => "proper",
            Kind::Agnostic => "agnostic",
            Kind::CoinGame => "coin-game",
            Kind::Certify => "certify",
            Kind::Sandwich => "sandwich",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Kind::RealizableUpper => {
                "adversarial risk of a split-and-vote learner on a realizable distribution vs 42*eta*d \
                 (or standard risk of a bare base learner vs d/(n+1))"
            }
            Kind::RealizableLower => "relabeling attack on the hard distribution vs eta*(d-1)/16",
            Kind::Proper => "adversarial risk of the projected vote vs 20*eta*d^3, properness on every trial",
            Kind::Agnostic => "adversarial risk under label noise vs 6*OPT + 10*sqrt(d*eta)",
            Kind::CoinGame => "coin-game regret of a deterministic learner vs 1/2 + eta' - 5/n",
            Kind::Certify => "per-query certificates of a split-and-vote learner, checked against brute force",
            Kind::Sandwich => "exact eps <= eps_adv <= lambda + eps on random tiny instances",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub name: String,
    pub kind: Kind,
    pub seed: u64,
    pub trials: usize,
    #[serde(default)]
    pub execution: Execution,
    /// Overrides the VC dimension used in the bound formulas.
    #[serde(default)]
    pub bound_d: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ClassSpec {
    Intervals {
        m: u32,
    },
    FullCube {
        m: u32,
    },
    /// Thresholds on the id grid `0..m`.
    GridThresholds {
        m: u32,
    },
    Constants {
        m: u32,
    },
    /// Rows given inline or in a file (one 0/1 string per row).
    Table {
        #[serde(default)]
        rows: Vec<String>,
        #[serde(default)]
        path: Option<PathBuf>,
    },
    /// A random subset of intervals (`d = 2`) or grid thresholds (`d = 1`)
    /// on a shuffled domain, with VC dimension exactly `d` from the grid.
    Random {
        m: u32,
    },
    Threshold,
    Halfspace {
        dim: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSpec {
    /// `oig`, `erm`, `max-margin`, `const0` or `const1`.
    pub base: String,
    /// `spv`, `pspv` or `none`.
    #[serde(default = "default_meta")]
    pub meta: String,
    #[serde(default = "default_kp")]
    pub kp: usize,
    /// Fixed block count instead of the budget-derived one.
    #[serde(default)]
    pub blocks: Option<usize>,
}

fn default_meta() -> String {
    "spv".into()
}

fn default_kp() -> usize {
    2
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Marginal {
    #[default]
    Uniform,
    /// Drawn uniformly from the simplex.
    Random,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    #[serde(default)]
    pub marginal: Marginal,
    /// Target row of a tabular class; random when absent.
    #[serde(default)]
    pub target_row: Option<usize>,
    /// Target threshold on `[0, 1]`.
    #[serde(default)]
    pub theta: Option<f64>,
    /// Target halfspace.
    #[serde(default)]
    pub w: Option<Vec<f64>>,
    #[serde(default)]
    pub b: Option<f64>,
    /// Probability that a label is flipped.
    #[serde(default)]
    pub noise: f64,
    /// Support size for real-valued universes.
    #[serde(default = "default_points")]
    pub points: usize,
    /// A distribution file in the text format; overrides the rest.
    #[serde(default)]
    pub path: Option<PathBuf>,
}

fn default_points() -> usize {
    20
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub eta: Vec<f64>,
    /// Explicit sample sizes, crossed with `eta`.
    #[serde(default)]
    pub n: Vec<usize>,
    /// `n = ceil(n_scale / eta)` per eta, instead of `n`.
    #[serde(default)]
    pub n_scale: Option<f64>,
    /// VC dimensions, for random classes.
    #[serde(default)]
    pub d: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversarySpec {
    /// `brute`, `voteflip` or `relabel`.
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoinSpec {
    /// `majority`, `const0`, `const1` or `count:<fraction>`.
    #[serde(default = "default_coin_learner")]
    pub learner: String,
    /// Sizes at which the shifted-coin law is checked exactly.
    #[serde(default)]
    pub exact_n: Vec<usize>,
    /// Size of the chi-square check of the shift, if any.
    #[serde(default)]
    pub chi_square_n: Option<usize>,
    #[serde(default = "default_shift")]
    pub shift: (f64, f64),
}

fn default_coin_learner() -> String {
    "majority".into()
}

fn default_shift() -> (f64, f64) {
    (0.3, 0.5)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifySpec {
    /// Sample file; otherwise one sample of each grid size is drawn.
    #[serde(default)]
    pub sample: Option<PathBuf>,
    /// Run the brute-force oracle (tiny samples only).
    #[serde(default)]
    pub oracle: bool,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
}

fn default_k_max() -> usize {
    3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
}

fn default_dir() -> PathBuf {
    PathBuf::from("results")
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: default_dir() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub class: Option<ClassSpec>,
    #[serde(default)]
    pub learner: Option<LearnerSpec>,
    #[serde(default)]
    pub adversary: Option<AdversarySpec>,
    #[serde(default)]
    pub distribution: Option<DistributionSpec>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub coin: Option<CoinSpec>,
    #[serde(default)]
    pub certify: Option<CertifySpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

/// One point of the `(n, eta, d)` grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridPoint {
    pub n: usize,
    pub eta: f64,
    pub d: Option<usize>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses a file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::parse(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(ClassSpec::Table { path: Some(p), .. }) = &mut cfg.class {
            rebase(p);
        }
        if let Some(DistributionSpec { path: Some(p), .. }) = &mut cfg.distribution {
            rebase(p);
        }
        if let Some(CertifySpec { sample: Some(p), .. }) = &mut cfg.certify {
            rebase(p);
        }
        rebase(&mut cfg.output.dir);
        Ok(cfg)
    }

    fn needs(&self, what: &str, present: bool) -> Result<()> {
        if present {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "experiment kind {} requires a [{what}] section",
                self.experiment.kind.name()
            )))
        }
    }

    pub fn validate(&self) -> Result<()> {
        let kind = self.experiment.kind;
        if self.experiment.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if !self.grid.n.is_empty() && self.grid.n_scale.is_some() {
            return Err(Error::Config("give either grid.n or grid.n_scale, not both".into()));
        }
        match kind {
            Kind::RealizableUpper | Kind::Proper | Kind::Agnostic => {
                self.needs("class", self.class.is_some())?;
                self.needs("learner", self.learner.is_some())?;
            }
            Kind::RealizableLower | Kind::Certify => {
                self.needs("class", self.class.is_some())?;
                self.needs("learner", self.learner.is_some())?;
            }
            Kind::CoinGame | Kind::Sandwich => {}
        }
        for &eta in &self.grid.eta {
            let ok = if kind == Kind::CoinGame {
                (0.0..=0.5).contains(&eta)
            } else {
                eta > 0.0 && eta <= 1.0
            };
            if !ok {
                return Err(Error::Config(format!(
                    "eta = {eta} is out of range for {}",
                    kind.name()
                )));
            }
        }
        if matches!(self.class, Some(ClassSpec::Random { .. })) && self.grid.d.is_empty() && !self.grid.eta.is_empty() {
            return Err(Error::Config("a random class needs grid.d".into()));
        }
        for p in self.points() {
            let budgeted = matches!(
                kind,
                Kind::RealizableUpper | Kind::RealizableLower | Kind::Proper | Kind::Agnostic
            );
            let fixed_blocks = self
                .learner
                .as_ref()
                .is_some_and(|l| l.blocks.is_some() || l.meta == "none");
            if budgeted && !fixed_blocks && (p.n as f64) * p.eta < 1.0 - 1e-9 {
                return Err(Error::Config(format!(
                    "grid point n = {}, eta = {} has n < 1/eta; the learner needs at least one edit of budget",
                    p.n, p.eta
                )));
            }
            if let Some(l) = self.learner.as_ref().filter(|l| l.blocks.is_none()) {
                let per_eta = match l.meta.as_str() {
                    "spv" => 7.0,
                    "pspv" => 5.0 * l.kp as f64,
                    _ => 0.0,
                };
                let t = (per_eta * p.eta * p.n as f64 + 1e-9).floor();
                if t > p.n as f64 {
                    return Err(Error::Config(format!(
                        "grid point n = {}, eta = {} asks {} for {t} blocks from {} examples; \
                         use eta <= {:.4} or set learner.blocks",
                        p.n,
                        p.eta,
                        l.meta,
                        p.n,
                        1.0 / per_eta
                    )));
                }
            }
            if p.n == 0 {
                return Err(Error::Config("n must be >= 1".into()));
            }
        }
        Ok(())
    }

    /// Grid points in declared order: eta outermost, then n, then d.
    pub fn points(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        let ds: Vec<Option<usize>> = if self.grid.d.is_empty() {
            vec![None]
        } else {
            self.grid.d.iter().map(|&d| Some(d)).collect()
        };
        for &eta in &self.grid.eta {
            let ns: Vec<usize> = match self.grid.n_scale {
                Some(k) => vec![((k / eta) - 1e-9).ceil() as usize],
                None => self.grid.n.clone(),
            };
            for &n in &ns {
                for &d in &ds {
                    out.push(GridPoint { n, eta, d });
                }
            }
        }
        out
    }
}
