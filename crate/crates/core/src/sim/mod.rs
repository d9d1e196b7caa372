//! Seeded Monte Carlo experiments.
//!
//! An experiment draws training data, estimates quantiles with each
//! estimator on a grid of sample sizes and levels, and counts how many of
//! the future values land above the estimate. Replication `r` of data set
//! `g` always uses stream `(g << 40) | r` of the experiment seed, and
//! partial statistics are merged in a fixed tree order, so results do not
//! depend on the number of worker threads.
//!
//! Two data layouts are supported. Unconditional runs draw `n` training
//! values and `N` future values. Peaks-over-threshold runs (`n_tilde` and
//! `m_bar` set) draw `ñ·m̄` pooled training values, keep the `n` largest
//! above the `(n+1)`-th, and compare against `N·m̄` future values.

mod engine;
mod output;
mod presets;
mod stats;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::{DistributionSpec, RandomStream};
use crate::error::{Error, Result};
use crate::estimators::TransformSpec;

pub use output::{load_config, parse_config, write_outputs, OutputPaths};
pub use presets::{preset, table_distributions, Figure, TAIL_COUNTS};
pub use stats::{CellResult, ExperimentResult};

/// Seed used when neither the config nor the caller supplies one.
pub const DEFAULT_SEED: u64 = 20_190_917;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Mean exceedance count against training size.
    CoverageVsN,
    /// Exceedance histogram against the theoretical law.
    BegComparison,
    /// Counts inside consecutive prediction intervals.
    IntervalSweep,
    /// Heavy-tail sensitivity over symmetric stable data.
    SasSweep,
    /// Tail-index and exceedance statistics per distribution.
    DistributionTable,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::CoverageVsN => "coverage_vs_n",
            Self::BegComparison => "beg_comparison",
            Self::IntervalSweep => "interval_sweep",
            Self::SasSweep => "sas_sweep",
            Self::DistributionTable => "distribution_table",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Bayes,
    Ml,
    /// The `m`-th largest training value (distribution free).
    Gvs,
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Bayes => "bayes",
            Self::Ml => "ml",
            Self::Gvs => "gvs",
        })
    }
}

impl FromStr for Estimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bayes" => Ok(Self::Bayes),
            "ml" => Ok(Self::Ml),
            "gvs" => Ok(Self::Gvs),
            other => Err(Error::Parse(format!("unknown estimator `{other}` (expected bayes, ml or gvs)"))),
        }
    }
}

/// Distribution of the exponential rate, redrawn for every replication.
///
/// Text forms: `fixed(rate=1)`, `gamma(shape=2,rate=2)`, `loguniform(lo=0.1,hi=10)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RatePrior {
    Fixed { rate: f64 },
    Gamma { shape: f64, rate: f64 },
    LogUniform { lo: f64, hi: f64 },
}

impl RatePrior {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Fixed { rate } => rate > 0.0 && rate.is_finite(),
            Self::Gamma { shape, rate } => shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite(),
            Self::LogUniform { lo, hi } => lo > 0.0 && hi > lo && hi.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ParameterDomain(format!("invalid rate prior {self}")))
        }
    }

    pub fn draw(&self, rng: &mut RandomStream) -> f64 {
        use rand_distr::Distribution;
        match *self {
            Self::Fixed { rate } => rate,
            Self::Gamma { shape, rate } => {
                rand_distr::Gamma::new(shape, 1.0 / rate).expect("validated prior").sample(rng)
            }
            Self::LogUniform { lo, hi } => (lo.ln() + rng.uniform() * (hi / lo).ln()).exp(),
        }
    }
}

impl fmt::Display for RatePrior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Fixed { rate } => write!(f, "fixed(rate={rate})"),
            Self::Gamma { shape, rate } => write!(f, "gamma(shape={shape},rate={rate})"),
            Self::LogUniform { lo, hi } => write!(f, "loguniform(lo={lo},hi={hi})"),
        }
    }
}

impl FromStr for RatePrior {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("cannot parse rate prior `{s}`"));
        let (name, rest) = s.trim().split_once('(').ok_or_else(bad)?;
        let body = rest.strip_suffix(')').ok_or_else(bad)?;
        let mut keys = Vec::new();
        for item in body.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(bad)?;
            keys.push((k.trim().to_ascii_lowercase(), v.trim().parse::<f64>().map_err(|_| bad())?));
        }
        let get = |key: &str| keys.iter().find(|(k, _)| k == key).map(|(_, v)| *v).ok_or_else(bad);
        let (prior, arity) = match name.trim().to_ascii_lowercase().as_str() {
            "fixed" => (Self::Fixed { rate: get("rate")? }, 1),
            "gamma" => (Self::Gamma { shape: get("shape")?, rate: get("rate")? }, 2),
            "loguniform" => (Self::LogUniform { lo: get("lo")?, hi: get("hi")? }, 2),
            _ => return Err(bad()),
        };
        if keys.len() != arity {
            return Err(bad());
        }
        prior.validate()?;
        Ok(prior)
    }
}

impl TryFrom<String> for RatePrior {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<RatePrior> for String {
    fn from(p: RatePrior) -> Self {
        p.to_string()
    }
}

/// Declarative description of one Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: ExperimentKind,
    #[serde(default)]
    pub data: Vec<DistributionSpec>,
    /// Stable exponents; each adds `sas(alpha=..)` to `data`.
    #[serde(default)]
    pub alpha_s: Vec<f64>,
    /// Training sizes, or retained tail counts in threshold runs.
    pub n: Vec<u64>,
    /// Number of training blocks `ñ` (threshold runs only).
    #[serde(default)]
    pub n_tilde: Option<u64>,
    /// Values per block `m̄` (threshold runs only).
    #[serde(default)]
    pub m_bar: Option<u64>,
    /// Future horizon `N`: values, or blocks in threshold runs.
    pub horizon: u64,
    #[serde(default)]
    pub alpha: Vec<f64>,
    pub replications: u64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<Estimator>,
    /// Order statistic used by the distribution-free estimator.
    #[serde(default = "default_gvs_m")]
    pub gvs_m: u64,
    /// Map to the exponential scale (unconditional runs only).
    #[serde(default, with = "text_form")]
    pub transform: TransformSpec,
    #[serde(default)]
    pub rate_prior: Option<RatePrior>,
    /// Width of each prediction interval (interval sweeps only).
    #[serde(default)]
    pub interval_width: Option<f64>,
}

fn default_estimators() -> Vec<Estimator> {
    vec![Estimator::Bayes]
}

fn default_gvs_m() -> u64 {
    1
}

mod text_form {
    use serde::{de, Deserialize, Deserializer, Serializer};

    use crate::estimators::TransformSpec;

    pub fn serialize<S: Serializer>(t: &TransformSpec, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(t)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<TransformSpec, D::Error> {
        String::deserialize(d)?.parse().map_err(de::Error::custom)
    }
}

/// Threshold-run layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PotDesign {
    pub n_tilde: u64,
    pub m_bar: u64,
}

impl ExperimentConfig {
    pub fn pot(&self) -> Option<PotDesign> {
        match (self.n_tilde, self.m_bar) {
            (Some(n_tilde), Some(m_bar)) => Some(PotDesign { n_tilde, m_bar }),
            _ => None,
        }
    }

    /// `data` followed by one stable law per entry of `alpha_s`.
    pub fn datasets(&self) -> Vec<DistributionSpec> {
        let mut out = self.data.clone();
        out.extend(self.alpha_s.iter().map(|&alpha| DistributionSpec::StableSas { alpha }));
        out
    }

    pub fn resolved_seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |msg: String| Err(Error::Config(format!("experiment `{}`: {msg}", self.name)));
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return cfg("name must be non-empty and use only letters, digits, `_` or `-`".into());
        }
        if self.replications == 0 {
            return cfg("replications must be at least 1".into());
        }
        if self.horizon == 0 {
            return cfg("horizon must be at least 1".into());
        }
        if self.n.is_empty() || self.n.contains(&0) {
            return cfg("n must list positive sizes".into());
        }
        if self.estimators.is_empty() {
            return cfg("at least one estimator is required".into());
        }
        for (i, e) in self.estimators.iter().enumerate() {
            if self.estimators[..i].contains(e) {
                return cfg(format!("estimator `{e}` listed twice"));
            }
        }
        let needs_alpha = self.estimators.iter().any(|e| *e != Estimator::Gvs);
        if needs_alpha && self.alpha.is_empty() {
            return cfg("alpha grid is empty".into());
        }
        if let Some(a) = self.alpha.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return cfg(format!("alpha {a} is outside (0, 1)"));
        }
        let data = self.datasets();
        if data.is_empty() {
            return cfg("no data distribution given".into());
        }
        for d in &data {
            d.validate()?;
        }
        if self.n_tilde.is_some() != self.m_bar.is_some() {
            return cfg("n_tilde and m_bar must be given together".into());
        }
        let n_max = *self.n.iter().max().expect("non-empty");
        if let Some(pot) = self.pot() {
            if pot.n_tilde == 0 || pot.m_bar == 0 {
                return cfg("n_tilde and m_bar must be positive".into());
            }
            if pot.n_tilde * pot.m_bar <= n_max {
                return cfg(format!("{} pooled values cannot supply n = {n_max} exceedances", pot.n_tilde * pot.m_bar));
            }
            if self.estimators.contains(&Estimator::Gvs) {
                return cfg("the gvs estimator applies to unconditional runs only".into());
            }
            if self.transform != TransformSpec::Identity {
                return cfg("threshold runs use the log-ratio transform; leave `transform` unset".into());
            }
        }
        if self.estimators.contains(&Estimator::Gvs) {
            let n_min = *self.n.iter().min().expect("non-empty");
            if self.gvs_m == 0 || self.gvs_m > n_min {
                return cfg(format!("gvs_m = {} must lie in 1..={n_min}", self.gvs_m));
            }
        }
        if let Some(prior) = self.rate_prior {
            prior.validate()?;
            if !data.iter().all(|d| matches!(d, DistributionSpec::Exponential { .. })) {
                return cfg("rate_prior requires exponential data".into());
            }
        }
        match self.kind {
            ExperimentKind::CoverageVsN if self.pot().is_some() => {
                return cfg("coverage_vs_n is an unconditional experiment".into());
            }
            ExperimentKind::SasSweep | ExperimentKind::DistributionTable if self.pot().is_none() => {
                return cfg(format!("{} needs n_tilde and m_bar", self.kind));
            }
            ExperimentKind::SasSweep if !data.iter().all(|d| matches!(d, DistributionSpec::StableSas { .. })) => {
                return cfg("sas_sweep data must be symmetric stable".into());
            }
            ExperimentKind::IntervalSweep => {
                let Some(w) = self.interval_width else {
                    return cfg("interval_sweep needs interval_width".into());
                };
                if !(w > 0.0 && w < 1.0) {
                    return cfg(format!("interval_width {w} is outside (0, 1)"));
                }
                if self.estimators.contains(&Estimator::Gvs) {
                    return cfg("interval_sweep supports bayes and ml".into());
                }
                if let Some(a) = self.alpha.iter().find(|a| **a + w > 1.0 + 1e-9) {
                    return cfg(format!("interval starting at {a} extends past 1"));
                }
            }
            _ if self.interval_width.is_some() => {
                return cfg("interval_width only applies to interval_sweep".into());
            }
            _ => {}
        }
        Ok(())
    }
}

/// Runs any experiment kind.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    engine::execute(config)
}

fn run_kind(config: &ExperimentConfig, kind: ExperimentKind) -> Result<ExperimentResult> {
    if config.kind != kind {
        return Err(Error::Config(format!("experiment `{}` is {}, not {kind}", config.name, config.kind)));
    }
    run(config)
}

/// Mean exceedance count over a grid of training sizes.
pub fn run_coverage_vs_n(config: &ExperimentConfig) -> Result<ExperimentResult> {
    run_kind(config, ExperimentKind::CoverageVsN)
}

/// Exceedance histograms with the theoretical pmf and total variation.
pub fn run_beg_comparison(config: &ExperimentConfig) -> Result<ExperimentResult> {
    run_kind(config, ExperimentKind::BegComparison)
}

/// Counts inside `(η̂_α, η̂_{α+w}]` for each `α` on the grid.
pub fn run_interval_sweep(config: &ExperimentConfig) -> Result<ExperimentResult> {
    run_kind(config, ExperimentKind::IntervalSweep)
}

pub fn run_sas_sweep(config: &ExperimentConfig) -> Result<ExperimentResult> {
    run_kind(config, ExperimentKind::SasSweep)
}

pub fn run_distribution_table(config: &ExperimentConfig) -> Result<ExperimentResult> {
    run_kind(config, ExperimentKind::DistributionTable)
}
