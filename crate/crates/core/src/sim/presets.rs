use std::fmt;
use std::str::FromStr;

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::estimators::TransformSpec;

use super::{Estimator, ExperimentConfig, ExperimentKind};

/// Replication count of the full runs.
const FULL: u64 = 10_000;
/// Replication count of `quick` runs.
const QUICK: u64 = 1_000;

/// Canned experiment sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Figure {
    /// Mean exceedances against training size, `N = 1/(1-α)`.
    Fig1,
    /// Exceedance laws for Bayes, ML and the distribution-free estimator.
    Fig2,
    /// Pareto threshold run against the theoretical law.
    Fig4,
    /// Prediction-interval counts.
    Fig5,
    /// Symmetric stable sweep.
    Fig6,
    /// Per-distribution statistics.
    Table1,
}

impl Figure {
    pub const ALL: [Figure; 6] = [Self::Fig1, Self::Fig2, Self::Fig4, Self::Fig5, Self::Fig6, Self::Table1];

    pub fn id(self) -> &'static str {
        match self {
            Self::Fig1 => "1",
            Self::Fig2 => "2",
            Self::Fig4 => "4",
            Self::Fig5 => "5",
            Self::Fig6 => "6",
            Self::Table1 => "table1",
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Figure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Self::ALL.into_iter().find(|f| f.id() == key).ok_or_else(|| {
            let ids: Vec<_> = Self::ALL.iter().map(|f| f.id()).collect();
            Error::Parse(format!("unknown figure `{s}`; valid ids: {}", ids.join(", ")))
        })
    }
}

fn base(name: &str, kind: ExperimentKind, replications: u64, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        kind,
        data: vec![DistributionSpec::Exponential { rate: 1.0 }],
        alpha_s: vec![],
        n: vec![],
        n_tilde: None,
        m_bar: None,
        horizon: 100,
        alpha: vec![0.99],
        replications,
        seed: Some(seed),
        estimators: vec![Estimator::Bayes],
        gvs_m: 1,
        transform: TransformSpec::Identity,
        rate_prior: None,
        interval_width: None,
    }
}

/// `start, start + step, ...` for `count` values, rounded to clean decimals.
fn grid(start: f64, step: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| ((start + step * i as f64) * 1e6).round() / 1e6).collect()
}

/// Tail counts used by the threshold tables.
pub const TAIL_COUNTS: [u64; 4] = [5, 10, 25, 50];

/// The six distributions of the statistics table.
pub fn table_distributions() -> Vec<DistributionSpec> {
    vec![
        DistributionSpec::Exponential { rate: 1.0 },
        DistributionSpec::LogNormal { mu: 0.0, sigma: 1.0 },
        DistributionSpec::StandardPareto { xi: 0.1, u: 1.0 },
        DistributionSpec::Gev { xi: 0.5, mu: 0.0, beta: 1.0 },
        DistributionSpec::StudentT { nu: 2.0 },
        DistributionSpec::StudentT { nu: 10.0 },
    ]
}

/// Experiment configs for `figure`; `quick` cuts replications tenfold.
pub fn preset(figure: Figure, quick: bool, seed: u64) -> Vec<ExperimentConfig> {
    let reps = if quick { QUICK } else { FULL };
    let threshold = |mut c: ExperimentConfig| {
        c.n_tilde = Some(50);
        c.m_bar = Some(100);
        c
    };
    match figure {
        Figure::Fig1 => [(0.9, 10), (0.99, 100), (0.999, 1000)]
            .into_iter()
            .map(|(alpha, horizon)| {
                let mut c =
                    base(&format!("fig1_alpha{}", &alpha.to_string()[2..]), ExperimentKind::CoverageVsN, reps, seed);
                c.n = vec![1, 2, 3, 5, 7, 10, 15, 20, 30, 50, 75, 100, 150, 200, 250, 300, 400, 500];
                c.alpha = vec![alpha];
                c.horizon = horizon;
                c.estimators = vec![Estimator::Bayes, Estimator::Ml];
                c
            })
            .collect(),
        Figure::Fig2 => {
            let mut left = base("fig2_left", ExperimentKind::BegComparison, reps, seed);
            left.n = vec![50];
            left.estimators = vec![Estimator::Bayes, Estimator::Ml];
            let mut right = base("fig2_right", ExperimentKind::BegComparison, reps, seed);
            right.n = vec![100];
            right.estimators = vec![Estimator::Bayes, Estimator::Ml, Estimator::Gvs];
            vec![left, right]
        }
        Figure::Fig4 => {
            let mut c = threshold(base("fig4", ExperimentKind::BegComparison, reps, seed));
            c.data = vec![DistributionSpec::StandardPareto { xi: 0.3, u: 1.0 }];
            c.n = vec![50];
            vec![c]
        }
        Figure::Fig5 => {
            let mut left = base("fig5_left", ExperimentKind::IntervalSweep, reps, seed);
            left.n = vec![50];
            left.alpha = grid(0.90, 0.01, 10);
            left.interval_width = Some(0.01);
            left.estimators = vec![Estimator::Bayes, Estimator::Ml];
            let mut right = left.clone();
            right.name = "fig5_right".into();
            right.horizon = 1000;
            right.alpha = grid(0.990, 0.001, 10);
            right.interval_width = Some(0.001);
            vec![left, right]
        }
        Figure::Fig6 => {
            let mut c = threshold(base("fig6", ExperimentKind::SasSweep, reps, seed));
            c.data = vec![];
            c.alpha_s = grid(1.1, 0.1, 10);
            c.n = TAIL_COUNTS.to_vec();
            vec![c]
        }
        Figure::Table1 => {
            let mut c = threshold(base("table1", ExperimentKind::DistributionTable, reps, seed));
            c.data = table_distributions();
            c.n = TAIL_COUNTS.to_vec();
            vec![c]
        }
    }
}
