use serde::{Deserialize, Serialize};

use crate::distributions::DistributionSpec;
use crate::exceedance::total_variation;

use super::{Estimator, ExperimentConfig, ExperimentKind};

/// Running sums for one cell. Count moments are exact integers; the float
/// sums are only ever combined in a fixed order.
#[derive(Debug, Clone, Default)]
pub(crate) struct Accumulator {
    reps: u64,
    s1: u128,
    s2: u128,
    s3: u128,
    s4: u128,
    above_one: u64,
    hist: Vec<u64>,
    xi: f64,
    xi2: f64,
    eta: f64,
    eta2: f64,
}

impl Accumulator {
    pub(crate) fn push(&mut self, k: u64, xi: f64, eta: f64) {
        let k2 = (k as u128) * (k as u128);
        self.reps += 1;
        self.s1 += k as u128;
        self.s2 += k2;
        self.s3 += k2 * k as u128;
        self.s4 += k2 * k2;
        self.above_one += u64::from(k > 1);
        if self.hist.len() <= k as usize {
            self.hist.resize(k as usize + 1, 0);
        }
        self.hist[k as usize] += 1;
        self.xi += xi;
        self.xi2 += xi * xi;
        self.eta += eta;
        self.eta2 += eta * eta;
    }

    pub(crate) fn merge(mut self, other: &Self) -> Self {
        self.reps += other.reps;
        self.s1 += other.s1;
        self.s2 += other.s2;
        self.s3 += other.s3;
        self.s4 += other.s4;
        self.above_one += other.above_one;
        if self.hist.len() < other.hist.len() {
            self.hist.resize(other.hist.len(), 0);
        }
        for (a, b) in self.hist.iter_mut().zip(&other.hist) {
            *a += b;
        }
        self.xi += other.xi;
        self.xi2 += other.xi2;
        self.eta += other.eta;
        self.eta2 += other.eta2;
        self
    }
}

/// Mean, standard deviation and the standard error of the mean from raw sums.
fn mean_sd(sum: f64, sum_sq: f64, r: f64) -> (f64, f64, f64) {
    let mean = sum / r;
    if r < 2.0 {
        return (mean, 0.0, 0.0);
    }
    let var = ((sum_sq - sum * mean) / (r - 1.0)).max(0.0);
    (mean, var.sqrt(), (var / r).sqrt())
}

/// Statistics for one (data, n, estimator, alpha) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub data: DistributionSpec,
    pub n: u64,
    pub estimator: Estimator,
    /// `None` for the distribution-free estimator, which ignores the level.
    pub alpha: Option<f64>,
    pub horizon: u64,
    pub replications: u64,
    /// Multiplier Ψ (absent for the distribution-free estimator).
    pub psi: Option<f64>,
    pub mean: f64,
    pub se_mean: f64,
    pub sd: f64,
    pub se_sd: f64,
    pub p_gt1: f64,
    pub se_p_gt1: f64,
    /// Tail-index estimates (threshold runs only).
    pub xi_mean: Option<f64>,
    pub xi_sd: Option<f64>,
    pub se_xi_mean: Option<f64>,
    pub eta_mean: f64,
    pub se_eta_mean: f64,
    /// Model value of the mean count.
    pub analytic_mean: Option<f64>,
    /// Total variation between the histogram and `theory`.
    pub tv_theory: Option<f64>,
    /// Total variation against the plain law with the threshold count fixed
    /// at its expectation (threshold runs only).
    pub tv_beg: Option<f64>,
    pub histogram: Vec<u64>,
    pub theory: Option<Vec<f64>>,
}

impl CellResult {
    /// Histogram divided by the replication count.
    pub fn frequencies(&self) -> Vec<f64> {
        let r = self.replications as f64;
        self.histogram.iter().map(|&c| c as f64 / r).collect()
    }
}

/// Cell description without statistics, filled by the engine.
#[derive(Debug, Clone)]
pub(crate) struct CellSpec {
    pub n: u64,
    pub estimator: Estimator,
    pub alpha: Option<f64>,
    pub psi: Option<f64>,
    pub analytic_mean: Option<f64>,
    pub theory: Option<Vec<f64>>,
    pub beg: Option<Vec<f64>>,
    pub pot: bool,
}

pub(crate) fn finish(spec: &CellSpec, data: DistributionSpec, horizon: u64, acc: &Accumulator) -> CellResult {
    let r = acc.reps as f64;
    let mean = acc.s1 as f64 / r;
    // exact integer variance numerator r*s2 - s1^2
    let (sd, se_mean, se_sd) = if acc.reps < 2 {
        (0.0, 0.0, 0.0)
    } else {
        let num = acc.reps as i128 * acc.s2 as i128 - (acc.s1 as i128) * (acc.s1 as i128);
        let var = num as f64 / (r * (r - 1.0));
        let sd = var.sqrt();
        let (m2, m3, m4) = (acc.s2 as f64 / r, acc.s3 as f64 / r, acc.s4 as f64 / r);
        let mu4 = m4 - 4.0 * mean * m3 + 6.0 * mean * mean * m2 - 3.0 * mean.powi(4);
        let var_of_var = ((mu4 - var * var) / r).max(0.0);
        let se_sd = if sd > 0.0 { var_of_var.sqrt() / (2.0 * sd) } else { 0.0 };
        (sd, sd / r.sqrt(), se_sd)
    };
    let p = acc.above_one as f64 / r;
    let (xi_mean, xi_sd, se_xi) = mean_sd(acc.xi, acc.xi2, r);
    let (eta_mean, _, se_eta) = mean_sd(acc.eta, acc.eta2, r);
    let freq: Vec<f64> = acc.hist.iter().map(|&c| c as f64 / r).collect();
    CellResult {
        data,
        n: spec.n,
        estimator: spec.estimator,
        alpha: spec.alpha,
        horizon,
        replications: acc.reps,
        psi: spec.psi,
        mean,
        se_mean,
        sd,
        se_sd,
        p_gt1: p,
        se_p_gt1: (p * (1.0 - p) / r).sqrt(),
        xi_mean: spec.pot.then_some(xi_mean),
        xi_sd: spec.pot.then_some(xi_sd),
        se_xi_mean: spec.pot.then_some(se_xi),
        eta_mean,
        se_eta_mean: se_eta,
        analytic_mean: spec.analytic_mean,
        tv_theory: spec.theory.as_ref().map(|t| total_variation(&freq, t)),
        tv_beg: spec.beg.as_ref().map(|t| total_variation(&freq, t)),
        histogram: acc.hist.clone(),
        theory: spec.theory.clone(),
    }
}

/// Aggregate output of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub name: String,
    pub kind: ExperimentKind,
    pub seed: u64,
    pub replications: u64,
    pub git_describe: String,
    pub config: ExperimentConfig,
    pub cells: Vec<CellResult>,
}

impl ExperimentResult {
    /// First cell matching the given coordinates.
    pub fn cell(
        &self,
        data: &DistributionSpec,
        n: u64,
        estimator: Estimator,
        alpha: Option<f64>,
    ) -> Option<&CellResult> {
        self.cells.iter().find(|c| {
            c.data == *data
                && c.n == n
                && c.estimator == estimator
                && match (c.alpha, alpha) {
                    (Some(a), Some(b)) => (a - b).abs() < 1e-12,
                    (None, None) => true,
                    _ => false,
                }
        })
    }
}
