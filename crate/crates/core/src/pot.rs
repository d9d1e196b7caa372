//! Peaks over threshold for asymptotically Paretian tails.
//!
//! Data arrive in `ñ` blocks (years). The threshold `u` is the `(n+1)`-th
//! largest pooled value, and the `n` values above it are treated as standard
//! Pareto, i.e. `ln(x/u)` is exponential. The count of threshold exceedances
//! over `N` future blocks has a negative-binomial predictive law, which
//! shifts the multiplier Ψ needed for an annual quantile with one expected
//! exceedance in `N` blocks.

use std::collections::HashMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{Method, ObservationSummary, PsiCoefficient, TransformSpec};
use crate::exceedance::{beg_pmf, ExceedancePmf, PmfParams};
use crate::numeric::{ln_gamma, pairwise_sum};

/// Cumulative mass the negative-binomial truncation must reach.
pub const NB_MASS_TARGET: f64 = 1.0 - 1e-9;
/// Hard limit on the number of negative-binomial terms.
pub const NB_MAX_TERMS: usize = 1_000_000;

/// Gamma(a, b) prior on the Poisson rate of threshold exceedances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorParams {
    pub a: f64,
    pub b: f64,
}

impl PriorParams {
    pub const JEFFREYS: Self = Self { a: 0.5, b: 0.0 };
}

impl Default for PriorParams {
    fn default() -> Self {
        Self::JEFFREYS
    }
}

/// Threshold and the strictly larger values (descending).
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSelection {
    pub threshold: f64,
    pub exceedances: Vec<f64>,
}

/// Sorts the `k` largest entries of `buf` into `buf[..k]`, descending.
pub(crate) fn top_in_place(buf: &mut [f64], k: usize) -> &[f64] {
    debug_assert!(k <= buf.len() && k > 0);
    if k < buf.len() {
        buf.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
    }
    let top = &mut buf[..k];
    top.sort_unstable_by(|a, b| b.total_cmp(a));
    top
}

/// Picks `u` as the `(n_tail+1)`-th largest value and returns the `n_tail`
/// values strictly above it.
pub fn select_threshold(pooled: &[f64], n_tail: usize) -> Result<ThresholdSelection> {
    if n_tail == 0 {
        return Err(Error::Domain("n_tail must be at least 1".into()));
    }
    if pooled.len() <= n_tail {
        return Err(Error::DataSize(format!(
            "{} observations cannot supply {n_tail} exceedances plus a threshold",
            pooled.len()
        )));
    }
    if let Some(bad) = pooled.iter().find(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("non-finite observation {bad}")));
    }
    let mut buf = pooled.to_vec();
    let top = top_in_place(&mut buf, n_tail + 1);
    split_top(top, n_tail)
}

fn split_top(top_desc: &[f64], n_tail: usize) -> Result<ThresholdSelection> {
    let threshold = top_desc[n_tail];
    if top_desc[n_tail - 1] <= threshold {
        let strict = top_desc[..n_tail].iter().filter(|&&x| x > threshold).count();
        return Err(Error::Ties(format!(
            "only {strict} values lie strictly above the threshold {threshold}; choose a different n_tail"
        )));
    }
    Ok(ThresholdSelection { threshold, exceedances: top_desc[..n_tail].to_vec() })
}

/// Tail index estimate `mean(ln(x_i/u))`.
pub fn hill_estimate(exceedances: &[f64], threshold: f64) -> f64 {
    let logs: Vec<f64> = exceedances.iter().map(|x| (x / threshold).ln()).collect();
    pairwise_sum(&logs) / logs.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub id: String,
    pub values: Vec<f64>,
}

/// Blocked observations reduced to a threshold and its log-exceedances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotSeries {
    pub blocks: Vec<Block>,
    pub n_tail: usize,
    pub threshold: f64,
    pub log_exceedances: Vec<f64>,
}

impl PotSeries {
    pub fn new(blocks: Vec<Block>, n_tail: usize) -> Result<Self> {
        if blocks.is_empty() || blocks.iter().any(|b| b.values.is_empty()) {
            return Err(Error::DataSize("every block needs at least one observation".into()));
        }
        let pooled: Vec<f64> = blocks.iter().flat_map(|b| b.values.iter().copied()).collect();
        let sel = select_threshold(&pooled, n_tail)?;
        if sel.threshold <= 0.0 {
            return Err(Error::Domain(format!(
                "threshold {} is not positive; log-ratio exceedances need u > 0 (use a smaller n_tail)",
                sel.threshold
            )));
        }
        let log_exceedances = sel.exceedances.iter().map(|x| (x / sel.threshold).ln()).collect();
        Ok(Self { blocks, n_tail, threshold: sel.threshold, log_exceedances })
    }

    /// Reads `block_id,value` rows (with header); blocks keep first-seen order.
    pub fn from_csv<R: Read>(reader: R, n_tail: usize) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h.eq_ignore_ascii_case(name))
                .ok_or_else(|| Error::Parse(format!("missing column `{name}`")))
        };
        let (id_col, value_col) = (col("block_id")?, col("value")?);
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut blocks: Vec<Block> = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let id = rec.get(id_col).unwrap_or_default().to_string();
            let raw = rec.get(value_col).unwrap_or_default();
            let value: f64 =
                raw.parse().map_err(|_| Error::Parse(format!("row {}: `{raw}` is not a number", line + 2)))?;
            let slot = *index.entry(id.clone()).or_insert_with(|| {
                blocks.push(Block { id, values: Vec::new() });
                blocks.len() - 1
            });
            blocks[slot].values.push(value);
        }
        Self::new(blocks, n_tail)
    }

    /// Number of blocks `ñ`.
    pub fn n_tilde(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.values.len()).collect()
    }

    /// Mean block size `m̄`.
    pub fn m_bar(&self) -> f64 {
        self.block_sizes().iter().sum::<usize>() as f64 / self.n_tilde() as f64
    }

    pub fn tail_index(&self) -> f64 {
        pairwise_sum(&self.log_exceedances) / self.n_tail as f64
    }

    pub fn summary(&self) -> ObservationSummary {
        ObservationSummary { n: self.n_tail as u64, sigma: pairwise_sum(&self.log_exceedances) }
    }

    pub fn transform(&self) -> TransformSpec {
        TransformSpec::LogRatio { u: self.threshold }
    }
}

/// Negative-binomial predictive of the threshold-exceedance count over
/// `big_n` future blocks, given `n` exceedances in `n_tilde` blocks:
/// `NB(n + a, (ñ + b)/(ñ + N + b))`, truncated once the mass reaches
/// [`NB_MASS_TARGET`] and renormalised.
pub fn nu_predictive(n: u64, n_tilde: u64, big_n: u64, prior: PriorParams) -> Result<ExceedancePmf> {
    if n == 0 || n_tilde == 0 || big_n == 0 {
        return Err(Error::Domain(format!("n, n_tilde and N must be positive (n={n}, n_tilde={n_tilde}, N={big_n})")));
    }
    if !(prior.a >= 0.0 && prior.b >= 0.0) {
        return Err(Error::ParameterDomain(format!("prior parameters must be nonnegative, got {prior:?}")));
    }
    let r = n as f64 + prior.a;
    let denom = n_tilde as f64 + big_n as f64 + prior.b;
    let p = (n_tilde as f64 + prior.b) / denom;
    let ln_p = p.ln();
    let ln_q = (big_n as f64 / denom).ln();
    let ln_gr = ln_gamma(r);
    let mean = r * (1.0 - p) / p;

    let mut probabilities = Vec::new();
    let mut cumulative = 0.0;
    for j in 0..NB_MAX_TERMS {
        let jf = j as f64;
        let lp = ln_gamma(jf + r) - ln_gr - ln_gamma(jf + 1.0) + r * ln_p + jf * ln_q;
        let v = lp.exp();
        probabilities.push(v);
        cumulative += v;
        if cumulative >= NB_MASS_TARGET && jf >= mean {
            for x in &mut probabilities {
                *x /= cumulative;
            }
            return Ok(ExceedancePmf { probabilities, params: PmfParams::NegativeBinomial { r, p } });
        }
    }
    Err(Error::Truncation(format!("negative binomial mass {cumulative} after {NB_MAX_TERMS} terms")))
}

fn check_pot_args(n: u64, n_tilde: u64, alpha: f64) -> Result<()> {
    if n == 0 || n_tilde == 0 {
        return Err(Error::Domain(format!("n and n_tilde must be positive (n={n}, n_tilde={n_tilde})")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

fn psi_from_log_ratio(ln_ratio: f64, n: u64, what: &str) -> Result<f64> {
    if ln_ratio <= 0.0 {
        return Err(Error::QuantileBelowThreshold(format!(
            "the requested quantile lies below the threshold for {what}; use a smaller n_tail"
        )));
    }
    Ok((ln_ratio / n as f64).exp_m1())
}

/// `Ψ = ((n/ñ)(1 + 1/(2n)) / (1 - α))^(1/n) - 1`, giving one expected
/// exceedance of the annual `α` quantile per `1/(1-α)` blocks.
pub fn psi_pot_bayes(n: u64, n_tilde: u64, alpha: f64) -> Result<PsiCoefficient> {
    check_pot_args(n, n_tilde, alpha)?;
    let nf = n as f64;
    let ln_ratio = (nf / n_tilde as f64).ln() + (0.5 / nf).ln_1p() - (-alpha).ln_1p();
    let value = psi_from_log_ratio(ln_ratio, n, &format!("n={n}, n_tilde={n_tilde}, alpha={alpha}"))?;
    Ok(PsiCoefficient { value, method: Method::PotBayes, alpha, n })
}

/// `Ψ_ML = ((n/ñ) N / (1 - α))^(1/n) - 1`.
pub fn psi_pot_ml(n: u64, n_tilde: u64, big_n: u64, alpha: f64) -> Result<PsiCoefficient> {
    check_pot_args(n, n_tilde, alpha)?;
    if big_n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    let ln_ratio = (n as f64 / n_tilde as f64).ln() + (big_n as f64).ln() - (-alpha).ln_1p();
    let value = psi_from_log_ratio(ln_ratio, n, &format!("n={n}, n_tilde={n_tilde}, N={big_n}, alpha={alpha}"))?;
    Ok(PsiCoefficient { value, method: Method::PotMl, alpha, n })
}

/// `u · exp(Ψ Σ ln(x_i/u))`.
pub fn pot_quantile(series: &PotSeries, psi: &PsiCoefficient) -> Result<f64> {
    series.transform().inverse(psi.value * series.summary().sigma)
}

/// Exceedance-count law with the threshold count integrated out:
/// `P(K = k) = Σ_{N_u ≥ k} BEG(k; n, N_u, Ψ) NB(N_u; n + 1/2, ñ/(ñ + N))`.
pub fn unconditional_exceedance_pmf(n: u64, n_tilde: u64, big_n: u64, alpha: f64, psi: f64) -> Result<ExceedancePmf> {
    check_pot_args(n, n_tilde, alpha)?;
    let nf = n as f64;
    if (nf / n_tilde as f64) * (1.0 + 0.5 / nf) <= 1.0 - alpha {
        return Err(Error::QuantileBelowThreshold(format!(
            "alpha={alpha} is below the threshold percentile for n={n}, n_tilde={n_tilde}; use a smaller n_tail"
        )));
    }
    let counts = nu_predictive(n, n_tilde, big_n, PriorParams::JEFFREYS)?;
    let mut probabilities = vec![0.0; counts.len()];
    probabilities[0] += counts.get(0);
    for (nu, &weight) in counts.probabilities.iter().enumerate().skip(1) {
        let beg = beg_pmf(n, nu as u64, psi)?;
        for (k, p) in beg.probabilities.iter().enumerate() {
            probabilities[k] += weight * p;
        }
    }
    while probabilities.len() > 1 && probabilities.last() == Some(&0.0) {
        probabilities.pop();
    }
    Ok(ExceedancePmf { probabilities, params: PmfParams::Unconditional { n, n_tilde, big_n, alpha, psi } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::psi_bayes;

    #[test]
    fn threshold_on_permutation() {
        let pooled = [3.0, 9.0, 1.0, 10.0, 7.0, 2.0, 8.0, 5.0, 6.0, 4.0];
        let sel = select_threshold(&pooled, 3).unwrap();
        assert_eq!(sel.threshold, 7.0);
        assert_eq!(sel.exceedances, vec![10.0, 9.0, 8.0]);
        let sel = select_threshold(&pooled, 9).unwrap();
        assert_eq!(sel.threshold, 1.0);
    }

    #[test]
    fn threshold_errors() {
        assert!(matches!(select_threshold(&[1.0, 2.0], 2), Err(Error::DataSize(_))));
        assert!(matches!(select_threshold(&[1.0, 5.0, 5.0, 5.0], 2), Err(Error::Ties(_))));
        assert!(select_threshold(&[1.0, f64::NAN, 3.0], 1).is_err());
        // ties below the cut are harmless
        assert!(select_threshold(&[1.0, 1.0, 1.0, 4.0, 5.0], 2).is_ok());
    }

    #[test]
    fn nb_mean_identity() {
        let pmf = nu_predictive(50, 50, 100, PriorParams::JEFFREYS).unwrap();
        assert!((pmf.total() - 1.0).abs() < 1e-12);
        assert!((pmf.mean() - 101.0).abs() < 1e-4 * 101.0);
    }

    #[test]
    fn pot_multiplier_examples() {
        let psi = psi_pot_bayes(50, 50, 0.99).unwrap().value;
        // (1.01 / 0.01)^(1/50) - 1
        assert!((psi - 0.09669642).abs() < 1e-8);
        assert!(psi_pot_bayes(50, 100, 0.99).unwrap().value < psi);
        let big = psi_pot_bayes(1_000_000, 1_000_000, 0.99).unwrap().value;
        let plain = psi_bayes(1_000_000, 0.99).unwrap().value;
        assert!(((big - plain) / plain).abs() < 1e-6);

        let ml = psi_pot_ml(50, 50, 100, 0.99).unwrap().value;
        assert!((ml - 0.202264).abs() < 1e-6);
        assert!(matches!(psi_pot_bayes(1, 1000, 0.5), Err(Error::QuantileBelowThreshold(_))));
    }

    #[test]
    fn quantile_scales_with_data() {
        let blocks = |scale: f64| {
            vec![
                Block { id: "a".into(), values: vec![1.0 * scale, 2.0 * scale, 8.0 * scale] },
                Block { id: "b".into(), values: vec![1.5 * scale, 3.0 * scale, 5.0 * scale] },
            ]
        };
        let psi = psi_pot_bayes(3, 2, 0.9).unwrap();
        let one = pot_quantile(&PotSeries::new(blocks(1.0), 3).unwrap(), &psi).unwrap();
        let two = pot_quantile(&PotSeries::new(blocks(2.0), 3).unwrap(), &psi).unwrap();
        assert!((two - 2.0 * one).abs() < 1e-12 * two);
        assert!(one >= 2.0);
    }

    #[test]
    fn log_sum_example() {
        let psi = PsiCoefficient { value: 0.0966957, method: Method::PotBayes, alpha: 0.99, n: 2 };
        let series = PotSeries { blocks: vec![], n_tail: 2, threshold: 1.0, log_exceedances: vec![4.0, 6.0] };
        assert!((pot_quantile(&series, &psi).unwrap() - 2.6300).abs() < 1e-4);
    }

    #[test]
    fn reads_csv_blocks() {
        let text = "block_id,value\n1,0.5\n1,3.0\n2,1.0\n2,9.0\n3,2.0\n";
        let s = PotSeries::from_csv(text.as_bytes(), 2).unwrap();
        assert_eq!(s.n_tilde(), 3);
        assert_eq!(s.block_sizes(), vec![2, 2, 1]);
        assert_eq!(s.threshold, 2.0);
        assert!(PotSeries::from_csv("block_id,value\n1,x\n".as_bytes(), 1).is_err());
        assert!(PotSeries::from_csv("id,value\n1,2\n".as_bytes(), 1).is_err());
    }
}
