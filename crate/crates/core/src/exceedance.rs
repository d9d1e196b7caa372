//! Distribution of the number of future exceedances over an estimated quantile.
//!
//! Conditioned on the rate and the training sum, the count of `N` future
//! values above `Ψ Σ` is binomial with success probability `exp(-λΨΣ)`.
//! Because `λΣ ~ Gamma(n, 1)` whatever `λ` is, marginalising gives a law that
//! depends only on `(n, N, Ψ)`:
//!
//! ```text
//! P(K = k) = C(N,k) Σ_{i=0}^{N-k} (-1)^i C(N-k,i) (1 + (k+i)Ψ)^(-n)
//!          = C(N,k) E[p^k (1-p)^(N-k)],   p = exp(-Ψ G),  G ~ Gamma(n, 1)
//! ```
//!
//! The alternating form is evaluated in double-double arithmetic while
//! `N - k` is small; otherwise (or if the cancellation still eats the
//! available digits) the expectation is integrated numerically.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};
use crate::numeric::dd::DoubleDouble;
use crate::numeric::{binomial, falling_power, ln_binomial, ln_gamma, quadrature, stirling2_row};

/// Largest `N - k` evaluated by the alternating sum.
pub const ALTERNATING_MAX_SPAN: u64 = 40;

/// Absolute error accepted from the alternating sum before falling back.
const ALTERNATING_ABS_TOL: f64 = 1e-15;

const MAX_MOMENT_ORDER: u32 = 8;

/// Which law a pmf vector describes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum PmfParams {
    Beg { n: u64, big_n: u64, psi: f64 },
    Gvs { n: u64, m: u64, big_n: u64 },
    NegativeBinomial { r: f64, p: f64 },
    Unconditional { n: u64, n_tilde: u64, big_n: u64, alpha: f64, psi: f64 },
}

/// A finite pmf over counts `k = 0..len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceedancePmf {
    pub probabilities: Vec<f64>,
    pub params: PmfParams,
}

impl ExceedancePmf {
    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn get(&self, k: usize) -> f64 {
        self.probabilities.get(k).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// Raw moment `E[K^order]` computed from the vector.
    pub fn moment(&self, order: u32) -> f64 {
        self.probabilities.iter().enumerate().map(|(k, p)| p * (k as f64).powi(order as i32)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.probabilities.iter().enumerate().map(|(k, p)| p * (k as f64 - m).powi(2)).sum()
    }

    /// `P(K > k)`.
    pub fn survival(&self, k: usize) -> f64 {
        self.probabilities.iter().skip(k + 1).sum()
    }

    pub fn total_variation(&self, other: &[f64]) -> f64 {
        total_variation(&self.probabilities, other)
    }

    fn metadata(&self) -> String {
        let mut s = String::from("#");
        match self.params {
            PmfParams::Beg { n, big_n, psi } => write!(s, " law=beg n={n} N={big_n} psi={psi}"),
            PmfParams::Gvs { n, m, big_n } => write!(s, " law=gvs n={n} m={m} N={big_n}"),
            PmfParams::NegativeBinomial { r, p } => write!(s, " law=negative_binomial r={r} p={p}"),
            PmfParams::Unconditional { n, n_tilde, big_n, alpha, psi } => {
                write!(s, " law=unconditional n={n} n_tilde={n_tilde} N={big_n} alpha={alpha} psi={psi}")
            }
        }
        .expect("write to string");
        write!(s, " mean={} variance={}", self.mean(), self.variance()).expect("write to string");
        s
    }

    /// CSV with header `k,probability`, one row per count, then a `#` line
    /// carrying the parameters, mean and variance.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "k,probability")?;
        for (k, p) in self.probabilities.iter().enumerate() {
            writeln!(out, "{k},{p:?}")?;
        }
        writeln!(out, "{}", self.metadata())?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("ascii csv")
    }
}

/// Half the L1 distance between two pmf vectors, padding the shorter with zeros.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    let len = a.len().max(b.len());
    0.5 * (0..len).map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs()).sum::<f64>()
}

fn check_beg_args(n: u64, big_n: u64, psi: f64) -> Result<()> {
    if n == 0 || big_n == 0 {
        return Err(Error::Domain(format!("n and N must be at least 1 (n={n}, N={big_n})")));
    }
    if !(psi.is_finite() && psi > 0.0) {
        return Err(Error::Domain(format!("psi must be positive and finite, got {psi}")));
    }
    Ok(())
}

/// The exceedance-count law for training size `n`, horizon `big_n` and multiplier `psi`.
pub fn beg_pmf(n: u64, big_n: u64, psi: f64) -> Result<ExceedancePmf> {
    check_beg_args(n, big_n, psi)?;
    let mut probabilities = vec![0.0; big_n as usize + 1];
    let mut pending = Vec::new();
    for k in 0..=big_n {
        match paths::alternating(n, big_n, psi, k) {
            Some(p) => probabilities[k as usize] = p,
            None => pending.push(k),
        }
    }
    if !pending.is_empty() {
        let values = paths::quadrature(n, big_n, psi, &pending);
        for (k, v) in pending.into_iter().zip(values) {
            probabilities[k as usize] = v;
        }
    }
    for p in &mut probabilities {
        *p = p.clamp(0.0, 1.0);
    }
    Ok(ExceedancePmf { probabilities, params: PmfParams::Beg { n, big_n, psi } })
}

/// The two evaluation routes of [`beg_pmf`], exposed for cross-checking.
pub mod paths {
    use super::*;

    /// Alternating-sum value of `P(K = k)`, or `None` when `N - k` exceeds
    /// [`ALTERNATING_MAX_SPAN`] or the cancellation error bound is too large.
    pub fn alternating(n: u64, big_n: u64, psi: f64, k: u64) -> Option<f64> {
        let span = big_n - k;
        if span > ALTERNATING_MAX_SPAN {
            return None;
        }
        let mut acc = DoubleDouble::ZERO;
        let mut magnitude = 0.0;
        for i in 0..=span {
            let base = DoubleDouble::from_product(psi, (k + i) as f64) + DoubleDouble::ONE;
            let term = base.powu(n).recip() * DoubleDouble::new(binomial(span, i));
            magnitude += term.to_f64();
            acc = if i % 2 == 0 { acc + term } else { acc - term };
        }
        let ln_choose = ln_binomial(big_n, k);
        // rounding of ~(n.log2 + span) double-double operations, each ≲ 2^-104
        let err = (ln_choose + magnitude.ln()).exp() * 1e-29 * (64 - n.leading_zeros() + 2) as f64;
        if err > ALTERNATING_ABS_TOL {
            return None;
        }
        let sum = acc.to_f64();
        if sum <= 0.0 {
            return Some(0.0);
        }
        Some((ln_choose + sum.ln()).exp())
    }

    /// Quadrature value of `P(K = k)` for each `k` in `ks`, integrating the
    /// binomial probability against the Gamma(n, 1) density of `λΣ`.
    pub fn quadrature(n: u64, big_n: u64, psi: f64, ks: &[u64]) -> Vec<f64> {
        let nf = n as f64;
        let ln_norm = ln_gamma(nf);
        let ln_choose: Vec<f64> = ks.iter().map(|&k| ln_binomial(big_n, k)).collect();
        let upper = gamma_upper_cut(nf);
        let integrand = |g: f64, out: &mut [f64]| {
            let ln_p = -psi * g;
            let ln_q = (-(-psi * g).exp_m1()).ln();
            let ln_density = if n == 1 { -g } else { (nf - 1.0) * g.ln() - g } - ln_norm;
            for ((o, &k), lc) in out.iter_mut().zip(ks).zip(&ln_choose) {
                let kf = k as f64;
                let e = lc + kf * ln_p + (big_n - k) as f64 * ln_q + ln_density;
                *o = if e > -745.0 { e.exp() } else { 0.0 };
            }
        };
        quadrature::integrate_vec(integrand, ks.len(), 0.0, upper, &[(nf - 1.0).max(0.0)], 64, 1e-14)
    }

    /// A point beyond which Gamma(n, 1) has less than 1e-13 mass.
    fn gamma_upper_cut(n: f64) -> f64 {
        let mut g = n + 10.0 * n.sqrt() + 30.0;
        while gamma_ur(n, g) > 1e-13 {
            g *= 1.25;
        }
        g
    }
}

/// `E[K^order] = Σ_i S(order, i) N^(i falling) (iΨ + 1)^(-n)` for `order` in 1..=8.
pub fn beg_moment(order: u32, n: u64, big_n: u64, psi: f64) -> Result<f64> {
    check_beg_args(n, big_n, psi)?;
    if order == 0 || order > MAX_MOMENT_ORDER {
        return Err(Error::Domain(format!("moment order must lie in 1..={MAX_MOMENT_ORDER}, got {order}")));
    }
    let stirling = stirling2_row(order as usize);
    Ok((1..=order as usize)
        .map(|i| stirling[i] * falling_power(big_n, i) * (-(n as f64) * (i as f64 * psi).ln_1p()).exp())
        .sum())
}

/// `Var[K] = E[K](1 - E[K]) + N(N-1)(2Ψ + 1)^(-n)`.
pub fn beg_variance(n: u64, big_n: u64, psi: f64) -> Result<f64> {
    check_beg_args(n, big_n, psi)?;
    let nf = n as f64;
    let mean = big_n as f64 * (-nf * psi.ln_1p()).exp();
    let pair = big_n as f64 * (big_n as f64 - 1.0) * (-nf * (2.0 * psi).ln_1p()).exp();
    Ok((mean * (1.0 - mean) + pair).max(0.0))
}

/// Distribution-free law of the number of `big_n` future values exceeding the
/// `m`-th largest of `n` past values:
/// `P(K = k) = C(m+k-1, k) C(n-m+N-k, N-k) / C(n+N, N)`.
pub fn gvs_pmf(n: u64, m: u64, big_n: u64) -> Result<ExceedancePmf> {
    if n == 0 || big_n == 0 {
        return Err(Error::Domain(format!("n and N must be at least 1 (n={n}, N={big_n})")));
    }
    if m == 0 || m > n {
        return Err(Error::Domain(format!("order-statistic rank m must lie in 1..={n}, got {m}")));
    }
    // P(0) = prod_{j=1..N} (n-m+j)/(n+j); then the ratio recurrence in k.
    let ln_p0: f64 = (1..=big_n).map(|j| ((n - m + j) as f64).ln() - ((n + j) as f64).ln()).sum();
    let mut probabilities = Vec::with_capacity(big_n as usize + 1);
    let mut p = ln_p0.exp();
    probabilities.push(p);
    for k in 0..big_n {
        p *= (m + k) as f64 / (k + 1) as f64 * (big_n - k) as f64 / (n - m + big_n - k) as f64;
        probabilities.push(p);
    }
    Ok(ExceedancePmf { probabilities, params: PmfParams::Gvs { n, m, big_n } })
}
