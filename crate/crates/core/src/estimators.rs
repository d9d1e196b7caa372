//! Quantile estimators of the form `h⁻¹(Ψ · Σ h(z_i))`.
//!
//! For exponential data with unknown rate, both the maximum-likelihood and
//! the Jeffreys-prior Bayesian quantile estimates are a multiple Ψ of the
//! sufficient statistic Σ. The Bayesian multiplier makes the expected number
//! of future exceedances exactly `N(1 - α)` for every training size, whatever
//! the true rate. A strictly increasing transform `h` with `h(lower) = 0`
//! carries the same estimators to any family isomorphic to the exponential.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Bayes,
    Ml,
    PotBayes,
    PotMl,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Bayes => "bayes",
            Self::Ml => "ml",
            Self::PotBayes => "pot_bayes",
            Self::PotMl => "pot_ml",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bayes" => Ok(Self::Bayes),
            "ml" | "mle" => Ok(Self::Ml),
            "pot_bayes" => Ok(Self::PotBayes),
            "pot_ml" => Ok(Self::PotMl),
            other => Err(Error::Parse(format!("unknown method `{other}` (expected bayes or ml)"))),
        }
    }
}

/// Sufficient statistics of a transformed training sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservationSummary {
    pub n: u64,
    /// Σ h(z_i)
    pub sigma: f64,
}

impl ObservationSummary {
    pub fn new(n: u64, sigma: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::DataSize("summary needs at least one observation".into()));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::Domain(format!("sum of transformed observations must be finite and >= 0, got {sigma}")));
        }
        Ok(Self { n, sigma })
    }

    /// Applies `transform` to each value and sums.
    pub fn from_values(transform: &TransformSpec, values: &[f64]) -> Result<Self> {
        let mapped = values.iter().map(|&z| transform.forward(z)).collect::<Result<Vec<_>>>()?;
        Self::new(values.len() as u64, pairwise_sum(&mapped))
    }
}

/// The multiplier Ψ of a quantile estimate `h⁻¹(Ψ Σ)`, with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiCoefficient {
    pub value: f64,
    pub method: Method,
    pub alpha: f64,
    pub n: u64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::Domain("training size n must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `Ψ_ML = -ln(1 - α) / n`.
pub fn psi_ml(n: u64, alpha: f64) -> Result<PsiCoefficient> {
    check_alpha(alpha)?;
    check_n(n)?;
    Ok(PsiCoefficient { value: -(-alpha).ln_1p() / n as f64, method: Method::Ml, alpha, n })
}

/// `Ψ_Bayes = (1 - α)^(-1/n) - 1`, evaluated as `expm1(-ln(1 - α)/n)`.
pub fn psi_bayes(n: u64, alpha: f64) -> Result<PsiCoefficient> {
    check_alpha(alpha)?;
    check_n(n)?;
    let value = (-(-alpha).ln_1p() / n as f64).exp_m1();
    Ok(PsiCoefficient { value, method: Method::Bayes, alpha, n })
}

/// `h⁻¹(Ψ Σ)`.
pub fn quantile_estimate(summary: &ObservationSummary, psi: &PsiCoefficient, transform: &TransformSpec) -> Result<f64> {
    if summary.sigma == 0.0 && matches!(transform, TransformSpec::Identity) {
        return Err(Error::DegenerateSummary("all observations are zero".into()));
    }
    transform.inverse(psi.value * summary.sigma)
}

/// Lomax predictive cdf `1 - (1 + y/Σ)^(-n)` of a future exponential value.
pub fn predictive_cdf_bayes(y: f64, summary: &ObservationSummary) -> Result<f64> {
    if summary.sigma <= 0.0 {
        return Err(Error::DegenerateSummary("predictive cdf needs a positive sum".into()));
    }
    if y.is_nan() || y < 0.0 {
        return Err(Error::Domain(format!("y must be nonnegative, got {y}")));
    }
    Ok(-(-(summary.n as f64) * (y / summary.sigma).ln_1p()).exp_m1())
}

/// Expected number of exceedances among `big_n` future values of an estimate
/// `Ψ Σ` built from `n` training values: `N (Ψ + 1)^(-n)`. Independent of
/// the exponential rate. `psi` must be nonnegative.
pub fn expected_exceedances(psi: f64, n: u64, big_n: u64) -> f64 {
    big_n as f64 * (-(n as f64) * psi.ln_1p()).exp()
}

/// Monotone map `h` from a family onto the standard exponential scale.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransformSpec {
    #[default]
    Identity,
    /// `h(z) = z²`, for Rayleigh data.
    Square,
    /// `h(z) = ln(z/u)`, for standard Pareto data above `u`.
    LogRatio { u: f64 },
    /// `h(z) = -ln(1 - F(z))` for a fully specified base cdf `F`.
    NegLogSurvival { base: DistributionSpec },
}

impl TransformSpec {
    /// Lower end of the support, where `h` vanishes.
    pub fn lower_endpoint(&self) -> f64 {
        match self {
            Self::Identity | Self::Square => 0.0,
            Self::LogRatio { u } => *u,
            Self::NegLogSurvival { base } => base.support().0,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::LogRatio { u } if !(u.is_finite() && *u > 0.0) => {
                Err(Error::ParameterDomain(format!("log-ratio threshold must be positive, got {u}")))
            }
            Self::NegLogSurvival { base } => base.validate(),
            _ => Ok(()),
        }
    }

    pub fn forward(&self, z: f64) -> Result<f64> {
        self.validate()?;
        let lower = self.lower_endpoint();
        if z.is_nan() || z < lower {
            return Err(Error::Domain(format!("value {z} is below the support lower endpoint {lower}")));
        }
        Ok(match self {
            Self::Identity => z,
            Self::Square => z * z,
            Self::LogRatio { u } => (z / u).ln(),
            Self::NegLogSurvival { base } => -base.sf_unchecked(z).ln(),
        })
    }

    pub fn inverse(&self, x: f64) -> Result<f64> {
        self.validate()?;
        if x.is_nan() || x < 0.0 {
            return Err(Error::Domain(format!("transformed value must be nonnegative, got {x}")));
        }
        match self {
            Self::Identity => Ok(x),
            Self::Square => Ok(x.sqrt()),
            Self::LogRatio { u } => Ok(u * x.exp()),
            Self::NegLogSurvival { base } => base.survival_quantile((-x).exp()),
        }
    }
}

impl fmt::Display for TransformSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Identity => f.write_str("identity"),
            Self::Square => f.write_str("square"),
            Self::LogRatio { u } => write!(f, "logratio:{u}"),
            Self::NegLogSurvival { base } => write!(f, "neglogsf:{base}"),
        }
    }
}

impl FromStr for TransformSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let t = match (head.to_ascii_lowercase().as_str(), arg) {
            ("identity", None) => Self::Identity,
            ("square", None) => Self::Square,
            ("logratio", Some(u)) => Self::LogRatio {
                u: u.trim().parse().map_err(|_| Error::Parse(format!("bad log-ratio threshold `{u}`")))?,
            },
            ("neglogsf", Some(spec)) => Self::NegLogSurvival { base: spec.parse()? },
            _ => {
                return Err(Error::Parse(format!(
                    "unknown transform `{s}` (expected identity, square, logratio:<u> or neglogsf:<distribution>)"
                )))
            }
        };
        t.validate()?;
        Ok(t)
    }
}
