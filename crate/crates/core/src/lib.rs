//! Zero-coverage-error quantile estimation for exponential-isomorphic data
//! and Paretian tails.
//!
//! * [`estimators`]: Bayes (Jeffreys prior) and ML quantile multipliers and
//!   the monotone transforms that carry them to Rayleigh, Pareto and other
//!   exponential-isomorphic families.
//! * [`exceedance`]: the exact law of the number of future exceedances over
//!   an estimated quantile, its moments, and the distribution-free
//!   order-statistic comparison law.
//! * [`pot`]: peaks over threshold, with threshold selection, the negative-binomial
//!   predictive for the threshold count, and the corrected multipliers.
//! * [`sim`]: seeded Monte Carlo experiments with tidy CSV/JSON output.

pub mod distributions;
pub mod error;
pub mod estimators;
pub mod exceedance;
pub mod format;
pub mod numeric;
pub mod pot;
pub mod sim;

pub use distributions::{sample, DistributionSpec, RandomStream, Sampler};
pub use error::{Error, Result};
pub use estimators::{
    expected_exceedances, predictive_cdf_bayes, psi_bayes, psi_ml, quantile_estimate, Method, ObservationSummary,
    PsiCoefficient, TransformSpec,
};
pub use exceedance::{beg_moment, beg_pmf, beg_variance, gvs_pmf, ExceedancePmf, PmfParams};
pub use pot::{
    nu_predictive, pot_quantile, psi_pot_bayes, psi_pot_ml, select_threshold, unconditional_exceedance_pmf, PotSeries,
    PriorParams, ThresholdSelection,
};
