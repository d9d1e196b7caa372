use proptest::prelude::*;
use statrs::function::gamma::ln_gamma;

use zce_core::{
    beg_pmf, expected_exceedances, gvs_pmf, nu_predictive, psi_bayes, psi_ml, psi_pot_bayes,
    unconditional_exceedance_pmf, DistributionSpec, PriorParams, TransformSpec,
};

fn spec_strategy() -> impl Strategy<Value = DistributionSpec> {
    let pos = 0.05f64..20.0;
    prop_oneof![
        pos.clone().prop_map(|rate| DistributionSpec::Exponential { rate }),
        pos.clone().prop_map(|sigma| DistributionSpec::Rayleigh { sigma }),
        (0.01f64..2.0, pos.clone()).prop_map(|(xi, u)| DistributionSpec::StandardPareto { xi, u }),
        (0.01f64..1.0, -5.0f64..5.0, pos.clone()).prop_map(|(xi, mu, beta)| DistributionSpec::Gev { xi, mu, beta }),
        (-3.0f64..3.0, pos.clone()).prop_map(|(mu, sigma)| DistributionSpec::LogNormal { mu, sigma }),
        (0.5f64..50.0).prop_map(|nu| DistributionSpec::StudentT { nu }),
        (1.01f64..2.0).prop_map(|alpha| DistributionSpec::StableSas { alpha }),
    ]
}

proptest! {
    #[test]
    fn distribution_text_round_trips(spec in spec_strategy()) {
        let back: DistributionSpec = spec.to_string().parse().unwrap();
        prop_assert_eq!(back, spec);
    }

    #[test]
    fn transform_inverse_undoes_forward(z in 0.0f64..50.0, u in 0.1f64..5.0) {
        for t in [TransformSpec::Identity, TransformSpec::Square] {
            let back = t.inverse(t.forward(z).unwrap()).unwrap();
            prop_assert!((back - z).abs() <= 1e-12 * z.max(1.0));
        }
        let t = TransformSpec::LogRatio { u };
        let z = u + z;
        let back = t.inverse(t.forward(z).unwrap()).unwrap();
        prop_assert!((back - z).abs() <= 1e-12 * z);
    }

    #[test]
    fn bayes_mean_count_is_exact(n in 1u64..5000, alpha in 0.5f64..0.9999, big_n in 1u64..10_000) {
        let psi = psi_bayes(n, alpha).unwrap().value;
        let target = big_n as f64 * (1.0 - alpha);
        prop_assert!((expected_exceedances(psi, n, big_n) / target - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bayes_multiplier_exceeds_ml(n in 1u64..100_000, alpha in 0.01f64..0.99999) {
        let b = psi_bayes(n, alpha).unwrap().value;
        let m = psi_ml(n, alpha).unwrap().value;
        prop_assert!(b > m && m > 0.0);
    }

    #[test]
    fn exceedance_laws_are_normalized(n in 1u64..300, big_n in 1u64..300, alpha in 0.5f64..0.999, m in 1u64..5) {
        let psi = psi_bayes(n, alpha).unwrap().value;
        let pmf = beg_pmf(n, big_n, psi).unwrap();
        prop_assert!((pmf.total() - 1.0).abs() < 1e-9);
        prop_assert!(pmf.probabilities.iter().all(|&p| p >= 0.0));
        let m = m.min(n);
        let pmf = gvs_pmf(n, m, big_n).unwrap();
        prop_assert!((pmf.total() - 1.0).abs() < 1e-9);
        prop_assert!((pmf.mean() - big_n as f64 * m as f64 / (n + 1) as f64).abs() < 1e-8 * big_n as f64);
    }
}

/// `NB(k; r, p) = Γ(k + r) / (Γ(r) k!) p^r (1 - p)^k`.
fn nb(k: u64, r: f64, p: f64) -> f64 {
    let tail = if k == 0 { 0.0 } else { k as f64 * (1.0 - p).ln() };
    let k = k as f64;
    (ln_gamma(k + r) - ln_gamma(r) - ln_gamma(k + 1.0) + r * p.ln() + tail).exp()
}

/// Thinning oracle. Given the training sum on the standard scale `G ~ Gamma(n, 1)`,
/// each future tail value exceeds the estimate with probability `exp(-ψ G)`, and a
/// negative binomial count thinned by `q` is negative binomial with
/// `p' = p / (p + (1 - p) q)`. Integrate over `G` with a fine midpoint rule.
fn thinned_oracle(n: u64, n_tilde: u64, big_n: u64, psi: f64, k: u64) -> f64 {
    let r = n as f64 + 0.5;
    let p = n_tilde as f64 / (n_tilde + big_n) as f64;
    let nf = n as f64;
    let hi = nf + 60.0 * nf.sqrt() + 60.0;
    let steps = 200_000;
    let h = hi / steps as f64;
    (0..steps)
        .map(|i| {
            let g = (i as f64 + 0.5) * h;
            let density = ((nf - 1.0) * g.ln() - g - ln_gamma(nf)).exp();
            let q = (-psi * g).exp();
            density * nb(k, r, p / (p + (1.0 - p) * q))
        })
        .sum::<f64>()
        * h
}

#[test]
fn unconditional_law_matches_thinned_negative_binomial() {
    for (n, n_tilde, big_n) in [(5, 50, 100), (25, 50, 100), (50, 50, 100), (10, 20, 40)] {
        let psi = psi_pot_bayes(n, n_tilde, 0.99).unwrap().value;
        let pmf = unconditional_exceedance_pmf(n, n_tilde, big_n, 0.99, psi).unwrap();
        for k in 0..8 {
            let oracle = thinned_oracle(n, n_tilde, big_n, psi, k);
            assert!(
                (pmf.get(k as usize) - oracle).abs() < 1e-7,
                "n={n} ñ={n_tilde} N={big_n} k={k}: {} vs {oracle}",
                pmf.get(k as usize)
            );
        }
    }
}

#[test]
fn corrected_threshold_multiplier_gives_target_mean() {
    for (n, n_tilde, big_n) in [(5, 50, 100), (50, 50, 100), (25, 200, 1000)] {
        let psi = psi_pot_bayes(n, n_tilde, 0.99).unwrap().value;
        let pmf = unconditional_exceedance_pmf(n, n_tilde, big_n, 0.99, psi).unwrap();
        let target = big_n as f64 * 0.01;
        assert!((pmf.mean() / target - 1.0).abs() < 1e-6, "{} vs {target}", pmf.mean());
    }
}

#[test]
fn threshold_count_predictive_moments() {
    let law = nu_predictive(50, 50, 100, PriorParams::JEFFREYS).unwrap();
    // mean r(1-p)/p and variance r(1-p)/p² with r = 50.5, p = 1/3
    assert!((law.mean() - 101.0).abs() < 1e-6);
    assert!((law.variance() - 303.0).abs() < 1e-4);
}
