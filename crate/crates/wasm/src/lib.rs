//! Browser bindings for the demo page in `www/`.
//!
//! Each export returns a JSON string; errors surface as JS exceptions
//! carrying the library's message. The `*_json` functions are the same
//! computations as plain Rust, for native tests.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use zce_core::pot::Block;
use zce_core::{
    beg_pmf, expected_exceedances, gvs_pmf, pot_quantile, psi_bayes, psi_ml, psi_pot_bayes, sample,
    unconditional_exceedance_pmf, DistributionSpec, ExceedancePmf, PotSeries, RandomStream,
};

type Out = Result<Value, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Drops the far tail so the page does not chart thousands of zero bars.
fn pmf_json(pmf: &ExceedancePmf) -> Value {
    let mut last = pmf.len().saturating_sub(1);
    while last > 0 && pmf.survival(last) < 1e-6 && pmf.get(last) < 1e-6 {
        last -= 1;
    }
    json!({
        "p": pmf.probabilities[..=last].to_vec(),
        "mean": pmf.mean(),
        "variance": pmf.variance(),
        "p_more_than_one": pmf.survival(1),
    })
}

/// Law of the number of exceedances among `big_n` future values.
/// `method` is `bayes`, `ml` or `gvs` (the latter uses the `m`-th largest value).
pub fn exceedance_law_json(method: &str, n: u32, big_n: u32, alpha: f64, m: u32) -> Out {
    let (n, big_n) = (u64::from(n), u64::from(big_n));
    let (pmf, psi) = match method {
        "bayes" | "ml" => {
            let psi = if method == "bayes" { psi_bayes(n, alpha) } else { psi_ml(n, alpha) }.map_err(err)?;
            (beg_pmf(n, big_n, psi.value).map_err(err)?, Some(psi.value))
        }
        "gvs" => (gvs_pmf(n, u64::from(m), big_n).map_err(err)?, None),
        other => return Err(format!("unknown method `{other}`")),
    };
    let mut out = pmf_json(&pmf);
    out["psi"] = json!(psi);
    Ok(out)
}

/// Mean exceedance count against training size for both multipliers.
pub fn coverage_curve_json(alpha: f64, big_n: u32, n_max: u32) -> Out {
    if n_max == 0 || n_max > 100_000 {
        return Err("n_max must be between 1 and 100000".into());
    }
    let mut ns = Vec::new();
    let mut n = 1u64;
    while n <= u64::from(n_max) {
        ns.push(n);
        n = (n + 1).max((n as f64 * 1.15) as u64);
    }
    let mut bayes = Vec::with_capacity(ns.len());
    let mut ml = Vec::with_capacity(ns.len());
    for &n in &ns {
        bayes.push(expected_exceedances(psi_bayes(n, alpha).map_err(err)?.value, n, big_n.into()));
        ml.push(expected_exceedances(psi_ml(n, alpha).map_err(err)?.value, n, big_n.into()));
    }
    Ok(json!({ "n": ns, "bayes": bayes, "ml": ml, "target": f64::from(big_n) * (1.0 - alpha) }))
}

/// Simulates `blocks` blocks of `per_block` standard Pareto values, fits the
/// threshold model with `n_tail` tail values and reports the estimate next to
/// the true value exceeded `big_n (1 - alpha)` times on average in `big_n` blocks.
pub fn pot_explorer_json(seed: u32, xi: f64, blocks: u32, per_block: u32, n_tail: u32, alpha: f64, big_n: u32) -> Out {
    if blocks == 0 || per_block == 0 || u64::from(blocks) * u64::from(per_block) > 2_000_000 {
        return Err("need 1 to 2,000,000 values in total".into());
    }
    let spec = DistributionSpec::StandardPareto { xi, u: 1.0 };
    let mut rng = RandomStream::new(seed.into());
    let data = (0..blocks)
        .map(|b| {
            let values = sample(&spec, per_block as usize, &mut rng)?;
            Ok(Block { id: b.to_string(), values })
        })
        .collect::<zce_core::Result<Vec<_>>>()
        .map_err(err)?;
    let series = PotSeries::new(data, n_tail as usize).map_err(err)?;
    let n_tilde = series.n_tilde() as u64;
    let psi = psi_pot_bayes(n_tail.into(), n_tilde, alpha).map_err(err)?;
    let eta = pot_quantile(&series, &psi).map_err(err)?;
    let truth = spec.survival_quantile((1.0 - alpha) / series.m_bar()).map_err(err)?;
    let pmf = unconditional_exceedance_pmf(n_tail.into(), n_tilde, big_n.into(), alpha, psi.value).map_err(err)?;
    let mut tail: Vec<f64> = series.log_exceedances.iter().map(|l| series.threshold * l.exp()).collect();
    tail.sort_by(|a, b| b.total_cmp(a));
    Ok(json!({
        "threshold": series.threshold,
        "xi_hat": series.tail_index(),
        "psi": psi.value,
        "eta": eta,
        "eta_true": truth,
        "tail": tail,
        "law": pmf_json(&pmf),
    }))
}

fn to_js(out: Out) -> Result<String, JsError> {
    out.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn exceedance_law(method: &str, n: u32, big_n: u32, alpha: f64, m: u32) -> Result<String, JsError> {
    to_js(exceedance_law_json(method, n, big_n, alpha, m))
}

#[wasm_bindgen]
pub fn coverage_curve(alpha: f64, big_n: u32, n_max: u32) -> Result<String, JsError> {
    to_js(coverage_curve_json(alpha, big_n, n_max))
}

#[wasm_bindgen]
pub fn pot_explorer(
    seed: u32,
    xi: f64,
    blocks: u32,
    per_block: u32,
    n_tail: u32,
    alpha: f64,
    big_n: u32,
) -> Result<String, JsError> {
    to_js(pot_explorer_json(seed, xi, blocks, per_block, n_tail, alpha, big_n))
}
