use crate::distributions::{RandomStream, Sampler};
use crate::error::Result;
use crate::estimators::{expected_exceedances, psi_bayes, psi_ml, TransformSpec};
use crate::exceedance::{beg_pmf, gvs_pmf};
use crate::pot::{psi_pot_bayes, psi_pot_ml, top_in_place, unconditional_exceedance_pmf, PriorParams};

use super::stats::{finish, Accumulator, CellSpec};
use super::{Estimator, ExperimentConfig, ExperimentKind, ExperimentResult, PotDesign, RatePrior};

/// Replications per unit of parallel work.
const CHUNK: u64 = 250;

/// Everything a replication needs, shared read-only across workers.
struct Plan {
    sizes: Vec<u64>,
    n_max: usize,
    pot: Option<PotDesign>,
    horizon: u64,
    gvs_m: u64,
    transform: TransformSpec,
    rate_prior: Option<RatePrior>,
    cells: Vec<PlannedCell>,
    specs: Vec<CellSpec>,
    seed: u64,
}

#[derive(Debug, Clone, Copy)]
struct PlannedCell {
    size_index: usize,
    estimator: Estimator,
    psi: f64,
    /// Multiplier of the interval's upper end, or `None` for a plain exceedance count.
    upper_psi: Option<f64>,
}

fn multiplier(cfg: &ExperimentConfig, estimator: Estimator, n: u64, alpha: f64) -> Result<f64> {
    Ok(match (cfg.pot(), estimator) {
        (None, Estimator::Bayes) => psi_bayes(n, alpha)?.value,
        (None, Estimator::Ml) => psi_ml(n, alpha)?.value,
        (Some(pot), Estimator::Bayes) => psi_pot_bayes(n, pot.n_tilde, alpha)?.value,
        (Some(pot), Estimator::Ml) => psi_pot_ml(n, pot.n_tilde, cfg.horizon, alpha)?.value,
        (_, Estimator::Gvs) => f64::NAN,
    })
}

/// Model mean count above `Ψ`: `N(1+Ψ)^-n`, with `N` replaced by the
/// predictive mean threshold count `(n + 1/2)N/ñ` in threshold runs.
fn model_mean(cfg: &ExperimentConfig, n: u64, psi: f64) -> f64 {
    match cfg.pot() {
        None => expected_exceedances(psi, n, cfg.horizon),
        Some(pot) => {
            let scale = (n as f64 + PriorParams::JEFFREYS.a) / pot.n_tilde as f64;
            scale * expected_exceedances(psi, n, cfg.horizon)
        }
    }
}

fn wants_theory(kind: ExperimentKind) -> bool {
    matches!(kind, ExperimentKind::BegComparison | ExperimentKind::DistributionTable | ExperimentKind::SasSweep)
}

fn plan(cfg: &ExperimentConfig) -> Result<Plan> {
    let mut cells = Vec::new();
    let mut specs = Vec::new();
    let pot = cfg.pot();
    for (size_index, &n) in cfg.n.iter().enumerate() {
        for &estimator in &cfg.estimators {
            if estimator == Estimator::Gvs {
                let m = cfg.gvs_m;
                let theory = wants_theory(cfg.kind).then(|| gvs_pmf(n, m, cfg.horizon)).transpose()?;
                cells.push(PlannedCell { size_index, estimator, psi: f64::NAN, upper_psi: None });
                specs.push(CellSpec {
                    n,
                    estimator,
                    alpha: None,
                    psi: None,
                    analytic_mean: Some(cfg.horizon as f64 * m as f64 / (n as f64 + 1.0)),
                    theory: theory.map(|p| p.probabilities),
                    beg: None,
                    pot: false,
                });
                continue;
            }
            for &alpha in &cfg.alpha {
                let psi = multiplier(cfg, estimator, n, alpha)?;
                let upper = match cfg.interval_width {
                    Some(w) if alpha + w < 1.0 - 1e-9 => Some(multiplier(cfg, estimator, n, alpha + w)?),
                    _ => None,
                };
                let mut analytic = model_mean(cfg, n, psi);
                if let Some(hi) = upper {
                    analytic -= model_mean(cfg, n, hi);
                }
                let (theory, beg) = if wants_theory(cfg.kind) {
                    match pot {
                        None => (Some(beg_pmf(n, cfg.horizon, psi)?.probabilities), None),
                        Some(p) => {
                            let full = unconditional_exceedance_pmf(n, p.n_tilde, cfg.horizon, alpha, psi)?;
                            let fixed = ((cfg.horizon * n) as f64 / p.n_tilde as f64).round().max(1.0) as u64;
                            (Some(full.probabilities), Some(beg_pmf(n, fixed, psi)?.probabilities))
                        }
                    }
                } else {
                    (None, None)
                };
                cells.push(PlannedCell { size_index, estimator, psi, upper_psi: upper });
                specs.push(CellSpec {
                    n,
                    estimator,
                    alpha: Some(alpha),
                    psi: Some(psi),
                    analytic_mean: Some(analytic),
                    theory,
                    beg,
                    pot: pot.is_some(),
                });
            }
        }
    }
    Ok(Plan {
        sizes: cfg.n.clone(),
        n_max: *cfg.n.iter().max().expect("validated") as usize,
        pot,
        horizon: cfg.horizon,
        gvs_m: cfg.gvs_m,
        transform: cfg.transform,
        rate_prior: cfg.rate_prior,
        cells,
        specs,
        seed: cfg.resolved_seed(),
    })
}

/// Scratch buffers reused across the replications of one chunk.
#[derive(Default)]
struct Workspace {
    train: Vec<f64>,
    test: Vec<f64>,
    tail: Vec<f64>,
    scratch: Vec<f64>,
    /// Per size: Σ of transformed values, and the threshold (threshold runs).
    sigma: Vec<f64>,
    threshold: Vec<f64>,
    eta: Vec<f64>,
    upper: Vec<f64>,
}

fn replicate(
    plan: &Plan,
    sampler: &Sampler,
    group: u64,
    rep: u64,
    ws: &mut Workspace,
    accs: &mut [Accumulator],
) -> Result<()> {
    let mut rng = RandomStream::split(plan.seed, (group << 40) | rep);
    let scale = plan.rate_prior.map(|p| 1.0 / p.draw(&mut rng));
    let (train_len, test_len) = match plan.pot {
        Some(p) => ((p.n_tilde * p.m_bar) as usize, (plan.horizon * p.m_bar) as usize),
        None => (plan.n_max, plan.horizon as usize),
    };
    ws.train.resize(train_len, 0.0);
    ws.test.resize(test_len, 0.0);
    sampler.fill(&mut rng, &mut ws.train);
    sampler.fill(&mut rng, &mut ws.test);
    if let Some(s) = scale {
        ws.train.iter_mut().chain(ws.test.iter_mut()).for_each(|x| *x *= s);
    }

    ws.sigma.clear();
    ws.threshold.clear();
    match plan.pot {
        Some(_) => {
            let top = top_in_place(&mut ws.train, plan.n_max + 1);
            for &n in &plan.sizes {
                let n = n as usize;
                let u = top[n];
                ws.sigma.push(top[..n].iter().map(|x| (x / u).ln()).sum());
                ws.threshold.push(u);
            }
        }
        None => {
            let mut acc = 0.0;
            let mut done = 0;
            for &n in &plan.sizes {
                // sizes need not be sorted; recompute from scratch when they shrink
                if (n as usize) < done {
                    acc = 0.0;
                    done = 0;
                }
                for &x in &ws.train[done..n as usize] {
                    acc += plan.transform.forward(x)?;
                }
                done = n as usize;
                ws.sigma.push(acc);
            }
        }
    }

    ws.eta.clear();
    ws.upper.clear();
    for cell in &plan.cells {
        let sigma = ws.sigma[cell.size_index];
        let to_eta = |psi: f64| -> Result<f64> {
            match plan.pot {
                Some(_) => Ok(ws.threshold[cell.size_index] * (psi * sigma).exp()),
                None => plan.transform.inverse(psi * sigma),
            }
        };
        let eta = match cell.estimator {
            Estimator::Gvs => {
                let n = plan.sizes[cell.size_index] as usize;
                ws.scratch.clear();
                ws.scratch.extend_from_slice(&ws.train[..n]);
                top_in_place(&mut ws.scratch, plan.gvs_m as usize)[plan.gvs_m as usize - 1]
            }
            _ => to_eta(cell.psi)?,
        };
        ws.eta.push(eta);
        ws.upper.push(match cell.upper_psi {
            Some(p) => to_eta(p)?,
            None => f64::INFINITY,
        });
    }

    let floor = ws.eta.iter().copied().fold(f64::INFINITY, f64::min);
    ws.tail.clear();
    ws.tail.extend(ws.test.iter().copied().filter(|&y| y > floor));
    for (c, cell) in plan.cells.iter().enumerate() {
        let (lo, hi) = (ws.eta[c], ws.upper[c]);
        let k = ws.tail.iter().filter(|&&y| y > lo && y <= hi).count() as u64;
        let xi = match plan.pot {
            Some(_) => ws.sigma[cell.size_index] / plan.sizes[cell.size_index] as f64,
            None => f64::NAN,
        };
        accs[c].push(k, if xi.is_nan() { 0.0 } else { xi }, lo);
    }
    Ok(())
}

fn run_chunk(plan: &Plan, sampler: &Sampler, group: u64, start: u64, end: u64) -> Result<Vec<Accumulator>> {
    let mut ws = Workspace::default();
    let mut accs = vec![Accumulator::default(); plan.cells.len()];
    for rep in start..end {
        replicate(plan, sampler, group, rep, &mut ws, &mut accs)?;
    }
    Ok(accs)
}

/// Pairwise merge in index order.
fn tree_merge(mut parts: Vec<Vec<Accumulator>>) -> Vec<Accumulator> {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a.into_iter().zip(&b).map(|(x, y)| x.merge(y)).collect()),
                None => next.push(a),
            }
        }
        parts = next;
    }
    parts.pop().unwrap_or_default()
}

fn run_group(plan: &Plan, sampler: &Sampler, group: u64, reps: u64) -> Result<Vec<Accumulator>> {
    let bounds: Vec<(u64, u64)> = (0..reps.div_ceil(CHUNK)).map(|i| (i * CHUNK, ((i + 1) * CHUNK).min(reps))).collect();
    #[cfg(feature = "parallel")]
    let parts: Result<Vec<_>> = {
        use rayon::prelude::*;
        bounds.par_iter().map(|&(s, e)| run_chunk(plan, sampler, group, s, e)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Result<Vec<_>> = bounds.iter().map(|&(s, e)| run_chunk(plan, sampler, group, s, e)).collect();
    Ok(tree_merge(parts?))
}

pub(super) fn execute(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let plan = plan(cfg)?;
    let mut cells = Vec::new();
    for (group, data) in cfg.datasets().into_iter().enumerate() {
        let sampler = data.sampler()?;
        let accs = run_group(&plan, &sampler, group as u64, cfg.replications)?;
        cells.extend(plan.specs.iter().zip(&accs).map(|(spec, acc)| finish(spec, data, cfg.horizon, acc)));
    }
    Ok(ExperimentResult {
        name: cfg.name.clone(),
        kind: cfg.kind,
        seed: plan.seed,
        replications: cfg.replications,
        git_describe: env!("ZCE_GIT_DESCRIBE").to_string(),
        config: cfg.clone(),
        cells,
    })
}
