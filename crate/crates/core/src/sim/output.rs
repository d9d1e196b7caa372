use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};

use super::{ExperimentConfig, ExperimentResult};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    experiment: Vec<ExperimentConfig>,
}

/// Parses `[[experiment]]` tables of `key = value` pairs.
///
/// ```toml
/// [[experiment]]
/// name = "pareto_tail"
/// kind = "beg_comparison"
/// data = ["stdpar(xi=0.3,u=1)"]
/// n = [50]
/// n_tilde = 50
/// m_bar = 100
/// horizon = 100
/// alpha = [0.99]
/// replications = 10000
/// ```
pub fn parse_config(text: &str) -> Result<Vec<ExperimentConfig>> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    for cfg in &file.experiment {
        cfg.validate()?;
    }
    Ok(file.experiment)
}

pub fn load_config(path: &Path) -> Result<Vec<ExperimentConfig>> {
    parse_config(&fs::read_to_string(path)?)
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl ExperimentResult {
    /// One row per cell.
    pub fn cells_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "experiment",
            "kind",
            "data",
            "n",
            "estimator",
            "alpha",
            "horizon",
            "replications",
            "psi",
            "mean",
            "se_mean",
            "sd",
            "se_sd",
            "p_gt1",
            "se_p_gt1",
            "xi_mean",
            "xi_sd",
            "se_xi_mean",
            "eta_mean",
            "se_eta_mean",
            "analytic_mean",
            "tv_theory",
            "tv_beg",
        ])?;
        for c in &self.cells {
            w.write_record([
                self.name.clone(),
                self.kind.to_string(),
                c.data.to_string(),
                c.n.to_string(),
                c.estimator.to_string(),
                opt(c.alpha),
                c.horizon.to_string(),
                c.replications.to_string(),
                opt(c.psi),
                c.mean.to_string(),
                c.se_mean.to_string(),
                c.sd.to_string(),
                c.se_sd.to_string(),
                c.p_gt1.to_string(),
                c.se_p_gt1.to_string(),
                opt(c.xi_mean),
                opt(c.xi_sd),
                opt(c.se_xi_mean),
                c.eta_mean.to_string(),
                c.se_eta_mean.to_string(),
                opt(c.analytic_mean),
                opt(c.tv_theory),
                opt(c.tv_beg),
            ])?;
        }
        into_string(w)
    }

    /// One row per (cell, k) with the observed count, frequency and model pmf.
    pub fn histogram_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["experiment", "data", "n", "estimator", "alpha", "k", "count", "freq", "theory"])?;
        for c in &self.cells {
            let theory = c.theory.as_deref().unwrap_or(&[]);
            let len = c.histogram.len().max(theory.len());
            for k in 0..len {
                let count = c.histogram.get(k).copied().unwrap_or(0);
                w.write_record([
                    self.name.clone(),
                    c.data.to_string(),
                    c.n.to_string(),
                    c.estimator.to_string(),
                    opt(c.alpha),
                    k.to_string(),
                    count.to_string(),
                    (count as f64 / c.replications as f64).to_string(),
                    opt(theory.get(k).copied()),
                ])?;
            }
        }
        into_string(w)
    }

    /// Metadata and per-cell statistics without the histogram arrays.
    pub fn summary_json(&self) -> Result<String> {
        let mut value = serde_json::to_value(self)?;
        if let Some(cells) = value.get_mut("cells").and_then(|c| c.as_array_mut()) {
            for cell in cells {
                if let Some(obj) = cell.as_object_mut() {
                    obj.remove("histogram");
                    obj.remove("theory");
                }
            }
        }
        Ok(serde_json::to_string_pretty(&value)?)
    }
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("utf-8 csv"))
}

/// Files written by [`write_outputs`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputPaths {
    pub cells: PathBuf,
    pub histogram: PathBuf,
    pub summary: PathBuf,
}

/// Writes `<name>.csv`, `<name>_hist.csv` and `<name>.json` into `dir`.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<OutputPaths> {
    fs::create_dir_all(dir)?;
    let paths = OutputPaths {
        cells: dir.join(format!("{}.csv", result.name)),
        histogram: dir.join(format!("{}_hist.csv", result.name)),
        summary: dir.join(format!("{}.json", result.name)),
    };
    fs::write(&paths.cells, result.cells_csv()?)?;
    fs::write(&paths.histogram, result.histogram_csv()?)?;
    fs::write(&paths.summary, result.summary_json()?)?;
    Ok(paths)
}
