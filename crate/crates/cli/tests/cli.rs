use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use zce_core::sim::{self, Figure};
use zce_core::{pot_quantile, psi_pot_bayes, sample, DistributionSpec, PotSeries, RandomStream};

fn zce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zce")).args(args).env_remove("ZCE_SEED").output().expect("spawn zce")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "zce failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn value(text: &str, key: &str) -> f64 {
    let prefix = format!("{key}=");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no `{key}` in {text}"))
        .parse()
        .unwrap()
}

fn fixture(i: usize) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("tests/fixtures/pareto_xi03_{i}.csv"))
}

/// 50 exponential draws rescaled to sum to 50.
fn unit_mean_file(dir: &Path) -> PathBuf {
    let mut rng = RandomStream::new(5);
    let xs = sample(&DistributionSpec::Exponential { rate: 1.0 }, 50, &mut rng).unwrap();
    let total: f64 = xs.iter().sum();
    let body: String = xs.iter().map(|x| format!("{:?}\n", x * 50.0 / total)).collect();
    let path = dir.join("exp50.txt");
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn estimate_bayes_and_ml() {
    let dir = tempfile::tempdir().unwrap();
    let data = unit_mean_file(dir.path());
    let path = data.to_str().unwrap();

    let bayes = stdout(&zce(&["estimate", path, "--alpha", "0.99", "--method", "bayes"]));
    assert!((value(&bayes, "eta") - 4.823910).abs() < 1e-6, "{bayes}");
    assert!((value(&bayes, "cdf_at_eta") - 0.99).abs() < 1e-12);
    assert_eq!(value(&bayes, "n"), 50.0);

    let ml = stdout(&zce(&["estimate", path, "--alpha", "0.99", "--method", "ml"]));
    assert!((value(&ml, "eta") - 4.605170).abs() < 1e-6, "{ml}");

    let json = stdout(&zce(&["estimate", path, "--alpha", "0.99", "--json"]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["method"], "bayes");
    assert!((v["psi"].as_f64().unwrap() - 0.0964782).abs() < 1e-7);
}

#[test]
fn estimate_single_value_at_median() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.txt");
    fs::write(&path, "1.0\n").unwrap();
    let out = stdout(&zce(&["estimate", path.to_str().unwrap(), "--alpha", "0.5"]));
    assert_eq!(value(&out, "eta"), 1.0);
    assert_eq!(value(&out, "psi"), 1.0);
}

#[test]
fn estimate_transforms() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.txt");
    fs::write(&path, "1\n2\n3\n").unwrap();
    let out = stdout(&zce(&["estimate", path.to_str().unwrap(), "--alpha", "0.9", "--transform", "square"]));
    assert_eq!(value(&out, "sigma"), 14.0);
    let expect = (((0.1f64).powf(-1.0 / 3.0) - 1.0) * 14.0).sqrt();
    assert!((value(&out, "eta") - expect).abs() < 1e-7);
    let out = stdout(&zce(&["estimate", path.to_str().unwrap(), "--alpha", "0.9", "--transform", "logratio:0.5"]));
    assert!(value(&out, "eta") > 3.0);
}

#[test]
fn estimate_errors() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.txt");
    fs::write(&empty, "\n").unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "1.0\n2.0\nthree\n").unwrap();
    let good = dir.path().join("good.txt");
    fs::write(&good, "1.0\n").unwrap();

    let out = zce(&["estimate", empty.to_str().unwrap(), "--alpha", "0.9"]);
    assert!(!out.status.success());
    let out = zce(&["estimate", bad.to_str().unwrap(), "--alpha", "0.9"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    for alpha in ["1.0", "0", "-0.2"] {
        let out = zce(&["estimate", good.to_str().unwrap(), "--alpha", alpha]);
        assert!(!out.status.success(), "alpha {alpha} accepted");
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn exceedance_csv_matches_library() {
    let out = stdout(&zce(&["exceedance", "--n", "50", "--N", "100", "--alpha", "0.99", "--method", "bayes"]));
    let psi = zce_core::psi_bayes(50, 0.99).unwrap().value;
    assert_eq!(out, zce_core::beg_pmf(50, 100, psi).unwrap().to_csv_string());
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "k,probability");
    assert_eq!(lines.len(), 103);
    let mean: f64 = lines[1..102]
        .iter()
        .map(|l| {
            let (k, p) = l.split_once(',').unwrap();
            k.parse::<f64>().unwrap() * p.parse::<f64>().unwrap()
        })
        .sum();
    assert!((mean - 1.0).abs() < 1e-6);
    assert!(lines[102].starts_with("# law=beg"));
}

#[test]
fn exceedance_gvs_and_usage_errors() {
    let out = stdout(&zce(&["exceedance", "--gvs", "1", "--n", "100", "--N", "100"]));
    assert_eq!(out, zce_core::gvs_pmf(100, 1, 100).unwrap().to_csv_string());
    assert!(out.contains("law=gvs"));

    let out = zce(&["exceedance", "--n", "50", "--N", "0", "--alpha", "0.99"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let out = zce(&["exceedance", "--n", "50", "--N", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pot_matches_library_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let pmf_path = dir.path().join("pmf.csv");
    let out = stdout(&zce(&[
        "pot",
        fixture(1).to_str().unwrap(),
        "--ntail",
        "50",
        "--alpha",
        "0.99",
        "--N",
        "100",
        "--json",
        "-o",
        pmf_path.to_str().unwrap(),
    ]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();

    let series = PotSeries::from_csv(fs::File::open(fixture(1)).unwrap(), 50).unwrap();
    let psi = psi_pot_bayes(50, 50, 0.99).unwrap();
    let eta = pot_quantile(&series, &psi).unwrap();
    assert_eq!(v["eta"].as_f64().unwrap(), eta);
    assert_eq!(v["threshold"].as_f64().unwrap(), series.threshold);
    assert_eq!(v["n_tilde"], 50);
    assert_eq!(v["m_bar"], 100.0);

    let pmf = fs::read_to_string(&pmf_path).unwrap();
    let expect = zce_core::unconditional_exceedance_pmf(50, 50, 100, 0.99, psi.value).unwrap();
    assert_eq!(pmf, expect.to_csv_string());
}

#[test]
fn pot_tail_index_over_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let mut xis = Vec::new();
    for i in 1..=4 {
        let out = stdout(&zce(&[
            "pot",
            fixture(i).to_str().unwrap(),
            "--ntail",
            "50",
            "--alpha",
            "0.99",
            "--N",
            "100",
            "-o",
            dir.path().join("pmf.csv").to_str().unwrap(),
        ]));
        xis.push(value(&out, "xi"));
    }
    // the tail-index estimate has standard deviation xi/sqrt(n) for Pareto data
    let mean = xis.iter().sum::<f64>() / 4.0;
    let se = 0.3 / (50.0f64 * 4.0).sqrt();
    assert!((mean - 0.3).abs() < 3.0 * se, "mean tail index {mean} from {xis:?}");
}

#[test]
fn pot_too_many_tail_values() {
    let out = zce(&["pot", fixture(1).to_str().unwrap(), "--ntail", "5000", "--alpha", "0.99", "--N", "100"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not enough data"));
}

#[test]
fn reproduce_unknown_figure_lists_ids() {
    let out = zce(&["reproduce", "--figure", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for id in ["1", "2", "4", "5", "6", "table1"] {
        assert!(err.contains(id), "{err}");
    }
}

#[test]
fn reproduce_figure1_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    stdout(&zce(&["reproduce", "--figure", "1", "--quick", "--seed", "11", "--out-dir", out_dir]));
    for cfg in sim::preset(Figure::Fig1, true, 11) {
        let result = sim::run_coverage_vs_n(&cfg).unwrap();
        let csv = fs::read_to_string(dir.path().join(format!("{}.csv", cfg.name))).unwrap();
        assert_eq!(csv, result.cells_csv().unwrap());
        let hist = fs::read_to_string(dir.path().join(format!("{}_hist.csv", cfg.name))).unwrap();
        assert_eq!(hist, result.histogram_csv().unwrap());
    }
}

/// Printed statistics (mean, sd, P(N>1)) for n_tail = 5, 10, 25, 50.
const TABLE: [(&str, [[f64; 4]; 3]); 6] = [
    ("exp(rate=1)", [[0.95, 0.78, 0.48, 0.25], [1.67, 1.37, 0.93, 0.60], [0.21, 0.18, 0.10, 0.04]]),
    ("lognormal(mu=0,sigma=1)", [[0.98, 0.90, 0.71, 0.53], [1.60, 1.45, 1.12, 0.88], [0.23, 0.22, 0.17, 0.11]]),
    ("stdpar(xi=0.1,u=1)", [[1.08, 1.04, 1.03, 1.0], [1.70, 1.53, 1.37, 1.22], [0.26, 0.25, 0.26, 0.26]]),
    ("gev(xi=0.5,beta=1,mu=0)", [[1.05, 1.03, 0.94, 0.88], [1.70, 1.50, 1.30, 1.14], [0.25, 0.25, 0.23, 0.23]]),
    ("t(nu=2)", [[1.08, 1.04, 1.0, 0.95], [1.71, 1.57, 1.34, 1.19], [0.25, 0.25, 0.25, 0.24]]),
    ("t(nu=10)", [[1.02, 0.86, 0.64, 0.40], [1.69, 1.39, 1.07, 0.73], [0.24, 0.20, 0.14, 0.08]]),
];

#[test]
fn reproduce_table1_quick_within_band() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&zce(&["reproduce", "--figure", "table1", "--quick", "--out-dir", dir.path().to_str().unwrap()]));
    let mut rdr = csv::Reader::from_path(dir.path().join("table1.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let mut seen = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let (_, rows) = TABLE.iter().find(|(d, _)| *d == &rec[col("data")]).expect("known distribution");
        let j = [5, 10, 25, 50].iter().position(|&n| n.to_string() == rec[col("n")]).unwrap();
        for (row, (stat, se)) in rows.iter().zip([("mean", "se_mean"), ("sd", "se_sd"), ("p_gt1", "se_p_gt1")]) {
            let got: f64 = rec[col(stat)].parse().unwrap();
            let band = (3.0 * rec[col(se)].parse::<f64>().unwrap()).max(0.1);
            assert!(
                (got - row[j]).abs() <= band,
                "{} n={} {stat}: {got} vs {} (band {band})",
                &rec[col("data")],
                &rec[col("n")],
                row[j]
            );
        }
        seen += 1;
    }
    assert_eq!(seen, 24);
}

#[test]
fn simulate_config_with_env_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    fs::write(
        &config,
        r#"
[[experiment]]
name = "small"
kind = "beg_comparison"
data = ["exp(rate=2)"]
n = [5, 20]
horizon = 10
alpha = [0.9]
replications = 300
estimators = ["bayes", "ml"]
"#,
    )
    .unwrap();
    let run = |out: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_zce"))
            .args(["simulate", config.to_str().unwrap(), "--out-dir", out])
            .env("ZCE_SEED", "77")
            .output()
            .unwrap();
        stdout(&o)
    };
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run(a.to_str().unwrap());
    run(b.to_str().unwrap());
    for file in ["small.csv", "small_hist.csv", "small.json"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file} differs");
    }
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join("small.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 77);
    assert_eq!(summary["replications"], 300);
    assert!(summary["git_describe"].is_string());
    assert_eq!(summary["cells"].as_array().unwrap().len(), 4);
}

#[test]
fn simulate_rejects_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    fs::write(&config, "[[experiment]]\nname = \"x\"\nkind = \"coverage_vs_n\"\nn = [5]\nhorizon = 10\nalpha = [1.5]\nreplications = 10\n").unwrap();
    let out = zce(&["simulate", config.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));
}
