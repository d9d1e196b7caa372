use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use zce_core::format::{read_values, Report};
use zce_core::sim::{self, ExperimentConfig, Figure};
use zce_core::{
    beg_pmf, gvs_pmf, pot_quantile, predictive_cdf_bayes, psi_bayes, psi_ml, psi_pot_bayes, psi_pot_ml,
    quantile_estimate, unconditional_exceedance_pmf, ObservationSummary, PotSeries, TransformSpec,
};

#[derive(Parser)]
#[command(name = "zce", version, about = "Zero-coverage-error quantile estimation and exceedance laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quantile estimate from a file of one value per line.
    Estimate(EstimateArgs),
    /// Law of the number of future exceedances, as CSV.
    Exceedance(ExceedanceArgs),
    /// Peaks-over-threshold estimate from `block_id,value` CSV.
    Pot(PotArgs),
    /// Run experiments from a TOML config.
    Simulate(SimulateArgs),
    /// Run a canned figure or table experiment.
    Reproduce(ReproduceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Bayes,
    Ml,
}

#[derive(Args)]
struct EstimateArgs {
    data: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "bayes")]
    method: MethodArg,
    /// identity, square or logratio:<u>
    #[arg(long, default_value = "identity")]
    transform: TransformSpec,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ExceedanceArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    /// Number of future values.
    #[arg(long = "N", value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    big_n: u64,
    #[arg(long, required_unless_present = "gvs")]
    alpha: Option<f64>,
    #[arg(long, value_enum, default_value = "bayes")]
    method: MethodArg,
    /// Use the distribution-free law over the m-th largest training value.
    #[arg(long, value_name = "M", value_parser = clap::value_parser!(u64).range(1..), conflicts_with = "alpha")]
    gvs: Option<u64>,
    /// Write the CSV here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PotArgs {
    data: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    ntail: u64,
    #[arg(long)]
    alpha: f64,
    /// Horizon in blocks.
    #[arg(long = "N", value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    big_n: u64,
    #[arg(long, value_enum, default_value = "bayes")]
    method: MethodArg,
    /// Where to write the exceedance-count pmf.
    #[arg(long, short, default_value = "pot_pmf.csv")]
    output: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct RunOptions {
    /// Seed for experiments that do not set one.
    #[arg(long, env = "ZCE_SEED")]
    seed: Option<u64>,
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    config: PathBuf,
    #[command(flatten)]
    run: RunOptions,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(long, value_parser = Figure::ALL.map(|f| f.id()))]
    figure: String,
    /// 1,000 replications instead of 10,000.
    #[arg(long)]
    quick: bool,
    #[command(flatten)]
    run: RunOptions,
}

fn emit(report: &Report, json: bool) {
    if json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.to_lines());
    }
}

fn estimate(args: &EstimateArgs) -> Result<()> {
    let file = File::open(&args.data).with_context(|| format!("cannot open {}", args.data.display()))?;
    let values = read_values(BufReader::new(file)).with_context(|| format!("reading {}", args.data.display()))?;
    let summary = ObservationSummary::from_values(&args.transform, &values)?;
    let psi = match args.method {
        MethodArg::Bayes => psi_bayes(summary.n, args.alpha)?,
        MethodArg::Ml => psi_ml(summary.n, args.alpha)?,
    };
    let eta = quantile_estimate(&summary, &psi, &args.transform)?;
    let y = args.transform.forward(eta)?;
    let cdf = match args.method {
        MethodArg::Bayes => predictive_cdf_bayes(y, &summary)?,
        MethodArg::Ml => -(-(summary.n as f64) * y / summary.sigma).exp_m1(),
    };
    let report = Report::new()
        .text("method", psi.method.to_string())
        .text("transform", args.transform.to_string())
        .num("alpha", args.alpha)
        .int("n", summary.n)
        .num("sigma", summary.sigma)
        .num("psi", psi.value)
        .num("eta", eta)
        .num("cdf_at_eta", cdf);
    emit(&report, args.json);
    Ok(())
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => io::stdout().write_all(text.as_bytes()).context("writing standard output"),
    }
}

fn exceedance(args: &ExceedanceArgs) -> Result<()> {
    let pmf = match (args.gvs, args.alpha) {
        (Some(m), _) => gvs_pmf(args.n, m, args.big_n)?,
        (None, Some(alpha)) => {
            let psi = match args.method {
                MethodArg::Bayes => psi_bayes(args.n, alpha)?,
                MethodArg::Ml => psi_ml(args.n, alpha)?,
            };
            beg_pmf(args.n, args.big_n, psi.value)?
        }
        (None, None) => bail!("--alpha is required unless --gvs is given"),
    };
    write_text(args.output.as_deref(), &pmf.to_csv_string())
}

fn pot(args: &PotArgs) -> Result<()> {
    let file = File::open(&args.data).with_context(|| format!("cannot open {}", args.data.display()))?;
    let series = PotSeries::from_csv(BufReader::new(file), args.ntail as usize)
        .with_context(|| format!("reading {}", args.data.display()))?;
    let n_tilde = series.n_tilde() as u64;
    let psi = match args.method {
        MethodArg::Bayes => psi_pot_bayes(args.ntail, n_tilde, args.alpha)?,
        MethodArg::Ml => psi_pot_ml(args.ntail, n_tilde, args.big_n, args.alpha)?,
    };
    let eta = pot_quantile(&series, &psi)?;
    let pmf = unconditional_exceedance_pmf(args.ntail, n_tilde, args.big_n, args.alpha, psi.value)?;
    write_text(Some(&args.output), &pmf.to_csv_string())?;
    let report = Report::new()
        .text("method", psi.method.to_string())
        .num("alpha", args.alpha)
        .int("n_tail", args.ntail)
        .int("n_tilde", n_tilde)
        .num("m_bar", series.m_bar())
        .num("threshold", series.threshold)
        .num("xi", series.tail_index())
        .num("psi", psi.value)
        .num("eta", eta)
        .num("expected_exceedances", pmf.mean())
        .num("p_more_than_one", pmf.survival(1))
        .text("pmf", args.output.display().to_string());
    emit(&report, args.json);
    Ok(())
}

fn run_all(configs: Vec<ExperimentConfig>, opts: &RunOptions) -> Result<()> {
    for mut cfg in configs {
        if cfg.seed.is_none() {
            cfg.seed = opts.seed;
        }
        let result = sim::run(&cfg).with_context(|| format!("experiment `{}`", cfg.name))?;
        let paths = sim::write_outputs(&result, &opts.out_dir)?;
        println!(
            "experiment={} cells={} replications={} seed={} csv={} histogram={} summary={}",
            result.name,
            result.cells.len(),
            result.replications,
            result.seed,
            paths.cells.display(),
            paths.histogram.display(),
            paths.summary.display()
        );
    }
    Ok(())
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let configs = sim::load_config(&args.config).with_context(|| format!("loading {}", args.config.display()))?;
    run_all(configs, &args.run)
}

fn reproduce(args: &ReproduceArgs) -> Result<()> {
    let figure: Figure = args.figure.parse()?;
    let seed = args.run.seed.unwrap_or(sim::DEFAULT_SEED);
    run_all(sim::preset(figure, args.quick, seed), &args.run)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Estimate(a) => estimate(a),
        Command::Exceedance(a) => exceedance(a),
        Command::Pot(a) => pot(a),
        Command::Simulate(a) => simulate(a),
        Command::Reproduce(a) => reproduce(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
