use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use infobench::harness::{
    run_experiment_a, run_experiment_b, run_experiment_c, run_simulation, ExperimentConfig,
    ExperimentKind, Period, Variant,
};
use infobench::Error;

#[derive(Parser)]
#[command(
    name = "infobench",
    version,
    about = "Information-theoretic model benchmarking experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the truth model and write the daily record.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Days to simulate.
        #[arg(long, default_value_t = 3650)]
        days: usize,
    },
    /// Bayesian model probabilities over the forcing/observation noise grid.
    ExperimentA(Common),
    /// Regression bound on missing information and its convergence curve.
    ExperimentB(Common),
    /// Assimilation, system identification and per-edge transfer entropy.
    ExperimentC(Common),
    /// Print the fully resolved configuration.
    Info(Common),
}

#[derive(Args)]
struct Common {
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// desk or full.
    #[arg(long)]
    scale: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Forcing CSV with columns day,precip_mm,pet_mm.
    #[arg(long)]
    forcing: Option<PathBuf>,
    /// Worker threads; 0 uses all cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Extra config override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn resolve(&self, experiment: Option<ExperimentKind>) -> Result<ExperimentConfig, Error> {
        let mut pairs = Vec::new();
        for item in &self.set {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {item:?}")))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let mut flag = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                pairs.push((k.to_string(), v));
            }
        };
        flag("seed", self.seed.map(|s| s.to_string()));
        flag("scale", self.scale.clone());
        flag(
            "forcing",
            self.forcing.as_ref().map(|p| p.display().to_string()),
        );
        flag("workers", self.workers.map(|w| w.to_string()));
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path, &pairs)?,
            None => ExperimentConfig::from_pairs(&pairs)?,
        };
        if let Some(kind) = experiment {
            if config.experiment.is_none() {
                config.experiment = Some(kind);
            }
        }
        Ok(config)
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate { common, days } => {
            let config = common.resolve(None)?;
            let path = run_simulation(&config, days, &common.out)?;
            println!("wrote {}", path.display());
        }
        Command::ExperimentA(common) => {
            let config = common.resolve(Some(ExperimentKind::AppendixA))?;
            let report = run_experiment_a(&config, &common.out)?;
            for row in &report.table.rows {
                println!(
                    "sigma_u={} sigma_y={} {}: {:.4} (std {:.4})",
                    row.sigma_u, row.sigma_y, row.model, row.prob_mean, row.prob_std
                );
            }
            println!("ranking flip: {}", report.ranking_flip);
        }
        Command::ExperimentB(common) => {
            let config = common.resolve(Some(ExperimentKind::AppendixB))?;
            let report = run_experiment_b(&config, &common.out)?;
            for p in &report.convergence.points {
                println!(
                    "fraction {} ({} rows): in-sample {:.4}, out-of-sample {:.4}",
                    p.fraction, p.train_rows, p.i_in_sample, p.i_out_sample
                );
            }
            for p in &report.sweep {
                println!(
                    "sigma_u={}: missing true {:.4}, estimated {:.4} (std {:.4})",
                    p.sigma_u, p.missing_true, p.missing_est, p.missing_est_std
                );
            }
            println!(
                "mean relative underestimation: {:.4}",
                report.mean_relative_underestimation()
            );
        }
        Command::ExperimentC(common) => {
            let config = common.resolve(Some(ExperimentKind::AppendixC))?;
            let report = run_experiment_c(&config, &common.out)?;
            for period in [Period::Calibration, Period::Evaluation] {
                for variant in [
                    Variant::Prior,
                    Variant::Calibrated,
                    Variant::Assimilated,
                    Variant::Identified,
                ] {
                    if let Some(m) = report.mse_of(period, variant) {
                        println!("{period:?} {variant:?}: mse {m:.5}");
                    }
                }
            }
            match report.infiltration_rank {
                Some(r) => println!("precipitation -> soil rank: {r}"),
                None => println!("precipitation -> soil edge not found"),
            }
        }
        Command::Info(common) => {
            print!("{}", common.resolve(None)?.to_text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}
