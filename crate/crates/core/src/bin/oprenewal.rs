use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use oprenewal::experiment::{
    catalog, run_catalog, run_config, ConvParams, ExperimentConfig, LsvParams, Module, Outcome,
    RenewalParams, RunSection, TowerParams,
};
use oprenewal::Error;

#[derive(Parser, Debug)]
#[command(name = "oprenewal", version, about = "Renewal sequences of operators and polynomial decay of correlations")]
struct Cli {
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output directory for CSV and JSON reports.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Experiments run concurrently (`run` and `experiment all`).
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expansion of a scalar power-law renewal sequence.
    Renewal {
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 10_000)]
        horizon: usize,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long, default_value = "renewal")]
        id: String,
    },
    /// Convolution of two power laws against the case table.
    Conv {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 100_000)]
        horizon: usize,
        #[arg(long, default_value = "conv")]
        id: String,
    },
    /// Correlations of the LSV map from its Ulam discretization.
    Lsv {
        #[arg(long)]
        alpha: f64,
        /// Ladder intervals resolved near the neutral fixed point.
        #[arg(long, default_value_t = 20_000)]
        grid: usize,
        #[arg(long, default_value_t = 400)]
        horizon: usize,
        #[arg(long)]
        zero_mean: bool,
        #[arg(long)]
        clt: bool,
        #[arg(long, default_value_t = 0)]
        mc_samples: usize,
        #[arg(long, default_value = "lsv")]
        id: String,
    },
    /// Exact correlations on a Young tower with P(R > n) = (n+1)^-beta.
    Tower {
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1000)]
        horizon: usize,
        #[arg(long, default_value_t = 10_000)]
        truncation: usize,
        #[arg(long)]
        zero_mean: bool,
        #[arg(long, default_value_t = 0)]
        mc_samples: usize,
        #[arg(long, default_value = "tower")]
        id: String,
    },
    /// Run TOML experiment configs; their settings override the flags.
    Run {
        #[arg(long = "config", required = true, num_args = 1..)]
        configs: Vec<PathBuf>,
    },
    /// Run a named acceptance experiment, or `all`.
    Experiment {
        /// Experiment id; omit to list them.
        id: Option<String>,
    },
}

fn print_outcome(out: &Outcome, csv: &Path) {
    println!("{} -> {}", out.id, csv.display());
    for key in ["fitted_exponent", "predicted_exponent", "ratio_at_horizon", "mean_ratio_upper_half"] {
        if let Some(v) = out.summary.get(key) {
            println!("  {key} = {v}");
        }
    }
    for c in &out.checks {
        println!("  {}", c.describe());
    }
}

fn emit(out: &Outcome, dir: &Path, cfg: &ExperimentConfig, text: &str) -> Result<(), Error> {
    let echo = serde_json::to_value(cfg)?;
    let (csv, _) = out.write(dir, text, echo)?;
    print_outcome(out, &csv);
    Ok(())
}

fn flags_config(cli: &Cli) -> Option<ExperimentConfig> {
    let run = |module, id: &String| RunSection { module, id: id.clone(), seed: cli.seed, out: Some(cli.out.clone()) };
    let cfg = |module, id: &String| ExperimentConfig {
        run: run(module, id),
        renewal: None,
        conv: None,
        lsv: None,
        tower: None,
    };
    match &cli.command {
        Command::Renewal { beta, horizon, order, id } => Some(ExperimentConfig {
            renewal: Some(RenewalParams { beta: *beta, horizon: *horizon, order: *order, window: None }),
            ..cfg(Module::Renewal, id)
        }),
        Command::Conv { alpha, beta, horizon, id } => Some(ExperimentConfig {
            conv: Some(ConvParams { alpha: *alpha, beta: *beta, horizon: *horizon }),
            ..cfg(Module::Conv, id)
        }),
        Command::Lsv { alpha, grid, horizon, zero_mean, clt, mc_samples, id } => {
            let text = format!("alpha = {alpha}\ngrid = {grid}\nhorizon = {horizon}\n");
            let mut p: LsvParams = toml::from_str(&text).expect("flag values form a valid section");
            p.zero_mean = *zero_mean;
            p.clt = *clt;
            p.mc_samples = *mc_samples;
            if *zero_mean {
                p.f = oprenewal::lsv::ObservableSpec::bump(0.55, 0.7, 0.04);
                p.g = Some(oprenewal::lsv::ObservableSpec::bump(0.6, 0.9, 0.05));
            }
            Some(ExperimentConfig { lsv: Some(p), ..cfg(Module::Lsv, id) })
        }
        Command::Tower { beta, horizon, truncation, zero_mean, mc_samples, id } => Some(ExperimentConfig {
            tower: Some(TowerParams {
                beta: Some(*beta),
                c: 1.0,
                truncation: *truncation,
                returns: None,
                horizon: *horizon,
                zero_mean: *zero_mean,
                mc_samples: *mc_samples,
            }),
            ..cfg(Module::Tower, id)
        }),
        _ => None,
    }
}

fn run_one(cfg: &ExperimentConfig, text: &str, default_out: &Path) -> Result<bool, Error> {
    let out = run_config(cfg)?;
    let dir = cfg.run.out.clone().unwrap_or_else(|| default_out.to_path_buf());
    emit(&out, &dir, cfg, text)?;
    Ok(out.passed())
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, Error> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))
}

fn run_configs(cli: &Cli, paths: &[PathBuf]) -> Result<bool, Error> {
    let loaded: Vec<(ExperimentConfig, String)> = paths
        .iter()
        .map(|p| {
            ExperimentConfig::load(p).map_err(|e| match e {
                Error::Config(msg) => Error::Config(format!("{}: {msg}", p.display())),
                other => other,
            })
        })
        .collect::<Result<_, _>>()?;
    let results: Vec<Result<bool, Error>> = pool(cli.jobs)?.install(|| {
        loaded
            .par_iter()
            .map(|(cfg, text)| run_one(cfg, text, &cli.out))
            .collect()
    });
    results.into_iter().try_fold(true, |acc, r| Ok(acc & r?))
}

fn run_experiments(cli: &Cli, id: &str) -> Result<bool, Error> {
    let ids: Vec<&str> = if id == "all" {
        catalog().iter().map(|e| e.id).collect()
    } else {
        vec![id]
    };
    let seed = cli.seed;
    let results: Vec<Result<bool, Error>> = pool(cli.jobs)?.install(|| {
        ids.par_iter()
            .map(|&id| {
                let start = Instant::now();
                let out = run_catalog(id, seed)?;
                let text = format!("id = \"{id}\"\nseed = {seed}\n");
                let echo = serde_json::json!({ "id": id, "seed": seed });
                let (csv, _) = out.write(&cli.out, &text, echo)?;
                print_outcome(&out, &csv);
                println!("  elapsed {:.2} s", start.elapsed().as_secs_f64());
                Ok(out.passed())
            })
            .collect()
    });
    results.into_iter().try_fold(true, |acc, r| Ok(acc & r?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { configs } => run_configs(&cli, configs),
        Command::Experiment { id: None } => {
            for e in catalog() {
                println!("{:>2}  {:<18} {}", e.criterion, e.id, e.title);
            }
            Ok(true)
        }
        Command::Experiment { id: Some(id) } => run_experiments(&cli, id),
        _ => {
            let cfg = flags_config(&cli).expect("module subcommand");
            cfg.validate()
                .and_then(|_| run_one(&cfg, &cfg.to_toml(), &cli.out))
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("some checks failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
