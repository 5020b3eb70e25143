use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fsentropy::cli_io::{
    emit_results, format_summary, reproduce_paper_example, results_csv, results_json, run_experiment,
    ExperimentConfig, OutputFormat, SYSTEMS,
};
use fsentropy::Error;

#[derive(Parser)]
#[command(name = "entcli", about = "Entropy estimators for free semigroup actions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Use closed forms on the binary shift/odometer system.
        #[arg(long)]
        exact: bool,
    },
    /// Topological entropy of shift and odometer against log 2 / 2.
    ReproducePaperExample {
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Print the built-in systems.
    ListSystems,
}

fn run(config: PathBuf, out: Option<PathBuf>, format: Option<String>, seed: Option<u64>, exact: bool) -> Result<(), Error> {
    let mut cfg = ExperimentConfig::load(&config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(format) = format {
        cfg.format = format.parse::<OutputFormat>()?;
    }
    if out.is_some() {
        cfg.output = out;
    }
    cfg.exact |= exact;
    cfg.validate()?;
    let output = run_experiment(&cfg)?;
    match &cfg.output {
        Some(path) => {
            emit_results(&output, &cfg, path, cfg.format)?;
            eprint!("{}", format_summary(&output.summary));
        }
        None => {
            match cfg.format {
                OutputFormat::Csv => print!("{}", results_csv(&output.rows)?),
                OutputFormat::Json => print!("{}", results_json(&output, &cfg)?),
            }
            eprint!("{}", format_summary(&output.summary));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            format,
            seed,
            exact,
        } => run(config, out, format, seed, exact),
        Command::ReproducePaperExample { seed } => match reproduce_paper_example(seed) {
            Ok(checks) => {
                for check in &checks {
                    println!("{}", check);
                }
                if !checks.iter().all(|c| c.passed()) {
                    return ExitCode::from(1);
                }
                println!("log 2 / 2 = {:.7} reproduced", std::f64::consts::LN_2 / 2.0);
                Ok(())
            }
            Err(err) => Err(err),
        },
        Command::ListSystems => {
            for (name, about) in SYSTEMS {
                println!("{:<24} {}", name, about);
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("entcli: {}", err);
            if err.is_config_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
