use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fputlab::harness::{
    compare, dry_run, list_experiments, run_experiment, ExperimentConfig, ExperimentKind, Summary,
    Tolerances, DESK_SCALE_NOTE,
};
use fputlab::Error;

#[derive(Parser)]
#[command(name = "fputlab", version, about = "Run, list and compare lattice experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `out` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Master seed; overrides `seed` in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Validate the config and print the planned files without writing.
        #[arg(long)]
        dry_run: bool,
        /// Worker threads for internally parallel steps.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print the experiment catalog.
    List {
        /// Print the default config of every experiment instead.
        #[arg(long)]
        defaults: bool,
    },
    /// Compare two summary.json files; exits non-zero on failure.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Absolute tolerance applied to every quantity.
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
        /// JSON file `{"default": .., "keys": {..}}` with per-key tolerances.
        #[arg(long)]
        tolerances: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Run {
            config,
            out,
            seed,
            dry_run: dry,
            threads,
        } => {
            let text = std::fs::read_to_string(&config).map_err(|e| Error::Io {
                path: config.clone(),
                source: e,
            })?;
            let mut cfg = ExperimentConfig::from_json(&text)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build_global()
                    .map_err(|e| Error::Config {
                        field: "--threads".into(),
                        reason: e.to_string(),
                    })?;
            }
            let dir = out.or_else(|| cfg.out.clone()).ok_or_else(|| Error::Config {
                field: "out".into(),
                reason: "no output directory (use --out or set `out`)".into(),
            })?;
            if dry {
                println!("{} -> {}", cfg.experiment, dir.display());
                for f in dry_run(&cfg)? {
                    println!("  {f}");
                }
                return Ok(ExitCode::SUCCESS);
            }
            let summary = run_experiment(&cfg, &dir)?;
            println!("{}", serde_json::to_string_pretty(&summary.quantities)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::List { defaults } => {
            if defaults {
                for kind in ExperimentKind::ALL {
                    println!("{}", ExperimentConfig::defaults(kind).to_json_pretty());
                }
                return Ok(ExitCode::SUCCESS);
            }
            for e in list_experiments() {
                let tag = if e.extended { " [extended]" } else { "" };
                println!("{}{tag}\n  {}", e.kind, e.description);
                println!("  mirrors: {}", e.mirrors);
                println!("  modules: {}", e.modules.join(", "));
                println!("  scale:   {}", e.desk_scale);
            }
            println!("\n{DESK_SCALE_NOTE}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare {
            a,
            b,
            tol,
            tolerances,
        } => {
            let tolerances = match tolerances {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| Error::Io { path, source: e })?;
                    serde_json::from_str(&text)?
                }
                None => Tolerances::uniform(tol),
            };
            let result = compare(&Summary::read(&a)?, &Summary::read(&b)?, &tolerances)?;
            println!("{}", serde_json::to_string_pretty(&result)?);
            Ok(if result.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}
