use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dsvnlms::harness::{self, ExperimentConfig, SeedSpec};
use dsvnlms::robustness;
use dsvnlms::volterra::{self, VolterraConfig};
use dsvnlms::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(
    name = "dsvnlms",
    version,
    about = "Data-selective Volterra NLMS experiments"
)]
struct Cli {
    /// Suppress progress output
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file or a built-in preset
    Run {
        /// Config file (same as --config)
        config_path: Option<PathBuf>,
        #[arg(long, conflicts_with = "config_path")]
        config: Option<PathBuf>,
        #[arg(long, conflicts_with_all = ["config", "config_path"])]
        preset: Option<String>,
        /// Override the number of trials
        #[arg(long)]
        trials: Option<usize>,
        /// Override the base seed
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (else $DSVNLMS_OUT_DIR, the config, or out/<name>)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List built-in presets, optionally exporting them as JSON files
    Presets {
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Re-check the robustness inequalities of a trace.csv file
    Check { trace: PathBuf },
    /// Print the regressor layout for order P and memory N
    Dims { order: usize, memory: usize },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Validation(problems) = &e {
                for p in problems {
                    eprintln!("  {p}");
                }
            }
            ExitCode::from(if e.is_io() { EXIT_IO } else { EXIT_USAGE })
        }
    }
}

fn dispatch(cli: Cli) -> dsvnlms::Result<ExitCode> {
    match cli.command {
        Command::Run {
            config_path,
            config,
            preset,
            trials,
            seed,
            out,
        } => {
            let mut cfg = match (config_path.or(config), preset) {
                (Some(path), None) => ExperimentConfig::load(&path)?,
                (None, Some(name)) => harness::preset(&name)?,
                _ => {
                    return Err(Error::InvalidConfig(
                        "give exactly one of a config file or --preset".into(),
                    ))
                }
            };
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(s) = seed {
                cfg.seeds = SeedSpec::Base(s);
            }
            let out_dir = out
                .or_else(|| std::env::var_os(harness::OUTPUT_DIR_ENV).map(PathBuf::from))
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| Path::new("out").join(&cfg.name));
            run(&cfg, &out_dir, cli.quiet)
        }
        Command::Presets { export } => {
            for name in harness::PRESET_NAMES {
                let cfg = harness::preset(name)?;
                if let Some(dir) = &export {
                    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                    let path = dir.join(format!("{name}.json"));
                    std::fs::write(&path, cfg.to_json()).map_err(|e| Error::io(&path, e))?;
                }
                println!("{name:<10} {}", harness::describe(&cfg));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { trace } => {
            let file = std::fs::File::open(&trace).map_err(|e| Error::io(&trace, e))?;
            let records = robustness::read_trace(std::io::BufReader::new(file))?;
            let report = robustness::check_trace(&records);
            println!("rows={}", report.rows);
            println!("local_violations={}", report.local_violations.len());
            println!("global_violations={}", report.global_violations.len());
            println!(
                "consistency_violations={}",
                report.consistency_violations.len()
            );
            match report.final_ratio {
                Some(r) => println!("final_ratio={}", robustness::fmt_f64(r)),
                None => println!("final_ratio=none"),
            }
            let first = report
                .local_violations
                .iter()
                .chain(&report.global_violations)
                .chain(&report.consistency_violations)
                .min();
            if let Some(k) = first {
                println!("first_violation_k={k}");
            }
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VERIFY)
            })
        }
        Command::Dims { order, memory } => {
            let cfg = VolterraConfig::new(order, memory, volterra::DEFAULT_REGULARIZATION)?;
            println!("dimension={}", volterra::total_dimension(&cfg));
            println!("position order term");
            for (pos, term) in cfg.terms().enumerate() {
                println!("{pos:>8} {:>5} {term}", term.order());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run(cfg: &ExperimentConfig, out_dir: &Path, quiet: bool) -> dsvnlms::Result<ExitCode> {
    if !quiet {
        eprintln!(
            "running {} ({} trials x {} iterations) into {}",
            cfg.name,
            cfg.trials,
            cfg.iterations,
            out_dir.display()
        );
    }
    let result = harness::run_experiment(cfg, out_dir)?;
    for v in result.comparison().variants {
        let a = &v.aggregate;
        println!(
            "{} {} runs={} local_violations={} global_violations={} update_rate={:.4} increase_fraction={:.4} wtilde_sq_final={:.3e}",
            cfg.name,
            v.name,
            a.runs,
            a.local_violations,
            a.global_violations,
            a.mean_update_rate,
            a.mean_increase_fraction,
            a.mean_wtilde_sq_final,
        );
    }
    Ok(ExitCode::SUCCESS)
}
