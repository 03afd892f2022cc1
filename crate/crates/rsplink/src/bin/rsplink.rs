//! Command-line front end: run Monte-Carlo sweeps, evaluate the closed-form
//! curves, inspect shuffle patterns, census the pattern space, and validate
//! configuration files.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use rsplink::harness::{
    emit_csv, emit_theory_csv, parse_bit_string, parse_config, run_experiment, theory_curve,
    ExperimentConfig,
};
use rsplink::interleaver::{census_report, InterleavingPattern};

#[derive(Parser)]
#[command(
    name = "rsplink",
    version,
    about = "Link-level simulator for shuffled-common-stream downlink multiple access",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte-Carlo SNR sweep and write the BER curve as CSV.
    Run {
        /// Experiment description file; omitting it runs the built-in
        /// reference experiment.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV path.
        #[arg(long, default_value = "ber_curve.csv")]
        out: PathBuf,
    },
    /// Evaluate the closed-form BER expressions over the sweep (no
    /// simulation) and write them as CSV.
    Theory {
        /// Experiment description file; omitting it uses the built-in
        /// reference experiment.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the config's master seed (accepted for interface
        /// symmetry; the closed forms do not use randomness).
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the one-based shuffle pattern generated by a string of
    /// indexing bits (section length = bits + 1).
    Pattern {
        /// Indexing bits as a 0/1 string, e.g. 0110.
        #[arg(long)]
        bits: String,
        /// Stage-selection mask as a 0/1 string of the same length;
        /// defaults to all ones (every stage active).
        #[arg(long)]
        mask: Option<String>,
        /// Print the inverse (de-shuffling) pattern instead.
        #[arg(long)]
        invert: bool,
    },
    /// Enumerate all indexing strings for a small common-section length and
    /// report how many distinct patterns they generate.
    Census {
        /// Common-section length B (small; the census is exhaustive).
        #[arg(long = "B", visible_alias = "common-len")]
        b: usize,
    },
    /// Parse and validate a configuration file, reporting the first
    /// violation if any.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load_config(path: Option<&PathBuf>, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text =
                fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            parse_config(&text).with_context(|| format!("parsing config {}", p.display()))?
        }
        None => ExperimentConfig::reference(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn real_main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config, seed, out } => {
            let cfg = load_config(config.as_ref(), seed)?;
            let curve = run_experiment(&cfg).context("running experiment")?;
            let mut file =
                fs::File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            emit_csv(&curve, &mut file)?;
            file.flush()?;
            println!(
                "wrote {} sweep points to {} (seed {})",
                curve.points.len(),
                out.display(),
                cfg.seed
            );
        }
        Command::Theory { config, seed, out } => {
            let cfg = load_config(config.as_ref(), seed)?;
            let points = theory_curve(&cfg).context("evaluating closed forms")?;
            match out {
                Some(path) => {
                    let mut file = fs::File::create(&path)
                        .with_context(|| format!("creating {}", path.display()))?;
                    emit_theory_csv(&points, &mut file)?;
                    file.flush()?;
                    println!("wrote {} sweep points to {}", points.len(), path.display());
                }
                None => {
                    let stdout = std::io::stdout();
                    emit_theory_csv(&points, &mut stdout.lock())?;
                }
            }
        }
        Command::Pattern { bits, mask, invert } => {
            let bit_vec = parse_bit_string(&bits).map_err(anyhow::Error::msg)?;
            let mask_vec = match mask {
                Some(m) => parse_bit_string(&m).map_err(anyhow::Error::msg)?,
                None => vec![true; bit_vec.len()],
            };
            let pattern = InterleavingPattern::generate(&bit_vec, &mask_vec)?;
            if invert {
                println!("{}", pattern.invert());
            } else {
                println!("{pattern}");
            }
        }
        Command::Census { b } => {
            if b < 2 {
                bail!("census needs a common-section length of at least 2, got {b}");
            }
            println!("{}", census_report(b)?);
        }
        Command::Validate { config } => {
            let cfg = load_config(Some(&config), None)?;
            println!(
                "ok: {} users, {} total bits/frame, {} sweep points, seed {}",
                cfg.users,
                cfg.plan.total_bits(),
                cfg.sweep.points().len(),
                cfg.seed
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
