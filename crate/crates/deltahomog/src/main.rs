use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use deltahomog::cli::{
    cmd_check, cmd_phase, cmd_roots, load_config, resolve_budget, CheckId, OutputFormat, RunConfig,
    EXIT_USAGE,
};
use deltahomog::homogeneous_metric::MetricParams;

#[derive(Parser)]
#[command(
    name = "deltahomog",
    about = "Certify or refute delta-homogeneity of two-parameter invariant metrics",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump a root system and its bracket table as JSON.
    Roots {
        /// Family: A, B, C, D, G2 or F4.
        family: String,
        rank: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run condition suites on a space ("so5_u2" or a space file).
    Check {
        space: String,
        #[arg(long, default_value_t = 1.0)]
        x1: f64,
        #[arg(long)]
        x2: Option<f64>,
        /// Shorthand for --x1 1 --x2 RATIO.
        #[arg(long, conflicts_with = "x2")]
        ratio: Option<f64>,
        /// Comma-separated list: range,t31_9n,ncdo,geodesic,delta.
        #[arg(long, value_delimiter = ',')]
        checks: Vec<String>,
        /// Run every known check.
        #[arg(long)]
        all: bool,
        /// Exit 3 when the only positive evidence is oracle-plausible.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        oracle_restarts: Option<u32>,
        #[arg(long)]
        oracle_steps: Option<u32>,
        #[arg(long)]
        oracle_seed: Option<u64>,
        /// JSON config file (keys oracle.restarts, oracle.steps, oracle.seed).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Delta-homogeneity verdict for each ratio x2/x1 in a range.
    Phase {
        ratio_min: f64,
        ratio_max: f64,
        steps: usize,
        #[arg(long)]
        oracle_restarts: Option<u32>,
        #[arg(long)]
        oracle_steps: Option<u32>,
        #[arg(long)]
        oracle_seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Roots { family, rank, out } => cmd_roots(&family, rank, out.as_ref()),
        Command::Check {
            space,
            x1,
            x2,
            ratio,
            checks,
            all,
            strict,
            oracle_restarts,
            oracle_steps,
            oracle_seed,
            config,
            out,
            format,
        } => {
            let file_config = match config.as_deref().map(load_config).transpose() {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(EXIT_USAGE as u8);
                }
            };
            let (x1, x2) = match (ratio, x2) {
                (Some(r), None) => (1.0, r),
                (None, Some(x2)) => (x1, x2),
                _ => {
                    eprintln!("specify --x2 (with optional --x1) or --ratio");
                    return ExitCode::from(EXIT_USAGE as u8);
                }
            };
            let params = match MetricParams::new(x1, x2) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(EXIT_USAGE as u8);
                }
            };
            let check_ids = if all {
                CheckId::all()
            } else {
                let mut ids = Vec::new();
                for name in &checks {
                    match CheckId::parse(name) {
                        Some(id) => ids.push(id),
                        None => {
                            eprintln!("unknown check '{name}'");
                            return ExitCode::from(EXIT_USAGE as u8);
                        }
                    }
                }
                ids
            };
            let Some(format) = OutputFormat::parse(&format) else {
                eprintln!("unknown format '{format}'");
                return ExitCode::from(EXIT_USAGE as u8);
            };
            cmd_check(&RunConfig {
                space,
                params,
                checks: check_ids,
                oracle: resolve_budget(
                    file_config.as_ref(),
                    oracle_restarts,
                    oracle_steps,
                    oracle_seed,
                ),
                strict,
                out,
                format,
            })
        }
        Command::Phase {
            ratio_min,
            ratio_max,
            steps,
            oracle_restarts,
            oracle_steps,
            oracle_seed,
            config,
            out,
            format,
        } => {
            let file_config = match config.as_deref().map(load_config).transpose() {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(EXIT_USAGE as u8);
                }
            };
            let Some(format) = OutputFormat::parse(&format) else {
                eprintln!("unknown format '{format}'");
                return ExitCode::from(EXIT_USAGE as u8);
            };
            let budget = resolve_budget(
                file_config.as_ref(),
                oracle_restarts,
                oracle_steps,
                oracle_seed,
            );
            cmd_phase(ratio_min, ratio_max, steps, &budget, out.as_ref(), format)
        }
    };
    ExitCode::from(code as u8)
}
