use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use moment_cert::config::{OutputFormat, RunConfig};
use moment_cert::run::run;

/// Certified bounds on the distance between moments of sums of independent
/// variables and Gaussian moments.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured output format.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut config = match RunConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("moment-cert: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(format) = args.format {
        config.output_format = format;
    }
    if let Some(out) = args.out {
        config.output_path = Some(out);
    }
    if let Ok(threads) = std::env::var("MOMENT_CERT_THREADS") {
        match threads.parse::<usize>() {
            Ok(t) if t > 0 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build_global();
            }
            _ => {
                eprintln!(
                    "moment-cert: MOMENT_CERT_THREADS must be a positive integer, got {threads:?}"
                );
                return ExitCode::from(2);
            }
        }
    }

    let doc = match run(&config) {
        Ok(doc) => doc,
        Err(e) => {
            eprintln!("moment-cert: {e}");
            return ExitCode::from(2);
        }
    };
    let text = match doc.render(config.output_format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("moment-cert: {e}");
            return ExitCode::from(2);
        }
    };
    let written = match &config.output_path {
        Some(path) => std::fs::write(path, text.as_bytes()),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("moment-cert: writing output: {e}");
        return ExitCode::from(2);
    }
    if doc.summary.passed {
        ExitCode::SUCCESS
    } else {
        eprintln!("moment-cert: {} check(s) failed", doc.summary.failures);
        ExitCode::from(1)
    }
}
