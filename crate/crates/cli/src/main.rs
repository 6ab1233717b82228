use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, ValueEnum};
use feigen_core::pipeline::n_for_digits;
use feigen_core::{run, Constant, Error, RunConfig};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Which {
    Alpha,
    Delta,
    Both,
}

impl From<Which> for Constant {
    fn from(w: Which) -> Self {
        match w {
            Which::Alpha => Constant::Alpha,
            Which::Delta => Constant::Delta,
            Which::Both => Constant::Both,
        }
    }
}

/// Compute the Feigenbaum constants α and δ by Chebyshev collocation.
#[derive(Debug, Parser)]
#[command(name = "feigen", version)]
#[command(group(ArgGroup::new("size").required(true).args(["n", "digits"])))]
struct Args {
    /// Number of collocation nodes
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    n: Option<u64>,

    /// Desired digits; picks n = ceil(digits / 1.5) rounded up to a multiple of 8
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    digits: Option<u32>,

    #[arg(long, value_enum, default_value = "both")]
    constant: Which,

    /// Decimal digits of the approximate inverse Jacobian
    #[arg(long)]
    jacobian_digits: Option<u32>,

    #[arg(long)]
    max_icum_iters: Option<usize>,

    /// Finite-difference step exponent (step 10^-e)
    #[arg(long)]
    fd_exp: Option<u32>,

    /// Directory for saving and reusing rung coefficients
    #[arg(long)]
    checkpoint_dir: Option<PathBuf>,

    /// Rerun at n + OFFSET and report matching digits
    #[arg(long, value_name = "OFFSET", num_args = 0..=1, default_missing_value = "16")]
    verify: Option<usize>,

    /// Compare against the superstable-orbit oracle at this cascade depth
    #[arg(long, value_name = "DEPTH")]
    verify_oracle: Option<usize>,

    /// Emit the report as one JSON object
    #[arg(long)]
    json: bool,

    #[arg(long)]
    threads: Option<usize>,

    /// Per-iteration progress on stderr
    #[arg(long)]
    progress: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Checkpoint { .. } => 4,
        e if e.is_numerical() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    env_logger::Builder::new()
        .filter_level(if args.progress { log::LevelFilter::Info } else { log::LevelFilter::Warn })
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();

    let n = match (args.n, args.digits) {
        (Some(n), _) => n as usize,
        (None, Some(d)) => n_for_digits(d),
        (None, None) => unreachable!("clap enforces one of --n/--digits"),
    };
    let cfg = RunConfig {
        n,
        target_digits: None,
        constant: args.constant.into(),
        jacobian_digits: args.jacobian_digits,
        max_icum_iters: args.max_icum_iters,
        fd_step_exponent: args.fd_exp,
        checkpoint_dir: args.checkpoint_dir,
        verify: args.verify,
        verify_oracle: args.verify_oracle,
        threads: args.threads,
    };

    match run(&cfg) {
        Ok(report) => {
            let out = if args.json {
                serde_json::to_string(&report).expect("report serializes") + "\n"
            } else {
                report.to_text()
            };
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(4);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("feigen: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
