use std::path::PathBuf;
use std::process::ExitCode;

use caustica_cli::{parse_h_list, run, Command, JobConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "caustica", version, about = "Semiclassical wave fields from Maslov's canonical operator")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a field on the configured grid and write CSV (and PGM for 2-D slices)
    Eval(Args),
    /// Compare two representations over the h list
    Compare(Args),
    /// Convergence table against the example's closed form
    Sweep(Args),
    /// Maslov index of a path or cycle
    Index(Args),
    /// Run the invariant suites on the example
    Check(Args),
    /// Fourier integral against canonical operator for the Airy phase
    Bridge(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
    /// comma-separated step sizes overriding the config
    #[arg(long)]
    h: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Eval(a) => (Command::Eval, a),
        Cmd::Compare(a) => (Command::Compare, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
        Cmd::Index(a) => (Command::Index, a),
        Cmd::Check(a) => (Command::Check, a),
        Cmd::Bridge(a) => (Command::Bridge, a),
    };
    let result = JobConfig::load(&args.config).and_then(|mut cfg| {
        if let Some(h) = &args.h {
            cfg.h = parse_h_list(h)?;
        }
        run(command, &cfg, &args.out, args.threads)
    });
    match result {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
