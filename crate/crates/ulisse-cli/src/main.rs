//! `ulisse` — command-line surface for the variable-length data-series
//! search engine: dataset generation, index build, query execution,
//! oracle verification, and benchmark reporting.
//!
//! Exit codes: 0 on success, 1 on contract violations (bad flags, bad
//! files, mismatched configuration, failed verification), 2 on internal
//! errors.

mod cmd_bench;
mod cmd_build;
mod cmd_generate;
mod cmd_query;
mod cmd_verify;
mod common;

use clap::Parser;
use ulisse_core::Error;

#[derive(Parser)]
#[command(
    name = "ulisse",
    version,
    about = "Single-index similarity search over data-series collections \
             with variable query length"
)]
enum Cli {
    Generate(cmd_generate::Args),
    Build(cmd_build::Args),
    Query(cmd_query::Args),
    Verify(cmd_verify::Args),
    Bench(cmd_bench::Args),
}

/// Contract errors (anything the caller can fix) exit 1; internal errors
/// exit 2.
fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) => 2,
        _ => 1,
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if e.exit_code() == 0 {
                // --help / --version.
                print!("{e}");
                std::process::exit(0);
            }
            let first_line = e.to_string();
            let first_line = first_line.lines().next().unwrap_or("bad usage");
            eprintln!("{first_line}");
            std::process::exit(1);
        }
    };
    let outcome = std::panic::catch_unwind(|| match cli {
        Cli::Generate(a) => cmd_generate::run(&a),
        Cli::Build(a) => cmd_build::run(&a),
        Cli::Query(a) => cmd_query::run(&a),
        Cli::Verify(a) => cmd_verify::run(&a),
        Cli::Bench(a) => cmd_bench::run(&a),
    });
    match outcome {
        Ok(Ok(())) => {}
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
        Err(_) => {
            eprintln!("error: internal failure (panic)");
            std::process::exit(2);
        }
    }
}
