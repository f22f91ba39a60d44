//! Experiment harness for the nyskit toolkit: kernel approximation sweeps,
//! kernel ridge regression sweeps, and landmark inspection.
//!
//! Exit codes: 0 success, 1 configuration error, 2 data error, 3 numerical
//! failure.

mod args;
mod exec;

use clap::Parser;

fn main() {
    let cli = match args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help/version requests are not errors
            use clap::error::ErrorKind;
            let kind = err.kind();
            let _ = err.print();
            if matches!(kind, ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                std::process::exit(0);
            }
            std::process::exit(1);
        }
    };
    let outcome = match cli.command {
        args::Command::Approx(a) => exec::run_approx(a),
        args::Command::Krr(a) => exec::run_krr(a),
        args::Command::Landmarks(a) => exec::run_landmarks(a),
    };
    if let Err(err) = outcome {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
