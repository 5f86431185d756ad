//! `qcs`: command-line driver for layout search, simulation, decoding and compilation.
//!
//! Exit codes: 0 success, 2 usage error, 3 domain error, 4 numerical non-convergence.

mod args;
mod commands;
mod error;
mod output;

use args::{Cli, Command};
use clap::Parser;
use error::CliError;
use output::Inputs;
use std::process::ExitCode;

fn run(cli: &Cli) -> Result<(), CliError> {
    commands::check_paths(cli)?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let mut inputs = Inputs::default();
    let out = match &cli.command {
        Command::Layout(a) => commands::layout(a),
        Command::Synth(a) => commands::synth(a),
        Command::Simulate(a) => commands::simulate(a, cli.seed),
        Command::Threshold(a) => commands::threshold(a, cli.seed),
        Command::DecodeTable(a) => commands::decode_table(a),
        Command::Compile(a) => commands::compile_cmd(a, cli.seed, &mut inputs),
        Command::Evaluate(a) => commands::evaluate_cmd(a, cli.seed, &mut inputs),
        Command::Bench(a) => commands::bench(a),
    }?;
    let rendered = out.render(cli.format, cli, &inputs)?;
    output::write(cli.out.as_deref(), &rendered)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
