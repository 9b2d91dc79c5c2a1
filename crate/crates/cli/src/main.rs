mod args;
mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use args::{Cli, Command};
use config::Parsed;
use error::CliError;
use output::{sha256_hex, Manifest, Sink};

fn run(cli: &Cli) -> Result<(), CliError> {
    let input_path = match &cli.command {
        Command::Ingest(a) => Some(&a.input),
        Command::Diagnose(a) => Some(&a.input),
        Command::Fit(a) => Some(&a.input),
        Command::Compare(a) => Some(&a.input),
        Command::Simulate(_) | Command::Predict(_) => None,
    };
    let input = input_path.map(|p| commands::read_input(p)).transpose()?;
    let config = serde_json::to_value(cli).expect("config serializes");
    let manifest = Manifest {
        command: cli.command.name().to_string(),
        config_digest: sha256_hex(config.to_string().as_bytes()),
        seed: cli.seed,
        input_digest: input.as_deref().map(sha256_hex).unwrap_or_default(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let sink = Sink::new(&cli.out_dir, manifest, config)?;
    let bytes = input.as_deref().unwrap_or_default();
    match &cli.command {
        Command::Ingest(a) => commands::ingest(a, bytes, &sink),
        Command::Diagnose(a) => commands::diagnose_cmd(a, bytes, &sink),
        Command::Fit(a) => commands::fit(a, bytes, cli.seed, &sink),
        Command::Compare(a) => commands::compare(a, bytes, cli.seed, &sink),
        Command::Simulate(a) => commands::simulate(a, cli.seed, &sink),
        Command::Predict(a) => commands::predict(a, &sink),
    }?;
    sink.echo_config()
}

fn main() -> ExitCode {
    let cli = match config::parse(std::env::args_os().collect()) {
        Ok(Parsed::Run(cli)) => cli,
        Ok(Parsed::Clap(e)) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = match cli.threads {
        None => run(&cli),
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&cli)),
            Err(e) => Err(CliError::Usage(format!("cannot start {n} threads: {e}"))),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
