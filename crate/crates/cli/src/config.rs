//! `--config` overlay: a flat JSON object keyed by long flag names. Keys
//! not given on the command line are appended as `--key=value` and the
//! arguments are parsed again, so config values go through exactly the
//! same validation as flags.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::parser::ValueSource;
use clap::{ArgAction, ArgMatches, CommandFactory, FromArgMatches};
use serde_json::Value;

use crate::args::Cli;
use crate::error::CliError;

pub enum Parsed {
    Run(Box<Cli>),
    /// `--help`, `--version` or a usage error, already rendered by clap.
    Clap(clap::Error),
}

fn explicit(m: &ArgMatches, id: &str) -> bool {
    m.ids().any(|i| i.as_str() == id) && m.value_source(id) == Some(ValueSource::CommandLine)
}

pub fn parse(mut argv: Vec<OsString>) -> Result<Parsed, CliError> {
    let cmd = Cli::command();
    // First pass with nothing required, since the config may supply it.
    let names: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
    let relaxed = names.iter().fold(cmd.clone(), |c, n| {
        c.mut_subcommand(n, |s| s.mut_args(|a| a.required(false)))
    });
    let matches = match relaxed.try_get_matches_from(&argv) {
        Ok(m) => m,
        Err(e) => return Ok(Parsed::Clap(e)),
    };
    let Some(path) = matches.get_one::<PathBuf>("config").cloned() else {
        return Ok(strict(&argv));
    };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let Value::Object(map) = value else {
        return Err(CliError::Config(format!("{}: expected a JSON object", path.display())));
    };
    let (sub_name, sub_matches) = matches.subcommand().expect("subcommand is required");
    let sub_cmd = cmd.find_subcommand(sub_name).expect("parsed subcommand exists");

    let mut extra = Vec::new();
    for (key, val) in &map {
        match key.as_str() {
            "command" => {
                if val.as_str() != Some(sub_name) {
                    return Err(CliError::Usage(format!(
                        "config is for command {val}, not `{sub_name}`"
                    )));
                }
                continue;
            }
            "manifest" => continue,
            "config" => return Err(CliError::Usage("config files cannot nest".into())),
            _ => {}
        }
        let arg = sub_cmd
            .get_arguments()
            .chain(cmd.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| CliError::Usage(format!("unknown config key `{key}`")))?;
        let id = arg.get_id().as_str();
        if explicit(sub_matches, id) || explicit(&matches, id) {
            continue;
        }
        match (arg.get_action(), val) {
            (_, Value::Null) => {}
            (ArgAction::SetTrue, Value::Bool(b)) => {
                if *b {
                    extra.push(format!("--{key}"));
                }
            }
            (ArgAction::SetTrue, _) => {
                return Err(CliError::Usage(format!("config key `{key}` must be a boolean")));
            }
            (_, Value::String(s)) => extra.push(format!("--{key}={s}")),
            (_, Value::Number(n)) => extra.push(format!("--{key}={n}")),
            (_, other) => {
                return Err(CliError::Usage(format!(
                    "config key `{key}` has unsupported value {other}"
                )));
            }
        }
    }
    argv.extend(extra.into_iter().map(OsString::from));
    Ok(strict(&argv))
}

fn strict(argv: &[OsString]) -> Parsed {
    match Cli::command().try_get_matches_from(argv) {
        Ok(m) => match Cli::from_arg_matches(&m) {
            Ok(cli) => Parsed::Run(Box::new(cli)),
            Err(e) => Parsed::Clap(e),
        },
        Err(e) => Parsed::Clap(e),
    }
}
