mod args;
mod commands;
mod config;
mod output;

use std::process::ExitCode;

use anyhow::Result;
use clap::{CommandFactory, FromArgMatches};
use serde::de::DeserializeOwned;
use serde::Serialize;

use args::{Cli, Command};

const EXIT_VALIDATION: u8 = 1;
const EXIT_IO: u8 = 2;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<gazekde::Error>() {
            return if e.is_io() { EXIT_IO } else { EXIT_VALIDATION };
        }
        if cause.is::<std::io::Error>() {
            return EXIT_IO;
        }
    }
    EXIT_VALIDATION
}

/// The error chain, skipping causes whose text is already included.
fn describe(err: &anyhow::Error) -> String {
    let mut msg = err.to_string();
    for cause in err.chain().skip(1) {
        let text = cause.to_string();
        if !msg.contains(&text) {
            msg = format!("{msg}: {text}");
        }
    }
    msg
}

fn settle<T: Clone + Serialize + DeserializeOwned>(
    args: &T,
    cli: &Cli,
    matches: &clap::ArgMatches,
) -> Result<Option<T>> {
    let name = cli.command.name();
    let file = cli.config.as_deref().map(config::load).transpose()?;
    let section = file.as_ref().and_then(|f| f.get(name));
    if let Some(f) = &file {
        if let Some(key) = f.keys().find(|k| !SUBCOMMANDS.contains(&k.as_str())) {
            anyhow::bail!(gazekde::Error::Validation(format!(
                "config: unknown section `{key}`"
            )));
        }
    }
    let (_, sub) = matches.subcommand().expect("subcommand is required");
    let settled = config::apply(args, section, sub, name)?;
    if cli.show_config {
        print!("{}", gazekde::formats::to_json_pretty(&settled));
        return Ok(None);
    }
    Ok(Some(settled))
}

const SUBCOMMANDS: [&str; 8] = [
    "simulate", "ingest", "kde", "boxes", "tile", "eval", "sweep", "timing",
];

fn run(cli: &Cli, matches: &clap::ArgMatches) -> Result<()> {
    macro_rules! dispatch {
        ($args:expr, $run:path) => {
            match settle($args, cli, matches)? {
                Some(a) => $run(&a),
                None => Ok(()),
            }
        };
    }
    match &cli.command {
        Command::Simulate(a) => dispatch!(a, commands::simulate),
        Command::Ingest(a) => dispatch!(a, commands::ingest),
        Command::Kde(a) => dispatch!(a, commands::kde),
        Command::Boxes(a) => dispatch!(a, commands::boxes),
        Command::Tile(a) => dispatch!(a, commands::tile),
        Command::Eval(a) => dispatch!(a, commands::eval),
        Command::Sweep(a) => dispatch!(a, commands::sweep),
        Command::Timing(a) => dispatch!(a, commands::timing),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let parsed = Cli::command()
        .try_get_matches()
        .and_then(|m| Cli::from_arg_matches(&m).map(|cli| (cli, m)));
    let (cli, matches) = match parsed {
        Ok(v) => v,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli, &matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
