//! Layering of built-in defaults, the config file and command-line flags.

use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::parser::ValueSource;
use clap::ArgMatches;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use gazekde::formats::read_file;

pub fn load(path: &Path) -> Result<Map<String, Value>> {
    let bytes = read_file(path)?;
    let value: Value = serde_json::from_slice(&bytes)
        .map_err(|e| gazekde::Error::Format(format!("{}: {e}", path.display())))?;
    match value {
        Value::Object(map) => Ok(map),
        _ => bail!(gazekde::Error::Format(format!(
            "{}: config must be a JSON object",
            path.display()
        ))),
    }
}

/// Overrides every setting the user did not give on the command line with the
/// config section's value, if present.
pub fn apply<T: Clone + Serialize + DeserializeOwned>(
    args: &T,
    section: Option<&Value>,
    matches: &ArgMatches,
    command: &str,
) -> Result<T> {
    let Some(section) = section else {
        return Ok(args.clone());
    };
    let Value::Object(section) = section else {
        bail!(gazekde::Error::Validation(format!(
            "config section `{command}` must be an object"
        )));
    };
    let Value::Object(mut merged) = serde_json::to_value(args)? else {
        unreachable!("argument structs serialise to objects");
    };
    for (key, value) in section {
        if !merged.contains_key(key) {
            bail!(gazekde::Error::Validation(format!(
                "config `{command}`: unknown setting `{key}`"
            )));
        }
        if matches.value_source(key) != Some(ValueSource::CommandLine) {
            merged.insert(key.clone(), value.clone());
        }
    }
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| gazekde::Error::Validation(format!("config `{command}`: {e}")))
        .context("invalid config")
}
