//! Scenario configuration files.
//!
//! A file names either a builtin scenario or gives one inline:
//!
//! ```toml
//! seed = 42
//! builtin = "cauchy-mix"
//! ```
//!
//! ```toml
//! seed = 42
//!
//! [scenario]
//! name = "cauchy-scales"
//! norming = { alpha = 1.0 }
//! criteria = ["cauchy_mixture"]
//!
//! [scenario.law]
//! base = { kind = "cauchy", location = 0.0, scale = 1.0 }
//! ```
//!
//! The `[scenario]` table takes every field of `ScenarioConfig` except
//! `seed`. The seed is resolved from `--seed`, then `EXCLT_SEED`, then the
//! file.

use std::path::Path;

use exclt_core::{builtin, ScenarioConfig, BUILTIN_SCENARIOS};
use serde::Deserialize;

use crate::CliError;

pub const SEED_ENV: &str = "EXCLT_SEED";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    seed: Option<u64>,
    builtin: Option<String>,
    scenario: Option<toml::Table>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// `--seed`, then the environment, then the file.
pub fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Ok(raw) = std::env::var(SEED_ENV) {
        return raw
            .trim()
            .parse()
            .map_err(|_| config_err(format!("{SEED_ENV}=`{raw}` is not an unsigned integer")));
    }
    file.ok_or_else(|| {
        config_err(format!(
            "no seed: set `seed` in the config, pass --seed or set {SEED_ENV}"
        ))
    })
}

fn builtin_config(name: &str, seed: u64) -> Result<ScenarioConfig, CliError> {
    builtin(name, seed).ok_or_else(|| {
        config_err(format!(
            "unknown builtin scenario `{name}`; known: {}",
            BUILTIN_SCENARIOS.join(", ")
        ))
    })
}

// 1-based line of the first `key =` or `[...key]` after the `[scenario` header
fn locate(src: &str, path: &str) -> Option<usize> {
    let key = path
        .rsplit('.')
        .find(|s| !s.is_empty() && !s.starts_with('['))?;
    let start = src
        .lines()
        .position(|l| l.trim_start().starts_with("[scenario"))?;
    src.lines().enumerate().skip(start).find_map(|(i, l)| {
        let l = l.trim_start();
        let assigns = l
            .strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='));
        let header = l.starts_with('[') && l.trim_end().trim_end_matches(']').ends_with(key);
        (assigns || header).then_some(i + 1)
    })
}

/// Parse and validate a config file's text.
pub fn parse(src: &str, seed_flag: Option<u64>) -> Result<ScenarioConfig, CliError> {
    let file: ConfigFile = toml::from_str(src).map_err(|e| config_err(e.to_string()))?;
    let seed = resolve_seed(seed_flag, file.seed)?;
    let config = match (file.builtin, file.scenario) {
        (Some(name), None) => builtin_config(&name, seed)?,
        (None, Some(mut table)) => {
            if table.contains_key("seed") {
                return Err(config_err(
                    "`seed` belongs at the top level, not in [scenario]",
                ));
            }
            table.insert("seed".into(), toml::Value::Integer(seed as i64));
            serde_path_to_error::deserialize::<_, ScenarioConfig>(toml::Value::Table(table))
                .map_err(|e| {
                    let path = e.path().to_string();
                    let msg = e.inner().to_string();
                    // unknown keys are not part of the recorded path
                    let key = msg
                        .split_once("unknown field `")
                        .and_then(|(_, rest)| rest.split_once('`'))
                        .map(|(k, _)| k.to_string())
                        .unwrap_or_else(|| path.clone());
                    let line = locate(src, &key)
                        .map(|l| format!(" (line {l})"))
                        .unwrap_or_default();
                    config_err(format!("scenario.{path}{line}: {}", e.into_inner()))
                })?
        }
        (Some(_), Some(_)) => {
            return Err(config_err("give either `builtin` or [scenario], not both"))
        }
        (None, None) => {
            return Err(config_err(
                "the config needs `builtin` or a [scenario] table",
            ))
        }
    };
    config.validate()?;
    Ok(config)
}

/// The scenario named by `--config` or `--scenario`.
pub fn load(
    path: Option<&Path>,
    scenario: Option<&str>,
    seed_flag: Option<u64>,
) -> Result<ScenarioConfig, CliError> {
    match (path, scenario) {
        (Some(p), None) => {
            let src = std::fs::read_to_string(p)
                .map_err(|e| config_err(format!("cannot read {}: {e}", p.display())))?;
            parse(&src, seed_flag).map_err(|e| match e {
                CliError::Config(m) => config_err(format!("{}: {m}", p.display())),
                other => other,
            })
        }
        (None, Some(name)) => {
            let config = builtin_config(name, resolve_seed(seed_flag, None)?)?;
            config.validate()?;
            Ok(config)
        }
        (Some(_), Some(_)) => Err(config_err("give either --config or --scenario, not both")),
        (None, None) => Err(config_err("give --config PATH or --scenario NAME")),
    }
}
