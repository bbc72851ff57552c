//! Resolving a configuration from a TOML file, `key=value` overrides and flags.

use std::path::Path;

use ris_mimo::SystemConfig;

use crate::CliError;

/// Renders a TOML value in the textual form [`SystemConfig::set`] parses.
fn toml_to_text(key: &str, value: &toml::Value) -> Result<String, CliError> {
    Ok(match value {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) => {
            if f.is_infinite() {
                "inf".to_string()
            } else {
                format!("{f:?}")
            }
        }
        toml::Value::Boolean(b) => b.to_string(),
        toml::Value::Array(items) => {
            let parts = items.iter().map(|v| toml_to_text(key, v)).collect::<Result<Vec<_>, _>>()?;
            format!("[{}]", parts.join(", "))
        }
        other => {
            return Err(CliError::Config(format!("`{key}` has unsupported type {}", other.type_str())));
        }
    })
}

/// Applies every key of a flat TOML document to `cfg`.
pub fn apply_toml(cfg: &mut SystemConfig, text: &str) -> Result<(), CliError> {
    let table: toml::Table = text.parse().map_err(|e| CliError::Config(format!("{e}")))?;
    for (key, value) in &table {
        cfg.set(key, &toml_to_text(key, value)?)?;
    }
    Ok(())
}

/// Splits `key=value`.
pub fn parse_assignment(text: &str) -> Result<(String, String), CliError> {
    let (k, v) =
        text.split_once('=').ok_or_else(|| CliError::Config(format!("`{text}` is not of the form key=value")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Defaults, then the file, then each override in order, then the seed flag.
pub fn resolve(file: Option<&Path>, overrides: &[String], seed: Option<u64>) -> Result<SystemConfig, CliError> {
    let mut cfg = SystemConfig::default();
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        apply_toml(&mut cfg, &text)?;
    }
    for item in overrides {
        let (k, v) = parse_assignment(item)?;
        cfg.set(&k, &v)?;
    }
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}
