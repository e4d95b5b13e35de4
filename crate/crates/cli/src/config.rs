use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// `key=value` lines; blank lines and `#` comments are skipped. Keys are
/// normalized so `omega_scale` and `omega-scale` are the same.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value, got `{line}`", no + 1)))?;
        map.insert(normalize(key), value.trim().to_string());
    }
    Ok(map)
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

fn normalize(key: &str) -> String {
    key.trim().replace('_', "-")
}

/// Resolves each parameter as flag, else config entry, else default, and
/// records the outcome.
pub struct Resolver {
    config: BTreeMap<String, String>,
    resolved: Vec<(String, String)>,
}

impl Resolver {
    pub fn new(config: BTreeMap<String, String>) -> Self {
        Self { config, resolved: Vec::new() }
    }

    pub fn take<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let from_config = self.config.remove(key);
        let value = match (flag, from_config) {
            (Some(v), _) => v,
            (None, Some(text)) => text.parse().map_err(|e| CliError::Usage(format!("config key `{key}`: {e}")))?,
            (None, None) => default,
        };
        self.resolved.push((key.to_string(), value.to_string()));
        Ok(value)
    }

    /// Resolved pairs in declaration order; fails on config keys that no
    /// parameter consumed.
    pub fn finish(self) -> Result<Vec<(String, String)>, CliError> {
        if let Some(key) = self.config.keys().next() {
            return Err(CliError::Usage(format!("unknown config key `{key}`")));
        }
        Ok(self.resolved)
    }
}
