//! Resolved run configuration.
//!
//! Values come from the subcommand defaults, then an optional flat
//! `key = value` file, then command-line flags, each layer overriding the last.
//! Keys are flag names with `-` replaced by `_`.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

/// Parses a `key = value` file. `#` starts a comment line; blank lines are skipped.
pub fn parse_config(text: &str) -> CliResult<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::input(format!("config line {}: expected `key = value`", i + 1)))?;
        let key = normalise_key(k);
        if key.is_empty() {
            return Err(CliError::input(format!("config line {}: empty key", i + 1)));
        }
        out.push((i + 1, key, v.trim().to_string()));
    }
    Ok(out)
}

fn normalise_key(k: &str) -> String {
    k.trim().to_ascii_lowercase().replace('-', "_")
}

impl Settings {
    /// `defaults` lists every accepted key; `None` means no default.
    pub fn resolve(
        defaults: &[(&str, Option<&str>)],
        file: Option<&str>,
        flags: &[(&str, Option<String>)],
    ) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for (k, v) in defaults {
            if let Some(v) = v {
                values.insert(k.to_string(), v.to_string());
            }
        }
        if let Some(text) = file {
            let mut seen = BTreeMap::new();
            for (line, key, value) in parse_config(text)? {
                if !defaults.iter().any(|(k, _)| *k == key) {
                    return Err(CliError::input(format!("config line {line}: unknown key '{key}'")));
                }
                if let Some(prev) = seen.insert(key.clone(), line) {
                    return Err(CliError::input(format!(
                        "config line {line}: key '{key}' already set on line {prev}"
                    )));
                }
                values.insert(key, value);
            }
        }
        for (k, v) in flags {
            debug_assert!(defaults.iter().any(|(d, _)| d == k), "flag {k} has no default entry");
            if let Some(v) = v {
                values.insert(k.to_string(), v.clone());
            }
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> CliResult<&str> {
        self.get(key)
            .ok_or_else(|| CliError::input(format!("missing required setting '{key}'")))
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> CliResult<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.require(key)?;
        raw.parse()
            .map_err(|e| CliError::input(format!("{key} = '{raw}': {e}")))
    }

    pub fn parse_opt<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(_) => self.parse(key).map(Some),
        }
    }

    /// Comma-separated list of numbers.
    pub fn list_f64(&self, key: &str) -> CliResult<Vec<f64>> {
        let raw = self.require(key)?;
        raw.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| CliError::input(format!("{key} = '{raw}': {e}")))
            })
            .collect()
    }

    pub fn seed(&self) -> CliResult<u64> {
        self.parse("seed")
    }

    /// Every resolved value except the seed, in key order.
    pub fn echo(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values
            .iter()
            .filter(|(k, _)| k.as_str() != "seed")
            .map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEFAULTS: &[(&str, Option<&str>)] = &[("n", Some("1000")), ("seed", Some("0")), ("params", None)];

    #[test]
    fn flags_override_file_override_defaults() {
        let file = "# design\nn = 200\n\nseed=5\n";
        let s = Settings::resolve(DEFAULTS, Some(file), &[("n", Some("300".into())), ("seed", None)]).unwrap();
        assert_eq!(s.get("n"), Some("300"));
        assert_eq!(s.seed().unwrap(), 5);
        assert_eq!(s.get("params"), None);
    }

    #[test]
    fn unknown_and_duplicate_keys_name_their_line() {
        let e = Settings::resolve(DEFAULTS, Some("n = 1\nbogus = 2\n"), &[]).unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        let e = Settings::resolve(DEFAULTS, Some("n = 1\nN = 2\n"), &[]).unwrap_err();
        assert!(e.to_string().contains("already set on line 1"), "{e}");
        let e = Settings::resolve(DEFAULTS, Some("n 1\n"), &[]).unwrap_err();
        assert!(e.to_string().contains("line 1"), "{e}");
    }

    #[test]
    fn dashes_in_keys_are_normalised() {
        let s = Settings::resolve(&[("k_star", Some("3"))], Some("K-Star = 7"), &[]).unwrap();
        assert_eq!(s.parse::<usize>("k_star").unwrap(), 7);
    }

    #[test]
    fn echo_skips_seed_and_is_sorted() {
        let s = Settings::resolve(DEFAULTS, None, &[("params", Some("1,2".into()))]).unwrap();
        let keys: Vec<&str> = s.echo().map(|(k, _)| k).collect();
        assert_eq!(keys, ["n", "params"]);
    }

    #[test]
    fn list_parsing_reports_the_key() {
        let s = Settings::resolve(&[("levels", Some("0.9, 0.95"))], None, &[]).unwrap();
        assert_eq!(s.list_f64("levels").unwrap(), [0.9, 0.95]);
        let s = Settings::resolve(&[("levels", Some("0.9,x"))], None, &[]).unwrap();
        assert!(s.list_f64("levels").unwrap_err().to_string().contains("levels"));
    }
}
