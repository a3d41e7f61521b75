//! Flat `key = value` configuration with per-command sections.
//!
//! Keys before any section header apply to every command; keys under `[name]` apply only
//! to command `name`. Later sources override earlier ones: file globals, file section,
//! then `--seed`, `--workers` and `--set` pairs in order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

pub fn parse_file(text: &str, command: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut global = BTreeMap::new();
    let mut section = BTreeMap::new();
    let mut current: Option<String> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| CliError::Config(format!("line {}: unterminated section header", lineno + 1)))?;
            current = Some(name.trim().to_string());
            continue;
        }
        let (k, v) = split_pair(line).map_err(|e| CliError::Config(format!("line {}: {e}", lineno + 1)))?;
        match current.as_deref() {
            None => {
                global.insert(k, v);
            }
            Some(c) if c == command => {
                section.insert(k, v);
            }
            Some(_) => {}
        }
    }
    global.extend(section);
    Ok(global)
}

pub fn split_pair(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key = value, got {s:?}"))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(format!("empty key in {s:?}"));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

/// Raw settings for one command, recording every value it hands out (defaults included).
#[derive(Debug, Default)]
pub struct Settings {
    raw: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl Settings {
    pub fn load(
        config: Option<&Path>,
        command: &str,
        overrides: &[String],
    ) -> Result<Self, CliError> {
        let mut raw = match config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                parse_file(&text, command)?
            }
            None => BTreeMap::new(),
        };
        for s in overrides {
            let (k, v) = split_pair(s).map_err(CliError::Config)?;
            raw.insert(k, v);
        }
        Ok(Self {
            raw,
            resolved: BTreeMap::new(),
        })
    }

    #[cfg(test)]
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Self {
            raw: pairs.into_iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            resolved: BTreeMap::new(),
        }
    }

    pub fn string(&mut self, key: &str, default: &str) -> String {
        let v = self.raw.get(key).cloned().unwrap_or_else(|| default.to_string());
        self.resolved.insert(key.to_string(), v.clone());
        v
    }

    pub fn get<T>(&mut self, key: &str, default: T) -> Result<T, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        match self.raw.get(key) {
            Some(v) => {
                let parsed = v
                    .parse::<T>()
                    .map_err(|e| CliError::Config(format!("{key} = {v:?}: {e}")))?;
                self.resolved.insert(key.to_string(), v.clone());
                Ok(parsed)
            }
            None => {
                self.resolved.insert(key.to_string(), default.to_string());
                Ok(default)
            }
        }
    }

    pub fn optional<T>(&mut self, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.raw.get(key) {
            Some(v) => {
                let parsed = v
                    .parse::<T>()
                    .map_err(|e| CliError::Config(format!("{key} = {v:?}: {e}")))?;
                self.resolved.insert(key.to_string(), v.clone());
                Ok(Some(parsed))
            }
            None => {
                self.resolved.insert(key.to_string(), "none".into());
                Ok(None)
            }
        }
    }

    /// Comma-separated list.
    pub fn list<T>(&mut self, key: &str, default: &str) -> Result<Vec<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        let v = self.string(key, default);
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<T>().map_err(|e| CliError::Config(format!("{key}: {s:?}: {e}"))))
            .collect()
    }

    /// Fails on keys that no part of the command read.
    pub fn finish(self) -> Result<BTreeMap<String, String>, CliError> {
        let read: BTreeSet<&String> = self.resolved.keys().collect();
        let unknown: Vec<&String> = self.raw.keys().filter(|k| !read.contains(k)).collect();
        if !unknown.is_empty() {
            return Err(CliError::Config(format!("unknown keys: {unknown:?}")));
        }
        Ok(self.resolved)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_override_globals() {
        let text = "seed = 3\nnu = 0.1\n[simulate]\nnu = 0.01 # smaller\n[sweep]\nnu = 5\n";
        let m = parse_file(text, "simulate").unwrap();
        assert_eq!(m["nu"], "0.01");
        assert_eq!(m["seed"], "3");
        assert_eq!(parse_file(text, "sweep").unwrap()["nu"], "5");
    }

    #[test]
    fn malformed_lines_are_config_errors() {
        assert!(matches!(parse_file("just words", "x"), Err(CliError::Config(_))));
        assert!(matches!(parse_file("[open", "x"), Err(CliError::Config(_))));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut s = Settings::from_pairs([("nu", "0.1"), ("typo", "1")]);
        assert_eq!(s.get("nu", 1.0).unwrap(), 0.1);
        assert!(s.finish().is_err());
    }

    #[test]
    fn defaults_are_recorded() {
        let mut s = Settings::from_pairs([]);
        assert_eq!(s.get("n", 64usize).unwrap(), 64);
        assert_eq!(s.finish().unwrap()["n"], "64");
    }
}
