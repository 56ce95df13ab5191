//! `key=value` settings gathered from a config file and the command line.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::solver::log_grid;

/// Resolved settings for one command. Later sources override earlier ones;
/// every key must belong to the command's vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    command: String,
    allowed: &'static [&'static str],
    values: BTreeMap<String, String>,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

impl ExperimentConfig {
    pub fn new(command: &str, allowed: &'static [&'static str]) -> Self {
        Self {
            command: command.to_string(),
            allowed,
            values: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !self.allowed.contains(&key) {
            return Err(usage(format!(
                "unknown key `{key}` for {}; expected one of: {}",
                self.command,
                self.allowed.join(", ")
            )));
        }
        self.values
            .insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    /// Sets `key=value` tokens, one per entry.
    pub fn set_pairs<'a>(&mut self, pairs: impl IntoIterator<Item = &'a str>) -> Result<()> {
        for p in pairs {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| usage(format!("expected key=value, got `{p}`")))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    /// Reads a config file: one `key=value` per line, blank lines and lines
    /// starting with `#` ignored.
    pub fn merge_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected key=value, got `{line}`")))?;
            self.set(k.trim(), v)
                .map_err(|e| parse_err(e.to_string()))?;
        }
        Ok(())
    }

    /// Fills `key` with `value` unless already set.
    pub fn default(&mut self, key: &str, value: impl fmt::Display) {
        debug_assert!(self.allowed.contains(&key), "default for unknown key {key}");
        self.values
            .entry(key.to_string())
            .or_insert_with(|| value.to_string());
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn str(&self, key: &str) -> Result<&str> {
        self.raw(key)
            .ok_or_else(|| usage(format!("missing required key `{key}`")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        let s = self.str(key)?;
        s.parse()
            .map_err(|e| usage(format!("bad value `{s}` for `{key}`: {e}")))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>>
    where
        T::Err: fmt::Display,
    {
        let s = self.str(key)?;
        s.split(',')
            .filter(|x| !x.trim().is_empty())
            .map(|x| {
                x.trim()
                    .parse()
                    .map_err(|e| usage(format!("bad entry `{x}` in `{key}`: {e}")))
            })
            .collect()
    }

    /// A grid given either as a comma list or as `log:lo:hi:n`.
    pub fn grid(&self, key: &str) -> Result<Vec<f64>> {
        let s = self.str(key)?;
        if let Some(spec) = s.strip_prefix("log:") {
            let parts: Vec<&str> = spec.split(':').collect();
            let bad = || usage(format!("`{key}` must look like log:lo:hi:n, got `{s}`"));
            if parts.len() != 3 {
                return Err(bad());
            }
            let lo: f64 = parts[0].parse().map_err(|_| bad())?;
            let hi: f64 = parts[1].parse().map_err(|_| bad())?;
            let n: usize = parts[2].parse().map_err(|_| bad())?;
            if !(lo > 0.0 && hi >= lo && n >= 1) {
                return Err(bad());
            }
            return Ok(log_grid(lo, hi, n));
        }
        let v: Vec<f64> = self.list(key)?;
        if v.is_empty() {
            return Err(usage(format!("`{key}` is empty")));
        }
        Ok(v)
    }

    /// `# boxnorm <command> key=value ...`, listing every resolved key.
    /// Passing the tokens after `#` back to the binary reproduces the run.
    pub fn echo(&self) -> String {
        let mut s = format!("# boxnorm {}", self.command);
        for (k, v) in &self.values {
            s.push(' ');
            s.push_str(k);
            s.push('=');
            s.push_str(v);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const KEYS: &[&str] = &["seed", "grid", "name"];

    #[test]
    fn unknown_key_rejected() {
        let mut c = ExperimentConfig::new("demo", KEYS);
        assert!(c.set("sede", "1").is_err());
    }

    #[test]
    fn later_values_override() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.cfg");
        std::fs::write(&path, "# comment\nseed=3\n\nname = x\n").unwrap();
        let mut c = ExperimentConfig::new("demo", KEYS);
        c.merge_file(&path).unwrap();
        c.set_pairs(["seed=7"]).unwrap();
        c.default("seed", 1);
        assert_eq!(c.get::<u64>("seed").unwrap(), 7);
        assert_eq!(c.str("name").unwrap(), "x");
        assert_eq!(c.echo(), "# boxnorm demo name=x seed=7");
    }

    #[test]
    fn bad_file_line_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.cfg");
        std::fs::write(&path, "seed=1\nnonsense\n").unwrap();
        let mut c = ExperimentConfig::new("demo", KEYS);
        match c.merge_file(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn grids() {
        let mut c = ExperimentConfig::new("demo", KEYS);
        c.set("grid", "log:1:100:3").unwrap();
        let g = c.grid("grid").unwrap();
        assert_eq!(g.len(), 3);
        assert!((g[1] - 10.0).abs() < 1e-12);
        c.set("grid", "0.5, 2").unwrap();
        assert_eq!(c.grid("grid").unwrap(), vec![0.5, 2.0]);
        c.set("grid", "log:0:1:3").unwrap();
        assert!(c.grid("grid").is_err());
    }
}
