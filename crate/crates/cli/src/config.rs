//! Flat key=value run configuration: one pair per line, `#` comments, unknown
//! keys rejected per command. Every command echoes the fully resolved
//! configuration (defaults filled in) to `resolved.cfg` so a run can be
//! reproduced byte-for-byte from its own artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::CliError;

/// Raw parsed configuration: insertion-independent ordered map.
#[derive(Debug, Default)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_str(&text, &path.display().to_string())
    }

    pub fn from_str(text: &str, origin: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!(
                    "{origin} line {}: expected key=value, got \"{line}\"",
                    idx + 1
                ))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(CliError::Config(format!(
                    "{origin} line {}: empty key",
                    idx + 1
                )));
            }
            if values.insert(key.clone(), value).is_some() {
                return Err(CliError::Config(format!(
                    "{origin} line {}: duplicate key \"{key}\"",
                    idx + 1
                )));
            }
        }
        Ok(Self { values })
    }

    /// Rejects any key outside the command's vocabulary, naming the offender.
    pub fn restrict(&self, command: &str, allowed: &[&str]) -> Result<(), CliError> {
        for key in self.values.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(CliError::Config(format!(
                    "unknown config key \"{key}\" for {command} (allowed: {})",
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn str_or(&self, key: &str, default: &str) -> String {
        self.values
            .get(key)
            .cloned()
            .unwrap_or_else(|| default.to_string())
    }

    pub fn require(&self, key: &str) -> Result<String, CliError> {
        self.values
            .get(key)
            .cloned()
            .ok_or_else(|| CliError::Config(format!("missing required config key \"{key}\"")))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, CliError> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v.parse::<u64>().map_err(|_| {
                CliError::Config(format!("key \"{key}\": invalid integer \"{v}\""))
            }),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v.parse::<usize>().map_err(|_| {
                CliError::Config(format!("key \"{key}\": invalid integer \"{v}\""))
            }),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => parse_f64(key, v),
        }
    }

    /// `auto` (or absence) defers the value to a data-dependent default.
    pub fn auto_or_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.values.get(key).map(|s| s.as_str()) {
            None | Some("auto") => Ok(None),
            Some(v) => parse_f64(key, v).map(Some),
        }
    }

    pub fn auto_or_usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        match self.values.get(key).map(|s| s.as_str()) {
            None | Some("auto") => Ok(None),
            Some(v) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| CliError::Config(format!("key \"{key}\": invalid integer \"{v}\""))),
        }
    }

    pub fn usize_list_or(&self, key: &str, default: &[usize]) -> Result<Vec<usize>, CliError> {
        match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|part| {
                    part.trim().parse::<usize>().map_err(|_| {
                        CliError::Config(format!(
                            "key \"{key}\": invalid integer list entry \"{}\"",
                            part.trim()
                        ))
                    })
                })
                .collect(),
        }
    }

    pub fn f64_list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|part| parse_f64(key, part.trim()))
                .collect(),
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    let parsed = v
        .parse::<f64>()
        .map_err(|_| CliError::Config(format!("key \"{key}\": invalid number \"{v}\"")))?;
    if !parsed.is_finite() {
        return Err(CliError::Config(format!(
            "key \"{key}\": value must be finite, got \"{v}\""
        )));
    }
    Ok(parsed)
}

/// A positive, finite regularization strength; zero is rejected up front.
pub fn require_positive(key: &str, value: f64) -> Result<f64, CliError> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(CliError::Config(format!(
            "key \"{key}\": must be > 0, got {value}"
        )));
    }
    Ok(value)
}

/// The resolved-configuration echo: every key the command consulted, with the
/// value actually used, plus free-form metadata comments. Re-running the same
/// command with this file as `--config` reproduces the outputs byte-for-byte.
pub struct ResolvedConfig {
    command: String,
    entries: Vec<(String, String)>,
    notes: Vec<String>,
}

impl ResolvedConfig {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            entries: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl std::fmt::Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn set_opt_f64(&mut self, key: &str, value: Option<f64>) {
        match value {
            Some(v) => self.set(key, v),
            None => self.set(key, "auto"),
        }
    }

    /// Data-dependent quantities recorded for the run record; comments do not
    /// participate in parsing, so the echo stays a valid config.
    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# resolved configuration for `{}`", self.command);
        let mut entries = self.entries.clone();
        entries.sort();
        for (k, v) in &entries {
            let _ = writeln!(out, "{k}={v}");
        }
        for note in &self.notes {
            let _ = writeln!(out, "# {note}");
        }
        out
    }

    pub fn write(&self, out_dir: &Path) -> Result<(), CliError> {
        let path = out_dir.join("resolved.cfg");
        std::fs::write(&path, self.render())
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
    }
}
