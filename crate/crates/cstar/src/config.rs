//! Run configuration: flat `key = value` files, flag overrides, resolved
//! echo lines, and the run manifest with artifact checksums.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

use crate::covering::DEFAULT_DELTA;
use crate::error::{Error, Result};

/// A threshold that is either resolved automatically from a scan or pinned
/// by the user.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum AutoOr {
    Auto,
    Value(f64),
}

impl AutoOr {
    pub fn parse(s: &str) -> Result<Self> {
        if s.trim() == "auto" {
            Ok(AutoOr::Auto)
        } else {
            s.trim()
                .parse::<f64>()
                .map(AutoOr::Value)
                .map_err(|_| Error::Config(format!("expected a number or `auto`, got `{s}`")))
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            AutoOr::Auto => None,
            AutoOr::Value(v) => Some(v),
        }
    }
}

impl std::fmt::Display for AutoOr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AutoOr::Auto => write!(f, "auto"),
            AutoOr::Value(v) => write!(f, "{v}"),
        }
    }
}

/// Reproducible run configuration shared by all subcommands. Flags override
/// file values; `auto` thresholds are resolved by a grid scan before any
/// dependent subcommand runs, and the resolved values are echoed in every
/// report header and manifest.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Config {
    pub map: String,
    pub eps: f64,
    pub delta: f64,
    pub log_r_plus: AutoOr,
    pub log_r_minus: AutoOr,
    pub log_r0: AutoOr,
    pub depth: usize,
    pub budget: usize,
    pub grid: usize,
    pub margin: f64,
    pub tol: f64,
    pub oracle_targets: u32,
    pub seed: u64,
    pub threads: usize,
    pub escape_level: f64,
}

impl Default for Config {
    fn default() -> Self {
        let delta = DEFAULT_DELTA;
        Config {
            map: String::new(),
            eps: crate::covering::choose_eps(delta),
            delta,
            log_r_plus: AutoOr::Auto,
            log_r_minus: AutoOr::Auto,
            log_r0: AutoOr::Auto,
            depth: 6,
            budget: 64,
            grid: 16,
            margin: 0.1,
            tol: 1e-3,
            oracle_targets: 16,
            seed: 1,
            threads: 1,
            escape_level: crate::orbit::DEFAULT_ESCAPE_LEVEL,
        }
    }
}

impl Config {
    /// Apply `key = value` pairs; unknown keys are errors.
    pub fn apply(&mut self, pairs: &BTreeMap<String, String>) -> Result<()> {
        for (key, value) in pairs {
            let bad = |what: &str| Error::Config(format!("key `{key}`: {what} `{value}`"));
            match key.as_str() {
                "map" => self.map = value.clone(),
                "eps" => self.eps = value.parse().map_err(|_| bad("bad number"))?,
                "delta" => self.delta = value.parse().map_err(|_| bad("bad number"))?,
                "log_r_plus" => self.log_r_plus = AutoOr::parse(value)?,
                "log_r_minus" => self.log_r_minus = AutoOr::parse(value)?,
                "log_r0" => self.log_r0 = AutoOr::parse(value)?,
                "depth" => self.depth = value.parse().map_err(|_| bad("bad integer"))?,
                "budget" => self.budget = value.parse().map_err(|_| bad("bad integer"))?,
                "grid" => self.grid = value.parse().map_err(|_| bad("bad integer"))?,
                "margin" => self.margin = value.parse().map_err(|_| bad("bad number"))?,
                "tol" => self.tol = value.parse().map_err(|_| bad("bad number"))?,
                "oracle_targets" => {
                    self.oracle_targets = value.parse().map_err(|_| bad("bad integer"))?
                }
                "seed" => self.seed = value.parse().map_err(|_| bad("bad integer"))?,
                "threads" => self.threads = value.parse().map_err(|_| bad("bad integer"))?,
                "escape_level" => self.escape_level = value.parse().map_err(|_| bad("bad number"))?,
                _ => return Err(Error::Config(format!("unknown config key `{key}`"))),
            }
        }
        Ok(())
    }

    /// Canonical `key = value` lines of the resolved configuration.
    pub fn echo_lines(&self) -> Vec<String> {
        vec![
            format!("map = {}", self.map),
            format!("eps = {}", self.eps),
            format!("delta = {}", self.delta),
            format!("log_r_plus = {}", self.log_r_plus),
            format!("log_r_minus = {}", self.log_r_minus),
            format!("log_r0 = {}", self.log_r0),
            format!("depth = {}", self.depth),
            format!("budget = {}", self.budget),
            format!("grid = {}", self.grid),
            format!("margin = {}", self.margin),
            format!("tol = {}", self.tol),
            format!("oracle_targets = {}", self.oracle_targets),
            format!("seed = {}", self.seed),
            format!("threads = {}", self.threads),
            format!("escape_level = {}", self.escape_level),
        ]
    }
}

/// Parse a flat config file: one `key = value` per line, `#` comments,
/// UTF-8, no nesting. Duplicate keys are conflicts, not overrides.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some(eq) = line.find('=') else {
            return Err(Error::Config(format!(
                "line {}: expected `key = value`, got `{line}`",
                lineno + 1
            )));
        };
        let key = line[..eq].trim().to_string();
        let value = line[eq + 1..].trim().to_string();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
        }
        if out.insert(key.clone(), value).is_some() {
            return Err(Error::Config(format!(
                "line {}: duplicate key `{key}`",
                lineno + 1
            )));
        }
    }
    Ok(out)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Run manifest: the resolved config plus a checksum line per artifact.
/// The manifest alone suffices to reproduce every output byte-exactly.
pub fn manifest(config: &Config, artifacts: &[(&str, &[u8])]) -> String {
    let mut out = String::new();
    for line in config.echo_lines() {
        out.push_str(&line);
        out.push('\n');
    }
    for (name, bytes) in artifacts {
        out.push_str(&format!("artifact.{name}.sha256 = {}\n", sha256_hex(bytes)));
        out.push_str(&format!("artifact.{name}.bytes = {}\n", bytes.len()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_flat_file() {
        let text = "# demo\nmap = arnold(0, 2)\n eps = 0.5 # trailing\n\nseed=9\n";
        let pairs = parse_config(text).unwrap();
        assert_eq!(pairs["map"], "arnold(0, 2)");
        assert_eq!(pairs["eps"], "0.5");
        assert_eq!(pairs["seed"], "9");
    }

    #[test]
    fn duplicate_keys_are_conflicts() {
        assert!(matches!(
            parse_config("a = 1\na = 2\n"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut cfg = Config::default();
        let pairs = parse_config("volume = 11\n").unwrap();
        assert!(matches!(cfg.apply(&pairs), Err(Error::Config(_))));
    }

    #[test]
    fn flag_overrides_file() {
        let mut cfg = Config::default();
        cfg.apply(&parse_config("eps = 0.5\nlog_r_plus = 2.5\n").unwrap())
            .unwrap();
        cfg.apply(&parse_config("eps = 0.25\n").unwrap()).unwrap();
        assert_eq!(cfg.eps, 0.25);
        assert_eq!(cfg.log_r_plus, AutoOr::Value(2.5));
    }

    #[test]
    fn auto_values() {
        assert_eq!(AutoOr::parse("auto").unwrap(), AutoOr::Auto);
        assert_eq!(AutoOr::parse("1.5").unwrap(), AutoOr::Value(1.5));
        assert!(AutoOr::parse("never").is_err());
    }

    #[test]
    fn manifest_checksums_are_stable() {
        let cfg = Config::default();
        let a = manifest(&cfg, &[("out.csv", b"hello\n")]);
        let b = manifest(&cfg, &[("out.csv", b"hello\n")]);
        assert_eq!(a, b);
        assert!(a.contains("artifact.out.csv.sha256 = 5891b5b522d5df086d0ff0b110fbd9d21bb4fc7163af34d08286a2e846f6be03"));
    }
}
