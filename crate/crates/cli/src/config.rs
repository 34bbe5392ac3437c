//! Run configuration with layered resolution.
//!
//! Precedence, lowest to highest: built-in defaults, `--config` file
//! (flat `key=value` lines, `#` comments), `BPRIV_*` environment
//! variables, command-line flags. The fully resolved configuration is
//! echoed into every output header so runs are reproducible from their
//! artifacts alone.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Flat key-value configuration collected from one source layer.
#[derive(Debug, Clone, Default)]
pub struct ConfigLayer {
    values: BTreeMap<String, String>,
}

pub const KNOWN_KEYS: &[&str] = &[
    "eta", "s", "n_eff", "r_min", "r_max", "r_steps", "n_uses", "d", "quad", "out", "tuples",
    "seed", "oracle", "r",
];

impl ConfigLayer {
    /// Parses a flat key=value config file. Unknown keys are usage errors.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("{}:{}: expected key=value, got '{line}'", path.display(), lineno + 1);
            };
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                bail!("{}:{}: unknown config key '{key}'", path.display(), lineno + 1);
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    /// Collects `BPRIV_<KEY>` environment overrides.
    pub fn from_env() -> Self {
        let mut values = BTreeMap::new();
        for key in KNOWN_KEYS {
            let var = format!("BPRIV_{}", key.to_uppercase());
            if let Ok(value) = std::env::var(&var) {
                values.insert(key.to_string(), value);
            }
        }
        Self { values }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

/// Resolves one option across the layers: flag beats env beats file.
pub struct Resolver {
    file: ConfigLayer,
    env: ConfigLayer,
}

impl Resolver {
    pub fn new(config_path: Option<&Path>) -> Result<Self> {
        let file = match config_path {
            Some(p) => ConfigLayer::from_file(p)?,
            None => ConfigLayer::default(),
        };
        Ok(Self { file, env: ConfigLayer::from_env() })
    }

    pub fn scalar<T: std::str::FromStr>(
        &self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        for layer in [&self.env, &self.file] {
            if let Some(raw) = layer.get(key) {
                return raw
                    .parse()
                    .map_err(|e| anyhow::anyhow!("invalid value '{raw}' for '{key}': {e}"));
            }
        }
        Ok(default)
    }

    pub fn optional<T: std::str::FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        for layer in [&self.env, &self.file] {
            if let Some(raw) = layer.get(key) {
                return raw
                    .parse()
                    .map(Some)
                    .map_err(|e| anyhow::anyhow!("invalid value '{raw}' for '{key}': {e}"));
            }
        }
        Ok(None)
    }

    /// Comma-separated list of reals.
    pub fn list(&self, key: &str, flag: &[f64], default: &[f64]) -> Result<Vec<f64>> {
        if !flag.is_empty() {
            return Ok(flag.to_vec());
        }
        for layer in [&self.env, &self.file] {
            if let Some(raw) = layer.get(key) {
                return parse_list(raw)
                    .with_context(|| format!("invalid list '{raw}' for '{key}'"));
            }
        }
        Ok(default.to_vec())
    }
}

pub fn parse_list(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|e| anyhow::anyhow!("'{}' is not a number: {e}", tok.trim()))
        })
        .collect()
}

/// Formats resolved key-value pairs as `# key=value` header lines,
/// deterministically ordered.
pub fn header_lines(tool: &str, entries: &[(&str, String)]) -> String {
    let mut out = format!("# bpriv {tool} v{}\n", env!("CARGO_PKG_VERSION"));
    let mut sorted: Vec<&(&str, String)> = entries.iter().collect();
    sorted.sort_by_key(|(k, _)| *k);
    for (key, value) in sorted {
        out.push_str(&format!("# {key}={value}\n"));
    }
    out
}

pub fn format_list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn file_layer_parses_and_rejects_unknown_keys() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# comment\neta = 0.8\ns=0,1,2 # inline").unwrap();
        let layer = ConfigLayer::from_file(f.path()).unwrap();
        assert_eq!(layer.get("eta"), Some("0.8"));
        assert_eq!(layer.get("s"), Some("0,1,2"));

        let mut bad = tempfile::NamedTempFile::new().unwrap();
        writeln!(bad, "etaa=0.8").unwrap();
        let err = ConfigLayer::from_file(bad.path()).unwrap_err().to_string();
        assert!(err.contains("etaa"), "{err}");
    }

    #[test]
    fn precedence_flag_env_file() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "n_uses=4\nquad=9").unwrap();
        let r = Resolver::new(Some(f.path())).unwrap();
        // flag wins over file
        assert_eq!(r.scalar("n_uses", Some(3usize), 2).unwrap(), 3);
        // file wins over default
        assert_eq!(r.scalar("n_uses", None::<usize>, 2).unwrap(), 4);
        assert_eq!(r.scalar("quad", None::<usize>, 7).unwrap(), 9);
        // default when nowhere
        assert_eq!(r.scalar("d", None::<usize>, 12).unwrap(), 12);
    }

    #[test]
    fn list_parsing() {
        assert_eq!(parse_list("0, 1,2.5").unwrap(), vec![0.0, 1.0, 2.5]);
        assert!(parse_list("0,x").is_err());
    }

    #[test]
    fn header_is_sorted_and_stable() {
        let h = header_lines("sweep", &[("s", "0,1".into()), ("eta", "0.8".into())]);
        let lines: Vec<&str> = h.lines().collect();
        assert!(lines[1].starts_with("# eta="));
        assert!(lines[2].starts_with("# s="));
    }
}
