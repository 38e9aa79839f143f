//! Namespaced `key=value` settings from config files and `--set` flags.

use std::collections::BTreeMap;
use std::path::Path;

use relaycap::optimize::GridConfig;

use crate::CliError;

/// Settings keyed by namespaced name, e.g. `model.P1_dB` or `grid.coarse_steps`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Settings {
    entries: BTreeMap<String, String>,
}

/// Converts decibels to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl Settings {
    /// Parses config text: one `key=value` per line, `#` comments.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut out = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            out.set(line)
                .map_err(|e| CliError::Usage(format!("config line {}: {e}", n + 1)))?;
        }
        Ok(out)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies one `key=value` pair; keys without a namespace go to `model`.
    pub fn set(&mut self, pair: &str) -> Result<(), CliError> {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("expected key=value, got `{pair}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(CliError::Usage(format!("empty key in `{pair}`")));
        }
        let key = if key.contains('.') {
            key.to_string()
        } else {
            format!("model.{key}")
        };
        if let Some(name) = key.strip_prefix("model.") {
            let base = name
                .strip_suffix("_dB")
                .or_else(|| name.strip_suffix("_db"))
                .unwrap_or(name);
            let base = base.to_ascii_uppercase();
            self.entries.retain(|k, _| {
                k.strip_prefix("model.").is_none_or(|n| {
                    let b = n
                        .strip_suffix("_dB")
                        .or_else(|| n.strip_suffix("_db"))
                        .unwrap_or(n);
                    b.to_ascii_uppercase() != base
                })
            });
        }
        self.entries.insert(key, value.to_string());
        Ok(())
    }

    /// Later settings override earlier ones.
    pub fn merge(&mut self, other: &Settings) {
        for (k, v) in &other.entries {
            // Keys in `other` are already namespaced and non-empty.
            let _ = self.set(&format!("{k}={v}"));
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Entries of one namespace with the prefix stripped.
    pub fn section<'a>(&'a self, ns: &'a str) -> impl Iterator<Item = (&'a str, &'a str)> + 'a {
        self.entries.iter().filter_map(move |(k, v)| {
            k.strip_prefix(ns)
                .and_then(|r| r.strip_prefix('.'))
                .map(|r| (r, v.as_str()))
        })
    }

    /// Model parameters in linear scale. `P1_dB=10` and `P1=10dB` are read in
    /// decibels, `P1=10` as linear.
    pub fn model_params(&self) -> Result<BTreeMap<String, f64>, CliError> {
        self.section("model")
            .map(|(k, v)| {
                let (name, db_key) = match k.strip_suffix("_dB").or_else(|| k.strip_suffix("_db")) {
                    Some(name) => (name, true),
                    None => (k, false),
                };
                let (num, db_value) = match v.strip_suffix("dB").or_else(|| v.strip_suffix("db")) {
                    Some(num) => (num.trim(), true),
                    None => (v, false),
                };
                let x: f64 = num
                    .parse()
                    .map_err(|_| CliError::Usage(format!("model.{k}: `{v}` is not a number")))?;
                if !x.is_finite() {
                    return Err(CliError::Usage(format!("model.{k}: `{v}` is not finite")));
                }
                let linear = if db_key || db_value {
                    db_to_linear(x)
                } else {
                    x
                };
                Ok((name.to_ascii_uppercase(), linear))
            })
            .collect()
    }

    /// Grid overrides from the `grid` namespace.
    pub fn grid(&self) -> Result<GridConfig, CliError> {
        let mut cfg = GridConfig::default();
        for (k, v) in self.section("grid") {
            let bad = || CliError::Usage(format!("grid.{k}: bad value `{v}`"));
            let count = || v.parse::<usize>().map_err(|_| bad());
            match k {
                "coarse_steps" => cfg.coarse_steps = Some(count()?),
                "refine_rounds" => cfg.refine_rounds = Some(count()?),
                "refine_steps" => cfg.refine_steps = Some(count()?),
                "refine_starts" => cfg.refine_starts = Some(count()?),
                "refine_shrink" => {
                    let s: f64 = v.parse().map_err(|_| bad())?;
                    if !(s > 0.0 && s < 1.0) {
                        return Err(bad());
                    }
                    cfg.refine_shrink = Some(s);
                }
                _ => return Err(CliError::Usage(format!("unknown grid key `grid.{k}`"))),
            }
        }
        Ok(cfg)
    }
}
