//! Flat `key = value` run configuration. Every command consumes the keys
//! it knows, fills defaults for the rest, and rejects anything left over,
//! so typos fail loudly instead of silently running defaults.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

pub struct Config {
    values: BTreeMap<String, String>,
    /// Effective settings in consumption order, echoed into the manifest.
    echo: Vec<(String, String)>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config> {
        match path {
            None => Config::parse(""),
            Some(p) => {
                let text = fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                Config::parse(&text).with_context(|| format!("parsing config {}", p.display()))
            }
        }
    }

    pub fn parse(text: &str) -> Result<Config> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", lineno + 1))?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                bail!("line {}: empty key", lineno + 1);
            }
            if values.insert(key.clone(), value).is_some() {
                bail!("line {}: duplicate key `{key}`", lineno + 1);
            }
        }
        Ok(Config {
            values,
            echo: Vec::new(),
        })
    }

    /// Master seed: CLI flag wins over the config file, default 42.
    pub fn seed(&mut self, cli: Option<u64>) -> Result<u64> {
        let from_file: Option<u64> = match self.values.remove("seed") {
            Some(s) => Some(
                s.parse()
                    .map_err(|_| anyhow!("config key `seed`: invalid u64 `{s}`"))?,
            ),
            None => None,
        };
        let seed = cli.or(from_file).unwrap_or(42);
        self.echo.push(("seed".into(), seed.to_string()));
        Ok(seed)
    }

    fn take_parsed<T: FromStr + Display>(&mut self, key: &str, default: T) -> Result<T> {
        let value = match self.values.remove(key) {
            Some(s) => s
                .parse()
                .map_err(|_| anyhow!("config key `{key}`: invalid value `{s}`"))?,
            None => default,
        };
        self.echo.push((key.into(), value.to_string()));
        Ok(value)
    }

    pub fn take_usize(&mut self, key: &str, default: usize) -> Result<usize> {
        self.take_parsed(key, default)
    }

    pub fn take_u64(&mut self, key: &str, default: u64) -> Result<u64> {
        self.take_parsed(key, default)
    }

    pub fn take_u32(&mut self, key: &str, default: u32) -> Result<u32> {
        self.take_parsed(key, default)
    }

    pub fn take_u8(&mut self, key: &str, default: u8) -> Result<u8> {
        self.take_parsed(key, default)
    }

    pub fn take_f64(&mut self, key: &str, default: f64) -> Result<f64> {
        self.take_parsed(key, default)
    }

    pub fn take_f32(&mut self, key: &str, default: f32) -> Result<f32> {
        self.take_parsed(key, default)
    }

    pub fn take_bool(&mut self, key: &str, default: bool) -> Result<bool> {
        self.take_parsed(key, default)
    }

    /// Required string key with no default (checkpoint paths).
    pub fn take_required(&mut self, key: &str) -> Result<String> {
        let value = self
            .values
            .remove(key)
            .ok_or_else(|| anyhow!("config key `{key}` is required"))?;
        self.echo.push((key.into(), value.clone()));
        Ok(value)
    }

    /// Reject anything no command consumed.
    pub fn finish(&self) -> Result<()> {
        if let Some(key) = self.values.keys().next() {
            bail!("unknown config key `{key}`");
        }
        Ok(())
    }

    pub fn echo(&self) -> &[(String, String)] {
        &self.echo
    }
}
