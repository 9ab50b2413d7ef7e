//! Flat key-value experiment files.
//!
//! A config is a TOML document read as a flat map from dotted keys to
//! values, so `shift.delta = 0.1` and `[shift] delta = 0.1` are the same
//! entry. Every key must be consumed by the experiment that reads it;
//! leftovers are reported as errors.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use toml::Value;

use crate::CliError;

#[derive(Debug)]
pub struct Config {
    entries: BTreeMap<String, Value>,
    used: RefCell<BTreeSet<String>>,
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        let mut entries = BTreeMap::new();
        flatten("", &table, &mut entries);
        Ok(Config {
            entries,
            used: RefCell::new(BTreeSet::new()),
        })
    }

    /// Every entry, rendered as TOML values.
    pub fn echo(&self) -> BTreeMap<String, String> {
        self.entries.iter().map(|(k, v)| (k.clone(), v.to_string())).collect()
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.entries.insert(key.to_string(), value);
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn raw(&self, key: &str) -> Option<&Value> {
        let v = self.entries.get(key)?;
        self.used.borrow_mut().insert(key.to_string());
        Some(v)
    }

    fn wrong(key: &str, want: &str, got: &Value) -> CliError {
        CliError::Config(format!("`{key}` must be {want}, got {got}"))
    }

    pub fn opt_str(&self, key: &str) -> Result<Option<String>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(v) => Err(Self::wrong(key, "a string", v)),
        }
    }

    pub fn str(&self, key: &str) -> Result<String, CliError> {
        self.opt_str(key)?.ok_or_else(|| CliError::Config(format!("missing `{key}`")))
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(*x)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(v) => Err(Self::wrong(key, "a number", v)),
        }
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        self.opt_f64(key)?.ok_or_else(|| CliError::Config(format!("missing `{key}`")))
    }

    pub fn opt_u64(&self, key: &str) -> Result<Option<u64>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(v) => Err(Self::wrong(key, "a non-negative integer", v)),
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        match self.raw(key) {
            None => Err(CliError::Config(format!("missing `{key}`"))),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Float(x) => Ok(*x),
                    Value::Integer(i) => Ok(*i as f64),
                    other => Err(Self::wrong(key, "a list of numbers", other)),
                })
                .collect(),
            Some(v) => Err(Self::wrong(key, "a list of numbers", v)),
        }
    }

    /// Errors on the first key nobody read.
    pub fn finish(&self) -> Result<(), CliError> {
        let used = self.used.borrow();
        match self.entries.keys().find(|k| !used.contains(*k)) {
            Some(k) => Err(CliError::Config(format!("unknown or unused key `{k}`"))),
            None => Ok(()),
        }
    }
}
