//! Command settings: an optional JSON file, overlaid by whichever flags
//! were given, then deserialised into the command's typed config.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

pub struct Overlay(Map<String, Value>);

impl Overlay {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Overlay(Map::new()));
        };
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        match serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))? {
            Value::Object(map) => Ok(Overlay(map)),
            _ => bail!("config {} must be a JSON object", path.display()),
        }
    }

    /// Sets `key` when the flag was given.
    pub fn set<T: Serialize>(&mut self, key: &str, value: Option<T>) -> Result<&mut Self> {
        if let Some(v) = value {
            self.0.insert(key.into(), serde_json::to_value(v)?);
        }
        Ok(self)
    }

    /// Sets `key` to true when a boolean switch was given.
    pub fn switch(&mut self, key: &str, on: bool) -> &mut Self {
        if on {
            self.0.insert(key.into(), Value::Bool(true));
        }
        self
    }

    pub fn contains(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    pub fn take(&mut self, key: &str) -> Option<Value> {
        self.0.remove(key)
    }

    pub fn build<T: DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(Value::Object(self.0.clone())).context("invalid configuration")
    }
}
