//! Config-file merging and run provenance.
//!
//! Every run resolves its parameters as: built-in default ← JSON config
//! file ← command-line flag. The resolved set is hashed (sha256, first
//! 12 hex digits) and embedded in every artifact so a CSV can be traced
//! back to the exact run that produced it.

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

use crate::CliError;

/// Values loaded from `--config <file>`, plus the parameters a command
/// actually resolved (for hashing and echo).
pub struct RunConfig {
    file: Map<String, Value>,
    resolved: BTreeMap<String, Value>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, command: &str) -> Result<Self, CliError> {
        let file = match path {
            None => Map::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::invalid_config(format!("cannot read config {}: {e}", p.display()))
                })?;
                let value: Value = serde_json::from_str(&text).map_err(|e| {
                    CliError::invalid_config(format!("config {} is not valid JSON: {e}", p.display()))
                })?;
                match value {
                    Value::Object(map) => map,
                    _ => {
                        return Err(CliError::invalid_config(
                            "config file must hold a JSON object".to_string(),
                        ))
                    }
                }
            }
        };
        let mut resolved = BTreeMap::new();
        resolved.insert("command".to_string(), Value::String(command.to_string()));
        Ok(RunConfig { file, resolved })
    }

    /// Resolve one f64 parameter: flag beats file beats default.
    pub fn f64(&mut self, key: &str, flag: Option<f64>, default: f64) -> Result<f64, CliError> {
        let value = match flag {
            Some(v) => v,
            None => match self.file.get(key) {
                Some(v) => v.as_f64().ok_or_else(|| {
                    CliError::invalid_config(format!("config key '{key}' must be a number"))
                })?,
                None => default,
            },
        };
        if !value.is_finite() {
            return Err(CliError::invalid_config(format!(
                "parameter '{key}' must be finite, got {value}"
            )));
        }
        self.resolved.insert(
            key.to_string(),
            serde_json::Number::from_f64(value)
                .map(Value::Number)
                .unwrap_or(Value::Null),
        );
        Ok(value)
    }

    pub fn usize(&mut self, key: &str, flag: Option<usize>, default: usize) -> Result<usize, CliError> {
        let value = match flag {
            Some(v) => v,
            None => match self.file.get(key) {
                Some(v) => v
                    .as_u64()
                    .ok_or_else(|| {
                        CliError::invalid_config(format!(
                            "config key '{key}' must be a non-negative integer"
                        ))
                    })?
                    .try_into()
                    .map_err(|_| {
                        CliError::invalid_config(format!("config key '{key}' is too large"))
                    })?,
                None => default,
            },
        };
        self.resolved
            .insert(key.to_string(), Value::Number(serde_json::Number::from(value as u64)));
        Ok(value)
    }

    pub fn usize_list(
        &mut self,
        key: &str,
        flag: Option<&[usize]>,
        default: &[usize],
    ) -> Result<Vec<usize>, CliError> {
        let value: Vec<usize> = match flag {
            Some(v) => v.to_vec(),
            None => match self.file.get(key) {
                Some(Value::Array(items)) => {
                    let mut out = Vec::with_capacity(items.len());
                    for item in items {
                        out.push(item.as_u64().ok_or_else(|| {
                            CliError::invalid_config(format!(
                                "config key '{key}' must be an array of integers"
                            ))
                        })? as usize);
                    }
                    out
                }
                Some(_) => {
                    return Err(CliError::invalid_config(format!(
                        "config key '{key}' must be an array of integers"
                    )))
                }
                None => default.to_vec(),
            },
        };
        self.resolved.insert(
            key.to_string(),
            Value::Array(
                value
                    .iter()
                    .map(|&n| Value::Number(serde_json::Number::from(n as u64)))
                    .collect(),
            ),
        );
        Ok(value)
    }

    pub fn string(
        &mut self,
        key: &str,
        flag: Option<&str>,
        default: &str,
    ) -> Result<String, CliError> {
        let value = match flag {
            Some(v) => v.to_string(),
            None => match self.file.get(key) {
                Some(v) => v
                    .as_str()
                    .ok_or_else(|| {
                        CliError::invalid_config(format!("config key '{key}' must be a string"))
                    })?
                    .to_string(),
                None => default.to_string(),
            },
        };
        self.resolved
            .insert(key.to_string(), Value::String(value.clone()));
        Ok(value)
    }

    /// First 12 hex digits of the sha256 of the resolved parameter set.
    pub fn hash(&self) -> String {
        let canonical =
            serde_json::to_string(&self.resolved).expect("BTreeMap serializes deterministically");
        let digest = Sha256::digest(canonical.as_bytes());
        digest[..6].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// The resolved parameters, for echoing into run summaries.
    pub fn resolved_json(&self) -> Value {
        Value::Object(self.resolved.clone().into_iter().collect())
    }
}
