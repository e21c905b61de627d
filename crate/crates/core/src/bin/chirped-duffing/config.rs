//! Flat-key TOML config with flag overrides (flags win). Every value a
//! command consumes is recorded so the run manifest contains the fully
//! resolved configuration.

use crate::CliError;
use serde_json::{Map, Value};
use std::path::Path;

pub struct Resolver {
    table: toml::Table,
    consumed: Vec<String>,
    /// Fully resolved key → value map for the manifest.
    pub record: Map<String, Value>,
}

fn num(v: &toml::Value, key: &str) -> Result<f64, CliError> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        other => Err(CliError::Config(format!(
            "config key `{key}`: expected a number, got {other}"
        ))),
    }
}

impl Resolver {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let table = match path {
            None => toml::Table::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::Config(format!("cannot read config {}: {e}", p.display()))
                })?;
                text.parse::<toml::Table>().map_err(|e| {
                    CliError::Config(format!("config {}: {e}", p.display()))
                })?
            }
        };
        Ok(Self { table, consumed: Vec::new(), record: Map::new() })
    }

    fn file_value(&mut self, key: &str) -> Option<&toml::Value> {
        self.consumed.push(key.to_string());
        self.table.get(key)
    }

    pub fn f64(&mut self, key: &str, flag: Option<f64>, default: f64) -> Result<f64, CliError> {
        let v = match (flag, self.file_value(key).cloned()) {
            (Some(f), _) => f,
            (None, Some(t)) => num(&t, key)?,
            (None, None) => default,
        };
        self.record.insert(key.into(), v.into());
        Ok(v)
    }

    pub fn f64_req(&mut self, key: &str, flag: Option<f64>) -> Result<f64, CliError> {
        let v = match (flag, self.file_value(key).cloned()) {
            (Some(f), _) => f,
            (None, Some(t)) => num(&t, key)?,
            (None, None) => {
                return Err(CliError::Config(format!(
                    "missing required parameter `{key}` (flag --{} or config key)",
                    key.replace('_', "-")
                )))
            }
        };
        self.record.insert(key.into(), v.into());
        Ok(v)
    }

    pub fn opt_f64(&mut self, key: &str, flag: Option<f64>) -> Result<Option<f64>, CliError> {
        let v = match (flag, self.file_value(key).cloned()) {
            (Some(f), _) => Some(f),
            (None, Some(t)) => Some(num(&t, key)?),
            (None, None) => None,
        };
        if let Some(x) = v {
            self.record.insert(key.into(), x.into());
        }
        Ok(v)
    }

    pub fn usize(
        &mut self,
        key: &str,
        flag: Option<usize>,
        default: usize,
    ) -> Result<usize, CliError> {
        Ok(self.opt_usize(key, flag)?.unwrap_or_else(|| {
            self.record.insert(key.into(), default.into());
            default
        }))
    }

    pub fn opt_usize(
        &mut self,
        key: &str,
        flag: Option<usize>,
    ) -> Result<Option<usize>, CliError> {
        let v = match (flag, self.file_value(key).cloned()) {
            (Some(f), _) => Some(f),
            (None, Some(toml::Value::Integer(i))) if i >= 0 => Some(i as usize),
            (None, Some(other)) => {
                return Err(CliError::Config(format!(
                    "config key `{key}`: expected a non-negative integer, got {other}"
                )))
            }
            (None, None) => None,
        };
        if let Some(x) = v {
            self.record.insert(key.into(), x.into());
        }
        Ok(v)
    }

    /// Float list: flag side is comma-separated, file side a TOML array.
    pub fn f64_list(
        &mut self,
        key: &str,
        flag: Option<&str>,
        default: &[f64],
    ) -> Result<Vec<f64>, CliError> {
        let v: Vec<f64> = match (flag, self.file_value(key).cloned()) {
            (Some(s), _) => s
                .split(',')
                .map(|p| {
                    p.trim().parse::<f64>().map_err(|_| {
                        CliError::Config(format!("--{key}: `{p}` is not a number"))
                    })
                })
                .collect::<Result<_, _>>()?,
            (None, Some(toml::Value::Array(items))) => items
                .iter()
                .map(|t| num(t, key))
                .collect::<Result<_, _>>()?,
            (None, Some(other)) => {
                return Err(CliError::Config(format!(
                    "config key `{key}`: expected an array of numbers, got {other}"
                )))
            }
            (None, None) => default.to_vec(),
        };
        self.record.insert(key.into(), v.iter().copied().map(Value::from).collect());
        Ok(v)
    }

    pub fn string(
        &mut self,
        key: &str,
        flag: Option<&str>,
        default: &str,
    ) -> Result<String, CliError> {
        let v = match (flag, self.file_value(key).cloned()) {
            (Some(s), _) => s.to_string(),
            (None, Some(toml::Value::String(s))) => s,
            (None, Some(other)) => {
                return Err(CliError::Config(format!(
                    "config key `{key}`: expected a string, got {other}"
                )))
            }
            (None, None) => default.to_string(),
        };
        self.record.insert(key.into(), v.clone().into());
        Ok(v)
    }

    /// Error out on config keys no getter ever consumed (typos).
    pub fn finish(self) -> Result<Map<String, Value>, CliError> {
        let unknown: Vec<&String> =
            self.table.keys().filter(|k| !self.consumed.contains(k)).collect();
        if unknown.is_empty() {
            Ok(self.record)
        } else {
            Err(CliError::Config(format!(
                "unknown config key(s): {}",
                unknown.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
            )))
        }
    }
}
