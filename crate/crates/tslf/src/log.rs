//! Raw execution logs: finite sequences of variable valuations, read and
//! written as JSONL (one object per timestep, integer or Boolean values).

use std::fmt::Write as _;
use std::path::Path;

use serde_json::Value as Json;
use thiserror::Error;

use crate::logic::ast::{Signature, Sort, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LogValue {
    Int(i64),
    Bool(bool),
}

impl LogValue {
    pub fn as_int(self) -> Option<i64> {
        match self {
            LogValue::Int(v) => Some(v),
            LogValue::Bool(_) => None,
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            LogValue::Bool(v) => Some(v),
            LogValue::Int(_) => None,
        }
    }

    fn to_json(self) -> Json {
        match self {
            LogValue::Int(v) => Json::from(v),
            LogValue::Bool(v) => Json::from(v),
        }
    }
}

/// One timestep: variable name -> value, in schema order.
pub type Valuation = Vec<(String, LogValue)>;

/// A finite sequence of valuations over a fixed key set.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Log {
    pub steps: Vec<Valuation>,
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: invalid JSON: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("line {line}: value for {key:?} is not an integer or Boolean")]
    BadValue { line: usize, key: String },
    #[error("line {line}: keys differ from the first line")]
    InconsistentKeys { line: usize },
    #[error("log is empty")]
    Empty,
    #[error("variable {0:?} missing from log")]
    MissingVariable(String),
}

impl Log {
    pub fn new(steps: Vec<Valuation>) -> Self {
        Log { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn keys(&self) -> Vec<&str> {
        self.steps
            .first()
            .map(|s| s.iter().map(|(k, _)| k.as_str()).collect())
            .unwrap_or_default()
    }

    pub fn get(&self, step: usize, key: &str) -> Option<LogValue> {
        self.steps[step]
            .iter()
            .find(|(k, _)| k == key)
            .map(|&(_, v)| v)
    }

    /// Serializes as JSONL with keys in schema order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for step in &self.steps {
            let mut map = serde_json::Map::new();
            for (k, v) in step {
                map.insert(k.clone(), v.to_json());
            }
            let _ = writeln!(out, "{}", Json::Object(map));
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, LogError> {
        let mut steps = Vec::new();
        let mut first_keys: Option<Vec<String>> = None;
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let json: Json = serde_json::from_str(line).map_err(|source| LogError::Json {
                line: idx + 1,
                source,
            })?;
            let obj = json.as_object().ok_or(LogError::InconsistentKeys { line: idx + 1 })?;
            let mut step = Vec::with_capacity(obj.len());
            for (k, v) in obj {
                let value = match v {
                    Json::Bool(b) => LogValue::Bool(*b),
                    Json::Number(n) => LogValue::Int(n.as_i64().ok_or_else(|| {
                        LogError::BadValue {
                            line: idx + 1,
                            key: k.clone(),
                        }
                    })?),
                    _ => {
                        return Err(LogError::BadValue {
                            line: idx + 1,
                            key: k.clone(),
                        })
                    }
                };
                step.push((k.clone(), value));
            }
            let keys: Vec<String> = step.iter().map(|(k, _)| k.clone()).collect();
            match &first_keys {
                None => first_keys = Some(keys),
                Some(fk) if *fk != keys => {
                    return Err(LogError::InconsistentKeys { line: idx + 1 })
                }
                _ => {}
            }
            steps.push(step);
        }
        if steps.is_empty() {
            return Err(LogError::Empty);
        }
        Ok(Log { steps })
    }

    pub fn read_file(path: &Path) -> Result<Self, LogError> {
        let text = std::fs::read_to_string(path).map_err(|source| LogError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_jsonl(&text)
    }

    pub fn write_file(&self, path: &Path) -> Result<(), LogError> {
        std::fs::write(path, self.to_jsonl()).map_err(|source| LogError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// A log with values laid out per signature variable: `values[step][var]`,
/// Booleans stored as 0/1.
#[derive(Debug, Clone)]
pub struct ResolvedLog {
    pub values: Vec<Vec<i64>>,
}

impl ResolvedLog {
    pub fn resolve(log: &Log, sig: &Signature) -> Result<Self, LogError> {
        if log.is_empty() {
            return Err(LogError::Empty);
        }
        let mut values = Vec::with_capacity(log.len());
        for step in &log.steps {
            let mut row = Vec::with_capacity(sig.len_vars());
            for v in sig.vars() {
                let name = sig.var_name(v);
                let value = step
                    .iter()
                    .find(|(k, _)| k == name)
                    .map(|&(_, v)| v)
                    .ok_or_else(|| LogError::MissingVariable(name.to_string()))?;
                row.push(match value {
                    LogValue::Int(i) => i,
                    LogValue::Bool(b) => b as i64,
                });
            }
            values.push(row);
        }
        Ok(ResolvedLog { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, step: usize, var: VarId) -> i64 {
        self.values[step][var.0 as usize]
    }
}

/// Builds a signature from a log corpus: variables in first-seen key order,
/// sorts from the observed values, corpus-constant variables marked.
pub fn signature_from_corpus(logs: &[Log]) -> Result<Signature, LogError> {
    let first = logs.first().ok_or(LogError::Empty)?;
    if first.is_empty() {
        return Err(LogError::Empty);
    }
    let mut sig = Signature::new();
    for (key, value) in &first.steps[0] {
        let sort = match value {
            LogValue::Int(_) => Sort::Int,
            LogValue::Bool(_) => Sort::Bool,
        };
        sig.add_var(key, sort).expect("log keys are unique");
    }
    for v in sig.vars().collect::<Vec<_>>() {
        let name = sig.var_name(v).to_string();
        let reference = first.steps[0]
            .iter()
            .find(|(k, _)| *k == name)
            .map(|&(_, val)| val);
        let constant = logs.iter().all(|log| {
            log.steps
                .iter()
                .all(|step| step.iter().find(|(k, _)| *k == name).map(|&(_, val)| val) == reference)
        });
        if constant {
            sig.mark_constant(v);
        }
    }
    Ok(sig)
}
