//! Scenario files: JSON documents checked against the full config schema.
//!
//! A document may name a builtin scenario under `"builtin"`; the remaining
//! keys are then deep-merged over that scenario. `--set` overrides are
//! applied last, before schema checking.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use rover_health::scenario::{builtin, ScenarioConfig, TerrainSpec};
use serde_json::{Map, Value};

use crate::error::{CliError, Result};

const BUILTIN_KEY: &str = "builtin";
/// Tag field of the terrain and fault variants.
const TAG_KEY: &str = "kind";

#[derive(Debug, Clone, PartialEq)]
enum Segment {
    Key(String),
    Index(usize),
}

/// One `key.path[i]=value` override. The value is read as JSON when it
/// parses as JSON and as a bare string otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    raw: String,
    path: Vec<Segment>,
    value: Value,
}

impl FromStr for Override {
    type Err = CliError;

    fn from_str(raw: &str) -> Result<Self> {
        let bad = |reason: &str| CliError::Override {
            raw: raw.to_string(),
            reason: reason.to_string(),
        };
        let (key, value) = raw.split_once('=').ok_or_else(|| bad("expected key=value"))?;
        let mut path = Vec::new();
        for part in key.trim().split('.') {
            let (name, mut rest) = match part.find('[') {
                Some(i) => (&part[..i], &part[i..]),
                None => (part, ""),
            };
            if name.is_empty() {
                return Err(bad("empty key segment"));
            }
            path.push(Segment::Key(name.to_string()));
            while !rest.is_empty() {
                let close = rest.find(']').ok_or_else(|| bad("unclosed `[`"))?;
                let index = rest[1..close]
                    .parse()
                    .map_err(|_| bad("index must be a non-negative integer"))?;
                path.push(Segment::Index(index));
                rest = &rest[close + 1..];
                if !rest.is_empty() && !rest.starts_with('[') {
                    return Err(bad("unexpected text after `]`"));
                }
            }
        }
        let value = serde_json::from_str(value.trim()).unwrap_or_else(|_| Value::String(value.to_string()));
        Ok(Override {
            raw: raw.to_string(),
            path,
            value,
        })
    }
}

impl Override {
    fn apply(&self, doc: &mut Value) -> Result<()> {
        let bad = |reason: String| CliError::Override {
            raw: self.raw.clone(),
            reason,
        };
        let mut node = doc;
        for segment in &self.path {
            node = match segment {
                Segment::Key(k) => {
                    if node.is_null() {
                        *node = Value::Object(Map::new());
                    }
                    node.as_object_mut()
                        .ok_or_else(|| bad(format!("`{k}` is not inside an object")))?
                        .entry(k.clone())
                        .or_insert(Value::Null)
                }
                Segment::Index(i) => {
                    let items = node
                        .as_array_mut()
                        .ok_or_else(|| bad(format!("[{i}] applied to a non-list")))?;
                    if *i == items.len() {
                        items.push(Value::Null);
                    }
                    let len = items.len();
                    items
                        .get_mut(*i)
                        .ok_or_else(|| bad(format!("index {i} out of range (list has {len})")))?
                }
            };
        }
        *node = self.value.clone();
        Ok(())
    }
}

/// Overlays `patch` on `base`: objects merge key by key, anything else
/// (lists included) replaces. An object that switches variant (a different
/// `kind`) replaces the old one, since the old variant's fields would not fit.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) if p.get(TAG_KEY).is_none_or(|k| b.get(TAG_KEY) == Some(k)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn builtin_document(name: &str) -> Result<Value> {
    let cfg = builtin(name).ok_or_else(|| CliError::UnknownBuiltin(name.to_string()))?;
    Ok(serde_json::to_value(cfg)?)
}

/// Expands a `"builtin"` reference and applies overrides.
fn resolve_document(mut doc: Value, overrides: &[Override], origin: &str) -> Result<Value> {
    if let Some(obj) = doc.as_object_mut() {
        if let Some(name) = obj.remove(BUILTIN_KEY) {
            let name = name.as_str().ok_or_else(|| CliError::Schema {
                origin: origin.to_string(),
                key: BUILTIN_KEY.to_string(),
                message: "expected a scenario name".into(),
            })?;
            let mut base = builtin_document(name)?;
            merge(&mut base, doc);
            doc = base;
        }
    }
    for o in overrides {
        o.apply(&mut doc)?;
    }
    Ok(doc)
}

fn from_document(doc: Value, origin: &str, base_dir: Option<&Path>) -> Result<ScenarioConfig> {
    let mut cfg: ScenarioConfig = serde_path_to_error::deserialize(doc).map_err(|e| CliError::Schema {
        origin: origin.to_string(),
        key: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    if let (TerrainSpec::AsciiGrid { path }, Some(dir)) = (&mut cfg.terrain, base_dir) {
        if path.is_relative() {
            *path = dir.join(&*path);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parses a scenario document held in memory. Relative grid paths resolve
/// against `base_dir` when given.
pub fn parse_config_str(
    text: &str,
    origin: &str,
    base_dir: Option<&Path>,
    overrides: &[Override],
) -> Result<ScenarioConfig> {
    let doc: Value = serde_json::from_str(text).map_err(|e| CliError::Syntax {
        origin: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let doc = resolve_document(doc, overrides, origin)?;
    from_document(doc, origin, base_dir)
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    parse_config_with(path, &[])
}

pub fn parse_config_with(path: &Path, overrides: &[Override]) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config_str(&text, &path.display().to_string(), path.parent(), overrides)
}

/// A builtin scenario with overrides applied and re-validated.
pub fn builtin_config(name: &str, overrides: &[Override]) -> Result<ScenarioConfig> {
    let doc = resolve_document(builtin_document(name)?, overrides, name)?;
    from_document(doc, name, None)
}

/// Writes `cfg` so that [`parse_config`] reads back an equal config.
pub fn write_config(cfg: &ScenarioConfig, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(cfg)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// SHA-256 of the compact JSON form, hex encoded.
pub fn config_hash(cfg: &ScenarioConfig) -> String {
    use sha2::{Digest, Sha256};
    let bytes = serde_json::to_vec(cfg).expect("scenario configs always serialise");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}
