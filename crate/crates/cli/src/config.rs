use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use adaptive_cone::approximation::{NSequence, PilotConeSpec, RegularityConstants, TrackingConeSpec};
use adaptive_cone::experiments::RandomPosdFunction;
use adaptive_cone::inference::CandidateSets;
use adaptive_cone::spaces::{CoefficientSource, CoefficientTable, SpaceConfig};
use adaptive_cone::tractability::CoordinateFamily;
use adaptive_cone::{Smoothness, WeightModel};

/// Merges the file at `path` (if any) over `base`, then applies
/// `key.path=value` overrides. Values parse as JSON, falling back to a
/// plain string.
pub fn resolve(base: Value, path: Option<&Path>, overrides: &[String]) -> Result<Value> {
    let mut v = base;
    if let Some(p) = path {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let file: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
        merge(&mut v, file);
    }
    for o in overrides {
        let (key, raw) = o.split_once('=').ok_or_else(|| anyhow!("override {o:?} is not key=value"))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        set_path(&mut v, key, value)?;
    }
    Ok(v)
}

fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
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

fn set_path(v: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut cur = v;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            bail!("empty segment in override key {key:?}");
        }
        if cur.is_null() {
            *cur = Value::Object(Default::default());
        }
        let last = i + 1 == parts.len();
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert(part.to_string(), value);
                    return Ok(());
                }
                map.entry(part.to_string()).or_insert(Value::Null)
            }
            Value::Array(items) => {
                let idx: usize = part.parse().with_context(|| format!("{part:?} is not an array index"))?;
                let len = items.len();
                let slot = items.get_mut(idx).ok_or_else(|| anyhow!("index {idx} out of range (length {len})"))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => bail!("cannot descend into {part:?} of override key {key:?}"),
        };
    }
    unreachable!("loop returns on the last segment")
}

pub fn parse<T: DeserializeOwned>(v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| anyhow!("invalid configuration: {e}"))
}

/// Where coefficients come from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SourceConfig {
    /// A coefficient table given inline (`table`) or as a JSON file (`path`).
    Table {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        table: Option<CoefficientTable>,
    },
    /// The random test function of the experiments.
    Random { seed: u64, d: usize },
}

pub enum Source {
    Table(CoefficientTable),
    Random(RandomPosdFunction),
}

impl Source {
    pub fn as_dyn(&self) -> &dyn CoefficientSource {
        match self {
            Source::Table(t) => t,
            Source::Random(f) => f,
        }
    }

    pub fn table(&self) -> Option<&CoefficientTable> {
        match self {
            Source::Table(t) => Some(t),
            Source::Random(_) => None,
        }
    }
}

impl SourceConfig {
    pub fn load(&self) -> Result<Source> {
        match self {
            SourceConfig::Table { path: Some(_), table: Some(_) } => {
                bail!("give either source.path or source.table, not both")
            }
            SourceConfig::Table { table: Some(t), .. } => Ok(Source::Table(t.clone())),
            SourceConfig::Table { path: Some(p), .. } => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {p}"))?;
                let t = serde_json::from_str(&text).with_context(|| format!("parsing table {p}"))?;
                Ok(Source::Table(t))
            }
            SourceConfig::Table { .. } => bail!("table source needs `path` or `table`"),
            SourceConfig::Random { seed, d } => Ok(Source::Random(RandomPosdFunction::new(*seed, *d)?)),
        }
    }

    pub fn set_seed(&mut self, s: u64) {
        if let SourceConfig::Random { seed, .. } = self {
            *seed = s;
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum AlgorithmConfig {
    Ball {
        radius: f64,
    },
    Pilot {
        n1: usize,
        #[serde(alias = "A")]
        inflation: f64,
    },
    Tracking {
        n_seq: NSequence,
        a: f64,
        b: f64,
    },
}

fn default_budget() -> usize {
    adaptive_cone::approximation::DEFAULT_BUDGET
}

fn default_space() -> SpaceConfig {
    SpaceConfig::new(f64::INFINITY, 1.0).expect("valid exponents")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproxConfig {
    pub algorithm: AlgorithmConfig,
    pub model: WeightModel,
    #[serde(default = "default_space")]
    pub space: SpaceConfig,
    pub eps: f64,
    #[serde(default = "default_budget")]
    pub budget: usize,
    pub source: SourceConfig,
}


#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InferConfig {
    pub source: SourceConfig,
    #[serde(default)]
    pub candidates: CandidateSets,
    /// `Γ_0..Γ_d`, all ones when absent.
    #[serde(default)]
    pub gamma: Option<Vec<f64>>,
    #[serde(default = "default_space")]
    pub space: SpaceConfig,
    #[serde(alias = "A", default = "default_inflation")]
    pub inflation: f64,
    #[serde(default)]
    pub n1: Option<usize>,
    /// Runs the pilot algorithm on the inferred weights when present.
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

fn default_inflation() -> f64 {
    1.1
}


#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackingDiagnose {
    pub spec: TrackingConeSpec,
    /// Claimed regularity constants, checked on the first `window` blocks.
    pub regularity: RegularityConstants,
    #[serde(default = "default_window")]
    pub window: usize,
}

fn default_window() -> usize {
    12
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TractabilityConfig {
    pub w: CoordinateFamily,
    pub s: Smoothness,
    #[serde(default)]
    pub etas: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseConfig {
    #[serde(default)]
    pub model: Option<WeightModel>,
    #[serde(default = "default_space")]
    pub space: SpaceConfig,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_eps_grid")]
    pub eps: Vec<f64>,
    #[serde(default = "default_budget")]
    pub cap: usize,
    #[serde(default)]
    pub pilot: Option<PilotConeSpec>,
    #[serde(default)]
    pub tracking: Option<TrackingDiagnose>,
    #[serde(default)]
    pub tractability: Option<TractabilityConfig>,
}

fn default_radius() -> f64 {
    1.0
}

fn default_eps_grid() -> Vec<f64> {
    vec![1e-1, 1e-2, 1e-3]
}


#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnumerateConfig {
    pub model: WeightModel,
    #[serde(default = "default_count")]
    pub count: usize,
}

fn default_count() -> usize {
    20
}
