//! `key = value` experiment specs. Lists use `[a, b, c]`; `#` starts a
//! comment.
//!
//! ```text
//! topology = geant
//! catalog_size = 5000
//! zipf_alpha = [0.6, 0.8, 1.0]
//! cache_ratio = 0.01
//! strategies = [u-lfu, u-lru, lce-lfu, lce-lru, grd]
//! seeds = [1, 2, 3]
//! cost_choices = [10, 100, 1000]
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::cache::Policy;
use crate::strategy::{Strategy, DEFAULT_EWMA_ALPHA};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("`{key}`: {msg}")]
    Value { key: String, msg: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Where the network comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum TopologySource {
    Geant,
    SingleCache,
    File(PathBuf),
}

impl TopologySource {
    pub fn label(&self) -> String {
        match self {
            TopologySource::Geant => "geant".into(),
            TopologySource::SingleCache => "single-cache".into(),
            TopologySource::File(p) => p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub topology: TopologySource,
    pub catalog_size: usize,
    pub zipf_alpha: Vec<f64>,
    pub cache_ratio: Vec<f64>,
    pub strategies: Vec<Strategy>,
    pub rate: f64,
    pub warmup: u64,
    pub measure: u64,
    pub seeds: Vec<u64>,
    pub ewma_alpha: f64,
    /// Edge costs are redrawn from this list per seed; empty keeps file costs.
    pub cost_choices: Vec<f64>,
    /// Output prefix; `.csv` and `.json` are appended.
    pub output: Option<PathBuf>,
}

pub const PAPER_CATALOG: usize = 300_000;
pub const PAPER_WARMUP: u64 = 3_000_000;
pub const PAPER_MEASURE: u64 = 6_000_000;

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            topology: TopologySource::Geant,
            catalog_size: 5_000,
            zipf_alpha: vec![1.0],
            cache_ratio: vec![0.01],
            strategies: vec![
                Strategy::UtilCache(Policy::Lfu),
                Strategy::UtilCache(Policy::Lru),
                Strategy::Lce(Policy::Lfu),
                Strategy::Lce(Policy::Lru),
                Strategy::Grd,
            ],
            rate: 12.0,
            warmup: 50_000,
            measure: 100_000,
            seeds: vec![1],
            ewma_alpha: DEFAULT_EWMA_ALPHA,
            cost_choices: vec![10.0, 100.0, 1000.0],
            output: None,
        }
    }
}

impl ExperimentSpec {
    /// Full-size catalog and request counts.
    pub fn paper_scale(mut self) -> Self {
        self.catalog_size = PAPER_CATALOG;
        self.warmup = PAPER_WARMUP;
        self.measure = PAPER_MEASURE;
        self
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        let mut spec = Self::parse(&text)?;
        // relative topology paths are relative to the spec file
        if let TopologySource::File(p) = &spec.topology {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    spec.topology = TopologySource::File(dir.join(p));
                }
            }
        }
        Ok(spec)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let pairs = parse_pairs(text)?;
        let mut spec = ExperimentSpec::default();
        let mut kind: Option<String> = None;
        let mut policy: Option<String> = None;
        for (key, value) in &pairs {
            match key.as_str() {
                "topology" => {
                    spec.topology = match value.scalar(key)?.as_str() {
                        "geant" => TopologySource::Geant,
                        "single-cache" => TopologySource::SingleCache,
                        other => TopologySource::File(PathBuf::from(other)),
                    }
                }
                "catalog_size" => spec.catalog_size = value.scalar_as(key)?,
                "zipf_alpha" => spec.zipf_alpha = value.list_as(key)?,
                "cache_ratio" => spec.cache_ratio = value.list_as(key)?,
                "strategies" => {
                    spec.strategies = value
                        .items()
                        .iter()
                        .map(|s| s.parse().map_err(|e: crate::strategy::StrategyError| err(key, e.to_string())))
                        .collect::<Result<_, _>>()?
                }
                "strategy" => kind = Some(value.scalar(key)?),
                "policy" => policy = Some(value.scalar(key)?),
                "rate" => spec.rate = value.scalar_as(key)?,
                "warmup" => spec.warmup = value.scalar_as(key)?,
                "measure" => spec.measure = value.scalar_as(key)?,
                "seeds" | "seed" => spec.seeds = value.list_as(key)?,
                "ewma_alpha" => spec.ewma_alpha = value.scalar_as(key)?,
                "cost_choices" => spec.cost_choices = value.list_as(key)?,
                "output" => spec.output = Some(PathBuf::from(value.scalar(key)?)),
                other => return Err(ConfigError::UnknownKey(other.to_string())),
            }
        }
        if kind.is_some() || policy.is_some() {
            let kind = kind.ok_or_else(|| err("policy", "`policy` needs a `strategy`"))?;
            let s = Strategy::from_parts(&kind, policy.as_deref()).map_err(|e| err("strategy", e.to_string()))?;
            spec.strategies = vec![s];
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.catalog_size == 0 {
            return Err(err("catalog_size", "must be positive"));
        }
        if self.zipf_alpha.is_empty() || self.zipf_alpha.iter().any(|a| !(*a >= 0.0)) {
            return Err(err("zipf_alpha", "needs non-negative values"));
        }
        if self.cache_ratio.is_empty() || self.cache_ratio.iter().any(|r| !(*r >= 0.0)) {
            return Err(err("cache_ratio", "needs non-negative values"));
        }
        if self.strategies.is_empty() {
            return Err(err("strategies", "empty"));
        }
        if self.strategies.contains(&Strategy::Static) {
            return Err(err("strategies", "static placements are not sweepable"));
        }
        if !(self.rate > 0.0) {
            return Err(err("rate", "must be positive"));
        }
        if self.measure == 0 {
            return Err(err("measure", "must be at least 1"));
        }
        if self.seeds.is_empty() {
            return Err(err("seeds", "empty"));
        }
        if !(self.ewma_alpha > 0.0 && self.ewma_alpha <= 1.0) {
            return Err(err("ewma_alpha", "must lie in (0, 1]"));
        }
        if self.cost_choices.iter().any(|c| !(*c > 0.0)) {
            return Err(err("cost_choices", "costs must be positive"));
        }
        Ok(())
    }

    pub fn point_count(&self) -> usize {
        self.zipf_alpha.len() * self.cache_ratio.len()
    }
}

fn err(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Value { key: key.to_string(), msg: msg.into() }
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Scalar(String),
    List(Vec<String>),
}

impl Value {
    fn items(&self) -> Vec<String> {
        match self {
            Value::Scalar(s) => vec![s.clone()],
            Value::List(l) => l.clone(),
        }
    }

    fn scalar(&self, key: &str) -> Result<String, ConfigError> {
        match self {
            Value::Scalar(s) => Ok(s.clone()),
            Value::List(_) => Err(err(key, "expected a single value")),
        }
    }

    fn scalar_as<T: std::str::FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        let s = self.scalar(key)?;
        parse_number(&s).ok_or_else(|| err(key, format!("cannot parse `{s}`")))
    }

    fn list_as<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>, ConfigError> {
        self.items()
            .iter()
            .map(|s| parse_number(s).ok_or_else(|| err(key, format!("cannot parse `{s}`"))))
            .collect()
    }
}

/// Accepts plain numbers, `_` separators and integer-valued scientific
/// notation such as `5e4`.
fn parse_number<T: std::str::FromStr>(s: &str) -> Option<T> {
    let cleaned = s.replace('_', "");
    if let Ok(v) = cleaned.parse() {
        return Some(v);
    }
    let f: f64 = cleaned.parse().ok()?;
    if f.fract() == 0.0 && f.abs() < 1e18 {
        format!("{}", f as i64).parse().ok()
    } else {
        None
    }
}

fn parse_pairs(text: &str) -> Result<Vec<(String, Value)>, ConfigError> {
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line, msg: "expected `key = value`".into() })?;
        let key = key.trim().to_string();
        let value = value.trim();
        if key.is_empty() {
            return Err(ConfigError::Syntax { line, msg: "empty key".into() });
        }
        if seen.insert(key.clone(), line).is_some() {
            return Err(ConfigError::Syntax { line, msg: format!("duplicate key `{key}`") });
        }
        let value = if let Some(inner) = value.strip_prefix('[') {
            let inner = inner
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::Syntax { line, msg: "unterminated list".into() })?;
            Value::List(inner.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
        } else {
            Value::Scalar(value.to_string())
        };
        out.push((key, value));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_and_scalars() {
        let spec = ExperimentSpec::parse(
            "topology = geant\ncatalog_size = 200\nzipf_alpha = [0.6, 0.8]\nseeds = [1,2,3]\nwarmup = 2e4\n\
             strategies = [u-lfu, lce-lru]  # two\n",
        )
        .unwrap();
        assert_eq!(spec.catalog_size, 200);
        assert_eq!(spec.zipf_alpha, vec![0.6, 0.8]);
        assert_eq!(spec.seeds, vec![1, 2, 3]);
        assert_eq!(spec.warmup, 20_000);
        assert_eq!(spec.strategies, vec![Strategy::UtilCache(Policy::Lfu), Strategy::Lce(Policy::Lru)]);
    }

    #[test]
    fn strategy_policy_pair() {
        let spec = ExperimentSpec::parse("strategy = utilcache\npolicy = lfu\newma_alpha = 0.2\n").unwrap();
        assert_eq!(spec.strategies, vec![Strategy::UtilCache(Policy::Lfu)]);
        assert_eq!(spec.ewma_alpha, 0.2);
        let spec = ExperimentSpec::parse("strategy = grd\n").unwrap();
        assert_eq!(spec.strategies, vec![Strategy::Grd]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(ExperimentSpec::parse("nonsense"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(ExperimentSpec::parse("colour = red"), Err(ConfigError::UnknownKey(_))));
        assert!(ExperimentSpec::parse("measure = 0").is_err());
        assert!(ExperimentSpec::parse("seeds = []").is_err());
        assert!(ExperimentSpec::parse("rate = 1\nrate = 2").is_err());
        assert!(ExperimentSpec::parse("zipf_alpha = [0.5").is_err());
    }

    #[test]
    fn paper_scale_counts() {
        let spec = ExperimentSpec::default().paper_scale();
        assert_eq!((spec.catalog_size, spec.warmup, spec.measure), (300_000, 3_000_000, 6_000_000));
    }
}
