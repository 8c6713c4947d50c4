//! Pipeline configuration: key=value file with defaults and validation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected key=value, got {text:?}")]
    MalformedLine { line: usize, text: String },
    #[error("unknown key {key:?}")]
    UnknownKey { key: String },
    #[error("key {key:?}: invalid value {value:?}: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("missing required key {key:?}")]
    MissingKey { key: String },
}

/// Which similarity function relevance scoring uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SimilarityMode {
    #[default]
    ExactMatch,
    Table,
    CooccurrenceCosine,
}

impl SimilarityMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SimilarityMode::ExactMatch => "exact-match",
            SimilarityMode::Table => "table",
            SimilarityMode::CooccurrenceCosine => "cosine",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "exact-match" => Some(SimilarityMode::ExactMatch),
            "table" => Some(SimilarityMode::Table),
            "cosine" => Some(SimilarityMode::CooccurrenceCosine),
            _ => None,
        }
    }
}

/// All inputs and parameters of a pipeline build.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub taxonomy: PathBuf,
    pub documents: PathBuf,
    pub kb_pairs: PathBuf,
    pub similarity: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    /// Merge ratio of a category's own concept vector against its children's.
    pub alpha: f64,
    /// Typicality threshold; concepts at or below it are dropped.
    pub beta: f64,
    /// Weight of entity evidence in the final classification score.
    pub tau: f64,
    /// Number of categories an entity attaches to, and the default result
    /// list length.
    pub k: usize,
    pub alpha_centroid: f64,
    /// Longest-match window, in tokens, for both concept and entity
    /// segmentation.
    pub max_len: usize,
    pub min_docs_subtree: usize,
    pub max_depth: usize,
    pub similarity_mode: SimilarityMode,
    pub count_somewhat: bool,
    /// Softmax temperature for attachment probabilities.
    pub temperature: f64,
}

impl PipelineConfig {
    pub fn with_inputs(
        taxonomy: impl Into<PathBuf>,
        documents: impl Into<PathBuf>,
        kb_pairs: impl Into<PathBuf>,
    ) -> Self {
        PipelineConfig {
            taxonomy: taxonomy.into(),
            documents: documents.into(),
            kb_pairs: kb_pairs.into(),
            similarity: None,
            annotations: None,
            alpha: 0.7,
            beta: 0.004,
            tau: 0.8,
            k: 5,
            alpha_centroid: 0.7,
            max_len: 4,
            min_docs_subtree: 1,
            max_depth: 10,
            similarity_mode: SimilarityMode::ExactMatch,
            count_somewhat: false,
            temperature: 1.0,
        }
    }

    /// Loads a config file (# comments and blank lines ignored). Relative
    /// paths are resolved against the config file's directory. `overrides`
    /// are key=value pairs applied after the file.
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut pairs: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::MalformedLine {
                    line: lineno + 1,
                    text: line.to_string(),
                });
            };
            pairs.insert(key.trim().to_string(), value.trim().to_string());
        }
        for (key, value) in overrides {
            pairs.insert(key.clone(), value.clone());
        }
        Self::from_pairs(&pairs, base)
    }

    fn from_pairs(pairs: &BTreeMap<String, String>, base: &Path) -> Result<Self, ConfigError> {
        const KNOWN: &[&str] = &[
            "taxonomy",
            "documents",
            "kb_pairs",
            "similarity",
            "annotations",
            "alpha",
            "beta",
            "tau",
            "k",
            "alpha_centroid",
            "max_len",
            "min_docs_subtree",
            "max_depth",
            "similarity_mode",
            "count_somewhat",
            "temperature",
        ];
        for key in pairs.keys() {
            if !KNOWN.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey { key: key.clone() });
            }
        }

        let require = |key: &str| {
            pairs.get(key).ok_or_else(|| ConfigError::MissingKey {
                key: key.to_string(),
            })
        };
        let resolve = |value: &str| {
            let p = PathBuf::from(value);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };

        let mut cfg = PipelineConfig::with_inputs(
            resolve(require("taxonomy")?),
            resolve(require("documents")?),
            resolve(require("kb_pairs")?),
        );
        cfg.similarity = pairs.get("similarity").map(|v| resolve(v));
        cfg.annotations = pairs.get("annotations").map(|v| resolve(v));

        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
            value.parse().map_err(|_| ConfigError::InvalidValue {
                key: key.to_string(),
                value: value.to_string(),
                reason: format!("not a valid {}", std::any::type_name::<T>()),
            })
        }
        if let Some(v) = pairs.get("alpha") {
            cfg.alpha = parse("alpha", v)?;
        }
        if let Some(v) = pairs.get("beta") {
            cfg.beta = parse("beta", v)?;
        }
        if let Some(v) = pairs.get("tau") {
            cfg.tau = parse("tau", v)?;
        }
        if let Some(v) = pairs.get("k") {
            cfg.k = parse("k", v)?;
        }
        if let Some(v) = pairs.get("alpha_centroid") {
            cfg.alpha_centroid = parse("alpha_centroid", v)?;
        }
        if let Some(v) = pairs.get("max_len") {
            cfg.max_len = parse("max_len", v)?;
        }
        if let Some(v) = pairs.get("min_docs_subtree") {
            cfg.min_docs_subtree = parse("min_docs_subtree", v)?;
        }
        if let Some(v) = pairs.get("max_depth") {
            cfg.max_depth = parse("max_depth", v)?;
        }
        if let Some(v) = pairs.get("similarity_mode") {
            cfg.similarity_mode =
                SimilarityMode::parse(v).ok_or_else(|| ConfigError::InvalidValue {
                    key: "similarity_mode".into(),
                    value: v.clone(),
                    reason: "expected exact-match, table or cosine".into(),
                })?;
        }
        if let Some(v) = pairs.get("count_somewhat") {
            cfg.count_somewhat = parse("count_somewhat", v)?;
        }
        if let Some(v) = pairs.get("temperature") {
            cfg.temperature = parse("temperature", v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let unit = |key: &str, v: f64| {
            if (0.0..=1.0).contains(&v) && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::InvalidValue {
                    key: key.to_string(),
                    value: v.to_string(),
                    reason: "must be in [0,1]".into(),
                })
            }
        };
        unit("alpha", self.alpha)?;
        unit("tau", self.tau)?;
        unit("alpha_centroid", self.alpha_centroid)?;
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(ConfigError::InvalidValue {
                key: "beta".into(),
                value: self.beta.to_string(),
                reason: "must be non-negative".into(),
            });
        }
        if self.k < 1 {
            return Err(ConfigError::InvalidValue {
                key: "k".into(),
                value: self.k.to_string(),
                reason: "must be at least 1".into(),
            });
        }
        if self.max_len < 1 {
            return Err(ConfigError::InvalidValue {
                key: "max_len".into(),
                value: self.max_len.to_string(),
                reason: "must be at least 1".into(),
            });
        }
        if self.max_depth < 1 {
            return Err(ConfigError::InvalidValue {
                key: "max_depth".into(),
                value: self.max_depth.to_string(),
                reason: "must be at least 1".into(),
            });
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(ConfigError::InvalidValue {
                key: "temperature".into(),
                value: self.temperature.to_string(),
                reason: "must be positive".into(),
            });
        }
        if self.similarity_mode == SimilarityMode::Table && self.similarity.is_none() {
            return Err(ConfigError::MissingKey {
                key: "similarity".into(),
            });
        }
        Ok(())
    }
}
