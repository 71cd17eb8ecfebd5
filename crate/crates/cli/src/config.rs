//! Pipeline configuration, read from a TOML file.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use geotemplate::miner::{RankKey, RuleView, DEFAULT_MAX_ITEMS, DEFAULT_MIN_CONFIDENCE, DEFAULT_MIN_SUPPORT};
use geotemplate::predictor::{Method, PredictorParams};
use geotemplate::sparql::{Dialect, RelationStyle, RetryPolicy};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::DataError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_k_folds")]
    pub k_folds: usize,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    pub paths: Paths,
    #[serde(default)]
    pub mining: Mining,
    #[serde(default)]
    pub predictor: Predictor,
    #[serde(default)]
    pub sparql: Sparql,
    #[serde(default)]
    pub endpoint: Endpoint,
    #[serde(default)]
    pub marco: Marco,
}

fn default_k_folds() -> usize {
    10
}

fn default_k_max() -> usize {
    5
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub corpus: PathBuf,
    pub gazetteer: PathBuf,
    pub type_schema: PathBuf,
    pub class_map: PathBuf,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Mining {
    pub min_support: f64,
    pub min_confidence: f64,
    pub max_items: usize,
    pub rank_by: RankKey,
    pub view: RuleView,
    /// Keep only the best `top_n` rules per file.
    pub top_n: Option<usize>,
}

impl Default for Mining {
    fn default() -> Self {
        Mining {
            min_support: DEFAULT_MIN_SUPPORT,
            min_confidence: DEFAULT_MIN_CONFIDENCE,
            max_items: DEFAULT_MAX_ITEMS,
            rank_by: RankKey::Lift,
            view: RuleView::QuestionToAnswer,
            top_n: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Predictor {
    pub methods: Vec<Method>,
    pub params: PredictorParams,
}

impl Default for Predictor {
    fn default() -> Self {
        Predictor {
            methods: Method::ALL.to_vec(),
            params: PredictorParams::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sparql {
    /// Type model used to predict the answer types of each question.
    pub method: Method,
    pub style: RelationStyle,
    pub dialects: Vec<Dialect>,
}

impl Default for Sparql {
    fn default() -> Self {
        Sparql {
            method: Method::Cpt,
            style: RelationStyle::Union,
            dialects: vec![Dialect::Dbpedia, Dialect::Geonames],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Endpoint {
    pub dbpedia: Option<String>,
    pub geonames: Option<String>,
    pub timeout_secs: u64,
    pub retry: RetryPolicy,
    /// Recorded responses to replay instead of contacting endpoints.
    pub fixtures: Option<PathBuf>,
}

impl Default for Endpoint {
    fn default() -> Self {
        Endpoint {
            dbpedia: Some("https://dbpedia.org/sparql".into()),
            geonames: None,
            timeout_secs: 30,
            retry: RetryPolicy::default(),
            fixtures: None,
        }
    }
}

impl Endpoint {
    pub fn url(&self, dialect: Dialect) -> Option<&str> {
        match dialect {
            Dialect::Dbpedia => self.dbpedia.as_deref(),
            Dialect::Geonames => self.geonames.as_deref(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Marco {
    pub where_tokens: Vec<String>,
    pub query_type: String,
}

impl Default for Marco {
    fn default() -> Self {
        Marco {
            where_tokens: vec!["where".into(), "where's".into(), "wheres".into()],
            query_type: "LOCATION".into(),
        }
    }
}

impl PipelineConfig {
    /// Reads `path`; relative paths inside are taken relative to the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DataError(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: PipelineConfig =
            toml::from_str(&text).map_err(|e| DataError(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let p = &mut cfg.paths;
        for f in [&mut p.corpus, &mut p.gazetteer, &mut p.type_schema, &mut p.class_map, &mut p.out] {
            if f.is_relative() {
                *f = base.join(&*f);
            }
        }
        if let Some(f) = cfg.endpoint.fixtures.as_mut().filter(|f| f.is_relative()) {
            *f = base.join(&*f);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.predictor.params.validate()?;
        if self.predictor.methods.is_empty() {
            return Err(DataError("predictor.methods is empty".into()).into());
        }
        if self.k_folds < 2 || self.k_max == 0 {
            return Err(DataError("k_folds must be >= 2 and k_max >= 1".into()).into());
        }
        Ok(())
    }

    /// Hex SHA-256 of the effective settings. File locations are left out
    /// so the same run in another directory hashes the same.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("paths");
            if let Some(e) = obj.get_mut("endpoint").and_then(|e| e.as_object_mut()) {
                e.remove("fixtures");
            }
        }
        let mut h = Sha256::new();
        h.update(v.to_string().as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn require_inputs(&self, files: &[&Path]) -> Result<()> {
        for f in files {
            if !f.is_file() {
                return Err(DataError(format!("input file {} does not exist", f.display())))
                    .context("check the paths section of the config");
            }
        }
        Ok(())
    }
}
