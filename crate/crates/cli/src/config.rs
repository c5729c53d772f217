//! Run configuration: a flat JSON object, patched by `--override` and
//! `CHRONO_SEED`, then checked against the schema.

use std::path::{Path, PathBuf};

use evtime::corpus::LinkKind;
use evtime::neuralnet::{MentionHead, ModelConfig, TrainConfig};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

pub const SEED_ENV: &str = "CHRONO_SEED";

/// Which classifiers a command touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LinkKinds {
    #[serde(rename = "E-D")]
    EventDct,
    #[serde(rename = "E-T")]
    EventTimex,
    #[default]
    #[serde(rename = "both")]
    Both,
}

impl LinkKinds {
    pub fn kinds(self) -> Vec<LinkKind> {
        match self {
            LinkKinds::EventDct => vec![LinkKind::EventDct],
            LinkKinds::EventTimex => vec![LinkKind::EventTimex],
            LinkKinds::Both => vec![LinkKind::EventDct, LinkKind::EventTimex],
        }
    }
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,

    /// Directories of `*.json` documents and `*.tml` / `*.xml` TimeML files.
    #[serde(default)]
    pub corpus_dirs: Vec<PathBuf>,
    /// Tab-separated gold event times applied after loading.
    #[serde(default)]
    pub event_times: Option<PathBuf>,
    #[serde(default)]
    pub embeddings: Option<PathBuf>,
    /// Where `ed.jsonl` / `et.jsonl` are read for training; the output
    /// directory by default.
    #[serde(default)]
    pub train_dir: Option<PathBuf>,
    /// Where datasets are read for prediction; the output directory by default.
    #[serde(default)]
    pub test_dir: Option<PathBuf>,
    #[serde(default)]
    pub ed_model: Option<PathBuf>,
    #[serde(default)]
    pub et_model: Option<PathBuf>,
    /// Event-time table scored against `event_times` by `evaluate`.
    #[serde(default)]
    pub predicted_times: Option<PathBuf>,
    /// Inter-annotator table scored by `evaluate`.
    #[serde(default)]
    pub iaa_table: Option<PathBuf>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,

    #[serde(default = "default_sw")]
    pub sw: usize,
    #[serde(default)]
    pub link_kind: LinkKinds,
    #[serde(default = "default_true")]
    pub attention: bool,
    #[serde(default)]
    pub mention_head: MentionHead,

    #[serde(default = "default_word_dim")]
    pub word_dim: usize,
    #[serde(default = "default_position_dim")]
    pub position_dim: usize,
    #[serde(default = "default_hidden_dim")]
    pub hidden_dim: usize,
    #[serde(default = "default_max_offset")]
    pub max_offset: usize,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_patience")]
    pub patience: usize,
    #[serde(default = "default_clip_norm")]
    pub clip_norm: f64,
    #[serde(default = "default_validation_fraction")]
    pub validation_fraction: f64,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_sw() -> usize {
    1
}
fn default_word_dim() -> usize {
    ModelConfig::new(LinkKind::EventDct).word_dim
}
fn default_position_dim() -> usize {
    ModelConfig::new(LinkKind::EventDct).position_dim
}
fn default_hidden_dim() -> usize {
    ModelConfig::new(LinkKind::EventDct).hidden_dim
}
fn default_max_offset() -> usize {
    ModelConfig::new(LinkKind::EventDct).max_offset
}
fn default_learning_rate() -> f64 {
    TrainConfig::new(0).learning_rate
}
fn default_batch_size() -> usize {
    TrainConfig::new(0).batch_size
}
fn default_epochs() -> usize {
    TrainConfig::new(0).epochs
}
fn default_patience() -> usize {
    TrainConfig::new(0).patience
}
fn default_clip_norm() -> f64 {
    TrainConfig::new(0).clip_norm
}
fn default_validation_fraction() -> f64 {
    TrainConfig::new(0).validation_fraction
}

/// `KEY=VALUE`; the value is read as JSON when it parses, else as a string.
fn apply_override(map: &mut Map<String, Value>, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::User(format!("override {spec:?} is not KEY=VALUE")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(CliError::User(format!("override {spec:?} has an empty key")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    // A bare path for a list field means a one-element list.
    let value = match (key, value) {
        ("corpus_dirs", Value::String(s)) => Value::Array(vec![Value::String(s)]),
        (_, v) => v,
    };
    map.insert(key.to_string(), value);
    Ok(())
}

impl RunConfig {
    /// Layers: config file, then overrides in order, then the seed
    /// environment variable, then `--out`.
    pub fn load(
        path: Option<&Path>,
        overrides: &[String],
        env_seed: Option<&str>,
        out: Option<&Path>,
    ) -> Result<RunConfig, CliError> {
        let mut map = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::User(format!("cannot read config {}: {e}", p.display())))?;
                match serde_json::from_str(&text) {
                    Ok(Value::Object(m)) => m,
                    Ok(_) => return Err(CliError::User(format!("{}: config must be a JSON object", p.display()))),
                    Err(e) => return Err(CliError::User(format!("{}: {e}", p.display()))),
                }
            }
            None => Map::new(),
        };
        for o in overrides {
            apply_override(&mut map, o)?;
        }
        if let Some(seed) = env_seed {
            let seed: u64 = seed
                .trim()
                .parse()
                .map_err(|_| CliError::User(format!("{SEED_ENV}={seed:?} is not an unsigned integer")))?;
            map.insert("seed".into(), Value::from(seed));
        }
        if let Some(out) = out {
            map.insert("output_dir".into(), Value::String(out.to_string_lossy().into_owned()));
        }
        let config: RunConfig =
            serde_json::from_value(Value::Object(map)).map_err(|e| CliError::User(format!("invalid config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        for kind in [LinkKind::EventDct, LinkKind::EventTimex] {
            self.model_config(kind)
                .validate()
                .map_err(|e| CliError::User(e.to_string()))?;
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(CliError::User("batch_size and epochs must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.clip_norm > 0.0) {
            return Err(CliError::User("learning_rate and clip_norm must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(CliError::User("validation_fraction must be in [0, 1)".into()));
        }
        Ok(())
    }

    pub fn model_config(&self, kind: LinkKind) -> ModelConfig {
        ModelConfig {
            kind,
            word_dim: self.word_dim,
            position_dim: self.position_dim,
            hidden_dim: self.hidden_dim,
            max_offset: self.max_offset,
            attention: self.attention,
            mention_head: self.mention_head,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            epochs: self.epochs,
            patience: self.patience,
            seed: self.seed,
            clip_norm: self.clip_norm,
            validation_fraction: self.validation_fraction,
        }
    }

    pub fn train_dir(&self) -> &Path {
        self.train_dir.as_deref().unwrap_or(&self.output_dir)
    }

    pub fn test_dir(&self) -> &Path {
        self.test_dir.as_deref().unwrap_or(&self.output_dir)
    }

    pub fn model_path(&self, kind: LinkKind) -> PathBuf {
        let explicit = match kind {
            LinkKind::EventDct => &self.ed_model,
            LinkKind::EventTimex => &self.et_model,
        };
        explicit
            .clone()
            .unwrap_or_else(|| self.output_dir.join(format!("{}.model", file_stem(kind))))
    }
}

/// `ed` or `et`, used in file names.
pub fn file_stem(kind: LinkKind) -> &'static str {
    match kind {
        LinkKind::EventDct => "ed",
        LinkKind::EventTimex => "et",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_is_mandatory() {
        assert!(matches!(RunConfig::load(None, &[], None, None), Err(CliError::User(_))));
        let c = RunConfig::load(None, &[], Some("7"), None).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.sw, 1);
        assert_eq!(c.hidden_dim, 64);
    }

    #[test]
    fn overrides_and_env_layering() {
        let overrides = vec![
            "seed=1".to_string(),
            "sw=2".to_string(),
            "corpus_dirs=data/x".to_string(),
            "link_kind=E-T".to_string(),
            "attention=false".to_string(),
        ];
        let c = RunConfig::load(None, &overrides, None, Some(Path::new("o"))).unwrap();
        assert_eq!((c.seed, c.sw, c.attention), (1, 2, false));
        assert_eq!(c.corpus_dirs, vec![PathBuf::from("data/x")]);
        assert_eq!(c.link_kind, LinkKinds::EventTimex);
        assert_eq!(c.output_dir, PathBuf::from("o"));
        assert_eq!(c.model_path(LinkKind::EventDct), PathBuf::from("o/ed.model"));
        let c = RunConfig::load(None, &overrides, Some("99"), None).unwrap();
        assert_eq!(c.seed, 99);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let bad = |o: &str| RunConfig::load(None, &["seed=1".into(), o.into()], None, None).is_err();
        assert!(bad("colour=red"));
        assert!(bad("hidden_dim=0"));
        assert!(bad("learning_rate=-1"));
        assert!(bad("link_kind=E-X"));
        assert!(bad("novalue"));
        assert!(RunConfig::load(None, &[], Some("x"), None).is_err());
    }
}
