//! Run configuration shared by every pipeline stage, stored as TOML.
//!
//! ```toml
//! seed = 7
//!
//! [thresholds]
//! med_threshold = 2
//! tau_support = 0.5
//! confidence_floor = 0.1
//! max_ngram = 4
//! epsilon = 0.01
//! epsilon_floor = 0.01
//!
//! [[backends]]
//! role = "qa"
//! kind = "mock"
//! model_id = "extractive"
//! behavior = "extractive"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::{BackendDescriptor, BackendError, BackendRole};
use crate::paraphrase::ParaphraseConfig;
use crate::textmetrics::{BleuConfig, InvBleuConfig, Normalization};
use crate::verdict::{Thresholds, VerdictConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdConfig {
    pub med_threshold: usize,
    pub tau_support: f64,
    pub confidence_floor: f64,
    pub max_ngram: usize,
    pub epsilon: f64,
    pub epsilon_floor: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            med_threshold: 2,
            tau_support: 0.5,
            confidence_floor: 0.1,
            max_ngram: 4,
            epsilon: 0.01,
            epsilon_floor: 0.01,
        }
    }
}

impl ThresholdConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.verdict_thresholds().validate().map_err(ConfigError::Invalid)?;
        if !(1..=8).contains(&self.max_ngram) {
            return Err(ConfigError::Invalid(format!("max_ngram must be in 1..=8, got {}", self.max_ngram)));
        }
        for (name, v) in [("epsilon", self.epsilon), ("epsilon_floor", self.epsilon_floor)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(ConfigError::Invalid(format!("{name} must lie in (0, 1], got {v}")));
            }
        }
        Ok(())
    }

    pub fn verdict_thresholds(&self) -> Thresholds {
        Thresholds { tau_support: self.tau_support, confidence_floor: self.confidence_floor }
    }

    pub fn bleu(&self) -> BleuConfig {
        BleuConfig { max_ngram: self.max_ngram, epsilon: self.epsilon }
    }

    pub fn inv_bleu(&self) -> InvBleuConfig {
        InvBleuConfig { bleu: self.bleu(), epsilon_floor: self.epsilon_floor, normalization: Normalization::WORDS }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParaphraseSettings {
    pub n: usize,
    pub bidirectional: bool,
}

impl Default for ParaphraseSettings {
    fn default() -> Self {
        ParaphraseSettings { n: 5, bidirectional: false }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Role-to-W override table.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mapping: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Emit How questions too.
    pub include_how: bool,
    pub thresholds: ThresholdConfig,
    pub paraphrase: ParaphraseSettings,
    pub paths: PathsConfig,
    pub backends: Vec<BackendDescriptor>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Reads a configuration file. Relative paths inside it are taken
    /// relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        let mut config =
            Self::from_toml_str(&text).map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))?;
        if let Some(base) = path.parent() {
            config.rebase(base);
        }
        Ok(config)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.paths.mapping.as_mut() {
            fix(p);
        }
        for b in &mut self.backends {
            if let Some(p) = b.fixture.as_mut() {
                fix(p);
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.thresholds.validate()?;
        if self.paraphrase.n == 0 {
            return Err(ConfigError::Invalid("paraphrase.n must be at least 1".into()));
        }
        for (i, b) in self.backends.iter().enumerate() {
            b.validate()?;
            if self.backends[..i].iter().any(|o| o.role == b.role && o.model_id == b.model_id) {
                return Err(ConfigError::Invalid(format!("backend {} {:?} listed twice", b.role, b.model_id)));
            }
        }
        Ok(())
    }

    pub fn find_backend(&self, role: BackendRole, model_id: &str) -> Option<&BackendDescriptor> {
        self.backends.iter().find(|b| b.role == role && b.model_id == model_id)
    }

    pub fn first_backend(&self, role: BackendRole) -> Option<&BackendDescriptor> {
        self.backends.iter().find(|b| b.role == role)
    }

    /// Resolves a command-line backend reference: either a compact
    /// descriptor (`mock...` or `remote:model@url`) or a model id
    /// configured for `role`.
    pub fn resolve_backend(&self, role: BackendRole, reference: &str) -> Result<BackendDescriptor, ConfigError> {
        if reference.starts_with("mock") || reference.starts_with("remote:") {
            if let Some(found) = self.find_backend(role, reference) {
                return Ok(found.clone());
            }
            let d = BackendDescriptor::parse_compact(role, reference)?;
            d.validate()?;
            return Ok(d);
        }
        self.find_backend(role, reference)
            .cloned()
            .ok_or_else(|| ConfigError::Invalid(format!("no {role} backend named {reference:?} in the configuration")))
    }

    pub fn verdict_config(&self) -> VerdictConfig {
        VerdictConfig { thresholds: self.thresholds.verdict_thresholds(), bleu: self.thresholds.bleu() }
    }

    pub fn paraphrase_config(&self) -> ParaphraseConfig {
        ParaphraseConfig {
            n: self.paraphrase.n,
            med_threshold: self.thresholds.med_threshold,
            bidirectional: self.paraphrase.bidirectional,
            inv_bleu: self.thresholds.inv_bleu(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_round_trip() {
        let mut c = RunConfig::default();
        assert_eq!(c.thresholds.med_threshold, 2);
        assert_eq!(c.verdict_config(), VerdictConfig::default());
        c.seed = 42;
        c.paths.mapping = Some("map.tsv".into());
        c.backends.push(BackendDescriptor::mock(BackendRole::Qa, "ex").with_behavior("extractive"));
        c.backends.push(BackendDescriptor::remote(BackendRole::Qg, "prophetnet", "http://127.0.0.1:9000"));
        let text = c.to_toml_string();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), c);
        assert_eq!(RunConfig::from_toml_str("").unwrap(), RunConfig::default());
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(RunConfig::from_toml_str("[thresholds]\ntau_support = 1.5\n").is_err());
        assert!(RunConfig::from_toml_str("[thresholds]\nepsilon_floor = 0.0\n").is_err());
        assert!(RunConfig::from_toml_str("[thresholds]\nmax_ngram = 0\n").is_err());
        assert!(RunConfig::from_toml_str("bogus = 1\n").is_err());
        let mock_with_endpoint = "[[backends]]\nrole = \"qa\"\nkind = \"mock\"\nmodel_id = \"m\"\nendpoint = \"http://x\"\n";
        assert!(RunConfig::from_toml_str(mock_with_endpoint).is_err());
    }

    #[test]
    fn resolves_references() {
        let mut c = RunConfig::default();
        c.backends.push(BackendDescriptor::mock(BackendRole::Qa, "t5").with_behavior("sentence"));
        assert_eq!(c.resolve_backend(BackendRole::Qa, "t5").unwrap().behavior.as_deref(), Some("sentence"));
        assert_eq!(c.resolve_backend(BackendRole::Qa, "mock:extractive").unwrap().behavior.as_deref(), Some("extractive"));
        assert!(c.resolve_backend(BackendRole::Qa, "bart").is_err());
        assert!(c.resolve_backend(BackendRole::Qg, "t5").is_err());
    }
}
