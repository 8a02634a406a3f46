//! Run configuration shared by the command-line tools.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::metrics::EvalProtocol;
use crate::pointcloud::AugmentConfig;
use crate::sampler::{validate_families, DatasetOptions, FamilyConfig};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("unsupported config version {0}, expected {CONFIG_VERSION}")]
    Version(u32),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Output layout knobs for dataset generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    pub shard_size: usize,
    pub write_meshes: bool,
    pub write_clouds: bool,
    pub cloud_points: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        let d = DatasetOptions::default();
        Self {
            shard_size: d.shard_size,
            write_meshes: d.write_meshes,
            write_clouds: d.write_clouds,
            cloud_points: d.cloud_points,
        }
    }
}

/// Everything that determines a run's outputs, plus the thread count.
/// Stored as JSON; missing fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub seed: u64,
    pub count: usize,
    pub families: Vec<FamilyConfig>,
    pub augment: AugmentConfig,
    pub protocol: EvalProtocol,
    pub output: OutputConfig,
    /// Worker threads; 0 uses all cores. Not part of the hash.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            seed: 0,
            count: 100,
            families: FamilyConfig::defaults(),
            augment: AugmentConfig::default(),
            protocol: EvalProtocol::default(),
            output: OutputConfig::default(),
            threads: 0,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let c: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.version != CONFIG_VERSION {
            return Err(ConfigError::Version(self.version));
        }
        validate_families(&self.families).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.augment.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.protocol.validate().map_err(ConfigError::Invalid)?;
        if self.output.shard_size == 0 {
            return Err(ConfigError::Invalid("output.shard_size must be >= 1".into()));
        }
        if self.output.cloud_points == 0 {
            return Err(ConfigError::Invalid("output.cloud_points must be >= 1".into()));
        }
        Ok(())
    }

    /// Hex sha256 of the compact JSON form with `threads` zeroed.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.threads = 0;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn dataset_options(&self) -> DatasetOptions {
        DatasetOptions {
            shard_size: self.output.shard_size,
            write_meshes: self.output.write_meshes,
            write_clouds: self.output.write_clouds,
            cloud_points: self.output.cloud_points,
            config_hash: self.hash(),
        }
    }
}
