//! Checkpoints: `params.bin` holds every tensor as little-endian f32 in
//! manifest order; `manifest.json` names the tensors and the run.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, IoError};
use crate::ppo::network::{ActorCritic, NetworkSpec};
use crate::seeding::{stream_rng, Stream};
use crate::sensors::ObsConfig;

pub const CHECKPOINT_SCHEMA: u32 = 1;
pub const PARAMS_FILE: &str = "params.bin";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub schema_version: u32,
    pub dtype: String,
    pub config_name: String,
    pub obs_config: ObsConfig,
    pub network: NetworkSpec,
    pub tensors: Vec<TensorEntry>,
    pub iteration: usize,
    pub timesteps: u64,
    pub seed: u64,
    pub config_hash: String,
}

pub struct Checkpoint {
    pub manifest: CheckpointManifest,
    pub net: ActorCritic,
}

impl Checkpoint {
    /// Rejects use with an observation config of a different length.
    pub fn check_config(&self, config_name: &str, config: &ObsConfig) -> Result<(), ConfigError> {
        let policy_dim = self.net.input_dim();
        if config.obs_len() != policy_dim {
            return Err(ConfigError::DimensionMismatch {
                config: config_name.to_string(),
                config_dim: config.obs_len(),
                policy_dim,
            });
        }
        Ok(())
    }
}

pub struct CheckpointMeta<'a> {
    pub config_name: &'a str,
    pub obs_config: ObsConfig,
    pub iteration: usize,
    pub timesteps: u64,
    pub seed: u64,
    pub config_hash: &'a str,
}

pub fn save_checkpoint(
    dir: &Path,
    net: &ActorCritic,
    meta: &CheckpointMeta,
) -> Result<(), IoError> {
    fs::create_dir_all(dir).map_err(|e| IoError::io(dir, e))?;
    let manifest = CheckpointManifest {
        schema_version: CHECKPOINT_SCHEMA,
        dtype: "f32-le".into(),
        config_name: meta.config_name.to_string(),
        obs_config: meta.obs_config,
        network: net.spec().clone(),
        tensors: net
            .tensor_infos()
            .into_iter()
            .map(|t| TensorEntry {
                name: t.name,
                shape: t.shape,
            })
            .collect(),
        iteration: meta.iteration,
        timesteps: meta.timesteps,
        seed: meta.seed,
        config_hash: meta.config_hash.to_string(),
    };
    let bytes: Vec<u8> = net
        .flat_params()
        .iter()
        .flat_map(|&p| (p as f32).to_le_bytes())
        .collect();
    let params_path = dir.join(PARAMS_FILE);
    fs::write(&params_path, bytes).map_err(|e| IoError::io(&params_path, e))?;
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&manifest_path, text).map_err(|e| IoError::io(&manifest_path, e))
}

pub fn load_checkpoint(dir: &Path) -> Result<Checkpoint, IoError> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&manifest_path).map_err(|e| IoError::io(&manifest_path, e))?;
    let manifest: CheckpointManifest = serde_json::from_str(&text)
        .map_err(|e| IoError::malformed("checkpoint manifest", &manifest_path, e))?;
    if manifest.schema_version != CHECKPOINT_SCHEMA {
        return Err(IoError::malformed(
            "checkpoint manifest",
            &manifest_path,
            format!("unsupported schema version {}", manifest.schema_version),
        ));
    }
    // Initial values are overwritten below; any rng will do.
    let mut net = ActorCritic::new(
        manifest.network.clone(),
        &mut stream_rng(0, Stream::PolicyInit, 0),
    );
    let expected: Vec<TensorEntry> = net
        .tensor_infos()
        .into_iter()
        .map(|t| TensorEntry {
            name: t.name,
            shape: t.shape,
        })
        .collect();
    if expected != manifest.tensors {
        return Err(IoError::malformed(
            "checkpoint manifest",
            &manifest_path,
            "tensor list does not match the network spec",
        ));
    }
    let params_path = dir.join(PARAMS_FILE);
    let bytes = fs::read(&params_path).map_err(|e| IoError::io(&params_path, e))?;
    if bytes.len() != 4 * net.param_count() {
        return Err(IoError::malformed(
            "checkpoint parameters",
            &params_path,
            format!(
                "expected {} bytes, found {}",
                4 * net.param_count(),
                bytes.len()
            ),
        ));
    }
    let flat: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    net.set_flat_params(&flat);
    Ok(Checkpoint { manifest, net })
}
