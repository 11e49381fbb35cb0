use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Run metadata recorded with every command's output. Timestamp and wall time
/// are dropped when normalized so that repeated runs compare byte for byte.
#[derive(Debug, Clone, Serialize)]
pub struct RunInfo {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub config_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

impl RunInfo {
    pub fn new(command: &str, seed: Option<u64>, config: &impl Serialize, normalize: bool, start: Instant) -> Self {
        let (timestamp, wall) = if normalize {
            (None, None)
        } else {
            let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            (Some(ts), Some(start.elapsed().as_secs_f64()))
        };
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            config_hash: config_hash(config),
            timestamp,
            wall_time_seconds: wall,
        }
    }
}

/// SHA-256 of the compact JSON form.
pub fn config_hash(config: &impl Serialize) -> String {
    let json = serde_json::to_vec(config).expect("configuration serializes");
    Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::from(e).with_context(format!("writing {}", path.display())))
}
