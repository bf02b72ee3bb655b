//! TOML configuration for the generation-service transport, with
//! environment-variable overrides applied on top.

use std::path::Path;
use std::time::Duration;

use finocr_core::vlm::VlmConfig;
use serde::Deserialize;

use crate::util::{read_to_string, Failure};

#[derive(Debug, Default, Deserialize)]
struct FileConfig {
    #[serde(default)]
    vlm: VlmSection,
}

#[derive(Debug, Default, Deserialize)]
struct VlmSection {
    endpoint: Option<String>,
    auth_token: Option<String>,
    timeout_secs: Option<u64>,
    retry_cap: Option<usize>,
    inflight_cap: Option<usize>,
}

/// Resolve the transport config: defaults, then the config file, then
/// FINOCR_VLM_URL / FINOCR_VLM_TOKEN from the environment.
pub fn load_vlm_config(path: Option<&Path>) -> Result<VlmConfig, Failure> {
    let mut cfg = VlmConfig::default();
    if let Some(path) = path {
        let raw = read_to_string(path)?;
        let file: FileConfig = toml::from_str(&raw)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        if let Some(endpoint) = file.vlm.endpoint {
            cfg.endpoint = endpoint;
        }
        if let Some(token) = file.vlm.auth_token {
            cfg.auth_token = Some(token);
        }
        if let Some(secs) = file.vlm.timeout_secs {
            cfg.timeout = Duration::from_secs(secs);
        }
        if let Some(cap) = file.vlm.retry_cap {
            cfg.retry_cap = cap;
        }
        if let Some(cap) = file.vlm.inflight_cap {
            cfg.inflight_cap = cap;
        }
    }
    Ok(cfg.with_env_overrides())
}
