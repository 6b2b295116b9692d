//! Report assembly: command echo, config echo, check records, wall time.

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub mean: Option<String>,
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    pub order_tol: f64,
    pub eq_tol: f64,
    pub psd_floor: f64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub config: ConfigEcho,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<kam_core::verify::CheckRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payload: Option<Value>,
    pub wall_time_ms: u128,
    pub version: String,
}

impl Report {
    pub fn new(command: impl Into<String>, config: ConfigEcho) -> Self {
        Self {
            command: command.into(),
            config,
            checks: Vec::new(),
            payload: None,
            wall_time_ms: 0,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}
