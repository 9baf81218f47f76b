//! Optional JSON configuration file. Flags win over config values; the
//! config supplies whatever a command needs and was not given on the
//! command line.

use std::path::Path;

use serde::Deserialize;

use hausmet_core::cloud::ShapeSpec;
use hausmet_core::metric::MetricSpec;

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
pub struct FileConfig {
    pub metric: Option<MetricSpec>,
    pub shape: Option<ShapeSpec>,
    pub s: Option<f64>,
    pub delta: Option<f64>,
    pub eps: Option<f64>,
    pub n: Option<usize>,
    pub grid: Option<usize>,
    pub level: Option<u32>,
    pub levels: Option<String>,
    pub alpha: Option<f64>,
    pub targets: Option<Vec<Vec<f64>>>,
    pub radius: Option<f64>,
    pub tol: Option<f64>,
    pub field: Option<String>,
    pub map: Option<String>,
    pub domain: Option<String>,
    pub samples: Option<usize>,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig, String> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| format!("cannot read config {}: {e}", p.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("bad config {}: {e}", p.display()))
        }
    }
}
