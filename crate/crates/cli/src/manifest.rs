//! Run manifests: the resolved config plus seeds and output paths, enough
//! to re-run a sweep to byte-identical output.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use otfs_core::montecarlo::SimConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// `sim` or `ofdm`.
    pub command: String,
    pub master_seed: u64,
    pub interleaver_seed: Option<u64>,
    pub data_bits_per_frame: usize,
    pub detector: String,
    pub config: SimConfig,
    pub outputs: Vec<PathBuf>,
    pub started_unix: u64,
    pub finished_unix: u64,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read manifest `{}`: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("manifest `{}`: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Runtime(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}

/// `results.csv` → `results.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use otfs_core::channel::ChannelProfile;
    use otfs_core::ddmatrix::OtfsGrid;

    #[test]
    fn json_round_trip_keeps_infinite_snr() {
        let config = SimConfig::new(
            OtfsGrid::new(2, 2, 15e3).unwrap(),
            ChannelProfile::rayleigh(1, 0, 0),
            vec![0.0, 12.5, f64::INFINITY],
            10,
            3,
        );
        let m = RunManifest {
            tool: "otfs".into(),
            version: "0".into(),
            command: "sim".into(),
            master_seed: 3,
            interleaver_seed: None,
            data_bits_per_frame: 4,
            detector: String::new(),
            config,
            outputs: vec![PathBuf::from("a.csv")],
            started_unix: 0,
            finished_unix: 0,
        };
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("\"inf\""));
        let back: RunManifest = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn manifest_sits_next_to_output() {
        assert_eq!(
            manifest_path(Path::new("out/run.csv")),
            PathBuf::from("out/run.manifest.json")
        );
    }
}
