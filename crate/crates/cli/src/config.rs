//! Experiment files: TOML with `[grid]`, `[channel]`, `[code]` and `[sim]`.
//!
//! ```toml
//! [grid]
//! m = 4
//! n = 4
//!
//! [channel]
//! paths = 2
//! l_max = 1
//! k_max = 1
//!
//! [code]
//! name = "A"
//!
//! [sim]
//! detector = "map_exact"
//! snr_db = [0.0, 5.0, 10.0]
//! max_trials = 10000
//! ```
//!
//! Unknown keys are rejected.

use std::path::Path;

use otfs_core::channel::{doppler_index_from_speed, ChannelProfile};
use otfs_core::coding::{ConvCode, MaxStar};
use otfs_core::ddmatrix::OtfsGrid;
use otfs_core::montecarlo::{CyclicPrefix, Detector, LlrMode, SimConfig, Waveform, DEFAULT_MAX_FRAME_ERRORS};
use otfs_core::C64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Carrier used for the speed-to-Doppler conversion when none is given.
pub const DEFAULT_CARRIER_HZ: f64 = 4e9;
pub const DEFAULT_DELTA_F: f64 = 15e3;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub grid: GridSection,
    pub channel: ChannelSection,
    #[serde(default)]
    pub code: CodeSection,
    #[serde(default)]
    pub sim: SimSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub m: usize,
    pub n: usize,
    #[serde(default = "default_delta_f")]
    pub delta_f: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub paths: usize,
    pub l_max: usize,
    /// Either `k_max` or `speed_kmh` must be given.
    pub k_max: Option<usize>,
    pub speed_kmh: Option<f64>,
    pub carrier_hz: Option<f64>,
    /// Tap mean `[re, im]`; absent means Rayleigh.
    pub mean: Option<[f64; 2]>,
    #[serde(default = "yes")]
    pub distinct_bins: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSection {
    /// `A`–`D` or `uncoded`.
    pub name: Option<String>,
    /// Octal generator polynomials, e.g. `["5", "7"]`.
    pub generators: Option<Vec<String>>,
    #[serde(default = "yes")]
    pub interleave: bool,
    #[serde(default)]
    pub decoder: MaxStar,
}

impl Default for CodeSection {
    fn default() -> Self {
        Self {
            name: None,
            generators: None,
            interleave: true,
            decoder: MaxStar::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default)]
    pub waveform: Waveform,
    #[serde(default)]
    pub cyclic_prefix: CyclicPrefix,
    #[serde(default)]
    pub detector: Detector,
    #[serde(default)]
    pub llr_mode: LlrMode,
    #[serde(default)]
    pub snr_db: Vec<f64>,
    #[serde(default = "default_trials")]
    pub max_trials: u64,
    #[serde(default = "default_errors")]
    pub max_frame_errors: u64,
    pub seed: Option<u64>,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            waveform: Waveform::default(),
            cyclic_prefix: CyclicPrefix::default(),
            detector: Detector::default(),
            llr_mode: LlrMode::default(),
            snr_db: Vec::new(),
            max_trials: default_trials(),
            max_frame_errors: default_errors(),
            seed: None,
        }
    }
}

fn default_delta_f() -> f64 {
    DEFAULT_DELTA_F
}

fn yes() -> bool {
    true
}

fn default_trials() -> u64 {
    10_000
}

fn default_errors() -> u64 {
    DEFAULT_MAX_FRAME_ERRORS
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config `{}`: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn grid(&self) -> Result<OtfsGrid, CliError> {
        Ok(OtfsGrid::new(self.grid.m, self.grid.n, self.grid.delta_f)?)
    }

    pub fn channel(&self) -> Result<ChannelProfile, CliError> {
        let grid = self.grid()?;
        let c = &self.channel;
        let k_max = match (c.k_max, c.speed_kmh) {
            (Some(k), None) => k,
            (None, Some(v)) => {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(CliError::Config(
                        "channel.speed_kmh: must be a nonnegative number".into(),
                    ));
                }
                let fc = c.carrier_hz.unwrap_or(DEFAULT_CARRIER_HZ);
                doppler_index_from_speed(v, fc, grid.n, grid.delta_f) as usize
            }
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "channel.speed_kmh: give either k_max or speed_kmh, not both".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Config(
                    "channel.k_max: missing (or give speed_kmh)".into(),
                ))
            }
        };
        if c.carrier_hz.is_some() && c.speed_kmh.is_none() {
            return Err(CliError::Config(
                "channel.carrier_hz: only used together with speed_kmh".into(),
            ));
        }
        let mean = c.mean.map_or(C64::new(0.0, 0.0), |[re, im]| C64::new(re, im));
        let profile = ChannelProfile {
            paths: c.paths,
            l_max: c.l_max,
            k_max,
            mean,
            distinct_bins: c.distinct_bins,
        };
        profile.validate(&grid)?;
        Ok(profile)
    }

    pub fn code(&self) -> Result<Option<ConvCode>, CliError> {
        match (&self.code.name, &self.code.generators) {
            (Some(_), Some(_)) => Err(CliError::Config(
                "code.generators: give either name or generators, not both".into(),
            )),
            (Some(name), None) if name.eq_ignore_ascii_case("uncoded") => Ok(None),
            (Some(name), None) => ConvCode::by_name(name).map(Some).ok_or_else(|| {
                CliError::Config(format!(
                    "code.name: unknown code `{name}` (expected A, B, C, D or uncoded)"
                ))
            }),
            (None, Some(gens)) => {
                let refs: Vec<&str> = gens.iter().map(String::as_str).collect();
                Ok(Some(ConvCode::from_octal("custom", &refs)?))
            }
            (None, None) => Ok(None),
        }
    }

    /// Resolves to a simulation config. `seed` overrides `sim.seed`.
    pub fn sim_config(&self, seed: Option<u64>) -> Result<SimConfig, CliError> {
        let s = &self.sim;
        let cfg = SimConfig {
            grid: self.grid()?,
            channel: self.channel()?,
            waveform: s.waveform,
            cyclic_prefix: s.cyclic_prefix,
            code: self.code()?,
            interleave: self.code.interleave,
            detector: s.detector,
            llr_mode: s.llr_mode,
            decoder: self.code.decoder,
            snr_db: s.snr_db.clone(),
            max_trials: s.max_trials,
            max_frame_errors: s.max_frame_errors,
            seed: seed.or(s.seed).unwrap_or(DEFAULT_SEED),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
