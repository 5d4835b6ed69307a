//! Monte Carlo link simulation: detectors, OFDM baseline and SNR sweeps.

pub mod detect;
pub mod ofdm;
pub mod stats;
pub mod sweep;

pub use detect::{detect_lmmse, detect_map_exact, CandidateSpace, DetectOutput, LlrMode};
pub use ofdm::{build_ofdm_channel, CyclicPrefix};
pub use stats::{linear_slope, rayleigh_bpsk_ber, wilson_interval, Z95};
pub use sweep::{
    run_ofdm_baseline, run_sweep, Detector, Link, SimConfig, SweepRecord, SweepResult, TrialOutcome,
    Waveform, DEFAULT_MAX_FRAME_ERRORS, SWEEP_CSV_HEADER,
};
