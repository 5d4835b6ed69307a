//! Seeded SNR sweeps of the full link.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::detect::{detect_lmmse, detect_map_exact, hard_decisions, CandidateSpace, LlrMode};
use super::ofdm::{build_ofdm_channel, CyclicPrefix};
use super::stats::{wilson_interval, Z95};
use crate::channel::{sample_channel, ChannelProfile};
use crate::coding::{BcjrDecoder, ConvCode, Interleaver, MaxStar};
use crate::ddmatrix::{build_heff, OtfsGrid};
use crate::error::{Error, Result};
use crate::format::fixed6;
use crate::matrix::ComplexMatrix;
use crate::modem::{awgn, bpsk_symbols, NoiseSpec};
use crate::rng::{derive_seed, substream, tag};

/// Trials evaluated per parallel batch before the stopping rule is checked.
const BATCH: u64 = 256;

pub const DEFAULT_MAX_FRAME_ERRORS: u64 = 100;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Waveform {
    #[default]
    Otfs,
    Ofdm,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detector {
    #[default]
    MapExact,
    Lmmse,
}

impl Detector {
    pub fn description(self) -> &'static str {
        match self {
            Detector::MapExact => "exact MAP detection by full enumeration",
            Detector::Lmmse => {
                "LMMSE equalization with Gaussian LLRs (substitute for ML detection of large frames)"
            }
        }
    }
}

/// Everything needed to reproduce a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub grid: OtfsGrid,
    pub channel: ChannelProfile,
    pub waveform: Waveform,
    pub cyclic_prefix: CyclicPrefix,
    /// `None` transmits uncoded BPSK.
    pub code: Option<ConvCode>,
    pub interleave: bool,
    pub detector: Detector,
    pub llr_mode: LlrMode,
    pub decoder: MaxStar,
    /// Es/N0 points in dB; `inf` turns the noise off.
    #[serde(with = "snr_list")]
    pub snr_db: Vec<f64>,
    pub max_trials: u64,
    pub max_frame_errors: u64,
    pub seed: u64,
}

impl SimConfig {
    /// Uncoded OTFS with exact MAP detection.
    pub fn new(
        grid: OtfsGrid,
        channel: ChannelProfile,
        snr_db: Vec<f64>,
        max_trials: u64,
        seed: u64,
    ) -> Self {
        Self {
            grid,
            channel,
            waveform: Waveform::Otfs,
            cyclic_prefix: CyclicPrefix::Frame,
            code: None,
            interleave: true,
            detector: Detector::MapExact,
            llr_mode: LlrMode::FullSum,
            decoder: MaxStar::Exact,
            snr_db,
            max_trials,
            max_frame_errors: DEFAULT_MAX_FRAME_ERRORS,
            seed,
        }
    }

    /// Data bits carried per frame.
    pub fn data_len(&self) -> Result<usize> {
        let mn = self.grid.size();
        match &self.code {
            None => Ok(mn),
            Some(code) => {
                let n = code.outputs();
                if mn % n != 0 || mn / n <= code.memory {
                    return Err(Error::config(
                        "code",
                        format!(
                            "frame of {mn} symbols cannot carry a terminated rate-1/{n} code with memory {}",
                            code.memory
                        ),
                    ));
                }
                Ok(mn / n - code.memory)
            }
        }
    }

    /// Seed of the fixed interleaver used for every trial.
    pub fn interleaver_seed(&self) -> u64 {
        derive_seed(self.seed, &[tag::INTERLEAVER])
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.channel.validate(&self.grid)?;
        if self.snr_db.is_empty() {
            return Err(Error::config("sim.snr_db", "at least one SNR point is required"));
        }
        if self.snr_db.iter().any(|s| s.is_nan() || *s == f64::NEG_INFINITY) {
            return Err(Error::config(
                "sim.snr_db",
                "SNR values must be numbers below +inf",
            ));
        }
        if self.max_trials == 0 {
            return Err(Error::config("sim.max_trials", "must be at least 1"));
        }
        if self.max_frame_errors == 0 {
            return Err(Error::config("sim.max_frame_errors", "must be at least 1"));
        }
        if self.waveform == Waveform::Ofdm
            && self.cyclic_prefix == CyclicPrefix::Symbol
            && self.channel.l_max >= self.grid.m
        {
            return Err(Error::config(
                "sim.cyclic_prefix",
                format!("per-symbol prefix needs l_max < M = {}", self.grid.m),
            ));
        }
        let data_len = self.data_len()?;
        if self.detector == Detector::MapExact {
            match &self.code {
                None if self.grid.size() > 20 => {
                    return Err(Error::Infeasible(format!(
                        "map_exact needs M·N ≤ 20 for uncoded frames, got {}; use lmmse",
                        self.grid.size()
                    )))
                }
                Some(_) if data_len > 12 => {
                    return Err(Error::Infeasible(format!(
                        "map_exact needs at most 12 data bits per coded frame, got {data_len}; use lmmse"
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// One SNR point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub snr_db: f64,
    pub trials: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub fer: f64,
    pub ber: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
    pub data_bits_per_frame: usize,
    pub interleaver_seed: Option<u64>,
    pub detector: String,
}

pub const SWEEP_CSV_HEADER: &str =
    "snr_db,trials,frame_errors,bit_errors,fer,ber,ci95_low,ci95_high,wall_seconds";

impl SweepResult {
    /// CSV with the fixed header. Wall-clock time is written as 0 unless
    /// `timing` is set, so repeated runs are byte-identical.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut out = String::from(SWEEP_CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                fixed6(r.snr_db),
                r.trials,
                r.frame_errors,
                r.bit_errors,
                fixed6(r.fer),
                fixed6(r.ber),
                fixed6(r.ci95_low),
                fixed6(r.ci95_high),
                if timing {
                    fixed6(r.wall_seconds)
                } else {
                    "0".to_string()
                }
            ));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrialOutcome {
    pub bit_errors: u64,
    pub frame_error: bool,
}

/// Immutable per-run state shared by all trials.
pub struct Link {
    config: SimConfig,
    data_len: usize,
    interleaver: Interleaver,
    space: Option<CandidateSpace>,
    decoder: Option<BcjrDecoder>,
}

impl Link {
    pub fn new(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        let data_len = config.data_len()?;
        let mn = config.grid.size();
        let interleaver = match (&config.code, config.interleave) {
            (Some(_), true) => Interleaver::random(mn, config.interleaver_seed()),
            _ => Interleaver::identity(mn),
        };
        let space = match (config.detector, &config.code) {
            (Detector::MapExact, None) => Some(CandidateSpace::uncoded(mn, 1.0)?),
            (Detector::MapExact, Some(code)) => {
                Some(CandidateSpace::coded(code, data_len, &interleaver, 1.0)?)
            }
            (Detector::Lmmse, _) => None,
        };
        let decoder = config.code.as_ref().map(|c| BcjrDecoder::new(c, config.decoder));
        Ok(Self {
            config: config.clone(),
            data_len,
            interleaver,
            space,
            decoder,
        })
    }

    pub fn data_len(&self) -> usize {
        self.data_len
    }

    pub fn channel_matrix(
        &self,
        gains: &[crate::matrix::C64],
        paths: &[crate::ddmatrix::PathIndex],
    ) -> Result<ComplexMatrix> {
        match self.config.waveform {
            Waveform::Otfs => Ok(build_heff(&self.config.grid, gains, paths)?.matrix),
            Waveform::Ofdm => build_ofdm_channel(&self.config.grid, self.config.cyclic_prefix, gains, paths),
        }
    }

    /// Runs trial `trial` at SNR index `snr_index`. Data, channel and noise
    /// come from separate substreams keyed by those indices, so OTFS and
    /// OFDM runs with the same seed see identical draws.
    pub fn run_trial(&self, snr_index: usize, trial: u64) -> Result<TrialOutcome> {
        let cfg = &self.config;
        let noise = NoiseSpec::from_snr_db(cfg.snr_db[snr_index]);
        let coords = |t| [snr_index as u64, trial, t];
        let mut data_rng = substream(cfg.seed, &coords(tag::DATA));
        let data: Vec<u8> = (0..self.data_len).map(|_| data_rng.random_range(0..2)).collect();
        let coded = match &cfg.code {
            Some(code) => self.interleaver.interleave(&code.encode(&data)),
            None => data.clone(),
        };
        let x = bpsk_symbols(&coded, noise.es);
        let ch = sample_channel(&cfg.channel, &mut substream(cfg.seed, &coords(tag::CHANNEL)))?;
        let h = self.channel_matrix(&ch.gains, &ch.paths)?;
        let mut y = h.mul_vec(&x);
        if !noise.is_noiseless() {
            let w = awgn(y.len(), noise.n0, &mut substream(cfg.seed, &coords(tag::NOISE)));
            for (v, w) in y.iter_mut().zip(w) {
                *v += w;
            }
        }
        let decided = match (&self.space, &self.decoder) {
            (Some(space), _) => detect_map_exact(&y, &h, &noise, space, cfg.llr_mode)?.bits,
            (None, Some(decoder)) => {
                let llrs = self.interleaver.deinterleave(&detect_lmmse(&y, &h, &noise)?);
                decoder.decode(&llrs, self.data_len)?.bits
            }
            (None, None) => hard_decisions(&detect_lmmse(&y, &h, &noise)?),
        };
        let bit_errors = decided.iter().zip(&data).filter(|(a, b)| a != b).count() as u64;
        Ok(TrialOutcome {
            bit_errors,
            frame_error: bit_errors > 0,
        })
    }
}

fn run_point(link: &Link, snr_index: usize) -> Result<SweepRecord> {
    let cfg = &link.config;
    let start = Instant::now();
    let (mut trials, mut frame_errors, mut bit_errors) = (0u64, 0u64, 0u64);
    'outer: while trials < cfg.max_trials {
        let end = (trials + BATCH).min(cfg.max_trials);
        let outcomes: Vec<Result<TrialOutcome>> = (trials..end)
            .into_par_iter()
            .map(|t| link.run_trial(snr_index, t))
            .collect();
        for outcome in outcomes {
            let o = outcome?;
            trials += 1;
            bit_errors += o.bit_errors;
            frame_errors += u64::from(o.frame_error);
            if frame_errors >= cfg.max_frame_errors {
                break 'outer;
            }
        }
    }
    let (ci95_low, ci95_high) = wilson_interval(frame_errors, trials, Z95);
    Ok(SweepRecord {
        snr_db: cfg.snr_db[snr_index],
        trials,
        frame_errors,
        bit_errors,
        fer: frame_errors as f64 / trials as f64,
        ber: bit_errors as f64 / (trials as f64 * link.data_len as f64),
        ci95_low,
        ci95_high,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Runs every SNR point on a pool of `workers` threads (0 means all cores).
/// Trials are scanned in index order and the stopping rule is applied
/// exactly, so the records do not depend on `workers`.
pub fn run_sweep(config: &SimConfig, workers: usize) -> Result<SweepResult> {
    let link = Link::new(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    let records = pool.install(|| {
        (0..config.snr_db.len())
            .map(|s| run_point(&link, s))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(SweepResult {
        records,
        data_bits_per_frame: link.data_len,
        interleaver_seed: (config.code.is_some() && config.interleave).then(|| config.interleaver_seed()),
        detector: config.detector.description().to_string(),
    })
}

/// The same sweep with the OFDM waveform on the identical seeded draws.
pub fn run_ofdm_baseline(config: &SimConfig, workers: usize) -> Result<SweepResult> {
    let ofdm = SimConfig {
        waveform: Waveform::Ofdm,
        ..config.clone()
    };
    run_sweep(&ofdm, workers)
}

/// SNR lists may hold `inf`, which JSON cannot represent as a number, so
/// infinite points are written as the string `"inf"`.
mod snr_list {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Point {
        Finite(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|&x| {
                if x.is_finite() {
                    Point::Finite(x)
                } else {
                    Point::Text(x.to_string())
                }
            })
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Point>::deserialize(d)?
            .into_iter()
            .map(|p| match p {
                Point::Finite(x) => Ok(x),
                Point::Text(t) => t.parse().map_err(serde::de::Error::custom),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::stats::rayleigh_bpsk_ber;

    fn tiny(snr: Vec<f64>, trials: u64) -> SimConfig {
        SimConfig::new(
            OtfsGrid::new(2, 2, 15e3).unwrap(),
            ChannelProfile::rayleigh(2, 1, 1),
            snr,
            trials,
            17,
        )
    }

    #[test]
    fn frame_layout() {
        let mut cfg = tiny(vec![0.0], 1);
        cfg.grid = OtfsGrid::new(4, 4, 1.0).unwrap();
        cfg.code = Some(ConvCode::code_a());
        assert_eq!(cfg.data_len().unwrap(), 7);
        cfg.code = Some(ConvCode::code_d());
        assert_eq!(cfg.data_len().unwrap(), 2);
        cfg.grid = OtfsGrid::new(8, 4, 1.0).unwrap();
        assert_eq!(cfg.data_len().unwrap(), 10);
        cfg.grid = OtfsGrid::new(3, 4, 1.0).unwrap();
        assert!(cfg.data_len().is_err());
        cfg.code = Some(ConvCode::new("x", vec![0b11, 0b10, 0b1]).unwrap());
        cfg.grid = OtfsGrid::new(5, 2, 1.0).unwrap();
        assert!(cfg.data_len().is_err());
    }

    #[test]
    fn infeasible_detectors_are_rejected() {
        let mut cfg = tiny(vec![0.0], 1);
        cfg.grid = OtfsGrid::new(8, 4, 1.0).unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Infeasible(_))));
        cfg.detector = Detector::Lmmse;
        assert!(cfg.validate().is_ok());
        cfg.max_trials = 0;
        assert!(matches!(cfg.validate(), Err(Error::Config { .. })));
    }

    #[test]
    fn noiseless_runs_are_error_free() {
        for code in [None, Some(ConvCode::code_a()), Some(ConvCode::code_b())] {
            for detector in [Detector::MapExact, Detector::Lmmse] {
                let mut cfg = tiny(vec![f64::INFINITY], 200);
                cfg.grid = OtfsGrid::new(4, 4, 1.0).unwrap();
                cfg.channel = ChannelProfile::rayleigh(1, 0, 0);
                cfg.code = code.clone();
                cfg.detector = detector;
                if code.is_none() && detector == Detector::MapExact {
                    cfg.grid = OtfsGrid::new(2, 4, 1.0).unwrap();
                }
                let r = run_sweep(&cfg, 2).unwrap();
                assert_eq!(r.records[0].frame_errors, 0, "{code:?} {detector:?}");
            }
        }
    }

    #[test]
    fn results_do_not_depend_on_worker_count() {
        let mut cfg = tiny(vec![0.0, 5.0], 700);
        cfg.max_frame_errors = 150;
        let a = run_sweep(&cfg, 1).unwrap();
        let b = run_sweep(&cfg, 4).unwrap();
        assert_eq!(a.to_csv(false), b.to_csv(false));
        assert_eq!(a.records[0].frame_errors, 150);
        assert!(a.records[0].trials < 700);
    }

    #[test]
    fn csv_schema() {
        let r = run_sweep(&tiny(vec![10.0], 50), 1).unwrap();
        let csv = r.to_csv(false);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], SWEEP_CSV_HEADER);
        assert_eq!(lines.len(), 2);
        assert!(lines[1].ends_with(",0"));
        assert_eq!(lines[1].split(',').count(), 9);
    }

    #[test]
    fn flat_rayleigh_ber_matches_closed_form() {
        let mut cfg = SimConfig::new(
            OtfsGrid::new(1, 1, 1.0).unwrap(),
            ChannelProfile::rayleigh(1, 0, 0),
            vec![0.0, 10.0],
            20_000,
            3,
        );
        cfg.max_frame_errors = u64::MAX;
        let r = run_sweep(&cfg, 0).unwrap();
        for rec in &r.records {
            let expected = rayleigh_bpsk_ber(10f64.powf(rec.snr_db / 10.0));
            let width = rec.ci95_high - rec.ci95_low;
            assert!((rec.ber - expected).abs() <= 3.0 * width, "{rec:?} vs {expected}");
        }
    }

    #[test]
    fn ofdm_and_otfs_share_draws() {
        let mut cfg = tiny(vec![f64::INFINITY], 20);
        cfg.channel = ChannelProfile::rayleigh(1, 0, 0);
        let link_otfs = Link::new(&cfg).unwrap();
        let link_ofdm = Link::new(&SimConfig {
            waveform: Waveform::Ofdm,
            ..cfg.clone()
        })
        .unwrap();
        for t in 0..20 {
            assert_eq!(
                link_otfs.run_trial(0, t).unwrap(),
                link_ofdm.run_trial(0, t).unwrap()
            );
        }
    }
}
