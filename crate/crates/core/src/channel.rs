//! Delay-Doppler channel realizations.

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ddmatrix::{OtfsGrid, PathIndex};
use crate::error::{Error, Result};
use crate::matrix::C64;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Statistical description of the P-path channel: uniform power-delay
/// profile, i.i.d. taps `CN(μ, 1/P)`, integer indices drawn uniformly from
/// `[0, l_max] × [-k_max, k_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile {
    pub paths: usize,
    pub l_max: usize,
    pub k_max: usize,
    /// Mean of every tap; zero gives Rayleigh fading.
    pub mean: C64,
    /// Draw the P delay-Doppler bins without replacement.
    pub distinct_bins: bool,
}

impl ChannelProfile {
    pub fn rayleigh(paths: usize, l_max: usize, k_max: usize) -> Self {
        Self {
            paths,
            l_max,
            k_max,
            mean: C64::new(0.0, 0.0),
            distinct_bins: true,
        }
    }

    pub fn is_rayleigh(&self) -> bool {
        self.mean == C64::new(0.0, 0.0)
    }

    /// Number of delay-Doppler bins the indices are drawn from.
    pub fn bin_count(&self) -> usize {
        (self.l_max + 1) * (2 * self.k_max + 1)
    }

    pub fn validate(&self, grid: &OtfsGrid) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::config("channel.paths", "must be at least 1"));
        }
        if self.l_max >= grid.size() {
            return Err(Error::config(
                "channel.l_max",
                format!("{} must be below M·N = {}", self.l_max, grid.size()),
            ));
        }
        if self.k_max > grid.size() {
            return Err(Error::config(
                "channel.k_max",
                format!("{} must not exceed M·N = {}", self.k_max, grid.size()),
            ));
        }
        if self.distinct_bins && self.paths > self.bin_count() {
            return Err(Error::config(
                "channel.paths",
                format!(
                    "{} distinct paths requested but only {} delay-Doppler bins exist",
                    self.paths,
                    self.bin_count()
                ),
            ));
        }
        if !(self.mean.re.is_finite() && self.mean.im.is_finite()) {
            return Err(Error::config("channel.mean", "must be finite"));
        }
        Ok(())
    }

    /// Maps a bin number in `0..bin_count()` to its indices.
    pub fn bin(&self, b: usize) -> PathIndex {
        let width = 2 * self.k_max + 1;
        PathIndex::new(b / width, (b % width) as i64 - self.k_max as i64)
    }
}

/// One draw of the channel: gains plus delay/Doppler indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub gains: Vec<C64>,
    pub paths: Vec<PathIndex>,
}

impl ChannelRealization {
    /// A single unit path with zero delay and Doppler.
    pub fn identity() -> Self {
        Self {
            gains: vec![C64::new(1.0, 0.0)],
            paths: vec![PathIndex::new(0, 0)],
        }
    }

    pub fn delays(&self) -> Vec<usize> {
        self.paths.iter().map(|p| p.delay).collect()
    }

    pub fn dopplers(&self) -> Vec<i64> {
        self.paths.iter().map(|p| p.doppler).collect()
    }

    /// Physical delays in seconds, `lᵢ / (M Δf)`.
    pub fn delays_seconds(&self, grid: &OtfsGrid) -> Vec<f64> {
        self.paths
            .iter()
            .map(|p| p.delay as f64 * grid.delay_resolution())
            .collect()
    }

    /// Physical Doppler shifts in Hz, `kᵢ / (N T)`.
    pub fn dopplers_hz(&self, grid: &OtfsGrid) -> Vec<f64> {
        self.paths
            .iter()
            .map(|p| p.doppler as f64 * grid.doppler_resolution())
            .collect()
    }
}

/// Draws the P path indices for a profile.
pub fn sample_paths<R: Rng + ?Sized>(profile: &ChannelProfile, rng: &mut R) -> Result<Vec<PathIndex>> {
    if profile.distinct_bins {
        let bins = profile.bin_count();
        if profile.paths > bins {
            return Err(Error::config(
                "channel.paths",
                format!("cannot draw {} distinct bins from {bins}", profile.paths),
            ));
        }
        Ok(index::sample(rng, bins, profile.paths)
            .into_iter()
            .map(|b| profile.bin(b))
            .collect())
    } else {
        let k = profile.k_max as i64;
        Ok((0..profile.paths)
            .map(|_| PathIndex::new(rng.random_range(0..=profile.l_max), rng.random_range(-k..=k)))
            .collect())
    }
}

/// Draws i.i.d. gains `CN(μ, 1/P)` (variance `1/(2P)` per real dimension).
pub fn sample_gains<R: Rng + ?Sized>(profile: &ChannelProfile, rng: &mut R) -> Vec<C64> {
    let sigma = (0.5 / profile.paths as f64).sqrt();
    (0..profile.paths)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            profile.mean + C64::new(re, im) * sigma
        })
        .collect()
}

pub fn sample_channel<R: Rng + ?Sized>(profile: &ChannelProfile, rng: &mut R) -> Result<ChannelRealization> {
    let paths = sample_paths(profile, rng)?;
    let gains = sample_gains(profile, rng);
    Ok(ChannelRealization { gains, paths })
}

/// Maximum Doppler index `round(ν_max · N · T)` with `ν_max = (v/c) f_c`.
pub fn doppler_index_from_speed(speed_kmh: f64, carrier_hz: f64, n: usize, delta_f: f64) -> i64 {
    let v = speed_kmh / 3.6;
    let nu_max = v / SPEED_OF_LIGHT * carrier_hz;
    (nu_max * n as f64 / delta_f).round() as i64
}
