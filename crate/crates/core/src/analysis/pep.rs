//! Pairwise error probability bounds built from the spectrum of `Ω(e)`.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::ddmatrix::CodewordDifferenceMatrix;
use crate::error::{Error, Result};
use crate::matrix::{inner, C64};

/// `exp(-γ hᴴΩh)` evaluated as a quadratic form.
pub fn conditional_pep_bound(omega: &CodewordDifferenceMatrix, h: &[C64], gamma: f64) -> Result<f64> {
    if h.len() != omega.paths() {
        return Err(Error::Dimension(format!(
            "{} gains for a {}-path Ω",
            h.len(),
            omega.paths()
        )));
    }
    let q = inner(h, &omega.omega.mul_vec(h)).re;
    Ok((-gamma * q).exp())
}

/// `exp(-γ Σ λᵢ|h̃ᵢ|²)` with `h̃ᵢ = vᵢᴴh`, the eigenbasis route.
pub fn conditional_pep_bound_eigen(omega: &CodewordDifferenceMatrix, h: &[C64], gamma: f64) -> Result<f64> {
    if h.len() != omega.paths() {
        return Err(Error::Dimension(format!(
            "{} gains for a {}-path Ω",
            h.len(),
            omega.paths()
        )));
    }
    let q: f64 = omega
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &l)| l * inner(&omega.eigenvector(i), h).norm_sqr())
        .sum();
    Ok((-gamma * q).exp())
}

/// Per-eigendirection Rician factors for taps with common mean `μ`.
///
/// `k[i] = |vᵢᴴ μ1|²` is the squared mean of `h̃ᵢ`; `k_bar[i] = P·k[i]` is
/// the same factor after normalizing `h̃ᵢ` to unit variance. The product
/// bound is the exact average of the conditional bound when fed `k_bar`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RicianFactors {
    pub k: Vec<f64>,
    pub k_bar: Vec<f64>,
}

impl RicianFactors {
    pub fn rayleigh(p: usize) -> Self {
        Self {
            k: vec![0.0; p],
            k_bar: vec![0.0; p],
        }
    }
}

pub fn rician_factors(omega: &CodewordDifferenceMatrix, mean: C64) -> RicianFactors {
    let p = omega.paths();
    let mu = vec![mean; p];
    let k: Vec<f64> = (0..p)
        .map(|i| inner(&omega.eigenvector(i), &mu).norm_sqr())
        .collect();
    let k_bar = k.iter().map(|v| v * p as f64).collect();
    RicianFactors { k, k_bar }
}

/// `Π 1/(1 + γλᵢ/P) · exp(-K̄ᵢ (γλᵢ/P) / (1 + γλᵢ/P))` over all eigenvalues
/// (zero eigenvalues contribute a factor of one).
pub fn unconditional_pep_rician(eigenvalues: &[f64], k_bar: &[f64], gamma: f64) -> Result<f64> {
    if eigenvalues.len() != k_bar.len() {
        return Err(Error::Dimension(format!(
            "{} Rician factors for {} eigenvalues",
            k_bar.len(),
            eigenvalues.len()
        )));
    }
    let p = eigenvalues.len() as f64;
    let log: f64 = eigenvalues
        .iter()
        .zip(k_bar)
        .map(|(&l, &k)| {
            let a = gamma * l / p;
            -a.ln_1p() - k * a / (1.0 + a)
        })
        .sum();
    Ok(log.exp())
}

/// Rayleigh special case of [`unconditional_pep_rician`].
pub fn unconditional_pep_rayleigh_product(eigenvalues: &[f64], gamma: f64) -> f64 {
    let p = eigenvalues.len() as f64;
    eigenvalues
        .iter()
        .map(|&l| -(gamma * l / p).ln_1p())
        .sum::<f64>()
        .exp()
}

/// High-SNR determinant form `det(Ω)⁻¹ (γ/P)^{-P}`.
pub fn unconditional_pep_rayleigh(omega: &CodewordDifferenceMatrix, gamma: f64) -> Result<f64> {
    if !omega.is_full_rank() {
        return Err(Error::RankDeficient {
            rank: omega.rank,
            dim: omega.paths(),
        });
    }
    let p = omega.paths() as f64;
    let log_det: f64 = omega.eigenvalues.iter().map(|l| l.ln()).sum();
    Ok((-log_det - p * (gamma / p).ln()).exp())
}

/// Mean and variance of `ψ = Σ λᵢ|h̄ᵢ|²` with unit-variance `h̄ᵢ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianApproxState {
    pub mu_psi: f64,
    pub sigma2_psi: f64,
}

impl GaussianApproxState {
    pub fn new(eigenvalues: &[f64], k_bar: &[f64]) -> Result<Self> {
        if eigenvalues.len() != k_bar.len() {
            return Err(Error::Dimension(format!(
                "{} Rician factors for {} eigenvalues",
                k_bar.len(),
                eigenvalues.len()
            )));
        }
        let mu_psi = eigenvalues.iter().zip(k_bar).map(|(l, k)| l * (1.0 + k)).sum();
        let sigma2_psi = eigenvalues
            .iter()
            .zip(k_bar)
            .map(|(l, k)| l * l * (1.0 + 2.0 * k))
            .sum();
        Ok(Self { mu_psi, sigma2_psi })
    }

    pub fn rayleigh(eigenvalues: &[f64]) -> Self {
        Self {
            mu_psi: eigenvalues.iter().sum(),
            sigma2_psi: eigenvalues.iter().map(|l| l * l).sum(),
        }
    }

    /// `exp(γ²σ²/(2P²) - γμ/P) · Q(γσ/P - μ/σ)`, evaluated in the log domain.
    pub fn pep_bound(&self, gamma: f64, p: usize) -> Result<f64> {
        if !(self.sigma2_psi > 0.0) {
            return Err(Error::ZeroSpectrum);
        }
        let p = p as f64;
        let sigma = self.sigma2_psi.sqrt();
        let a = gamma / p;
        let log = 0.5 * a * a * self.sigma2_psi - a * self.mu_psi + ln_q(a * sigma - self.mu_psi / sigma);
        Ok(log.exp().min(1.0))
    }
}

/// `ln Q(x)` for the standard normal tail, accurate far into the tail.
pub fn ln_q(x: f64) -> f64 {
    if x < 30.0 {
        (0.5 * erfc(x / std::f64::consts::SQRT_2)).ln()
    } else {
        let x2 = x * x;
        -0.5 * x2 - (x * (2.0 * std::f64::consts::PI).sqrt()).ln() + (1.0 - 1.0 / x2 + 3.0 / (x2 * x2)).ln()
    }
}

/// Large-P Gaussian-approximation bounds for Rayleigh fading.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LargePBound {
    /// `exp(-(Σλ)² / (2Σλ²))`, valid once the SNR condition holds.
    pub gauss_bound: f64,
    /// `exp(-γ d_E² / 2)`.
    pub theorem3_bound: f64,
    /// Smallest `γ` for which the Chernoff step is valid: `P Σλ / Σλ²`.
    pub threshold: f64,
    pub snr_condition_met: bool,
}

pub fn large_p_pep_bound(omega: &CodewordDifferenceMatrix, gamma: f64) -> Result<LargePBound> {
    let sum: f64 = omega.eigenvalues.iter().sum();
    let sum_sq: f64 = omega.eigenvalues.iter().map(|l| l * l).sum();
    if !(sum_sq > 0.0) {
        return Err(Error::ZeroSpectrum);
    }
    let threshold = omega.paths() as f64 * sum / sum_sq;
    Ok(LargePBound {
        gauss_bound: (-sum * sum / (2.0 * sum_sq)).exp(),
        theorem3_bound: (-gamma * omega.d_e2 / 2.0).exp(),
        threshold,
        snr_condition_met: gamma >= threshold,
    })
}
