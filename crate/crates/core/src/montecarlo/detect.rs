//! Exact MAP and LMMSE detectors for `y = Hx + w` with BPSK symbols.

use serde::{Deserialize, Serialize};

use crate::coding::{ConvCode, Interleaver};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::modem::NoiseSpec;

/// LLR magnitude used when the noise variance is zero.
pub const LLR_CLAMP: f64 = 1e6;

/// Largest number of label bits the exact detector will enumerate.
pub const MAX_LABEL_BITS: usize = 20;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LlrMode {
    /// Exact bit marginals summed over all hypotheses.
    #[default]
    FullSum,
    /// Best hypothesis on each side.
    MaxLog,
}

/// The set of transmit vectors the exact detector searches, indexed by
/// label bits. Labels are linear: flipping label bit `j` flips the sign of
/// the symbols at `flips[j]`, and label 0 maps every symbol to `+√Es`.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSpace {
    len: usize,
    amplitude: f64,
    flips: Vec<Vec<usize>>,
}

impl CandidateSpace {
    /// Every BPSK vector of length `len`; label bit `j` is symbol `j`.
    pub fn uncoded(len: usize, es: f64) -> Result<Self> {
        Self::check(len)?;
        Ok(Self {
            len,
            amplitude: es.sqrt(),
            flips: (0..len).map(|j| vec![j]).collect(),
        })
    }

    /// The interleaved codebook of a terminated code; labels are data bits.
    pub fn coded(code: &ConvCode, data_len: usize, interleaver: &Interleaver, es: f64) -> Result<Self> {
        Self::check(data_len)?;
        let len = code.encoded_len(data_len);
        if interleaver.len() != len {
            return Err(Error::Dimension(format!(
                "interleaver of length {} for {len} coded bits",
                interleaver.len()
            )));
        }
        let flips = (0..data_len)
            .map(|j| {
                let mut unit = vec![0u8; data_len];
                unit[j] = 1;
                interleaver
                    .interleave(&code.encode(&unit))
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| b == 1)
                    .map(|(p, _)| p)
                    .collect()
            })
            .collect();
        Ok(Self {
            len,
            amplitude: es.sqrt(),
            flips,
        })
    }

    fn check(bits: usize) -> Result<()> {
        if bits > MAX_LABEL_BITS {
            return Err(Error::Infeasible(format!(
                "exact MAP detection over 2^{bits} hypotheses exceeds the 2^{MAX_LABEL_BITS} limit; use the lmmse detector"
            )));
        }
        Ok(())
    }

    pub fn label_bits(&self) -> usize {
        self.flips.len()
    }

    pub fn symbol_len(&self) -> usize {
        self.len
    }

    /// Transmit vector for a label.
    pub fn symbols(&self, label: &[u8]) -> Vec<C64> {
        let mut sign = vec![false; self.len];
        for (j, &b) in label.iter().enumerate() {
            if b == 1 {
                for &p in &self.flips[j] {
                    sign[p] ^= true;
                }
            }
        }
        sign.iter()
            .map(|&s| C64::new(if s { -self.amplitude } else { self.amplitude }, 0.0))
            .collect()
    }
}

/// Label decisions and their LLRs (`ln P(0|y)/P(1|y)`).
#[derive(Clone, Debug, PartialEq)]
pub struct DetectOutput {
    pub bits: Vec<u8>,
    pub llrs: Vec<f64>,
}

/// Exact MAP detection by enumerating every candidate. Candidates are
/// visited in Gray-code order so each step updates `Hx` with a few column
/// additions. The hard decision is the minimum-distance candidate, ties
/// going to the smallest label.
pub fn detect_map_exact(
    y: &[C64],
    h: &ComplexMatrix,
    noise: &NoiseSpec,
    space: &CandidateSpace,
    mode: LlrMode,
) -> Result<DetectOutput> {
    let n = space.symbol_len();
    if h.cols() != n || h.rows() != y.len() {
        return Err(Error::Dimension(format!(
            "{}x{} channel for {} observations and {n} symbols",
            h.rows(),
            h.cols(),
            y.len()
        )));
    }
    let k = space.label_bits();
    let columns: Vec<Vec<C64>> = (0..n).map(|c| h.column(c)).collect();
    let mut x = vec![C64::new(space.amplitude, 0.0); n];
    let mut residual: Vec<C64> = y.to_vec();
    for (c, col) in columns.iter().enumerate() {
        for (r, v) in residual.iter_mut().zip(col) {
            *r -= v * x[c];
        }
    }
    let metric = |res: &[C64]| res.iter().map(|v| v.norm_sqr()).sum::<f64>();

    let count = 1usize << k;
    let mut metrics = vec![0.0; count];
    metrics[0] = metric(&residual);
    let mut label = 0usize;
    for g in 1..count {
        let j = g.trailing_zeros() as usize;
        label ^= 1 << j;
        for &p in &space.flips[j] {
            // x_p → -x_p changes the residual by +2 x_p H[:, p].
            let delta = x[p] * 2.0;
            for (r, v) in residual.iter_mut().zip(&columns[p]) {
                *r += v * delta;
            }
            x[p] = -x[p];
        }
        metrics[label] = metric(&residual);
    }

    let mut best = 0usize;
    for (l, &m) in metrics.iter().enumerate() {
        if m < metrics[best] {
            best = l;
        }
    }
    let bits: Vec<u8> = (0..k).map(|j| ((best >> j) & 1) as u8).collect();

    let mut min = vec![[f64::INFINITY; 2]; k];
    for (l, &m) in metrics.iter().enumerate() {
        for (j, mj) in min.iter_mut().enumerate() {
            let b = (l >> j) & 1;
            if m < mj[b] {
                mj[b] = m;
            }
        }
    }
    let llrs = if noise.is_noiseless() {
        min.iter()
            .map(|m| match m[1].total_cmp(&m[0]) {
                std::cmp::Ordering::Greater => LLR_CLAMP,
                std::cmp::Ordering::Less => -LLR_CLAMP,
                std::cmp::Ordering::Equal => 0.0,
            })
            .collect()
    } else {
        match mode {
            LlrMode::MaxLog => min.iter().map(|m| (m[1] - m[0]) / noise.n0).collect(),
            LlrMode::FullSum => {
                let mut sums = vec![[0.0f64; 2]; k];
                for (l, &m) in metrics.iter().enumerate() {
                    for (j, s) in sums.iter_mut().enumerate() {
                        let b = (l >> j) & 1;
                        s[b] += (-(m - min[j][b]) / noise.n0).exp();
                    }
                }
                sums.iter()
                    .zip(&min)
                    .map(|(s, m)| (s[0].ln() - m[0] / noise.n0) - (s[1].ln() - m[1] / noise.n0))
                    .collect()
            }
        }
    };
    Ok(DetectOutput { bits, llrs })
}

/// LMMSE equalization `x̂ = (HᴴH + (N0/Es) I)⁻¹ Hᴴ y` followed by per-symbol
/// Gaussian LLRs `4√Es μᵢ Re(x̂ᵢ) / σᵢ²`, where `μᵢ = (WH)ᵢᵢ` and `σᵢ²`
/// collects residual interference and filtered noise.
pub fn detect_lmmse(y: &[C64], h: &ComplexMatrix, noise: &NoiseSpec) -> Result<Vec<f64>> {
    let (rows, n) = (h.rows(), h.cols());
    if rows != y.len() {
        return Err(Error::Dimension(format!(
            "{rows}-row channel for {} observations",
            y.len()
        )));
    }
    let hh = h.adjoint();
    let mut a = &hh * h;
    let ridge = if noise.is_noiseless() {
        1e-12 * (a.trace().re / n as f64).max(1e-300)
    } else {
        noise.n0 / noise.es
    };
    for i in 0..n {
        a[(i, i)] += ridge;
    }
    let w = a.solve(&hh)?;
    let wh = &w * h;
    let x_hat = w.mul_vec(y);
    let scale = 4.0 * noise.es.sqrt();
    Ok((0..n)
        .map(|i| {
            let mu = wh[(i, i)].re;
            let interference: f64 = (0..n).filter(|&j| j != i).map(|j| wh[(i, j)].norm_sqr()).sum();
            let filtered: f64 = w.row(i).iter().map(|v| v.norm_sqr()).sum();
            let var = noise.es * interference + noise.n0 * filtered;
            let llr = scale * mu * x_hat[i].re / var;
            if llr.is_finite() {
                llr.clamp(-LLR_CLAMP, LLR_CLAMP)
            } else if x_hat[i].re > 0.0 {
                LLR_CLAMP
            } else if x_hat[i].re < 0.0 {
                -LLR_CLAMP
            } else {
                0.0
            }
        })
        .collect())
}

/// Sign decisions on LLRs; zero decodes to bit 0.
pub fn hard_decisions(llrs: &[f64]) -> Vec<u8> {
    llrs.iter().map(|&l| u8::from(l < 0.0)).collect()
}
