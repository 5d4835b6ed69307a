//! Log-domain BCJR decoding of terminated convolutional codes.

use serde::{Deserialize, Serialize};

use super::conv::{ConvCode, Trellis};
use crate::error::{Error, Result};

/// How forward/backward metrics are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaxStar {
    /// `ln(eᵃ + eᵇ)`, i.e. the exact MAP decoder.
    #[default]
    Exact,
    /// `max(a, b)`.
    MaxLog,
}

impl MaxStar {
    #[inline]
    pub fn combine(self, a: f64, b: f64) -> f64 {
        if a == f64::NEG_INFINITY {
            return b;
        }
        if b == f64::NEG_INFINITY {
            return a;
        }
        match self {
            MaxStar::Exact => a.max(b) + (-(a - b).abs()).exp().ln_1p(),
            MaxStar::MaxLog => a.max(b),
        }
    }
}

/// Decoder output for one frame.
#[derive(Clone, Debug, PartialEq)]
pub struct BcjrOutput {
    /// A posteriori LLRs `ln P(u=0|y) / P(u=1|y)` of the data bits.
    pub llrs: Vec<f64>,
    /// Hard decisions; a zero LLR decodes to 0.
    pub bits: Vec<u8>,
}

/// BCJR decoder for a trellis that starts and ends in the zero state.
#[derive(Clone, Debug)]
pub struct BcjrDecoder {
    code: ConvCode,
    trellis: Trellis,
    mode: MaxStar,
}

impl BcjrDecoder {
    pub fn new(code: &ConvCode, mode: MaxStar) -> Self {
        Self {
            code: code.clone(),
            trellis: Trellis::new(code),
            mode,
        }
    }

    pub fn code(&self) -> &ConvCode {
        &self.code
    }

    /// Decodes channel LLRs of the coded bits (positive favors 0) into data
    /// bit posteriors. `channel.len()` must equal `encoded_len(data_len)`.
    pub fn decode(&self, channel: &[f64], data_len: usize) -> Result<BcjrOutput> {
        let n = self.trellis.outputs;
        let steps = data_len + self.code.memory;
        if channel.len() != n * steps {
            return Err(Error::Dimension(format!(
                "BCJR expects {} channel LLRs for {data_len} data bits, got {}",
                n * steps,
                channel.len()
            )));
        }
        let ns = self.trellis.num_states;
        let ninf = f64::NEG_INFINITY;

        // Branch metric for a packed output label at step t.
        let gamma = |t: usize, label: u32| -> f64 {
            let mut g = 0.0;
            for j in 0..n {
                let l = channel[t * n + j];
                g += if (label >> j) & 1 == 0 { 0.5 * l } else { -0.5 * l };
            }
            g
        };
        let inputs = |t: usize| if t < data_len { 2 } else { 1 };

        let mut alpha = vec![ninf; (steps + 1) * ns];
        alpha[0] = 0.0;
        for t in 0..steps {
            let (cur, next) = alpha.split_at_mut((t + 1) * ns);
            let cur = &cur[t * ns..];
            let next = &mut next[..ns];
            for s in 0..ns {
                if cur[s] == ninf {
                    continue;
                }
                for b in 0..inputs(t) {
                    let to = self.trellis.next[s][b];
                    next[to] = self
                        .mode
                        .combine(next[to], cur[s] + gamma(t, self.trellis.labels[s][b]));
                }
            }
            normalize(next);
        }

        let mut beta = vec![ninf; (steps + 1) * ns];
        beta[steps * ns] = 0.0;
        for t in (0..steps).rev() {
            let (cur, next) = beta.split_at_mut((t + 1) * ns);
            let cur = &mut cur[t * ns..];
            let next = &next[..ns];
            for s in 0..ns {
                let mut acc = ninf;
                for b in 0..inputs(t) {
                    let to = self.trellis.next[s][b];
                    if next[to] != ninf {
                        acc = self
                            .mode
                            .combine(acc, next[to] + gamma(t, self.trellis.labels[s][b]));
                    }
                }
                cur[s] = acc;
            }
            normalize(cur);
        }

        let mut llrs = Vec::with_capacity(data_len);
        for t in 0..data_len {
            let mut num = [ninf; 2];
            for s in 0..ns {
                let a = alpha[t * ns + s];
                if a == ninf {
                    continue;
                }
                for b in 0..2 {
                    let to = self.trellis.next[s][b];
                    let bt = beta[(t + 1) * ns + to];
                    if bt == ninf {
                        continue;
                    }
                    num[b] = self
                        .mode
                        .combine(num[b], a + gamma(t, self.trellis.labels[s][b]) + bt);
                }
            }
            llrs.push(num[0] - num[1]);
        }
        let bits = llrs.iter().map(|&l| u8::from(l < 0.0)).collect();
        Ok(BcjrOutput { llrs, bits })
    }
}

fn normalize(metrics: &mut [f64]) {
    let max = metrics.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_finite() {
        for m in metrics.iter_mut() {
            *m -= max;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn log_sum_exp(values: &[f64]) -> f64 {
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
    }

    /// Posteriors by enumerating every codeword.
    fn exhaustive_llrs(code: &ConvCode, channel: &[f64], data_len: usize) -> Vec<f64> {
        let mut metrics = Vec::new();
        for w in 0u32..1 << data_len {
            let data: Vec<u8> = (0..data_len).map(|i| ((w >> i) & 1) as u8).collect();
            let cw = code.encode(&data);
            let m: f64 = cw
                .iter()
                .zip(channel)
                .map(|(&b, &l)| if b == 0 { 0.5 * l } else { -0.5 * l })
                .sum();
            metrics.push((data, m));
        }
        (0..data_len)
            .map(|i| {
                let zeros: Vec<f64> = metrics
                    .iter()
                    .filter(|(d, _)| d[i] == 0)
                    .map(|(_, m)| *m)
                    .collect();
                let ones: Vec<f64> = metrics
                    .iter()
                    .filter(|(d, _)| d[i] == 1)
                    .map(|(_, m)| *m)
                    .collect();
                log_sum_exp(&zeros) - log_sum_exp(&ones)
            })
            .collect()
    }

    #[test]
    fn matches_exhaustive_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for code in [
            ConvCode::code_a(),
            ConvCode::code_b(),
            ConvCode::code_c(),
            ConvCode::code_d(),
        ] {
            let dec = BcjrDecoder::new(&code, MaxStar::Exact);
            for data_len in [1, 3, 8] {
                for _ in 0..10 {
                    let channel: Vec<f64> = (0..code.encoded_len(data_len))
                        .map(|_| rng.random_range(-4.0..4.0))
                        .collect();
                    let out = dec.decode(&channel, data_len).unwrap();
                    let oracle = exhaustive_llrs(&code, &channel, data_len);
                    for (a, b) in out.llrs.iter().zip(&oracle) {
                        assert!((a - b).abs() < 1e-6, "{} {a} vs {b}", code.name);
                    }
                }
            }
        }
    }

    #[test]
    fn noiseless_decoding_recovers_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for code in [
            ConvCode::code_a(),
            ConvCode::code_b(),
            ConvCode::code_c(),
            ConvCode::code_d(),
        ] {
            for mode in [MaxStar::Exact, MaxStar::MaxLog] {
                let dec = BcjrDecoder::new(&code, mode);
                let data: Vec<u8> = (0..50).map(|_| rng.random_range(0..2)).collect();
                let channel: Vec<f64> = code
                    .encode(&data)
                    .iter()
                    .map(|&b| if b == 0 { 8.0 } else { -8.0 })
                    .collect();
                assert_eq!(dec.decode(&channel, data.len()).unwrap().bits, data);
            }
        }
    }

    #[test]
    fn zero_information_ties_decode_to_zero() {
        let code = ConvCode::code_b();
        let dec = BcjrDecoder::new(&code, MaxStar::Exact);
        let out = dec.decode(&vec![0.0; code.encoded_len(4)], 4).unwrap();
        assert!(out.llrs.iter().all(|l| l.abs() < 1e-12));
        assert_eq!(out.bits, vec![0; 4]);
    }

    #[test]
    fn wrong_length_is_rejected() {
        let dec = BcjrDecoder::new(&ConvCode::code_a(), MaxStar::Exact);
        assert!(dec.decode(&[0.0; 3], 1).is_err());
    }

    #[test]
    fn max_star_combines() {
        assert!((MaxStar::Exact.combine(0.0, 0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(MaxStar::MaxLog.combine(1.0, -3.0), 1.0);
        assert_eq!(MaxStar::Exact.combine(f64::NEG_INFINITY, 2.0), 2.0);
    }
}
