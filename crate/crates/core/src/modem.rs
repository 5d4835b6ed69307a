//! Delay-Doppler transceiver: grid transforms, BPSK and the AWGN channel.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::ddmatrix::{ChannelTaps, DdOperator, OtfsGrid};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};

/// A vectorized delay-Doppler frame (column-major over the M×N grid).
#[derive(Clone, Debug, PartialEq)]
pub struct DdFrame {
    pub grid: OtfsGrid,
    pub symbols: Vec<C64>,
}

impl DdFrame {
    pub fn new(grid: OtfsGrid, symbols: Vec<C64>) -> Result<Self> {
        if symbols.len() != grid.size() {
            return Err(Error::Dimension(format!(
                "{} symbols for frame size {}",
                symbols.len(),
                grid.size()
            )));
        }
        Ok(Self { grid, symbols })
    }

    /// The M×N matrix view, rows indexed by delay and columns by Doppler.
    pub fn to_matrix(&self) -> ComplexMatrix {
        let m = self.grid.m;
        ComplexMatrix::from_fn(m, self.grid.n, |l, k| self.symbols[k * m + l])
    }

    pub fn from_matrix(grid: OtfsGrid, x: &ComplexMatrix) -> Result<Self> {
        check_grid_matrix(&grid, x)?;
        let symbols = (0..grid.n)
            .flat_map(|k| (0..grid.m).map(move |l| (l, k)))
            .map(|(l, k)| x[(l, k)])
            .collect();
        Ok(Self { grid, symbols })
    }
}

/// Received delay-Doppler samples share the frame layout.
pub type ReceivedFrame = DdFrame;

/// Symbol energy and noise density; `snr_db = 10 log10(Es/N0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub es: f64,
    pub n0: f64,
}

impl NoiseSpec {
    pub fn new(es: f64, n0: f64) -> Result<Self> {
        if !(es > 0.0) {
            return Err(Error::config("es", "symbol energy must be positive"));
        }
        if !(n0 > 0.0) {
            return Err(Error::config("n0", "noise density must be positive"));
        }
        Ok(Self { es, n0 })
    }

    /// Unit symbol energy at the given Es/N0 in dB.
    pub fn from_snr_db(snr_db: f64) -> Self {
        Self {
            es: 1.0,
            n0: 10f64.powf(-snr_db / 10.0),
        }
    }

    /// The N0 → 0 limit: no noise is injected.
    pub fn noiseless(es: f64) -> Self {
        Self { es, n0: 0.0 }
    }

    pub fn is_noiseless(&self) -> bool {
        self.n0 == 0.0
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * (self.es / self.n0).log10()
    }

    /// `Es / (4 N0)`, the SNR that appears in every PEP bound.
    pub fn gamma(&self) -> f64 {
        self.es / (4.0 * self.n0)
    }
}

fn check_grid_matrix(grid: &OtfsGrid, x: &ComplexMatrix) -> Result<()> {
    if x.rows() != grid.m || x.cols() != grid.n {
        return Err(Error::Dimension(format!(
            "{}x{} grid matrix for M={}, N={}",
            x.rows(),
            x.cols(),
            grid.m,
            grid.n
        )));
    }
    Ok(())
}

/// ISFFT: delay-Doppler grid (rows delay `l`, columns Doppler `k`) to the
/// time-frequency grid (rows subcarrier `m`, columns slot `n`):
/// `X[n,m] = (1/√(NM)) Σ_k Σ_l x[k,l] exp(j2π(nk/N − ml/M))`.
pub fn isfft(grid: &OtfsGrid, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_grid_matrix(grid, x)?;
    Ok(symplectic(grid, x, 1.0))
}

/// SFFT, the inverse of [`isfft`].
pub fn sfft(grid: &OtfsGrid, y: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_grid_matrix(grid, y)?;
    Ok(symplectic(grid, y, -1.0))
}

fn symplectic(grid: &OtfsGrid, x: &ComplexMatrix, sign: f64) -> ComplexMatrix {
    let (m, n) = (grid.m, grid.n);
    let tw =
        |num: usize, den: usize, s: f64| C64::from_polar(1.0, s * 2.0 * PI * (num % den) as f64 / den as f64);
    // Along the Doppler/slot axis: exp(+j2π nk/N) for the forward (ISFFT) direction.
    let mut stage = ComplexMatrix::zeros(m, n);
    for row in 0..m {
        for out in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += x[(row, k)] * tw(out * k, n, sign);
            }
            stage[(row, out)] = acc;
        }
    }
    // Along the delay/subcarrier axis: exp(−j2π ml/M).
    let mut result = ComplexMatrix::zeros(m, n);
    let scale = 1.0 / ((m * n) as f64).sqrt();
    for col in 0..n {
        for out in 0..m {
            let mut acc = C64::new(0.0, 0.0);
            for l in 0..m {
                acc += stage[(l, col)] * tw(out * l, m, -sign);
            }
            result[(out, col)] = acc * scale;
        }
    }
    result
}

/// Bit 0 ↦ +√Es, bit 1 ↦ −√Es.
pub fn bpsk_map(grid: &OtfsGrid, bits: &[u8], es: f64) -> Result<DdFrame> {
    if bits.len() != grid.size() {
        return Err(Error::Dimension(format!(
            "{} bits for frame size {}",
            bits.len(),
            grid.size()
        )));
    }
    DdFrame::new(*grid, bpsk_symbols(bits, es))
}

pub fn bpsk_symbols(bits: &[u8], es: f64) -> Vec<C64> {
    let a = es.sqrt();
    bits.iter()
        .map(|&b| C64::new(if b == 0 { a } else { -a }, 0.0))
        .collect()
}

/// Hard decisions: nonnegative real part decodes to bit 0.
pub fn bpsk_demap(symbols: &[C64]) -> Vec<u8> {
    symbols.iter().map(|s| u8::from(s.re < 0.0)).collect()
}

/// AWGN bit LLRs `4√Es Re(y)/N0` (positive favours bit 0).
pub fn bpsk_llr(symbols: &[C64], noise: &NoiseSpec) -> Vec<f64> {
    let scale = 4.0 * noise.es.sqrt() / noise.n0;
    symbols.iter().map(|s| scale * s.re).collect()
}

/// Complex AWGN samples with total variance N0.
pub fn awgn<R: Rng + ?Sized>(len: usize, n0: f64, rng: &mut R) -> Vec<C64> {
    let sigma = (0.5 * n0).sqrt();
    (0..len)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im) * sigma
        })
        .collect()
}

/// `y = H_eff x + w`. Noiseless specs return `H_eff x` and draw nothing.
pub fn transmit<R: Rng + ?Sized>(
    frame: &DdFrame,
    chan: &ChannelRealization,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<Vec<C64>> {
    if chan.gains.len() != chan.paths.len() {
        return Err(Error::Dimension(
            "channel gains and paths differ in length".into(),
        ));
    }
    let op = DdOperator::new(&frame.grid);
    let taps = ChannelTaps {
        gains: &chan.gains,
        paths: &chan.paths,
    };
    let mut y = op.apply_channel(&taps, &frame.symbols);
    if !noise.is_noiseless() {
        let w = awgn(y.len(), noise.n0, rng);
        for (v, w) in y.iter_mut().zip(w) {
            *v += w;
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ddmatrix::{build_phi, build_xi, PathIndex};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_grid_matrix(rng: &mut impl Rng, m: usize, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(m, n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    /// Direct evaluation of the ISFFT double sum.
    fn isfft_oracle(m: usize, n: usize, x: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_fn(m, n, |sc, slot| {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                for l in 0..m {
                    let arg = 2.0 * PI * ((slot * k) as f64 / n as f64 - (sc * l) as f64 / m as f64);
                    acc += x[(l, k)] * C64::from_polar(1.0, arg);
                }
            }
            acc / ((m * n) as f64).sqrt()
        })
    }

    #[test]
    fn isfft_trivial_cases() {
        let g = OtfsGrid::new(3, 2, 1.0).unwrap();
        let zero = ComplexMatrix::zeros(3, 2);
        assert_eq!(isfft(&g, &zero).unwrap(), zero);
        let g1 = OtfsGrid::new(1, 1, 1.0).unwrap();
        let x = ComplexMatrix::from_row_major(1, 1, vec![C64::new(0.3, -2.0)]).unwrap();
        assert!(isfft(&g1, &x).unwrap().max_abs_diff(&x) < 1e-15);
        assert!(isfft(&g, &ComplexMatrix::zeros(2, 3)).is_err());
        assert!(sfft(&g, &ComplexMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn isfft_matches_double_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = OtfsGrid::new(3, 4, 1.0).unwrap();
        let x = random_grid_matrix(&mut rng, 3, 4);
        assert!(isfft(&g, &x).unwrap().max_abs_diff(&isfft_oracle(3, 4, &x)) < 1e-12);
    }

    #[test]
    fn round_trip_and_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for m in 1..=16 {
            for n in [1, 2, 3, 4, 7, 16] {
                let g = OtfsGrid::new(m, n, 1.0).unwrap();
                let x = random_grid_matrix(&mut rng, m, n);
                let tf = isfft(&g, &x).unwrap();
                assert!(sfft(&g, &tf).unwrap().max_abs_diff(&x) < 1e-12);
                assert!((tf.frobenius_norm() - x.frobenius_norm()).abs() < 1e-12);
                let dd = sfft(&g, &x).unwrap();
                assert!((dd.frobenius_norm() - x.frobenius_norm()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sfft_of_tf_impulse_is_flat() {
        let g = OtfsGrid::new(2, 4, 1.0).unwrap();
        let mut y = ComplexMatrix::zeros(2, 4);
        y[(0, 0)] = C64::new(1.0, 0.0);
        let dd = sfft(&g, &y).unwrap();
        let expected = 1.0 / 8f64.sqrt();
        assert!(dd.as_slice().iter().all(|v| (v - expected).norm() < 1e-15));
    }

    #[test]
    fn bpsk_mapping() {
        let g = OtfsGrid::new(2, 2, 1.0).unwrap();
        let f = bpsk_map(&g, &[0, 0, 0, 0], 1.0).unwrap();
        assert!(f.symbols.iter().all(|s| *s == C64::new(1.0, 0.0)));
        let f = bpsk_map(&g, &[0, 1, 1, 0], 2.0).unwrap();
        let a = 2f64.sqrt();
        assert_eq!(f.symbols[0].re, a);
        assert_eq!(f.symbols[1].re, -a);
        assert_eq!(bpsk_demap(&f.symbols), vec![0, 1, 1, 0]);
        assert!(bpsk_map(&g, &[0, 1], 1.0).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = OtfsGrid::new(8, 4, 1.0).unwrap();
        let bits: Vec<u8> = (0..32).map(|_| rng.random_range(0..2)).collect();
        assert_eq!(bpsk_demap(&bpsk_map(&g, &bits, 1.0).unwrap().symbols), bits);
    }

    #[test]
    fn frame_matrix_layout_is_delay_fastest() {
        let g = OtfsGrid::new(2, 3, 1.0).unwrap();
        let syms: Vec<C64> = (0..6).map(|i| C64::new(i as f64, 0.0)).collect();
        let f = DdFrame::new(g, syms).unwrap();
        let x = f.to_matrix();
        assert_eq!(x[(1, 0)].re, 1.0);
        assert_eq!(x[(0, 1)].re, 2.0);
        assert_eq!(DdFrame::from_matrix(g, &x).unwrap(), f);
    }

    #[test]
    fn identity_channel_without_noise() {
        let g = OtfsGrid::new(4, 2, 1.0).unwrap();
        let f = bpsk_map(&g, &[0, 1, 0, 1, 1, 1, 0, 0], 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let y = transmit(
            &f,
            &ChannelRealization::identity(),
            &NoiseSpec::noiseless(1.0),
            &mut rng,
        )
        .unwrap();
        assert!(y.iter().zip(&f.symbols).all(|(a, b)| (a - b).norm() < 1e-14));
    }

    #[test]
    fn pure_delay_matches_xi() {
        let g = OtfsGrid::new(4, 2, 1.0).unwrap();
        let f = bpsk_map(&g, &[0, 1, 1, 1, 0, 0, 1, 0], 1.0).unwrap();
        let chan = ChannelRealization {
            gains: vec![C64::new(1.0, 0.0)],
            paths: vec![PathIndex::new(1, 0)],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let y = transmit(&f, &chan, &NoiseSpec::noiseless(1.0), &mut rng).unwrap();
        let expected = build_xi(&g, PathIndex::new(1, 0)).mul_vec(&f.symbols);
        assert!(y.iter().zip(&expected).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn noise_only_variance() {
        let g = OtfsGrid::new(10, 10, 1.0).unwrap();
        let f = DdFrame::new(g, vec![C64::new(0.0, 0.0); 100]).unwrap();
        let noise = NoiseSpec::new(1.0, 0.37).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut acc = 0.0;
        let frames = 1000;
        for _ in 0..frames {
            let y = transmit(&f, &ChannelRealization::identity(), &noise, &mut rng).unwrap();
            acc += y.iter().map(|v| v.norm_sqr()).sum::<f64>();
        }
        let var = acc / (frames * 100) as f64;
        assert!((var / 0.37 - 1.0).abs() < 0.03, "{var}");
    }

    #[test]
    fn transmit_equals_phi_h_plus_same_noise() {
        let g = OtfsGrid::new(4, 4, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let bits: Vec<u8> = (0..16).map(|_| rng.random_range(0..2)).collect();
        let f = bpsk_map(&g, &bits, 1.0).unwrap();
        let chan = ChannelRealization {
            gains: vec![C64::new(0.3, 0.2), C64::new(-0.5, 0.1), C64::new(0.0, 0.7)],
            paths: vec![PathIndex::new(0, 1), PathIndex::new(2, -3), PathIndex::new(5, 2)],
        };
        let noise = NoiseSpec::from_snr_db(10.0);
        let y = transmit(&f, &chan, &noise, &mut ChaCha8Rng::seed_from_u64(99)).unwrap();
        let phi = build_phi(&g, &f.symbols, &chan.paths).unwrap();
        let w = awgn(16, noise.n0, &mut ChaCha8Rng::seed_from_u64(99));
        let expected: Vec<C64> = phi
            .mul_vec(&chan.gains)
            .iter()
            .zip(&w)
            .map(|(a, b)| a + b)
            .collect();
        assert!(y.iter().zip(&expected).all(|(a, b)| (a - b).norm() < 1e-9));
    }

    #[test]
    fn noise_spec_conversions() {
        let n = NoiseSpec::from_snr_db(10.0);
        assert!((n.n0 - 0.1).abs() < 1e-15);
        assert!((n.snr_db() - 10.0).abs() < 1e-12);
        assert!((n.gamma() - 2.5).abs() < 1e-12);
        assert!(NoiseSpec::new(0.0, 1.0).is_err());
        assert!(NoiseSpec::new(1.0, 0.0).is_err());
        let llr = bpsk_llr(&[C64::new(0.5, 3.0)], &NoiseSpec::new(4.0, 2.0).unwrap());
        assert!((llr[0] - 2.0).abs() < 1e-15);
    }
}
