//! OFDM comparison baseline on the same time-domain channel.

use serde::{Deserialize, Serialize};

use crate::ddmatrix::{check_paths, unit_phase, OtfsGrid, PathIndex};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};

/// Cyclic prefix arrangement of the OFDM baseline.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CyclicPrefix {
    /// One prefix per frame: the channel is the shared MN-sample operator.
    #[default]
    Frame,
    /// One prefix per OFDM symbol: delays wrap within each M-sample slot.
    Symbol,
}

fn slot_dft(m: usize, x: &[C64], inverse: bool) -> Vec<C64> {
    let scale = 1.0 / (m as f64).sqrt();
    let mut out = vec![C64::new(0.0, 0.0); x.len()];
    for (src, dst) in x.chunks_exact(m).zip(out.chunks_exact_mut(m)) {
        for (a, d) in dst.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (b, s) in src.iter().enumerate() {
                let e = (a * b % m) as i64;
                acc += s * unit_phase(if inverse { e } else { -e }, m);
            }
            *d = acc * scale;
        }
    }
    out
}

fn time_channel(
    grid: &OtfsGrid,
    cp: CyclicPrefix,
    gains: &[C64],
    paths: &[PathIndex],
    s: &[C64],
) -> Vec<C64> {
    let (m, mn) = (grid.m, grid.size());
    let mut r = vec![C64::new(0.0, 0.0); mn];
    for (h, p) in gains.iter().zip(paths) {
        let k = p.doppler.rem_euclid(mn as i64);
        for (t, acc) in r.iter_mut().enumerate() {
            let src = match cp {
                CyclicPrefix::Frame => (t + mn - p.delay % mn) % mn,
                CyclicPrefix::Symbol => {
                    let slot = t / m;
                    slot * m + (t % m + m - p.delay % m) % m
                }
            };
            *acc += h * s[src] * unit_phase(k * src as i64, mn);
        }
    }
    r
}

/// `(I_N ⊗ F_M) H_t (I_N ⊗ F_Mᴴ)`: subcarrier-domain channel matrix with
/// symbols indexed `n·M + m` (slot `n`, subcarrier `m`).
pub fn build_ofdm_channel(
    grid: &OtfsGrid,
    cp: CyclicPrefix,
    gains: &[C64],
    paths: &[PathIndex],
) -> Result<ComplexMatrix> {
    if gains.len() != paths.len() {
        return Err(Error::Dimension(format!(
            "{} gains for {} paths",
            gains.len(),
            paths.len()
        )));
    }
    check_paths(grid, paths)?;
    let mn = grid.size();
    let mut matrix = ComplexMatrix::zeros(mn, mn);
    let mut basis = vec![C64::new(0.0, 0.0); mn];
    for j in 0..mn {
        basis[j] = C64::new(1.0, 0.0);
        let s = slot_dft(grid.m, &basis, true);
        let r = time_channel(grid, cp, gains, paths, &s);
        for (i, v) in slot_dft(grid.m, &r, false).into_iter().enumerate() {
            matrix[(i, j)] = v;
        }
        basis[j] = C64::new(0.0, 0.0);
    }
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_channel, ChannelProfile};
    use crate::ddmatrix::build_heff;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn off_diagonal_max(a: &ComplexMatrix) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..a.rows() {
            for c in 0..a.cols() {
                if r != c {
                    worst = worst.max(a[(r, c)].norm());
                }
            }
        }
        worst
    }

    #[test]
    fn symbol_prefix_without_doppler_is_diagonal() {
        let grid = OtfsGrid::new(4, 3, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let ch = sample_channel(&ChannelProfile::rayleigh(1, 3, 0), &mut rng).unwrap();
            let h = build_ofdm_channel(&grid, CyclicPrefix::Symbol, &ch.gains, &ch.paths).unwrap();
            assert!(off_diagonal_max(&h) < 1e-12);
            // Each tone sees the channel frequency response h·e^{-j2πml/M}.
            for m in 0..4 {
                let expected = ch.gains[0] * unit_phase(-((m * ch.paths[0].delay) as i64), 4);
                for n in 0..3 {
                    assert!((h[(n * 4 + m, n * 4 + m)] - expected).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn frame_prefix_without_delay_or_doppler_is_diagonal() {
        let grid = OtfsGrid::new(4, 3, 1.0).unwrap();
        let g = [C64::new(0.3, -0.8)];
        let h = build_ofdm_channel(&grid, CyclicPrefix::Frame, &g, &[PathIndex::new(0, 0)]).unwrap();
        assert!(h.max_abs_diff(&ComplexMatrix::identity(12).scale(g[0])) < 1e-12);
    }

    #[test]
    fn doppler_creates_inter_carrier_interference() {
        let grid = OtfsGrid::new(4, 2, 1.0).unwrap();
        let h = build_ofdm_channel(
            &grid,
            CyclicPrefix::Symbol,
            &[C64::new(1.0, 0.0)],
            &[PathIndex::new(0, 1)],
        )
        .unwrap();
        assert!(off_diagonal_max(&h) > 0.1);
    }

    #[test]
    fn frame_prefix_is_a_unitary_rotation_of_the_dd_channel() {
        // Both are unitary conjugations of the same time-domain operator, so
        // their singular values agree: compare Frobenius norms of H and HᴴH.
        let grid = OtfsGrid::new(4, 4, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ch = sample_channel(&ChannelProfile::rayleigh(3, 3, 2), &mut rng).unwrap();
        let ofdm = build_ofdm_channel(&grid, CyclicPrefix::Frame, &ch.gains, &ch.paths).unwrap();
        let dd = build_heff(&grid, &ch.gains, &ch.paths).unwrap().matrix;
        assert!((ofdm.frobenius_norm() - dd.frobenius_norm()).abs() < 1e-10);
        let go = &ofdm.adjoint() * &ofdm;
        let gd = &dd.adjoint() * &dd;
        assert!((go.frobenius_norm() - gd.frobenius_norm()).abs() < 1e-9);
    }
}
