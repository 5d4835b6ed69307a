//! Structured matrices of the discrete delay-Doppler model.
//!
//! Vectorization is column-major over the M×N delay-Doppler grid: entry
//! `(delay l, Doppler k)` lives at index `k·M + l`, so the delay index runs
//! fastest. The same layout is used for time-frequency grids (subcarrier
//! fastest) and for the time-domain frame (sample `n·M + m` is sample `m` of
//! slot `n`). Under this layout `F_N ⊗ I_M` is a length-N DFT across slots
//! for every delay row.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::eigen::{hermitian_eig, HermitianEigen};
use crate::error::{Error, Result};
use crate::matrix::{inner, norm_sqr, ComplexMatrix, C64};

/// Largest supported frame size; all matrices are dense.
pub const MAX_FRAME_SYMBOLS: usize = 4096;

/// Dimensions of the delay-Doppler / time-frequency grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OtfsGrid {
    /// Delay bins (subcarriers).
    pub m: usize,
    /// Doppler bins (time slots).
    pub n: usize,
    /// Subcarrier spacing in Hz. Informational only.
    pub delta_f: f64,
}

impl OtfsGrid {
    pub fn new(m: usize, n: usize, delta_f: f64) -> Result<Self> {
        let grid = Self { m, n, delta_f };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::config("grid.m", "must be at least 1"));
        }
        if self.n == 0 {
            return Err(Error::config("grid.n", "must be at least 1"));
        }
        if self.m * self.n > MAX_FRAME_SYMBOLS {
            return Err(Error::config(
                "grid",
                format!(
                    "M·N = {} exceeds the dense limit {MAX_FRAME_SYMBOLS}",
                    self.m * self.n
                ),
            ));
        }
        if !(self.delta_f > 0.0) {
            return Err(Error::config("grid.delta_f", "must be positive"));
        }
        Ok(())
    }

    /// Frame length M·N.
    pub fn size(&self) -> usize {
        self.m * self.n
    }

    /// Slot duration T = 1/Δf in seconds.
    pub fn slot_duration(&self) -> f64 {
        1.0 / self.delta_f
    }

    /// 1/(M·Δf) seconds.
    pub fn delay_resolution(&self) -> f64 {
        1.0 / (self.m as f64 * self.delta_f)
    }

    /// 1/(N·T) Hz.
    pub fn doppler_resolution(&self) -> f64 {
        self.delta_f / self.n as f64
    }
}

/// Delay and Doppler index of one resolvable path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PathIndex {
    pub delay: usize,
    pub doppler: i64,
}

impl PathIndex {
    pub fn new(delay: usize, doppler: i64) -> Self {
        Self { delay, doppler }
    }
}

pub(crate) fn unit_phase(numerator: i64, denominator: usize) -> C64 {
    let r = numerator.rem_euclid(denominator as i64) as f64;
    C64::from_polar(1.0, 2.0 * PI * r / denominator as f64)
}

/// Unitary DFT matrix with entries `exp(-j2πab/n)/√n`.
pub fn dft_matrix(n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::Dimension("DFT of size 0".into()));
    }
    let s = 1.0 / (n as f64).sqrt();
    Ok(ComplexMatrix::from_fn(n, n, |a, b| {
        unit_phase(-((a * b % n) as i64), n) * s
    }))
}

/// `Πˡ`, the forward cyclic shift applied `l` times (reduced mod MN).
pub fn permutation_power(grid: &OtfsGrid, l: usize) -> ComplexMatrix {
    let mn = grid.size();
    let l = l % mn;
    ComplexMatrix::from_fn(mn, mn, |r, c| {
        if r == (c + l) % mn {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `Δᵏ = diag{z^0, z^k, …, z^{(MN-1)k}}` with `z = exp(j2π/MN)`.
///
/// Exponents are reduced exactly in integer arithmetic before the phase is
/// evaluated.
pub fn phase_diag_power(grid: &OtfsGrid, k: i64) -> ComplexMatrix {
    let mn = grid.size();
    let diag: Vec<C64> = (0..mn).map(|t| unit_phase(k * t as i64, mn)).collect();
    ComplexMatrix::diagonal(&diag)
}

/// `Ξ(l, k) = (F_N ⊗ I_M) Πˡ Δᵏ (F_Nᴴ ⊗ I_M)` as a dense matrix.
pub fn build_xi(grid: &OtfsGrid, path: PathIndex) -> ComplexMatrix {
    let op = DdOperator::new(grid);
    let mn = grid.size();
    let mut out = ComplexMatrix::zeros(mn, mn);
    let mut basis = vec![C64::new(0.0, 0.0); mn];
    for j in 0..mn {
        basis[j] = C64::new(1.0, 0.0);
        let col = op.apply_path(path, &basis);
        basis[j] = C64::new(0.0, 0.0);
        for (r, v) in col.into_iter().enumerate() {
            out[(r, j)] = v;
        }
    }
    out
}

/// Matrix-free application of the single-path operators `Ξ(l, k)`.
///
/// Applies `F_Nᴴ ⊗ I_M`, the phase ramp, the cyclic shift and `F_N ⊗ I_M` in
/// turn, costing O(MN·N) per vector instead of O((MN)²).
#[derive(Clone, Debug)]
pub struct DdOperator {
    m: usize,
    n: usize,
    /// `exp(-j2πr/N)` for r in 0..N.
    slot_twiddles: Vec<C64>,
    /// `z^t = exp(j2πt/MN)` for t in 0..MN.
    frame_phases: Vec<C64>,
}

impl DdOperator {
    pub fn new(grid: &OtfsGrid) -> Self {
        let mn = grid.size();
        Self {
            m: grid.m,
            n: grid.n,
            slot_twiddles: (0..grid.n).map(|r| unit_phase(-(r as i64), grid.n)).collect(),
            frame_phases: (0..mn).map(|t| unit_phase(t as i64, mn)).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.m * self.n
    }

    /// `(F_Nᴴ ⊗ I_M) x`: delay-Doppler vector to time-domain frame.
    pub fn to_time(&self, x: &[C64]) -> Vec<C64> {
        self.slot_dft(x, false)
    }

    /// `(F_N ⊗ I_M) s`: time-domain frame to delay-Doppler vector.
    pub fn from_time(&self, s: &[C64]) -> Vec<C64> {
        self.slot_dft(s, true)
    }

    fn slot_dft(&self, x: &[C64], forward: bool) -> Vec<C64> {
        let (m, n) = (self.m, self.n);
        assert_eq!(x.len(), m * n, "vector length must equal M·N");
        let scale = 1.0 / (n as f64).sqrt();
        let mut out = vec![C64::new(0.0, 0.0); m * n];
        for a in 0..n {
            for b in 0..n {
                let w = self.slot_twiddles[a * b % n];
                let w = if forward { w } else { w.conj() } * scale;
                let src = &x[b * m..(b + 1) * m];
                let dst = &mut out[a * m..(a + 1) * m];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
        out
    }

    /// `Πˡ Δᵏ s` on a time-domain frame.
    pub fn shift_time(&self, path: PathIndex, s: &[C64]) -> Vec<C64> {
        let mn = self.size();
        let l = path.delay % mn;
        let k = path.doppler.rem_euclid(mn as i64) as usize;
        (0..mn)
            .map(|t| {
                let src = (t + mn - l) % mn;
                s[src] * self.frame_phases[k * src % mn]
            })
            .collect()
    }

    /// `Ξ(l, k) x`.
    pub fn apply_path(&self, path: PathIndex, x: &[C64]) -> Vec<C64> {
        let s = self.to_time(x);
        self.from_time(&self.shift_time(path, &s))
    }

    /// `Σ hᵢ Ξᵢ x`.
    pub fn apply_channel(&self, chan: &ChannelTaps<'_>, x: &[C64]) -> Vec<C64> {
        let s = self.to_time(x);
        let mut r = vec![C64::new(0.0, 0.0); s.len()];
        for (h, path) in chan.gains.iter().zip(chan.paths) {
            for (acc, v) in r.iter_mut().zip(self.shift_time(*path, &s)) {
                *acc += h * v;
            }
        }
        self.from_time(&r)
    }
}

/// Borrowed view of path gains and indices.
#[derive(Clone, Copy, Debug)]
pub struct ChannelTaps<'a> {
    pub gains: &'a [C64],
    pub paths: &'a [PathIndex],
}

pub(crate) fn check_paths(grid: &OtfsGrid, paths: &[PathIndex]) -> Result<()> {
    let mn = grid.size();
    for (i, p) in paths.iter().enumerate() {
        if p.delay >= mn {
            return Err(Error::config(
                "channel",
                format!("path {i} delay index {} outside [0, {mn})", p.delay),
            ));
        }
        if p.doppler.unsigned_abs() as usize > mn {
            return Err(Error::config(
                "channel",
                format!("path {i} Doppler index {} outside [-{mn}, {mn}]", p.doppler),
            ));
        }
    }
    Ok(())
}

/// The MN×MN delay-Doppler channel matrix `H_eff = Σ hᵢ Ξᵢ`.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveChannel {
    pub matrix: ComplexMatrix,
}

impl EffectiveChannel {
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        self.matrix.mul_vec(x)
    }
}

/// Builds `H_eff` column by column from the matrix-free operator.
pub fn build_heff(grid: &OtfsGrid, gains: &[C64], paths: &[PathIndex]) -> Result<EffectiveChannel> {
    if gains.len() != paths.len() {
        return Err(Error::Dimension(format!(
            "{} gains for {} paths",
            gains.len(),
            paths.len()
        )));
    }
    check_paths(grid, paths)?;
    let op = DdOperator::new(grid);
    let taps = ChannelTaps { gains, paths };
    let mn = grid.size();
    let mut matrix = ComplexMatrix::zeros(mn, mn);
    let mut basis = vec![C64::new(0.0, 0.0); mn];
    for j in 0..mn {
        basis[j] = C64::new(1.0, 0.0);
        for (r, v) in op.apply_channel(&taps, &basis).into_iter().enumerate() {
            matrix[(r, j)] = v;
        }
        basis[j] = C64::new(0.0, 0.0);
    }
    Ok(EffectiveChannel { matrix })
}

/// Equivalent codeword matrix `Φ(x) = [Ξ₁x … Ξ_P x]` (MN×P).
pub fn build_phi(grid: &OtfsGrid, x: &[C64], paths: &[PathIndex]) -> Result<ComplexMatrix> {
    if x.len() != grid.size() {
        return Err(Error::Dimension(format!(
            "codeword length {} for frame size {}",
            x.len(),
            grid.size()
        )));
    }
    check_paths(grid, paths)?;
    let op = DdOperator::new(grid);
    let cols: Vec<Vec<C64>> = paths.iter().map(|&p| op.apply_path(p, x)).collect();
    ComplexMatrix::from_columns(grid.size(), &cols)
}

/// Eigenvalues in `[-CLIP_TOLERANCE, 0)` (relative to the trace) are clipped
/// to zero.
pub const CLIP_TOLERANCE: f64 = 1e-9;

/// Eigenvalues at or below this fraction of the largest one count as zero
/// when determining rank.
pub const RANK_TOLERANCE: f64 = 1e-9;

/// The P×P Gram matrix `Ω(e) = Φ(e)ᴴ Φ(e)` with its spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct CodewordDifferenceMatrix {
    pub omega: ComplexMatrix,
    /// Descending, clipped to be nonnegative.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
    pub rank: usize,
    /// Squared Euclidean distance `eᴴe` of the generating error sequence.
    pub d_e2: f64,
}

impl CodewordDifferenceMatrix {
    /// Wraps an explicit Gram matrix, e.g. a constructed diagonal one.
    pub fn from_gram(omega: ComplexMatrix, d_e2: f64) -> Result<Self> {
        let eig = hermitian_eig(&omega)?;
        Ok(Self::from_parts(omega, eig, d_e2))
    }

    fn from_parts(omega: ComplexMatrix, eig: HermitianEigen, d_e2: f64) -> Self {
        let scale = eig.values.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        let eigenvalues: Vec<f64> = eig
            .values
            .iter()
            .map(|&v| {
                debug_assert!(v >= -CLIP_TOLERANCE * scale, "negative eigenvalue {v}");
                v.max(0.0)
            })
            .collect();
        let largest = eigenvalues.first().copied().unwrap_or(0.0);
        let rank = eigenvalues
            .iter()
            .filter(|&&v| v > RANK_TOLERANCE * largest && v > 0.0)
            .count();
        Self {
            omega,
            eigenvalues,
            eigenvectors: eig.vectors,
            rank,
            d_e2,
        }
    }

    /// Number of paths P.
    pub fn paths(&self) -> usize {
        self.omega.rows()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.paths() && self.paths() > 0
    }

    pub fn eigenvector(&self, i: usize) -> Vec<C64> {
        self.eigenvectors.column(i)
    }

    /// Product of the eigenvalues.
    pub fn determinant(&self) -> f64 {
        self.eigenvalues.iter().product()
    }
}

/// Builds `Ω(e)` for the given path indices and decomposes it.
pub fn build_omega(grid: &OtfsGrid, e: &[C64], paths: &[PathIndex]) -> Result<CodewordDifferenceMatrix> {
    let phi = build_phi(grid, e, paths)?;
    let cols: Vec<Vec<C64>> = (0..paths.len()).map(|i| phi.column(i)).collect();
    let omega = gram_matrix(&cols);
    let eig = hermitian_eig(&omega)?;
    Ok(CodewordDifferenceMatrix::from_parts(omega, eig, norm_sqr(e)))
}

/// `G[i][j] = uᵢᴴ uⱼ`, filled from the upper triangle so it is exactly Hermitian.
pub fn gram_matrix(vectors: &[Vec<C64>]) -> ComplexMatrix {
    let p = vectors.len();
    let mut g = ComplexMatrix::zeros(p, p);
    for i in 0..p {
        g[(i, i)] = C64::new(norm_sqr(&vectors[i]), 0.0);
        for j in i + 1..p {
            let v = inner(&vectors[i], &vectors[j]);
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
    }
    g
}
