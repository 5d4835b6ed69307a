//! Coding-gain quantities and the exact spectral bounds on `Ω(e)`.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelProfile;
use crate::ddmatrix::{build_omega, CodewordDifferenceMatrix, OtfsGrid, PathIndex};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::rng::{substream, tag};

/// Relative slack allowed when checking an exact inequality numerically.
pub const BOUND_SLACK: f64 = 1e-9;

pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `d_E² / P`.
pub fn coding_gain_bound(d_e2: f64, p: usize) -> f64 {
    d_e2 / p as f64
}

pub fn coding_gain_bound_db(d_e2: f64, p: usize) -> f64 {
    to_db(coding_gain_bound(d_e2, p))
}

fn require_full_rank(omega: &CodewordDifferenceMatrix) -> Result<()> {
    if omega.is_full_rank() {
        Ok(())
    } else {
        Err(Error::RankDeficient {
            rank: omega.rank,
            dim: omega.paths(),
        })
    }
}

/// `det(Ω)^{1/P} / P`, the geometric mean of the eigenvalues over P.
pub fn conditional_coding_gain(omega: &CodewordDifferenceMatrix) -> Result<f64> {
    require_full_rank(omega)?;
    let p = omega.paths() as f64;
    let mean_log = omega.eigenvalues.iter().map(|l| l.ln()).sum::<f64>() / p;
    Ok(mean_log.exp() / p)
}

/// Both sides of `det(Ω) ≥ (d_E²)ᴾ exp(P - d_E² tr(Ω⁻¹))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeterminantBound {
    pub det: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn determinant_lower_bound(omega: &CodewordDifferenceMatrix) -> Result<DeterminantBound> {
    require_full_rank(omega)?;
    let p = omega.paths() as f64;
    let d = omega.d_e2;
    let log_det: f64 = omega.eigenvalues.iter().map(|l| l.ln()).sum();
    let tr_inv: f64 = omega.eigenvalues.iter().map(|l| 1.0 / l).sum();
    let log_rhs = p * d.ln() + p - d * tr_inv;
    Ok(DeterminantBound {
        det: log_det.exp(),
        rhs: log_rhs.exp(),
        holds: log_det >= log_rhs - BOUND_SLACK * log_rhs.abs().max(1.0),
    })
}

/// `tr(Ω⁻¹)` against its lower bound `P / d_E²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceInverseBound {
    pub tr_inv: f64,
    pub lower: f64,
    pub holds: bool,
}

pub fn trace_inverse_bound(omega: &CodewordDifferenceMatrix) -> Result<TraceInverseBound> {
    require_full_rank(omega)?;
    let tr_inv: f64 = omega.eigenvalues.iter().map(|l| 1.0 / l).sum();
    let lower = omega.paths() as f64 / omega.d_e2;
    Ok(TraceInverseBound {
        tr_inv,
        lower,
        holds: tr_inv >= lower * (1.0 - BOUND_SLACK),
    })
}

/// `Σλᵢ²` against its lower bound `P (d_E²)²`, with `‖Ω‖_F²` alongside.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenSquareSumBound {
    pub sum_sq: f64,
    pub lower: f64,
    pub frobenius_sq: f64,
    pub holds: bool,
}

pub fn eigen_square_sum_bound(omega: &CodewordDifferenceMatrix) -> EigenSquareSumBound {
    let sum_sq: f64 = omega.eigenvalues.iter().map(|l| l * l).sum();
    let lower = omega.paths() as f64 * omega.d_e2 * omega.d_e2;
    EigenSquareSumBound {
        sum_sq,
        lower,
        frobenius_sq: omega.omega.frobenius_norm().powi(2),
        holds: sum_sq >= lower * (1.0 - BOUND_SLACK),
    }
}

/// `λ_max / λ_min`.
pub fn p_condition_number(omega: &CodewordDifferenceMatrix) -> Result<f64> {
    require_full_rank(omega)?;
    Ok(omega.eigenvalues[0] / omega.eigenvalues[omega.paths() - 1])
}

/// Largest deviation of a diagonal entry of `Ω` from `d_E²`.
pub fn diagonal_deviation(omega: &CodewordDifferenceMatrix) -> f64 {
    (0..omega.paths())
        .map(|i| (omega.omega[(i, i)].re - omega.d_e2).abs())
        .fold(0.0, f64::max)
}

/// `|tr(Ω) - P d_E²|`.
pub fn trace_deviation(omega: &CodewordDifferenceMatrix) -> f64 {
    (omega.omega.trace().re - omega.paths() as f64 * omega.d_e2).abs()
}

/// Random BPSK error sequence with entries in `{0, ±2}` and at least one
/// nonzero.
pub fn random_error_sequence<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<C64> {
    let weight = rng.random_range(1..=len);
    let mut e = vec![C64::new(0.0, 0.0); len];
    for pos in index::sample(rng, len, weight) {
        e[pos] = C64::new(if rng.random::<bool>() { 2.0 } else { -2.0 }, 0.0);
    }
    e
}

/// Settings for the randomized exact-bound suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub cases: u64,
    pub max_m: usize,
    pub max_n: usize,
    pub max_p: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            cases: 10_000,
            max_m: 8,
            max_n: 8,
            max_p: 8,
        }
    }
}

/// Violation counts for each exact bound; any nonzero count is a bug.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub cases: u64,
    pub full_rank: u64,
    pub rank_deficient: u64,
    pub diagonal_violations: u64,
    pub trace_violations: u64,
    pub trace_inverse_violations: u64,
    pub square_sum_violations: u64,
    pub determinant_violations: u64,
    pub p_condition_violations: u64,
    pub frobenius_mismatches: u64,
    /// Full-rank cases with `det(Ω) < (d_E²)ᴾ`; this bound is approximate.
    pub approx_determinant_violations: u64,
    pub max_diagonal_deviation: f64,
    /// Equalities on constructed diagonal `Ω` hold within `1e-9`.
    pub diagonal_equality: bool,
}

impl VerifyReport {
    pub fn exact_violations(&self) -> u64 {
        self.diagonal_violations
            + self.trace_violations
            + self.trace_inverse_violations
            + self.square_sum_violations
            + self.determinant_violations
            + self.p_condition_violations
            + self.frobenius_mismatches
    }

    pub fn passed(&self) -> bool {
        self.exact_violations() == 0 && self.diagonal_equality
    }

    pub fn approx_violation_rate(&self) -> f64 {
        if self.full_rank == 0 {
            0.0
        } else {
            self.approx_determinant_violations as f64 / self.full_rank as f64
        }
    }

    fn merge(&mut self, other: &VerifyReport) {
        self.cases += other.cases;
        self.full_rank += other.full_rank;
        self.rank_deficient += other.rank_deficient;
        self.diagonal_violations += other.diagonal_violations;
        self.trace_violations += other.trace_violations;
        self.trace_inverse_violations += other.trace_inverse_violations;
        self.square_sum_violations += other.square_sum_violations;
        self.determinant_violations += other.determinant_violations;
        self.p_condition_violations += other.p_condition_violations;
        self.frobenius_mismatches += other.frobenius_mismatches;
        self.approx_determinant_violations += other.approx_determinant_violations;
        self.max_diagonal_deviation = self.max_diagonal_deviation.max(other.max_diagonal_deviation);
    }
}

/// Draws one random (grid, error sequence, distinct bins) tuple.
pub fn random_case<R: Rng + ?Sized>(cfg: &VerifyConfig, rng: &mut R) -> Result<CodewordDifferenceMatrix> {
    let m = rng.random_range(1..=cfg.max_m);
    let n = rng.random_range(1..=cfg.max_n);
    let grid = OtfsGrid::new(m, n, 1.0)?;
    let l_max = rng.random_range(0..m);
    let k_max = rng.random_range(0..n);
    let bins = (l_max + 1) * (2 * k_max + 1);
    let p = rng.random_range(1..=cfg.max_p.min(bins));
    let profile = ChannelProfile::rayleigh(p, l_max, k_max);
    let paths: Vec<PathIndex> = index::sample(rng, bins, p)
        .into_iter()
        .map(|b| profile.bin(b))
        .collect();
    let e = random_error_sequence(grid.size(), rng);
    build_omega(&grid, &e, &paths)
}

fn check_case(omega: &CodewordDifferenceMatrix, report: &mut VerifyReport) -> Result<()> {
    report.cases += 1;
    let dev = diagonal_deviation(omega);
    report.max_diagonal_deviation = report.max_diagonal_deviation.max(dev);
    if dev > 1e-9 {
        report.diagonal_violations += 1;
    }
    if trace_deviation(omega) > 1e-9 * omega.paths() as f64 * omega.d_e2.max(1.0) {
        report.trace_violations += 1;
    }
    let sq = eigen_square_sum_bound(omega);
    if !sq.holds {
        report.square_sum_violations += 1;
    }
    if (sq.sum_sq - sq.frobenius_sq).abs() > 1e-9 * sq.frobenius_sq.max(1.0) {
        report.frobenius_mismatches += 1;
    }
    if !omega.is_full_rank() {
        report.rank_deficient += 1;
        return Ok(());
    }
    report.full_rank += 1;
    if !trace_inverse_bound(omega)?.holds {
        report.trace_inverse_violations += 1;
    }
    if !determinant_lower_bound(omega)?.holds {
        report.determinant_violations += 1;
    }
    if p_condition_number(omega)? < 1.0 {
        report.p_condition_violations += 1;
    }
    let p = omega.paths() as f64;
    let log_det: f64 = omega.eigenvalues.iter().map(|l| l.ln()).sum();
    if log_det < p * omega.d_e2.ln() {
        report.approx_determinant_violations += 1;
    }
    Ok(())
}

/// Constructs `Ω` from a single nonzero symbol and paths with zero delay and
/// distinct Doppler indices in `0..N`; the path projections land on
/// disjoint grid cells, so `Ω = d_E² I`.
pub fn constructed_diagonal_case(m: usize, n: usize, p: usize) -> Result<CodewordDifferenceMatrix> {
    if p > n {
        return Err(Error::config(
            "paths",
            format!("at most N = {n} paths for a diagonal construction"),
        ));
    }
    let grid = OtfsGrid::new(m, n, 1.0)?;
    let mut e = vec![C64::new(0.0, 0.0); grid.size()];
    e[0] = C64::new(2.0, 0.0);
    let paths: Vec<PathIndex> = (0..p).map(|k| PathIndex::new(0, k as i64)).collect();
    build_omega(&grid, &e, &paths)
}

/// Checks every equality that must hold for `Ω = d_E² I`.
pub fn diagonal_equalities_hold(omega: &CodewordDifferenceMatrix) -> Result<bool> {
    let p = omega.paths();
    let d = omega.d_e2;
    let tol = 1e-9;
    let target = ComplexMatrix::identity(p).scale(C64::new(d, 0.0));
    if omega.omega.max_abs_diff(&target) > tol * d {
        return Ok(false);
    }
    let det = determinant_lower_bound(omega)?;
    let tr = trace_inverse_bound(omega)?;
    let sq = eigen_square_sum_bound(omega);
    let gain = conditional_coding_gain(omega)?;
    let rel = |a: f64, b: f64| (a - b).abs() <= tol * b.abs().max(1.0);
    Ok(rel(det.det, det.rhs)
        && rel(det.det, d.powi(p as i32))
        && rel(tr.tr_inv, tr.lower)
        && rel(sq.sum_sq, sq.lower)
        && rel(gain, coding_gain_bound(d, p))
        && rel(p_condition_number(omega)?, 1.0))
}

/// Runs the randomized exact-bound suite. Cases are processed in fixed
/// chunks with per-case substreams, so the report does not depend on the
/// number of threads.
pub fn verify_bounds(cfg: &VerifyConfig) -> Result<VerifyReport> {
    if cfg.cases == 0 {
        return Err(Error::config("cases", "must be at least 1"));
    }
    if cfg.max_m == 0 || cfg.max_n == 0 || cfg.max_p == 0 {
        return Err(Error::config("verify", "max M, N and P must be at least 1"));
    }
    const CHUNK: u64 = 256;
    let chunks = cfg.cases.div_ceil(CHUNK);
    let partial: Vec<Result<VerifyReport>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut report = VerifyReport::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(cfg.cases) {
                let mut rng = substream(cfg.seed, &[tag::VERIFY, i]);
                let omega = random_case(cfg, &mut rng)?;
                check_case(&omega, &mut report)?;
            }
            Ok(report)
        })
        .collect();
    let mut report = VerifyReport::default();
    for r in partial {
        report.merge(&r?);
    }
    let mut diagonal_ok = true;
    for (m, n, p) in [(1, 1, 1), (2, 2, 2), (4, 4, 4), (2, 8, 8), (3, 5, 3)] {
        diagonal_ok &= diagonal_equalities_hold(&constructed_diagonal_case(m, n, p)?)?;
    }
    report.diagonal_equality = diagonal_ok;
    Ok(report)
}
