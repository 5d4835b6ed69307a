//! Cyclic Jacobi eigendecomposition for small Hermitian matrices.

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};

/// Inputs whose Hermitian asymmetry exceeds this (relative to the largest
/// entry) are rejected.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Sweeps stop once the off-diagonal Frobenius norm falls below this
/// fraction of the matrix norm.
const OFF_DIAGONAL_TOLERANCE: f64 = 1e-12;

const MAX_SWEEPS: usize = 64;

/// Eigenvalues in descending order with matching unit eigenvectors.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Column `i` is the eigenvector for `values[i]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, i: usize) -> Vec<C64> {
        self.vectors.column(i)
    }

    /// `V · diag(λ) · Vᴴ`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let lambda: Vec<C64> = self.values.iter().map(|&v| C64::new(v, 0.0)).collect();
        let scaled = &self.vectors * &ComplexMatrix::diagonal(&lambda);
        &scaled * &self.vectors.adjoint()
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Each rotation first removes the phase of the pivot `a_pq` and then applies
/// the classical real Jacobi rotation, so the diagonal stays exactly real.
/// The result is deterministic: the pivot order is fixed and eigenvector
/// phases are normalized so the largest-modulus component is real positive.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "eigendecomposition of non-square {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let scale = a.as_slice().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let asymmetry = a.hermitian_asymmetry();
    if asymmetry > HERMITIAN_TOLERANCE * scale.max(1.0) {
        return Err(Error::NotHermitian { asymmetry });
    }

    // Symmetrize so tiny asymmetries in the input cannot leak into the result.
    let mut m = ComplexMatrix::from_fn(n, n, |r, c| {
        if r == c {
            C64::new(a[(r, r)].re, 0.0)
        } else {
            (a[(r, c)] + a[(c, r)].conj()) * 0.5
        }
    });
    let mut v = ComplexMatrix::identity(n);
    let norm = m.frobenius_norm();
    let target = OFF_DIAGONAL_TOLERANCE * norm;

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&m) <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].re.total_cmp(&m[(i, i)].re).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = v.column(src);
        let anchor = col.iter().copied().fold(C64::new(0.0, 0.0), |best, x| {
            if x.norm() > best.norm() + 1e-12 {
                x
            } else {
                best
            }
        });
        let phase = if anchor.norm() > 0.0 {
            anchor.conj() / anchor.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for (r, x) in col.iter().enumerate() {
            vectors[(r, dst)] = x * phase;
        }
    }
    Ok(HermitianEigen { values, vectors })
}

fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let n = m.rows();
    let mut acc = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                acc += m[(r, c)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let b = m[(p, q)];
    let abs_b = b.norm();
    if abs_b == 0.0 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    // e^{-iφ} with φ = arg(a_pq)
    let w = b.conj() / abs_b;

    let theta = (aqq - app) / (2.0 * abs_b);
    let t = if theta.is_infinite() {
        0.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // G = [[c, s], [-s·w, c·w]] on the (p, q) plane; M ← Gᴴ M G, V ← V G.
    let n = m.rows();
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * c - mkq * w * s;
        m[(k, q)] = mkp * s + mkq * w * c;
    }
    let wc = w.conj();
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = mpk * c - mqk * wc * s;
        m[(q, k)] = mpk * s + mqk * wc * c;
    }
    m[(p, q)] = C64::new(0.0, 0.0);
    m[(q, p)] = C64::new(0.0, 0.0);
    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * w * s;
        v[(k, q)] = vkp * s + vkq * w * c;
    }
}
