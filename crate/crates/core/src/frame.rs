//! Dense and iterative frame machinery for finite families stored as the
//! columns of a complex matrix: frame operator, bounds, canonical dual,
//! canonical Parseval frame, cross-Gram matrices and span distances.

use nalgebra::{ColPivQR, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// A family is a frame when `A > FRAME_THRESHOLD * B`.
pub const FRAME_THRESHOLD: f64 = 1e-10;

/// Relative eigenvalue cutoff used for pseudo-inverses and rank decisions.
pub const RANK_CUTOFF: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

impl FrameBounds {
    pub fn is_frame(&self) -> bool {
        self.upper > 0.0 && self.lower > FRAME_THRESHOLD * self.upper
    }

    /// `B / A`, infinite when the family is not a frame.
    pub fn condition(&self) -> f64 {
        if self.is_frame() {
            self.upper / self.lower
        } else {
            f64::INFINITY
        }
    }

    pub fn is_tight(&self, tol: f64) -> bool {
        self.upper > 0.0 && (self.upper - self.lower).abs() / self.upper < tol
    }
}

/// `S = V V^*`.
pub fn frame_operator(vectors: &CMatrix) -> CMatrix {
    vectors * vectors.adjoint()
}

/// Eigenvalues (ascending) and matching eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(s: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(s.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(s.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

/// Apply `h(lambda)` to the spectrum of a Hermitian matrix.
pub fn hermitian_function(s: &CMatrix, h: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(s);
    let scaled = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, c| {
        vectors[(r, c)] * h(values[c])
    });
    scaled * vectors.adjoint()
}

/// Extreme eigenvalues of `S`, clamped at zero from below.
pub fn dense_bounds(vectors: &CMatrix) -> FrameBounds {
    if vectors.ncols() == 0 {
        return FrameBounds {
            lower: 0.0,
            upper: 0.0,
        };
    }
    let (values, _) = hermitian_eigen(&frame_operator(vectors));
    FrameBounds {
        lower: values[0].max(0.0),
        upper: values[values.len() - 1].max(0.0),
    }
}

fn pinv_cutoff(values: &[f64]) -> f64 {
    RANK_CUTOFF * values.iter().copied().fold(0.0, f64::max)
}

/// Moore-Penrose inverse of the frame operator; equals `S^{-1}` for frames.
pub fn frame_operator_pinv(vectors: &CMatrix) -> CMatrix {
    let s = frame_operator(vectors);
    let (values, _) = hermitian_eigen(&s);
    let cut = pinv_cutoff(&values);
    hermitian_function(&s, |v| if v > cut { 1.0 / v } else { 0.0 })
}

/// Canonical dual family `S^+ v_i` (columns).
pub fn canonical_dual(vectors: &CMatrix) -> CMatrix {
    frame_operator_pinv(vectors) * vectors
}

/// Canonical Parseval family `(S^+)^{1/2} v_i` (columns).
pub fn canonical_parseval(vectors: &CMatrix) -> CMatrix {
    let s = frame_operator(vectors);
    let (values, _) = hermitian_eigen(&s);
    let cut = pinv_cutoff(&values);
    hermitian_function(&s, |v| if v > cut { 1.0 / v.sqrt() } else { 0.0 }) * vectors
}

/// Entry `(i, j) = <f_i, e_j> = e_j^* f_i`.
pub fn cross_gram(f: &CMatrix, e: &CMatrix) -> CMatrix {
    assert_eq!(f.nrows(), e.nrows(), "families live in different spaces");
    let zero = Complex64::new(0.0, 0.0);
    let columns: Vec<Vec<Complex64>> = (0..e.ncols())
        .into_par_iter()
        .map(|j| {
            let support: Vec<(usize, Complex64)> = e
                .column(j)
                .iter()
                .enumerate()
                .filter(|(_, z)| **z != zero)
                .map(|(k, z)| (k, z.conj()))
                .collect();
            (0..f.ncols())
                .map(|i| {
                    let col = f.column(i);
                    support.iter().fold(zero, |acc, &(k, z)| acc + col[k] * z)
                })
                .collect()
        })
        .collect();
    CMatrix::from_fn(f.ncols(), e.ncols(), |i, j| columns[j][i])
}

/// Singular values, descending.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return Vec::new();
    }
    let gram = if m.nrows() <= m.ncols() {
        m * m.adjoint()
    } else {
        m.adjoint() * m
    };
    let (values, _) = hermitian_eigen(&gram);
    values.iter().rev().map(|v| v.max(0.0).sqrt()).collect()
}

/// Orthonormal basis of the column span of `m`, dropping directions below the rank cutoff.
pub fn span_basis(m: &CMatrix) -> CMatrix {
    if m.ncols() == 0 {
        return CMatrix::zeros(m.nrows(), 0);
    }
    let qr = ColPivQR::new(m.clone());
    let r = qr.r();
    let diag: Vec<f64> = (0..r.nrows().min(r.ncols()))
        .map(|k| r[(k, k)].norm())
        .collect();
    let lead = diag.first().copied().unwrap_or(0.0);
    let rank = diag
        .iter()
        .take_while(|&&d| lead > 0.0 && d > RANK_CUTOFF * lead)
        .count();
    qr.q().columns(0, rank).into_owned()
}

/// Distance from `v` to the column span of `m` (orthogonal projection).
pub fn distance_to_span(v: &CVector, m: &CMatrix) -> f64 {
    let zero = Complex64::new(0.0, 0.0);
    let rows: Vec<usize> = (0..m.nrows())
        .filter(|&r| m.row(r).iter().any(|z| *z != zero))
        .collect();
    if rows.len() == m.nrows() {
        let q = span_basis(m);
        return (v - &q * (q.adjoint() * v)).norm();
    }
    let outside: f64 = (0..m.nrows())
        .filter(|r| rows.binary_search(r).is_err())
        .map(|r| v[r].norm_sqr())
        .sum();
    let sub = CMatrix::from_fn(rows.len(), m.ncols(), |r, c| m[(rows[r], c)]);
    let sub_v = CVector::from_fn(rows.len(), |r, _| v[rows[r]]);
    let q = span_basis(&sub);
    let inside = (&sub_v - &q * (q.adjoint() * &sub_v)).norm_squared();
    (outside + inside).sqrt()
}

/// Orthogonal projection onto the column span of `m`.
pub fn span_projection(m: &CMatrix) -> CMatrix {
    let q = span_basis(m);
    &q * q.adjoint()
}

/// Settings for the matrix-free routines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterativeOptions {
    pub max_iterations: usize,
    /// Residual tolerance relative to the largest eigenvalue (power
    /// iteration) or to `||b||` (conjugate gradient).
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for IterativeOptions {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            tolerance: 1e-8,
            seed: 0x5eed,
        }
    }
}

fn random_unit(dim: usize, seed: u64) -> CVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = CVector::from_fn(dim, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

/// Largest eigenvalue of a positive semidefinite operator by power iteration.
///
/// Returns the Rayleigh quotient once `||A v - theta v|| < tol * scale`.
pub fn power_iteration(
    apply: impl Fn(&CVector) -> CVector,
    dim: usize,
    scale: Option<f64>,
    opts: &IterativeOptions,
) -> Result<f64> {
    let mut v = random_unit(dim, opts.seed);
    let mut ritz = Vec::new();
    for _ in 0..opts.max_iterations {
        let w = apply(&v);
        let theta = v.dotc(&w).re;
        let residual = (&w - &v * Complex64::new(theta, 0.0)).norm();
        let reference = scale.unwrap_or(theta.abs()).max(f64::MIN_POSITIVE);
        ritz.push(theta);
        if ritz.len() > 4 {
            ritz.remove(0);
        }
        if residual < opts.tolerance * reference {
            return Ok(theta);
        }
        let n = w.norm();
        if n == 0.0 {
            return Ok(0.0);
        }
        v = w / Complex64::new(n, 0.0);
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iterations,
        ritz,
    })
}

/// Extreme eigenvalues of a positive semidefinite operator: power iteration
/// on `S` for the top, then on `B I - S` for the bottom.
pub fn iterative_bounds(
    apply: impl Fn(&CVector) -> CVector + Copy,
    dim: usize,
    opts: &IterativeOptions,
) -> Result<FrameBounds> {
    let upper = power_iteration(apply, dim, None, opts)?;
    if upper == 0.0 {
        return Ok(FrameBounds {
            lower: 0.0,
            upper: 0.0,
        });
    }
    let shifted = |v: &CVector| v * Complex64::new(upper, 0.0) - apply(v);
    let gap = power_iteration(
        shifted,
        dim,
        Some(upper),
        &IterativeOptions {
            seed: opts.seed + 1,
            ..*opts
        },
    )?;
    Ok(FrameBounds {
        lower: (upper - gap).max(0.0),
        upper,
    })
}

/// Conjugate gradient for a Hermitian positive definite operator.
pub fn conjugate_gradient(
    apply: impl Fn(&CVector) -> CVector,
    b: &CVector,
    opts: &IterativeOptions,
) -> Result<CVector> {
    let target = opts.tolerance * b.norm();
    let mut x = CVector::zeros(b.len());
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = r.dotc(&r).re;
    let mut history = Vec::new();
    for _ in 0..opts.max_iterations {
        if rr.sqrt() <= target {
            return Ok(x);
        }
        let ap = apply(&p);
        let alpha = rr / p.dotc(&ap).re;
        x += &p * Complex64::new(alpha, 0.0);
        r -= &ap * Complex64::new(alpha, 0.0);
        let next = r.dotc(&r).re;
        history.push(next.sqrt());
        if history.len() > 4 {
            history.remove(0);
        }
        p = &r + &p * Complex64::new(next / rr, 0.0);
        rr = next;
    }
    if rr.sqrt() <= target {
        return Ok(x);
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iterations,
        ritz: history,
    })
}
