//! Dense real matrix algebra for the small position matrices handled here.
//!
//! Everything is built on `nalgebra::DMatrix<f64>` for storage, but the
//! decompositions are hand-rolled Jacobi iterations with a fixed cyclic sweep
//! order so that identical input bits always give identical factors.

use nalgebra::DMatrix;

use crate::ensemble::RandomStream;
use crate::error::{Error, Result};

/// A dense `rows × cols` real matrix, indexed `(i, α)`.
pub type Mat = DMatrix<f64>;

/// Sweeps allowed before a Jacobi iteration is declared stuck.
const MAX_SWEEPS: usize = 80;

/// Singular values below `RANK_TOL · ξ₁` get their right (or left) singular
/// vectors from basis completion instead of normalising a numerically null row.
const RANK_TOL: f64 = 1e-12;

/// Full singular value decomposition `Z = D · Υ · Xᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors {
    /// `d × d` orthogonal.
    pub d: Mat,
    /// The `min(d, n)` singular values in descending order.
    pub xi: Vec<f64>,
    /// `n × n` orthogonal.
    pub x: Mat,
}

impl SvdFactors {
    /// The `d × n` matrix `Υ` with the singular values on its diagonal.
    pub fn upsilon(&self) -> Mat {
        let mut ups = Mat::zeros(self.d.nrows(), self.x.nrows());
        for (s, &v) in self.xi.iter().enumerate() {
            ups[(s, s)] = v;
        }
        ups
    }

    pub fn reconstruct(&self) -> Mat {
        &self.d * self.upsilon() * self.x.transpose()
    }
}

/// Eigen-decomposition `S = V · diag(values) · Vᵀ` of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEigen {
    /// Descending.
    pub values: Vec<f64>,
    /// Orthogonal; column `j` belongs to `values[j]`.
    pub vectors: Mat,
}

pub fn frobenius_inner(a: &Mat, b: &Mat) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            expected: a.shape(),
            found: b.shape(),
        });
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x * y).sum())
}

pub fn frobenius_norm(a: &Mat) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn ensure_finite(a: &Mat) -> Result<()> {
    if a.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Result of orthogonalising the rows of a matrix with one-sided Jacobi:
/// `left · a = rows`, with the rows of `rows` mutually orthogonal and sorted
/// by descending norm.
#[derive(Debug, Clone)]
pub(crate) struct RowJacobi {
    /// `r × r` orthogonal; column `σ` is the left singular vector `σ`.
    pub left: Mat,
    /// Row norms, descending.
    pub norms: Vec<f64>,
    /// `r × c` row-major buffer of the rotated rows.
    pub rows: Vec<f64>,
    pub cols: usize,
}

impl RowJacobi {
    pub fn row(&self, s: usize) -> &[f64] {
        &self.rows[s * self.cols..(s + 1) * self.cols]
    }
}

/// One-sided (Hestenes) Jacobi on the rows of `a`, cyclic order
/// `(0,1), (0,2), …, (r−2, r−1)`.
///
/// The largest-magnitude entry of every left singular vector is made
/// positive (first such entry on ties), flipping the matching row.
pub(crate) fn row_jacobi(a: &Mat) -> Result<RowJacobi> {
    let (r, c) = a.shape();
    let mut g = vec![0.0; r * c];
    for i in 0..r {
        for j in 0..c {
            g[i * c + j] = a[(i, j)];
        }
    }
    // Rows of `rot` accumulate the left rotations: rot · a = g.
    let mut rot = vec![0.0; r * r];
    for i in 0..r {
        rot[i * r + i] = 1.0;
    }
    let tol = (c as f64 * f64::EPSILON).max(1e-15);
    // Rows this small relative to the whole matrix are numerically null and
    // only carry rounding noise; rotating against them never settles.
    let negligible = 1e-30 * g.iter().map(|x| x * x).sum::<f64>();

    let mut converged = r < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..r {
            for q in (p + 1)..r {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for j in 0..c {
                    let gp = g[p * c + j];
                    let gq = g[q * c + j];
                    alpha += gp * gp;
                    beta += gq * gq;
                    gamma += gp * gq;
                }
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() || alpha.min(beta) <= negligible {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + zeta.hypot(1.0));
                let cs = 1.0 / t.hypot(1.0);
                let sn = cs * t;
                rotate_rows(&mut g, c, p, q, cs, sn);
                rotate_rows(&mut rot, r, p, q, cs, sn);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let raw_norms: Vec<f64> = (0..r)
        .map(|i| g[i * c..(i + 1) * c].iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&x, &y| raw_norms[y].total_cmp(&raw_norms[x]).then(x.cmp(&y)));

    let mut left = Mat::zeros(r, r);
    let mut rows = vec![0.0; r * c];
    let mut norms = Vec::with_capacity(r);
    for (s, &src) in order.iter().enumerate() {
        let lrow = &rot[src * r..(src + 1) * r];
        let sign = sign_of_largest(lrow);
        for i in 0..r {
            left[(i, s)] = sign * lrow[i];
        }
        for j in 0..c {
            rows[s * c + j] = sign * g[src * c + j];
        }
        norms.push(raw_norms[src]);
    }
    Ok(RowJacobi {
        left,
        norms,
        rows,
        cols: c,
    })
}

fn rotate_rows(buf: &mut [f64], width: usize, p: usize, q: usize, cs: f64, sn: f64) {
    for j in 0..width {
        let xp = buf[p * width + j];
        let xq = buf[q * width + j];
        buf[p * width + j] = cs * xp - sn * xq;
        buf[q * width + j] = sn * xp + cs * xq;
    }
}

fn sign_of_largest(v: &[f64]) -> f64 {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in v {
        if x.abs() > best {
            best = x.abs();
            sign = if x < 0.0 { -1.0 } else { 1.0 };
        }
    }
    sign
}

/// Extends the orthonormal columns `basis` (`dim × k`) to a `dim × dim`
/// orthogonal matrix. At every step the coordinate vector with the largest
/// residual after two rounds of Gram–Schmidt is appended.
pub(crate) fn complete_orthonormal(basis: &[Vec<f64>], dim: usize) -> Mat {
    let mut cols: Vec<Vec<f64>> = basis.to_vec();
    while cols.len() < dim {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for j in 0..dim {
            let mut v = vec![0.0; dim];
            v[j] = 1.0;
            for _ in 0..2 {
                for u in &cols {
                    let proj: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                    for (vi, ui) in v.iter_mut().zip(u) {
                        *vi -= proj * ui;
                    }
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, v));
            }
        }
        let (norm, mut v) = best.expect("dim > 0");
        v.iter_mut().for_each(|x| *x /= norm);
        cols.push(v);
    }
    Mat::from_fn(dim, dim, |i, j| cols[j][i])
}

/// Full SVD by one-sided Jacobi on the shorter side of `z`.
pub fn svd(z: &Mat) -> Result<SvdFactors> {
    ensure_finite(z)?;
    let (d, n) = z.shape();
    let transposed = d > n;
    let work = if transposed { z.transpose() } else { z.clone() };
    let jac = row_jacobi(&work)?;
    let (short, long) = work.shape();
    let top = jac.norms.first().copied().unwrap_or(0.0);

    // Long-side singular vectors from the normalised rows, completed.
    let mut basis = Vec::new();
    for s in 0..short {
        if jac.norms[s] > RANK_TOL * top && jac.norms[s] > 0.0 {
            let inv = 1.0 / jac.norms[s];
            basis.push(jac.row(s).iter().map(|x| x * inv).collect::<Vec<_>>());
        } else {
            break;
        }
    }
    let long_vecs = complete_orthonormal(&basis, long);
    let short_vecs = jac.left;

    let (mut dm, mut xm) = if transposed {
        (long_vecs, short_vecs)
    } else {
        (short_vecs, long_vecs)
    };
    if transposed {
        // Left vectors came from normalisation; apply the sign convention now.
        for s in 0..d {
            let col: Vec<f64> = dm.column(s).iter().copied().collect();
            if sign_of_largest(&col) < 0.0 {
                dm.column_mut(s).neg_mut();
                if s < n {
                    xm.column_mut(s).neg_mut();
                }
            }
        }
    }
    Ok(SvdFactors {
        d: dm,
        xi: jac.norms,
        x: xm,
    })
}

/// Eigen-decomposition of a symmetric matrix by cyclic two-sided Jacobi.
pub fn sym_eigen(s: &Mat) -> Result<SymEigen> {
    ensure_finite(s)?;
    let n = s.nrows();
    if n != s.ncols() {
        return Err(Error::ShapeMismatch {
            expected: (n, n),
            found: s.shape(),
        });
    }
    let scale = s.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for i in 0..n {
        for j in (i + 1)..n {
            if (s[(i, j)] - s[(j, i)]).abs() > 1e-12 * scale.max(1.0) {
                return Err(Error::NotSymmetric);
            }
        }
    }
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (s[(i, j)] + s[(j, i)]);
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                if apq == 0.0 || apq.abs() <= 0.5 * f64::EPSILON * (app.abs() + aqq.abs()) || apq.abs() <= 1e-300 {
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let cs = 1.0 / t.hypot(1.0);
                let sn = t * cs;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = cs * akp - sn * akq;
                    a[k * n + q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = cs * apk - sn * aqk;
                    a[q * n + k] = sn * apk + cs * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = cs * vkp - sn * vkq;
                    v[k * n + q] = sn * vkp + cs * vkq;
                }
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[y * n + y].total_cmp(&a[x * n + x]).then(x.cmp(&y)));
    let mut vectors = Mat::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (j, &src) in order.iter().enumerate() {
        let col: Vec<f64> = (0..n).map(|k| v[k * n + src]).collect();
        let sign = sign_of_largest(&col);
        for k in 0..n {
            vectors[(k, j)] = sign * col[k];
        }
        values.push(a[src * n + src]);
    }
    Ok(SymEigen { values, vectors })
}

/// Haar-distributed element of `O(dim)`: a standard Gaussian matrix
/// orthonormalised column by column with Gram–Schmidt (applied twice), which
/// is QR with a positive diagonal in `R`.
pub fn random_orthogonal(dim: usize, rng: &mut RandomStream) -> Mat {
    assert!(dim >= 1, "random_orthogonal needs dim >= 1");
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
        for _ in 0..2 {
            for u in &cols {
                let proj: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= proj * ui;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        // A Gaussian draw landing in the span of earlier columns has
        // probability zero; redraw if rounding ever makes it look that way.
        if norm > 1e-10 {
            v.iter_mut().for_each(|x| *x /= norm);
            cols.push(v);
        }
    }
    Mat::from_fn(dim, dim, |i, j| cols[j][i])
}

/// Largest absolute entry of `QᵀQ − I`.
pub fn orthogonality_defect(q: &Mat) -> f64 {
    let g = q.transpose() * q;
    let mut worst = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}
