//! Brute-force reference computations: explicit least-squares projections
//! onto the tangent spaces of the rotation orbits, and the eigenvector form of
//! the singular expansion components. Only meant for small systems.

use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, Mat};

/// Gram eigenvalues below this fraction of the largest one are treated as
/// zero.
const GRAM_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleProjection {
    pub t_ext: f64,
    pub t_int: f64,
    pub t_rot: f64,
    /// `None` when the physical and kinematic tangent spaces intersect, which
    /// happens exactly at repeated positive singular values.
    pub e_out: Option<f64>,
    pub e_in: Option<f64>,
}

/// Orthonormal basis of the span of `vecs` via the Gram matrix.
fn span_basis(vecs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if vecs.is_empty() {
        return Ok(Vec::new());
    }
    let s = vecs.len();
    let gram = Mat::from_fn(s, s, |i, j| dot(&vecs[i], &vecs[j]));
    let eig = sym_eigen(&gram)?;
    let top = eig.values[0];
    if top <= 0.0 {
        return Ok(Vec::new());
    }
    let len = vecs[0].len();
    let mut basis = Vec::new();
    for (j, &lam) in eig.values.iter().enumerate() {
        if lam <= GRAM_RANK_TOL * top {
            break;
        }
        let inv = 1.0 / lam.sqrt();
        let mut b = vec![0.0; len];
        for (i, v) in vecs.iter().enumerate() {
            let c = eig.vectors[(i, j)] * inv;
            for (bk, vk) in b.iter_mut().zip(v) {
                *bk += c * vk;
            }
        }
        basis.push(b);
    }
    Ok(basis)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn proj_sq(basis: &[Vec<f64>], v: &[f64]) -> f64 {
    basis.iter().map(|b| dot(b, v).powi(2)).sum()
}

fn flatten(m: &Mat) -> Vec<f64> {
    m.iter().copied().collect()
}

/// Projects `Ż` onto `Π_R(Z)`, `Π_Q(Z)` and their sum using the spanning sets
/// `(E_pq − E_qp) Z` and `Z (E_αβ − E_βα)`.
pub fn project_oracle(mass: f64, z: &Mat, zdot: &Mat) -> Result<OracleProjection> {
    if z.shape() != zdot.shape() {
        return Err(Error::ShapeMismatch {
            expected: z.shape(),
            found: zdot.shape(),
        });
    }
    if z.norm_squared() == 0.0 {
        return Err(Error::ZeroHyperradius);
    }
    let (d, n) = z.shape();
    let mut span_r = Vec::new();
    for p in 0..d {
        for q in (p + 1)..d {
            let mut g = Mat::zeros(d, n);
            for a in 0..n {
                g[(p, a)] = z[(q, a)];
                g[(q, a)] = -z[(p, a)];
            }
            span_r.push(flatten(&g));
        }
    }
    let mut span_q = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let mut g = Mat::zeros(d, n);
            for i in 0..d {
                g[(i, b)] = z[(i, a)];
                g[(i, a)] = -z[(i, b)];
            }
            span_q.push(flatten(&g));
        }
    }
    let v = flatten(zdot);
    let basis_r = span_basis(&span_r)?;
    let basis_q = span_basis(&span_q)?;
    let joint: Vec<Vec<f64>> = span_r.iter().chain(&span_q).cloned().collect();
    let basis_j = span_basis(&joint)?;
    let h = mass / 2.0;

    let (e_out, e_in) = if basis_j.len() == basis_r.len() + basis_q.len() {
        // Coefficients of the projection in the (non-orthogonal) joint basis
        // made of both orthonormal bases.
        let both: Vec<&Vec<f64>> = basis_r.iter().chain(&basis_q).collect();
        let s = both.len();
        if s == 0 {
            (Some(0.0), Some(0.0))
        } else {
            let g = Mat::from_fn(s, s, |i, j| dot(both[i], both[j]));
            let rhs = nalgebra::DVector::from_fn(s, |i, _| dot(both[i], &v));
            let eig = sym_eigen(&g)?;
            let top = eig.values[0];
            let mut coef = nalgebra::DVector::zeros(s);
            for (j, &lam) in eig.values.iter().enumerate() {
                if lam > GRAM_RANK_TOL * top {
                    let u = eig.vectors.column(j);
                    coef += u * (u.dot(&rhs) / lam);
                }
            }
            let nr = basis_r.len();
            // Within each orthonormal block the squared norm is the sum of
            // squared coefficients.
            let out: f64 = coef.iter().take(nr).map(|c| c * c).sum();
            let inn: f64 = coef.iter().skip(nr).map(|c| c * c).sum();
            (Some(h * out), Some(h * inn))
        }
    } else {
        (None, None)
    };

    Ok(OracleProjection {
        t_ext: h * proj_sq(&basis_r, &v),
        t_int: h * proj_sq(&basis_q, &v),
        t_rot: h * proj_sq(&basis_j, &v),
        e_out,
        e_in,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenComponents {
    pub e_out_a: f64,
    pub e_out_b: f64,
    pub e_in_a: f64,
    pub e_in_b: f64,
}

/// `(A, B)` parts of one side from the eigenvectors of `S = Z Zᵀ` and
/// `Ṡ = Ż Zᵀ + Z Żᵀ`. `None` if two positive eigenvalues coincide.
fn eigen_side(mass: f64, z: &Mat, zdot: &Mat) -> Result<Option<(f64, f64)>> {
    let s = z * z.transpose();
    let sdot = zdot * z.transpose() + z * zdot.transpose();
    let eig = sym_eigen(&s)?;
    let lam = &eig.values;
    let u = &eig.vectors;
    let top = lam[0];
    let k = lam.iter().take_while(|&&l| l > 1e-12 * top).count();
    let dim = lam.len();
    // uᵢᵀ Ṡ uⱼ
    let su = u.transpose() * &sdot * u;
    let (mut part_a, mut part_b) = (0.0, 0.0);
    for i in 0..k {
        for j in (i + 1)..k {
            let gap = lam[i] - lam[j];
            if gap.abs() <= 1e-9 * top {
                return Ok(None);
            }
            // uᵢ · u̇ⱼ
            let c = su[(i, j)] / (lam[j] - lam[i]);
            part_a += (lam[i] + lam[j]) * c * c;
        }
        for j in k..dim {
            part_b += su[(j, i)].powi(2) / lam[i];
        }
    }
    Ok(Some((mass / 2.0 * part_a, mass / 2.0 * part_b)))
}

/// Outer and inner components from derivatives of the eigenvectors of
/// `Z Zᵀ` and `Zᵀ Z`.
pub fn eigenvector_components(mass: f64, z: &Mat, zdot: &Mat) -> Result<Option<EigenComponents>> {
    if z.shape() != zdot.shape() {
        return Err(Error::ShapeMismatch {
            expected: z.shape(),
            found: zdot.shape(),
        });
    }
    if z.norm_squared() == 0.0 {
        return Err(Error::ZeroHyperradius);
    }
    let out = eigen_side(mass, z, zdot)?;
    let inn = eigen_side(mass, &z.transpose(), &zdot.transpose())?;
    Ok(match (out, inn) {
        (Some((e_out_a, e_out_b)), Some((e_in_a, e_in_b))) => Some(EigenComponents {
            e_out_a,
            e_out_b,
            e_in_a,
            e_in_b,
        }),
        _ => None,
    })
}
