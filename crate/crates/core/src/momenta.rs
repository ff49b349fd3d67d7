//! Hyperangular momenta `J` (physical), `K` (kinematic), `Λ` (grand) and
//! `L` (singular), as squared aggregates.
//!
//! [`momenta_fast`] is what the partition code uses. [`momenta_direct`]
//! evaluates the defining component sums and exists to check it.

use crate::error::{Error, Result};
use crate::linalg::Mat;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MomentaResult {
    pub j2: f64,
    pub k2: f64,
    pub lambda2: f64,
    pub l2: f64,
}

fn check_shapes(z: &Mat, zdot: &Mat, xi: &[f64], xidot: &[f64]) -> Result<()> {
    if z.shape() != zdot.shape() {
        return Err(Error::ShapeMismatch {
            expected: z.shape(),
            found: zdot.shape(),
        });
    }
    let m = z.nrows().min(z.ncols());
    for v in [xi, xidot] {
        if v.len() != m {
            return Err(Error::ShapeMismatch {
                expected: (m, 1),
                found: (v.len(), 1),
            });
        }
    }
    Ok(())
}

/// `L² = M² Σ_{σ<τ} (ξ_σ ξ̇_τ − ξ_τ ξ̇_σ)²`.
pub fn singular_momentum2(mass: f64, xi: &[f64], xidot: &[f64]) -> f64 {
    let mut acc = 0.0;
    for s in 0..xi.len() {
        for t in (s + 1)..xi.len() {
            let l = xi[s] * xidot[t] - xi[t] * xidot[s];
            acc += l * l;
        }
    }
    mass * mass * acc
}

/// Component sums straight from the definitions. `Λ²` runs over every 2×2
/// minor of the `2 × dn` matrix stacking `vec Z` over `vec Ż`, which is
/// `O((dn)²)`.
pub fn momenta_direct(mass: f64, z: &Mat, zdot: &Mat, xi: &[f64], xidot: &[f64]) -> Result<MomentaResult> {
    check_shapes(z, zdot, xi, xidot)?;
    let (d, n) = z.shape();

    let mut j2 = 0.0;
    for i in 0..d {
        for j in (i + 1)..d {
            let jij: f64 = (0..n)
                .map(|a| z[(i, a)] * zdot[(j, a)] - z[(j, a)] * zdot[(i, a)])
                .sum();
            j2 += (mass * jij).powi(2);
        }
    }

    let mut k2 = 0.0;
    for a in 0..n {
        for b in (a + 1)..n {
            let kab: f64 = (0..d)
                .map(|i| z[(i, a)] * zdot[(i, b)] - z[(i, b)] * zdot[(i, a)])
                .sum();
            k2 += (mass * kab).powi(2);
        }
    }

    // Pairs ((i,α), (j,β)) with i < j, or i = j and α < β.
    let mut minors = 0.0;
    for i in 0..d {
        for a in 0..n {
            for j in i..d {
                let b0 = if j == i { a + 1 } else { 0 };
                for b in b0..n {
                    let m = z[(i, a)] * zdot[(j, b)] - z[(j, b)] * zdot[(i, a)];
                    minors += m * m;
                }
            }
        }
    }

    Ok(MomentaResult {
        j2,
        k2,
        lambda2: mass * mass * minors,
        l2: singular_momentum2(mass, xi, xidot),
    })
}

/// `O(d² n)` evaluation.
///
/// `J_{ij} = M (Δ⁽²⁾_{ij} − Δ⁽²⁾_{ji})` with `Δ⁽²⁾ = Z Żᵀ`,
/// `K² = M² Σ_{ij} [Δ⁽¹⁾_{ij} Δ⁽³⁾_{ij} − Δ⁽²⁾_{ij} Δ⁽²⁾_{ji}]`,
/// `Λ² = M² (‖Z‖² ‖Ż‖² − ⟨Z, Ż⟩²)`.
pub fn momenta_fast(mass: f64, z: &Mat, zdot: &Mat, xi: &[f64], xidot: &[f64]) -> Result<MomentaResult> {
    check_shapes(z, zdot, xi, xidot)?;
    let (d, n) = z.shape();
    let (zs, ds) = (z.as_slice(), zdot.as_slice());
    let mut delta1 = vec![0.0; d * d];
    let mut delta2 = vec![0.0; d * d];
    let mut delta3 = vec![0.0; d * d];
    for a in 0..n {
        let (q, v) = (&zs[a * d..(a + 1) * d], &ds[a * d..(a + 1) * d]);
        for i in 0..d {
            for j in 0..d {
                delta1[i * d + j] += q[i] * q[j];
                delta2[i * d + j] += q[i] * v[j];
                delta3[i * d + j] += v[i] * v[j];
            }
        }
    }

    let mut j2 = 0.0;
    for i in 0..d {
        for j in (i + 1)..d {
            j2 += (delta2[i * d + j] - delta2[j * d + i]).powi(2);
        }
    }
    let mut k2 = 0.0;
    for i in 0..d {
        for j in 0..d {
            k2 += delta1[i * d + j] * delta3[i * d + j] - delta2[i * d + j] * delta2[j * d + i];
        }
    }
    let zz: f64 = (0..d).map(|i| delta1[i * d + i]).sum();
    let dd: f64 = (0..d).map(|i| delta3[i * d + i]).sum();
    let zd: f64 = (0..d).map(|i| delta2[i * d + i]).sum();
    let m2 = mass * mass;
    Ok(MomentaResult {
        j2: m2 * j2,
        k2: (m2 * k2).max(0.0),
        lambda2: (m2 * (zz * dd - zd * zd)).max(0.0),
        l2: singular_momentum2(mass, xi, xidot),
    })
}

/// `J²` from the `n × n` Gram matrices `Γ⁽¹⁾ = ZᵀZ`, `Γ⁽²⁾ = ZᵀŻ`,
/// `Γ⁽³⁾ = ŻᵀŻ`. Costs `O(n² d)`, so it is only used as a cross-check.
pub fn j2_from_gram(mass: f64, z: &Mat, zdot: &Mat) -> Result<f64> {
    if z.shape() != zdot.shape() {
        return Err(Error::ShapeMismatch {
            expected: z.shape(),
            found: zdot.shape(),
        });
    }
    let n = z.ncols();
    let g1 = z.transpose() * z;
    let g2 = z.transpose() * zdot;
    let g3 = zdot.transpose() * zdot;
    let mut acc = 0.0;
    for a in 0..n {
        for b in 0..n {
            acc += g1[(a, b)] * g3[(a, b)] - g2[(a, b)] * g2[(b, a)];
        }
    }
    Ok((mass * mass * acc).max(0.0))
}
