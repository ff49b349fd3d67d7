//! Full SVD frame with rotation rates of the singular bases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, frobenius_norm, svd, Mat, SvdFactors};

/// Relative thresholds. The absolute values are `gap_tol · ξ₁²` for squared
/// singular value gaps and `zero_tol · ξ₁` for positivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub gap_tol: f64,
    pub zero_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            gap_tol: 1e-9,
            zero_tol: 1e-12,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("gap_tol", self.gap_tol), ("zero_tol", self.zero_tol)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvdFrame {
    pub factors: SvdFactors,
    pub xidot: Vec<f64>,
    /// `Dᵀ Ḋ`.
    pub a: Mat,
    /// `Xᵀ Ẋ`.
    pub b: Mat,
    pub k: usize,
    /// `Dᵀ Ż X`.
    pub w: Mat,
    pub degenerate: bool,
}

impl SvdFrame {
    /// `(E_outA, E_outB, E_inA, E_inB)` from the blocks of `A` and `B`.
    pub fn expansion_terms(&self, mass: f64) -> (f64, f64, f64, f64) {
        let xi = &self.factors.xi;
        let (d, n) = (self.a.nrows(), self.b.nrows());
        let (mut out_a, mut out_b, mut in_a, mut in_b) = (0.0, 0.0, 0.0, 0.0);
        for (s, x) in xi.iter().enumerate().take(self.k) {
            let x2 = x * x;
            for i in 0..d {
                let v = x2 * self.a[(i, s)].powi(2);
                if i < self.k {
                    out_a += v;
                } else {
                    out_b += v;
                }
            }
            for b in 0..n {
                let v = x2 * self.b[(b, s)].powi(2);
                if b < self.k {
                    in_a += v;
                } else {
                    in_b += v;
                }
            }
        }
        let h = mass / 2.0;
        (h * out_a, h * out_b, h * in_a, h * in_b)
    }

    /// `A Υ + Υ̇ − Υ B`, which equals `W` wherever the solve determined it.
    pub fn rebuild_w(&self) -> Mat {
        let ups = self.factors.upsilon();
        let mut udot = Mat::zeros(ups.nrows(), ups.ncols());
        for (s, &v) in self.xidot.iter().enumerate() {
            udot[(s, s)] = v;
        }
        &self.a * &ups + udot - &ups * &self.b
    }
}

/// SVD of `Z` together with `ξ̇`, `A = DᵀḊ` and `B = XᵀẊ` along `Ż`.
///
/// The singular vectors of zero singular values are rotated so that the
/// corresponding corner of `W` is diagonal; then every entry of `W` is
/// reproduced except the symmetric parts of degenerate pairs.
pub fn svd_rates(z: &Mat, zdot: &Mat, tol: &ToleranceConfig) -> Result<SvdFrame> {
    if z.shape() != zdot.shape() {
        return Err(Error::ShapeMismatch {
            expected: z.shape(),
            found: zdot.shape(),
        });
    }
    ensure_finite(z)?;
    ensure_finite(zdot)?;
    tol.validate()?;
    if frobenius_norm(z) == 0.0 {
        return Err(Error::ZeroHyperradius);
    }
    let (d, n) = z.shape();
    let mut f = svd(z)?;
    let m = f.xi.len();
    let xi1 = f.xi[0];
    let k = f.xi.iter().take_while(|&&x| x > tol.zero_tol * xi1).count();
    for x in f.xi.iter_mut().skip(k) {
        *x = 0.0;
    }

    let mut w = f.d.transpose() * zdot * &f.x;
    if k < d && k < n {
        let corner = w.view((k, k), (d - k, n - k)).into_owned();
        if frobenius_norm(&corner) > 0.0 {
            let c = svd(&corner)?;
            let dk = f.d.columns(k, d - k) * &c.d;
            f.d.columns_mut(k, d - k).copy_from(&dk);
            let xk = f.x.columns(k, n - k) * &c.x;
            f.x.columns_mut(k, n - k).copy_from(&xk);
            w = f.d.transpose() * zdot * &f.x;
        }
    }

    let xidot: Vec<f64> = (0..m).map(|s| w[(s, s)]).collect();
    let mut a = Mat::zeros(d, d);
    let mut b = Mat::zeros(n, n);
    let gap = tol.gap_tol * xi1 * xi1;
    let mut degenerate = false;
    let xi = &f.xi;
    for s in 0..k {
        for t in (s + 1)..k {
            let den = xi[t] * xi[t] - xi[s] * xi[s];
            if den.abs() <= gap {
                degenerate = true;
                continue;
            }
            let (wst, wts) = (w[(s, t)], w[(t, s)]);
            let ast = (xi[t] * wst + xi[s] * wts) / den;
            let bst = (xi[s] * wst + xi[t] * wts) / den;
            a[(s, t)] = ast;
            a[(t, s)] = -ast;
            b[(s, t)] = bst;
            b[(t, s)] = -bst;
        }
        for i in k..d {
            let v = w[(i, s)] / xi[s];
            a[(i, s)] = v;
            a[(s, i)] = -v;
        }
        for al in k..n {
            let v = -w[(s, al)] / xi[s];
            b[(s, al)] = v;
            b[(al, s)] = -v;
        }
    }

    Ok(SvdFrame {
        factors: f,
        xidot,
        a,
        b,
        k,
        w,
        degenerate,
    })
}
