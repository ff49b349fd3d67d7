//! The five partitions of the kinetic energy of a centred system.
//!
//! [`compute_partition`] works in the SVD frame of `Z` but never forms the
//! part of the long-side basis that belongs to zero singular values: every
//! term it needs from there is a squared norm of a residual, which the first
//! `k` singular vectors already determine. This keeps `N = 100` planar systems
//! at `O(N)` work for the frame instead of `O(N²)`.

mod frame;
mod oracle;

pub use frame::{svd_rates, SvdFrame, ToleranceConfig};
pub use oracle::{eigenvector_components, project_oracle, EigenComponents, OracleProjection};

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, frobenius_inner, row_jacobi, Mat};
use crate::momenta::{momenta_fast, MomentaResult};
use crate::terms::Term;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PartitionResult {
    pub t: f64,
    pub t_lambda: f64,
    pub t_rho: f64,
    pub t_rot: f64,
    pub t_i: f64,
    pub t_xi: f64,
    pub t_ext: f64,
    pub t_int: f64,
    pub t_res: f64,
    pub t_j: f64,
    pub t_k: f64,
    pub t_ac: f64,
    pub e_out: f64,
    pub e_out_a: f64,
    pub e_out_b: f64,
    pub e_in: f64,
    pub e_in_a: f64,
    pub e_in_b: f64,
    pub e_c: f64,
    pub momenta: MomentaResult,
    pub rho: f64,
    /// Number of positive singular values.
    pub rank: usize,
    /// Two positive singular values closer than the gap tolerance; the
    /// singular expansion terms are then not meaningful.
    pub degenerate: bool,
}

impl PartitionResult {
    pub fn get(&self, term: Term) -> f64 {
        match term {
            Term::T => self.t,
            Term::TLambda => self.t_lambda,
            Term::TRho => self.t_rho,
            Term::TRot => self.t_rot,
            Term::TI => self.t_i,
            Term::TXi => self.t_xi,
            Term::TExt => self.t_ext,
            Term::TInt => self.t_int,
            Term::TRes => self.t_res,
            Term::TJ => self.t_j,
            Term::TK => self.t_k,
            Term::TAc => self.t_ac,
            Term::EOut => self.e_out,
            Term::EOutA => self.e_out_a,
            Term::EOutB => self.e_out_b,
            Term::EIn => self.e_in,
            Term::EInA => self.e_in_a,
            Term::EInB => self.e_in_b,
            Term::EC => self.e_c,
            Term::TResPos => self.t_res.max(0.0),
            Term::TResNeg => (-self.t_res).max(0.0),
            Term::TAcPos => self.t_ac.max(0.0),
            Term::TAcNeg => (-self.t_ac).max(0.0),
            Term::ECPos => self.e_c.max(0.0),
            Term::ECNeg => (-self.e_c).max(0.0),
            Term::TResAbs => self.t_res.abs(),
            Term::TAcAbs => self.t_ac.abs(),
        }
    }

    /// Flat JSON object with every term, the squared momenta, `ρ`, `M` and the
    /// degeneracy flag.
    pub fn to_json(&self, mass: f64) -> Value {
        let mut obj = Map::new();
        for t in Term::PARTITION {
            obj.insert(t.name().to_string(), Value::from(self.get(t)));
        }
        obj.insert("J2".into(), Value::from(self.momenta.j2));
        obj.insert("K2".into(), Value::from(self.momenta.k2));
        obj.insert("Lambda2".into(), Value::from(self.momenta.lambda2));
        obj.insert("L2".into(), Value::from(self.momenta.l2));
        obj.insert("rho".into(), Value::from(self.rho));
        obj.insert("M".into(), Value::from(mass));
        obj.insert("rank".into(), Value::from(self.rank));
        obj.insert("degenerate".into(), Value::from(self.degenerate));
        Value::Object(obj)
    }
}

/// Terms within this fraction of `T` of zero are reported as exactly zero, so
/// that structurally vanishing terms do not carry rounding noise.
pub const SNAP_TO_ZERO: f64 = 1e-13;

/// Terms that depend on which side is physical, computed with `d ≤ n`.
struct Oriented {
    ext: f64,
    int: f64,
    out_a: f64,
    out_b: f64,
    in_a: f64,
    in_b: f64,
    t_i: f64,
    xi: Vec<f64>,
    xidot: Vec<f64>,
    rank: usize,
    degenerate: bool,
}

fn oriented(mass: f64, z: &Mat, zdot: &Mat, tol: &ToleranceConfig) -> Result<Oriented> {
    let (r, c) = z.shape();
    debug_assert!(r <= c);
    let jac = row_jacobi(z)?;
    let xi1 = jac.norms[0];
    let k = jac.norms.iter().take_while(|&&x| x > tol.zero_tol * xi1).count();
    let mut xi = jac.norms.clone();
    for x in xi.iter_mut().skip(k) {
        *x = 0.0;
    }

    // Row-major r × c buffer of Y = Lᵀ Ż, with L the left singular vectors.
    let zd = zdot.as_slice();
    let mut y = vec![0.0; r * c];
    for b in 0..c {
        let col = &zd[b * r..(b + 1) * r];
        for i in 0..r {
            let li = jac.left.column(i);
            y[i * c + b] = li.iter().zip(col).map(|(l, v)| l * v).sum();
        }
    }
    // W restricted to the first k right singular vectors, row-major r × k.
    let mut wk = vec![0.0; r * k];
    for s in 0..k {
        let inv = 1.0 / xi[s];
        let xs = jac.row(s);
        for i in 0..r {
            let yi = &y[i * c..(i + 1) * c];
            wk[i * k + s] = inv * yi.iter().zip(xs).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    let w = |i: usize, s: usize| wk[i * k + s];
    // Squared distance of each row of Y from the span of those vectors.
    let rowres: Vec<f64> = (0..r)
        .map(|i| {
            if k == c {
                return 0.0;
            }
            let yy: f64 = y[i * c..(i + 1) * c].iter().map(|v| v * v).sum();
            let pp: f64 = wk[i * k..(i + 1) * k].iter().map(|v| v * v).sum();
            (yy - pp).max(0.0)
        })
        .collect();
    let colres: Vec<f64> = (0..k).map(|s| (k..r).map(|i| w(i, s).powi(2)).sum()).collect();
    let corner: f64 = rowres[k..].iter().sum();
    let r_sum: f64 = rowres[..k].iter().sum();
    let c_sum: f64 = colres.iter().sum();

    let gap = tol.gap_tol * xi1 * xi1;
    let mut degenerate = false;
    let (mut ext, mut int, mut out_a, mut in_a, mut sym) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for s in 0..k {
        for t in (s + 1)..k {
            let (wst, wts) = (w(s, t), w(t, s));
            let (xs, xt) = (xi[s], xi[t]);
            let s2 = xs * xs + xt * xt;
            ext += (xt * wst - xs * wts).powi(2) / s2;
            int += (xs * wst - xt * wts).powi(2) / s2;
            let den = xt * xt - xs * xs;
            if den.abs() <= gap {
                degenerate = true;
                sym += (wst + wts).powi(2) / 2.0;
                continue;
            }
            let a = (xt * wst + xs * wts) / den;
            let b = (xs * wst + xt * wts) / den;
            out_a += s2 * a * a;
            in_a += s2 * b * b;
        }
    }

    let m = r;
    let mut xidot: Vec<f64> = (0..k).map(|s| w(s, s)).collect();
    let diag2: f64 = xidot.iter().map(|v| v * v).sum();
    if k < m {
        // The zero block only enters through its norm, so one slot carries it.
        xidot.push(corner.sqrt());
    }
    xidot.resize(m, 0.0);

    let h = mass / 2.0;
    Ok(Oriented {
        ext: h * (ext + c_sum),
        int: h * (int + r_sum),
        out_a: h * out_a,
        out_b: h * c_sum,
        in_a: h * in_a,
        in_b: h * r_sum,
        t_i: h * (diag2 + corner + sym),
        xi,
        xidot,
        rank: k,
        degenerate,
    })
}

/// All 19 energy terms of the system `(M, Z, Ż)`.
pub fn compute_partition(mass: f64, z: &Mat, zdot: &Mat, tol: &ToleranceConfig) -> Result<PartitionResult> {
    if z.shape() != zdot.shape() {
        return Err(Error::ShapeMismatch {
            expected: z.shape(),
            found: zdot.shape(),
        });
    }
    ensure_finite(z)?;
    ensure_finite(zdot)?;
    tol.validate()?;
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "total mass must be positive, got {mass}"
        )));
    }
    let rho2 = z.norm_squared();
    if rho2 == 0.0 {
        return Err(Error::ZeroHyperradius);
    }
    let rho = rho2.sqrt();
    let h = mass / 2.0;
    let t = h * zdot.norm_squared();
    let rhodot = frobenius_inner(z, zdot)? / rho;
    let t_rho = h * rhodot * rhodot;

    let transposed = z.nrows() > z.ncols();
    let o = if transposed {
        oriented(mass, &z.transpose(), &zdot.transpose(), tol)?
    } else {
        oriented(mass, z, zdot, tol)?
    };
    let (t_ext, t_int, e_out_a, e_out_b, e_in_a, e_in_b) = if transposed {
        (o.int, o.ext, o.in_a, o.in_b, o.out_a, o.out_b)
    } else {
        (o.ext, o.int, o.out_a, o.out_b, o.in_a, o.in_b)
    };

    let mom = momenta_fast(mass, z, zdot, &o.xi, &o.xidot)?;
    let scale = 2.0 * mass * rho2;
    let snap = |x: f64| if x.abs() <= SNAP_TO_ZERO * t { 0.0 } else { x };
    let t_rot = snap(t - o.t_i);
    let t_j = snap(mom.j2 / scale);
    let t_k = snap(mom.k2 / scale);
    let (d, n) = z.shape();
    // Equal whenever one side has no room for mixed rotations; reuse the
    // momentum value so both are the same number.
    let t_ext = if d <= 2 || n == 1 { t_j } else { snap(t_ext) };
    let t_int = if d == 1 || n <= 2 { t_k } else { snap(t_int) };
    let (e_out_a, e_out_b, e_in_a, e_in_b) = (snap(e_out_a), snap(e_out_b), snap(e_in_a), snap(e_in_b));
    let e_out = e_out_a + e_out_b;
    let e_in = e_in_a + e_in_b;
    Ok(PartitionResult {
        t,
        t_lambda: snap(mom.lambda2 / scale),
        t_rho: snap(t_rho),
        t_rot,
        t_i: snap(o.t_i),
        t_xi: snap(mom.l2 / scale),
        t_ext,
        t_int,
        t_res: snap(t_rot - t_ext - t_int),
        t_j,
        t_k,
        t_ac: snap(t_rot - t_j - t_k),
        e_out,
        e_out_a,
        e_out_b,
        e_in,
        e_in_a,
        e_in_b,
        e_c: snap(t_rot - e_out - e_in),
        momenta: mom,
        rho,
        rank: o.rank,
        degenerate: o.degenerate,
    })
}

/// Partition identities and inequalities that fail on `r`, checked with
/// absolute slack `tol · max(1, T)`. Singular expansion checks are skipped for
/// degenerate systems.
// Negated comparisons so that NaN counts as a violation.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn identity_violations(r: &PartitionResult, tol: f64) -> Vec<String> {
    let eps = tol * r.t.max(1.0);
    let mut bad = Vec::new();
    let mut eq = |name: &str, a: f64, b: f64| {
        if !((a - b).abs() <= eps) {
            bad.push(format!("{name}: {a} != {b}"));
        }
    };
    eq("T = T_Lambda + T_rho", r.t, r.t_lambda + r.t_rho);
    eq("T = T_rot + T_I", r.t, r.t_rot + r.t_i);
    eq("T_rot = T_ext + T_int + T_res", r.t_rot, r.t_ext + r.t_int + r.t_res);
    eq("T_rot = T_J + T_K + T_ac", r.t_rot, r.t_j + r.t_k + r.t_ac);
    eq("T_Lambda - T_rot = T_xi", r.t_lambda - r.t_rot, r.t_xi);
    eq("T_I - T_rho = T_xi", r.t_i - r.t_rho, r.t_xi);
    if !r.degenerate {
        eq("T_rot = E_out + E_in + E_c", r.t_rot, r.e_out + r.e_in + r.e_c);
        eq("E_out = E_outA + E_outB", r.e_out, r.e_out_a + r.e_out_b);
        eq("E_in = E_inA + E_inB", r.e_in, r.e_in_a + r.e_in_b);
    }
    let mut le = |name: &str, a: f64, b: f64| {
        if !(a <= b + eps) {
            bad.push(format!("{name}: {a} > {b}"));
        }
    };
    le("0 <= T_J", 0.0, r.t_j);
    le("T_J <= T_ext", r.t_j, r.t_ext);
    le("T_ext <= T_rot", r.t_ext, r.t_rot);
    le("0 <= T_K", 0.0, r.t_k);
    le("T_K <= T_int", r.t_k, r.t_int);
    le("T_int <= T_rot", r.t_int, r.t_rot);
    le("T_res <= T_ac", r.t_res, r.t_ac);
    if !r.degenerate {
        le("E_outB <= T_rot", r.e_out_b, r.t_rot);
        le("E_inB <= T_rot", r.e_in_b, r.t_rot);
    }
    // Same statement in momentum units: divide by 2Mρ² before comparing.
    let mm = &r.momenta;
    let scale = if r.t_lambda > 0.0 { r.t_lambda / mm.lambda2 } else { 0.0 };
    if scale.is_finite() && scale > 0.0 {
        le("J^2 + L^2 <= Lambda^2", (mm.j2 + mm.l2) * scale, mm.lambda2 * scale);
        le("K^2 + L^2 <= Lambda^2", (mm.k2 + mm.l2) * scale, mm.lambda2 * scale);
    }
    bad
}
