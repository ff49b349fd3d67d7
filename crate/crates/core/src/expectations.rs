//! Closed-form mean values of the bounded terms for equal masses, and the
//! approximate large-`N` formulas for residuals and random masses.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::terms::Term;

pub type Rational = Ratio<i64>;

/// Expected values for one `(d, N)`, exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectationSet {
    pub d: u32,
    pub n: u32,
    pub nu: u32,
    pub omega: u32,
    pub t_lambda: Rational,
    pub t_rho: Rational,
    pub t_rot: Rational,
    pub t_i: Rational,
    pub t_xi: Rational,
    pub t_ext: Rational,
    pub t_int: Rational,
    pub t_res: Rational,
    pub t_j: Rational,
    pub t_k: Rational,
    pub t_ac: Rational,
    pub e_out_b: Rational,
    pub e_in_b: Rational,
}

impl ExpectationSet {
    pub fn exact(&self, term: Term) -> Option<Rational> {
        Some(match term {
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
            Term::EOutB => self.e_out_b,
            Term::EInB => self.e_in_b,
            _ => return None,
        })
    }

    pub fn get(&self, term: Term) -> Option<f64> {
        self.exact(term).map(to_f64)
    }
}

pub fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Mean values of the 13 bounded terms under equal masses.
pub fn conjecture_means(d: u32, n: u32) -> Result<ExpectationSet> {
    if d < 1 || n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need d >= 1 and N >= 2, got d={d}, N={n}"
        )));
    }
    let nu = n - 1;
    let omega = d.min(nu);
    let (di, nui, w) = (i64::from(d), i64::from(nu), i64::from(omega));
    let dn = di * nui;
    let r = |num: i64, den: i64| Rational::new(num, den);
    let one = Rational::from_integer(1);
    Ok(ExpectationSet {
        d,
        n,
        nu,
        omega,
        t_lambda: one - r(1, dn),
        t_rho: r(1, dn),
        t_rot: one - r(w, dn),
        t_i: r(w, dn),
        t_xi: r(w - 1, dn),
        t_ext: r(w * (2 * di - w - 1), 2 * dn),
        t_int: r(w * (2 * nui - w - 1), 2 * dn),
        t_res: Rational::from_integer(0),
        t_j: r(di - 1, dn),
        t_k: r(nui - 1, dn),
        t_ac: one - r(di + nui + w - 2, dn),
        e_out_b: one - r(w, di),
        e_in_b: one - r(w, nui),
    })
}

/// Approximate mean of `|T_res|` (and of `T_res±` times two) for large `N`:
/// `5(d − 1)/(8dν)`.
pub fn residual_magnitude_approx(d: u32, n: u32) -> f64 {
    let nu = f64::from(n.saturating_sub(1));
    let d = f64::from(d);
    5.0 * (d - 1.0) / (8.0 * d * nu)
}

/// Descriptive least-squares fit `(aN + b)/(2ν)` of planar random-mass means
/// over `50 ≤ N ≤ 100`. The two signed residual parts were fitted with
/// `b = 0.78` and `b = 0.80`; their average is used for both.
pub fn random_mass_fit(term: Term, n: u32) -> Result<f64> {
    let (a, b) = match term {
        Term::TLambda => (1.88, -4.04),
        Term::TRho => (0.12, 2.04),
        Term::TRot => (1.83, -5.2),
        Term::TI => (0.17, 3.2),
        Term::TXi => (0.05, 1.15),
        Term::TExt | Term::TJ => (0.12, 2.05),
        Term::TInt => (1.71, -7.22),
        Term::TResPos | Term::TResNeg => (0.03, 0.79),
        Term::TK => (0.88, -3.03),
        Term::TAc => (0.83, -4.22),
        Term::EInB => (1.66, -8.39),
        other => return Err(Error::UnknownTerm(other.name().to_string())),
    };
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need N >= 2, got {n}")));
    }
    let n = f64::from(n);
    Ok((a * n + b) / (2.0 * (n - 1.0)))
}

/// Label attached to [`random_mass_fit`] values wherever they are reported.
pub const RANDOM_MASS_FIT_LABEL: &str = "descriptive fit";
