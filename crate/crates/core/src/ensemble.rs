//! Random N-particle systems with the center of mass at the origin.
//!
//! Positions and velocities are independent uniform points of the unit ball,
//! centred, optionally mass-weighted, and rescaled so that `‖Z‖ = ‖Ż‖ = 1`.
//! With the total mass fixed at `M = 2` this gives `ρ = T = 1`.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::Mat;

/// Total mass of every sampled system.
pub const TOTAL_MASS: f64 = 2.0;

/// Seeded ChaCha8 stream.
///
/// The key comes from `ChaCha8Rng::seed_from_u64(seed)` and the 64-bit
/// ChaCha stream id is `stream`, so `(seed, stream)` pairs give independent,
/// bit-reproducible sequences on every platform. Normals use the ziggurat
/// sampler of `rand_distr::StandardNormal`.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    /// Substream for one sample of one ensemble configuration. The
    /// configuration is folded into the seed so that different `(d, N, mode)`
    /// cells never share draws.
    pub fn for_sample(seed: u64, d: usize, n: usize, mode: MassMode, index: u64) -> Self {
        let tag = (d as u64) << 40 ^ (n as u64) << 8 ^ mode as u64;
        Self::new(splitmix64(seed ^ splitmix64(tag)), index)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MassMode {
    Equal,
    Random,
}

impl fmt::Display for MassMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MassMode::Equal => "equal",
            MassMode::Random => "random",
        })
    }
}

impl FromStr for MassMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "equal" => Ok(MassMode::Equal),
            "random" => Ok(MassMode::Random),
            other => Err(Error::InvalidArgument(format!(
                "mass mode must be `equal` or `random`, got `{other}`"
            ))),
        }
    }
}

/// One sampled system in mass-scaled coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSystem {
    pub d: usize,
    pub n: usize,
    pub masses: Vec<f64>,
    /// `d × N`, column `α` is `q_α`.
    pub z: Mat,
    /// `d × N`, column `α` is `q̇_α`.
    pub zdot: Mat,
}

impl ParticleSystem {
    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Largest component of `Σ_α m_α^{1/2} q_α` and of the same sum for rates.
    pub fn center_of_mass_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for m in [&self.z, &self.zdot] {
            for i in 0..self.d {
                let s: f64 = (0..self.n).map(|a| self.masses[a].sqrt() * m[(i, a)]).sum();
                worst = worst.max(s.abs());
            }
        }
        worst
    }
}

/// Uniform point on the unit sphere `S^{d−1}`.
///
/// Normalised Gaussian vector (Muller); on the plane the angle is drawn
/// directly.
pub fn sample_sphere(d: usize, rng: &mut RandomStream) -> Vec<f64> {
    let mut out = vec![0.0; d];
    sphere_into(rng, &mut out);
    out
}

fn sphere_into(rng: &mut RandomStream, out: &mut [f64]) {
    assert!(!out.is_empty(), "sample_sphere needs d >= 1");
    if out.len() == 2 {
        let (s, c) = (TAU * rng.uniform()).sin_cos();
        out[0] = c;
        out[1] = s;
        return;
    }
    loop {
        out.iter_mut().for_each(|x| *x = rng.normal());
        let len = out.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len >= 1e-300 {
            out.iter_mut().for_each(|x| *x /= len);
            return;
        }
    }
}

/// Uniform point of the closed unit ball in `R^d`: `κ^{1/d} · s`.
pub fn sample_ball(d: usize, rng: &mut RandomStream) -> Vec<f64> {
    let mut out = vec![0.0; d];
    ball_into(rng, &mut out);
    out
}

fn ball_into(rng: &mut RandomStream, out: &mut [f64]) {
    let kappa = rng.uniform();
    let radius = match out.len() {
        1 => kappa,
        2 => kappa.sqrt(),
        d => kappa.powf(1.0 / d as f64),
    };
    sphere_into(rng, out);
    out.iter_mut().for_each(|x| *x *= radius);
}

/// `n` ball points as the columns of a `d × n` matrix, centred, with column
/// `α` then multiplied by `weight[α]`.
fn centred_cloud(d: usize, n: usize, weight: Option<&[f64]>, rng: &mut RandomStream) -> Mat {
    let mut m = Mat::zeros(d, n);
    for a in 0..n {
        ball_into(rng, m.column_mut(a).as_mut_slice());
    }
    for i in 0..d {
        let mut row = m.row_mut(i);
        let cm = row.sum() / n as f64;
        row.add_scalar_mut(-cm);
    }
    if let Some(w) = weight {
        for (a, &wa) in w.iter().enumerate() {
            m.column_mut(a).scale_mut(wa);
        }
    }
    m
}

/// Draws one system of `n ≥ 2` particles in `R^d`.
///
/// Draw order: the `η_α` (random masses only), then the `N` position points,
/// then the `N` velocity points.
pub fn sample_system(d: usize, n: usize, mode: MassMode, rng: &mut RandomStream) -> ParticleSystem {
    assert!(d >= 1 && n >= 2, "sample_system needs d >= 1 and N >= 2");
    loop {
        let masses: Vec<f64> = match mode {
            MassMode::Equal => vec![TOTAL_MASS / n as f64; n],
            MassMode::Random => {
                let eta: Vec<f64> = (0..n)
                    .map(|_| loop {
                        let e = rng.uniform();
                        if e >= 1e-300 {
                            break e;
                        }
                    })
                    .collect();
                let total: f64 = eta.iter().sum();
                eta.iter().map(|e| TOTAL_MASS * e / total).collect()
            }
        };
        let weight: Option<Vec<f64>> = match mode {
            MassMode::Equal => None,
            MassMode::Random => Some(masses.iter().map(|m| 1.0 / m.sqrt()).collect()),
        };
        let z = centred_cloud(d, n, weight.as_deref(), rng);
        let zdot = centred_cloud(d, n, weight.as_deref(), rng);

        let (nz, nzdot) = (z.norm(), zdot.norm());
        if nz < 1e-150 || nzdot < 1e-150 {
            continue;
        }
        let sys = ParticleSystem {
            d,
            n,
            masses,
            z: z / nz,
            zdot: zdot / nzdot,
        };
        debug_assert!((sys.total_mass() - TOTAL_MASS).abs() <= 1e-12);
        debug_assert!(sys.center_of_mass_defect() <= 1e-10);
        debug_assert!((sys.z.norm() - 1.0).abs() <= 1e-12);
        debug_assert!((sys.zdot.norm() - 1.0).abs() <= 1e-12);
        return sys;
    }
}
