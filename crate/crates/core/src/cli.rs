//! Subcommand implementations behind the `kinpart` binary. Each returns its
//! output instead of printing so it can be tested directly.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::ensemble::{sample_system, MassMode, RandomStream, TOTAL_MASS};
use crate::error::{Error, Result};
use crate::harness::{run_experiment, CheckKind, ExperimentConfig, Verification};
use crate::linalg::Mat;
use crate::momenta::momenta_direct;
use crate::partition::{
    compute_partition, eigenvector_components, project_oracle, svd_rates, PartitionResult, ToleranceConfig,
};
use crate::{csvio, harness};

pub const DEFAULT_SAMPLES: u64 = 100_000;
pub const FULL_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_SIGMA: f64 = 4.0;
pub const ORACLE_TOL: f64 = 1e-8;

/// Everything that determines a simulation file. Serialised verbatim into the
/// file header; the output path is left out so that the same run written to
/// two places gives identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub d: u32,
    pub n_min: u32,
    pub n_max: u32,
    pub samples: u64,
    pub masses: MassMode,
    pub seed: u64,
    pub sigma_threshold: f64,
    pub gap_tol: f64,
    pub zero_tol: f64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn simulate(d: u32, n_min: u32, n_max: u32, samples: u64, masses: MassMode, seed: u64) -> Self {
        let tol = ToleranceConfig::default();
        RunConfig {
            subcommand: "simulate".into(),
            d,
            n_min,
            n_max,
            samples,
            masses,
            seed,
            sigma_threshold: DEFAULT_SIGMA,
            gap_tol: tol.gap_tol,
            zero_tol: tol.zero_tol,
            out: None,
        }
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            d: self.d,
            n_min: self.n_min,
            n_max: self.n_max,
            samples: self.samples,
            masses: self.masses,
            seed: self.seed,
            tolerances: ToleranceConfig {
                gap_tol: self.gap_tol,
                zero_tol: self.zero_tol,
            },
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Single-system input file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemInput {
    pub masses: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
}

impl SystemInput {
    /// Mass-scaled, centre-of-mass `(M, Z, Ż)`.
    pub fn to_matrices(&self) -> Result<(f64, Mat, Mat)> {
        let n = self.masses.len();
        if n == 0 {
            return Err(Error::Malformed("no particles".into()));
        }
        if self.positions.len() != n || self.velocities.len() != n {
            return Err(Error::Malformed(format!(
                "{n} masses but {} positions and {} velocities",
                self.positions.len(),
                self.velocities.len()
            )));
        }
        let d = self.positions[0].len();
        if d == 0 {
            return Err(Error::Malformed("zero-dimensional positions".into()));
        }
        for (what, list) in [("position", &self.positions), ("velocity", &self.velocities)] {
            if let Some((a, v)) = list.iter().enumerate().find(|(_, v)| v.len() != d) {
                return Err(Error::Malformed(format!(
                    "{what} {a} has {} components, expected {d}",
                    v.len()
                )));
            }
        }
        if self.masses.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(Error::Malformed("masses must be positive".into()));
        }
        let total: f64 = self.masses.iter().sum();
        let scale = |list: &Vec<Vec<f64>>| {
            let com: Vec<f64> = (0..d)
                .map(|i| list.iter().zip(&self.masses).map(|(p, m)| m * p[i]).sum::<f64>() / total)
                .collect();
            Mat::from_fn(d, n, |i, a| (self.masses[a] / total).sqrt() * (list[a][i] - com[i]))
        };
        Ok((total, scale(&self.positions), scale(&self.velocities)))
    }
}

pub fn cmd_partition(input: &Path) -> Result<Value> {
    let file = File::open(input)?;
    let sys: SystemInput = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Error::Malformed(format!("{}: {e}", input.display())))?;
    partition_json(&sys)
}

pub fn partition_json(sys: &SystemInput) -> Result<Value> {
    let (mass, z, zdot) = sys.to_matrices()?;
    let r = compute_partition(mass, &z, &zdot, &ToleranceConfig::default())?;
    Ok(r.to_json(mass))
}

pub fn simulate_to_writer<W: Write>(cfg: &RunConfig, out: W) -> Result<Vec<harness::TermReport>> {
    if cfg.subcommand != "simulate" {
        return Err(Error::InvalidArgument(format!(
            "not a simulate config: {}",
            cfg.subcommand
        )));
    }
    let rows = run_experiment(&cfg.experiment())?;
    csvio::write_reports(out, &cfg.to_json()?, &rows)?;
    Ok(rows)
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<Vec<harness::TermReport>> {
    cfg.experiment().validate()?;
    let path = cfg
        .out
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("missing output path".into()))?;
    let mut w = BufWriter::new(File::create(path)?);
    let rows = simulate_to_writer(cfg, &mut w)?;
    w.flush()?;
    Ok(rows)
}

pub fn render_verification(v: &Verification, sigma: f64) -> String {
    let mut s = String::new();
    for c in &v.checks {
        let what = match c.kind {
            CheckKind::Mean => "mean",
            CheckKind::ResidualSign => "sign",
        };
        let _ = writeln!(
            s,
            "{} d={} N={} {} {} {}: abs_diff={:.3e} sigma_ratio={:.3}",
            if c.pass { "PASS" } else { "FAIL" },
            c.d,
            c.n,
            c.mass_mode,
            c.term,
            what,
            c.abs_diff,
            c.sigma_ratio
        );
    }
    let failed = v.failures().count();
    let _ = writeln!(
        s,
        "checks: {} total, {} failed (threshold {sigma} sigma)",
        v.checks.len(),
        failed
    );
    for (name, a) in [
        ("abs_diff", v.abs_diff),
        ("weighted_diff", v.weighted_diff),
        ("sigma_ratio", v.sigma_ratio),
    ] {
        let _ = writeln!(s, "{name}: min={:.6e} max={:.6e} mean={:.6e}", a.min, a.max, a.mean);
    }
    s
}

/// Returns the verdict table and whether every check passed.
pub fn cmd_verify(input: &Path, sigma: f64) -> Result<(String, bool)> {
    let parsed = csvio::read_reports(BufReader::new(File::open(input)?))?;
    let v = harness::verify_report(&parsed.rows, sigma)?;
    Ok((render_verification(&v, sigma), v.all_pass()))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Largest relative discrepancy seen for each compared pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    pub d: u32,
    pub n: u32,
    pub samples: u64,
    pub degenerate_skipped: u64,
    pub max_rel: Vec<(String, f64)>,
    pub pass: bool,
}

/// Fast paths against the brute-force ones, on `samples` systems of each mass
/// mode.
pub fn oracle_check(d: u32, n: u32, samples: u64, seed: u64) -> Result<OracleSummary> {
    if !(1..=5).contains(&d) || !(2..=8).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "oracle check needs 1 <= d <= 5 and 2 <= N <= 8, got d={d}, N={n}"
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let names = [
        "T_ext", "T_int", "T_rot", "E_out", "E_in", "J2", "K2", "Lambda2", "L2", "E_outA", "E_outB", "E_inA", "E_inB",
    ];
    let mut worst = vec![0.0f64; names.len()];
    let mut skipped = 0;
    let tol = ToleranceConfig::default();
    for mode in [MassMode::Equal, MassMode::Random] {
        for index in 0..samples {
            let mut rng = RandomStream::for_sample(seed, d as usize, n as usize, mode, index);
            let s = sample_system(d as usize, n as usize, mode, &mut rng);
            let r: PartitionResult = compute_partition(TOTAL_MASS, &s.z, &s.zdot, &tol)?;
            let o = project_oracle(TOTAL_MASS, &s.z, &s.zdot)?;
            let f = svd_rates(&s.z, &s.zdot, &tol)?;
            let m = momenta_direct(TOTAL_MASS, &s.z, &s.zdot, &f.factors.xi, &f.xidot)?;
            let mut pairs = vec![
                ("T_ext", r.t_ext, o.t_ext),
                ("T_int", r.t_int, o.t_int),
                ("T_rot", r.t_rot, o.t_rot),
                ("J2", r.momenta.j2, m.j2),
                ("K2", r.momenta.k2, m.k2),
                ("Lambda2", r.momenta.lambda2, m.lambda2),
                ("L2", r.momenta.l2, m.l2),
            ];
            let e = eigenvector_components(TOTAL_MASS, &s.z, &s.zdot)?;
            match (r.degenerate, o.e_out, o.e_in, e) {
                (false, Some(eo), Some(ei), Some(e)) => pairs.extend([
                    ("E_out", r.e_out, eo),
                    ("E_in", r.e_in, ei),
                    ("E_outA", r.e_out_a, e.e_out_a),
                    ("E_outB", r.e_out_b, e.e_out_b),
                    ("E_inA", r.e_in_a, e.e_in_a),
                    ("E_inB", r.e_in_b, e.e_in_b),
                ]),
                _ => skipped += 1,
            }
            for (name, a, b) in pairs {
                let i = names.iter().position(|x| *x == name).expect("known name");
                worst[i] = worst[i].max(rel(a, b));
            }
        }
    }
    let pass = worst.iter().all(|&w| w <= ORACLE_TOL);
    Ok(OracleSummary {
        d,
        n,
        samples,
        degenerate_skipped: skipped,
        max_rel: names.iter().map(|s| s.to_string()).zip(worst).collect(),
        pass,
    })
}

pub fn cmd_oracle_check(d: u32, n: u32, samples: u64, seed: u64) -> Result<(String, bool)> {
    let s = oracle_check(d, n, samples, seed)?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "oracle check d={d} N={n}, {samples} samples per mass mode, seed {seed}"
    );
    for (name, w) in &s.max_rel {
        let _ = writeln!(
            out,
            "{} {name}: max relative difference {w:.3e}",
            if *w <= ORACLE_TOL { "PASS" } else { "FAIL" }
        );
    }
    if s.degenerate_skipped > 0 {
        let _ = writeln!(
            out,
            "degenerate systems skipped for the singular expansion: {}",
            s.degenerate_skipped
        );
    }
    let _ = writeln!(out, "{}", if s.pass { "PASS" } else { "FAIL" });
    Ok((out, s.pass))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_particle(vel: [[f64; 2]; 2]) -> SystemInput {
        let s = 0.5f64.sqrt();
        SystemInput {
            masses: vec![1.0, 1.0],
            positions: vec![vec![s, 0.0], vec![-s, 0.0]],
            velocities: vel.iter().map(|v| v.to_vec()).collect(),
        }
    }

    #[test]
    fn perpendicular_pair() {
        let s = 0.5f64.sqrt();
        let v = partition_json(&two_particle([[0.0, s], [0.0, -s]])).unwrap();
        let t = v["T"].as_f64().unwrap();
        assert!((v["T_rot"].as_f64().unwrap() - t).abs() < 1e-14);
        assert!(v["T_rho"].as_f64().unwrap().abs() < 1e-14);
        assert_eq!(v["M"].as_f64().unwrap(), 2.0);
        assert_eq!(v["degenerate"], Value::Bool(false));
    }

    #[test]
    fn velocities_equal_positions() {
        let s = 0.5f64.sqrt();
        let v = partition_json(&two_particle([[s, 0.0], [-s, 0.0]])).unwrap();
        assert!((v["T_rho"].as_f64().unwrap() - v["T"].as_f64().unwrap()).abs() < 1e-14);
        assert!(v["T_Lambda"].as_f64().unwrap().abs() < 1e-14);
    }

    #[test]
    fn inconsistent_input() {
        let mut sys = two_particle([[0.0, 1.0], [0.0, -1.0]]);
        sys.velocities.pop();
        assert!(matches!(partition_json(&sys), Err(Error::Malformed(_))));
        let mut sys = two_particle([[0.0, 1.0], [0.0, -1.0]]);
        sys.positions[1] = vec![1.0, 2.0, 3.0];
        assert!(matches!(partition_json(&sys), Err(Error::Malformed(_))));
        let sys = SystemInput {
            masses: vec![1.0, 2.0],
            positions: vec![vec![1.0], vec![1.0]],
            velocities: vec![vec![0.0], vec![1.0]],
        };
        assert!(matches!(partition_json(&sys), Err(Error::ZeroHyperradius)));
    }

    #[test]
    fn oracle_check_cases() {
        for (d, n) in [(2, 4), (3, 2), (1, 3)] {
            let s = oracle_check(d, n, 50, 1).unwrap();
            assert!(s.pass, "{s:?}");
        }
        assert!(oracle_check(6, 3, 1, 1).is_err());
        assert!(oracle_check(2, 9, 1, 1).is_err());
    }

    #[test]
    fn config_json_is_stable() {
        let c = RunConfig::simulate(2, 3, 3, 10, MassMode::Equal, 42);
        let j = c.to_json().unwrap();
        assert!(j.contains("\"seed\":42") && j.contains("\"gap_tol\":1e-9"));
        let back: RunConfig = serde_json::from_str(&j).unwrap();
        assert_eq!(back, c);
    }
}
