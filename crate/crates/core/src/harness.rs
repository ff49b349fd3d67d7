//! Monte Carlo runs over the ensemble and comparison with expected means.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{sample_system, MassMode, RandomStream, TOTAL_MASS};
use crate::error::{Error, Result};
use crate::expectations::conjecture_means;
use crate::partition::{compute_partition, ToleranceConfig};
use crate::stats::StatAccumulator;
use crate::terms::Term;

/// Samples per work unit. Units are merged in index order, so results do not
/// depend on how units are spread over threads.
pub const BLOCK_SIZE: u64 = 2048;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "KINPART_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub d: u32,
    pub n_min: u32,
    pub n_max: u32,
    pub samples: u64,
    pub masses: MassMode,
    pub seed: u64,
    pub tolerances: ToleranceConfig,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d < 1 {
            return Err(Error::InvalidArgument("d must be at least 1".into()));
        }
        if self.n_min < 2 || self.n_min > self.n_max {
            return Err(Error::InvalidArgument(format!(
                "invalid particle range {}..={}",
                self.n_min, self.n_max
            )));
        }
        if self.samples < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 samples, got {}",
                self.samples
            )));
        }
        self.tolerances.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermReport {
    pub d: u32,
    pub n: u32,
    pub x_abscissa: f64,
    pub mass_mode: MassMode,
    pub term: String,
    pub count: u64,
    pub mean: f64,
    pub variance_biased: f64,
    pub stderr: f64,
    pub min: f64,
    pub max: f64,
    pub expected: Option<f64>,
    pub abs_diff: Option<f64>,
    pub weighted_diff: Option<f64>,
    pub sigma_ratio: Option<f64>,
    pub fraction_negative: Option<f64>,
    pub fraction_positive: Option<f64>,
    pub degenerate_excluded: u64,
    pub seed: u64,
}

impl TermReport {
    pub fn variance_unbiased(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.count as f64 * self.variance_biased / (self.count - 1) as f64
        }
    }

    pub fn term_id(&self) -> Result<Term> {
        self.term.parse()
    }
}

/// `1/2 − 1/(N − 1)`, the abscissa of the mean-value plots.
pub fn x_abscissa(n: u32) -> f64 {
    0.5 - 1.0 / f64::from(n - 1)
}

/// Expected mean of `term` where one is known. For random masses only the
/// mass-independent statements are used: every bounded term at `N = 2`, and
/// otherwise `T_res → 0`, `E_outB → 0` when `ν ≥ d`, `E_inB → 0` when `ν ≤ d`.
pub fn expected_for(term: Term, d: u32, n: u32, mode: MassMode) -> Option<f64> {
    let e = conjecture_means(d, n).ok()?;
    match mode {
        MassMode::Equal => e.get(term),
        MassMode::Random if n == 2 => e.get(term),
        MassMode::Random => match term {
            Term::TRes => Some(0.0),
            Term::EOutB if e.nu >= d => Some(0.0),
            Term::EInB if e.nu <= d => Some(0.0),
            _ => None,
        },
    }
}

/// Below this the difference is treated as zero whatever the standard error;
/// it keeps structurally vanishing terms from producing huge ratios out of
/// rounding noise.
const ZERO_DIFF: f64 = 1e-12;

fn report(cfg: &ExperimentConfig, n: u32, term: Term, acc: &StatAccumulator, degenerate_excluded: u64) -> TermReport {
    let expected = expected_for(term, cfg.d, n, cfg.masses);
    let stderr = acc.stderr();
    let (abs_diff, weighted_diff, sigma_ratio) = match expected {
        Some(e) => {
            let diff = (acc.mean() - e).abs();
            let ratio = if diff <= ZERO_DIFF {
                0.0
            } else if stderr > 0.0 {
                diff / stderr
            } else {
                f64::INFINITY
            };
            (Some(diff), Some(2.0 * f64::from(n - 1) * diff), Some(ratio))
        }
        None => (None, None, None),
    };
    TermReport {
        d: cfg.d,
        n,
        x_abscissa: x_abscissa(n),
        mass_mode: cfg.masses,
        term: term.name().to_string(),
        count: acc.count(),
        mean: acc.mean(),
        variance_biased: acc.variance_biased(),
        stderr,
        min: acc.min(),
        max: acc.max(),
        expected,
        abs_diff,
        weighted_diff,
        sigma_ratio,
        fraction_negative: matches!(term, Term::TRes | Term::TAc).then(|| acc.fraction_negative()),
        fraction_positive: matches!(term, Term::EC).then(|| acc.fraction_positive()),
        degenerate_excluded,
        seed: cfg.seed,
    }
}

#[derive(Debug, Clone)]
struct Block {
    accs: Vec<StatAccumulator>,
    degenerate: u64,
}

fn run_block(cfg: &ExperimentConfig, n: u32, start: u64, end: u64) -> Result<Block> {
    let mut accs = vec![StatAccumulator::new(); Term::TRACKED.len()];
    let mut degenerate = 0;
    for index in start..end {
        let mut rng = RandomStream::for_sample(cfg.seed, cfg.d as usize, n as usize, cfg.masses, index);
        let sys = sample_system(cfg.d as usize, n as usize, cfg.masses, &mut rng);
        let r = compute_partition(TOTAL_MASS, &sys.z, &sys.zdot, &cfg.tolerances)?;
        if r.degenerate {
            degenerate += 1;
        }
        for (acc, term) in accs.iter_mut().zip(Term::TRACKED) {
            if r.degenerate && term.needs_distinct_singular_values() {
                continue;
            }
            acc.push(r.get(term));
        }
    }
    Ok(Block { accs, degenerate })
}

/// Accumulators for one `N`, before they are turned into reports.
pub fn accumulate(cfg: &ExperimentConfig, n: u32) -> Result<(Vec<StatAccumulator>, u64)> {
    let blocks: Vec<(u64, u64)> = (0..cfg.samples)
        .step_by(BLOCK_SIZE as usize)
        .map(|s| (s, (s + BLOCK_SIZE).min(cfg.samples)))
        .collect();
    let results: Vec<Result<Block>> = blocks.par_iter().map(|&(s, e)| run_block(cfg, n, s, e)).collect();
    let mut accs = vec![StatAccumulator::new(); Term::TRACKED.len()];
    let mut degenerate = 0;
    for b in results {
        let b = b?;
        for (a, x) in accs.iter_mut().zip(&b.accs) {
            a.merge(x);
        }
        degenerate += b.degenerate;
    }
    Ok((accs, degenerate))
}

/// Thread pool sized from [`THREADS_ENV`], or rayon's default when unset.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let threads: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        if threads == 0 {
            return Err(Error::InvalidArgument(format!("{THREADS_ENV} must be positive")));
        }
        builder = builder.num_threads(threads);
    }
    builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}

/// Runs every `N` of the configured range; rows are ordered by `N`, then by
/// [`Term::TRACKED`].
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TermReport>> {
    cfg.validate()?;
    let pool = thread_pool()?;
    run_experiment_in(cfg, &pool)
}

pub fn run_experiment_in(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<Vec<TermReport>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for n in cfg.n_min..=cfg.n_max {
        let (accs, degenerate) = pool.install(|| accumulate(cfg, n))?;
        for (acc, term) in accs.iter().zip(Term::TRACKED) {
            let excluded = if term.needs_distinct_singular_values() {
                degenerate
            } else {
                0
            };
            rows.push(report(cfg, n, term, acc, excluded));
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckKind {
    /// Sample mean against the expected value, in standard errors.
    Mean,
    /// Fraction of negative `T_res` against 1/2, in binomial standard errors.
    ResidualSign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub d: u32,
    pub n: u32,
    pub mass_mode: MassMode,
    pub term: String,
    pub kind: CheckKind,
    pub abs_diff: f64,
    pub weighted_diff: f64,
    pub sigma_ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Aggregate {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl Aggregate {
    fn of(values: impl Iterator<Item = f64>) -> Aggregate {
        let (mut min, mut max, mut sum, mut count) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
        for v in values {
            min = min.min(v);
            max = max.max(v);
            sum += v;
            count += 1;
        }
        if count == 0 {
            Aggregate::default()
        } else {
            Aggregate {
                min,
                max,
                mean: sum / count as f64,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub checks: Vec<Check>,
    /// Over mean checks only.
    pub abs_diff: Aggregate,
    pub weighted_diff: Aggregate,
    pub sigma_ratio: Aggregate,
}

impl Verification {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Compares every row that has an expected value, plus the sign of `T_res`
/// for `d ≥ 2, N ≥ 3`. The expected values stored in `reports` must be the
/// ones this library computes.
pub fn verify_report(reports: &[TermReport], sigma_threshold: f64) -> Result<Verification> {
    if !(sigma_threshold.is_finite() && sigma_threshold > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sigma threshold must be positive, got {sigma_threshold}"
        )));
    }
    let mut checks = Vec::new();
    for r in reports {
        let term = r.term_id()?;
        let want = expected_for(term, r.d, r.n, r.mass_mode);
        if want != r.expected {
            return Err(Error::Mismatch(format!(
                "d={} N={} {} {}: stored expected value {:?} differs from {:?}",
                r.d, r.n, r.mass_mode, r.term, r.expected, want
            )));
        }
        if let Some(e) = want {
            let diff = (r.mean - e).abs();
            let ratio = if diff <= ZERO_DIFF {
                0.0
            } else if r.stderr > 0.0 {
                diff / r.stderr
            } else {
                f64::INFINITY
            };
            checks.push(Check {
                d: r.d,
                n: r.n,
                mass_mode: r.mass_mode,
                term: r.term.clone(),
                kind: CheckKind::Mean,
                abs_diff: diff,
                weighted_diff: 2.0 * f64::from(r.n - 1) * diff,
                sigma_ratio: ratio,
                pass: ratio <= sigma_threshold,
            });
        }
        if term == Term::TRes && r.d >= 2 && r.n >= 3 {
            let frac = r
                .fraction_negative
                .ok_or_else(|| Error::Malformed(format!("d={} N={}: T_res row lacks fraction_negative", r.d, r.n)))?;
            let diff = (frac - 0.5).abs();
            let ratio = diff / (0.25 / r.count as f64).sqrt();
            checks.push(Check {
                d: r.d,
                n: r.n,
                mass_mode: r.mass_mode,
                term: r.term.clone(),
                kind: CheckKind::ResidualSign,
                abs_diff: diff,
                weighted_diff: 0.0,
                sigma_ratio: ratio,
                pass: ratio <= sigma_threshold,
            });
        }
    }
    let means = || checks.iter().filter(|c| c.kind == CheckKind::Mean);
    Ok(Verification {
        abs_diff: Aggregate::of(means().map(|c| c.abs_diff)),
        weighted_diff: Aggregate::of(means().map(|c| c.weighted_diff)),
        sigma_ratio: Aggregate::of(means().map(|c| c.sigma_ratio)),
        checks,
    })
}
