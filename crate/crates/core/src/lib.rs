//! Kinetic energy partitions of point-particle systems and Monte Carlo
//! checks of their mean values.
//!
//! A system of `N` particles in `R^d` is described by the mass-scaled
//! position matrix `Z` (`d × N`) and its rate `Ż`. [`partition`] splits the
//! kinetic energy `T = (M/2)‖Ż‖²` five ways, [`expectations`] gives the
//! closed-form means of the bounded parts for equal masses, and [`harness`]
//! samples random systems to compare the two.

pub mod cli;
pub mod csvio;
pub mod ensemble;
pub mod error;
pub mod expectations;
pub mod harness;
pub mod linalg;
pub mod momenta;
pub mod partition;
pub mod stats;
pub mod terms;

pub use ensemble::{sample_system, MassMode, ParticleSystem, RandomStream, TOTAL_MASS};
pub use error::{Error, Result};
pub use expectations::{conjecture_means, random_mass_fit, residual_magnitude_approx, ExpectationSet};
pub use harness::{run_experiment, verify_report, ExperimentConfig, TermReport, Verification};
pub use linalg::Mat;
pub use momenta::MomentaResult;
pub use partition::{compute_partition, project_oracle, svd_rates, PartitionResult, SvdFrame, ToleranceConfig};
pub use stats::StatAccumulator;
pub use terms::Term;
