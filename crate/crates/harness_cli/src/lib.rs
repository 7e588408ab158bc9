//! Experiment harness: target builders, learning-curve sweeps, spectrum dumps and
//! verification suites behind the `cklab` command.

pub mod config;
pub mod curve;
pub mod dump;
mod error;
pub mod shrink;
pub mod svg;
pub mod target;
pub mod verify;

pub use config::{geometric_grid, ArchKind, ExperimentConfig, RiskPolicy};
pub use curve::{run_learning_curve, within_bands, CurvePoint, CurveTable};
pub use dump::dump_spectrum;
pub use error::HarnessError;
pub use shrink::{default_level, shrinkage_comparison, ShrinkageComparison};
pub use target::{build_target, FourierTerm, TargetSpec};
pub use verify::{run_suite, Check, Size, Suite, SuiteReport};
