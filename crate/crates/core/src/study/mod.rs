//! Study configuration, registry and runner.

pub mod config;
pub mod registry;
pub mod run;

pub use config::{ProblemKind, ProblemSpec, ReferenceKind, ReferenceSpec, RiemannConfig, StudyConfig, VariantSpec};
pub use registry::{builtin_studies, find_study, BuiltinStudy};
pub use run::{build_reference, run_riemann, run_study, write_reference_grids, RunOptions, StudyOutcome};
