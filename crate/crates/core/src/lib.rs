//! Generalized finite element solver for the 1D unsteady Burgers equation
//! with solution-tailored enrichments, reference solutions and a
//! convergence-study harness.

pub mod analysis;
pub mod assembly;
pub mod enrichment;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod problem;
pub mod quadrature;
pub mod reference;
pub mod solver;
pub mod study;

pub use assembly::{project_initial_condition, CoeffVector, Discretization};
pub use enrichment::{build_dof_map, DofMap, EnrichmentKind, EnrichmentOptions, EnrichmentRule};
pub use error::{Error, Result};
pub use mesh::{build_uniform_mesh, Mesh1D};
pub use problem::{BoundaryValue, InitialCondition, Problem};
pub use reference::ReferenceSolution;
pub use solver::{run_simulation, SolutionHistory, SolverSettings, TimeConfig};
