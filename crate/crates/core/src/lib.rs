//! Mixed finite element solver for the 2D Kelvin-Voigt viscoelastic flow
//! model
//!
//!   u_t + (u·∇)u − κ Δu_t − ν Δu + ∇p = f,    ∇·u = 0
//!
//! on the unit square with Dirichlet boundary conditions, discretized with
//! continuous P2 velocities and piecewise-constant (P0) pressures on a
//! structured triangulation, stepped in time by backward Euler with the
//! convection term resolved by Picard iteration. κ = 0 recovers the
//! incompressible Navier-Stokes equations.
//!
//! The crate also ships the verification harness used to exercise the
//! solver: manufactured-solution convergence studies, a force-free decay
//! comparison between the Kelvin-Voigt and Navier-Stokes models, and a
//! lid-driven cavity experiment probing the κ → 0 limit.

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod fem;
pub mod io;
pub mod mesh;
pub mod problems;
pub mod sparse;
pub mod stepper;

#[cfg(test)]
pub(crate) mod test_oracles;

pub use analysis::{ConvergenceStudy, ErrorReport, RateTable};
pub use assembly::{ConvectionOperator, OperatorSet};
pub use error::{Error, Result};
pub use fem::{DofMap, QuadratureRule};
pub use io::FieldSnapshot;
pub use mesh::TriMesh;
pub use problems::ProblemDefinition;
pub use sparse::{ColumnOrdering, LuFactorization, SparseMatrix};
pub use stepper::{
    ModelParams, NonlinearSolveConfig, State, StepRule, Stepper, TimeGrid, Trajectory,
};
