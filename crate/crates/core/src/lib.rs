//! Gradient scheme for a coupled parabolic obstacle problem with
//! reaction-diffusion coupling, discretised by nonconforming P1
//! (Crouzeix-Raviart) elements and implicit Euler in time.
//!
//! The numerical core is generic over [`Scalar`] (`f32`, `f64`); the aliases
//! below fix `f64`.

pub mod assembly;
pub mod dense;
pub mod diagnostics;
pub mod discretisation;
pub mod mesh;
pub mod problem;
pub mod quadrature;
pub mod scalar;
pub mod sparse;
pub mod stepper;
pub mod vi_solver;

pub use assembly::{assemble_mass, assemble_reaction_load, assemble_stiffness, TensorField};
pub use diagnostics::{
    dual_norm, energy_report, estimate_coercivity, estimate_consistency, estimate_limit_conformity, BoundaryMode,
    ConsistencyOptions, Diagnostics, DiagnosticsReport, EnergyReport,
};
pub use discretisation::{DofVector, FieldRole, GradientDiscretisation, SpaceTimeField, TimeGrid};
pub use mesh::{Mesh, PointLocator};
pub use problem::{field, presets, ProblemSpec, Reaction, ScalarField, ValidationOptions};
pub use scalar::{Scalar, Vec2};
pub use sparse::SparseSymMatrix;
pub use stepper::{advance_step, solve_evolution, StepOptions, StepOutcome, StepReport, Stepper, Trajectory};
pub use vi_solver::{solve_active_set_oracle, solve_psor, solve_spd, LcpProblem, LcpSolution, PsorOptions};

pub type Mesh64 = Mesh<f64>;
pub type TimeGrid64 = TimeGrid<f64>;
pub type Discretisation64 = GradientDiscretisation<f64>;
pub type DofVector64 = DofVector<f64>;
pub type Matrix64 = SparseSymMatrix<f64>;
pub type ProblemSpec64 = ProblemSpec<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type StepOptions64 = StepOptions<f64>;
pub type LcpProblem64 = LcpProblem<f64>;
pub type EnergyReport64 = EnergyReport<f64>;
