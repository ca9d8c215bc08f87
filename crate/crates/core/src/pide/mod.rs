//! The path-independence PIDE system, its closed-form special cases, the
//! explicit viscosity solver and the decomposition uniqueness check.

mod decomposition;
mod special;
mod system;
mod viscosity;
mod witness;

pub use decomposition::{
    decomposition_check, DecompositionReport, DecompositionSpec, DriftFn, MarkFn, ScenarioDecomposition, TimeVecFn,
    ZERO_TOL,
};
pub use special::{pure_driver_g, special_case_g, special_case_v, Scalar1, Scalar2, SpecialCase, QUADRATURE_TOL};
pub use system::{manufacture_from_v, pide_system_residual, Manufactured, SystemResidual};
pub use viscosity::{solve_viscosity_pide, PideGrid, ValueSurface};
pub use witness::{Domain, PideWitness, ValueFn, VectorFn, SPACE_STEP, TIME_STEP};
