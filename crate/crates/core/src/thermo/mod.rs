//! Pressure bounds, equilibrium states and their regularity tests for the
//! norm potential `w ↦ ‖A_w‖ˢ`.

use thiserror::Error;

use crate::semigroup::SemigroupError;

pub mod classify;
pub mod eta;
pub mod measure;
pub mod pressure;
pub mod ratio;
pub mod shadowing;
pub mod transfer;
pub mod triangular;

pub use classify::{
    equilibrium_classify, reducible_cone_search, ClassStage, Classification, ConeSide, EquilibriumClass, ReducibleCone,
    REDUCIBLE_EPS_GRID,
};
pub use eta::{eta_measure, eta_weights, kappa_map, EtaWeights};
pub use measure::{entropy_and_lambda, CylinderMeasure, EntropyLambda};
pub use pressure::{log_norm_sums, log_sum_exp, pressure_bounds, LowerBoundKind, PressureBounds, PressureRow};
pub use ratio::{gibbs_type_ratio_test, quasi_bernoulli_ratio_test, BandRow, RatioBands};
pub use shadowing::{
    fit_locally_constant, shadowing_deficit, LengthDeficit, PotentialFit, PotentialModel, ShadowingConfig,
    ShadowingReport,
};
pub use transfer::{
    discretized_potential, transfer_equilibrium, transfer_from_direction, TransferSolution, POWER_MAX_ITER, POWER_TOL,
};
pub use triangular::{bernoulli_equilibrium_triangular, triangular_diagonals, BernoulliState, DiagonalSide};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThermoError {
    #[error("measure or potential has the wrong shape")]
    BadShape,
    #[error("the tuple has no common invariant line")]
    NotReducible,
    #[error("the certificate does not verify for this tuple")]
    NotCertified,
    #[error("power iteration did not converge in {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("depth {0} is out of range")]
    BadDepth(usize),
    #[error("s must be positive, got {0}")]
    NonPositiveS(f64),
    #[error(transparent)]
    Semigroup(#[from] SemigroupError),
    #[error("precondition failed: {0}")]
    Precondition(String),
}
