//! Checks of discrete solutions: entropy residuals, contraction,
//! conservation, Young-measure concentration and convergence against exact
//! solutions.

pub mod entropy;
pub mod metrics;
pub mod oracles;
pub mod young;

pub use entropy::{
    entropy_battery, entropy_residual, expansion_shock_trajectory, kruzkov_indices, standard_battery, tol_entropy,
    EntropyBattery, EntropyResidualReport, TestFunction, ENTROPY_TOL_CONSTANT,
};
pub use metrics::{
    conservation_check, contraction_check, convergence_rate, l1_distance, l1_error, max_principle_check,
    ContractionReport, MaxPrincipleReport, CONTRACTION_SLACK,
};
pub use young::{
    default_radius_rule, empirical_young_measure, initial_leaf_terms, measure_valued_residual, BoundaryTerm,
    EmpiricalYoungMeasure, LevelMoments, YoungMeasureField,
};
