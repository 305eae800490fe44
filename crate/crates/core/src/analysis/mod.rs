//! Closed-form capacity model, threshold solvers and sweeps.

mod capacity;
mod efficiency;
mod entropy;
mod sweep;
mod threshold;

pub use capacity::{
    error_budget, error_budget_from_offsets, expected_observed_p0, secrecy_capacity, CapacityParams, CapacityPoint,
    ErrorBudget, GainModel,
};
pub use efficiency::{practical_efficiency, EfficiencyParams, DI_REFERENCE_DISTANCE_KM, DUTY_FACTOR};
pub use entropy::binary_entropy;
pub use sweep::{sweep, SweepAxis, SweepRow, SweepSpec};
pub use threshold::{
    bisect, delta_theta_threshold, delta_theta_threshold_in, eta_threshold, fidelity_threshold, max_distance,
    minimum_capacity, FidelityThreshold, DELTA_THETA_SEARCH_MAX,
};
