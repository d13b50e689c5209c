//! Madelung hydrodynamics: quantum stress, Euler and continuity residuals, scaling estimators.

mod fields;
mod scaling;

pub use fields::{
    continuity_residual, euler_residual, quantum_potential_gradient, quantum_reynolds,
    stress_from_amplitude, stress_identity_residual, stress_identity_residual_wavefunction, stress_tensor, HydroFields, ResidualReport, Reynolds, StressField,
    DENSITY_TRUST,
};
pub use scaling::{
    fractional_brownian_motion, fractional_gaussian_noise, log_lags, structure_scaling,
    ScalingFit, PHASE_REFERENCE, VELOCITY_REFERENCE,
};
