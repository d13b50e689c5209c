//! Quantum potentials, mock-Schrödinger propagation and guidance trajectories.

mod evolve;
mod potential;
mod trajectories;

pub use evolve::{
    energy_range, evolve_snapshots, max_stable_dt, split_step_evolve, Evolution, Propagator,
};
pub use potential::{
    displaced_level, environment_term_eta, harmonic_vq_closed_form, quantum_potential_canonical,
    quantum_potential_general, quantum_potential_with_threshold, EnvironmentTerm,
    QuantumPotentialField, VqMode, DEFAULT_TRUST,
};
pub use trajectories::{
    bohm_velocity, probability_flux, propagate_trajectories, SnapshotSeries, TrajectoryEnsemble,
    VelocityField,
};

pub(crate) use trajectories::walker_rng;
