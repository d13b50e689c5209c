//! Lotka-Volterra: classical flow, quadratic mock flow and the exact full-LV vacuum family.

mod classical;
mod mock;
mod vacuum;

pub use classical::{fit_frequency, lv_hamiltonian, lv_integrate, LVParams, LVState, LvTrajectory};
pub use mock::{
    ground_state_vq_fit, linear_flow, measured_force_coefficient, mock_force_coefficient,
    mock_quadratic_flow, QuadraticFlow, VqMode,
};
pub use vacuum::{
    full_lv_energy, full_lv_spectrum, full_lv_vq_constants, verify_vq_constants, FullLVVacuum,
    VacuumValue, VqConstantCheck, VqConstants,
};
