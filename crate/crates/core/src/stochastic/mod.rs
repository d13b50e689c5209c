//! Langevin dynamics, the response-field action and the Born-ergodicity diagnostic.

mod ergodicity;
mod langevin;

pub use ergodicity::{born_ergodicity, ErgodicityOptions, ErgodicityReport, HistogramBin};
pub use langevin::{
    drift_classical, drift_mock, langevin_integrate, msr_action, ou_stationary_variance,
    ClassicalDrift, DiscretePath, Drift, LangevinSpec, MockDrift,
};
