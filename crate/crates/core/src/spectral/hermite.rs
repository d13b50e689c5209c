use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid1D, MockPlanck};
use crate::wave::{normalize, WaveFunction};

/// Highest level served by the recurrence.
pub const MAX_HERMITE_LEVEL: usize = 20;

/// Oscillator eigenfunction `n` for mass `m` and frequency `omega`, built with
/// the normalized three-term recurrence in `y = Q sqrt(m omega / hbar)`.
pub fn hermite_eigenstate(
    n: usize,
    m: f64,
    omega: f64,
    hbar: MockPlanck,
    grid: &Grid1D,
) -> Result<WaveFunction> {
    if n > MAX_HERMITE_LEVEL {
        return Err(Error::param(
            "n",
            format!("level must be <= {MAX_HERMITE_LEVEL}, got {n}"),
        ));
    }
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::param("mass", format!("must be > 0, got {m}")));
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::param("omega", format!("must be > 0, got {omega}")));
    }
    let alpha = (m * omega / hbar.value()).sqrt();
    let scale = alpha.sqrt();
    let amps: Vec<Complex64> = grid
        .points()
        .iter()
        .map(|&q| Complex64::new(scale * hermite_function(n, alpha * q), 0.0))
        .collect();
    let psi = WaveFunction::new(grid.clone(), amps, hbar)?;
    let edge = psi.edge_ratio();
    if edge > 1e-8 {
        return Err(Error::Truncation(format!(
            "level {n} has edge amplitude {edge:.3e} of its peak; widen the grid"
        )));
    }
    normalize(&psi)
}

/// Normalized Hermite function `H_n(y) e^{-y^2/2} / sqrt(2^n n! sqrt(pi))`.
pub fn hermite_function(n: usize, y: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * y * y).exp();
    for k in 0..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * y * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Physicists' Hermite polynomial `H_n(y)`.
pub fn hermite_polynomial(n: usize, y: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * y;
    for k in 1..n {
        let next = 2.0 * y * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}
