use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{to_complex, Fourier};
use crate::grid::{Grid1D, MockPlanck};
use crate::hamiltonian::HamiltonianSpec;
use crate::wave::{WaveFunction, NODE_THRESHOLD};

/// Relative amplitude above which pointwise values are compared against
/// closed forms. Below it, FFT roundoff divided by the amplitude dominates.
pub const DEFAULT_TRUST: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct QuantumPotentialField {
    pub grid: Grid1D,
    /// Real for quadratic kinetic terms; complex for the exponential one.
    pub values: Vec<Complex64>,
    /// False at nodes and at the two points straddling a sign change.
    pub valid: Vec<bool>,
    /// `|psi| / max|psi|`.
    pub relative_amplitude: Vec<f64>,
}

impl QuantumPotentialField {
    pub fn real(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn masked_count(&self) -> usize {
        self.valid.iter().filter(|v| !**v).count()
    }

    /// Points that are valid and carry at least `trust` of the peak amplitude.
    pub fn trusted(&self, trust: f64) -> Vec<bool> {
        self.valid
            .iter()
            .zip(&self.relative_amplitude)
            .map(|(&v, &r)| v && r >= trust)
            .collect()
    }

    /// Maximal runs of masked points that touch neither grid edge.
    pub fn pole_regions(&self) -> Vec<(usize, usize)> {
        let n = self.valid.len();
        let mut out = Vec::new();
        let mut i = 0;
        while i < n {
            if self.valid[i] {
                i += 1;
                continue;
            }
            let start = i;
            while i < n && !self.valid[i] {
                i += 1;
            }
            if start > 0 && i < n {
                out.push((start, i - 1));
            }
        }
        out
    }

    /// `max |V - f(x)|` over points passing [`Self::trusted`].
    pub fn max_deviation(&self, trust: f64, f: impl Fn(f64) -> Complex64) -> Result<f64> {
        let mask = self.trusted(trust);
        if !mask.iter().any(|&m| m) {
            return Err(Error::EmptyField);
        }
        Ok(mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| (self.values[i] - f(self.grid.x(i))).norm())
            .fold(0.0, f64::max))
    }
}

/// `-(hbar^2/2m) (sqrt rho)'' / sqrt rho`.
pub fn quantum_potential_canonical(psi: &WaveFunction, m: f64) -> Result<QuantumPotentialField> {
    let spec = HamiltonianSpec::canonical(m, vec![0.0; psi.grid().len()])?;
    quantum_potential_general(psi, &spec)
}

/// `K(P) sqrt rho / sqrt rho` with `K` applied as a Fourier multiplier to the
/// signed amplitude (see [`WaveFunction::signed_amplitude`]).
pub fn quantum_potential_general(
    psi: &WaveFunction,
    spec: &HamiltonianSpec,
) -> Result<QuantumPotentialField> {
    quantum_potential_with_threshold(psi, spec, NODE_THRESHOLD)
}

pub fn quantum_potential_with_threshold(
    psi: &WaveFunction,
    spec: &HamiltonianSpec,
    threshold: f64,
) -> Result<QuantumPotentialField> {
    let (ka, sa) = kinetic_on_amplitude(psi, spec, threshold)?;
    let max = psi.max_abs();
    let values = ka
        .iter()
        .zip(&sa.values)
        .map(|(k, &a)| if a != 0.0 { k / a } else { Complex64::new(0.0, 0.0) })
        .collect();
    Ok(QuantumPotentialField {
        grid: psi.grid().clone(),
        values,
        valid: sa.valid,
        relative_amplitude: psi.amplitudes().iter().map(|z| z.norm() / max).collect(),
    })
}

fn kinetic_on_amplitude(
    psi: &WaveFunction,
    spec: &HamiltonianSpec,
    threshold: f64,
) -> Result<(Vec<Complex64>, crate::wave::SignedAmplitude)> {
    let sa = psi.signed_amplitude(threshold);
    if !sa.valid.iter().any(|&v| v) {
        return Err(Error::EmptyField);
    }
    let table = spec.kinetic_multiplier(psi.grid(), psi.hbar())?;
    let ka = Fourier::new(psi.grid()).apply_table(&to_complex(&sa.values), &table);
    Ok((ka, sa))
}

#[derive(Debug, Clone)]
pub struct EnvironmentTerm {
    /// `V_Q psi`.
    pub eta: Vec<Complex64>,
    pub valid: Vec<bool>,
    /// For canonical specs, `max |2m|eta|/hbar^2 - |(sqrt rho)''||` over valid points.
    pub reconstruction_error: Option<f64>,
}

/// The term that, added to the nonlinear wave equation, leaves the linear one.
///
/// Evaluated as `(K a) (psi / a)` so no division by a small amplitude occurs.
pub fn environment_term_eta(psi: &WaveFunction, spec: &HamiltonianSpec) -> Result<EnvironmentTerm> {
    let (ka, sa) = kinetic_on_amplitude(psi, spec, NODE_THRESHOLD)?;
    let eta: Vec<Complex64> = ka
        .iter()
        .zip(&sa.values)
        .zip(psi.amplitudes())
        .map(|((k, &a), z)| if a != 0.0 { k * (z / a) } else { Complex64::new(0.0, 0.0) })
        .collect();
    let reconstruction_error = match spec {
        HamiltonianSpec::Canonical { mass, .. } => {
            let h = psi.hbar().value();
            let fourier = Fourier::new(psi.grid());
            let root: Vec<f64> = psi.amplitudes().iter().map(|z| z.norm()).collect();
            let lap = fourier.second_derivative_real(&signed_like(&root, &sa.values));
            Some(
                (0..eta.len())
                    .filter(|&i| sa.valid[i])
                    .map(|i| (2.0 * mass * eta[i].norm() / (h * h) - lap[i].abs()).abs())
                    .fold(0.0, f64::max),
            )
        }
        _ => None,
    };
    Ok(EnvironmentTerm {
        eta,
        valid: sa.valid,
        reconstruction_error,
    })
}

fn signed_like(root: &[f64], signed: &[f64]) -> Vec<f64> {
    root.iter()
        .zip(signed)
        .map(|(&r, &s)| if s < 0.0 { -r } else { r })
        .collect()
}

/// Which formula [`harmonic_vq_closed_form`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VqMode {
    /// `hbar omega (n + 1/2) - (omega/2) (Q - A cos omega t)^2`, coefficients as printed.
    Printed,
    /// Numerical potential of the displaced level-`n` state propagated to `t`.
    #[default]
    Consistent,
}

/// Quantum potential of the oscillating harmonic-LV state of level `n`,
/// displaced by `amplitude` at `t = 0`.
#[allow(clippy::too_many_arguments)]
pub fn harmonic_vq_closed_form(
    n: usize,
    a: f64,
    d: f64,
    hbar: MockPlanck,
    t: f64,
    amplitude: f64,
    grid: &Grid1D,
    mode: VqMode,
) -> Result<QuantumPotentialField> {
    let spec = HamiltonianSpec::harmonic_lv(a, d)?;
    let omega = (a * d).sqrt();
    match mode {
        VqMode::Printed => {
            let h = hbar.value();
            let centre = amplitude * (omega * t).cos();
            let values = grid
                .points()
                .iter()
                .map(|q| {
                    Complex64::new(
                        h * omega * (n as f64 + 0.5) - 0.5 * omega * (q - centre).powi(2),
                        0.0,
                    )
                })
                .collect();
            Ok(QuantumPotentialField {
                grid: grid.clone(),
                values,
                valid: vec![true; grid.len()],
                relative_amplitude: vec![1.0; grid.len()],
            })
        }
        VqMode::Consistent => {
            let psi0 = displaced_level(n, a, d, hbar, amplitude, grid)?;
            let psi = if t == 0.0 {
                psi0
            } else {
                let dt_max = super::evolve::max_stable_dt(&spec, grid, hbar)? * 0.5;
                let steps = (t.abs() / dt_max).ceil().max(1.0) as usize;
                super::evolve::split_step_evolve(&psi0, &spec, t / steps as f64, steps)?.psi
            };
            quantum_potential_general(&psi, &spec)
        }
    }
}

/// Level-`n` oscillator state of `HarmonicLv(a, d)` (mass `1/d`) shifted by `shift`.
pub fn displaced_level(
    n: usize,
    a: f64,
    d: f64,
    hbar: MockPlanck,
    shift: f64,
    grid: &Grid1D,
) -> Result<WaveFunction> {
    let omega = (a * d).sqrt();
    let m = 1.0 / d;
    let alpha = (m * omega / hbar.value()).sqrt();
    let psi = WaveFunction::from_fn(grid.clone(), hbar, |q| {
        Complex64::new(
            alpha.sqrt() * crate::spectral::hermite_function(n, alpha * (q - shift)),
            0.0,
        )
    })?;
    if psi.edge_ratio() > 1e-8 {
        return Err(Error::Truncation(format!(
            "displaced level {n} reaches the grid edge; widen the grid"
        )));
    }
    crate::wave::normalize(&psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::hermite_eigenstate;

    fn hb(x: f64) -> MockPlanck {
        MockPlanck::new(x).unwrap()
    }

    #[test]
    fn hermite_potentials() {
        let grid = Grid1D::symmetric(10.0, 256).unwrap();
        for n in 0..3 {
            let psi = hermite_eigenstate(n, 1.0, 1.0, hb(1.0), &grid).unwrap();
            let vq = quantum_potential_canonical(&psi, 1.0).unwrap();
            let err = vq
                .max_deviation(DEFAULT_TRUST, |y| {
                    Complex64::new(0.5 * ((2 * n + 1) as f64 - y * y), 0.0)
                })
                .unwrap();
            assert!(err < 1e-6, "n={n}: {err}");
        }
    }

    #[test]
    fn uniform_density_has_no_potential() {
        let grid = Grid1D::symmetric(3.0, 64).unwrap();
        let psi = WaveFunction::from_fn(grid, hb(1.0), |_| Complex64::new(0.4, 0.0)).unwrap();
        let vq = quantum_potential_canonical(&psi, 1.0).unwrap();
        assert!(vq.values.iter().all(|v| v.norm() < 1e-14));
        let eta = environment_term_eta(&psi, &HamiltonianSpec::canonical(1.0, vec![0.0; 64]).unwrap())
            .unwrap();
        assert!(eta.eta.iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn all_node_input_is_empty() {
        let grid = Grid1D::symmetric(3.0, 16).unwrap();
        let psi = WaveFunction::new(grid, vec![Complex64::new(0.0, 0.0); 16], hb(1.0)).unwrap();
        assert!(matches!(
            quantum_potential_canonical(&psi, 1.0),
            Err(Error::EmptyField)
        ));
    }

    #[test]
    fn printed_form() {
        let grid = Grid1D::symmetric(5.0, 64).unwrap();
        let omega = 1.0;
        let vq = harmonic_vq_closed_form(0, 1.0, 1.0, hb(1.0), 0.0, 0.0, &grid, VqMode::Printed)
            .unwrap();
        assert!((vq.values[32].re - 0.5 * omega).abs() < 1e-15);
        let quarter = std::f64::consts::PI / 2.0;
        let vq = harmonic_vq_closed_form(0, 1.0, 1.0, hb(1.0), quarter, 1.0, &grid, VqMode::Printed)
            .unwrap();
        let re = vq.real();
        assert!((re[32 - 5] - re[32 + 5]).abs() < 1e-12);
    }
}
