use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::Fourier;
use crate::grid::{Grid1D, MockPlanck};
use crate::hamiltonian::HamiltonianSpec;
use crate::wave::WaveFunction;

#[derive(Debug, Clone)]
pub struct Evolution {
    pub psi: WaveFunction,
    /// `| ||psi_T||^2 - ||psi_0||^2 | / ||psi_0||^2`.
    pub norm_drift: f64,
    /// Set when the drift exceeds `1e-10` per thousand steps.
    pub non_unitary: bool,
}

/// Spread of the potential plus spread of the kinetic symbol. Constant
/// offsets only contribute a global phase, so ranges rather than maxima.
pub fn energy_range(spec: &HamiltonianSpec, grid: &Grid1D, hbar: MockPlanck) -> Result<f64> {
    let v = spec.potential(grid)?;
    let k = spec.kinetic_multiplier(grid, hbar)?;
    let span = |it: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
        hi - lo
    };
    let kr = span(&mut k.iter().map(|z| z.re));
    let ki = k.iter().fold(0.0_f64, |m, z| m.max(z.im.abs()));
    Ok(span(&mut v.iter().copied()) + kr + ki)
}

/// Largest step satisfying `dt * E_range / hbar < 0.5`.
pub fn max_stable_dt(spec: &HamiltonianSpec, grid: &Grid1D, hbar: MockPlanck) -> Result<f64> {
    let e = energy_range(spec, grid, hbar)?;
    Ok(if e > 0.0 { 0.5 * hbar.value() / e } else { f64::INFINITY })
}

/// Precomputed Strang factors for a fixed step.
pub struct Propagator {
    fourier: Fourier,
    half_v: Vec<Complex64>,
    kinetic: Vec<Complex64>,
}

impl Propagator {
    pub fn new(spec: &HamiltonianSpec, grid: &Grid1D, hbar: MockPlanck, dt: f64) -> Result<Self> {
        if !dt.is_finite() || dt == 0.0 {
            return Err(Error::param("dt", format!("must be finite and nonzero, got {dt}")));
        }
        let limit = max_stable_dt(spec, grid, hbar)?;
        if dt.abs() >= limit {
            return Err(Error::param(
                "dt",
                format!("|dt| = {dt:e} violates dt*E_range/hbar < 0.5 (limit {limit:e})"),
            ));
        }
        let h = hbar.value();
        let v = spec.potential(grid)?;
        let k = spec.kinetic_multiplier(grid, hbar)?;
        let i = Complex64::new(0.0, 1.0);
        Ok(Self {
            fourier: Fourier::new(grid),
            half_v: v.iter().map(|&v| (-i * 0.5 * dt * v / h).exp()).collect(),
            kinetic: k.iter().map(|&k| (-i * dt * k / h).exp()).collect(),
        })
    }

    pub fn step(&self, psi: &mut Vec<Complex64>) {
        for (z, f) in psi.iter_mut().zip(&self.half_v) {
            *z *= f;
        }
        let mut out = self.fourier.apply_table(psi, &self.kinetic);
        for (z, f) in out.iter_mut().zip(&self.half_v) {
            *z *= f;
        }
        *psi = out;
    }
}

/// Strang-split propagation: half potential phase, full kinetic phase in
/// Fourier space, half potential phase.
pub fn split_step_evolve(
    psi: &WaveFunction,
    spec: &HamiltonianSpec,
    dt: f64,
    steps: usize,
) -> Result<Evolution> {
    let prop = Propagator::new(spec, psi.grid(), psi.hbar(), dt)?;
    let n0 = psi.norm_sqr();
    let mut amps = psi.amplitudes().to_vec();
    for _ in 0..steps {
        prop.step(&mut amps);
    }
    let out = psi.with_amplitudes(amps)?;
    let drift = (out.norm_sqr() - n0).abs() / n0;
    let allowed = 1e-10 * (steps as f64 / 1000.0).max(1.0);
    Ok(Evolution {
        psi: out,
        norm_drift: drift,
        non_unitary: drift > allowed,
    })
}

/// States at `t = k * stride * dt` for `k = 0..=steps/stride`.
pub fn evolve_snapshots(
    psi: &WaveFunction,
    spec: &HamiltonianSpec,
    dt: f64,
    steps: usize,
    stride: usize,
) -> Result<Vec<WaveFunction>> {
    if stride == 0 {
        return Err(Error::param("stride", "must be >= 1"));
    }
    let prop = Propagator::new(spec, psi.grid(), psi.hbar(), dt)?;
    let mut amps = psi.amplitudes().to_vec();
    let mut out = Vec::with_capacity(steps / stride + 1);
    out.push(psi.clone());
    for s in 1..=steps {
        prop.step(&mut amps);
        if s % stride == 0 {
            out.push(psi.with_amplitudes(amps.clone())?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::hermite_eigenstate;

    fn hb(x: f64) -> MockPlanck {
        MockPlanck::new(x).unwrap()
    }

    #[test]
    fn eigenstate_picks_up_phase_only() {
        let grid = Grid1D::symmetric(10.0, 128).unwrap();
        let spec = HamiltonianSpec::harmonic_lv(1.0, 1.0).unwrap();
        let psi = hermite_eigenstate(1, 1.0, 1.0, hb(1.0), &grid).unwrap();
        let period = 2.0 * std::f64::consts::PI;
        let steps = 20000;
        let out = split_step_evolve(&psi, &spec, period / steps as f64, steps).unwrap();
        let e = 2.0 + 1.5;
        let phase = Complex64::from_polar(1.0, -e * period);
        let err = out
            .psi
            .amplitudes()
            .iter()
            .zip(psi.amplitudes())
            .map(|(a, b)| (a - phase * b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
        assert!(!out.non_unitary);
    }

    #[test]
    fn step_bound_is_enforced() {
        let grid = Grid1D::symmetric(10.0, 128).unwrap();
        let spec = HamiltonianSpec::harmonic_lv(1.0, 1.0).unwrap();
        let psi = hermite_eigenstate(0, 1.0, 1.0, hb(1.0), &grid).unwrap();
        assert!(split_step_evolve(&psi, &spec, 0.1, 1).is_err());
    }
}
