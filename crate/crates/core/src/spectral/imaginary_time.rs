use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fourier::Fourier;
use crate::grid::{Grid1D, MockPlanck};
use crate::hamiltonian::HamiltonianSpec;

#[derive(Debug, Clone)]
pub struct GroundEnergy {
    /// Richardson-extrapolated ground energy.
    pub energy: f64,
    /// Estimates at step `beta/steps` and half of it.
    pub coarse: f64,
    pub fine: f64,
    /// Estimate of the first excited level from a deflated second vector.
    pub first_excited: f64,
    /// `exp(-beta (E1 - E0))`.
    pub contamination: f64,
    /// Set when `contamination >= 1e-6`: beta is too short for the gap.
    pub slow_convergence: bool,
}

/// Ground energy from imaginary-time propagation of a random start.
///
/// Two vectors are propagated with a Strang-split `exp(-tau H)`; the second is
/// kept orthogonal to the first, so it tracks the first excited level and
/// gives the post hoc convergence check. The energy is the Rayleigh quotient
/// of the one-step propagator, extrapolated in the step size.
pub fn imaginary_time_ground_energy(
    spec: &HamiltonianSpec,
    grid: &Grid1D,
    hbar: MockPlanck,
    beta: f64,
    steps: usize,
    seed: u64,
) -> Result<GroundEnergy> {
    if !spec.bounded_below() {
        return Err(Error::Domain(
            "imaginary-time propagation needs a Hamiltonian bounded below".into(),
        ));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::param("beta", format!("must be > 0, got {beta}")));
    }
    if steps < 2 {
        return Err(Error::param("steps", "need at least 2 steps"));
    }
    let kinetic = spec.kinetic_multiplier(grid, hbar)?;
    let potential = spec.potential(grid)?;
    let fourier = Fourier::new(grid);
    let coarse = run(&fourier, &kinetic, &potential, beta, steps, seed, grid.spacing());
    let fine = run(&fourier, &kinetic, &potential, beta, 2 * steps, seed, grid.spacing());
    let energy = (4.0 * fine.0 - coarse.0) / 3.0;
    let first_excited = (4.0 * fine.1 - coarse.1) / 3.0;
    let contamination = (-beta * (first_excited - energy)).exp();
    Ok(GroundEnergy {
        energy,
        coarse: coarse.0,
        fine: fine.0,
        first_excited,
        contamination,
        slow_convergence: contamination >= 1e-6,
    })
}

#[allow(clippy::too_many_arguments)]
fn run(
    fourier: &Fourier,
    kinetic: &[Complex64],
    potential: &[f64],
    beta: f64,
    steps: usize,
    seed: u64,
    spacing: f64,
) -> (f64, f64) {
    let n = potential.len();
    let tau = beta / steps as f64;
    let vmin = potential.iter().copied().fold(f64::INFINITY, f64::min);
    let kmin = kinetic.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    // Shift so every factor is at most one.
    let half_v: Vec<f64> = potential
        .iter()
        .map(|v| (-0.5 * tau * (v - vmin)).exp())
        .collect();
    let kin: Vec<Complex64> = kinetic
        .iter()
        .map(|k| Complex64::new((-tau * (k.re - kmin)).exp(), 0.0))
        .collect();
    let step = |psi: &[Complex64]| -> Vec<Complex64> {
        let a: Vec<Complex64> = psi.iter().zip(&half_v).map(|(z, f)| z * f).collect();
        let b = fourier.apply_table(&a, &kin);
        b.iter().zip(&half_v).map(|(z, f)| z * f).collect()
    };
    let inner = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>() * spacing
    };
    let normalize = |v: &mut Vec<Complex64>| {
        let nrm = inner(v, v).re.sqrt();
        for z in v.iter_mut() {
            *z /= nrm;
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> Vec<Complex64> {
        (0..n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect()
    };
    let mut u = draw();
    let mut w = draw();
    normalize(&mut u);
    let orth = |w: &mut Vec<Complex64>, u: &[Complex64]| {
        let c = inner(u, w);
        for (x, y) in w.iter_mut().zip(u) {
            *x -= c * y;
        }
    };
    orth(&mut w, &u);
    normalize(&mut w);

    let mut e0 = 0.0;
    let mut e1 = 0.0;
    for _ in 0..steps {
        let mut u2 = step(&u);
        let mut w2 = step(&w);
        e0 = rayleigh(inner(&u, &u2).re, tau) + vmin + kmin;
        e1 = rayleigh(inner(&w, &w2).re, tau) + vmin + kmin;
        normalize(&mut u2);
        orth(&mut w2, &u2);
        normalize(&mut w2);
        u = u2;
        w = w2;
    }
    (e0, e1)
}

fn rayleigh(overlap: f64, tau: f64) -> f64 {
    -overlap.ln() / tau
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hb(x: f64) -> MockPlanck {
        MockPlanck::new(x).unwrap()
    }

    #[test]
    fn harmonic_lv_ground_energy() {
        let spec = HamiltonianSpec::harmonic_lv(1.0, 1.0).unwrap();
        let grid = Grid1D::symmetric(10.0, 128).unwrap();
        let r = imaginary_time_ground_energy(&spec, &grid, hb(1.0), 20.0, 1000, 1).unwrap();
        assert!((r.energy - 2.5).abs() < 1e-4, "{r:?}");
        assert!(!r.slow_convergence);
        assert!((r.first_excited - 3.5).abs() < 1e-3);
    }

    #[test]
    fn free_particle_zero_mode() {
        let grid = Grid1D::symmetric(5.0, 64).unwrap();
        let spec = HamiltonianSpec::canonical(1.0, vec![0.0; 64]).unwrap();
        let r = imaginary_time_ground_energy(&spec, &grid, hb(1.0), 200.0, 400, 3).unwrap();
        assert!(r.energy.abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn short_beta_is_flagged() {
        let spec = HamiltonianSpec::harmonic_lv(1.0, 1.0).unwrap();
        let grid = Grid1D::symmetric(10.0, 128).unwrap();
        let r = imaginary_time_ground_energy(&spec, &grid, hb(1.0), 2.0, 200, 1).unwrap();
        assert!(r.slow_convergence);
    }

    #[test]
    fn unbounded_operator_rejected() {
        let spec = HamiltonianSpec::full_lv(1.0, -1.0).unwrap();
        let grid = Grid1D::symmetric(6.0, 64).unwrap();
        assert!(imaginary_time_ground_energy(&spec, &grid, hb(0.1), 1.0, 10, 0).is_err());
    }
}
