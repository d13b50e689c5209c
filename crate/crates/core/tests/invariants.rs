use std::f64::consts::PI;

use mockq_core::bohm::{max_stable_dt, quantum_potential_general, split_step_evolve};
use mockq_core::hydro::{fractional_brownian_motion, structure_scaling};
use mockq_core::lv::{fit_frequency, lv_integrate, LVParams, LVState};
use mockq_core::spectral::{discretize, eigensolve, hermite_eigenstate, imaginary_time_ground_energy};
use mockq_core::stochastic::{born_ergodicity, ErgodicityOptions};
use mockq_core::{Grid1D, HamiltonianSpec, MockPlanck};

fn hb(x: f64) -> MockPlanck {
    MockPlanck::new(x).unwrap()
}

#[test]
fn imaginary_time_matches_the_dense_ground_level() {
    let grid = Grid1D::symmetric(8.0, 128).unwrap();
    let h = hb(1.0);
    let specs = [
        HamiltonianSpec::canonical_fn(1.0, &grid, |x| 0.5 * x * x + 0.1 * x.powi(4)).unwrap(),
        HamiltonianSpec::harmonic_lv(1.5, 0.6).unwrap(),
        HamiltonianSpec::full_lv(1.0, 1.0).unwrap(),
    ];
    for spec in &specs {
        let dense = eigensolve(&discretize(spec, &grid, h).unwrap(), 1).unwrap();
        let e0 = dense.eigenvalues[0];
        assert!(e0.im.abs() < 1e-10);
        let it = imaginary_time_ground_energy(spec, &grid, h, 40.0, 4000, 5).unwrap();
        assert!((it.energy - e0.re).abs() < 1e-4, "{spec:?}: {} vs {}", it.energy, e0.re);
    }
}

#[test]
fn split_step_keeps_the_norm() {
    let (a, d) = (1.0, 2.0);
    let grid = Grid1D::symmetric(10.0, 256).unwrap();
    let spec = HamiltonianSpec::harmonic_lv(a, d).unwrap();
    let h = hb(1.0);
    let psi0 = hermite_eigenstate(2, 1.0 / d, (a * d).sqrt(), h, &grid).unwrap();
    let shifted = psi0
        .with_amplitudes(
            psi0.amplitudes().iter().zip(grid.points()).map(|(z, x)| z * num_complex::Complex64::new(0.0, 0.7 * x).exp()).collect(),
        )
        .unwrap();
    let dt = 0.5 * max_stable_dt(&spec, &grid, h).unwrap();
    let ev = split_step_evolve(&shifted, &spec, dt, 3000).unwrap();
    assert!(ev.norm_drift < 3e-10, "{}", ev.norm_drift);
    assert!(!ev.non_unitary);
}

#[test]
fn masked_intervals_follow_the_nodes() {
    let (a, d) = (1.0, 1.0);
    let grid = Grid1D::symmetric(9.0, 256).unwrap();
    let spec = HamiltonianSpec::harmonic_lv(a, d).unwrap();
    for n in 0..=6 {
        let psi = hermite_eigenstate(n, 1.0 / d, (a * d).sqrt(), hb(1.0), &grid).unwrap();
        let field = quantum_potential_general(&psi, &spec).unwrap();
        let re: Vec<f64> = psi.amplitudes().iter().map(|z| z.re).collect();
        let max = re.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        // Sign changes of the bulk, ignoring the underflowing tails.
        let bulk: Vec<f64> = re.into_iter().filter(|x| x.abs() > 1e-8 * max).collect();
        let changes = bulk.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
        assert_eq!(changes, n);
        assert_eq!(field.pole_regions().len(), changes, "level {n}");
    }
}

#[test]
fn classical_lv_conserves_its_hamiltonian_for_a_hundred_periods() {
    let params = LVParams::new(1.2, 0.8, 0.5, 0.9).unwrap();
    let dt = 1e-3 * (1.0 / 1.2_f64).min(1.0 / 0.9);
    let t_end = 100.0 * 2.0 * PI / params.omega();
    let tr = lv_integrate(&params, LVState::new(2.5, 1.0).unwrap(), t_end, dt).unwrap();
    assert!(tr.hamiltonian_drift(&params) < 1e-8, "{}", tr.hamiltonian_drift(&params));
}

#[test]
fn small_oscillations_run_at_root_ad() {
    let (a, b, c, d) = (2.0, 1.0, 1.5, 0.5);
    let params = LVParams::new(a, b, c, d).unwrap();
    let (q1, q2) = params.fixed_point();
    let tr = lv_integrate(&params, LVState::new(q1 * (1.0 + 1e-3), q2).unwrap(), 40.0 * PI / params.omega(), 1e-3).unwrap();
    let w = fit_frequency(&tr.t, &tr.n1).unwrap();
    let exact = (a * d).sqrt();
    assert!((w - exact).abs() < 1e-3 * exact, "{w} vs {exact}");
}

#[test]
fn structure_exponent_is_unbiased_within_its_error() {
    let hurst = 1.0 / 3.0;
    let fits: Vec<_> = (0..50)
        .map(|s| structure_scaling(&fractional_brownian_motion(1 << 14, hurst, 1000 + s).unwrap(), 1.0).unwrap())
        .collect();
    let mean = fits.iter().map(|f| f.exponent).sum::<f64>() / 50.0;
    let stderr = fits.iter().map(|f| f.stderr).sum::<f64>() / 50.0;
    assert!((mean - 2.0 * hurst).abs() < stderr, "mean {mean}, stderr {stderr}");
}

#[test]
fn longer_runs_sit_closer_to_the_born_law() {
    let grid = Grid1D::symmetric(8.0, 128).unwrap();
    let psi = hermite_eigenstate(1, 1.0, 1.0, hb(1.0), &grid).unwrap();
    let ks: Vec<f64> = [2_000, 20_000, 200_000]
        .iter()
        .map(|&steps| {
            let opts = ErgodicityOptions { dt: 1e-3, steps, burn_in: 1000, chains: 4, seed: 17 };
            born_ergodicity(&psi, 1.0, opts).unwrap().ks
        })
        .collect();
    assert!(ks[0] > ks[1] && ks[1] > ks[2], "{ks:?}");
}
