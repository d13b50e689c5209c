use std::sync::Arc;

use mockq_core::bohm::{bohm_velocity, quantum_potential_canonical};
use mockq_core::hydro::{quantum_reynolds, stress_identity_residual, HydroFields};
use mockq_core::lv::{mock_quadratic_flow, LVParams, LVState, VqMode};
use mockq_core::spectral::{discretize, eigensolve, moyal_star, MoyalOptions, PhaseSpaceGrid};
use mockq_core::stochastic::{langevin_integrate, msr_action, DiscretePath, LangevinSpec};
use mockq_core::variety::{continuum_variety, discrete_variety, variety_fisher_identity, RelationalSystem};
use mockq_core::{from_madelung, to_madelung, Grid1D, HamiltonianSpec, MockPlanck, WaveFunction};
use num_complex::Complex64;
use proptest::prelude::*;

fn hb(x: f64) -> MockPlanck {
    MockPlanck::new(x).unwrap()
}

/// Up to three Gaussian packets with momenta, well inside `[-12, 12)`.
fn packets() -> impl Strategy<Value = Vec<(f64, f64, f64, f64)>> {
    prop::collection::vec((-3.0..3.0f64, 0.8..1.6f64, -2.0..2.0f64, 0.2..1.0f64), 1..=3)
}

fn state(grid: &Grid1D, hbar: f64, p: &[(f64, f64, f64, f64)]) -> WaveFunction {
    WaveFunction::from_fn(grid.clone(), hb(hbar), |x| {
        p.iter()
            .map(|&(c, w, k, a)| {
                let u = (x - c) / w;
                a * (-0.5 * u * u).exp() * Complex64::new(0.0, k * x).exp()
            })
            .sum()
    })
    .unwrap()
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn gaussian_mixture(grid: &Grid1D, p: &[(f64, f64, f64, f64)]) -> Vec<f64> {
    grid.points()
        .iter()
        .map(|x| p.iter().map(|&(c, w, _, a)| a * (-0.5 * ((x - c) / w).powi(2)).exp()).sum())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn madelung_round_trip_up_to_global_phase(p in packets(), hbar in 0.5..2.0f64) {
        let grid = Grid1D::symmetric(12.0, 256).unwrap();
        let psi = state(&grid, hbar, &p);
        let f = to_madelung(&psi, None).unwrap();
        prop_assert!((f.total_probability() - psi.norm_sqr()).abs() < 1e-12 * psi.norm_sqr());
        let back = from_madelung(&f, psi.hbar()).unwrap();
        let overlap = back.inner(&psi);
        let phase = overlap / overlap.norm();
        let aligned: Vec<Complex64> = back.amplitudes().iter().map(|z| z * phase).collect();
        prop_assert!(max_diff(&aligned, psi.amplitudes()) < 1e-10 * psi.max_abs());
    }
}

/// Phase-rotation differences of a field derived from `psi`: within `1e-12`
/// of the field scale in the bulk (`|psi| >= max / 10`), and everywhere off
/// the node mask within the roundoff of dividing by `|psi|`, which grows like
/// `eps max|psi| / |psi|`.
fn check_gauge(psi: &WaveFunction, diff: &[f64], field: &[f64]) -> Result<(), TestCaseError> {
    let max = psi.max_abs();
    let bulk: Vec<bool> = psi.amplitudes().iter().map(|z| z.norm() >= 0.1 * max).collect();
    let scale = (0..diff.len()).filter(|&i| bulk[i]).map(|i| field[i].abs()).fold(1.0_f64, f64::max);
    for (i, z) in psi.amplitudes().iter().enumerate() {
        let r = z.norm() / max;
        if r < 1e-12 {
            continue;
        }
        let allowed = if bulk[i] { 1e-12 * scale } else { 1e3 * f64::EPSILON * scale / r };
        prop_assert!(diff[i] <= allowed, "point {i}: |psi|/max = {r:e}, diff {:e} > {allowed:e}", diff[i]);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn shifting_the_phase_is_a_global_phase(p in packets(), c in -5.0..5.0f64) {
        let grid = Grid1D::symmetric(12.0, 256).unwrap();
        let hbar = 0.8;
        let psi = state(&grid, hbar, &p);
        let mut f = to_madelung(&psi, Some(1.0)).unwrap();
        let base = from_madelung(&f, psi.hbar()).unwrap();
        f.s.iter_mut().for_each(|s| *s += c);
        let shifted = from_madelung(&f, psi.hbar()).unwrap();
        let rot = Complex64::new(0.0, c / hbar).exp();
        let expect: Vec<Complex64> = base.amplitudes().iter().map(|z| z * rot).collect();
        prop_assert!(max_diff(shifted.amplitudes(), &expect) < 1e-12 * psi.max_abs());

        let v0 = to_madelung(&psi, Some(1.0)).unwrap().v;
        let turned = psi.with_amplitudes(psi.amplitudes().iter().map(|z| z * rot).collect()).unwrap();
        let v1 = to_madelung(&turned, Some(1.0)).unwrap().v;
        check_gauge(&psi, &v0.iter().zip(&v1).map(|(a, b)| (a - b).abs()).collect::<Vec<_>>(), &v0)?;
    }

    #[test]
    fn guidance_and_quantum_potential_ignore_global_phase(p in packets(), theta in 0.0..6.28f64) {
        let grid = Grid1D::symmetric(12.0, 256).unwrap();
        let psi = state(&grid, 1.0, &p);
        let rot = Complex64::new(0.0, theta).exp();
        let turned = psi.with_amplitudes(psi.amplitudes().iter().map(|z| z * rot).collect()).unwrap();
        let (a, b) = (bohm_velocity(&psi, 1.0).unwrap(), bohm_velocity(&turned, 1.0).unwrap());
        let dv: Vec<f64> = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).collect();
        check_gauge(&psi, &dv, &a.values)?;
        let (qa, qb) = (quantum_potential_canonical(&psi, 1.0).unwrap(), quantum_potential_canonical(&turned, 1.0).unwrap());
        let dq: Vec<f64> = qa.values.iter().zip(&qb.values).map(|(x, y)| (x - y).norm()).collect();
        check_gauge(&psi, &dq, &qa.real())?;
    }

    #[test]
    fn lv_population_and_canonical_views_are_bijective(
        n1 in 1e-3..1e3f64, n2 in 1e-3..1e3f64,
        a in 0.1..5.0f64, b in 0.1..5.0f64, c in 0.1..5.0f64, d in 0.1..5.0f64,
    ) {
        let params = LVParams::new(a, b, c, d).unwrap();
        let s = LVState::new(n1, n2).unwrap();
        let (q, p) = s.to_canonical(&params);
        let back = LVState::from_canonical(q, p, &params);
        prop_assert!((back.n1 - n1).abs() <= 64.0 * f64::EPSILON * n1);
        prop_assert!((back.n2 - n2).abs() <= 64.0 * f64::EPSILON * n2);
    }

    #[test]
    fn mock_flow_keeps_its_own_invariant(
        q0 in -1.0..1.0f64, p0 in -1.0..1.0f64, a in 0.5..4.0f64, d in 0.5..4.0f64, printed in any::<bool>(),
    ) {
        let mode = if printed { VqMode::Printed } else { VqMode::Consistent };
        let flow = mock_quadratic_flow(a, d, hb(1.0), (q0, p0), 20.0, 0.05, mode).unwrap();
        let h0 = flow.invariant[0];
        // The printed coefficient can make the flow hyperbolic, so roundoff is
        // measured against the largest state reached.
        let size = flow.q.iter().zip(&flow.p).map(|(q, p)| q * q + p * p).fold(0.0, f64::max);
        let drift = flow.invariant.iter().map(|h| (h - h0).abs()).fold(0.0, f64::max);
        prop_assert!(drift < 1e-12 * size.max(1e-300) * a.max(d), "drift {drift}");
    }

    #[test]
    fn star_product_at_zero_hbar_is_pointwise(
        ca in prop::collection::vec(-2.0..2.0f64, 6), cb in prop::collection::vec(-2.0..2.0f64, 6),
    ) {
        let grid = PhaseSpaceGrid::new((-1.0, 1.0), (-1.0, 1.0), 16, 16).unwrap();
        fn poly(c: &[f64], q: f64, p: f64) -> f64 {
            c[0] + c[1] * q + c[2] * p + c[3] * q * q * p + c[4] * q.powi(3) + c[5] * p.powi(4)
        }
        let a = grid.sample_real(|q, p| poly(&ca, q, p));
        let b = grid.sample_real(|q, p| poly(&cb, q, p));
        let star = moyal_star(&a, &b, 0.0, MoyalOptions::default()).unwrap();
        let product = a.mul(&b);
        prop_assert_eq!(star.values, product.values);
    }

    #[test]
    fn msr_action_is_linear_plus_quadratic_in_the_response_field(
        seed in any::<u64>(), alpha in -3.0..3.0f64, lambda in 0.5..2.0f64, k in 0.1..2.0f64,
    ) {
        let spec = LangevinSpec::new(lambda, k, Arc::new(|x: f64| -x - 0.3 * x.powi(3)), seed).unwrap();
        let path = langevin_integrate(&spec, 0.2, 0.01, 200).unwrap();
        let tilde: Vec<f64> = (0..path.phi.len()).map(|j| ((j * 7919 + 13) % 101) as f64 / 50.0 - 1.0).collect();
        let action = |s: f64| {
            let t = tilde.iter().map(|x| s * x).collect();
            msr_action(&DiscretePath::new(path.dt, path.phi.clone(), Some(t)).unwrap(), &spec).unwrap()
        };
        // J(s) = s J1 + s^2 J2, fixed from s = 1 and s = -1.
        let (jp, jm) = (action(1.0), action(-1.0));
        let (j1, j2) = (0.5 * (jp - jm), 0.5 * (jp + jm));
        let got = action(alpha);
        let want = alpha * j1 + alpha * alpha * j2;
        prop_assert!((got - want).abs() <= 1e-10 * (j1.abs() + j2.abs()).max(1.0) * (1.0 + alpha * alpha));
        prop_assert_eq!(action(0.0), 0.0);
    }

    #[test]
    fn langevin_paths_are_seed_deterministic(seed in any::<u64>()) {
        let run = || {
            let spec = LangevinSpec::new(1.0, 0.7, Arc::new(|x: f64| -x), seed).unwrap();
            langevin_integrate(&spec, 0.0, 0.01, 500).unwrap()
        };
        let (a, b) = (run(), run());
        prop_assert!(a.phi.iter().zip(&b.phi).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn reynolds_ignores_density_scale_and_goes_as_inverse_hbar_squared(
        p in packets(), c in 0.01..100.0f64, hbar in 0.3..3.0f64,
    ) {
        let grid = Grid1D::symmetric(12.0, 256).unwrap();
        let rho = gaussian_mixture(&grid, &p);
        let v: Vec<f64> = grid.points().iter().map(|x| (0.3 * x).sin()).collect();
        let re = |rho: Vec<f64>, h: f64| quantum_reynolds(&HydroFields::new(grid.clone(), rho, v.clone(), 1.0, hb(h)).unwrap()).value;
        let base = re(rho.clone(), 1.0);
        // Powers of four keep sqrt exact and commute with every other rounding,
        // so these agree bit for bit.
        let pow4 = (c.log2() / 2.0).round().mul_add(2.0, 0.0).exp2();
        prop_assert_eq!(re(rho.iter().map(|r| pow4 * r).collect(), 1.0).to_bits(), base.to_bits());
        // Otherwise only roundoff differs, amplified by 1/rho near the trust
        // floor: eps (k_max l)^3 / 1e-5 is about 4e-7 on this grid.
        let scaled = re(rho.iter().map(|r| c * r).collect(), 1.0);
        prop_assert!((scaled - base).abs() <= 1e-6 * base, "{base} vs {scaled}");
        let with_h = re(rho, hbar);
        prop_assert!((with_h * hbar * hbar - base).abs() <= 1e-6 * base, "{base} vs {} at hbar {hbar}", with_h * hbar * hbar);
    }

    #[test]
    fn stress_identity_on_smooth_densities(p in packets()) {
        // sqrt of two separated packets has branch points about pi w^2 / |dc|
        // off the real axis (0.33 here at worst), so spectral accuracy needs
        // k_max near 80; much finer and the 1/rho roundoff floor takes over.
        let grid = Grid1D::symmetric(20.0, 1024).unwrap();
        let rho = gaussian_mixture(&grid, &p);
        let r = stress_identity_residual(&rho, &grid, 1.0, hb(1.0)).unwrap();
        prop_assert!(r < 1e-6, "{r:e}");
    }

    #[test]
    fn variety_ignores_rigid_motions(
        views in prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 2), 2..40),
        angle in 0.0..6.28f64, shift in prop::collection::vec(-10.0..10.0f64, 2),
    ) {
        let base = discrete_variety(&RelationalSystem::new(views.clone()).unwrap());
        let (s, c) = angle.sin_cos();
        let moved: Vec<Vec<f64>> = views
            .iter()
            .map(|v| vec![c * v[0] - s * v[1] + shift[0], s * v[0] + c * v[1] + shift[1]])
            .collect();
        let after = discrete_variety(&RelationalSystem::new(moved).unwrap());
        prop_assert!((after - base).abs() <= 1e-12 * base.max(1.0));
        let mut reordered = views.clone();
        reordered.reverse();
        let permuted = discrete_variety(&RelationalSystem::new(reordered).unwrap());
        prop_assert!((permuted - base).abs() <= 1e-13 * base.max(1.0));
    }

    #[test]
    fn fisher_information_scales_inversely_with_width_squared(p in packets()) {
        let grid = Grid1D::symmetric(40.0, 1024).unwrap();
        let rho = gaussian_mixture(&grid, &p);
        let wide: Vec<f64> = grid
            .points()
            .iter()
            .map(|x| 0.5 * p.iter().map(|&(c, w, _, a)| a * (-0.5 * ((x / 2.0 - c) / w).powi(2)).exp()).sum::<f64>())
            .collect();
        let (f1, f2) = (continuum_variety(&rho, &grid).unwrap().value, continuum_variety(&wide, &grid).unwrap().value);
        prop_assert!((f2 - f1 / 4.0).abs() < 1e-6 * f1.max(1.0), "{f1} {f2}");
        let id = variety_fisher_identity(&rho, &grid, 1.0, hb(1.0)).unwrap();
        prop_assert!(id.applicable && id.residual < 1e-8, "{:?}", id);
    }
}

#[test]
fn harmonic_lv_levels_and_orthogonality() {
    let (a, d, h): (f64, f64, f64) = (1.3, 0.7, 1.0);
    let w = (h * (d / a).sqrt()).sqrt();
    let grid = Grid1D::symmetric(12.0 * w, 512).unwrap();
    let op = discretize(&HamiltonianSpec::harmonic_lv(a, d).unwrap(), &grid, hb(h)).unwrap();
    let s = eigensolve(&op, 9).unwrap();
    for (n, e) in s.eigenvalues.iter().enumerate() {
        let exact = a + d + h * (a * d).sqrt() * (n as f64 + 0.5);
        assert!((e.re - exact).abs() < 1e-5, "n={n}: {} vs {exact}", e.re);
    }
    for i in 0..s.len() {
        for j in 0..i {
            let o = s.eigenvectors[i].inner(&s.eigenvectors[j]).norm();
            assert!(o < 1e-8, "<{i}|{j}> = {o}");
        }
    }
}
