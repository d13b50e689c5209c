//! Subcommand tables and their runs.

use std::f64::consts::PI;
use std::fmt;
use std::io;
use std::path::Path;
use std::sync::Arc;

use mockq_core::bohm::{
    displaced_level, evolve_snapshots, max_stable_dt, propagate_trajectories, quantum_potential_general,
    SnapshotSeries, TrajectoryEnsemble,
};
use mockq_core::hydro::{
    continuity_residual, euler_residual, fractional_brownian_motion, quantum_reynolds,
    stress_identity_residual_wavefunction, structure_scaling, HydroFields,
};
use mockq_core::io::{csv_text, fmt_f64, madelung_csv, wavefunction_csv};
use mockq_core::lv::{
    full_lv_vq_constants, lv_hamiltonian, lv_integrate, mock_quadratic_flow, verify_vq_constants, FullLVVacuum,
    LVParams, LVState, VqMode,
};
use mockq_core::spectral::{discretize, eigensolve, hermite_eigenstate};
use mockq_core::stats::{ks_statistic, GridCdf};
use mockq_core::stochastic::{
    born_ergodicity, drift_classical, langevin_integrate, msr_action, ou_stationary_variance, DiscretePath, Drift,
    ErgodicityOptions, LangevinSpec,
};
use mockq_core::variety::{continuum_variety, discrete_variety, variety_fisher_identity, RelationalSystem};
use mockq_core::{to_madelung, Error, Grid1D, HamiltonianSpec, MockPlanck, WaveFunction};
use num_complex::Complex64;

use crate::manifest::RunDir;
use crate::params::{choice, flag, int, path, real, Check, Param, Params};

#[derive(Debug)]
pub enum CmdError {
    Core(Error),
    NotFound(String),
    Io(String),
    Input(String),
}

impl CmdError {
    pub fn code(&self) -> &'static str {
        match self {
            CmdError::Core(e) => e.code(),
            CmdError::NotFound(_) => "io_not_found",
            CmdError::Io(_) => "io_error",
            CmdError::Input(_) => "invalid_input",
        }
    }
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Core(e) => write!(f, "{e}"),
            CmdError::NotFound(p) | CmdError::Io(p) | CmdError::Input(p) => f.write_str(p),
        }
    }
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        CmdError::Core(e)
    }
}

impl From<io::Error> for CmdError {
    fn from(e: io::Error) -> Self {
        CmdError::Io(e.to_string())
    }
}

type Run = fn(&Params, u64, &mut RunDir) -> Result<(), CmdError>;

pub struct Spec {
    /// Space-separated path, e.g. `lv classical`.
    pub name: &'static str,
    pub about: &'static str,
    pub table: &'static [Param],
    pub run: Run,
}

const HARMONIC: [Param; 3] = [
    real("a", "1", Check::Positive, "prey growth rate a"),
    real("d", "1", Check::Positive, "predator death rate d"),
    real("hbar", "1", Check::Positive, "mock Planck constant"),
];

macro_rules! table {
    ($($p:expr),* $(,)?) => { &[$($p),*] };
}

pub const COMMANDS: &[Spec] = &[
    Spec {
        name: "spectrum",
        about: "Lowest eigenpairs of a discretized Hamiltonian",
        table: table![
            choice("spec", &["harmonic-lv", "anharmonic", "full-lv"], "harmonic-lv", "Hamiltonian family"),
            HARMONIC[0], HARMONIC[1], HARMONIC[2],
            real("mass", "1", Check::Positive, "mass (anharmonic)"),
            real("omega", "1", Check::Positive, "frequency (anharmonic)"),
            real("quartic", "0.1", Check::NonNegative, "x^4 coefficient (anharmonic)"),
            int("levels", "5", Check::AtLeast(1), "number of eigenpairs"),
            int("points", "256", Check::AtLeast(8), "grid points (power of two)"),
            real("half_width", "0", Check::NonNegative, "grid half width, 0 for automatic"),
            flag("states", "also write psi_<n>.csv per level"),
        ],
        run: run_spectrum,
    },
    Spec {
        name: "evolve",
        about: "Split-step propagation of a displaced harmonic-LV level",
        table: table![
            HARMONIC[0], HARMONIC[1], HARMONIC[2],
            int("level", "0", Check::NonNegative, "oscillator level of the initial state"),
            real("shift", "2", Check::Any, "initial displacement"),
            int("points", "256", Check::AtLeast(8), "grid points (power of two)"),
            real("half_width", "0", Check::NonNegative, "grid half width, 0 for automatic"),
            real("t_end", "6.283185307179586", Check::NonNegative, "final time"),
            real("dt", "0", Check::NonNegative, "time step, 0 for half the stability bound"),
            int("snapshots", "16", Check::AtLeast(1), "observable samples"),
        ],
        run: run_evolve,
    },
    Spec {
        name: "bohm",
        about: "Bohmian walkers for (psi_0 + psi_1)/sqrt(2) with KS checks against |psi_t|^2",
        table: table![
            HARMONIC[0], HARMONIC[1], HARMONIC[2],
            int("walkers", "10000", Check::AtLeast(1), "ensemble size"),
            real("periods", "2", Check::Positive, "propagation time in periods"),
            int("checkpoints", "8", Check::AtLeast(1), "KS checkpoints"),
            int("points", "128", Check::AtLeast(8), "grid points (power of two)"),
            real("half_width", "0", Check::NonNegative, "grid half width, 0 for automatic"),
        ],
        run: run_bohm,
    },
    Spec {
        name: "lv classical",
        about: "RK4 Lotka-Volterra trajectory",
        table: table![
            real("a", "1", Check::Positive, "prey growth rate"),
            real("b", "1", Check::Positive, "predation rate"),
            real("c", "1", Check::Positive, "conversion rate"),
            real("d", "1", Check::Positive, "predator death rate"),
            real("n1", "1.5", Check::Positive, "initial prey"),
            real("n2", "1", Check::Positive, "initial predators"),
            real("t_end", "50", Check::NonNegative, "final time"),
            real("dt", "0.001", Check::Positive, "time step"),
            int("stride", "10", Check::AtLeast(1), "output every stride steps"),
        ],
        run: run_lv_classical,
    },
    Spec {
        name: "lv mock",
        about: "Linear flow with the quantum-potential force added",
        table: table![
            HARMONIC[0], HARMONIC[1], HARMONIC[2],
            real("b", "1", Check::Positive, "predation rate, for N1/N2 output"),
            real("c", "1", Check::Positive, "conversion rate, for N1/N2 output"),
            real("q0", "0.3", Check::Any, "initial Q"),
            real("p0", "-0.2", Check::Any, "initial P"),
            real("t_end", "20", Check::NonNegative, "final time"),
            real("dt", "0.01", Check::Positive, "sampling step"),
            choice("mode", &["consistent", "printed"], "consistent", "force coefficient"),
        ],
        run: run_lv_mock,
    },
    Spec {
        name: "lv vacuum",
        about: "Exact full-LV vacuum branches on d = -a",
        table: table![
            real("a", "1", Check::Positive, "rate a (d = -a)"),
            HARMONIC[2],
            int("n_min", "-5", Check::Any, "lowest branch"),
            int("n_max", "5", Check::Any, "highest branch"),
            int("check_points", "201", Check::AtLeast(8), "samples for the numeric constant check"),
        ],
        run: run_lv_vacuum,
    },
    Spec {
        name: "langevin",
        about: "Euler-Maruyama Langevin path",
        table: LANGEVIN,
        run: run_langevin,
    },
    Spec {
        name: "msr",
        about: "Langevin path, its saddle-point response field and the MSR action",
        table: LANGEVIN,
        run: run_msr,
    },
    Spec {
        name: "ergodicity",
        about: "Time occupation of the osmotic diffusion against |psi|^2",
        table: table![
            HARMONIC[0], HARMONIC[1], HARMONIC[2],
            int("level", "0", Check::NonNegative, "state that drives the diffusion"),
            int("target_level", "-1", Check::AtLeast(-1), "state to compare against, -1 for the same"),
            int("points", "128", Check::AtLeast(8), "grid points (power of two)"),
            real("half_width", "0", Check::NonNegative, "grid half width, 0 for automatic"),
            real("dt", "0.001", Check::Positive, "time step"),
            int("steps", "1000000", Check::AtLeast(1), "steps per chain after burn-in"),
            int("burn_in", "10000", Check::NonNegative, "discarded steps per chain"),
            int("chains", "16", Check::AtLeast(1), "independent chains"),
        ],
        run: run_ergodicity,
    },
    Spec {
        name: "hydro residual",
        about: "Euler and continuity residuals of a coherent state",
        table: table![
            HARMONIC[0], HARMONIC[1], HARMONIC[2],
            real("shift", "2", Check::Any, "initial displacement"),
            int("points", "256", Check::AtLeast(8), "grid points (power of two)"),
            real("half_width", "12", Check::Positive, "grid half width"),
            real("tau", "0.02", Check::Positive, "snapshot spacing"),
            real("t0", "0.5", Check::Any, "evaluation time"),
        ],
        run: run_hydro_residual,
    },
    Spec {
        name: "hydro scaling",
        about: "Second-order structure function and its exponent",
        table: table![
            path("input", "CSV with a header row; omit for a synthetic fBm field"),
            Param { name: "column", kind: crate::params::Kind::Path, default: Some("value"), check: Check::Any, help: "column to read" },
            real("spacing", "1", Check::Positive, "sample spacing"),
            real("hurst", "0.3333333333333333", Check::Positive, "Hurst exponent of the synthetic field"),
            int("length", "65536", Check::AtLeast(1024), "synthetic field length"),
        ],
        run: run_hydro_scaling,
    },
    Spec {
        name: "variety",
        about: "Discrete variety of views, or continuum variety of a density",
        table: table![
            path("input", "views CSV (element_id,v1,...) or density CSV (x,rho)"),
            real("mass", "1", Check::Positive, "mass for the Fisher identity"),
            HARMONIC[2],
        ],
        run: run_variety,
    },
];

const LANGEVIN: &[Param] = &[
    choice("drift", &["ou", "double-well", "lv"], "ou", "force F = -dH/dphi"),
    real("lambda", "1", Check::Positive, "relaxation rate"),
    real("k", "1", Check::NonNegative, "noise strength"),
    real("kappa", "1", Check::Positive, "OU stiffness"),
    real("a", "1", Check::Positive, "LV rate for drift = lv"),
    real("phi0", "0", Check::Any, "initial value"),
    real("dt", "0.01", Check::Positive, "time step"),
    int("steps", "10000", Check::AtLeast(1), "steps"),
];

fn hb(p: &Params) -> Result<MockPlanck, CmdError> {
    Ok(MockPlanck::new(p.real("hbar"))?)
}

/// Half width from the flag, or `widths` oscillator widths when it is 0.
fn oscillator_grid(p: &Params, widths: f64, extra: f64) -> Result<Grid1D, CmdError> {
    let w = (p.real("hbar") * (p.real("d") / p.real("a")).sqrt()).sqrt();
    let half = match p.real("half_width") {
        h if h > 0.0 => h,
        _ => widths * w + extra,
    };
    Ok(Grid1D::symmetric(half, p.usize("points"))?)
}

fn row(cells: &[f64]) -> Vec<String> {
    cells.iter().map(|&x| fmt_f64(x)).collect()
}

fn summary(run: &mut RunDir, items: &[(&str, f64)]) -> Result<(), CmdError> {
    let rows = items.iter().map(|(k, v)| vec![k.to_string(), fmt_f64(*v)]);
    run.write("summary.csv", &csv_text(&["quantity", "value"], rows))?;
    Ok(())
}

fn run_spectrum(p: &Params, _seed: u64, run: &mut RunDir) -> Result<(), CmdError> {
    let h = hb(p)?;
    let (spec, grid) = match p.text("spec").unwrap_or("harmonic-lv") {
        "harmonic-lv" => (HamiltonianSpec::harmonic_lv(p.real("a"), p.real("d"))?, oscillator_grid(p, 12.0, 0.0)?),
        "anharmonic" => {
            let (m, w, g) = (p.real("mass"), p.real("omega"), p.real("quartic"));
            let half = match p.real("half_width") {
                x if x > 0.0 => x,
                _ => 12.0 * (h.value() / (m * w)).sqrt(),
            };
            let grid = Grid1D::symmetric(half, p.usize("points"))?;
            let spec = HamiltonianSpec::canonical_fn(m, &grid, |x| 0.5 * m * w * w * x * x + g * x.powi(4))?;
            (spec, grid)
        }
        _ => {
            let half = match p.real("half_width") {
                x if x > 0.0 => x,
                _ => 8.0,
            };
            (HamiltonianSpec::full_lv(p.real("a"), p.real("d"))?, Grid1D::symmetric(half, p.usize("points"))?)
        }
    };
    let op = discretize(&spec, &grid, h)?;
    let s = eigensolve(&op, p.usize("levels"))?;
    let rows = s
        .eigenvalues
        .iter()
        .zip(&s.residuals)
        .enumerate()
        .map(|(n, (e, r))| vec![n.to_string(), fmt_f64(e.re), fmt_f64(e.im), fmt_f64(*r)]);
    run.write("spectrum.csv", &csv_text(&["n", "re_E", "im_E", "residual"], rows))?;
    if p.flag("states") {
        for (n, psi) in s.eigenvectors.iter().enumerate() {
            run.write(&format!("psi_{n}.csv"), &wavefunction_csv(psi))?;
        }
    }
    Ok(())
}

fn run_evolve(p: &Params, _seed: u64, run: &mut RunDir) -> Result<(), CmdError> {
    let (a, d, h) = (p.real("a"), p.real("d"), hb(p)?);
    let shift = p.real("shift");
    let grid = oscillator_grid(p, 14.0, shift.abs())?;
    let spec = HamiltonianSpec::harmonic_lv(a, d)?;
    let psi = displaced_level(p.usize("level"), a, d, h, shift, &grid)?;
    let t_end = p.real("t_end");
    let samples = p.usize("snapshots");
    let bound = max_stable_dt(&spec, &grid, h)?;
    let requested = match p.real("dt") {
        x if x > 0.0 => x,
        _ => 0.5 * bound,
    };
    let interval = t_end / samples as f64;
    let stride = (interval / requested).ceil().max(1.0) as usize;
    let dt = if t_end > 0.0 { interval / stride as f64 } else { requested };
    if dt > bound {
        return Err(Error::param("dt", format!("{dt} exceeds the stability bound {bound}")).into());
    }
    let steps = if t_end > 0.0 { stride * samples } else { 0 };
    let snaps = evolve_snapshots(&psi, &spec, dt, steps, stride)?;
    let rows = snaps.iter().enumerate().map(|(k, s)| {
        row(&[k as f64 * stride as f64 * dt, s.norm_sqr(), s.mean_position()])
    });
    run.write("observables.csv", &csv_text(&["t", "norm", "mean_q"], rows))?;
    let last = snaps.last().expect("at least the initial state");
    run.write("psi_final.csv", &wavefunction_csv(last))?;
    run.write("madelung_final.csv", &madelung_csv(&to_madelung(last, Some(1.0 / d))?))?;
    Ok(())
}

fn run_bohm(p: &Params, seed: u64, run: &mut RunDir) -> Result<(), CmdError> {
    let (a, d, h) = (p.real("a"), p.real("d"), hb(p)?);
    let grid = oscillator_grid(p, 10.0, 0.0)?;
    let spec = HamiltonianSpec::harmonic_lv(a, d)?;
    let (m, omega) = (1.0 / d, (a * d).sqrt());
    let psi0 = hermite_eigenstate(0, m, omega, h, &grid)?;
    let psi1 = hermite_eigenstate(1, m, omega, h, &grid)?;
    let amps: Vec<Complex64> = psi0
        .amplitudes()
        .iter()
        .zip(psi1.amplitudes())
        .map(|(x, y)| (x + y) / 2f64.sqrt())
        .collect();
    let psi = psi0.with_amplitudes(amps)?;

    let vq = quantum_potential_general(&psi, &spec)?;
    let rows = (0..grid.len()).map(|i| {
        vec![
            fmt_f64(grid.x(i)),
            fmt_f64(vq.values[i].re),
            fmt_f64(vq.values[i].im),
            (!vq.valid[i]).to_string(),
        ]
    });
    run.write("vq.csv", &csv_text(&["x", "vq_re", "vq_im", "masked"], rows))?;

    let checkpoints = p.usize("checkpoints");
    let per = 100;
    let total = p.real("periods") * 2.0 * PI / omega;
    let snap_dt = total / (checkpoints * per) as f64;
    let stride = (snap_dt / (0.5 * max_stable_dt(&spec, &grid, h)?)).ceil() as usize;
    let snaps = evolve_snapshots(&psi, &spec, snap_dt / stride as f64, stride * checkpoints * per, stride)?;
    let series = SnapshotSeries::from_states(&snaps, 0.0, snap_dt, m)?;
    let mut ens = TrajectoryEnsemble::sample(&psi, p.usize("walkers"), seed)?;
    let mut traj = Vec::new();
    let mut ks = Vec::new();
    let mut record = |ens: &TrajectoryEnsemble, target: &WaveFunction| -> Result<(), CmdError> {
        for (id, x) in ens.positions.iter().enumerate() {
            traj.push(vec![fmt_f64(ens.time), id.to_string(), fmt_f64(*x)]);
        }
        let cdf = GridCdf::new(&grid, &target.density())?;
        ks.push(row(&[ens.time, ks_statistic(&ens.positions, |x| cdf.cdf(x))]));
        Ok(())
    };
    record(&ens, &psi)?;
    for c in 1..=checkpoints {
        ens = propagate_trajectories(&ens, &series, snap_dt, per)?;
        record(&ens, &snaps[c * per])?;
    }
    run.write("trajectories.csv", &csv_text(&["t", "walker_id", "Q"], traj))?;
    run.write("ks.csv", &csv_text(&["t", "ks"], ks))?;
    Ok(())
}

fn run_lv_classical(p: &Params, _seed: u64, run: &mut RunDir) -> Result<(), CmdError> {
    let params = LVParams::new(p.real("a"), p.real("b"), p.real("c"), p.real("d"))?;
    let state = LVState::new(p.real("n1"), p.real("n2"))?;
    let tr = lv_integrate(&params, state, p.real("t_end"), p.real("dt"))?;
    let (q, pp) = tr.canonical(&params);
    let hh = tr.hamiltonian(&params);
    let rows = (0..tr.len())
        .step_by(p.usize("stride"))
        .map(|i| row(&[tr.t[i], tr.n1[i], tr.n2[i], q[i], pp[i], hh[i]]));
    run.write("trajectory.csv", &csv_text(&["t", "N1", "N2", "Q", "P", "H"], rows))?;
    summary(run, &[("omega", params.omega()), ("hamiltonian_drift", tr.hamiltonian_drift(&params))])
}

fn run_lv_mock(p: &Params, _seed: u64, run: &mut RunDir) -> Result<(), CmdError> {
    let (a, d) = (p.real("a"), p.real("d"));
    let mode = match p.text("mode") {
        Some("printed") => VqMode::Printed,
        _ => VqMode::Consistent,
    };
    let flow = mock_quadratic_flow(a, d, hb(p)?, (p.real("q0"), p.real("p0")), p.real("t_end"), p.real("dt"), mode)?;
    let params = LVParams::new(a, p.real("b"), p.real("c"), d)?;
    let rows = (0..flow.t.len()).map(|i| {
        let s = LVState::from_canonical(flow.q[i], flow.p[i], &params);
        row(&[flow.t[i], s.n1, s.n2, flow.q[i], flow.p[i], flow.invariant[i]])
    });
    run.write("trajectory.csv", &csv_text(&["t", "N1", "N2", "Q", "P", "H"], rows))?;
    let classical = lv_hamiltonian(p.real("q0"), p.real("p0"), a, d);
    summary(run, &[("force_coefficient", flow.coefficient), ("classical_lv_energy_at_start", classical)])
}

fn run_lv_vacuum(p: &Params, _seed: u64, run: &mut RunDir) -> Result<(), CmdError> {
    let (a, h) = (p.real("a"), hb(p)?);
    let (lo, hi) = (p.int("n_min"), p.int("n_max"));
    if lo > hi {
        return Err(Error::param("n_min", format!("must not exceed n_max ({lo} > {hi})")).into());
    }
    let mut rows = Vec::new();
    for n in lo..=hi {
        let vac = FullLVVacuum::new(n, a, -a, h, 0.0)?;
        let e = vac.energy();
        let c = full_lv_vq_constants(n, a, -a, h)?;
        let chk = verify_vq_constants(n, a, -a, h, p.usize("check_points"))?;
        let mut cells = vec![n.to_string()];
        cells.extend(row(&[
            e.re,
            e.im,
            c.quadratic,
            c.lv_evaluated.re,
            c.lv_evaluated.im,
            c.lv_printed.re,
            c.lv_printed.im,
            chk.lv_mean.re,
            chk.lv_mean.im,
            chk.quadratic_spread.max(chk.lv_spread),
            vac.consistency_residual(),
        ]));
        rows.push(cells);
    }
    let header = [
        "n",
        "re_E",
        "im_E",
        "vq_quadratic",
        "re_vq_lv",
        "im_vq_lv",
        "re_vq_lv_printed",
        "im_vq_lv_printed",
        "re_vq_lv_numeric",
        "im_vq_lv_numeric",
        "numeric_spread",
        "consistency_residual",
    ];
    run.write("vacuum.csv", &csv_text(&header, rows))?;
    Ok(())
}

fn langevin_spec(p: &Params, seed: u64) -> Result<LangevinSpec, CmdError> {
    let drift: Arc<dyn Drift> = match p.text("drift") {
        Some("double-well") => Arc::new(drift_classical(|x| 0.25 * x.powi(4) - 0.5 * x * x, 1.0)),
        Some("lv") => {
            let a = p.real("a");
            Arc::new(drift_classical(move |x| a * (x.exp() - x), 1.0))
        }
        _ => {
            let kappa = p.real("kappa");
            Arc::new(move |x: f64| -kappa * x)
        }
    };
    Ok(LangevinSpec::new(p.real("lambda"), p.real("k"), drift, seed)?)
}

fn path_stats(path: &DiscretePath) -> (f64, f64) {
    let tail = &path.phi[path.phi.len() / 10..];
    let n = tail.len() as f64;
    let mean = tail.iter().sum::<f64>() / n;
    let var = tail.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

fn run_langevin(p: &Params, seed: u64, run: &mut RunDir) -> Result<(), CmdError> {
    let spec = langevin_spec(p, seed)?;
    let path = langevin_integrate(&spec, p.real("phi0"), p.real("dt"), p.usize("steps"))?;
    let rows = path.times().into_iter().zip(&path.phi).map(|(t, x)| row(&[t, *x]));
    run.write("path.csv", &csv_text(&["t", "phi"], rows))?;
    let (mean, var) = path_stats(&path);
    let mut items = vec![("mean", mean), ("variance", var)];
    if p.text("drift") == Some("ou") {
        items.push((
            "ou_variance_oracle",
            ou_stationary_variance(p.real("lambda"), p.real("k"), p.real("kappa"), p.real("dt")),
        ));
    }
    summary(run, &items)
}

fn run_msr(p: &Params, seed: u64, run: &mut RunDir) -> Result<(), CmdError> {
    let spec = langevin_spec(p, seed)?;
    let path = langevin_integrate(&spec, p.real("phi0"), p.real("dt"), p.usize("steps"))?;
    // Saddle point of each step's quadratic in phi~: lambda eta / (k N dt), with
    // eta the realized noise increment. The action there is the
    // Onsager-Machlup weight sum lambda eta^2 / (2 k N dt).
    if p.real("k") <= 0.0 {
        return Err(Error::param("k", "the saddle-point response field needs k > 0").into());
    }
    let dt = path.dt;
    let mut tilde = vec![0.0; path.phi.len()];
    for j in 0..path.steps() {
        let x = path.phi[j];
        let eta = (path.phi[j + 1] - x) / spec.lambda - spec.drift.force(x)? * dt;
        tilde[j] = spec.lambda * eta / (spec.k * spec.noise_at(x, j)? * dt);
    }
    let full = DiscretePath::new(dt, path.phi.clone(), Some(tilde))?;
    let action = msr_action(&full, &spec)?;
    let tilde = full.phi_tilde.as_ref().expect("set above");
    let rows = full
        .times()
        .into_iter()
        .zip(&full.phi)
        .zip(tilde)
        .map(|((t, x), y)| row(&[t, *x, *y]));
    run.write("path.csv", &csv_text(&["t", "phi", "phi_tilde"], rows))?;
    summary(run, &[("action", action)])
}

fn run_ergodicity(p: &Params, seed: u64, run: &mut RunDir) -> Result<(), CmdError> {
    let (a, d, h) = (p.real("a"), p.real("d"), hb(p)?);
    let grid = oscillator_grid(p, 8.0, 0.0)?;
    let (m, omega) = (1.0 / d, (a * d).sqrt());
    let psi = hermite_eigenstate(p.usize("level"), m, omega, h, &grid)?;
    let opts = ErgodicityOptions {
        dt: p.real("dt"),
        steps: p.usize("steps"),
        burn_in: p.usize("burn_in"),
        chains: p.usize("chains"),
        seed,
    };
    let rep = born_ergodicity(&psi, m, opts)?;
    let rows = rep.histogram.iter().map(|b| {
        vec![fmt_f64(b.left), fmt_f64(b.right), b.count.to_string(), fmt_f64(b.born_density)]
    });
    run.write("histogram.csv", &csv_text(&["bin_left", "bin_right", "count", "born_density"], rows))?;
    let target = match p.int("target_level") {
        -1 => rep.ks,
        n => rep.ks_against(&hermite_eigenstate(n as usize, m, omega, h, &grid)?)?,
    };
    summary(
        run,
        &[
            ("ks", rep.ks),
            ("ks_target", target),
            ("samples", rep.samples as f64),
            ("node_reflections", rep.node_reflections as f64),
            ("edge_reflections", rep.edge_reflections as f64),
        ],
    )
}

fn run_hydro_residual(p: &Params, _seed: u64, run: &mut RunDir) -> Result<(), CmdError> {
    let (a, d, h) = (p.real("a"), p.real("d"), hb(p)?);
    let grid = Grid1D::symmetric(p.real("half_width"), p.usize("points"))?;
    let spec = HamiltonianSpec::harmonic_lv(a, d)?;
    let psi = displaced_level(0, a, d, h, p.real("shift"), &grid)?;
    let (tau, t0) = (p.real("tau"), p.real("t0"));
    if t0 < tau {
        return Err(Error::param("t0", format!("must be at least tau = {tau}")).into());
    }
    let bound = max_stable_dt(&spec, &grid, h)?;
    let sub = (tau / (0.25 * bound)).ceil() as usize;
    let dt = tau / sub as f64;
    let start = ((t0 - tau) / dt).round() as usize;
    let snaps = evolve_snapshots(&psi, &spec, dt, start + 2 * sub, 1)?;
    let picked = [snaps[start].clone(), snaps[start + sub].clone(), snaps[start + 2 * sub].clone()];
    let m = 1.0 / d;
    let fields = picked
        .iter()
        .map(|s| HydroFields::from_wavefunction(s, m))
        .collect::<Result<Vec<_>, _>>()?;
    let v = spec.potential(&grid)?;
    let e = euler_residual(&fields, tau, &v)?;
    let c = continuity_residual(&fields, tau)?;
    let mid = &fields[1];
    let rows = (0..grid.len()).map(|i| {
        let mut r = row(&[grid.x(i), mid.rho[i], mid.v[i], mid.sigma[i], e.pointwise[0][i], c.pointwise[0][i]]);
        r.push((!mid.valid[i]).to_string());
        r
    });
    run.write("residual.csv", &csv_text(&["x", "rho", "v", "sigma", "euler", "continuity", "masked"], rows))?;
    summary(
        run,
        &[
            ("euler_relative", e.relative()),
            ("continuity_relative", c.relative()),
            ("stress_identity", stress_identity_residual_wavefunction(&picked[1], m)?),
            ("reynolds", quantum_reynolds(mid).value),
        ],
    )
}

fn read_input(run: &mut RunDir, p: &Params) -> Result<Option<String>, CmdError> {
    let Some(name) = p.text("input") else {
        return Ok(None);
    };
    match run.read_input(Path::new(name)) {
        Ok(text) => Ok(Some(text)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Err(CmdError::NotFound(name.to_string())),
        Err(e) => Err(CmdError::Io(format!("{name}: {e}"))),
    }
}

/// Header and numeric rows of a CSV file.
fn parse_table(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), CmdError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| CmdError::Input(e.to_string()))?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CmdError::Input(e.to_string()))?;
        let vals = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| CmdError::Input(format!("row {}: non-numeric cell", line + 2)))?;
        rows.push(vals);
    }
    Ok((header, rows))
}

fn run_hydro_scaling(p: &Params, seed: u64, run: &mut RunDir) -> Result<(), CmdError> {
    let field = match read_input(run, p)? {
        Some(text) => {
            let (header, rows) = parse_table(&text)?;
            let col = p.text("column").unwrap_or("value");
            let idx = header
                .iter()
                .position(|h| h == col)
                .ok_or_else(|| CmdError::Input(format!("no column {col:?} in {}", header.join(","))))?;
            rows.iter().map(|r| r[idx]).collect()
        }
        None => fractional_brownian_motion(p.usize("length"), p.real("hurst"), seed)?,
    };
    let fit = structure_scaling(&field, p.real("spacing"))?;
    let rows = fit.lags.iter().zip(&fit.d2).map(|(l, d)| row(&[*l, *d, fit.fit_value(*l)]));
    run.write("scaling.csv", &csv_text(&["l", "D2", "fit_value"], rows))?;
    summary(
        run,
        &[("exponent", fit.exponent), ("exponent_stderr", fit.stderr), ("log_residual", fit.residual)],
    )
}

fn run_variety(p: &Params, _seed: u64, run: &mut RunDir) -> Result<(), CmdError> {
    let text = read_input(run, p)?.ok_or_else(|| CmdError::Input("--input is required".into()))?;
    let (header, rows) = parse_table(&text)?;
    let items: Vec<(&str, f64)> = if header.first().map(String::as_str) == Some("element_id") {
        let views = rows.into_iter().map(|r| r[1..].to_vec()).collect();
        let sys = RelationalSystem::new(views)?;
        vec![("discrete_variety", discrete_variety(&sys)), ("elements", sys.len() as f64)]
    } else if header.len() >= 2 && header[0] == "x" && header[1] == "rho" {
        let xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let rho: Vec<f64> = rows.iter().map(|r| r[1]).collect();
        let grid = grid_from_samples(&xs)?;
        let cv = continuum_variety(&rho, &grid)?;
        let id = variety_fisher_identity(&rho, &grid, p.real("mass"), hb(p)?)?;
        vec![
            ("continuum_variety", cv.value),
            ("masked_fraction", cv.masked_fraction),
            ("potential_energy", id.potential_energy),
            ("variety_term", id.variety_term),
            ("boundary", id.boundary),
            ("identity_residual", id.residual),
        ]
    } else {
        return Err(CmdError::Input(format!(
            "unrecognized header {}; expected element_id,v1,... or x,rho",
            header.join(",")
        )));
    };
    run.write(
        "variety.csv",
        &csv_text(&["quantity", "value"], items.iter().map(|(k, v)| vec![k.to_string(), fmt_f64(*v)])),
    )?;
    Ok(())
}

/// Rebuild the periodic grid from its sample positions.
fn grid_from_samples(xs: &[f64]) -> Result<Grid1D, CmdError> {
    if xs.len() < 2 {
        return Err(CmdError::Input("density needs at least two rows".into()));
    }
    let h = xs[1] - xs[0];
    if xs.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1.0)) {
        return Err(CmdError::Input("density x column must be uniformly spaced".into()));
    }
    Ok(Grid1D::new(xs[0], xs[0] + h * xs.len() as f64, xs.len())?)
}
