use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::Fourier;
use crate::grid::Grid1D;
use crate::interp::cubic;
use crate::stats::GridCdf;
use crate::wave::{WaveFunction, NODE_THRESHOLD};

/// Guidance velocity `hbar Im(psi* psi') / (m |psi|^2)`.
#[derive(Debug, Clone)]
pub struct VelocityField {
    pub values: Vec<f64>,
    /// False where `|psi|` is below the node threshold; values there are
    /// interpolated from the neighbours.
    pub valid: Vec<bool>,
}

pub fn bohm_velocity(psi: &WaveFunction, m: f64) -> Result<VelocityField> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::param("mass", format!("must be > 0, got {m}")));
    }
    let max = psi.max_abs();
    if max == 0.0 {
        return Err(Error::EmptyField);
    }
    let fields = crate::wave::to_madelung(psi, Some(m))?;
    let valid = psi
        .amplitudes()
        .iter()
        .map(|z| z.norm() >= NODE_THRESHOLD * max)
        .collect();
    Ok(VelocityField {
        values: fields.v,
        valid,
    })
}

/// Walker positions with uniform weights.
#[derive(Debug, Clone)]
pub struct TrajectoryEnsemble {
    pub positions: Vec<f64>,
    pub seed: u64,
    pub time: f64,
    /// Number of edge reflections applied so far.
    pub reflections: u64,
}

impl TrajectoryEnsemble {
    pub fn new(positions: Vec<f64>, seed: u64, time: f64) -> Result<Self> {
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("walker positions must be finite".into()));
        }
        Ok(Self {
            positions,
            seed,
            time,
            reflections: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.positions.iter().sum::<f64>() / self.positions.len() as f64
    }

    /// `count` i.i.d. draws from `|psi|^2` by inverse CDF. Walker `i` uses its
    /// own stream `(seed, i)`, so the result does not depend on thread count.
    pub fn sample(psi: &WaveFunction, count: usize, seed: u64) -> Result<Self> {
        let cdf = GridCdf::new(psi.grid(), &psi.density())?;
        let positions = (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = walker_rng(seed, i as u64);
                cdf.quantile(rng.random::<f64>())
            })
            .collect();
        Self::new(positions, seed, 0.0)
    }
}

pub(crate) fn walker_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Velocity fields at equally spaced times, interpolated cubically in space
/// and linearly in time.
#[derive(Debug, Clone)]
pub struct SnapshotSeries {
    grid: Grid1D,
    t0: f64,
    dt: f64,
    fields: Vec<Vec<f64>>,
}

impl SnapshotSeries {
    /// `snapshots[k]` is the state at `t0 + k * dt`.
    pub fn from_states(snapshots: &[WaveFunction], t0: f64, dt: f64, m: f64) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::InsufficientSnapshots { need: 1, got: 0 });
        }
        let fields = snapshots
            .par_iter()
            .map(|psi| bohm_velocity(psi, m).map(|v| v.values))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: snapshots[0].grid().clone(),
            t0,
            dt,
            fields,
        })
    }

    /// A single stored field used at every time.
    pub fn stationary(psi: &WaveFunction, m: f64) -> Result<Self> {
        Self::from_states(std::slice::from_ref(psi), 0.0, 1.0, m)
    }

    pub fn t_end(&self) -> f64 {
        if self.fields.len() == 1 {
            f64::INFINITY
        } else {
            self.t0 + self.dt * (self.fields.len() - 1) as f64
        }
    }

    pub fn velocity(&self, t: f64, x: f64) -> f64 {
        let s = (x - self.grid.x_min()) / self.grid.spacing();
        if self.fields.len() == 1 {
            return cubic(&self.fields[0], s).0;
        }
        let u = ((t - self.t0) / self.dt).clamp(0.0, (self.fields.len() - 1) as f64);
        let k = (u.floor() as usize).min(self.fields.len() - 2);
        let w = u - k as f64;
        let v0 = cubic(&self.fields[k], s).0;
        if w == 0.0 {
            return v0;
        }
        let v1 = cubic(&self.fields[k + 1], s).0;
        (1.0 - w) * v0 + w * v1
    }
}

/// Advance every walker by `steps` RK4 steps of size `dt` through the guidance
/// field. Walkers leaving `[x_min, x_last]` are reflected back and counted.
pub fn propagate_trajectories(
    ens: &TrajectoryEnsemble,
    series: &SnapshotSeries,
    dt: f64,
    steps: usize,
) -> Result<TrajectoryEnsemble> {
    let t_final = ens.time + dt * steps as f64;
    if t_final > series.t_end() + 1e-9 * dt.abs() {
        return Err(Error::InsufficientSnapshots {
            need: ((t_final - series.t0) / series.dt).ceil() as usize + 1,
            got: series.fields.len(),
        });
    }
    let lo = series.grid.x_min();
    let hi = series.grid.x(series.grid.len() - 1);
    let t0 = ens.time;
    let results: Vec<(f64, u64)> = ens
        .positions
        .par_iter()
        .map(|&x0| {
            let mut x = x0;
            let mut bounces = 0;
            for s in 0..steps {
                let t = t0 + dt * s as f64;
                let k1 = series.velocity(t, x);
                let k2 = series.velocity(t + 0.5 * dt, x + 0.5 * dt * k1);
                let k3 = series.velocity(t + 0.5 * dt, x + 0.5 * dt * k2);
                let k4 = series.velocity(t + dt, x + dt * k3);
                x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                if x < lo {
                    x = (2.0 * lo - x).min(hi);
                    bounces += 1;
                } else if x > hi {
                    x = (2.0 * hi - x).max(lo);
                    bounces += 1;
                }
            }
            (x, bounces)
        })
        .collect();
    Ok(TrajectoryEnsemble {
        positions: results.iter().map(|r| r.0).collect(),
        seed: ens.seed,
        time: t_final,
        reflections: ens.reflections + results.iter().map(|r| r.1).sum::<u64>(),
    })
}

/// Flux `sum rho v h`, the rate of change of the mean position.
pub fn probability_flux(psi: &WaveFunction, m: f64) -> Result<f64> {
    let h = psi.hbar().value();
    let amps = psi.amplitudes();
    let d = Fourier::new(psi.grid()).derivative(amps);
    Ok(amps
        .iter()
        .zip(&d)
        .map(|(z, dz)| h * (z.conj() * dz).im / m)
        .sum::<f64>()
        * psi.grid().spacing())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::MockPlanck;
    use crate::spectral::hermite_eigenstate;
    use num_complex::Complex64;

    fn hb(x: f64) -> MockPlanck {
        MockPlanck::new(x).unwrap()
    }

    #[test]
    fn real_state_has_zero_velocity_and_static_walkers() {
        let grid = Grid1D::symmetric(10.0, 128).unwrap();
        let psi = hermite_eigenstate(2, 1.0, 1.0, hb(1.0), &grid).unwrap();
        let v = bohm_velocity(&psi, 1.0).unwrap();
        assert!(v.values.iter().all(|&x| x == 0.0));
        let ens = TrajectoryEnsemble::sample(&psi, 200, 9).unwrap();
        let series = SnapshotSeries::stationary(&psi, 1.0).unwrap();
        let out = propagate_trajectories(&ens, &series, 0.01, 100).unwrap();
        for (a, b) in ens.positions.iter().zip(&out.positions) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn plane_wave_velocity() {
        let grid = Grid1D::symmetric(4.0, 64).unwrap();
        let k = 2.0 * std::f64::consts::PI * 2.0 / grid.length();
        let psi = WaveFunction::from_fn(grid, hb(0.3), |x| Complex64::from_polar(1.0, k * x)).unwrap();
        let v = bohm_velocity(&psi, 1.5).unwrap();
        assert!(v.values.iter().all(|&x| (x - 0.3 * k / 1.5).abs() < 1e-12));
    }

    #[test]
    fn sampling_is_deterministic_and_thread_independent() {
        let grid = Grid1D::symmetric(8.0, 128).unwrap();
        let psi = hermite_eigenstate(0, 1.0, 1.0, hb(1.0), &grid).unwrap();
        let a = TrajectoryEnsemble::sample(&psi, 500, 42).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| TrajectoryEnsemble::sample(&psi, 500, 42).unwrap());
        assert_eq!(a.positions, b.positions);
    }
}
