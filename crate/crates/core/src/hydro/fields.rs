use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::Fourier;
use crate::grid::{Grid1D, MockPlanck};
use crate::wave::{to_madelung, WaveFunction, NODE_THRESHOLD};

/// Relative density below which hydrodynamic quantities are masked. Terms
/// divided by `rho` carry spectral-derivative noise of roughly
/// `eps (k_max l)^3 / (rho / rho_max)` for a density of width `l`, so the
/// level trades coverage against accuracy on well-resolved grids.
pub const DENSITY_TRUST: f64 = 1e-5;

/// One-dimensional Madelung fields with the stress component `sigma_xx`.
#[derive(Debug, Clone)]
pub struct HydroFields {
    pub grid: Grid1D,
    pub rho: Vec<f64>,
    pub v: Vec<f64>,
    pub sigma: Vec<f64>,
    /// `dv/dx`, zero on masked points.
    pub dv: Vec<f64>,
    pub valid: Vec<bool>,
    pub m: f64,
    pub hbar: MockPlanck,
}

impl HydroFields {
    pub fn new(grid: Grid1D, rho: Vec<f64>, v: Vec<f64>, m: f64, hbar: MockPlanck) -> Result<Self> {
        if rho.len() != grid.len() || v.len() != grid.len() {
            return Err(Error::Shape("rho and v must match the grid".into()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("velocity must be finite".into()));
        }
        let stress = stress_tensor(&rho, &grid, m, hbar)?;
        let masked: Vec<f64> = v.iter().zip(&stress.valid).map(|(&v, &ok)| if ok { v } else { 0.0 }).collect();
        let dv = Fourier::new(&grid).derivative_real(&masked);
        let dv = dv.iter().zip(&stress.valid).map(|(&d, &ok)| if ok { d } else { 0.0 }).collect();
        Ok(Self {
            grid,
            rho,
            v,
            sigma: stress.sigma,
            dv,
            valid: stress.valid,
            m,
            hbar,
        })
    }

    pub fn from_wavefunction(psi: &WaveFunction, m: f64) -> Result<Self> {
        let f = to_madelung(psi, Some(m))?;
        let amp = psi.signed_amplitude(NODE_THRESHOLD).values;
        let stress = stress_from_amplitude(&amp, &f.grid, m, psi.hbar())?;
        // v' = (hbar/m) Im(psi''/psi - (psi'/psi)^2) pointwise, which avoids
        // differentiating the masked velocity across the mask edge.
        let fourier = Fourier::new(&f.grid);
        let d1 = fourier.derivative(psi.amplitudes());
        let d2 = fourier.second_derivative(psi.amplitudes());
        let c = psi.hbar().value() / m;
        let dv = (0..amp.len())
            .map(|i| {
                if stress.valid[i] {
                    let z = psi.amplitudes()[i];
                    let g = d1[i] / z;
                    c * (d2[i] / z - g * g).im
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Self {
            grid: f.grid,
            rho: f.rho,
            v: f.v,
            sigma: stress.sigma,
            dv,
            valid: stress.valid,
            m,
            hbar: psi.hbar(),
        })
    }

    /// `(1/(m rho)) d sigma`, zero on masked points.
    pub fn stress_force(&self) -> Vec<f64> {
        let ds = Fourier::new(&self.grid).derivative_real(&self.sigma);
        ds.iter()
            .zip(&self.rho)
            .zip(&self.valid)
            .map(|((d, r), &ok)| if ok { d / (self.m * r) } else { 0.0 })
            .collect()
    }

    /// `v dv/dx`, zero on masked points.
    pub fn advection(&self) -> Vec<f64> {
        self.masked_v().iter().zip(&self.dv).map(|(v, d)| v * d).collect()
    }

    pub fn masked_v(&self) -> Vec<f64> {
        self.v
            .iter()
            .zip(&self.valid)
            .map(|(&v, &ok)| if ok { v } else { 0.0 })
            .collect()
    }

    pub fn total_probability(&self) -> f64 {
        self.grid.integrate(&self.rho)
    }
}

#[derive(Debug, Clone)]
pub struct StressField {
    pub sigma: Vec<f64>,
    pub valid: Vec<bool>,
}

/// `sigma = -(hbar^2 rho / 4m) d^2 log rho` for a nodeless density, evaluated
/// as `-(hbar^2/2m)(R R'' - R'^2)` with `R = sqrt(rho)` so nothing is divided
/// by the density.
pub fn stress_tensor(rho: &[f64], grid: &Grid1D, m: f64, hbar: MockPlanck) -> Result<StressField> {
    check_density(rho, grid, m)?;
    let r: Vec<f64> = rho.iter().map(|x| x.sqrt()).collect();
    stress_from_amplitude(&r, grid, m, hbar)
}

/// Same from a real amplitude `a` with `rho = a^2`; `a` may change sign, so
/// states with nodes stay smooth.
pub fn stress_from_amplitude(a: &[f64], grid: &Grid1D, m: f64, hbar: MockPlanck) -> Result<StressField> {
    let rho: Vec<f64> = a.iter().map(|x| x * x).collect();
    check_density(&rho, grid, m)?;
    let f = Fourier::new(grid);
    let d1 = f.derivative_real(a);
    let d2 = f.second_derivative_real(a);
    let c = -hbar.value().powi(2) / (2.0 * m);
    let sigma = (0..a.len()).map(|i| c * (a[i] * d2[i] - d1[i] * d1[i])).collect();
    Ok(StressField {
        sigma,
        valid: density_mask(&rho),
    })
}

/// `d V_Q` for `V_Q = -(hbar^2/2m) R''/R`, `R = sqrt(rho)`:
/// `-(hbar^2/2m)(R R''' - R' R'')/R^2`. Independent of the stress route.
pub fn quantum_potential_gradient(rho: &[f64], grid: &Grid1D, m: f64, hbar: MockPlanck) -> Result<Vec<f64>> {
    check_density(rho, grid, m)?;
    let r: Vec<f64> = rho.iter().map(|x| x.max(0.0).sqrt()).collect();
    gradient_from_amplitude(&r, grid, m, hbar)
}

fn gradient_from_amplitude(r: &[f64], grid: &Grid1D, m: f64, hbar: MockPlanck) -> Result<Vec<f64>> {
    let rho: Vec<f64> = r.iter().map(|x| x * x).collect();
    check_density(&rho, grid, m)?;
    let valid = density_mask(&rho);
    let f = Fourier::new(grid);
    let r1 = f.derivative_real(r);
    let r2 = f.second_derivative_real(r);
    let r3 = f.derivative_real(&r2);
    let c = -hbar.value().powi(2) / (2.0 * m);
    Ok((0..r.len())
        .map(|i| {
            if valid[i] {
                c * (r[i] * r3[i] - r1[i] * r2[i]) / (r[i] * r[i])
            } else {
                0.0
            }
        })
        .collect())
}

/// `max |(1/rho) d sigma - d V_Q|` over the density mask.
pub fn stress_identity_residual(rho: &[f64], grid: &Grid1D, m: f64, hbar: MockPlanck) -> Result<f64> {
    let fields = HydroFields::new(grid.clone(), rho.to_vec(), vec![0.0; rho.len()], m, hbar)?;
    let lhs = fields.stress_force();
    let rhs = quantum_potential_gradient(rho, grid, m, hbar)?;
    Ok((0..rho.len())
        .filter(|&i| fields.valid[i])
        .map(|i| (m * lhs[i] - rhs[i]).abs())
        .fold(0.0, f64::max))
}

/// Same identity for a wavefunction, with `R` taken as the signed amplitude
/// rather than `sqrt(|psi|^2)`: the square root of a computed density has a
/// noise floor near `sqrt(eps)` in the tails.
pub fn stress_identity_residual_wavefunction(psi: &WaveFunction, m: f64) -> Result<f64> {
    let fields = HydroFields::from_wavefunction(psi, m)?;
    let amp = psi.signed_amplitude(NODE_THRESHOLD).values;
    let lhs = fields.stress_force();
    let rhs = gradient_from_amplitude(&amp, psi.grid(), m, psi.hbar())?;
    Ok((0..amp.len())
        .filter(|&i| fields.valid[i])
        .map(|i| (m * lhs[i] - rhs[i]).abs())
        .fold(0.0, f64::max))
}

fn check_density(rho: &[f64], grid: &Grid1D, m: f64) -> Result<()> {
    if rho.len() != grid.len() {
        return Err(Error::Shape("density length differs from grid".into()));
    }
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::param("mass", format!("must be > 0, got {m}")));
    }
    if rho.iter().any(|&r| !(r >= 0.0 && r.is_finite())) {
        return Err(Error::Domain("density must be finite and nonnegative".into()));
    }
    if rho.iter().all(|&r| r == 0.0) {
        return Err(Error::EmptyField);
    }
    Ok(())
}

fn density_mask(rho: &[f64]) -> Vec<bool> {
    let max = rho.iter().cloned().fold(0.0, f64::max);
    rho.iter().map(|&r| r > DENSITY_TRUST * max).collect()
}

#[derive(Debug, Clone)]
pub struct ResidualReport {
    /// Residual at each interior snapshot.
    pub pointwise: Vec<Vec<f64>>,
    /// Time-RMS of the spatial L2 norm of the residual.
    pub norm: f64,
    /// Same norm of the time-derivative term, for scale.
    pub reference: f64,
}

impl ResidualReport {
    pub fn relative(&self) -> f64 {
        self.norm / self.reference
    }
}

fn check_snapshots(snapshots: &[HydroFields]) -> Result<()> {
    if snapshots.len() < 3 {
        return Err(Error::InsufficientSnapshots {
            need: 3,
            got: snapshots.len(),
        });
    }
    let n = snapshots[0].grid.len();
    if snapshots.iter().any(|s| s.grid != snapshots[0].grid || s.rho.len() != n) {
        return Err(Error::Shape("snapshots must share one grid".into()));
    }
    Ok(())
}

fn norms(grid: &Grid1D, rows: &[(Vec<f64>, Vec<f64>)]) -> (f64, f64) {
    let h = grid.spacing();
    let k = rows.len() as f64;
    let (mut a, mut b) = (0.0, 0.0);
    for (r, d) in rows {
        a += r.iter().map(|x| x * x).sum::<f64>() * h;
        b += d.iter().map(|x| x * x).sum::<f64>() * h;
    }
    ((a / k).sqrt(), (b / k).sqrt())
}

/// `dv/dt + v dv/dx + V'/m + (1/(m rho)) d sigma` with centered time
/// differences over snapshots spaced `dt` apart, on points valid in all three.
pub fn euler_residual(snapshots: &[HydroFields], dt: f64, potential: &[f64]) -> Result<ResidualReport> {
    check_snapshots(snapshots)?;
    let grid = &snapshots[0].grid;
    if potential.len() != grid.len() {
        return Err(Error::Shape("potential length differs from grid".into()));
    }
    let dv = potential_gradient(potential, grid.spacing());
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (1..snapshots.len() - 1)
        .into_par_iter()
        .map(|k| {
            let (prev, cur, next) = (&snapshots[k - 1], &snapshots[k], &snapshots[k + 1]);
            let adv = cur.advection();
            let force = cur.stress_force();
            let m = cur.m;
            let mut r = vec![0.0; grid.len()];
            let mut d = vec![0.0; grid.len()];
            for i in 0..grid.len() {
                if prev.valid[i] && cur.valid[i] && next.valid[i] {
                    d[i] = (next.v[i] - prev.v[i]) / (2.0 * dt);
                    r[i] = d[i] + adv[i] + dv[i] / m + force[i];
                }
            }
            (r, d)
        })
        .collect();
    let (norm, reference) = norms(grid, &rows);
    Ok(ResidualReport {
        pointwise: rows.into_iter().map(|r| r.0).collect(),
        norm,
        reference,
    })
}

/// Sixth-order central differences, lower order near the ends. External
/// potentials are generally not periodic on the grid, so a spectral derivative
/// would ring.
fn potential_gradient(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            if i >= 3 && i + 3 < n {
                (45.0 * (v[i + 1] - v[i - 1]) - 9.0 * (v[i + 2] - v[i - 2]) + (v[i + 3] - v[i - 3])) / (60.0 * h)
            } else if i >= 1 && i + 1 < n {
                (v[i + 1] - v[i - 1]) / (2.0 * h)
            } else if i == 0 {
                (v[1] - v[0]) / h
            } else {
                (v[n - 1] - v[n - 2]) / h
            }
        })
        .collect()
}

/// `d rho/dt + d(rho v)/dx` with centered time differences.
pub fn continuity_residual(snapshots: &[HydroFields], dt: f64) -> Result<ResidualReport> {
    check_snapshots(snapshots)?;
    let grid = &snapshots[0].grid;
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (1..snapshots.len() - 1)
        .into_par_iter()
        .map(|k| {
            let (prev, cur, next) = (&snapshots[k - 1], &snapshots[k], &snapshots[k + 1]);
            // Unmasked: rho v is the current, finite everywhere, and masking it
            // would put a jump into the spectral derivative.
            let flux: Vec<f64> = cur.rho.iter().zip(&cur.v).map(|(r, v)| r * v).collect();
            let df = Fourier::new(grid).derivative_real(&flux);
            let d: Vec<f64> = (0..grid.len()).map(|i| (next.rho[i] - prev.rho[i]) / (2.0 * dt)).collect();
            let r = d.iter().zip(&df).map(|(a, b)| a + b).collect();
            (r, d)
        })
        .collect();
    let (norm, reference) = norms(grid, &rows);
    Ok(ResidualReport {
        pointwise: rows.into_iter().map(|r| r.0).collect(),
        norm,
        reference,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reynolds {
    pub value: f64,
    /// Quantum-stress term vanishes identically.
    pub infinite: bool,
}

/// `||v v'|| / ||(1/(m rho)) sigma'||` over the masked region.
pub fn quantum_reynolds(fields: &HydroFields) -> Reynolds {
    let adv = fields.advection();
    let force = fields.stress_force();
    let num: f64 = adv.iter().map(|x| x * x).sum::<f64>().sqrt();
    let den: f64 = force.iter().map(|x| x * x).sum::<f64>().sqrt();
    if den == 0.0 {
        Reynolds {
            value: if num == 0.0 { f64::NAN } else { f64::INFINITY },
            infinite: true,
        }
    } else {
        Reynolds {
            value: num / den,
            infinite: false,
        }
    }
}
