use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::Fourier;
use crate::grid::{Grid1D, MockPlanck};

/// Relative amplitude below which a grid point counts as a node.
pub const NODE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct WaveFunction {
    grid: Grid1D,
    amplitudes: Vec<Complex64>,
    hbar: MockPlanck,
}

impl WaveFunction {
    pub fn new(grid: Grid1D, amplitudes: Vec<Complex64>, hbar: MockPlanck) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} amplitudes for a {}-point grid",
                amplitudes.len(),
                grid.len()
            )));
        }
        if amplitudes.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Domain("amplitudes must be finite".into()));
        }
        Ok(Self {
            grid,
            amplitudes,
            hbar,
        })
    }

    /// Sample `f(x)` on the grid.
    pub fn from_fn(grid: Grid1D, hbar: MockPlanck, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let amps = grid.points().into_iter().map(f).collect();
        Self::new(grid, amps, hbar)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn hbar(&self) -> MockPlanck {
        self.hbar
    }

    pub fn with_amplitudes(&self, amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::new(self.grid.clone(), amplitudes, self.hbar)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.amplitudes.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    /// `<self|other>` with grid quadrature.
    pub fn inner(&self, other: &WaveFunction) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.spacing()
    }

    pub fn mean_position(&self) -> f64 {
        let h = self.grid.spacing();
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, z)| z.norm_sqr() * self.grid.x(i))
            .sum::<f64>()
            * h
            / self.norm_sqr()
    }

    /// Largest edge amplitude relative to the peak.
    pub fn edge_ratio(&self) -> f64 {
        let max = self.max_abs();
        if max == 0.0 {
            return 0.0;
        }
        let n = self.amplitudes.len();
        self.amplitudes[0].norm().max(self.amplitudes[n - 1].norm()) / max
    }

    /// Amplitude with the sign of the local real branch.
    ///
    /// For a state that is real up to a (slowly varying) phase, `|psi|` is
    /// continued through its zeros with a sign flip, so spectral derivatives
    /// see a smooth function. A flip is detected as a phase jump of roughly `pi`
    /// against the local phase trend. Both neighbours of a crossing that falls
    /// between grid points are flagged invalid, as are points below
    /// `threshold * max|psi|`.
    pub fn signed_amplitude(&self, threshold: f64) -> SignedAmplitude {
        let n = self.amplitudes.len();
        let max = self.max_abs();
        let mut values: Vec<f64> = self.amplitudes.iter().map(|z| z.norm()).collect();
        let mut valid: Vec<bool> = values.iter().map(|&a| a >= threshold * max && max > 0.0).collect();
        let mut crossings = Vec::new();
        if max == 0.0 {
            return SignedAmplitude {
                values,
                valid,
                crossings,
            };
        }
        let start = (0..n)
            .max_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap())
            .unwrap();
        let is_node: Vec<bool> = valid.iter().map(|v| !v).collect();

        let mut sweep = |forward: bool, values: &mut Vec<f64>, valid: &mut Vec<bool>| {
            let mut sign = 1.0;
            let mut last = start;
            let mut trend = 0.0_f64;
            let mut have_trend = false;
            let idx: Box<dyn Iterator<Item = usize>> = if forward {
                Box::new(start + 1..n)
            } else {
                Box::new((0..start).rev())
            };
            for i in idx {
                if is_node[i] {
                    values[i] *= sign;
                    continue;
                }
                let gap = i.abs_diff(last) as f64;
                let step = (self.amplitudes[i] * self.amplitudes[last].conj()).arg();
                let expected = if have_trend { trend * gap } else { 0.0 };
                let dev = wrap_angle(step - expected);
                let flipped = dev.abs() > PI / 2.0;
                let adjusted = if flipped { wrap_angle(step - PI) } else { step };
                if flipped {
                    sign = -sign;
                    if i.abs_diff(last) == 1 {
                        valid[i] = false;
                        valid[last] = false;
                    }
                    crossings.push(if forward { last } else { i });
                }
                trend = adjusted / gap;
                have_trend = true;
                values[i] *= sign;
                last = i;
            }
        };
        sweep(true, &mut values, &mut valid);
        sweep(false, &mut values, &mut valid);
        crossings.sort_unstable();
        SignedAmplitude {
            values,
            valid,
            crossings,
        }
    }
}

/// Output of [`WaveFunction::signed_amplitude`].
#[derive(Debug, Clone)]
pub struct SignedAmplitude {
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
    /// Left index of each detected sign change between neighbouring valid points.
    pub crossings: Vec<usize>,
}

pub(crate) fn wrap_angle(a: f64) -> f64 {
    let mut x = (a + PI) % (2.0 * PI);
    if x < 0.0 {
        x += 2.0 * PI;
    }
    x - PI
}

/// Rescale to unit norm under the periodic rectangle rule.
pub fn normalize(psi: &WaveFunction) -> Result<WaveFunction> {
    let norm = psi.norm_sqr().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::DegenerateState("cannot normalize a zero-norm state".into()));
    }
    let amps = psi.amplitudes.iter().map(|z| z / norm).collect();
    psi.with_amplitudes(amps)
}

/// Polar-decomposed fields `(rho, S, v)`.
///
/// `v` is a velocity when the decomposition was given a mass, otherwise the
/// momentum field `dS/dx`.
#[derive(Debug, Clone)]
pub struct MadelungFields {
    pub grid: Grid1D,
    pub rho: Vec<f64>,
    pub s: Vec<f64>,
    pub v: Vec<f64>,
    /// Points where `S` was interpolated across a node.
    pub s_undefined: Vec<bool>,
    pub mass: Option<f64>,
}

impl MadelungFields {
    pub fn new(grid: Grid1D, rho: Vec<f64>, s: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        if rho.len() != n || s.len() != n || v.len() != n {
            return Err(Error::Shape("fields must match the grid length".into()));
        }
        Ok(Self {
            grid,
            rho,
            s,
            v,
            s_undefined: vec![false; n],
            mass: None,
        })
    }

    pub fn total_probability(&self) -> f64 {
        self.grid.integrate(&self.rho)
    }
}

/// Polar decomposition `psi = sqrt(rho) exp(i S / hbar)`.
///
/// `S` is unwrapped outward from the grid midpoint. Node points are bridged by
/// linear interpolation of the phase and flagged in `s_undefined`. The velocity
/// comes from the probability current, not from differentiating `S`.
pub fn to_madelung(psi: &WaveFunction, mass: Option<f64>) -> Result<MadelungFields> {
    if let Some(m) = mass {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::param("mass", format!("must be positive, got {m}")));
        }
    }
    let amps = psi.amplitudes();
    let n = amps.len();
    let max = psi.max_abs();
    if max == 0.0 {
        return Err(Error::DegenerateState("wavefunction vanishes identically".into()));
    }
    let hbar = psi.hbar().value();
    let node: Vec<bool> = amps.iter().map(|z| z.norm() < NODE_THRESHOLD * max).collect();
    let rho = psi.density();

    // Raw phase along the grid; None at nodes.
    let mut phase: Vec<Option<f64>> = vec![None; n];
    let mid = n / 2;
    let start = (0..n)
        .map(|k| if k % 2 == 0 { mid + k / 2 } else { mid.wrapping_sub(k / 2 + 1) })
        .filter(|&i| i < n)
        .find(|&i| !node[i])
        .expect("nonzero state has a non-node point");
    phase[start] = Some(amps[start].arg());
    let mut last = start;
    for i in start + 1..n {
        if node[i] {
            continue;
        }
        let step = (amps[i] * amps[last].conj()).arg();
        phase[i] = Some(phase[last].unwrap() + step);
        last = i;
    }
    last = start;
    for i in (0..start).rev() {
        if node[i] {
            continue;
        }
        let step = (amps[i] * amps[last].conj()).arg();
        phase[i] = Some(phase[last].unwrap() + step);
        last = i;
    }

    let (s_raw, s_undefined) = fill_gaps(&phase);
    let s: Vec<f64> = s_raw.iter().map(|p| hbar * p).collect();

    // Current from real and imaginary parts separately, so a real state gives
    // an exactly vanishing velocity.
    let fourier = Fourier::new(psi.grid());
    let re: Vec<f64> = amps.iter().map(|z| z.re).collect();
    let im: Vec<f64> = amps.iter().map(|z| z.im).collect();
    let dre = fourier.derivative_real(&re);
    let dim = if im.iter().all(|&x| x == 0.0) {
        vec![0.0; n]
    } else {
        fourier.derivative_real(&im)
    };
    let mut v: Vec<Option<f64>> = (0..n)
        .map(|i| {
            if node[i] {
                None
            } else {
                Some(hbar * (re[i] * dim[i] - im[i] * dre[i]) / amps[i].norm_sqr())
            }
        })
        .collect();
    if let Some(m) = mass {
        for x in v.iter_mut().flatten() {
            *x /= m;
        }
    }
    let (v, _) = fill_gaps(&v);

    Ok(MadelungFields {
        grid: psi.grid().clone(),
        rho,
        s,
        v,
        s_undefined,
        mass,
    })
}

/// Inverse of [`to_madelung`]; `v` is not used.
pub fn from_madelung(fields: &MadelungFields, hbar: MockPlanck) -> Result<WaveFunction> {
    if let Some(i) = fields.rho.iter().position(|&r| !(r >= 0.0)) {
        return Err(Error::Domain(format!(
            "density must be nonnegative, rho[{i}] = {}",
            fields.rho[i]
        )));
    }
    let h = hbar.value();
    let amps = fields
        .rho
        .iter()
        .zip(&fields.s)
        .map(|(&r, &s)| Complex64::from_polar(r.sqrt(), s / h))
        .collect();
    WaveFunction::new(fields.grid.clone(), amps, hbar)
}

/// Linear interpolation across `None` runs; edge runs copy the nearest value.
fn fill_gaps(values: &[Option<f64>]) -> (Vec<f64>, Vec<bool>) {
    let n = values.len();
    let known: Vec<usize> = (0..n).filter(|&i| values[i].is_some()).collect();
    let mut out = vec![0.0; n];
    let mut flagged = vec![false; n];
    if known.is_empty() {
        return (out, vec![true; n]);
    }
    for i in 0..n {
        match values[i] {
            Some(x) => out[i] = x,
            None => {
                flagged[i] = true;
                let right = known.partition_point(|&k| k < i);
                out[i] = if right == 0 {
                    values[known[0]].unwrap()
                } else if right == known.len() {
                    values[known[right - 1]].unwrap()
                } else {
                    let (l, r) = (known[right - 1], known[right]);
                    let t = (i - l) as f64 / (r - l) as f64;
                    let (vl, vr) = (values[l].unwrap(), values[r].unwrap());
                    vl + t * (vr - vl)
                };
            }
        }
    }
    (out, flagged)
}
