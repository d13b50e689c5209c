use crate::bohm::{displaced_level, quantum_potential_general, DEFAULT_TRUST};
use crate::error::{Error, Result};
use crate::grid::{Grid1D, MockPlanck};
use crate::hamiltonian::HamiltonianSpec;
use crate::stats::linear_fit;

pub use crate::bohm::VqMode;

/// Linear flow `Q' = d P`, `P' = c Q`.
#[derive(Debug, Clone)]
pub struct QuadraticFlow {
    pub t: Vec<f64>,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    /// Force coefficient `c`.
    pub coefficient: f64,
    /// `d P^2/2 - c Q^2/2` along the flow.
    pub invariant: Vec<f64>,
}

/// Force coefficient of the quantum-corrected quadratic dynamics.
///
/// Printed: `-a + sqrt(ad)/2`. Consistent: `-a - V_Q''` with the
/// curvature fitted to the numerically evaluated ground-state potential.
pub fn mock_force_coefficient(a: f64, d: f64, hbar: MockPlanck, mode: VqMode) -> Result<f64> {
    match mode {
        VqMode::Printed => Ok(-a + 0.5 * (a * d).sqrt()),
        VqMode::Consistent => Ok(-a - 2.0 * ground_state_vq_fit(a, d, hbar)?.2),
    }
}

/// Least-squares `V_Q ~ c0 + c1 Q + c2 Q^2` over the central three widths of
/// the numerically evaluated harmonic-LV ground state. Returns `(c0, c1, c2)`.
pub fn ground_state_vq_fit(a: f64, d: f64, hbar: MockPlanck) -> Result<(f64, f64, f64)> {
    let width = (hbar.value() * (d / a).sqrt()).sqrt();
    let grid = Grid1D::symmetric(12.0 * width, 256)?;
    let spec = HamiltonianSpec::harmonic_lv(a, d)?;
    let psi = displaced_level(0, a, d, hbar, 0.0, &grid)?;
    let vq = quantum_potential_general(&psi, &spec)?;
    let mask = vq.trusted(DEFAULT_TRUST);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for i in 0..grid.len() {
        let q = grid.x(i);
        if mask[i] && q.abs() <= 3.0 * width {
            xs.push(q);
            ys.push(vq.values[i].re);
        }
    }
    quadratic_fit(&xs, &ys)
}

fn quadratic_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    // Normal equations for a three-parameter polynomial.
    let mut s = [0.0; 5];
    let mut t = [0.0; 3];
    for (&xi, &yi) in x.iter().zip(y) {
        let mut p = 1.0;
        for (k, sk) in s.iter_mut().enumerate() {
            *sk += p;
            if k < 3 {
                t[k] += p * yi;
            }
            p *= xi;
        }
    }
    let m = nalgebra::Matrix3::new(s[0], s[1], s[2], s[1], s[2], s[3], s[2], s[3], s[4]);
    let rhs = nalgebra::Vector3::new(t[0], t[1], t[2]);
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::DegenerateFit("quadratic normal equations are singular".into()))?;
    Ok((sol[0], sol[1], sol[2]))
}

/// Exact propagation of the linear flow by the closed-form exponential of
/// `[[0, d], [c, 0]]`, sampled every `dt`.
#[allow(clippy::too_many_arguments)]
pub fn mock_quadratic_flow(
    a: f64,
    d: f64,
    hbar: MockPlanck,
    state0: (f64, f64),
    t_end: f64,
    dt: f64,
    mode: VqMode,
) -> Result<QuadraticFlow> {
    if !(a > 0.0 && d > 0.0) {
        return Err(Error::param("a", "rates must be positive"));
    }
    if !(dt > 0.0 && t_end >= 0.0) {
        return Err(Error::param("dt", "need dt > 0 and t_end >= 0"));
    }
    let c = mock_force_coefficient(a, d, hbar, mode)?;
    Ok(linear_flow(d, c, state0, t_end, dt))
}

pub fn linear_flow(d: f64, c: f64, (q0, p0): (f64, f64), t_end: f64, dt: f64) -> QuadraticFlow {
    let steps = (t_end / dt).round() as usize;
    let s = c * d;
    let mut out = QuadraticFlow {
        t: Vec::with_capacity(steps + 1),
        q: Vec::with_capacity(steps + 1),
        p: Vec::with_capacity(steps + 1),
        coefficient: c,
        invariant: Vec::with_capacity(steps + 1),
    };
    for k in 0..=steps {
        let t = k as f64 * dt;
        // exp(M t) = f0 I + f1 M with M^2 = s I.
        let (f0, f1) = if s > 0.0 {
            let l = s.sqrt();
            ((l * t).cosh(), (l * t).sinh() / l)
        } else if s < 0.0 {
            let w = (-s).sqrt();
            ((w * t).cos(), (w * t).sin() / w)
        } else {
            (1.0, t)
        };
        let q = f0 * q0 + f1 * d * p0;
        let p = f0 * p0 + f1 * c * q0;
        out.t.push(t);
        out.q.push(q);
        out.p.push(p);
        out.invariant.push(0.5 * d * p * p - 0.5 * c * q * q);
    }
    out
}

/// Slope of `P'` against `Q` recovered from a sampled flow, for cross-checks.
pub fn measured_force_coefficient(flow: &QuadraticFlow) -> Result<f64> {
    let n = flow.t.len();
    if n < 3 {
        return Err(Error::DegenerateFit("need at least three samples".into()));
    }
    let dt = flow.t[1] - flow.t[0];
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for i in 1..n - 1 {
        xs.push(flow.q[i]);
        ys.push((flow.p[i + 1] - flow.p[i - 1]) / (2.0 * dt));
    }
    Ok(linear_fit(&xs, &ys)?.slope)
}
