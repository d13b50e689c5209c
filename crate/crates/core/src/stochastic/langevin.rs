use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::interp::cubic;

const DIVERGENCE: f64 = 1e10;

/// Deterministic force `F[phi]`.
pub trait Drift: Send + Sync {
    fn force(&self, phi: f64) -> Result<f64>;
}

impl<F: Fn(f64) -> f64 + Send + Sync> Drift for F {
    fn force(&self, phi: f64) -> Result<f64> {
        Ok(self(phi))
    }
}

/// `F = -dH/dphi` by central difference with step `1e-6 * scale`.
pub struct ClassicalDrift {
    h: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    step: f64,
}

pub fn drift_classical(h: impl Fn(f64) -> f64 + Send + Sync + 'static, scale: f64) -> ClassicalDrift {
    ClassicalDrift {
        h: Arc::new(h),
        step: 1e-6 * scale.abs().max(f64::MIN_POSITIVE),
    }
}

impl ClassicalDrift {
    fn eval(&self, phi: f64) -> f64 {
        let e = self.step;
        -((self.h)(phi + e) - (self.h)(phi - e)) / (2.0 * e)
    }
}

impl Drift for ClassicalDrift {
    fn force(&self, phi: f64) -> Result<f64> {
        Ok(self.eval(phi))
    }
}

/// Classical force plus `-dV_Q/dphi`, with `V_Q` sampled on a uniform grid
/// and interpolated cubically.
pub struct MockDrift {
    classical: ClassicalDrift,
    x0: f64,
    spacing: f64,
    vq: Vec<f64>,
}

pub fn drift_mock(
    h: impl Fn(f64) -> f64 + Send + Sync + 'static,
    scale: f64,
    vq_x0: f64,
    vq_spacing: f64,
    vq: Vec<f64>,
) -> Result<MockDrift> {
    if vq.len() < 4 {
        return Err(Error::Shape(format!("need at least 4 V_Q samples, got {}", vq.len())));
    }
    if !(vq_spacing > 0.0) || vq.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("vq", "samples must be finite on a positive spacing"));
    }
    Ok(MockDrift {
        classical: drift_classical(h, scale),
        x0: vq_x0,
        spacing: vq_spacing,
        vq,
    })
}

impl MockDrift {
    pub fn range(&self) -> (f64, f64) {
        (self.x0, self.x0 + self.spacing * (self.vq.len() - 1) as f64)
    }
}

impl Drift for MockDrift {
    fn force(&self, phi: f64) -> Result<f64> {
        let (min, max) = self.range();
        if !(phi >= min && phi <= max) {
            return Err(Error::Extrapolation { value: phi, min, max });
        }
        let (_, dv) = cubic(&self.vq, (phi - self.x0) / self.spacing);
        Ok(self.classical.eval(phi) - dv / self.spacing)
    }
}

/// `lambda^-1 dphi/dt = F[phi] + xi` with `<xi xi'> = (k N[phi] / lambda) delta`.
#[derive(Clone)]
pub struct LangevinSpec {
    pub lambda: f64,
    pub k: f64,
    pub noise: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub drift: Arc<dyn Drift>,
    pub seed: u64,
}

impl std::fmt::Debug for LangevinSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LangevinSpec")
            .field("lambda", &self.lambda)
            .field("k", &self.k)
            .field("seed", &self.seed)
            .finish_non_exhaustive()
    }
}

impl LangevinSpec {
    /// Additive noise, `N = 1`.
    pub fn new(lambda: f64, k: f64, drift: Arc<dyn Drift>, seed: u64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::param("lambda", format!("must be > 0, got {lambda}")));
        }
        if !(k >= 0.0 && k.is_finite()) {
            return Err(Error::param("k", format!("must be >= 0, got {k}")));
        }
        Ok(Self {
            lambda,
            k,
            noise: Arc::new(|_| 1.0),
            drift,
            seed,
        })
    }

    pub fn with_noise(mut self, noise: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.noise = Arc::new(noise);
        self
    }

    pub fn noise_at(&self, phi: f64, step: usize) -> Result<f64> {
        let n = (self.noise)(phi);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Domain(format!("noise amplitude N({phi}) = {n} at step {step} is not positive")));
        }
        Ok(n)
    }
}

/// Uniformly sampled path; `phi_tilde`, when present, is the response field
/// on the same time points.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePath {
    pub dt: f64,
    pub phi: Vec<f64>,
    pub phi_tilde: Option<Vec<f64>>,
}

impl DiscretePath {
    pub fn new(dt: f64, phi: Vec<f64>, phi_tilde: Option<Vec<f64>>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", format!("must be > 0, got {dt}")));
        }
        if phi.len() < 2 {
            return Err(Error::Shape("a path needs at least two points".into()));
        }
        if let Some(t) = &phi_tilde {
            if t.len() != phi.len() {
                return Err(Error::Shape(format!(
                    "phi has {} points but phi_tilde has {}",
                    phi.len(),
                    t.len()
                )));
            }
        }
        if phi.iter().chain(phi_tilde.iter().flatten()).any(|x| !x.is_finite()) {
            return Err(Error::Domain("path values must be finite".into()));
        }
        Ok(Self { dt, phi, phi_tilde })
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.phi.len()).map(|j| j as f64 * self.dt).collect()
    }

    pub fn steps(&self) -> usize {
        self.phi.len() - 1
    }
}

/// Euler-Maruyama: `phi += lambda (F dt + sqrt(k N dt / lambda) g)`.
pub fn langevin_integrate(spec: &LangevinSpec, phi0: f64, dt: f64, steps: usize) -> Result<DiscretePath> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", format!("must be > 0, got {dt}")));
    }
    let e = 1e-6 * phi0.abs().max(1.0);
    let slope = (spec.drift.force(phi0 + e)? - spec.drift.force(phi0 - e)?) / (2.0 * e);
    if dt * spec.lambda * slope.abs() >= 0.1 {
        return Err(Error::param(
            "dt",
            format!("dt*lambda*|dF/dphi| = {:.3e} must be < 0.1", dt * spec.lambda * slope.abs()),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut phi = Vec::with_capacity(steps + 1);
    let mut x = phi0;
    phi.push(x);
    for s in 1..=steps {
        let f = spec.drift.force(x)?;
        let mut inc = f * dt;
        if spec.k > 0.0 {
            let g: f64 = StandardNormal.sample(&mut rng);
            inc += (spec.k * spec.noise_at(x, s)? * dt / spec.lambda).sqrt() * g;
        }
        x += spec.lambda * inc;
        if !(x.abs() <= DIVERGENCE) {
            return Err(Error::BlowUp {
                step: s,
                detail: format!("|phi| exceeded {DIVERGENCE:e}"),
            });
        }
        phi.push(x);
    }
    DiscretePath::new(dt, phi, None)
}

/// Stationary variance of the scheme above for `F = -kappa phi`, `N = 1`:
/// `k / (kappa (2 - lambda kappa dt))`.
pub fn ou_stationary_variance(lambda: f64, k: f64, kappa: f64, dt: f64) -> f64 {
    k / (kappa * (2.0 - lambda * kappa * dt))
}

/// Response-field action on the pre-point (Ito) grid:
/// `sum_j phi~_j [lambda^-1 (phi_{j+1} - phi_j) - F(phi_j) dt - (k N(phi_j) / 2 lambda) phi~_j dt]`.
/// The last `phi~` sample has no forward increment and does not contribute.
pub fn msr_action(path: &DiscretePath, spec: &LangevinSpec) -> Result<f64> {
    let tilde = path
        .phi_tilde
        .as_ref()
        .ok_or_else(|| Error::Shape("the action needs a response field".into()))?;
    let dt = path.dt;
    let mut j_total = 0.0;
    for j in 0..path.steps() {
        let (x, x1, t) = (path.phi[j], path.phi[j + 1], tilde[j]);
        if t == 0.0 {
            continue;
        }
        let noise = if spec.k > 0.0 { spec.k * spec.noise_at(x, j)? } else { 0.0 };
        j_total += t * ((x1 - x) / spec.lambda - spec.drift.force(x)? * dt - 0.5 * noise / spec.lambda * t * dt);
    }
    Ok(j_total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ou(kappa: f64) -> Arc<dyn Drift> {
        Arc::new(move |x: f64| -kappa * x)
    }

    #[test]
    fn classical_drift_of_quadratic() {
        let f = drift_classical(|x| 0.5 * 3.0 * x * x, 1.0);
        for x in [-2.0, 0.0, 0.7] {
            assert!((f.force(x).unwrap() + 3.0 * x).abs() < 1e-8);
        }
        let c = drift_classical(|_| 4.2, 1.0);
        assert_eq!(c.force(1.3).unwrap(), 0.0);
    }

    #[test]
    fn mock_drift_extrapolation() {
        let m = drift_mock(|_| 0.0, 1.0, -1.0, 0.5, vec![0.0; 5]).unwrap();
        assert!(m.force(0.3).unwrap().abs() < 1e-12);
        assert!(matches!(m.force(1.5), Err(Error::Extrapolation { .. })));
    }

    #[test]
    fn zero_noise_is_euler() {
        let spec = LangevinSpec::new(2.0, 0.0, ou(1.5), 1).unwrap();
        let p = langevin_integrate(&spec, 1.0, 1e-3, 100).unwrap();
        let r: f64 = 1.0 - 2.0 * 1.5 * 1e-3;
        assert!((p.phi[100] - r.powi(100)).abs() < 1e-14);
    }

    #[test]
    fn seeded_paths_repeat() {
        let spec = LangevinSpec::new(1.0, 0.5, ou(1.0), 77).unwrap();
        let a = langevin_integrate(&spec, 0.0, 1e-2, 500).unwrap();
        let b = langevin_integrate(&spec, 0.0, 1e-2, 500).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_response_field_has_zero_action() {
        let spec = LangevinSpec::new(1.0, 0.5, ou(1.0), 3).unwrap();
        let mut p = langevin_integrate(&spec, 0.1, 1e-2, 50).unwrap();
        p.phi_tilde = Some(vec![0.0; p.phi.len()]);
        assert_eq!(msr_action(&p, &spec).unwrap(), 0.0);
    }

    #[test]
    fn step_guard() {
        let spec = LangevinSpec::new(1.0, 0.0, ou(200.0), 0).unwrap();
        assert!(langevin_integrate(&spec, 0.0, 1e-3, 10).is_err());
    }
}
