use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::MockPlanck;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const SATURATION: f64 = 700.0;

/// Exact vacuum branch `psi_n = exp f(Q)` of the full LV Hamiltonian with
/// `d = -a`. Not normalizable; evaluated pointwise only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullLVVacuum {
    pub n: i64,
    pub a: f64,
    pub hbar: MockPlanck,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VacuumValue {
    pub value: Complex64,
    /// `Re f > 700`; `value` is then infinite.
    pub saturated: bool,
}

impl FullLVVacuum {
    pub fn new(n: i64, a: f64, d: f64, hbar: MockPlanck, phi: f64) -> Result<Self> {
        if !a.is_finite() || !phi.is_finite() {
            return Err(Error::param("a", "a and phi must be finite"));
        }
        if d != -a {
            return Err(Error::Domain(format!("the exact vacuum family needs d = -a, got a = {a}, d = {d}")));
        }
        Ok(Self { n, a, hbar, phi })
    }

    pub fn d(&self) -> f64 {
        -self.a
    }

    /// `h = 2 n pi i`.
    pub fn h(&self) -> Complex64 {
        Complex64::new(0.0, 2.0 * PI * self.n as f64)
    }

    pub fn energy(&self) -> Complex64 {
        full_lv_energy(self.n, self.a, self.hbar)
    }

    fn shifted(&self, q: Complex64) -> Complex64 {
        q + self.h() + I * (0.5 * self.hbar.value())
    }

    /// `f(Q) = (i / 2 hbar) (Q + h + i hbar/2)^2 + i phi`.
    pub fn exponent(&self, q: Complex64) -> Complex64 {
        let u = self.shifted(q);
        I / (2.0 * self.hbar.value()) * u * u + I * self.phi
    }

    pub fn exponent_derivative(&self, q: Complex64) -> Complex64 {
        I / self.hbar.value() * self.shifted(q)
    }

    pub fn eval(&self, q: Complex64) -> VacuumValue {
        let f = self.exponent(q);
        if f.re > SATURATION {
            VacuumValue {
                value: Complex64::new(f64::INFINITY, f64::INFINITY),
                saturated: true,
            }
        } else {
            VacuumValue {
                value: f.exp(),
                saturated: false,
            }
        }
    }

    /// `|f(Q - i hbar) - Q - f(Q) - h|`.
    pub fn functional_residual(&self, q: Complex64) -> f64 {
        let h = self.hbar.value();
        (self.exponent(q - I * h) - q - self.exponent(q) - self.h()).norm()
    }

    /// `|i hbar d f'(Q) - a Q - E_n|`.
    pub fn differential_residual(&self, q: Complex64) -> f64 {
        let h = self.hbar.value();
        (I * h * self.d() * self.exponent_derivative(q) - self.a * q - self.energy()).norm()
    }

    /// `|a + d e^h|`.
    pub fn consistency_residual(&self) -> f64 {
        (self.a + self.d() * self.h().exp()).norm()
    }
}

/// `E_n = i a (hbar/2 + 2 n pi)`.
pub fn full_lv_energy(n: i64, a: f64, hbar: MockPlanck) -> Complex64 {
    Complex64::new(0.0, a * (0.5 * hbar.value() + 2.0 * PI * n as f64))
}

pub fn full_lv_spectrum(n_range: std::ops::RangeInclusive<i64>, a: f64, hbar: MockPlanck) -> Vec<Complex64> {
    n_range.map(|n| full_lv_energy(n, a, hbar)).collect()
}

/// Quantum-potential constants of the vacuum branch `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VqConstants {
    /// Quadratic kinetic term: `-(1/8) d (4 n pi + hbar)^2`.
    pub quadratic: f64,
    /// Full kinetic term as printed: `-a e^{i hbar/2} + i a E_n`.
    pub lv_printed: Complex64,
    /// Full kinetic term applied to `|psi_n|` directly:
    /// `d e^{i hbar/2} - i d (2 n pi + hbar/2)`, which equals `-a e^{i hbar/2} + E_n`
    /// on `d = -a`.
    pub lv_evaluated: Complex64,
}

pub fn full_lv_vq_constants(n: i64, a: f64, d: f64, hbar: MockPlanck) -> Result<VqConstants> {
    if d != -a {
        return Err(Error::Domain(format!("the exact vacuum family needs d = -a, got a = {a}, d = {d}")));
    }
    let h = hbar.value();
    let beta = 2.0 * PI * n as f64 + 0.5 * h;
    let e_n = full_lv_energy(n, a, hbar);
    let half = Complex64::new(0.0, 0.5 * h).exp();
    Ok(VqConstants {
        quadratic: -0.125 * d * (4.0 * PI * n as f64 + h).powi(2),
        lv_printed: -a * half + I * a * e_n,
        lv_evaluated: d * half - I * d * beta,
    })
}

/// Numerical evaluation of both potentials on `|psi_n|` over a real window.
#[derive(Debug, Clone, PartialEq)]
pub struct VqConstantCheck {
    pub window: (f64, f64),
    pub quadratic_mean: f64,
    pub quadratic_spread: f64,
    pub lv_mean: Complex64,
    pub lv_spread: f64,
}

impl VqConstantCheck {
    pub fn is_constant(&self, tol: f64) -> bool {
        self.quadratic_spread <= tol && self.lv_spread <= tol
    }
}

/// Samples `g = log|psi_n|` on real `Q` wherever `|g| < 700`, forms `g'` and
/// `g''` by fourth-order central differences, and applies
/// `-(hbar^2 d / 2)(g'' + g'^2)` and `d(e^{P} - P)`, the shift `e^{P}` continued
/// analytically as `exp(g(Q - i hbar) - g(Q))` through its Taylor series.
pub fn verify_vq_constants(n: i64, a: f64, d: f64, hbar: MockPlanck, points: usize) -> Result<VqConstantCheck> {
    let vac = FullLVVacuum::new(n, a, d, hbar, 0.0)?;
    let h = hbar.value();
    let g = |q: f64| vac.exponent(Complex64::new(q, 0.0)).re;
    // log|psi_n| is linear in Q with slope -beta/hbar.
    let slope = (g(1.0) - g(-1.0)).abs() / 2.0;
    let half = if slope > 0.0 { (690.0 / slope).min(10.0) } else { 10.0 };
    let step = 2.0 * half / (points.max(9) - 1) as f64;
    if !(half > 4.0 * step) || points < 9 {
        return Err(Error::EmptyWindow("no representable |psi_n| window".into()));
    }
    let e = step;
    let mut quad = Vec::new();
    let mut lv = Vec::new();
    for k in 0..points {
        let q = -half + k as f64 * step;
        let (g1, g2) = fd_derivatives(&g, q, e);
        quad.push(-0.5 * h * h * d * (g2 + g1 * g1));
        let p = Complex64::new(0.0, -h) * g1;
        // g(Q - i hbar) - g(Q) = sum_k g^(k) (-i hbar)^k / k!
        let shift = Complex64::new(0.0, -h) * g1 + Complex64::new(-h * h, 0.0) * g2 / 2.0;
        lv.push(d * (shift.exp() - p));
    }
    let qm = quad.iter().sum::<f64>() / quad.len() as f64;
    let lm = lv.iter().sum::<Complex64>() / lv.len() as f64;
    Ok(VqConstantCheck {
        window: (-half, half),
        quadratic_mean: qm,
        quadratic_spread: quad.iter().map(|x| (x - qm).abs()).fold(0.0, f64::max),
        lv_mean: lm,
        lv_spread: lv.iter().map(|z| (z - lm).norm()).fold(0.0, f64::max),
    })
}

fn fd_derivatives(g: &impl Fn(f64) -> f64, q: f64, e: f64) -> (f64, f64) {
    let (m2, m1, c, p1, p2) = (g(q - 2.0 * e), g(q - e), g(q), g(q + e), g(q + 2.0 * e));
    let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * e);
    let d2 = (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * e * e);
    (d1, d2)
}
