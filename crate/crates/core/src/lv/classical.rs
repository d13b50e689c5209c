use crate::error::{Error, Result};

/// Rates of `N1' = a N1 - b N1 N2`, `N2' = c N1 N2 - d N2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LVParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl LVParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("c", c), ("d", d)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be > 0, got {v}"),
                });
            }
        }
        Ok(Self { a, b, c, d })
    }

    /// `(q1, q2) = (d/c, a/b)`.
    pub fn fixed_point(&self) -> (f64, f64) {
        (self.d / self.c, self.a / self.b)
    }

    pub fn omega(&self) -> f64 {
        (self.a * self.d).sqrt()
    }

    fn rhs(&self, n1: f64, n2: f64) -> (f64, f64) {
        (
            self.a * n1 - self.b * n1 * n2,
            self.c * n1 * n2 - self.d * n2,
        )
    }
}

/// Populations. The canonical pair is `Q = ln(N2/q2)`, `P = ln(N1/q1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LVState {
    pub n1: f64,
    pub n2: f64,
}

impl LVState {
    pub fn new(n1: f64, n2: f64) -> Result<Self> {
        if !(n1 > 0.0 && n2 > 0.0 && n1.is_finite() && n2.is_finite()) {
            return Err(Error::Domain(format!(
                "populations must be positive, got ({n1}, {n2})"
            )));
        }
        Ok(Self { n1, n2 })
    }

    pub fn to_canonical(&self, params: &LVParams) -> (f64, f64) {
        let (q1, q2) = params.fixed_point();
        ((self.n2 / q2).ln(), (self.n1 / q1).ln())
    }

    pub fn from_canonical(q: f64, p: f64, params: &LVParams) -> Self {
        let (q1, q2) = params.fixed_point();
        Self {
            n1: q1 * p.exp(),
            n2: q2 * q.exp(),
        }
    }
}

/// `a(e^Q - Q) + d(e^P - P)`.
pub fn lv_hamiltonian(q: f64, p: f64, a: f64, d: f64) -> f64 {
    a * (q.exp() - q) + d * (p.exp() - p)
}

#[derive(Debug, Clone, Default)]
pub struct LvTrajectory {
    pub t: Vec<f64>,
    pub n1: Vec<f64>,
    pub n2: Vec<f64>,
}

impl LvTrajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn canonical(&self, params: &LVParams) -> (Vec<f64>, Vec<f64>) {
        let (q1, q2) = params.fixed_point();
        (
            self.n2.iter().map(|n| (n / q2).ln()).collect(),
            self.n1.iter().map(|n| (n / q1).ln()).collect(),
        )
    }

    pub fn hamiltonian(&self, params: &LVParams) -> Vec<f64> {
        let (q, p) = self.canonical(params);
        q.iter()
            .zip(&p)
            .map(|(&q, &p)| lv_hamiltonian(q, p, params.a, params.d))
            .collect()
    }

    /// `max |H - H_0| / |H_0|`.
    pub fn hamiltonian_drift(&self, params: &LVParams) -> f64 {
        let h = self.hamiltonian(params);
        let h0 = h[0];
        h.iter().map(|x| (x - h0).abs() / h0.abs()).fold(0.0, f64::max)
    }
}

/// Fixed-step RK4 on the populations. Requires `dt * max(a, d) < 0.01`.
pub fn lv_integrate(params: &LVParams, state0: LVState, t_end: f64, dt: f64) -> Result<LvTrajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", format!("must be > 0, got {dt}")));
    }
    if dt * params.a.max(params.d) >= 0.01 {
        return Err(Error::param(
            "dt",
            format!("dt * max(a, d) must be < 0.01, got {}", dt * params.a.max(params.d)),
        ));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::param("t_end", format!("must be >= 0, got {t_end}")));
    }
    let steps = (t_end / dt).round() as usize;
    let mut out = LvTrajectory {
        t: Vec::with_capacity(steps + 1),
        n1: Vec::with_capacity(steps + 1),
        n2: Vec::with_capacity(steps + 1),
    };
    let (mut x, mut y) = (state0.n1, state0.n2);
    out.t.push(0.0);
    out.n1.push(x);
    out.n2.push(y);
    for s in 1..=steps {
        let (k1x, k1y) = params.rhs(x, y);
        let (k2x, k2y) = params.rhs(x + 0.5 * dt * k1x, y + 0.5 * dt * k1y);
        let (k3x, k3y) = params.rhs(x + 0.5 * dt * k2x, y + 0.5 * dt * k2y);
        let (k4x, k4y) = params.rhs(x + dt * k3x, y + dt * k3y);
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        y += dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
            return Err(Error::BlowUp {
                step: s,
                detail: format!("populations left the positive quadrant: ({x}, {y})"),
            });
        }
        out.t.push(s as f64 * dt);
        out.n1.push(x);
        out.n2.push(y);
    }
    Ok(out)
}

/// Angular frequency from the mean spacing of upward mean crossings of `x(t)`.
pub fn fit_frequency(t: &[f64], x: &[f64]) -> Result<f64> {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let mut crossings = Vec::new();
    for i in 1..x.len() {
        let (a, b) = (x[i - 1] - mean, x[i] - mean);
        if a < 0.0 && b >= 0.0 {
            let f = a / (a - b);
            crossings.push(t[i - 1] + f * (t[i] - t[i - 1]));
        }
    }
    if crossings.len() < 2 {
        return Err(Error::DegenerateFit("fewer than two upward crossings".into()));
    }
    let period = (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64;
    Ok(2.0 * std::f64::consts::PI / period)
}
