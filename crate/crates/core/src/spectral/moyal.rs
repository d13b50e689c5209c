//! Star product on a Chebyshev tensor grid over a phase-space rectangle.
//!
//! Derivatives are taken in Chebyshev coefficient space after chopping
//! coefficients at roundoff level, so low-degree polynomials are
//! differentiated exactly.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::MockPlanck;

const CHOP: f64 = 1e-13;

/// Chebyshev-Lobatto points on `[q_lo, q_hi] x [p_lo, p_hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceGrid {
    q_range: (f64, f64),
    p_range: (f64, f64),
    nq: usize,
    np: usize,
}

impl PhaseSpaceGrid {
    pub fn new(q_range: (f64, f64), p_range: (f64, f64), nq: usize, np: usize) -> Result<Self> {
        if !(q_range.0 < q_range.1 && p_range.0 < p_range.1) {
            return Err(Error::InvalidGrid("phase-space ranges must be increasing".into()));
        }
        if nq < 8 || np < 8 {
            return Err(Error::InvalidGrid("need at least 8 points per axis".into()));
        }
        Ok(Self {
            q_range,
            p_range,
            nq,
            np,
        })
    }

    pub fn q(&self, i: usize) -> f64 {
        lobatto(self.q_range, self.nq, i)
    }

    pub fn p(&self, j: usize) -> f64 {
        lobatto(self.p_range, self.np, j)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nq, self.np)
    }

    pub fn sample(&self, f: impl Fn(f64, f64) -> Complex64) -> PhaseSpaceFunction {
        let mut values = Vec::with_capacity(self.nq * self.np);
        for i in 0..self.nq {
            for j in 0..self.np {
                values.push(f(self.q(i), self.p(j)));
            }
        }
        PhaseSpaceFunction {
            grid: self.clone(),
            values,
        }
    }

    pub fn sample_real(&self, f: impl Fn(f64, f64) -> f64) -> PhaseSpaceFunction {
        self.sample(|q, p| Complex64::new(f(q, p), 0.0))
    }
}

fn lobatto(range: (f64, f64), n: usize, i: usize) -> f64 {
    let x = (PI * i as f64 / (n - 1) as f64).cos();
    0.5 * (range.0 + range.1) + 0.5 * (range.1 - range.0) * x
}

/// Samples of a phase-space function, row-major with `q` as the slow index.
#[derive(Debug, Clone)]
pub struct PhaseSpaceFunction {
    pub grid: PhaseSpaceGrid,
    pub values: Vec<Complex64>,
}

impl PhaseSpaceFunction {
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.grid.np + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    /// All mixed partials `d_q^i d_p^j` for `i, j <= order`, indexed `[i][j]`.
    fn partials(&self, order: usize) -> Vec<Vec<Vec<Complex64>>> {
        let (nq, np) = self.grid.shape();
        let threshold = CHOP * self.max_abs();
        let qs = 2.0 / (self.grid.q_range.1 - self.grid.q_range.0);
        let ps = 2.0 / (self.grid.p_range.1 - self.grid.p_range.0);

        // Coefficients along p for each q row.
        let mut rows: Vec<Vec<Complex64>> = (0..nq)
            .map(|i| values_to_coeffs(&self.values[i * np..(i + 1) * np]))
            .collect();
        for r in rows.iter_mut() {
            chop(r, threshold);
        }
        let mut out = vec![vec![Vec::new(); order + 1]; order + 1];
        let mut p_coeffs = rows;
        for j in 0..=order {
            // For this p-derivative order, transform along q.
            let mut q_cols: Vec<Vec<Complex64>> = (0..np)
                .map(|jj| {
                    let col: Vec<Complex64> = (0..nq).map(|i| coeffs_to_values_at(&p_coeffs[i], jj)).collect();
                    let mut c = values_to_coeffs(&col);
                    chop(&mut c, threshold);
                    c
                })
                .collect();
            for i in 0..=order {
                let mut field = vec![Complex64::new(0.0, 0.0); nq * np];
                for (jj, c) in q_cols.iter().enumerate() {
                    let vals = coeffs_to_values(c);
                    for ii in 0..nq {
                        field[ii * np + jj] = vals[ii];
                    }
                }
                out[i][j] = field;
                if i < order {
                    for c in q_cols.iter_mut() {
                        *c = differentiate(c, qs);
                    }
                }
            }
            if j < order {
                for c in p_coeffs.iter_mut() {
                    *c = differentiate(c, ps);
                }
            }
        }
        out
    }
}

fn chop(c: &mut [Complex64], threshold: f64) {
    for z in c.iter_mut() {
        if z.norm() < threshold {
            *z = Complex64::new(0.0, 0.0);
        }
    }
}

/// Chebyshev coefficients from values at Lobatto points `cos(pi j/(n-1))`.
fn values_to_coeffs(f: &[Complex64]) -> Vec<Complex64> {
    let n = f.len();
    let m = (n - 1) as f64;
    (0..n)
        .map(|k| {
            let mut s = Complex64::new(0.0, 0.0);
            for (j, &v) in f.iter().enumerate() {
                let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
                s += v * (w * (PI * (k * j) as f64 / m).cos());
            }
            let ck = if k == 0 || k == n - 1 { 1.0 / m } else { 2.0 / m };
            s * ck
        })
        .collect()
}

fn coeffs_to_values_at(c: &[Complex64], j: usize) -> Complex64 {
    let m = (c.len() - 1) as f64;
    c.iter()
        .enumerate()
        .map(|(k, &z)| z * (PI * (k * j) as f64 / m).cos())
        .sum()
}

fn coeffs_to_values(c: &[Complex64]) -> Vec<Complex64> {
    (0..c.len()).map(|j| coeffs_to_values_at(c, j)).collect()
}

/// Coefficients of the derivative; `scale` maps the interval to `[-1, 1]`.
fn differentiate(c: &[Complex64], scale: f64) -> Vec<Complex64> {
    let n = c.len();
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    if n < 2 {
        return d;
    }
    for k in (1..n).rev() {
        let next = if k + 1 < n { d[k + 1] } else { Complex64::new(0.0, 0.0) };
        d[k - 1] = next + c[k] * (2.0 * k as f64);
    }
    d[0] *= 0.5;
    for z in d.iter_mut() {
        *z *= scale;
    }
    d
}

#[derive(Debug, Clone, Copy)]
pub struct MoyalOptions {
    /// Highest power of `hbar` retained.
    pub order: usize,
}

impl Default for MoyalOptions {
    fn default() -> Self {
        Self { order: 4 }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Star product `a * b` with the bidifferential exponential expanded to
/// `hbar^order`. Fails if the last retained term outgrows the earlier
/// corrections.
pub fn moyal_star(
    a: &PhaseSpaceFunction,
    b: &PhaseSpaceFunction,
    hbar: f64,
    options: MoyalOptions,
) -> Result<PhaseSpaceFunction> {
    if a.grid != b.grid {
        return Err(Error::Shape("operands live on different phase-space grids".into()));
    }
    if !(hbar >= 0.0 && hbar.is_finite()) {
        return Err(Error::param("hbar", format!("must be >= 0, got {hbar}")));
    }
    let order = options.order;
    let da = a.partials(order);
    let db = b.partials(order);
    let len = a.values.len();
    let mut result = a.mul(b).values;
    let mut term_norms = Vec::with_capacity(order);
    let half = Complex64::new(0.0, 0.5 * hbar);
    let mut factorial = 1.0;
    for n in 1..=order {
        factorial *= n as f64;
        let pref = half.powu(n as u32) / factorial;
        let mut term = vec![Complex64::new(0.0, 0.0); len];
        for j in 0..=n {
            let c = binomial(n, j) * if j % 2 == 0 { 1.0 } else { -1.0 };
            let left = &da[n - j][j];
            let right = &db[j][n - j];
            for idx in 0..len {
                term[idx] += left[idx] * right[idx] * c;
            }
        }
        let mut norm = 0.0_f64;
        for idx in 0..len {
            let t = term[idx] * pref;
            norm = norm.max(t.norm());
            result[idx] += t;
        }
        term_norms.push(norm);
    }
    if order >= 2 {
        let last = term_norms[order - 1];
        let earlier = term_norms[..order - 1].iter().copied().fold(0.0, f64::max);
        let floor = 1e-14 * (a.max_abs() * b.max_abs()).max(f64::MIN_POSITIVE);
        if last > floor && last > earlier {
            return Err(Error::SeriesNonConvergence {
                order,
                ratio: if earlier > 0.0 { last / earlier } else { f64::INFINITY },
            });
        }
    }
    Ok(PhaseSpaceFunction {
        grid: a.grid.clone(),
        values: result,
    })
}

/// `a * b - b * a`.
pub fn moyal_bracket(
    a: &PhaseSpaceFunction,
    b: &PhaseSpaceFunction,
    hbar: MockPlanck,
    options: MoyalOptions,
) -> Result<PhaseSpaceFunction> {
    let ab = moyal_star(a, b, hbar.value(), options)?;
    let ba = moyal_star(b, a, hbar.value(), options)?;
    Ok(ab.sub(&ba))
}
