//! Small statistics helpers shared by the diagnostics.

use crate::error::{Error, Result};
use crate::grid::Grid1D;

/// CDF of a density sampled on grid points, treating each sample as the mass
/// of the cell `[x_i - h/2, x_i + h/2)` and interpolating linearly inside it.
#[derive(Debug, Clone)]
pub struct GridCdf {
    left: f64,
    h: f64,
    /// Cumulative mass at cell boundaries, `n + 1` entries, ending at 1.
    cum: Vec<f64>,
}

impl GridCdf {
    pub fn new(grid: &Grid1D, density: &[f64]) -> Result<Self> {
        if density.len() != grid.len() {
            return Err(Error::Shape("density length differs from grid".into()));
        }
        let total: f64 = density.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::DegenerateState("density has no mass".into()));
        }
        let mut cum = Vec::with_capacity(density.len() + 1);
        let mut acc = 0.0;
        cum.push(0.0);
        for &p in density {
            acc += p.max(0.0) / total;
            cum.push(acc);
        }
        let last = *cum.last().unwrap();
        for c in cum.iter_mut() {
            *c /= last;
        }
        Ok(Self {
            left: grid.x_min() - 0.5 * grid.spacing(),
            h: grid.spacing(),
            cum,
        })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let t = (x - self.left) / self.h;
        if t <= 0.0 {
            return 0.0;
        }
        let n = self.cum.len() - 1;
        if t >= n as f64 {
            return 1.0;
        }
        let i = t.floor() as usize;
        let f = t - i as f64;
        self.cum[i] + f * (self.cum[i + 1] - self.cum[i])
    }

    /// Inverse CDF for `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let n = self.cum.len() - 1;
        let j = self.cum.partition_point(|&c| c <= u).clamp(1, n);
        let (c0, c1) = (self.cum[j - 1], self.cum[j]);
        let f = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.left + (j as f64 - 1.0 + f) * self.h
    }

    /// Cumulative mass at cell boundaries.
    pub fn boundaries(&self) -> &[f64] {
        &self.cum
    }
}

/// One-sample Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// KS distance between two binned distributions on the same bins.
pub fn ks_binned(p: &[f64], q: &[f64]) -> f64 {
    let sp: f64 = p.iter().sum();
    let sq: f64 = q.iter().sum();
    let (mut a, mut b, mut d) = (0.0, 0.0, 0.0_f64);
    for (x, y) in p.iter().zip(q) {
        a += x / sp;
        b += y / sq;
        d = d.max((a - b).abs());
    }
    d
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].partial_cmp(&v[j]).unwrap());
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    r
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&ranks(x), &ranks(y))
}

/// Ordinary least squares `y = intercept + slope x`.
#[derive(Debug, Clone, Copy)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    /// Root-mean-square residual.
    pub rms_residual: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::DegenerateFit("need at least two paired points".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("abscissae coincide".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let slope_stderr = if n > 2 { (ss / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(LinearFit {
        slope,
        intercept,
        slope_stderr,
        rms_residual: (ss / nf).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_line() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.5 * v).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-14);
        assert!((f.intercept - 3.0).abs() < 1e-13);
        assert!(f.rms_residual < 1e-13);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn spearman_is_rank_based() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [1.0, 8.0, 27.0, 64.0];
        assert!((spearman(&x, &y) - 1.0).abs() < 1e-14);
        let z = [4.0, 3.0, 2.0, 1.0];
        assert!((spearman(&x, &z) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn ks_of_perfect_quantiles_is_small() {
        let n = 1000;
        let samples: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&samples, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn grid_cdf_quantile_round_trip() {
        let g = Grid1D::symmetric(5.0, 64).unwrap();
        let rho: Vec<f64> = g.points().iter().map(|x| (-x * x).exp()).collect();
        let cdf = GridCdf::new(&g, &rho).unwrap();
        for &u in &[0.01, 0.3, 0.5, 0.77, 0.999] {
            assert!((cdf.cdf(cdf.quantile(u)) - u).abs() < 1e-12);
        }
        assert!((cdf.cdf(0.0) - 0.5).abs() < 1e-12);
    }
}
