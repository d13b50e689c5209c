//! Variety of relational systems and its continuum limit, the Fisher information.

use rand::Rng;
use rayon::prelude::*;

use crate::bohm::walker_rng;
use crate::error::{Error, Result};
use crate::fourier::Fourier;
use crate::grid::{Grid1D, MockPlanck};
use crate::stats::GridCdf;

/// Relative density below which the Fisher integrand `rho'^2 / rho` is
/// dropped; above it the roundoff `delta^2 / rho` stays below `1e-16`.
pub const FISHER_TRUST: f64 = 1e-14;

/// Elements carrying equal-length view vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationalSystem {
    views: Vec<Vec<f64>>,
}

impl RelationalSystem {
    pub fn new(views: Vec<Vec<f64>>) -> Result<Self> {
        if views.len() < 2 {
            return Err(Error::param("views", format!("need at least 2 elements, got {}", views.len())));
        }
        let k = views[0].len();
        if views.iter().any(|v| v.len() != k) {
            return Err(Error::Shape("views must share one dimension".into()));
        }
        if views.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Domain("views must be finite".into()));
        }
        Ok(Self { views })
    }

    pub fn len(&self) -> usize {
        self.views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }

    pub fn views(&self) -> &[Vec<f64>] {
        &self.views
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `|V_i - V_j|^2`.
pub fn distinctiveness(sys: &RelationalSystem, i: usize, j: usize) -> Result<f64> {
    let n = sys.len();
    for idx in [i, j] {
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx, len: n });
        }
    }
    if i == j {
        return Err(Error::param("j", "distinctiveness needs two different elements"));
    }
    Ok(dist2(&sys.views[i], &sys.views[j]))
}

/// `(1 / N(N-1)) sum_{i != j} |V_i - V_j|^2`, summed pairwise.
pub fn discrete_variety(sys: &RelationalSystem) -> f64 {
    let n = sys.len();
    // Row sums in parallel, then a fixed-order total so results do not depend on scheduling.
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| (i + 1..n).map(|j| dist2(&sys.views[i], &sys.views[j])).sum::<f64>())
        .collect();
    let total: f64 = rows.iter().sum();
    2.0 * total / (n * (n - 1)) as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuumVariety {
    /// `int rho'^2 / rho` of the normalized density.
    pub value: f64,
    /// Fraction of points between the first and last supported point that
    /// fall below [`FISHER_TRUST`].
    pub masked_fraction: f64,
    /// `masked_fraction > 0.1`.
    pub unreliable: bool,
}

/// Fisher information of `rho`, normalized to unit mass first.
pub fn continuum_variety(rho: &[f64], grid: &Grid1D) -> Result<ContinuumVariety> {
    let rho = normalized(rho, grid)?;
    let max = rho.iter().cloned().fold(0.0, f64::max);
    let d = Fourier::new(grid).derivative_real(&rho);
    let keep: Vec<bool> = rho.iter().map(|&r| r > FISHER_TRUST * max).collect();
    let value = (0..rho.len())
        .filter(|&i| keep[i])
        .map(|i| d[i] * d[i] / rho[i])
        .sum::<f64>()
        * grid.spacing();
    let first = keep.iter().position(|&k| k).unwrap_or(0);
    let last = keep.iter().rposition(|&k| k).unwrap_or(0);
    let inner = last + 1 - first;
    let holes = keep[first..=last].iter().filter(|&&k| !k).count();
    let masked_fraction = holes as f64 / inner as f64;
    Ok(ContinuumVariety {
        value,
        masked_fraction,
        unreliable: masked_fraction > 0.1,
    })
}

fn normalized(rho: &[f64], grid: &Grid1D) -> Result<Vec<f64>> {
    if rho.len() != grid.len() {
        return Err(Error::Shape("density length differs from grid".into()));
    }
    if rho.iter().any(|&r| !(r >= 0.0 && r.is_finite())) {
        return Err(Error::Domain("density must be finite and nonnegative".into()));
    }
    let total = grid.integrate(rho);
    if !(total > 0.0) {
        return Err(Error::EmptyField);
    }
    Ok(rho.iter().map(|r| r / total).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherIdentity {
    /// `int rho V_Q`, evaluated as `-(hbar^2/2m) int R R''`.
    pub potential_energy: f64,
    /// `(hbar^2 / 8m) * continuum_variety`.
    pub variety_term: f64,
    /// `-(hbar^2/2m) [R R']` across the domain ends.
    pub boundary: f64,
    /// `|potential_energy - variety_term - boundary|`.
    pub residual: f64,
    /// False when the density neither decays at the ends nor is periodic-smooth.
    pub applicable: bool,
}

/// Integration by parts `int rho V_Q = (hbar^2/8m) int rho'^2/rho + boundary`.
pub fn variety_fisher_identity(rho: &[f64], grid: &Grid1D, m: f64, hbar: MockPlanck) -> Result<FisherIdentity> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::param("mass", format!("must be > 0, got {m}")));
    }
    let rho = normalized(rho, grid)?;
    let r: Vec<f64> = rho.iter().map(|x| x.sqrt()).collect();
    let f = Fourier::new(grid);
    let r1 = f.derivative_real(&r);
    let r2 = f.second_derivative_real(&r);
    let c = hbar.value().powi(2) / (2.0 * m);
    let potential_energy = -c * r.iter().zip(&r2).map(|(a, b)| a * b).sum::<f64>() * grid.spacing();
    let variety_term = hbar.value().powi(2) / (8.0 * m) * continuum_variety(&rho, grid)?.value;
    let n = r.len();
    let boundary = -c * (r[n - 1] * r1[n - 1] - r[0] * r1[0]);
    let max = rho.iter().cloned().fold(0.0, f64::max);
    let decays = rho[0].max(rho[n - 1]) <= FISHER_TRUST * max;
    let periodic = f.high_band_fraction(&r) < 1e-24;
    Ok(FisherIdentity {
        potential_energy,
        variety_term,
        boundary,
        residual: (potential_energy - variety_term - boundary).abs(),
        applicable: decays || periodic,
    })
}

/// Views for `count` points drawn from `rho`: each view is the kernel-density
/// score `d log rho_hat` at the point, with a Gaussian kernel whose width is
/// the distance to the `ceil(sqrt(count))`-th nearest neighbour.
pub fn sampled_score_views(rho: &[f64], grid: &Grid1D, count: usize, seed: u64) -> Result<RelationalSystem> {
    if count < 2 {
        return Err(Error::param("count", "need at least 2 samples"));
    }
    let cdf = GridCdf::new(grid, rho)?;
    let mut rng = walker_rng(seed, 0);
    let mut xs: Vec<f64> = (0..count).map(|_| cdf.quantile(rng.random::<f64>())).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = (count as f64).sqrt().ceil() as usize;
    let views = (0..count)
        .into_par_iter()
        .map(|i| {
            let x = xs[i];
            let mut d: Vec<f64> = xs.iter().map(|y| (y - x).abs()).collect();
            let kth = k.min(count - 1);
            d.select_nth_unstable_by(kth, |a, b| a.partial_cmp(b).unwrap());
            let h = d[kth].max(1e-12);
            let (mut num, mut den) = (0.0, 0.0);
            for (j, &y) in xs.iter().enumerate() {
                if j == i {
                    continue;
                }
                let u = (x - y) / h;
                let w = (-0.5 * u * u).exp();
                num -= u / h * w;
                den += w;
            }
            vec![if den > 0.0 { num / den } else { 0.0 }]
        })
        .collect();
    RelationalSystem::new(views)
}
