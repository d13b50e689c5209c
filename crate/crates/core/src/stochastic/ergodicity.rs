use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::bohm::walker_rng;
use crate::error::{Error, Result};
use crate::interp::cubic;
use crate::stats::ks_binned;
use crate::wave::WaveFunction;

/// Floor applied to `rho / max rho` before taking the logarithm.
const LOG_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErgodicityOptions {
    pub dt: f64,
    /// Steps per chain after burn-in.
    pub steps: usize,
    pub burn_in: usize,
    pub chains: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: u64,
    /// `|psi|^2` normalized as a density on the bins.
    pub born_density: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicityReport {
    /// KS distance between time occupation and `|psi|^2`.
    pub ks: f64,
    pub histogram: Vec<HistogramBin>,
    pub samples: u64,
    /// Steps that would have crossed a node of `psi` and were reflected.
    pub node_reflections: u64,
    pub edge_reflections: u64,
}

impl ErgodicityReport {
    /// KS distance of the same occupation against another target on the same grid.
    pub fn ks_against(&self, target: &WaveFunction) -> Result<f64> {
        if target.grid().len() != self.histogram.len() {
            return Err(Error::Shape("target grid differs from histogram".into()));
        }
        let counts: Vec<f64> = self.histogram.iter().map(|b| b.count as f64).collect();
        Ok(ks_binned(&counts, &target.density()))
    }

    pub fn occupation(&self) -> Vec<f64> {
        self.histogram.iter().map(|b| b.count as f64).collect()
    }
}

/// Osmotic diffusion `dQ = (hbar/2m) d(log rho) dt + sqrt(hbar/m) dW`, whose
/// stationary law is `rho = |psi|^2`. Several independent chains start at the
/// mean position; their post-burn-in occupations of the grid cells are merged.
pub fn born_ergodicity(psi: &WaveFunction, m: f64, opts: ErgodicityOptions) -> Result<ErgodicityReport> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::param("mass", format!("must be > 0, got {m}")));
    }
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        return Err(Error::param("dt", format!("must be > 0, got {}", opts.dt)));
    }
    if opts.chains == 0 || opts.steps == 0 {
        return Err(Error::param("steps", "need at least one chain and one step"));
    }
    let grid = psi.grid();
    let h = grid.spacing();
    let rho = psi.density();
    let max = rho.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return Err(Error::EmptyField);
    }
    let log_rho: Vec<f64> = rho.iter().map(|r| (r / max).max(LOG_FLOOR).ln()).collect();
    let sign = psi.signed_amplitude(crate::wave::NODE_THRESHOLD).values;
    let diff = psi.hbar().value() / (2.0 * m);
    let noise = (2.0 * diff * opts.dt).sqrt();
    let lo = grid.x_min() - 0.5 * h;
    let hi = grid.x(grid.len() - 1) + 0.5 * h;
    let x_start = psi.mean_position().clamp(lo, hi);
    let n = grid.len();
    let index = |x: f64| (x - grid.x_min()) / h;

    let per_chain: Vec<(Vec<u64>, u64, u64)> = (0..opts.chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = walker_rng(opts.seed, c as u64);
            let mut counts = vec![0u64; n];
            let (mut nodes, mut edges) = (0u64, 0u64);
            let mut x = x_start;
            for s in 0..opts.burn_in + opts.steps {
                let t = index(x);
                let drift = diff * cubic(&log_rho, t).1 / h;
                let g: f64 = StandardNormal.sample(&mut rng);
                let mut step = drift * opts.dt + noise * g;
                let mut y = x + step;
                if cubic(&sign, t).0 * cubic(&sign, index(y)).0 < 0.0 {
                    step = -step;
                    y = x + step;
                    nodes += 1;
                }
                if y < lo {
                    y = (2.0 * lo - y).min(hi);
                    edges += 1;
                } else if y > hi {
                    y = (2.0 * hi - y).max(lo);
                    edges += 1;
                }
                x = y;
                if s >= opts.burn_in {
                    let cell = ((x - lo) / h).floor().clamp(0.0, (n - 1) as f64) as usize;
                    counts[cell] += 1;
                }
            }
            (counts, nodes, edges)
        })
        .collect();

    let mut counts = vec![0u64; n];
    let (mut nodes, mut edges) = (0, 0);
    for (c, a, b) in per_chain {
        for (t, v) in counts.iter_mut().zip(c) {
            *t += v;
        }
        nodes += a;
        edges += b;
    }
    let occupation: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let ks = ks_binned(&occupation, &rho);
    let total: f64 = rho.iter().sum::<f64>() * h;
    let histogram = counts
        .iter()
        .enumerate()
        .map(|(i, &count)| HistogramBin {
            left: lo + i as f64 * h,
            right: lo + (i + 1) as f64 * h,
            count,
            born_density: rho[i] / total,
        })
        .collect();
    Ok(ErgodicityReport {
        ks,
        histogram,
        samples: (opts.chains * opts.steps) as u64,
        node_reflections: nodes,
        edge_reflections: edges,
    })
}
