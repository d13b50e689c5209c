use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::stats::linear_fit;

/// Structure-function exponent for velocity-like fields, `<v v> ~ l^{2/3}`.
pub const VELOCITY_REFERENCE: f64 = 2.0 / 3.0;
/// Same for phase-like fields, `<S S> ~ l^{8/3}`.
pub const PHASE_REFERENCE: f64 = 8.0 / 3.0;

const MIN_LEN: usize = 1024;
const MIN_LAGS: usize = 8;

#[derive(Debug, Clone)]
pub struct ScalingFit {
    /// Separations in position units.
    pub lags: Vec<f64>,
    /// `D2(l) = <(f(x+l) - f(x))^2>`.
    pub d2: Vec<f64>,
    pub exponent: f64,
    /// `D2 ~ prefactor * l^exponent`.
    pub prefactor: f64,
    pub stderr: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
}

impl ScalingFit {
    pub fn fit_value(&self, l: f64) -> f64 {
        self.prefactor * l.powf(self.exponent)
    }
}

/// Integer lags spaced evenly in `log l` between 1 and `len/64`.
pub fn log_lags(len: usize, count: usize) -> Vec<usize> {
    let max = (len / 64).max(16) as f64;
    let mut out: Vec<usize> = (0..count)
        .map(|i| max.powf(i as f64 / (count - 1) as f64).round() as usize)
        .collect();
    out.dedup();
    out
}

/// Second-order structure function over log-spaced lags and its power-law
/// exponent from a least-squares fit in log-log coordinates.
pub fn structure_scaling(samples: &[f64], spacing: f64) -> Result<ScalingFit> {
    if samples.len() < MIN_LEN {
        return Err(Error::param("samples", format!("need at least {MIN_LEN}, got {}", samples.len())));
    }
    if !(spacing > 0.0) || samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::param("samples", "need finite samples and positive spacing"));
    }
    let lags = log_lags(samples.len(), 24);
    if lags.len() < MIN_LAGS {
        return Err(Error::DegenerateFit(format!("only {} distinct lags", lags.len())));
    }
    let d2: Vec<f64> = lags
        .par_iter()
        .map(|&l| {
            let n = samples.len() - l;
            samples[l..]
                .iter()
                .zip(&samples[..n])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                / n as f64
        })
        .collect();
    if d2.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::DegenerateFit("structure function is not positive".into()));
    }
    let lx: Vec<f64> = lags.iter().map(|&l| (l as f64 * spacing).ln()).collect();
    let ly: Vec<f64> = d2.iter().map(|d| d.ln()).collect();
    let fit = linear_fit(&lx, &ly)?;
    Ok(ScalingFit {
        lags: lags.iter().map(|&l| l as f64 * spacing).collect(),
        d2,
        exponent: fit.slope,
        prefactor: fit.intercept.exp(),
        stderr: fit.slope_stderr,
        residual: fit.rms_residual,
    })
}

/// Fractional Gaussian noise with Hurst exponent `hurst`, unit variance,
/// by exact circulant embedding (Davies-Harte).
pub fn fractional_gaussian_noise(len: usize, hurst: f64, seed: u64) -> Result<Vec<f64>> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::param("hurst", format!("must lie in (0, 1), got {hurst}")));
    }
    if len < 2 {
        return Err(Error::param("len", "need at least two samples"));
    }
    let m = len.next_power_of_two();
    let n = 2 * m;
    let g = |k: f64| 0.5 * ((k + 1.0).powf(2.0 * hurst) - 2.0 * k.powf(2.0 * hurst) + (k - 1.0).abs().powf(2.0 * hurst));
    let mut c: Vec<Complex64> = (0..n)
        .map(|j| Complex64::new(g(j.min(n - j) as f64), 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    fft.process(&mut c);
    if c.iter().any(|z| z.re < -1e-9) {
        return Err(Error::Domain("circulant embedding is not nonnegative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w: Vec<Complex64> = c
        .iter()
        .map(|z| {
            let s = (z.re.max(0.0) / n as f64).sqrt();
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(s * a, s * b)
        })
        .collect();
    fft.process(&mut w);
    Ok(w[..len].iter().map(|z| z.re).collect())
}

/// Fractional Brownian motion: cumulative sum of fractional Gaussian noise.
pub fn fractional_brownian_motion(len: usize, hurst: f64, seed: u64) -> Result<Vec<f64>> {
    let noise = fractional_gaussian_noise(len, hurst, seed)?;
    let mut acc = 0.0;
    Ok(noise
        .into_iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_is_degenerate() {
        assert!(matches!(structure_scaling(&[1.0; 2048], 1.0), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn short_field_is_rejected() {
        assert!(structure_scaling(&[1.0; 100], 1.0).is_err());
    }

    #[test]
    fn fgn_variance_and_lag_one_correlation() {
        let h = 0.8;
        let x = fractional_gaussian_noise(1 << 16, h, 11).unwrap();
        let n = x.len() as f64;
        let var = x.iter().map(|v| v * v).sum::<f64>() / n;
        let c1 = x.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / (n - 1.0);
        assert!((var - 1.0).abs() < 0.05, "{var}");
        let want = 0.5 * (2f64.powf(2.0 * h) - 2.0);
        assert!((c1 - want).abs() < 0.05, "{c1} vs {want}");
    }

    #[test]
    fn lags_are_increasing() {
        let l = log_lags(1 << 16, 24);
        assert_eq!(l[0], 1);
        assert_eq!(*l.last().unwrap(), 1024);
        assert!(l.windows(2).all(|w| w[1] > w[0]));
    }
}
