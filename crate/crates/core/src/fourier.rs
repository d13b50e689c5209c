//! FFT-backed spectral operators on a [`Grid1D`].

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid1D;

/// Planned forward/inverse transforms plus the grid's wavenumbers.
#[derive(Clone)]
pub struct Fourier {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier").field("n", &self.k.len()).finish()
    }
}

impl Fourier {
    pub fn new(grid: &Grid1D) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(grid.len()),
            inverse: planner.plan_fft_inverse(grid.len()),
            k: grid.wavenumbers(),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.k.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.forward.process(data);
    }

    /// Inverse transform including the `1/n` normalization.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.inverse.process(data);
        let scale = 1.0 / data.len() as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }

    /// `F^{-1} diag(m(k)) F data`.
    pub fn apply<M>(&self, data: &[Complex64], multiplier: M) -> Vec<Complex64>
    where
        M: Fn(usize, f64) -> Complex64,
    {
        let mut buf = data.to_vec();
        self.forward(&mut buf);
        for (j, z) in buf.iter_mut().enumerate() {
            *z *= multiplier(j, self.k[j]);
        }
        self.inverse(&mut buf);
        buf
    }

    /// Apply a precomputed multiplier table.
    pub fn apply_table(&self, data: &[Complex64], table: &[Complex64]) -> Vec<Complex64> {
        self.apply(data, |j, _| table[j])
    }

    /// First derivative. The Nyquist mode is dropped so real input stays real.
    pub fn derivative(&self, data: &[Complex64]) -> Vec<Complex64> {
        let nyq = self.len() / 2;
        self.apply(data, |j, k| {
            if j == nyq {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k)
            }
        })
    }

    pub fn second_derivative(&self, data: &[Complex64]) -> Vec<Complex64> {
        self.apply(data, |_, k| Complex64::new(-k * k, 0.0))
    }

    pub fn derivative_real(&self, data: &[f64]) -> Vec<f64> {
        self.derivative(&to_complex(data)).into_iter().map(|z| z.re).collect()
    }

    pub fn second_derivative_real(&self, data: &[f64]) -> Vec<f64> {
        self.second_derivative(&to_complex(data))
            .into_iter()
            .map(|z| z.re)
            .collect()
    }

    /// Fraction of spectral power carried by the upper quarter of wavenumbers.
    /// Small values mean the samples are resolved and periodic-smooth.
    pub fn high_band_fraction(&self, data: &[f64]) -> f64 {
        let mut buf = to_complex(data);
        self.forward(&mut buf);
        let kmax = self.k.iter().fold(0.0_f64, |m, k| m.max(k.abs()));
        let total: f64 = buf.iter().map(|z| z.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let high: f64 = buf
            .iter()
            .zip(&self.k)
            .filter(|(_, k)| k.abs() > 0.75 * kmax)
            .map(|(z, _)| z.norm_sqr())
            .sum();
        high / total
    }
}

pub(crate) fn to_complex(data: &[f64]) -> Vec<Complex64> {
    data.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_sine_is_cosine() {
        let g = Grid1D::new(0.0, 2.0 * std::f64::consts::PI, 32).unwrap();
        let f: Vec<f64> = g.points().iter().map(|x| (3.0 * x).sin()).collect();
        let fourier = Fourier::new(&g);
        let d = fourier.derivative_real(&f);
        let d2 = fourier.second_derivative_real(&f);
        for (i, x) in g.points().iter().enumerate() {
            assert!((d[i] - 3.0 * (3.0 * x).cos()).abs() < 1e-12);
            assert!((d2[i] + 9.0 * (3.0 * x).sin()).abs() < 1e-11);
        }
    }

    #[test]
    fn high_band_fraction_separates_smooth_from_rough() {
        let g = Grid1D::symmetric(10.0, 128).unwrap();
        let fourier = Fourier::new(&g);
        let smooth: Vec<f64> = g.points().iter().map(|x| (-x * x).exp()).collect();
        let ramp: Vec<f64> = g.points();
        assert!(fourier.high_band_fraction(&smooth) < 1e-20);
        assert!(fourier.high_band_fraction(&ramp) > 1e-4);
    }
}
