use std::f64::consts::PI;

use crate::error::{Error, Result};

/// The emergent ("mock") Planck constant. Positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MockPlanck(f64);

impl MockPlanck {
    pub fn new(value: f64) -> Result<Self> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::param("hbar", format!("must be positive and finite, got {value}")));
        }
        Ok(Self(value))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Uniform periodic grid on `[x_min, x_max)`.
///
/// The point `x_max` is identified with `x_min`, so `spacing = (x_max - x_min) / n`.
/// `n` is a power of two and at least 8 so that every spectral operation runs
/// on a radix-2 FFT.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if x_min >= x_max {
            return Err(Error::InvalidGrid(format!(
                "x_min ({x_min}) must be below x_max ({x_max})"
            )));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "point count must be a power of two >= 8, got {n}"
            )));
        }
        Ok(Self { x_min, x_max, n })
    }

    /// Grid on `[-half_width, half_width)`.
    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    #[inline]
    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.length() / self.n as f64
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// FFT-ordered angular wavenumbers. The Nyquist entry carries `-pi/spacing`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let dk = 2.0 * PI / self.length();
        let n = self.n as isize;
        (0..n)
            .map(|j| if j < n / 2 { j as f64 * dk } else { (j - n) as f64 * dk })
            .collect()
    }

    /// Largest resolved wavenumber magnitude, `pi / spacing`.
    #[inline]
    pub fn k_max(&self) -> f64 {
        PI / self.spacing()
    }

    /// Periodic rectangle rule; spectrally accurate for smooth periodic or decaying integrands.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() * self.spacing()
    }

    /// Index of the cell containing `x` after wrapping into the periodic domain.
    pub fn wrap(&self, x: f64) -> f64 {
        let l = self.length();
        let mut y = (x - self.x_min) % l;
        if y < 0.0 {
            y += l;
        }
        self.x_min + y
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x < self.x_max
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid1D::new(0.0, 1.0, 12).is_err());
        assert!(Grid1D::new(0.0, 1.0, 4).is_err());
        assert!(Grid1D::new(1.0, 1.0, 16).is_err());
        assert!(Grid1D::new(0.0, f64::NAN, 16).is_err());
        assert!(Grid1D::new(-1.0, 1.0, 16).is_ok());
    }

    #[test]
    fn hbar_must_be_positive() {
        assert!(MockPlanck::new(0.0).is_err());
        assert!(MockPlanck::new(-1.0).is_err());
        assert!(MockPlanck::new(f64::INFINITY).is_err());
        assert_eq!(MockPlanck::new(0.5).unwrap().value(), 0.5);
    }

    #[test]
    fn periodic_layout() {
        let g = Grid1D::symmetric(4.0, 16).unwrap();
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.x(8), 0.0);
        let k = g.wavenumbers();
        assert_eq!(k[0], 0.0);
        assert!((k[8] + g.k_max()).abs() < 1e-12);
        assert!((g.wrap(4.25) - (-3.75)).abs() < 1e-12);
        assert!((g.wrap(-4.25) - 3.75).abs() < 1e-12);
    }
}
