use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid1D, MockPlanck};

/// Largest admissible `hbar * k_max` for the exponential kinetic multiplier.
pub const FULL_LV_EXPONENT_LIMIT: f64 = 30.0;

#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianSpec {
    /// `P^2/2m + V(Q)` with `V` sampled on the grid.
    Canonical { mass: f64, potential: Vec<f64> },
    /// `(a+d) + (a Q^2 + d P^2)/2`.
    HarmonicLv { a: f64, d: f64 },
    /// `a(e^Q - Q) + d(e^P - P)`.
    FullLv { a: f64, d: f64 },
}

impl HamiltonianSpec {
    pub fn canonical(mass: f64, potential: Vec<f64>) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::param("mass", format!("must be > 0, got {mass}")));
        }
        if potential.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("potential", "samples must be finite"));
        }
        Ok(Self::Canonical { mass, potential })
    }

    /// Canonical spec with `V` evaluated on the grid.
    pub fn canonical_fn(mass: f64, grid: &Grid1D, v: impl Fn(f64) -> f64) -> Result<Self> {
        Self::canonical(mass, grid.points().into_iter().map(v).collect())
    }

    pub fn harmonic_lv(a: f64, d: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::param("a", format!("must be > 0, got {a}")));
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::param("d", format!("must be > 0, got {d}")));
        }
        Ok(Self::HarmonicLv { a, d })
    }

    pub fn full_lv(a: f64, d: f64) -> Result<Self> {
        if !(a.is_finite() && d.is_finite()) {
            return Err(Error::param("a", "rates must be finite"));
        }
        Ok(Self::FullLv { a, d })
    }

    /// Effective mass of the kinetic term (`1/d` for the LV forms).
    pub fn mass(&self) -> Option<f64> {
        match self {
            Self::Canonical { mass, .. } => Some(*mass),
            Self::HarmonicLv { d, .. } => Some(1.0 / d),
            Self::FullLv { d, .. } if *d != 0.0 => Some(1.0 / d),
            Self::FullLv { .. } => None,
        }
    }

    /// Configuration-space potential on the grid.
    pub fn potential(&self, grid: &Grid1D) -> Result<Vec<f64>> {
        match self {
            Self::Canonical { potential, .. } => {
                if potential.len() != grid.len() {
                    return Err(Error::Shape(format!(
                        "potential has {} samples for a {}-point grid",
                        potential.len(),
                        grid.len()
                    )));
                }
                Ok(potential.clone())
            }
            Self::HarmonicLv { a, d } => Ok(grid
                .points()
                .into_iter()
                .map(|q| a + d + 0.5 * a * q * q)
                .collect()),
            Self::FullLv { a, .. } => Ok(grid
                .points()
                .into_iter()
                .map(|q| a * (q.exp() - q))
                .collect()),
        }
    }

    /// Kinetic symbol `K(hbar k)` on the grid's FFT-ordered wavenumbers.
    pub fn kinetic_multiplier(&self, grid: &Grid1D, hbar: MockPlanck) -> Result<Vec<Complex64>> {
        let h = hbar.value();
        let k = grid.wavenumbers();
        match self {
            Self::Canonical { mass, .. } => Ok(k
                .iter()
                .map(|&k| Complex64::new((h * k).powi(2) / (2.0 * mass), 0.0))
                .collect()),
            Self::HarmonicLv { d, .. } => Ok(k
                .iter()
                .map(|&k| Complex64::new(0.5 * d * (h * k).powi(2), 0.0))
                .collect()),
            Self::FullLv { d, .. } => {
                let top = h * grid.k_max();
                if top > FULL_LV_EXPONENT_LIMIT {
                    return Err(Error::MultiplierOverflow {
                        value: top,
                        limit: FULL_LV_EXPONENT_LIMIT,
                    });
                }
                Ok(k
                    .iter()
                    .map(|&k| {
                        let p = h * k;
                        Complex64::new(d * (p.exp() - p), 0.0)
                    })
                    .collect())
            }
        }
    }

    /// Real-valued phase-space symbol `H(Q, P)`.
    pub fn symbol(&self, q: f64, p: f64) -> Option<f64> {
        match self {
            Self::Canonical { .. } => None,
            Self::HarmonicLv { a, d } => Some(a + d + 0.5 * (a * q * q + d * p * p)),
            Self::FullLv { a, d } => Some(a * (q.exp() - q) + d * (p.exp() - p)),
        }
    }

    /// Whether the operator is bounded below on the periodic grid.
    pub fn bounded_below(&self) -> bool {
        match self {
            Self::Canonical { .. } | Self::HarmonicLv { .. } => true,
            Self::FullLv { a, d } => *a >= 0.0 && *d >= 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(HamiltonianSpec::harmonic_lv(-1.0, 1.0).is_err());
        assert!(HamiltonianSpec::harmonic_lv(1.0, 0.0).is_err());
        assert!(HamiltonianSpec::canonical(0.0, vec![]).is_err());
        assert!(HamiltonianSpec::full_lv(1.0, -1.0).is_ok());
    }

    #[test]
    fn full_lv_multiplier_guard() {
        let hbar = MockPlanck::new(1.0).unwrap();
        let spec = HamiltonianSpec::full_lv(1.0, 1.0).unwrap();
        let fine = Grid1D::symmetric(1.0, 64).unwrap();
        assert!(matches!(
            spec.kinetic_multiplier(&fine, hbar),
            Err(Error::MultiplierOverflow { .. })
        ));
        let coarse = Grid1D::symmetric(6.0, 32).unwrap();
        let m = spec.kinetic_multiplier(&coarse, hbar).unwrap();
        assert_eq!(m[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn lv_symbols() {
        let spec = HamiltonianSpec::full_lv(2.0, 3.0).unwrap();
        assert_eq!(spec.symbol(0.0, 0.0), Some(5.0));
        let harm = HamiltonianSpec::harmonic_lv(2.0, 3.0).unwrap();
        assert_eq!(harm.symbol(0.0, 0.0), Some(5.0));
        assert_eq!(harm.mass(), Some(1.0 / 3.0));
    }
}
