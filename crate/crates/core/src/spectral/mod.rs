//! Grid Hamiltonians, dense eigensolves, analytic oscillator states, star
//! products and an imaginary-time ground-energy estimate.

mod hermite;
mod imaginary_time;
mod moyal;

pub use hermite::{hermite_eigenstate, hermite_function, hermite_polynomial, MAX_HERMITE_LEVEL};
pub use imaginary_time::{imaginary_time_ground_energy, GroundEnergy};
pub use moyal::{moyal_bracket, moyal_star, MoyalOptions, PhaseSpaceFunction, PhaseSpaceGrid};

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::Fourier;
use crate::grid::{Grid1D, MockPlanck};
use crate::hamiltonian::HamiltonianSpec;
use crate::wave::WaveFunction;

/// Largest grid accepted by the dense solver.
pub const MAX_DENSE: usize = 2048;

#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub matrix: DMatrix<Complex64>,
    pub hermitian: bool,
    pub grid: Grid1D,
    pub hbar: MockPlanck,
}

impl OperatorMatrix {
    pub fn identity(grid: Grid1D, hbar: MockPlanck) -> Self {
        let n = grid.len();
        Self {
            matrix: DMatrix::identity(n, n),
            hermitian: true,
            grid,
            hbar,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    /// Max absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        self.matrix
            .row_iter()
            .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max |M - M^dagger|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.matrix.nrows();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let v = DVector::from_column_slice(psi);
        (&self.matrix * v).iter().copied().collect()
    }
}

/// Dense grid matrix of `K(P) + V(Q)`; the kinetic part is the circulant
/// generated by the inverse transform of the Fourier multiplier.
pub fn discretize(spec: &HamiltonianSpec, grid: &Grid1D, hbar: MockPlanck) -> Result<OperatorMatrix> {
    let n = grid.len();
    if n > MAX_DENSE {
        return Err(Error::InvalidGrid(format!(
            "dense discretization limited to {MAX_DENSE} points, got {n}"
        )));
    }
    let mut col = spec.kinetic_multiplier(grid, hbar)?;
    let potential = spec.potential(grid)?;
    Fourier::new(grid).inverse(&mut col);
    let matrix = DMatrix::from_fn(n, n, |i, j| {
        let mut z = col[(i + n - j) % n];
        if i == j {
            z += potential[i];
        }
        z
    });
    let mut op = OperatorMatrix {
        matrix,
        hermitian: false,
        grid: grid.clone(),
        hbar,
    };
    op.hermitian = op.hermiticity_defect() < 1e-10 * op.max_abs();
    Ok(op)
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: Vec<Complex64>,
    pub eigenvectors: Vec<WaveFunction>,
    /// `||H psi - E psi||` in the grid L2 norm, per pair.
    pub residuals: Vec<f64>,
    /// Residual bound every pair satisfied.
    pub tolerance: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Residual bound: `1e-8`, widened to `1e3 eps ||H||` for operators whose
/// norm makes the absolute bound unreachable in double precision.
pub fn residual_tolerance(op: &OperatorMatrix) -> f64 {
    1e-8_f64.max(1e3 * f64::EPSILON * op.inf_norm())
}

/// The `k` lowest eigenpairs by real part.
pub fn eigensolve(op: &OperatorMatrix, k: usize) -> Result<Spectrum> {
    let n = op.matrix.nrows();
    if k == 0 || k > n / 4 {
        return Err(Error::param(
            "levels",
            format!("must be in 1..={} (a quarter of the grid), got {k}", n / 4),
        ));
    }
    let pairs: Vec<(Complex64, Vec<Complex64>)> = if op.hermitian {
        hermitian_pairs(op, k)?
    } else {
        general_pairs(op, k)?
    };

    let h = op.grid.spacing();
    let tolerance = residual_tolerance(op);
    let mut spectrum = Spectrum {
        eigenvalues: Vec::with_capacity(k),
        eigenvectors: Vec::with_capacity(k),
        residuals: Vec::with_capacity(k),
        tolerance,
    };
    let mut worst = 0.0_f64;
    for (e, mut v) in pairs {
        normalize_vector(&mut v, h);
        let hv = op.apply(&v);
        let r = (hv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - e * b).norm_sqr())
            .sum::<f64>()
            * h)
            .sqrt();
        worst = worst.max(r);
        spectrum.eigenvalues.push(e);
        spectrum
            .eigenvectors
            .push(WaveFunction::new(op.grid.clone(), v, op.hbar)?);
        spectrum.residuals.push(r);
    }
    if !(worst <= tolerance) {
        return Err(Error::SolverNonConvergence {
            residual: worst,
            tolerance,
        });
    }
    Ok(spectrum)
}

fn sort_key(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap()
        .then(a.im.partial_cmp(&b.im).unwrap())
}

fn hermitian_pairs(op: &OperatorMatrix, k: usize) -> Result<Vec<(Complex64, Vec<Complex64>)>> {
    let n = op.matrix.nrows();
    let scale = op.max_abs().max(f64::MIN_POSITIVE);
    let real = op.matrix.iter().all(|z| z.im.abs() <= 1e-14 * scale);
    let fail = || Error::SolverNonConvergence {
        residual: f64::INFINITY,
        tolerance: 1e-8,
    };
    if real {
        // Symmetrize to remove roundoff asymmetry before the real solve.
        let m = DMatrix::from_fn(n, n, |i, j| {
            0.5 * (op.matrix[(i, j)].re + op.matrix[(j, i)].re)
        });
        let eig = SymmetricEigen::try_new(m, f64::EPSILON, 0).ok_or_else(fail)?;
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
        Ok(idx
            .into_iter()
            .take(k)
            .map(|i| {
                let v = eig
                    .eigenvectors
                    .column(i)
                    .iter()
                    .map(|&x| Complex64::new(x, 0.0))
                    .collect();
                (Complex64::new(eig.eigenvalues[i], 0.0), v)
            })
            .collect())
    } else {
        let m = DMatrix::from_fn(n, n, |i, j| {
            0.5 * (op.matrix[(i, j)] + op.matrix[(j, i)].conj())
        });
        let eig = SymmetricEigen::try_new(m, f64::EPSILON, 0).ok_or_else(fail)?;
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
        Ok(idx
            .into_iter()
            .take(k)
            .map(|i| {
                let v = eig.eigenvectors.column(i).iter().copied().collect();
                (Complex64::new(eig.eigenvalues[i], 0.0), v)
            })
            .collect())
    }
}

/// Complex Schur form plus back substitution on the triangular factor.
fn general_pairs(op: &OperatorMatrix, k: usize) -> Result<Vec<(Complex64, Vec<Complex64>)>> {
    let n = op.matrix.nrows();
    let schur = Schur::try_new(op.matrix.clone(), f64::EPSILON, 0).ok_or(
        Error::SolverNonConvergence {
            residual: f64::INFINITY,
            tolerance: 1e-8,
        },
    )?;
    let (q, t) = schur.unpack();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| sort_key(&t[(i, i)], &t[(j, j)]));
    let tiny = f64::EPSILON * t.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    let mut out = Vec::with_capacity(k);
    for &c in idx.iter().take(k) {
        let lambda = t[(c, c)];
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        y[c] = Complex64::new(1.0, 0.0);
        for j in (0..c).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for l in j + 1..=c {
                s += t[(j, l)] * y[l];
            }
            let mut den = t[(j, j)] - lambda;
            if den.norm() < tiny {
                den = Complex64::new(tiny, 0.0);
            }
            y[j] = -s / den;
        }
        let yv = DVector::from_vec(y);
        let v: Vec<Complex64> = (&q * yv).iter().copied().collect();
        out.push((lambda, v));
    }
    Ok(out)
}

/// Unit grid norm; the largest component is made real and positive.
fn normalize_vector(v: &mut [Complex64], h: f64) {
    let norm = (v.iter().map(|z| z.norm_sqr()).sum::<f64>() * h).sqrt();
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
        .unwrap_or(Complex64::new(1.0, 0.0));
    let phase = if pivot.norm() > 0.0 {
        pivot.conj() / pivot.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    for z in v.iter_mut() {
        *z *= phase / norm;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hb(x: f64) -> MockPlanck {
        MockPlanck::new(x).unwrap()
    }

    #[test]
    fn harmonic_lv_ground_level() {
        let spec = HamiltonianSpec::harmonic_lv(1.0, 1.0).unwrap();
        let grid = Grid1D::symmetric(10.0, 128).unwrap();
        let op = discretize(&spec, &grid, hb(1.0)).unwrap();
        assert!(op.hermitian);
        let s = eigensolve(&op, 4).unwrap();
        assert!((s.eigenvalues[0].re - 2.5).abs() < 1e-6);
    }

    #[test]
    fn free_particle_levels_are_grid_wavenumbers() {
        let grid = Grid1D::symmetric(5.0, 64).unwrap();
        let spec = HamiltonianSpec::canonical(2.0, vec![0.0; 64]).unwrap();
        let op = discretize(&spec, &grid, hb(0.5)).unwrap();
        let s = eigensolve(&op, 16).unwrap();
        let mut expected: Vec<f64> = grid
            .wavenumbers()
            .iter()
            .map(|k| (0.5 * k).powi(2) / 4.0)
            .collect();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (e, x) in s.eigenvalues.iter().zip(&expected) {
            assert!((e.re - x).abs() < 1e-12, "{e} vs {x}");
        }
    }

    #[test]
    fn identity_spectrum() {
        let grid = Grid1D::symmetric(1.0, 32).unwrap();
        let op = OperatorMatrix::identity(grid, hb(1.0));
        let s = eigensolve(&op, 8).unwrap();
        assert!(s.eigenvalues.iter().all(|e| (e - 1.0).norm() < 1e-14));
    }

    #[test]
    fn level_count_is_capped() {
        let grid = Grid1D::symmetric(1.0, 32).unwrap();
        let op = OperatorMatrix::identity(grid, hb(1.0));
        assert!(eigensolve(&op, 9).is_err());
        assert!(eigensolve(&op, 0).is_err());
    }

    #[test]
    fn non_hermitian_path_recovers_shifted_spectrum() {
        // A Hermitian operator plus i*identity: eigenvalues shift by i, vectors unchanged.
        let spec = HamiltonianSpec::harmonic_lv(1.0, 1.0).unwrap();
        let grid = Grid1D::symmetric(8.0, 64).unwrap();
        let mut op = discretize(&spec, &grid, hb(1.0)).unwrap();
        for i in 0..64 {
            op.matrix[(i, i)] += Complex64::new(0.0, 1.0);
        }
        op.hermitian = false;
        let s = eigensolve(&op, 4).unwrap();
        for (n, e) in s.eigenvalues.iter().enumerate() {
            assert!((e.re - (2.5 + n as f64)).abs() < 1e-8, "{e}");
            assert!((e.im - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn full_lv_periodic_matrix_is_hermitian() {
        let spec = HamiltonianSpec::full_lv(1.0, 1.0).unwrap();
        let grid = Grid1D::symmetric(6.0, 128).unwrap();
        let op = discretize(&spec, &grid, hb(0.1)).unwrap();
        assert!(op.hermitian);
        assert!(op.hermiticity_defect() < 1e-10 * op.max_abs());
    }
}
