//! Dense density matrices and the single-qubit Pauli set.
//!
//! Qubit basis order is `(e, g)`: index 0 is the excited level, with
//! `sigma_z |e> = +|e>`. Two-atom index `k = 2 i_1 + i_2`, so the order is
//! `ee, eg, ge, gg`.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const NEGATIVE_EIGEN_TOL: f64 = 1e-9;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// Pauli matrix for `axis` 0, 1, 2 = x, y, z in the `(e, g)` basis.
pub fn pauli(axis: usize) -> Matrix2<Complex64> {
    match axis {
        0 => Matrix2::new(ZERO, ONE, ONE, ZERO),
        1 => Matrix2::new(ZERO, -I, I, ZERO),
        2 => Matrix2::new(ONE, ZERO, ZERO, -ONE),
        _ => panic!("pauli axis {axis} out of range"),
    }
}

pub(crate) fn to_dynamic(m: &Matrix2<Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(2, 2, |r, c| m[(r, c)])
}

/// `a (x) b` on the two-atom space.
pub fn two_qubit_operator(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> DMatrix<Complex64> {
    to_dynamic(a).kronecker(&to_dynamic(b))
}

/// Deviation of a candidate density matrix from the physical set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalityReport {
    pub hermiticity_error: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl PhysicalityReport {
    pub fn is_physical(&self) -> bool {
        self.hermiticity_error <= HERMITIAN_TOL
            && self.trace_error <= TRACE_TOL
            && self.min_eigenvalue >= -NEGATIVE_EIGEN_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let rho = Self::from_entries(entries)?;
        let report = rho.physicality();
        if !report.is_physical() {
            return Err(Error::Physicality(format!("{report:?}")));
        }
        Ok(rho)
    }

    /// Only checks that the matrix is square; physicality is left to the caller.
    pub fn from_entries(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::Domain(format!(
                "density matrix must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { entries })
    }

    pub fn from_pure(psi: &[Complex64]) -> Self {
        let v = DVector::from_column_slice(psi);
        Self {
            entries: &v * v.adjoint(),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim) / Complex64::from(dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// `tr(rho A)`.
    pub fn expectation(&self, op: &DMatrix<Complex64>) -> Complex64 {
        let mut acc = ZERO;
        for r in 0..self.dim() {
            for c in 0..self.dim() {
                acc += self.entries[(r, c)] * op[(c, r)];
            }
        }
        acc
    }

    pub fn hermiticity_error(&self) -> f64 {
        let diff = &self.entries - self.entries.adjoint();
        diff.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.entries + self.entries.adjoint()) * Complex64::from(0.5);
        let mut values: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(|a, b| a.total_cmp(b));
        values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    pub fn physicality(&self) -> PhysicalityReport {
        PhysicalityReport {
            hermiticity_error: self.hermiticity_error(),
            trace_error: (self.trace() - ONE).norm(),
            min_eigenvalue: self.min_eigenvalue(),
        }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (&self.entries - &other.entries)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Partial transpose on the second qubit of a two-qubit state.
    pub fn partial_transpose_second(&self) -> Result<DensityMatrix> {
        if self.dim() != 4 {
            return Err(Error::Domain("partial transpose needs a 4x4 state".into()));
        }
        let pt = DMatrix::from_fn(4, 4, |r, c| {
            let (a, b) = (r / 2, r % 2);
            let (a2, b2) = (c / 2, c % 2);
            self.entries[(2 * a + b2, 2 * a2 + b)]
        });
        Ok(DensityMatrix { entries: pt })
    }
}
