//! Bloch vectors, cross dyadic and the quantities derived from them.
//!
//! `rho = (1 + s.sigma (x) 1 + 1 (x) t.tau + sum_ij C_ij sigma_i (x) tau_j) / 4`.

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64;

use crate::density::{
    pauli, two_qubit_operator, DensityMatrix, HERMITIAN_TOL, NEGATIVE_EIGEN_TOL, TRACE_TOL,
};
use crate::error::{Error, Result};

pub const WERNER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitBlochState {
    /// First atom.
    pub s: Vector3<f64>,
    /// Second atom.
    pub t: Vector3<f64>,
    /// `C_ij = <sigma_i (x) tau_j>`.
    pub cross: Matrix3<f64>,
}

impl TwoQubitBlochState {
    pub fn maximally_mixed() -> Self {
        Self {
            s: Vector3::zeros(),
            t: Vector3::zeros(),
            cross: Matrix3::zeros(),
        }
    }

    /// `C - s t^T`.
    pub fn entangled_dyadic(&self) -> Matrix3<f64> {
        self.cross - self.s * self.t.transpose()
    }

    /// Largest componentwise difference over `s`, `t` and `C`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let ds = (self.s - other.s).abs().max();
        let dt = (self.t - other.t).abs().max();
        let dc = (self.cross - other.cross).abs().max();
        ds.max(dt).max(dc)
    }

    /// Local rotations `s -> R s`, `t -> Q t`, `C -> R C Q^T`.
    pub fn rotated(&self, r: &Matrix3<f64>, q: &Matrix3<f64>) -> Self {
        Self {
            s: r * self.s,
            t: q * self.t,
            cross: r * self.cross * q.transpose(),
        }
    }
}

pub fn decompose(rho: &DensityMatrix) -> Result<TwoQubitBlochState> {
    if rho.dim() != 4 {
        return Err(Error::Domain(format!(
            "expected a 4x4 state, got {}",
            rho.dim()
        )));
    }
    let herm = rho.hermiticity_error();
    let trace = (rho.trace() - Complex64::from(1.0)).norm();
    if herm > HERMITIAN_TOL || trace > TRACE_TOL {
        return Err(Error::Physicality(format!(
            "hermiticity error {herm:e}, trace error {trace:e}"
        )));
    }
    let id = nalgebra::Matrix2::identity();
    let mut state = TwoQubitBlochState::maximally_mixed();
    for i in 0..3 {
        state.s[i] = rho.expectation(&two_qubit_operator(&pauli(i), &id)).re;
        state.t[i] = rho.expectation(&two_qubit_operator(&id, &pauli(i))).re;
        for j in 0..3 {
            state.cross[(i, j)] = rho
                .expectation(&two_qubit_operator(&pauli(i), &pauli(j)))
                .re;
        }
    }
    Ok(state)
}

/// A reassembled density matrix together with its positivity status.
#[derive(Debug, Clone, PartialEq)]
pub struct Composed {
    pub rho: DensityMatrix,
    pub min_eigenvalue: f64,
}

impl Composed {
    pub fn is_positive(&self) -> bool {
        self.min_eigenvalue >= -NEGATIVE_EIGEN_TOL
    }
}

/// Inverse of [`decompose`]. Hermiticity and trace hold by construction;
/// positivity is reported, not enforced.
pub fn compose(state: &TwoQubitBlochState) -> Composed {
    let id = nalgebra::Matrix2::identity();
    let mut m: DMatrix<Complex64> = DMatrix::identity(4, 4);
    for i in 0..3 {
        m += two_qubit_operator(&pauli(i), &id) * Complex64::from(state.s[i]);
        m += two_qubit_operator(&id, &pauli(i)) * Complex64::from(state.t[i]);
        for j in 0..3 {
            m += two_qubit_operator(&pauli(i), &pauli(j)) * Complex64::from(state.cross[(i, j)]);
        }
    }
    let rho = DensityMatrix::from_entries(m * Complex64::from(0.25)).expect("4x4 is square");
    let min_eigenvalue = rho.min_eigenvalue();
    Composed {
        rho,
        min_eigenvalue,
    }
}

/// `tr(rho^2)`.
pub fn purity(state: &TwoQubitBlochState) -> f64 {
    (1.0 + state.s.norm_squared() + state.t.norm_squared() + state.cross.norm_squared()) / 4.0
}

/// `tr(E^T E)` with `E = C - s t^T`.
pub fn entanglement_degree(state: &TwoQubitBlochState) -> f64 {
    state.entangled_dyadic().norm_squared()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerParameters {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub is_werner: bool,
    /// Largest of `|s|_inf`, `|t|_inf` and the off-diagonal `|C_ij|`.
    pub residual: f64,
}

pub fn werner_parameters(state: &TwoQubitBlochState, tol: f64) -> WernerParameters {
    let mut residual = state.s.abs().max().max(state.t.abs().max());
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                residual = residual.max(state.cross[(i, j)].abs());
            }
        }
    }
    WernerParameters {
        x1: state.cross[(0, 0)],
        x2: state.cross[(1, 1)],
        x3: state.cross[(2, 2)],
        is_werner: residual < tol,
        residual,
    }
}

/// Sum of the moduli of the negative partial-transpose eigenvalues.
/// Not part of the dyadic analysis; reported alongside it as a cross-check.
pub fn negativity(rho: &DensityMatrix) -> Result<f64> {
    let pt = rho.partial_transpose_second()?;
    Ok(pt
        .eigenvalues()
        .iter()
        .filter(|&&v| v < 0.0)
        .map(|v| -v)
        .sum())
}
