//! Standard one-qubit teleportation over a two-atom channel.
//!
//! Qubits are ordered `(u, A, B)`: the unknown qubit, the sender's channel
//! atom (atom 1) and the receiver's channel atom (atom 2), each in the
//! `(e, g)` basis. The gates treat `e` as the computational `|1>`: the CNOT
//! flips `A` when `u = e`, and the Hadamard maps `|g> -> (|g> + |e>)/sqrt2`.
//! Measurement outcomes are labelled `(u, A)`.

use nalgebra::{DMatrix, Matrix2, Vector3};
use num_complex::Complex64;

use crate::closed_form::{CoefficientTable, ManifoldSums};
use crate::density::{pauli, to_dynamic, DensityMatrix, ONE, ZERO};
use crate::error::{Error, Result};

pub const INPUT_NORM_TOL: f64 = 1e-10;

/// Probability below which a branch is treated as never occurring.
const NULL_BRANCH: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnknownQubit {
    /// Amplitude of `e`.
    pub alpha: Complex64,
    /// Amplitude of `g`.
    pub beta: Complex64,
}

impl UnknownQubit {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > INPUT_NORM_TOL {
            return Err(Error::Domain(format!(
                "unknown qubit has |alpha|^2 + |beta|^2 = {norm}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// `|+x> = (|e> + |g>)/sqrt2`, Bloch vector `(1, 0, 0)`.
    pub fn plus_x() -> Self {
        let h = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
        Self { alpha: h, beta: h }
    }

    pub fn su(&self) -> Vector3<f64> {
        let cross = self.alpha * self.beta.conj();
        Vector3::new(
            2.0 * cross.re,
            -2.0 * cross.im,
            self.alpha.norm_sqr() - self.beta.norm_sqr(),
        )
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        [self.alpha, self.beta]
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(&self.amplitudes())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    EE,
    EG,
    GE,
    GG,
}

impl Branch {
    pub const ALL: [Branch; 4] = [Branch::EE, Branch::EG, Branch::GE, Branch::GG];

    /// `(u, A)` basis indices, `e = 0`.
    fn indices(self) -> (usize, usize) {
        match self {
            Branch::EE => (0, 0),
            Branch::EG => (0, 1),
            Branch::GE => (1, 0),
            Branch::GG => (1, 1),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Branch::EE => "ee",
            Branch::EG => "eg",
            Branch::GE => "ge",
            Branch::GG => "gg",
        }
    }

    /// Receiver's correction, applied to the conditional state.
    pub fn correction(self) -> Matrix2<Complex64> {
        match self {
            Branch::GG => Matrix2::identity(),
            Branch::GE => pauli(0),
            Branch::EG => pauli(2),
            Branch::EE => pauli(2) * pauli(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeleportOutcome {
    pub branch: Branch,
    pub probability: f64,
    /// Corrected and normalized receiver state.
    pub bob_state: DensityMatrix,
    /// Bloch vector of `bob_state`.
    pub sb: Vector3<f64>,
    /// Bloch vector of twice the unnormalized, uncorrected receiver state,
    /// i.e. `2 p s` with `s` the conditional pre-correction vector. This is
    /// the scale on which [`closed_form_bob`] is expressed.
    pub raw_sb: Vector3<f64>,
}

impl TeleportOutcome {
    /// Conditional pre-correction Bloch vector `raw_sb / (2 p)`.
    pub fn normalized_raw_sb(&self) -> Vector3<f64> {
        if self.probability < NULL_BRANCH {
            Vector3::zeros()
        } else {
            self.raw_sb / (2.0 * self.probability)
        }
    }
}

fn bloch_of(rho: &DMatrix<Complex64>) -> Vector3<f64> {
    let r = DensityMatrix::from_entries(rho.clone()).expect("2x2 is square");
    Vector3::from_fn(|i, _| r.expectation(&to_dynamic(&pauli(i))).re)
}

/// `H(u) CNOT(u -> A)` on the three-qubit space.
fn protocol_unitary() -> DMatrix<Complex64> {
    let mut cnot = DMatrix::<Complex64>::zeros(8, 8);
    for u in 0..2 {
        for a in 0..2 {
            for b in 0..2 {
                let target = if u == 0 { 1 - a } else { a };
                cnot[(4 * u + 2 * target + b, 4 * u + 2 * a + b)] = ONE;
            }
        }
    }
    let h = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
    let hadamard = DMatrix::from_row_slice(2, 2, &[-h, h, h, h]);
    hadamard.kronecker(&DMatrix::identity(4, 4)) * cnot
}

pub fn circuit_teleport(
    channel: &DensityMatrix,
    input: &UnknownQubit,
) -> Result<[TeleportOutcome; 4]> {
    if channel.dim() != 4 {
        return Err(Error::Domain(format!(
            "channel must be 4x4, got {}",
            channel.dim()
        )));
    }
    let report = channel.physicality();
    if !report.is_physical() {
        return Err(Error::Physicality(format!("channel: {report:?}")));
    }
    let joint = input.density().entries().kronecker(channel.entries());
    let u = protocol_unitary();
    let evolved = &u * joint * u.adjoint();

    Ok(Branch::ALL.map(|branch| {
        let (xu, xa) = branch.indices();
        let base = 4 * xu + 2 * xa;
        let bob = DMatrix::from_fn(2, 2, |r, c| evolved[(base + r, base + c)]);
        let probability = bob.trace().re.max(0.0);
        let raw_sb = bloch_of(&bob) * 2.0;
        let bob_state = if probability < NULL_BRANCH {
            DensityMatrix::maximally_mixed(2)
        } else {
            let fix = to_dynamic(&branch.correction());
            let corrected = &fix * bob * fix.adjoint() / Complex64::from(probability);
            DensityMatrix::from_entries(corrected).expect("2x2 is square")
        };
        let sb = bloch_of(bob_state.entries());
        TeleportOutcome {
            branch,
            probability,
            bob_state,
            sb,
            raw_sb,
        }
    }))
}

/// Receiver's `ee`-branch vector, uncorrected, on the `2 p s` scale,
/// evaluated from the field-traced channel sums.
pub fn bob_from_sums(input: &UnknownQubit, sums: &ManifoldSums) -> Vector3<f64> {
    let (a, b) = (input.alpha, input.beta);
    let (aa, bb) = (a.norm_sqr(), b.norm_sqr());
    let [p1, p2, p3, p4] = sums.populations;
    let off = sums.ge_gg * aa - a * b.conj() * sums.eg_ge.conj() - a.conj() * b * sums.ee_gg
        + sums.ee_eg * bb;
    let z = aa * (p3 - p4) + bb * (p1 - p2) - 2.0 * (a.conj() * b * (sums.ee_ge - sums.eg_gg)).re;
    Vector3::new(2.0 * off.re, -2.0 * off.im, z)
}

pub fn closed_form_bob(input: &UnknownQubit, coefficients: &CoefficientTable) -> Vector3<f64> {
    bob_from_sums(input, &coefficients.manifold_sums())
}

/// `(1 + su . sb) / 4`.
pub fn fidelity_paper(su: &Vector3<f64>, sb: &Vector3<f64>) -> f64 {
    (1.0 + su.dot(sb)) / 4.0
}

/// `<psi_u| rho_bob |psi_u>`.
pub fn fidelity_overlap(input: &UnknownQubit, bob_state: &DensityMatrix) -> f64 {
    let psi = input.amplitudes();
    let rho = bob_state.entries();
    let mut acc = ZERO;
    for r in 0..2 {
        for c in 0..2 {
            acc += psi[r].conj() * rho[(r, c)] * psi[c];
        }
    }
    acc.re
}

pub fn average_fidelity(outcomes: &[TeleportOutcome], input: &UnknownQubit) -> f64 {
    outcomes
        .iter()
        .map(|o| o.probability * fidelity_overlap(input, &o.bob_state))
        .sum()
}

/// How the closed-form receiver vector compares with the circuit's `ee`
/// branch under the two possible normalizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationComparison {
    /// Against `2 p s` (unnormalized).
    pub unnormalized_deviation: f64,
    /// Against the conditional vector `s`.
    pub normalized_deviation: f64,
}

impl NormalizationComparison {
    pub fn agreeing(&self, tol: f64) -> (bool, bool) {
        (
            self.unnormalized_deviation < tol,
            self.normalized_deviation < tol,
        )
    }
}

pub fn compare_normalizations(
    closed: &Vector3<f64>,
    ee: &TeleportOutcome,
) -> NormalizationComparison {
    NormalizationComparison {
        unnormalized_deviation: (closed - ee.raw_sb).abs().max(),
        normalized_deviation: (closed - ee.normalized_raw_sb()).abs().max(),
    }
}
