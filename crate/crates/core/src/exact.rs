//! Exact evolution on the truncated atom (x) atom (x) Fock space.
//!
//! The interaction couples `|ee,n>`, `|eg,n+m>`, `|ge,n+m>` and `|gg,n+2m>`
//! only among themselves, so the Hamiltonian is block diagonal over these
//! excitation manifolds. Each block (at most 4x4) is diagonalized once and
//! the state is propagated as `V exp(-i E t) V^T psi`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::algebra::{DeformationParameter, FieldSpec};
use crate::density::{DensityMatrix, ZERO};
use crate::error::{Error, Result};

pub const NORM_TOL: f64 = 1e-12;

/// Two-atom levels in basis order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomicLevel {
    EE,
    EG,
    GE,
    GG,
}

impl AtomicLevel {
    pub const ALL: [AtomicLevel; 4] = [Self::EE, Self::EG, Self::GE, Self::GG];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Number of atoms in `g`; the Fock index of this level in manifold `n`
    /// is `n + m * lowered()`.
    pub fn lowered(self) -> i64 {
        match self {
            Self::EE => 0,
            Self::EG | Self::GE => 1,
            Self::GG => 2,
        }
    }

    /// `sigma_z + tau_z` eigenvalue.
    pub fn total_inversion(self) -> f64 {
        match self {
            Self::EE => 2.0,
            Self::EG | Self::GE => 0.0,
            Self::GG => -2.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::EE => "ee",
            Self::EG => "eg",
            Self::GE => "ge",
            Self::GG => "gg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianSpec {
    pub lambda1: f64,
    pub lambda2: f64,
    pub m: u32,
    pub q: DeformationParameter,
    /// `Delta = varpi_0 - omega`; zero selects the resonant interaction picture.
    pub detuning: f64,
    /// `varpi_0`, only read when `detuning != 0`.
    pub field_freq: f64,
}

impl HamiltonianSpec {
    pub fn resonant(lambda: f64, m: u32, q: DeformationParameter) -> Result<Self> {
        let spec = Self {
            lambda1: lambda,
            lambda2: lambda,
            m,
            q,
            detuning: 0.0,
            field_freq: 0.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::Config("photon multiplicity m must be >= 1".into()));
        }
        if !(self.lambda1 > 0.0 && self.lambda2 > 0.0) {
            return Err(Error::Config(format!(
                "couplings must be positive, got lambda1 = {}, lambda2 = {}",
                self.lambda1, self.lambda2
            )));
        }
        if !self.detuning.is_finite() || !self.field_freq.is_finite() {
            return Err(Error::Config("frequencies must be finite".into()));
        }
        Ok(())
    }

    pub fn atom_freq(&self) -> f64 {
        self.field_freq - self.detuning
    }

    pub fn is_resonant(&self) -> bool {
        self.detuning == 0.0
    }

    fn diagonal(&self, level: AtomicLevel, fock: usize) -> f64 {
        if self.is_resonant() {
            0.0
        } else {
            self.field_freq * self.q.q_number(fock as u64)
                + 0.5 * self.atom_freq() * level.total_inversion()
        }
    }

    /// `<n| a_q^m |n+m>`.
    fn ladder(&self, low: usize) -> f64 {
        self.q.ladder_power_element(low as u64, self.m as u64)
    }
}

/// Amplitudes `a1..a4` on `|ee>, |eg>, |ge>, |gg>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomicInitialState {
    amplitudes: [Complex64; 4],
}

impl AtomicInitialState {
    pub fn new(amplitudes: [Complex64; 4]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain(format!(
                "atomic amplitudes have squared norm {norm}, expected 1"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Renormalizes when the squared norm is within `tolerance` of 1; the
    /// flag reports whether rescaling happened.
    pub fn renormalized(amplitudes: [Complex64; 4], tolerance: f64) -> Result<(Self, bool)> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() <= NORM_TOL {
            return Ok((Self { amplitudes }, false));
        }
        if (norm - 1.0).abs() > tolerance {
            return Err(Error::Domain(format!(
                "atomic amplitudes have squared norm {norm}, too far from 1 to renormalize"
            )));
        }
        let scale = norm.sqrt().recip();
        Ok((
            Self {
                amplitudes: amplitudes.map(|a| a * scale),
            },
            true,
        ))
    }

    pub fn excited() -> Self {
        Self {
            amplitudes: [Complex64::from(1.0), ZERO, ZERO, ZERO],
        }
    }

    pub fn amplitudes(&self) -> &[Complex64; 4] {
        &self.amplitudes
    }

    pub fn amplitude(&self, level: AtomicLevel) -> Complex64 {
        self.amplitudes[level.index()]
    }
}

/// Pure state on the truncated composite space, indexed
/// `level * (cutoff + 1) + fock`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeState {
    cutoff: usize,
    amplitudes: DVector<Complex64>,
}

impl CompositeState {
    pub fn from_amplitudes(cutoff: usize, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != 4 * (cutoff + 1) {
            return Err(Error::Domain(format!(
                "composite state needs {} amplitudes, got {}",
                4 * (cutoff + 1),
                amplitudes.len()
            )));
        }
        Ok(Self { cutoff, amplitudes })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn index(&self, level: AtomicLevel, fock: usize) -> usize {
        composite_index(self.cutoff, level, fock)
    }

    pub fn amplitude(&self, level: AtomicLevel, fock: usize) -> Complex64 {
        self.amplitudes[self.index(level, fock)]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }
}

fn composite_index(cutoff: usize, level: AtomicLevel, fock: usize) -> usize {
    level.index() * (cutoff + 1) + fock
}

/// `sum_n W_n a_k |k, n>`.
pub fn initial_composite_state(atoms: &AtomicInitialState, field: &FieldSpec) -> CompositeState {
    let cutoff = field.cutoff();
    let mut amplitudes = DVector::from_element(4 * (cutoff + 1), ZERO);
    for level in AtomicLevel::ALL {
        for (n, &w) in field.weights().iter().enumerate() {
            amplitudes[composite_index(cutoff, level, n)] = atoms.amplitude(level) * w;
        }
    }
    CompositeState { cutoff, amplitudes }
}

/// Composite indices belonging to manifold `n`, in level order, skipping
/// states outside `0..=cutoff`.
fn manifold_members(n: i64, m: u32, cutoff: usize) -> Vec<(AtomicLevel, usize)> {
    AtomicLevel::ALL
        .iter()
        .filter_map(|&level| {
            let fock = n + m as i64 * level.lowered();
            (0..=cutoff as i64)
                .contains(&fock)
                .then_some((level, fock as usize))
        })
        .collect()
}

fn coupling(spec: &HamiltonianSpec, a: (AtomicLevel, usize), b: (AtomicLevel, usize)) -> f64 {
    use AtomicLevel::*;
    let ((la, fa), (lb, fb)) = if a.0 <= b.0 { (a, b) } else { (b, a) };
    if fb != fa + spec.m as usize {
        return 0.0;
    }
    match (la, lb) {
        // tau_+ a_q^m takes |eg,n+m> to |ee,n>
        (EE, EG) => spec.lambda2 * spec.ladder(fa),
        (EE, GE) => spec.lambda1 * spec.ladder(fa),
        (EG, GG) => spec.lambda1 * spec.ladder(fa),
        (GE, GG) => spec.lambda2 * spec.ladder(fa),
        _ => 0.0,
    }
}

fn manifold_block(spec: &HamiltonianSpec, members: &[(AtomicLevel, usize)]) -> DMatrix<f64> {
    let d = members.len();
    DMatrix::from_fn(d, d, |r, c| {
        if r == c {
            spec.diagonal(members[r].0, members[r].1)
        } else {
            coupling(spec, members[r], members[c])
        }
    })
}

fn manifold_range(m: u32, cutoff: usize) -> std::ops::RangeInclusive<i64> {
    -2 * m as i64..=cutoff as i64
}

/// Full Hamiltonian on the composite space (real symmetric; in the
/// resonant case only the interaction term survives).
pub fn build_hamiltonian(spec: &HamiltonianSpec, cutoff: usize) -> Result<DMatrix<f64>> {
    spec.validate()?;
    if cutoff < 2 * spec.m as usize {
        return Err(Error::Config(format!(
            "cutoff {cutoff} below 2m = {}",
            2 * spec.m
        )));
    }
    let dim = 4 * (cutoff + 1);
    let mut h = DMatrix::zeros(dim, dim);
    for n in manifold_range(spec.m, cutoff) {
        let members = manifold_members(n, spec.m, cutoff);
        let block = manifold_block(spec, &members);
        for (r, &a) in members.iter().enumerate() {
            for (c, &b) in members.iter().enumerate() {
                h[(
                    composite_index(cutoff, a.0, a.1),
                    composite_index(cutoff, b.0, b.1),
                )] = block[(r, c)];
            }
        }
    }
    Ok(h)
}

#[derive(Debug, Clone)]
struct BlockEigen {
    indices: Vec<usize>,
    energies: Vec<f64>,
    vectors: DMatrix<f64>,
}

/// Cached block eigendecompositions for one Hamiltonian and cutoff.
/// Immutable after construction; `evolve` may be called concurrently.
#[derive(Debug, Clone)]
pub struct Propagator {
    spec: HamiltonianSpec,
    cutoff: usize,
    blocks: Vec<BlockEigen>,
}

impl Propagator {
    pub fn new(spec: HamiltonianSpec, cutoff: usize) -> Result<Self> {
        spec.validate()?;
        if cutoff < 2 * spec.m as usize {
            return Err(Error::Config(format!(
                "cutoff {cutoff} below 2m = {}",
                2 * spec.m
            )));
        }
        let blocks = manifold_range(spec.m, cutoff)
            .map(|n| {
                let members = manifold_members(n, spec.m, cutoff);
                let block = manifold_block(&spec, &members);
                let eig = SymmetricEigen::new(block);
                BlockEigen {
                    indices: members
                        .iter()
                        .map(|&(l, f)| composite_index(cutoff, l, f))
                        .collect(),
                    energies: eig.eigenvalues.iter().copied().collect(),
                    vectors: eig.eigenvectors,
                }
            })
            .filter(|b| !b.indices.is_empty())
            .collect();
        Ok(Self {
            spec,
            cutoff,
            blocks,
        })
    }

    pub fn spec(&self) -> &HamiltonianSpec {
        &self.spec
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// `exp(-i H t) psi`, with `t` in units of the inverse coupling.
    pub fn evolve(&self, state: &CompositeState, t: f64) -> Result<CompositeState> {
        if state.cutoff != self.cutoff {
            return Err(Error::Config(format!(
                "state cutoff {} does not match propagator cutoff {}",
                state.cutoff, self.cutoff
            )));
        }
        if t < 0.0 {
            return Err(Error::Domain(format!("negative time {t}")));
        }
        let mut out = DVector::from_element(state.amplitudes.len(), ZERO);
        for block in &self.blocks {
            let d = block.indices.len();
            for (k, &energy) in block.energies.iter().enumerate() {
                let mut overlap = ZERO;
                for r in 0..d {
                    overlap += state.amplitudes[block.indices[r]] * block.vectors[(r, k)];
                }
                if overlap == ZERO {
                    continue;
                }
                let phase = Complex64::from_polar(1.0, -energy * t);
                let coeff = overlap * phase;
                for r in 0..d {
                    out[block.indices[r]] += coeff * block.vectors[(r, k)];
                }
            }
        }
        Ok(CompositeState {
            cutoff: self.cutoff,
            amplitudes: out,
        })
    }
}

pub fn propagate(state: &CompositeState, spec: &HamiltonianSpec, t: f64) -> Result<CompositeState> {
    Propagator::new(*spec, state.cutoff)?.evolve(state, t)
}

/// Partial trace over the field: `rho[k, l] = sum_n psi[k, n] psi[l, n]^*`.
pub fn reduced_atomic_state(state: &CompositeState) -> DensityMatrix {
    let rho = DMatrix::from_fn(4, 4, |k, l| {
        let (lk, ll) = (AtomicLevel::ALL[k], AtomicLevel::ALL[l]);
        (0..=state.cutoff)
            .map(|n| state.amplitude(lk, n) * state.amplitude(ll, n).conj())
            .sum()
    });
    DensityMatrix::from_entries(rho).expect("4x4 is square")
}

/// Reduced state of the field, `rho_f[n, n'] = sum_k psi[k, n] psi[k, n']^*`.
pub fn reduced_field_state(state: &CompositeState) -> DensityMatrix {
    let d = state.cutoff + 1;
    let rho = DMatrix::from_fn(d, d, |n, n2| {
        AtomicLevel::ALL
            .iter()
            .map(|&l| state.amplitude(l, n) * state.amplitude(l, n2).conj())
            .sum()
    });
    DensityMatrix::from_entries(rho).expect("square")
}
