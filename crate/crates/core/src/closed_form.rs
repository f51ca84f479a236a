//! Analytic manifold amplitudes and the Bloch/dyadic state built from them.
//!
//! At resonance with equal couplings the state at time `t` is
//! `sum_n c1_n |ee,n> + c2_n |eg,n+m> + c3_n |ge,n+m> + c4_n |gg,n+2m>`
//! with
//!
//! ```text
//! c1 = a1 W_n     - nu1 B sin^2(mu t)/mu^2 - i nu1 (a2 + a3) W_{n+m} sin(2 mu t)/(2 mu)
//! c2 = W_{n+m} (a2 cos^2(mu t) - a3 sin^2(mu t)) - i B sin(2 mu t)/(2 mu)
//! c3 = W_{n+m} (a3 cos^2(mu t) - a2 sin^2(mu t)) - i B sin(2 mu t)/(2 mu)
//! c4 = a4 W_{n+2m} - nu2 B sin^2(mu t)/mu^2 - i nu2 (a2 + a3) W_{n+m} sin(2 mu t)/(2 mu)
//! B  = a1 nu1 W_n + a4 nu2 W_{n+2m}
//! ```
//!
//! Manifolds `n = -2m..-1` hold the states below `|ee,0>`'s manifold
//! (`|eg,k>`, `|ge,k>` with `k < m`, `|gg,k>` with `k < 2m`); their `nu`'s
//! vanish where a state is missing, so the same expressions cover them.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::algebra::{ladder_couplings, FieldSpec, LadderCouplings};
use crate::analysis::TwoQubitBlochState;
use crate::density::{I, ZERO};
use crate::error::{Error, Result};
use crate::exact::{AtomicInitialState, HamiltonianSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeQuadruple {
    pub n: i64,
    /// `c^(1..4)` on `|ee,n>`, `|eg,n+m>`, `|ge,n+m>`, `|gg,n+2m>`.
    pub c: [Complex64; 4],
}

impl AmplitudeQuadruple {
    pub fn norm_sqr(&self) -> f64 {
        self.c.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// `sin^2(mu t) / mu^2`, continuous at `mu = 0`.
fn sin_sq_over_mu_sq(mu: f64, t: f64) -> f64 {
    let x = mu * t;
    if x.abs() < 1e-4 {
        t * t * (1.0 - x * x / 3.0)
    } else {
        (x.sin() / mu).powi(2)
    }
}

/// `sin(2 mu t) / (2 mu)`, continuous at `mu = 0`.
fn sin_double_over_double_mu(mu: f64, t: f64) -> f64 {
    let x = 2.0 * mu * t;
    if x.abs() < 1e-4 {
        t * (1.0 - x * x / 6.0)
    } else {
        x.sin() / (2.0 * mu)
    }
}

fn check_supported(spec: &HamiltonianSpec) -> Result<()> {
    spec.validate()?;
    if spec.lambda1 != spec.lambda2 {
        return Err(Error::UnsupportedConfiguration(format!(
            "unequal couplings lambda1 = {}, lambda2 = {}",
            spec.lambda1, spec.lambda2
        )));
    }
    if spec.detuning != 0.0 {
        return Err(Error::UnsupportedConfiguration(format!(
            "nonzero detuning {}",
            spec.detuning
        )));
    }
    Ok(())
}

fn quadruple(
    couplings: &LadderCouplings,
    t: f64,
    atoms: &AtomicInitialState,
    field: &FieldSpec,
) -> AmplitudeQuadruple {
    let n = couplings.n;
    let m = couplings.m as i64;
    let [a1, a2, a3, a4] = *atoms.amplitudes();
    let x1 = a1 * field.weight(n);
    let x2 = a2 * field.weight(n + m);
    let x3 = a3 * field.weight(n + m);
    let x4 = a4 * field.weight(n + 2 * m);
    let (nu1, nu2, mu) = (couplings.nu1, couplings.nu2, couplings.mu);

    let bright = x1 * nu1 + x4 * nu2;
    let sin_sq = sin_sq_over_mu_sq(mu, t);
    let half_sin = sin_double_over_double_mu(mu, t);
    let cos2 = (mu * t).cos().powi(2);
    let sin2 = (mu * t).sin().powi(2);

    let c1 = x1 - bright * (nu1 * sin_sq) - I * (x2 + x3) * (nu1 * half_sin);
    let c2 = x2 * cos2 - x3 * sin2 - I * bright * half_sin;
    let c3 = x3 * cos2 - x2 * sin2 - I * bright * half_sin;
    let c4 = x4 - bright * (nu2 * sin_sq) - I * (x2 + x3) * (nu2 * half_sin);
    AmplitudeQuadruple {
        n,
        c: [c1, c2, c3, c4],
    }
}

/// Amplitudes of manifold `n` at time `t` (units of the inverse coupling).
pub fn amplitude_quadruple(
    n: i64,
    t: f64,
    atoms: &AtomicInitialState,
    field: &FieldSpec,
    spec: &HamiltonianSpec,
) -> Result<AmplitudeQuadruple> {
    check_supported(spec)?;
    let couplings = ladder_couplings(n, spec.m, spec.lambda1, spec.q);
    Ok(quadruple(&couplings, t, atoms, field))
}

/// Per-manifold amplitudes at one time, `n = -2m ..= cutoff - 2m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    m: u32,
    n_min: i64,
    rows: Vec<AmplitudeQuadruple>,
}

impl CoefficientTable {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn rows(&self) -> &[AmplitudeQuadruple] {
        &self.rows
    }

    /// `c^(level+1)_n`; zero outside the table.
    pub fn get(&self, level: usize, n: i64) -> Complex64 {
        let offset = n - self.n_min;
        if offset < 0 {
            return ZERO;
        }
        self.rows
            .get(offset as usize)
            .map_or(ZERO, |row| row.c[level])
    }

    /// `sum_n sum_i |c^(i)_n|^2`.
    pub fn total_norm(&self) -> f64 {
        self.rows.iter().map(AmplitudeQuadruple::norm_sqr).sum()
    }

    /// `sum_n c^(a)_n c^(b)*_{n+shift}`.
    fn correlate(&self, a: usize, b: usize, shift: i64) -> Complex64 {
        self.rows
            .iter()
            .map(|row| row.c[a] * self.get(b, row.n + shift).conj())
            .sum()
    }

    /// Field-traced two-atom populations and coherences.
    pub fn manifold_sums(&self) -> ManifoldSums {
        let m = self.m as i64;
        let mut populations = [0.0; 4];
        for row in &self.rows {
            for (p, c) in populations.iter_mut().zip(row.c.iter()) {
                *p += c.norm_sqr();
            }
        }
        ManifoldSums {
            populations,
            ee_eg: self.correlate(0, 1, -m),
            ee_ge: self.correlate(0, 2, -m),
            ee_gg: self.correlate(0, 3, -2 * m),
            eg_ge: self.correlate(1, 2, 0),
            eg_gg: self.correlate(1, 3, -m),
            ge_gg: self.correlate(2, 3, -m),
        }
    }
}

/// The independent entries of the reduced two-atom density matrix, each a
/// sum over manifolds of amplitude products: e.g. `ee_ge = sum_n c1_n c3*_{n-m}`
/// and `ee_gg = sum_n c1_n c4*_{n-2m}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldSums {
    /// `ee, eg, ge, gg`.
    pub populations: [f64; 4],
    pub ee_eg: Complex64,
    pub ee_ge: Complex64,
    pub ee_gg: Complex64,
    pub eg_ge: Complex64,
    pub eg_gg: Complex64,
    pub ge_gg: Complex64,
}

impl ManifoldSums {
    /// Sums for a pure atomic state (a single "manifold" with unit weight).
    pub fn from_atoms(atoms: &AtomicInitialState) -> Self {
        let a = atoms.amplitudes();
        let mut populations = [0.0; 4];
        for (p, z) in populations.iter_mut().zip(a.iter()) {
            *p = z.norm_sqr();
        }
        Self {
            populations,
            ee_eg: a[0] * a[1].conj(),
            ee_ge: a[0] * a[2].conj(),
            ee_gg: a[0] * a[3].conj(),
            eg_ge: a[1] * a[2].conj(),
            eg_gg: a[1] * a[3].conj(),
            ge_gg: a[2] * a[3].conj(),
        }
    }

    pub fn bloch(&self) -> TwoQubitBlochState {
        let [p1, p2, p3, p4] = self.populations;
        let re = |z: Complex64| 2.0 * z.re;
        let im = |z: Complex64| 2.0 * z.im;

        let s = Vector3::new(
            re(self.ee_ge + self.eg_gg),
            -im(self.ee_ge + self.eg_gg),
            p1 + p2 - p3 - p4,
        );
        let t = Vector3::new(
            re(self.ee_eg + self.ge_gg),
            -im(self.ee_eg + self.ge_gg),
            p1 - p2 + p3 - p4,
        );
        #[rustfmt::skip]
        let cross = Matrix3::new(
            re(self.ee_gg + self.eg_ge),
            im(self.eg_ge) - im(self.ee_gg),
            re(self.ee_ge - self.eg_gg),

            -im(self.ee_gg + self.eg_ge),
            re(self.eg_ge) - re(self.ee_gg),
            im(self.eg_gg) - im(self.ee_ge),

            re(self.ee_eg - self.ge_gg),
            im(self.ge_gg) - im(self.ee_eg),
            p1 - p2 - p3 + p4,
        );
        TwoQubitBlochState { s, t, cross }
    }
}

pub fn initial_bloch(atoms: &AtomicInitialState) -> TwoQubitBlochState {
    ManifoldSums::from_atoms(atoms).bloch()
}

/// Closed-form engine for one configuration; the manifold couplings are
/// computed once and shared across time points.
#[derive(Debug, Clone)]
pub struct ClosedForm {
    atoms: AtomicInitialState,
    field: FieldSpec,
    spec: HamiltonianSpec,
    couplings: Vec<LadderCouplings>,
}

impl ClosedForm {
    pub fn new(atoms: AtomicInitialState, field: FieldSpec, spec: HamiltonianSpec) -> Result<Self> {
        check_supported(&spec)?;
        let m = spec.m as i64;
        let cutoff = field.cutoff() as i64;
        if cutoff < 2 * m {
            return Err(Error::Config(format!(
                "cutoff {cutoff} below 2m = {}",
                2 * m
            )));
        }
        let couplings = (-2 * m..=cutoff - 2 * m)
            .map(|n| ladder_couplings(n, spec.m, spec.lambda1, spec.q))
            .collect();
        Ok(Self {
            atoms,
            field,
            spec,
            couplings,
        })
    }

    pub fn spec(&self) -> &HamiltonianSpec {
        &self.spec
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn atoms(&self) -> &AtomicInitialState {
        &self.atoms
    }

    pub fn coefficients(&self, t: f64) -> CoefficientTable {
        CoefficientTable {
            m: self.spec.m,
            n_min: -2 * self.spec.m as i64,
            rows: self
                .couplings
                .iter()
                .map(|c| quadruple(c, t, &self.atoms, &self.field))
                .collect(),
        }
    }

    pub fn bloch(&self, t: f64) -> TwoQubitBlochState {
        self.coefficients(t).manifold_sums().bloch()
    }
}

pub fn evolved_bloch(
    t: f64,
    atoms: &AtomicInitialState,
    field: &FieldSpec,
    spec: &HamiltonianSpec,
) -> Result<TwoQubitBlochState> {
    Ok(ClosedForm::new(*atoms, field.clone(), *spec)?.bloch(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{choose_cutoff, coherent_weights, DeformationParameter};
    use crate::analysis::decompose;
    use crate::density::DensityMatrix;
    use crate::exact::{initial_composite_state, reduced_atomic_state, Propagator};
    use proptest::prelude::*;

    fn q(v: f64) -> DeformationParameter {
        DeformationParameter::new(v).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::from(re)
    }

    fn assert_state_close(a: &TwoQubitBlochState, b: &TwoQubitBlochState, tol: f64) {
        let d = a.max_abs_diff(b);
        assert!(d < tol, "states differ by {d}\n{a:?}\n{b:?}");
    }

    #[test]
    fn initial_bloch_examples() {
        let ee = initial_bloch(&AtomicInitialState::excited());
        assert_eq!(ee.s, Vector3::new(0.0, 0.0, 1.0));
        assert_eq!(ee.t, Vector3::new(0.0, 0.0, 1.0));
        assert_eq!(
            ee.cross,
            Matrix3::from_diagonal(&Vector3::new(0.0, 0.0, 1.0))
        );

        let eg = initial_bloch(&AtomicInitialState::new([c(0.0), c(1.0), c(0.0), c(0.0)]).unwrap());
        assert_eq!((eg.s.z, eg.t.z, eg.cross[(2, 2)]), (1.0, -1.0, -1.0));

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = initial_bloch(&AtomicInitialState::new([c(h), c(0.0), c(0.0), c(h)]).unwrap());
        assert!(bell.s.norm() < 1e-15 && bell.t.norm() < 1e-15);
        let diag = Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0));
        assert!((bell.cross - diag).abs().max() < 1e-15);
    }

    proptest! {
        #[test]
        fn initial_bloch_is_the_pauli_decomposition(
            parts in proptest::collection::vec(-1.0f64..1.0, 8)
        ) {
            let raw: Vec<Complex64> = parts.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
            let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            prop_assume!(norm > 1e-3);
            let a = [raw[0] / norm, raw[1] / norm, raw[2] / norm, raw[3] / norm];
            let atoms = AtomicInitialState::new(a).unwrap();
            let direct = decompose(&DensityMatrix::from_pure(&a)).unwrap();
            prop_assert!(initial_bloch(&atoms).max_abs_diff(&direct) < 1e-12);
        }
    }

    #[test]
    fn zero_time_amplitudes() {
        let field = coherent_weights(10.0, 45).unwrap();
        let a = [c(0.5), Complex64::new(0.0, 0.5), c(-0.5), c(0.5)];
        let atoms = AtomicInitialState::new(a).unwrap();
        for m in 1..=2u32 {
            let spec = HamiltonianSpec::resonant(1.0, m, q(0.9)).unwrap();
            let mi = m as i64;
            for n in 0..20 {
                let quad = amplitude_quadruple(n, 0.0, &atoms, &field, &spec).unwrap();
                let expect = [
                    a[0] * field.weight(n),
                    a[1] * field.weight(n + mi),
                    a[2] * field.weight(n + mi),
                    a[3] * field.weight(n + 2 * mi),
                ];
                for (got, want) in quad.c.iter().zip(expect) {
                    assert!((got - want).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn vacuum_amplitude_follows_rabi_law() {
        let field = coherent_weights(0.0, 2).unwrap();
        let spec = HamiltonianSpec::resonant(1.0, 1, q(1.0)).unwrap();
        let atoms = AtomicInitialState::excited();
        for k in 0..100 {
            let t = 0.1 * k as f64;
            let quad = amplitude_quadruple(0, t, &atoms, &field, &spec).unwrap();
            let expect = 1.0 - 2.0 / 3.0 * (1.5f64.sqrt() * t).sin().powi(2);
            assert!((quad.c[0] - c(expect)).norm() < 1e-12);
            assert!((quad.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unsupported_configurations_are_rejected() {
        let field = coherent_weights(1.0, 20).unwrap();
        let atoms = AtomicInitialState::excited();
        let mut spec = HamiltonianSpec::resonant(1.0, 1, q(0.5)).unwrap();
        spec.lambda2 = 0.5;
        let err = amplitude_quadruple(0, 1.0, &atoms, &field, &spec).unwrap_err();
        assert!(matches!(err, Error::UnsupportedConfiguration(_)));
        assert!(err.to_string().contains("exact engine"));

        let mut spec = HamiltonianSpec::resonant(1.0, 1, q(0.5)).unwrap();
        spec.detuning = 0.2;
        assert!(matches!(
            evolved_bloch(1.0, &atoms, &field, &spec),
            Err(Error::UnsupportedConfiguration(_))
        ));
    }

    #[test]
    fn zero_time_state_matches_initial_bloch() {
        let field = coherent_weights(10.0, choose_cutoff(10.0, 2, 1e-12).unwrap()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let atoms =
            AtomicInitialState::new([c(h), Complex64::new(0.0, 0.5), c(0.5), c(0.0)]).unwrap();
        for m in 1..=2 {
            let spec = HamiltonianSpec::resonant(1.0, m, q(0.5)).unwrap();
            let b0 = evolved_bloch(0.0, &atoms, &field, &spec).unwrap();
            assert_state_close(&b0, &initial_bloch(&atoms), 1e-10);
        }
    }

    #[test]
    fn symmetric_initial_state_gives_identical_atoms() {
        let field = coherent_weights(5.0, choose_cutoff(5.0, 1, 1e-12).unwrap()).unwrap();
        let atoms = AtomicInitialState::new([c(0.6), c(0.0), c(0.0), c(0.8)]).unwrap();
        let engine = ClosedForm::new(
            atoms,
            field,
            HamiltonianSpec::resonant(1.0, 1, q(0.9)).unwrap(),
        )
        .unwrap();
        for k in 0..40 {
            let state = engine.bloch(0.25 * k as f64);
            assert!((state.s - state.t).norm() < 1e-12);
        }
    }

    #[test]
    fn generic_states_normalize_including_partial_manifolds() {
        let field = coherent_weights(3.0, choose_cutoff(3.0, 2, 1e-12).unwrap()).unwrap();
        let atoms =
            AtomicInitialState::new([c(0.5), c(0.5), Complex64::new(0.0, -0.5), c(0.5)]).unwrap();
        for m in 1..=2 {
            let engine = ClosedForm::new(
                atoms,
                field.clone(),
                HamiltonianSpec::resonant(1.0, m, q(0.7)).unwrap(),
            )
            .unwrap();
            for k in 0..50 {
                let total = engine.coefficients(0.2 * k as f64).total_norm();
                assert!((total - 1.0).abs() < 1e-9, "m={m}: {total}");
            }
        }
    }

    #[test]
    fn agrees_with_exact_engine_for_generic_atoms() {
        let atoms = AtomicInitialState::new([
            c(0.4),
            Complex64::new(0.3, 0.5),
            Complex64::new(-0.2, 0.1),
            Complex64::new(0.0, (1.0f64 - 0.16 - 0.34 - 0.05).sqrt()),
        ])
        .unwrap();
        for &(m, qv, nbar) in &[(1, 0.5, 4.0), (2, 0.9, 6.0), (1, 1.0, 0.0), (2, 1.0, 2.0)] {
            let cutoff = choose_cutoff(nbar, m, 1e-12).unwrap();
            let field = coherent_weights(nbar, cutoff).unwrap();
            let spec = HamiltonianSpec::resonant(1.0, m, q(qv)).unwrap();
            let closed = ClosedForm::new(atoms, field.clone(), spec).unwrap();
            let prop = Propagator::new(spec, cutoff).unwrap();
            let psi0 = initial_composite_state(&atoms, &field);
            for k in 0..25 {
                let t = 0.4 * k as f64;
                let exact =
                    decompose(&reduced_atomic_state(&prop.evolve(&psi0, t).unwrap())).unwrap();
                assert_state_close(&closed.bloch(t), &exact, 1e-9);
            }
        }
    }
}
