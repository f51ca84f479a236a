//! Invariant suites shared by the `validate` command and the acceptance tests.
//!
//! Each suite returns the worst deviation it saw; callers compare it with
//! their own tolerance.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use twofloat::TwoFloat;

use crate::algebra::{
    choose_cutoff, coherent_weights, commutator_diagonal, DeformationParameter, DEFAULT_TAIL_EPS,
};
use crate::analysis::decompose;
use crate::closed_form::ClosedForm;
use crate::density::DensityMatrix;
use crate::error::Result;
use crate::exact::{
    initial_composite_state, reduced_atomic_state, AtomicInitialState, AtomicLevel,
    HamiltonianSpec, Propagator,
};
use crate::sweep::{simulate, Figure, SweepConfig};
use crate::teleport::{
    circuit_teleport, closed_form_bob, compare_normalizations, fidelity_overlap, UnknownQubit,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    /// Passes when `worst < tolerance`.
    pub fn below(name: &str, worst: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            worst,
            tolerance,
            passed: worst < tolerance,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: worst {:.3e} (tolerance {:.0e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.worst,
            self.tolerance
        )?;
        if !self.detail.is_empty() {
            write!(f, "; {}", self.detail)?;
        }
        Ok(())
    }
}

pub const COMMUTATOR_Q: [f64; 4] = [0.0, 0.5, 0.9, 1.0];
pub const COMMUTATOR_MAX_N: u64 = 60;

/// Relative error of `[a_q, a_q^dagger]|n> = q^n |n>` in double-double
/// arithmetic. Where `q^n = 0` the error is absolute.
pub fn commutator_error() -> f64 {
    let mut worst = 0.0f64;
    for &qv in &COMMUTATOR_Q {
        let q = TwoFloat::from(qv);
        let mut expect = TwoFloat::from(1.0);
        for n in 0..=COMMUTATOR_MAX_N {
            let err: f64 = (commutator_diagonal(n, q) - expect).abs().into();
            let scale: f64 = expect.into();
            worst = worst.max(if scale == 0.0 { err } else { err / scale });
            expect *= q;
        }
    }
    worst
}

/// Configurations `(m, q, nbar)` behind the six figure presets.
pub fn figure_configurations() -> Vec<(u32, f64, f64)> {
    let mut out = Vec::new();
    for fig in Figure::ALL {
        let c = SweepConfig::preset(fig);
        for &q in &c.q_values {
            if !out.contains(&(c.m, q, c.mean_photons)) {
                out.push((c.m, q, c.mean_photons));
            }
        }
    }
    out
}

fn grid(steps: usize, t_max: f64) -> Vec<f64> {
    (0..steps)
        .map(|k| t_max * k as f64 / (steps - 1) as f64)
        .collect()
}

fn closed(atoms: AtomicInitialState, m: u32, q: f64, nbar: f64) -> Result<(ClosedForm, usize)> {
    let cutoff = choose_cutoff(nbar, m, DEFAULT_TAIL_EPS)?;
    let field = coherent_weights(nbar, cutoff)?;
    let spec = HamiltonianSpec::resonant(1.0, m, DeformationParameter::new(q)?)?;
    Ok((ClosedForm::new(atoms, field, spec)?, cutoff))
}

/// `|sum_n sum_i |c_n^(i)|^2 - 1|` over the figure configurations, `lambda t in [0, 10]`.
pub fn normalization_error(steps: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for (m, q, nbar) in figure_configurations() {
        let (engine, _) = closed(AtomicInitialState::excited(), m, q, nbar)?;
        for t in grid(steps, 10.0) {
            worst = worst.max((engine.coefficients(t).total_norm() - 1.0).abs());
        }
    }
    Ok(worst)
}

pub const EQUIVALENCE_Q: [f64; 3] = [0.5, 0.9, 1.0];
pub const EQUIVALENCE_M: [u32; 2] = [1, 2];
pub const EQUIVALENCE_NBAR: [f64; 2] = [0.0, 10.0];

/// Largest component difference between the closed-form state and the
/// decomposed exact-propagator state.
pub fn engine_equivalence_error(atoms: AtomicInitialState, steps: usize) -> Result<f64> {
    let mut cases = Vec::new();
    for &q in &EQUIVALENCE_Q {
        for &m in &EQUIVALENCE_M {
            for &nbar in &EQUIVALENCE_NBAR {
                cases.push((q, m, nbar));
            }
        }
    }
    let per_case: Vec<f64> = cases
        .par_iter()
        .map(|&(q, m, nbar)| -> Result<f64> {
            let (engine, cutoff) = closed(atoms, m, q, nbar)?;
            let prop = Propagator::new(*engine.spec(), cutoff)?;
            let psi0 = initial_composite_state(&atoms, engine.field());
            let mut worst = 0.0f64;
            for t in grid(steps, 10.0) {
                let exact = decompose(&reduced_atomic_state(&prop.evolve(&psi0, t)?))?;
                worst = worst.max(engine.bloch(t).max_abs_diff(&exact));
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    Ok(per_case.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VacuumLawErrors {
    /// `|c(ee,0) - law|`, closed form and exact.
    pub closed_amplitude: f64,
    pub exact_amplitude: f64,
    /// `||c(ee,0)|^2 - law|`, closed form and exact.
    pub closed_population: f64,
    pub exact_population: f64,
}

impl VacuumLawErrors {
    pub fn amplitude(&self) -> f64 {
        self.closed_amplitude.max(self.exact_amplitude)
    }

    pub fn population(&self) -> f64 {
        self.closed_population.max(self.exact_population)
    }
}

/// `|ee,0>` amplitude and population against `1 - (2/3) sin^2(sqrt(1.5) lambda t)`
/// for the undeformed vacuum. The law is the (real) amplitude; the population
/// is its square.
pub fn vacuum_law_error(steps: usize) -> Result<VacuumLawErrors> {
    let atoms = AtomicInitialState::excited();
    let (engine, cutoff) = closed(atoms, 1, 1.0, 0.0)?;
    let prop = Propagator::new(*engine.spec(), cutoff)?;
    let psi0 = initial_composite_state(&atoms, engine.field());
    let mut out = VacuumLawErrors {
        closed_amplitude: 0.0,
        exact_amplitude: 0.0,
        closed_population: 0.0,
        exact_population: 0.0,
    };
    for t in grid(steps, 10.0) {
        let law = 1.0 - 2.0 / 3.0 * (1.5f64.sqrt() * t).sin().powi(2);
        let c = engine.coefficients(t).get(0, 0);
        let e = prop.evolve(&psi0, t)?.amplitude(AtomicLevel::EE, 0);
        out.closed_amplitude = out.closed_amplitude.max((c - law).norm());
        out.exact_amplitude = out.exact_amplitude.max((e - law).norm());
        out.closed_population = out.closed_population.max((c.norm_sqr() - law).abs());
        out.exact_population = out.exact_population.max((e.norm_sqr() - law).abs());
    }
    Ok(out)
}

pub fn random_unknown(rng: &mut ChaCha8Rng) -> UnknownQubit {
    let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let b = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
    UnknownQubit::new(a / n, b / n).expect("normalized by construction")
}

/// Mixture of one to four random pure states.
pub fn random_channel(rng: &mut ChaCha8Rng) -> DensityMatrix {
    let mut m = DMatrix::<Complex64>::zeros(4, 4);
    for _ in 0..rng.gen_range(1..=4) {
        let w = nalgebra::DVector::from_fn(4, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        m += &w * w.adjoint() * Complex64::from(rng.gen_range(0.0..1.0));
    }
    let tr = m.trace();
    DensityMatrix::from_entries(m / tr).expect("4x4 is square")
}

/// `(worst |f_overlap - 1| over Bell-channel branches, worst |sum p - 1| over random channels)`.
pub fn teleport_self_test(seed: u64, inputs: usize, channels: usize) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
    let zero = Complex64::from(0.0);
    let bell = DensityMatrix::from_pure(&[h, zero, zero, h]);
    let mut fid = 0.0f64;
    for _ in 0..inputs {
        let input = random_unknown(&mut rng);
        for o in circuit_teleport(&bell, &input)? {
            fid = fid.max((fidelity_overlap(&input, &o.bob_state) - 1.0).abs());
        }
    }
    let mut prob = 0.0f64;
    for _ in 0..channels {
        let input = random_unknown(&mut rng);
        let total: f64 = circuit_teleport(&random_channel(&mut rng), &input)?
            .iter()
            .map(|o| o.probability)
            .sum();
        prob = prob.max((total - 1.0).abs());
    }
    Ok((fid, prob))
}

/// Closed-form receiver vector against the circuit's `ee` branch over a
/// figure's grid, `(unnormalized, normalized)` worst deviations.
pub fn bob_convention_errors(figure: Figure, steps: usize) -> Result<(f64, f64)> {
    let config = SweepConfig::preset(figure);
    let prepared = config.prepare()?;
    let mut worst = (0.0f64, 0.0f64);
    for &q in &config.q_values {
        let (engine, cutoff) = closed(prepared.atoms, config.m, q, config.mean_photons)?;
        let prop = Propagator::new(*engine.spec(), cutoff)?;
        let psi0 = initial_composite_state(&prepared.atoms, engine.field());
        for t in grid(steps, config.t_max) {
            let channel = reduced_atomic_state(&prop.evolve(&psi0, t)?);
            let ee = &circuit_teleport(&channel, &prepared.unknown)?[0];
            let cmp = compare_normalizations(
                &closed_form_bob(&prepared.unknown, &engine.coefficients(t)),
                ee,
            );
            worst.0 = worst.0.max(cmp.unnormalized_deviation);
            worst.1 = worst.1.max(cmp.normalized_deviation);
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalityExtremes {
    pub min_eigenvalue: f64,
    pub max_trace_error: f64,
    pub min_purity: f64,
    pub max_purity: f64,
}

/// Extremes over every state the `simulate` presets emit.
pub fn physicality_extremes() -> Result<PhysicalityExtremes> {
    let mut ext = PhysicalityExtremes {
        min_eigenvalue: f64::INFINITY,
        max_trace_error: 0.0,
        min_purity: f64::INFINITY,
        max_purity: f64::NEG_INFINITY,
    };
    for fig in Figure::ALL.into_iter().filter(|f| !f.is_teleport()) {
        let config = SweepConfig::preset(fig);
        for row in simulate(&config, &config.prepare()?)? {
            ext.min_eigenvalue = ext.min_eigenvalue.min(row.min_eigenvalue);
            ext.max_trace_error = ext.max_trace_error.max(row.trace_error);
            ext.min_purity = ext.min_purity.min(row.purity);
            ext.max_purity = ext.max_purity.max(row.purity);
        }
    }
    Ok(ext)
}

/// The suite run by `qcavity validate`.
pub fn run_suite() -> Result<Vec<Check>> {
    let mut checks = vec![Check::below(
        "deformed commutator, n <= 60, q in {0, 0.5, 0.9, 1}",
        commutator_error(),
        1e-12,
        "double-double arithmetic",
    )];
    checks.push(Check::below(
        "closed-form normalization, figure configurations",
        normalization_error(201)?,
        1e-9,
        "",
    ));
    checks.push(Check::below(
        "closed form vs exact propagator",
        engine_equivalence_error(AtomicInitialState::excited(), 201)?,
        1e-6,
        "q in {0.5, 0.9, 1}, m in {1, 2}, nbar in {0, 10}",
    ));
    let vac = vacuum_law_error(201)?;
    checks.push(Check::below(
        "undeformed vacuum amplitude law",
        vac.amplitude(),
        1e-9,
        format!(
            "closed {:.1e}, exact {:.1e}",
            vac.closed_amplitude, vac.exact_amplitude
        ),
    ));
    let (fid, prob) = teleport_self_test(2024, 50, 100)?;
    checks.push(Check::below(
        "Bell-channel teleportation fidelity",
        fid,
        1e-10,
        "50 random inputs",
    ));
    checks.push(Check::below(
        "outcome probabilities sum to one",
        prob,
        1e-10,
        "100 random channels",
    ));
    let (un, no) = bob_convention_errors(Figure::F3a, 201)?;
    let mut conv = Check::below(
        "closed-form receiver vector vs circuit",
        un,
        1e-6,
        format!("unnormalized {un:.1e}, normalized {no:.1e}"),
    );
    conv.passed = (un < 1e-6) != (no < 1e-6) && un < 1e-6;
    checks.push(conv);
    let ext = physicality_extremes()?;
    let violation = (-ext.min_eigenvalue)
        .max(0.0)
        .max(ext.max_trace_error)
        .max((0.25 - ext.min_purity).max(0.0))
        .max((ext.max_purity - 1.0).max(0.0));
    checks.push(Check::below(
        "physicality of emitted states",
        violation,
        1e-9,
        format!(
            "min eigenvalue {:.1e}, trace error {:.1e}, purity [{:.4}, {:.4}]",
            ext.min_eigenvalue, ext.max_trace_error, ext.min_purity, ext.max_purity
        ),
    ));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_configurations_cover_the_presets() {
        let cfgs = figure_configurations();
        assert_eq!(cfgs.len(), 6);
        assert!(cfgs.contains(&(2, 0.0, 10.0)));
    }

    #[test]
    fn check_display() {
        let c = Check::below("x", 1e-13, 1e-12, "");
        assert!(c.passed);
        assert_eq!(c.to_string(), "[PASS] x: worst 1.000e-13 (tolerance 1e-12)");
        assert!(!Check::below("y", 1.0, 1e-12, "d").passed);
    }

    #[test]
    fn small_suites() {
        assert!(commutator_error() < 1e-12);
        assert!(normalization_error(11).unwrap() < 1e-9);
        let (a, b) = teleport_self_test(1, 5, 5).unwrap();
        assert!(a < 1e-10 && b < 1e-10);
    }
}
