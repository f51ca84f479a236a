//! q-deformed oscillator primitives.
//!
//! The deformed ladder operators are `a_q = a f(n)` with
//! `f(n) = sqrt((1 - q^n) / (n (1 - q)))`, so that
//! `a_q |n> = sqrt([n]_q) |n-1>` where `[n]_q = n f(n)^2 = (1 - q^n) / (1 - q)`.
//! `q = 1` is the undeformed oscillator and is reached through an explicit
//! limit branch.

use num_traits::float::FloatCore;
use num_traits::FromPrimitive;
use twofloat::TwoFloat;

use crate::error::{Error, Result};

/// Half-width of the band around `q = 1` that is routed to the undeformed limit.
pub const UNDEFORMED_GUARD: f64 = 1e-10;

/// Default tolerance on the discarded Poisson tail of the coherent field.
pub const DEFAULT_TAIL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformationParameter {
    q: f64,
}

impl DeformationParameter {
    pub fn new(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Domain(format!(
                "deformation parameter q = {q} outside [0, 1]"
            )));
        }
        Ok(Self { q })
    }

    pub fn undeformed() -> Self {
        Self { q: 1.0 }
    }

    pub fn value(&self) -> f64 {
        self.q
    }

    /// True when `q` lies inside the guard band around 1.
    pub fn is_undeformed(&self) -> bool {
        (1.0 - self.q).abs() < UNDEFORMED_GUARD
    }

    /// `[n]_q`, evaluated as `expm1(n ln q) / expm1(ln q)` to avoid the
    /// cancellation in `1 - q^n` near `q = 1`.
    pub fn q_number(&self, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        if self.is_undeformed() {
            return n as f64;
        }
        if self.q == 0.0 {
            return 1.0;
        }
        let ln_q = (self.q - 1.0).ln_1p();
        (n as f64 * ln_q).exp_m1() / ln_q.exp_m1()
    }

    /// `f(n)`; undefined at `n = 0`.
    pub fn factor(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::Domain(
                "deformation factor f(n) is undefined at n = 0".into(),
            ));
        }
        if n == 1 {
            return Ok(1.0);
        }
        Ok((self.q_number(n) / n as f64).sqrt())
    }

    /// `prod_{j=n+1}^{n+k} [j]_q`, i.e. `(n+k)!/n!` in q-numbers.
    pub fn q_factorial_ratio(&self, n: u64, k: u64) -> f64 {
        (n + 1..=n + k).map(|j| self.q_number(j)).product()
    }

    /// Natural log of [`q_factorial_ratio`](Self::q_factorial_ratio); `-inf`
    /// when one of the factors vanishes.
    pub fn ln_q_factorial_ratio(&self, n: u64, k: u64) -> f64 {
        (n + 1..=n + k).map(|j| self.q_number(j).ln()).sum()
    }

    /// `<n| a_q^k |n+k> = sqrt(prod_{j=n+1}^{n+k} [j]_q)`.
    pub fn ladder_power_element(&self, n: u64, k: u64) -> f64 {
        let direct = self.q_factorial_ratio(n, k);
        if direct.is_finite() {
            direct.sqrt()
        } else {
            (0.5 * self.ln_q_factorial_ratio(n, k)).exp()
        }
    }
}

pub fn deformation_factor(n: u64, q: DeformationParameter) -> Result<f64> {
    q.factor(n)
}

pub fn q_number(n: u64, q: DeformationParameter) -> f64 {
    q.q_number(n)
}

pub fn q_factorial_ratio(n: u64, k: u64, q: DeformationParameter) -> f64 {
    q.q_factorial_ratio(n, k)
}

/// Real types the partial-sum form of `[n]_q` can be evaluated in.
pub trait LadderScalar: FloatCore + FromPrimitive {
    fn sqrt(self) -> Self;
}

impl LadderScalar for f64 {
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

impl LadderScalar for TwoFloat {
    fn sqrt(self) -> Self {
        TwoFloat::sqrt(self)
    }
}

/// `[n]_q = sum_{j<n} q^j` accumulated term by term. All terms are
/// nonnegative, so this route is free of cancellation for every `q` in
/// `[0, 1]`, and `q = 1` needs no special branch.
pub fn q_number_series<T: LadderScalar>(n: u64, q: T) -> T {
    let mut sum = T::zero();
    let mut term = T::one();
    for _ in 0..n {
        sum = sum + term;
        term = term * q;
    }
    sum
}

/// `<n-1| a_q |n> = sqrt(n) f(n) = sqrt([n]_q)` in the scalar type `T`.
pub fn lowering_element<T: LadderScalar>(n: u64, q: T) -> T {
    q_number_series(n, q).sqrt()
}

/// Diagonal of `[a_q, a_q^dagger]` on `|n>`, formed from the products of
/// ladder matrix elements: `|<n|a_q|n+1>|^2 - |<n-1|a_q|n>|^2`.
pub fn commutator_diagonal<T: LadderScalar>(n: u64, q: T) -> T {
    let up = lowering_element(n + 1, q);
    let down = lowering_element(n, q);
    up * up - down * down
}

/// Coupling strengths of the excitation manifold labelled by `n`.
///
/// `nu1` links `|ee,n>` to `|eg,n+m>`/`|ge,n+m>` and `nu2` links those to
/// `|gg,n+2m>`; `mu = sqrt((nu1^2 + nu2^2) / 2)`. All three carry the unit of
/// the coupling constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderCouplings {
    pub n: i64,
    pub m: u32,
    pub nu1: f64,
    pub nu2: f64,
    pub mu: f64,
}

/// Manifold couplings for manifold `n` (which may be negative for the
/// partial manifolds below the vacuum: there the missing states make the
/// corresponding coupling zero).
pub fn ladder_couplings(n: i64, m: u32, lambda: f64, q: DeformationParameter) -> LadderCouplings {
    let m_i = m as i64;
    let coupling = |low: i64| -> f64 {
        if low < 0 {
            0.0
        } else {
            lambda * q.ladder_power_element(low as u64, m as u64)
        }
    };
    let nu1 = coupling(n);
    let nu2 = coupling(n + m_i);
    let mu = ((nu1 * nu1 + nu2 * nu2) / 2.0).sqrt();
    LadderCouplings { n, m, nu1, nu2, mu }
}

/// Truncated coherent field with real, nonnegative amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec {
    mean_photons: f64,
    weights: Vec<f64>,
}

impl FieldSpec {
    /// Coherent state of mean photon number `mean_photons` (amplitude
    /// `sqrt(mean_photons)`, zero phase) on Fock states `0..=cutoff`.
    pub fn coherent(mean_photons: f64, cutoff: usize, tail_eps: f64) -> Result<Self> {
        if !mean_photons.is_finite() || mean_photons < 0.0 {
            return Err(Error::Domain(format!(
                "mean photon number {mean_photons} must be finite and >= 0"
            )));
        }
        if cutoff < 1 {
            return Err(Error::Config("Fock cutoff must be at least 1".into()));
        }
        let mut weights = Vec::with_capacity(cutoff + 1);
        if mean_photons == 0.0 {
            weights.push(1.0);
            weights.resize(cutoff + 1, 0.0);
        } else {
            let ln_mean = mean_photons.ln();
            let mut ln_factorial = 0.0;
            for n in 0..=cutoff {
                if n > 0 {
                    ln_factorial += (n as f64).ln();
                }
                let ln_w = 0.5 * (n as f64 * ln_mean - mean_photons - ln_factorial);
                weights.push(ln_w.exp());
            }
        }
        let mass: f64 = weights.iter().map(|w| w * w).sum();
        if mass < 1.0 - tail_eps {
            return Err(Error::Truncation {
                cutoff,
                tail: 1.0 - mass,
                tolerance: tail_eps,
            });
        }
        Ok(Self {
            mean_photons,
            weights,
        })
    }

    pub fn mean_photons(&self) -> f64 {
        self.mean_photons
    }

    pub fn cutoff(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `W_n`, zero outside `0..=cutoff`.
    pub fn weight(&self, n: i64) -> f64 {
        if n < 0 {
            return 0.0;
        }
        self.weights.get(n as usize).copied().unwrap_or(0.0)
    }
}

pub fn coherent_weights(mean_photons: f64, cutoff: usize) -> Result<FieldSpec> {
    FieldSpec::coherent(mean_photons, cutoff, DEFAULT_TAIL_EPS)
}

/// Smallest cutoff `N` such that the Poisson(`mean_photons`) mass above
/// `N - 2m` is below `tail_eps`.
pub fn choose_cutoff(mean_photons: f64, m: u32, tail_eps: f64) -> Result<usize> {
    if !(tail_eps > 0.0 && tail_eps <= 1e-3) {
        return Err(Error::Domain(format!(
            "tail tolerance {tail_eps} outside (0, 1e-3]"
        )));
    }
    if !mean_photons.is_finite() || mean_photons < 0.0 {
        return Err(Error::Domain(format!(
            "mean photon number {mean_photons} must be finite and >= 0"
        )));
    }
    let margin = 2 * m as usize;
    if mean_photons == 0.0 {
        return Ok(margin.max(1));
    }
    // pmf beyond this bound is far below any admissible tail_eps
    let upper = (mean_photons + 40.0 * mean_photons.sqrt() + 200.0).ceil() as usize;
    let ln_mean = mean_photons.ln();
    let mut pmf = Vec::with_capacity(upper + 1);
    let mut ln_factorial = 0.0;
    for n in 0..=upper {
        if n > 0 {
            ln_factorial += (n as f64).ln();
        }
        pmf.push((n as f64 * ln_mean - mean_photons - ln_factorial).exp());
    }
    // tail[k] = mass strictly above k, summed from the small end
    let mut tail = vec![0.0; upper + 1];
    let mut acc = 0.0;
    for k in (0..upper).rev() {
        acc += pmf[k + 1];
        tail[k] = acc;
    }
    let k = tail
        .iter()
        .position(|&mass| mass < tail_eps)
        .unwrap_or(upper);
    Ok(k + margin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn q(v: f64) -> DeformationParameter {
        DeformationParameter::new(v).unwrap()
    }

    #[test]
    fn rejects_q_outside_unit_interval() {
        assert!(DeformationParameter::new(-0.1).is_err());
        assert!(DeformationParameter::new(1.5).is_err());
        assert!(DeformationParameter::new(f64::NAN).is_err());
    }

    #[test]
    fn deformation_factor_examples() {
        assert_eq!(deformation_factor(1, q(0.5)).unwrap(), 1.0);
        assert_eq!(deformation_factor(2, q(1.0)).unwrap(), 1.0);
        assert_relative_eq!(
            deformation_factor(2, q(0.5)).unwrap(),
            0.75f64.sqrt(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            deformation_factor(3, q(0.9)).unwrap(),
            (0.271f64 / 0.3).sqrt(),
            max_relative = 1e-13
        );
        assert!(deformation_factor(0, q(0.5)).is_err());
    }

    #[test]
    fn q_number_examples() {
        assert_eq!(q_number(0, q(0.3)), 0.0);
        assert_relative_eq!(q_number(2, q(0.5)), 1.5, max_relative = 1e-15);
        assert_eq!(q_number(5, q(1.0)), 5.0);
        assert_eq!(q_number(7, q(0.0)), 1.0);
    }

    #[test]
    fn q_factorial_ratio_examples() {
        assert_eq!(q_factorial_ratio(3, 0, q(0.7)), 1.0);
        assert_eq!(q_factorial_ratio(0, 2, q(1.0)), 2.0);
        assert_relative_eq!(q_factorial_ratio(0, 2, q(0.5)), 1.5, max_relative = 1e-15);
    }

    #[test]
    fn ladder_couplings_examples() {
        let c = ladder_couplings(0, 1, 1.0, q(1.0));
        assert_relative_eq!(c.nu1, 1.0, max_relative = 1e-15);
        assert_relative_eq!(c.nu2, 2f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(c.mu, 1.5f64.sqrt(), max_relative = 1e-15);

        let c = ladder_couplings(0, 1, 1.0, q(0.5));
        assert_relative_eq!(c.nu1, 1.0, max_relative = 1e-15);
        assert_relative_eq!(c.nu2, 1.5f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(c.mu, 1.25f64.sqrt(), max_relative = 1e-15);

        let c = ladder_couplings(0, 2, 1.0, q(1.0));
        assert_relative_eq!(c.nu1, 2f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(c.nu2, 12f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(c.mu, 7f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn couplings_vanish_below_vacuum() {
        let c = ladder_couplings(-1, 1, 1.0, q(0.9));
        assert_eq!(c.nu1, 0.0);
        assert_relative_eq!(c.nu2, 1.0, max_relative = 1e-15);
        let c = ladder_couplings(-3, 1, 1.0, q(0.9));
        assert_eq!((c.nu1, c.nu2, c.mu), (0.0, 0.0, 0.0));
    }

    #[test]
    fn couplings_reduce_to_factorials_at_q_one() {
        for m in 1..=3u32 {
            for n in 0..30i64 {
                let c = ladder_couplings(n, m, 0.7, q(1.0));
                let fact_ratio =
                    |lo: i64, k: i64| -> f64 { (lo + 1..=lo + k).map(|j| j as f64).product() };
                assert_relative_eq!(
                    c.nu1,
                    0.7 * fact_ratio(n, m as i64).sqrt(),
                    max_relative = 1e-12
                );
                assert_relative_eq!(
                    c.nu2,
                    0.7 * fact_ratio(n + m as i64, m as i64).sqrt(),
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn closed_form_and_series_q_numbers_agree() {
        for &qv in &[0.0, 0.1, 0.5, 0.9, 0.999, 1.0 - 1e-8, 1.0] {
            let dq = q(qv);
            for n in 0..200u64 {
                let a = dq.q_number(n);
                let b = q_number_series(n, qv);
                assert!(
                    (a - b).abs() <= 1e-12 * b.abs().max(1.0),
                    "q={qv} n={n}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn commutator_identity_in_double_precision() {
        // cancellation limits f64 to an absolute error of a few ulps of [n]_q
        for &qv in &[0.0, 0.3, 0.5, 0.9, 1.0] {
            for n in 0..80u64 {
                let got = commutator_diagonal(n, qv);
                assert!((got - qv.powi(n as i32)).abs() < 1e-13, "q={qv} n={n}");
            }
        }
    }

    #[test]
    fn commutator_identity_in_double_double() {
        for &qv in &[0.0, 0.5, 0.9, 1.0] {
            let qt = TwoFloat::from(qv);
            let mut expect = TwoFloat::from(1.0);
            for n in 0..=60u64 {
                let got = commutator_diagonal(n, qt);
                let err: f64 = (got - expect).abs().into();
                let scale: f64 = expect.into();
                if scale == 0.0 {
                    assert!(err == 0.0, "q={qv} n={n}");
                } else {
                    assert!(err / scale < 1e-12, "q={qv} n={n}: {}", err / scale);
                }
                expect *= qt;
            }
        }
    }

    #[test]
    fn factor_matches_lowering_element() {
        for &qv in &[0.0, 0.5, 0.9, 1.0] {
            for n in 1..100u64 {
                let via_f = (n as f64).sqrt() * q(qv).factor(n).unwrap();
                assert_relative_eq!(via_f, lowering_element(n, qv), max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn continuity_near_undeformed_limit() {
        let dq = q(1.0 - 1e-8);
        for n in 1..=100 {
            assert!((dq.factor(n).unwrap() - 1.0).abs() < 1e-6);
        }
        // inside the guard band the limit branch is taken
        assert_eq!(q(1.0 - 1e-11).q_number(17), 17.0);
    }

    #[test]
    fn coherent_weight_examples() {
        let vac = coherent_weights(0.0, 4).unwrap();
        assert_eq!(vac.weights(), &[1.0, 0.0, 0.0, 0.0, 0.0]);

        let field = coherent_weights(10.0, 80).unwrap();
        assert_relative_eq!(field.weights()[0], (-5.0f64).exp(), max_relative = 1e-13);
        let mean: f64 = field
            .weights()
            .iter()
            .enumerate()
            .map(|(n, w)| n as f64 * w * w)
            .sum();
        assert!((mean - 10.0).abs() < 1e-9);
    }

    #[test]
    fn coherent_weights_report_truncation() {
        match coherent_weights(10.0, 12) {
            Err(Error::Truncation { cutoff, tail, .. }) => {
                assert_eq!(cutoff, 12);
                assert!(tail > 1e-3);
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn cutoff_choice() {
        assert!(choose_cutoff(0.0, 1, 1e-12).unwrap() >= 2);
        // frozen from the Poisson(10) tail: mass above 39 is 7.34e-13, above 38 is 2.9e-12
        assert_eq!(choose_cutoff(10.0, 1, 1e-12).unwrap(), 41);
        assert_eq!(
            choose_cutoff(10.0, 2, 1e-12).unwrap(),
            choose_cutoff(10.0, 1, 1e-12).unwrap() + 2
        );
        assert!(choose_cutoff(10.0, 1, 0.0).is_err());
        assert!(choose_cutoff(10.0, 1, 0.01).is_err());
    }

    #[test]
    fn cutoff_meets_tail_tolerance() {
        for &nbar in &[0.5, 3.0, 10.0, 25.0, 100.0] {
            for m in 1..=3 {
                let n = choose_cutoff(nbar, m, 1e-12).unwrap();
                let field = FieldSpec::coherent(nbar, n - 2 * m as usize, 1e-12).unwrap();
                let mass: f64 = field.weights().iter().map(|w| w * w).sum();
                assert!(mass >= 1.0 - 1e-12);
            }
        }
    }
}
