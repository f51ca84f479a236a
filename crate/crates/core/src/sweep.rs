//! Time sweeps over a list of deformation parameters, and their CSV form.

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::algebra::{choose_cutoff, DeformationParameter, FieldSpec, DEFAULT_TAIL_EPS};
use crate::analysis::{compose, entanglement_degree, negativity, purity, TwoQubitBlochState};
use crate::closed_form::ClosedForm;
use crate::density::{DensityMatrix, ONE};
use crate::error::{Error, Result};
use crate::exact::{
    initial_composite_state, reduced_atomic_state, AtomicInitialState, CompositeState,
    HamiltonianSpec, Propagator,
};
use crate::teleport::{
    average_fidelity, circuit_teleport, closed_form_bob, fidelity_overlap, fidelity_paper, Branch,
    UnknownQubit,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Largest squared-norm error that is silently renormalized.
pub const RENORMALIZE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Closed,
    Exact,
    Both,
}

impl Engine {
    pub fn label(self) -> &'static str {
        match self {
            Engine::Closed => "closed",
            Engine::Exact => "exact",
            Engine::Both => "both",
        }
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed" => Ok(Engine::Closed),
            "exact" => Ok(Engine::Exact),
            "both" => Ok(Engine::Both),
            _ => Err(Error::Config(format!(
                "unknown engine '{s}' (closed, exact, both)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    F1a,
    F1b,
    F2a,
    F2b,
    F3a,
    F3b,
}

impl Figure {
    pub const ALL: [Figure; 6] = [
        Figure::F1a,
        Figure::F1b,
        Figure::F2a,
        Figure::F2b,
        Figure::F3a,
        Figure::F3b,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Figure::F1a => "1a",
            Figure::F1b => "1b",
            Figure::F2a => "2a",
            Figure::F2b => "2b",
            Figure::F3a => "3a",
            Figure::F3b => "3b",
        }
    }

    /// Fidelity figures run through `teleport`, the others through `simulate`.
    pub fn is_teleport(self) -> bool {
        matches!(self, Figure::F3a | Figure::F3b)
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.label() == s)
            .ok_or_else(|| Error::Config(format!("unknown figure '{s}' (1a, 1b, 2a, 2b, 3a, 3b)")))
    }
}

pub fn parse_complex(s: &str) -> Result<Complex64> {
    Complex64::from_str(s.trim())
        .map_err(|_| Error::Config(format!("cannot parse '{s}' as a complex number")))
}

fn parse_number<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{value}' for {key}")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub engine: Engine,
    pub q_values: Vec<f64>,
    pub m: u32,
    pub mean_photons: f64,
    pub lambda: f64,
    /// Second atom's coupling; defaults to `lambda`.
    pub lambda2: Option<f64>,
    pub detuning: f64,
    pub field_freq: f64,
    /// Final `lambda t`.
    pub t_max: f64,
    pub t_steps: usize,
    /// Raw `a1..a4`; normalized by [`SweepConfig::prepare`].
    pub atoms: [Complex64; 4],
    pub alpha: Complex64,
    pub beta: Complex64,
    pub tail_eps: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let h = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
        Self {
            engine: Engine::Closed,
            q_values: vec![1.0],
            m: 1,
            mean_photons: 10.0,
            lambda: 1.0,
            lambda2: None,
            detuning: 0.0,
            field_freq: 0.0,
            t_max: 10.0,
            t_steps: 201,
            atoms: *AtomicInitialState::excited().amplitudes(),
            alpha: h,
            beta: h,
            tail_eps: DEFAULT_TAIL_EPS,
        }
    }
}

/// A validated configuration with everything the engines need.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub atoms: AtomicInitialState,
    pub unknown: UnknownQubit,
    pub cutoff: usize,
    pub field: FieldSpec,
    pub warnings: Vec<String>,
}

impl SweepConfig {
    pub fn preset(figure: Figure) -> Self {
        let m = match figure {
            Figure::F1a | Figure::F2a | Figure::F3a => 1,
            Figure::F1b | Figure::F2b | Figure::F3b => 2,
        };
        let q_values = match figure {
            Figure::F1a | Figure::F1b => vec![0.0, 0.5, 0.9],
            _ => vec![0.5, 0.9],
        };
        Self {
            m,
            q_values,
            ..Self::default()
        }
    }

    /// Applies one `key = value` setting. Keys mirror the long flag names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        match key.as_str() {
            "engine" => self.engine = value.trim().parse()?,
            "q" => {
                self.q_values = value
                    .split(',')
                    .map(|v| parse_number("q", v))
                    .collect::<Result<_>>()?
            }
            "m" => self.m = parse_number("m", value)?,
            "nbar" => self.mean_photons = parse_number("nbar", value)?,
            "lambda" => self.lambda = parse_number("lambda", value)?,
            "lambda2" => self.lambda2 = Some(parse_number("lambda2", value)?),
            "detuning" => self.detuning = parse_number("detuning", value)?,
            "field-freq" => self.field_freq = parse_number("field-freq", value)?,
            "t-max" => self.t_max = parse_number("t-max", value)?,
            "steps" => self.t_steps = parse_number("steps", value)?,
            "atoms" => {
                let parts: Vec<&str> = value.split(',').collect();
                if parts.len() != 4 {
                    return Err(Error::Config(format!(
                        "atoms needs four amplitudes, got '{value}'"
                    )));
                }
                for (slot, part) in self.atoms.iter_mut().zip(parts) {
                    *slot = parse_complex(part)?;
                }
            }
            "alpha" => self.alpha = parse_complex(value)?,
            "beta" => self.beta = parse_complex(value)?,
            "tail-eps" => self.tail_eps = parse_number("tail-eps", value)?,
            _ => return Err(Error::Config(format!("unknown setting '{key}'"))),
        }
        Ok(())
    }

    /// Applies a `key = value` file; blank lines and `#` comments are skipped.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2.unwrap_or(self.lambda)
    }

    pub fn spec(&self, q: f64) -> Result<HamiltonianSpec> {
        let spec = HamiltonianSpec {
            lambda1: self.lambda,
            lambda2: self.lambda2(),
            m: self.m,
            q: DeformationParameter::new(q)?,
            detuning: self.detuning,
            field_freq: self.field_freq,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `lambda t` grid, `t_max k / (steps - 1)`.
    pub fn time_grid(&self) -> Vec<f64> {
        let last = (self.t_steps - 1) as f64;
        (0..self.t_steps)
            .map(|k| self.t_max * k as f64 / last)
            .collect()
    }

    pub fn prepare(&self) -> Result<Prepared> {
        if self.t_steps < 2 {
            return Err(Error::Config(format!(
                "steps must be >= 2, got {}",
                self.t_steps
            )));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::Config(format!(
                "t-max must be positive, got {}",
                self.t_max
            )));
        }
        if self.q_values.is_empty() {
            return Err(Error::Config("at least one q value is required".into()));
        }
        for &q in &self.q_values {
            self.spec(q)?;
        }
        let mut warnings = Vec::new();
        let (atoms, rescaled) = AtomicInitialState::renormalized(self.atoms, RENORMALIZE_TOL)?;
        if rescaled {
            warnings.push("atomic amplitudes renormalized".to_string());
        }
        let norm = self.alpha.norm_sqr() + self.beta.norm_sqr();
        if (norm - 1.0).abs() > RENORMALIZE_TOL {
            return Err(Error::Domain(format!(
                "unknown qubit has |alpha|^2 + |beta|^2 = {norm}, too far from 1 to renormalize"
            )));
        }
        let scale = norm.sqrt().recip();
        let unknown = UnknownQubit::new(self.alpha * scale, self.beta * scale)?;
        if (norm - 1.0).abs() > 1e-12 {
            warnings.push("unknown qubit renormalized".to_string());
        }
        let cutoff = choose_cutoff(self.mean_photons, self.m, self.tail_eps)?;
        let field = FieldSpec::coherent(self.mean_photons, cutoff, self.tail_eps)?;
        Ok(Prepared {
            atoms,
            unknown,
            cutoff,
            field,
            warnings,
        })
    }
}

/// The two engines for one `q`, built once per sweep.
struct Engines {
    closed: Option<ClosedForm>,
    exact: Option<(Propagator, CompositeState)>,
    lambda: f64,
}

impl Engines {
    fn new(config: &SweepConfig, prepared: &Prepared, q: f64) -> Result<Self> {
        let spec = config.spec(q)?;
        let closed = match config.engine {
            Engine::Closed | Engine::Both => Some(ClosedForm::new(
                prepared.atoms,
                prepared.field.clone(),
                spec,
            )?),
            Engine::Exact => None,
        };
        let exact = match config.engine {
            Engine::Exact | Engine::Both => Some((
                Propagator::new(spec, prepared.cutoff)?,
                initial_composite_state(&prepared.atoms, &prepared.field),
            )),
            Engine::Closed => None,
        };
        Ok(Self {
            closed,
            exact,
            lambda: config.lambda,
        })
    }

    fn exact_rho(&self, lambda_t: f64) -> Result<Option<DensityMatrix>> {
        self.exact
            .as_ref()
            .map(|(prop, psi0)| {
                Ok(reduced_atomic_state(
                    &prop.evolve(psi0, lambda_t / self.lambda)?,
                ))
            })
            .transpose()
    }

    /// Emitted state and its density matrix, plus the engine deviation when
    /// both engines run.
    fn state(&self, lambda_t: f64) -> Result<(TwoQubitBlochState, DensityMatrix, Option<f64>)> {
        let exact = self.exact_rho(lambda_t)?;
        match (&self.closed, exact) {
            (Some(closed), exact) => {
                let state = closed.bloch(lambda_t / self.lambda);
                let deviation = match exact {
                    Some(rho) => Some(state.max_abs_diff(&crate::analysis::decompose(&rho)?)),
                    None => None,
                };
                Ok((state, compose(&state).rho, deviation))
            }
            (None, Some(rho)) => Ok((crate::analysis::decompose(&rho)?, rho, None)),
            (None, None) => unreachable!("at least one engine is built"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateRow {
    pub q: f64,
    pub lambda_t: f64,
    pub state: TwoQubitBlochState,
    pub entanglement: f64,
    pub purity: f64,
    pub negativity: f64,
    pub min_eigenvalue: f64,
    pub trace_error: f64,
    pub deviation: Option<f64>,
}

fn state_row(engines: &Engines, q: f64, lambda_t: f64) -> Result<StateRow> {
    let (state, rho, deviation) = engines.state(lambda_t)?;
    Ok(StateRow {
        q,
        lambda_t,
        entanglement: entanglement_degree(&state),
        purity: purity(&state),
        negativity: negativity(&rho)?,
        min_eigenvalue: rho.min_eigenvalue(),
        trace_error: (rho.trace() - ONE).norm(),
        state,
        deviation,
    })
}

/// Rows ordered by `q` (config order), then time.
pub fn simulate(config: &SweepConfig, prepared: &Prepared) -> Result<Vec<StateRow>> {
    let grid = config.time_grid();
    let mut rows = Vec::with_capacity(grid.len() * config.q_values.len());
    for &q in &config.q_values {
        let engines = Engines::new(config, prepared, q)?;
        let chunk: Vec<StateRow> = grid
            .par_iter()
            .map(|&lt| state_row(&engines, q, lt))
            .collect::<Result<_>>()?;
        rows.extend(chunk);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeleportRow {
    pub lambda_t: f64,
    pub q: f64,
    pub branch: Branch,
    pub probability: f64,
    /// `(1 + su . sb) / 4` on the uncorrected, unnormalized receiver vector.
    pub f_paper: f64,
    pub f_overlap: f64,
    pub f_average: f64,
    /// Same as `f_paper` with the conditional (normalized) receiver vector.
    pub f_paper_normalized: f64,
    pub deviation: Option<f64>,
}

fn teleport_rows(
    engines: &Engines,
    unknown: &UnknownQubit,
    q: f64,
    lambda_t: f64,
) -> Result<Vec<TeleportRow>> {
    let (_, channel, state_deviation) = engines.state(lambda_t)?;
    let outcomes = circuit_teleport(&channel, unknown)?;
    let f_average = average_fidelity(&outcomes, unknown);
    let su = unknown.su();

    let closed_bob = engines
        .closed
        .as_ref()
        .map(|c| closed_form_bob(unknown, &c.coefficients(lambda_t / engines.lambda)));
    let exact_outcomes = match (&engines.closed, engines.exact_rho(lambda_t)?) {
        (Some(_), Some(rho)) => Some(circuit_teleport(&rho, unknown)?),
        _ => None,
    };

    Ok(outcomes
        .iter()
        .enumerate()
        .map(|(k, o)| {
            let raw: Vector3<f64> = match (o.branch, closed_bob) {
                (Branch::EE, Some(sb)) => sb,
                _ => o.raw_sb,
            };
            let normalized = if o.probability > 0.0 {
                raw / (2.0 * o.probability)
            } else {
                Vector3::zeros()
            };
            let deviation = exact_outcomes.as_ref().map(|ex| {
                let bob = (raw - ex[k].raw_sb).abs().max();
                bob.max(state_deviation.unwrap_or(0.0))
            });
            TeleportRow {
                lambda_t,
                q,
                branch: o.branch,
                probability: o.probability,
                f_paper: fidelity_paper(&su, &raw),
                f_overlap: fidelity_overlap(unknown, &o.bob_state),
                f_average,
                f_paper_normalized: fidelity_paper(&su, &normalized),
                deviation,
            }
        })
        .collect())
}

/// Four rows (branches `ee, eg, ge, gg`) per grid point, ordered by `q`, then time.
pub fn teleport(config: &SweepConfig, prepared: &Prepared) -> Result<Vec<TeleportRow>> {
    let grid = config.time_grid();
    let mut rows = Vec::new();
    for &q in &config.q_values {
        let engines = Engines::new(config, prepared, q)?;
        let chunks: Vec<Vec<TeleportRow>> = grid
            .par_iter()
            .map(|&lt| teleport_rows(&engines, &prepared.unknown, q, lt))
            .collect::<Result<_>>()?;
        rows.extend(chunks.into_iter().flatten());
    }
    Ok(rows)
}

/// `%.12g`-style formatting: 12 significant digits, shortest form.
pub fn format_g(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (DIGITS - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{sign}{}i", format_g(z.re), format_g(z.im.abs()))
}

const Q0_NOTE: &str = "# note: q -> 1 is the undeformed limit; q = 0 gives f(n) = 1/sqrt(n) and is not the undeformed algebra";

fn provenance(command: &str, config: &SweepConfig, prepared: &Prepared) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# qcavity {VERSION} {command}");
    let _ = writeln!(
        out,
        "# engine={} m={} nbar={} lambda={} lambda2={} detuning={} field_freq={} t_max={} steps={} tail_eps={}",
        config.engine.label(),
        config.m,
        format_g(config.mean_photons),
        format_g(config.lambda),
        format_g(config.lambda2()),
        format_g(config.detuning),
        format_g(config.field_freq),
        format_g(config.t_max),
        config.t_steps,
        format_g(config.tail_eps),
    );
    let q: Vec<String> = config.q_values.iter().map(|&q| format_g(q)).collect();
    let _ = writeln!(out, "# q={}", q.join(","));
    let atoms: Vec<String> = prepared
        .atoms
        .amplitudes()
        .iter()
        .map(|&a| format_complex(a))
        .collect();
    let _ = writeln!(out, "# atoms={}", atoms.join(","));
    let _ = writeln!(out, "# cutoff={}", prepared.cutoff);
    if config.q_values.contains(&0.0) {
        let _ = writeln!(out, "{Q0_NOTE}");
    }
    out
}

fn push_row(out: &mut String, fields: impl IntoIterator<Item = String>) {
    let fields: Vec<String> = fields.into_iter().collect();
    out.push_str(&fields.join(","));
    out.push('\n');
}

pub const SIMULATE_COLUMNS: &str = "q,lambda_t,s_x,s_y,s_z,t_x,t_y,t_z,abs_s,abs_t,\
c_xx,c_xy,c_xz,c_yx,c_yy,c_yz,c_zx,c_zy,c_zz,entanglement,purity,negativity";

pub fn simulate_csv(config: &SweepConfig, prepared: &Prepared, rows: &[StateRow]) -> String {
    let mut out = provenance("simulate", config, prepared);
    out.push_str(
        "# entanglement = |C - s t^T|_F^2; negativity is a partial-transpose cross-check\n",
    );
    let both = config.engine == Engine::Both;
    out.push_str(SIMULATE_COLUMNS);
    if both {
        out.push_str(",max_deviation");
    }
    out.push('\n');
    for r in rows {
        let st = &r.state;
        let mut fields = vec![format_g(r.q), format_g(r.lambda_t)];
        fields.extend(st.s.iter().map(|&v| format_g(v)));
        fields.extend(st.t.iter().map(|&v| format_g(v)));
        fields.push(format_g(st.s.norm()));
        fields.push(format_g(st.t.norm()));
        for i in 0..3 {
            for j in 0..3 {
                fields.push(format_g(st.cross[(i, j)]));
            }
        }
        fields.push(format_g(r.entanglement));
        fields.push(format_g(r.purity));
        fields.push(format_g(r.negativity));
        if both {
            fields.push(format_g(r.deviation.unwrap_or(f64::NAN)));
        }
        push_row(&mut out, fields);
    }
    out
}

pub const TELEPORT_COLUMNS: &str =
    "lambda_t,q,branch,probability,f_paper,f_overlap,f_average,f_paper_normalized";

/// Ideal-channel self-test: average overlap fidelity through a Bell channel.
pub fn bell_self_test(unknown: &UnknownQubit) -> Result<f64> {
    let h = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
    let zero = Complex64::from(0.0);
    let bell = DensityMatrix::from_pure(&[h, zero, zero, h]);
    Ok(average_fidelity(
        &circuit_teleport(&bell, unknown)?,
        unknown,
    ))
}

pub fn teleport_csv(
    config: &SweepConfig,
    prepared: &Prepared,
    rows: &[TeleportRow],
) -> Result<String> {
    let mut out = provenance("teleport", config, prepared);
    let u = &prepared.unknown;
    let _ = writeln!(
        out,
        "# unknown alpha={} beta={} s_u={},{},{}",
        format_complex(u.alpha),
        format_complex(u.beta),
        format_g(u.su().x),
        format_g(u.su().y),
        format_g(u.su().z),
    );
    let _ = writeln!(
        out,
        "# self-test bell channel f_overlap={}",
        format_g(bell_self_test(u)?)
    );
    out.push_str("# f_paper = (1 + s_u . s_b)/4 with s_b uncorrected on the 2p scale; f_overlap and f_average are corrected overlaps\n");
    let both = config.engine == Engine::Both;
    out.push_str(TELEPORT_COLUMNS);
    if both {
        out.push_str(",max_deviation");
    }
    out.push('\n');
    for r in rows {
        let mut fields = vec![
            format_g(r.lambda_t),
            format_g(r.q),
            r.branch.label().to_string(),
            format_g(r.probability),
            format_g(r.f_paper),
            format_g(r.f_overlap),
            format_g(r.f_average),
            format_g(r.f_paper_normalized),
        ];
        if both {
            fields.push(format_g(r.deviation.unwrap_or(f64::NAN)));
        }
        push_row(&mut out, fields);
    }
    Ok(out)
}
