use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use qcavity::sweep::{self, Engine, Figure, SweepConfig};
use qcavity::validation;

#[derive(Parser)]
#[command(
    name = "qcavity",
    version,
    about = "Two atoms in a q-deformed multiphoton cavity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bloch vectors, cross dyadic and entanglement over time.
    Simulate(SweepArgs),
    /// Teleportation fidelity over the generated channel.
    Teleport(SweepArgs),
    /// Run the invariant suite; exits nonzero on any failure.
    Validate,
}

#[derive(Args)]
struct SweepArgs {
    /// Preset configuration (1a, 1b, 2a, 2b for simulate; 3a, 3b for teleport).
    #[arg(long)]
    fig: Option<Figure>,
    /// key = value file applied over the preset; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// closed, exact or both.
    #[arg(long)]
    engine: Option<Engine>,
    /// Deformation parameter; repeat for several curves.
    #[arg(long = "q")]
    q: Vec<f64>,
    /// Photon multiplicity of the transition.
    #[arg(long)]
    m: Option<u32>,
    /// Mean photon number of the coherent field.
    #[arg(long)]
    nbar: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Second atom's coupling (exact engine only when it differs).
    #[arg(long)]
    lambda2: Option<f64>,
    /// Field-atom detuning (exact engine only).
    #[arg(long, allow_hyphen_values = true)]
    detuning: Option<f64>,
    /// Field frequency, used with a nonzero detuning.
    #[arg(long)]
    field_freq: Option<f64>,
    /// Final lambda t.
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of time points, endpoints included.
    #[arg(long)]
    steps: Option<usize>,
    /// Atomic amplitudes a1,a2,a3,a4 on ee, eg, ge, gg, e.g. "0.6,0+0.8i,0,0".
    #[arg(long, allow_hyphen_values = true)]
    atoms: Option<String>,
    /// Unknown-qubit amplitude on e.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Unknown-qubit amplitude on g.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    /// Fock-space tail tolerance used to pick the cutoff.
    #[arg(long)]
    tail_eps: Option<f64>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SweepArgs {
    fn resolve(&self, teleport: bool) -> Result<SweepConfig> {
        let mut config = match self.fig {
            Some(fig) => {
                if fig.is_teleport() != teleport {
                    let wanted = if fig.is_teleport() {
                        "teleport"
                    } else {
                        "simulate"
                    };
                    bail!("figure {} is a preset for `{wanted}`", fig.label());
                }
                SweepConfig::preset(fig)
            }
            None => SweepConfig::default(),
        };
        if let Some(path) = &self.config {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            config
                .apply_file(&text)
                .with_context(|| format!("in {}", path.display()))?;
        }
        if let Some(engine) = self.engine {
            config.engine = engine;
        }
        if !self.q.is_empty() {
            config.q_values = self.q.clone();
        }
        if let Some(m) = self.m {
            config.m = m;
        }
        if let Some(v) = self.nbar {
            config.mean_photons = v;
        }
        if let Some(v) = self.lambda {
            config.lambda = v;
        }
        if let Some(v) = self.lambda2 {
            config.lambda2 = Some(v);
        }
        if let Some(v) = self.detuning {
            config.detuning = v;
        }
        if let Some(v) = self.field_freq {
            config.field_freq = v;
        }
        if let Some(v) = self.t_max {
            config.t_max = v;
        }
        if let Some(v) = self.steps {
            config.t_steps = v;
        }
        for (key, value) in [
            ("atoms", &self.atoms),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
        ] {
            if let Some(value) = value {
                config.set(key, value)?;
            }
        }
        if let Some(v) = self.tail_eps {
            config.tail_eps = v;
        }
        Ok(config)
    }

    fn emit(&self, csv: &str) -> Result<()> {
        match &self.out {
            Some(path) => {
                fs::write(path, csv).with_context(|| format!("writing {}", path.display()))
            }
            None => io::stdout()
                .lock()
                .write_all(csv.as_bytes())
                .context("writing stdout"),
        }
    }
}

fn run_sweep(args: &SweepArgs, teleport: bool) -> Result<()> {
    let config = args.resolve(teleport)?;
    let prepared = config.prepare()?;
    for warning in &prepared.warnings {
        eprintln!("warning: {warning}");
    }
    let csv = if teleport {
        let rows = sweep::teleport(&config, &prepared)?;
        sweep::teleport_csv(&config, &prepared, &rows)?
    } else {
        let rows = sweep::simulate(&config, &prepared)?;
        sweep::simulate_csv(&config, &prepared, &rows)
    };
    args.emit(&csv)
}

fn run_validate() -> Result<bool> {
    let checks = validation::run_suite()?;
    let mut all = true;
    for check in &checks {
        println!("{check}");
        all &= check.passed;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {failed} failed", checks.len());
    Ok(all)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => run_sweep(args, false).map(|_| true),
        Command::Teleport(args) => run_sweep(args, true).map(|_| true),
        Command::Validate => run_validate(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
