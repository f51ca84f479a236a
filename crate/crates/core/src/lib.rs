//! Two two-level atoms coupled to a q-deformed multiphoton cavity mode.
//!
//! Two independent engines produce the reduced two-atom state:
//! [`closed_form`] evaluates the analytic manifold amplitudes and assembles
//! Bloch vectors and the cross dyadic from them, while [`exact`] builds the
//! Hamiltonian on the truncated atom-atom-Fock space, propagates by block
//! diagonalization and traces out the field. [`analysis`] converts between
//! density matrices and the Bloch/dyadic form and evaluates the
//! entanglement-dyadic measure; [`teleport`] runs the standard teleportation
//! protocol over the generated channel.

pub mod algebra;
pub mod analysis;
pub mod closed_form;
pub mod density;
pub mod error;
pub mod exact;
pub mod sweep;
pub mod teleport;
pub mod validation;

pub use algebra::{DeformationParameter, FieldSpec, LadderCouplings};
pub use analysis::TwoQubitBlochState;
pub use closed_form::{AmplitudeQuadruple, CoefficientTable};
pub use density::DensityMatrix;
pub use error::{Error, Result};
pub use exact::{AtomicInitialState, CompositeState, HamiltonianSpec, Propagator};
pub use teleport::{TeleportOutcome, UnknownQubit};
