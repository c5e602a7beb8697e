//! Simulation of a cavity-mediated parity measurement on a qubit register:
//! multi-tone drive of a dispersively coupled cavity, threshold photon
//! counting with a Josephson photomultiplier, and cavity reset.
//!
//! Composite Hilbert spaces are ordered left to right with the leftmost
//! factor as the slowest index, so `|i⟩ ⊗ |j⟩` has index `i · d₂ + j`.

pub mod decay;
pub mod error;
pub mod expm;
pub mod fock;
pub mod jc;
pub mod jpm;
pub mod lindblad;
pub mod mismatch;
pub mod ode;
pub mod protocol;
mod sparse;

pub use error::{Error, Result};
pub use fock::{
    coherent_overlap, coherent_state, displacement_operator, embed_at, ladder_operators, partial_trace,
    recommended_dim, tensor_density, tensor_embed, truncation_adequate, DensityMatrix, HilbertSpace,
    LadderOperators, OperatorMatrix, StateDiagnostics, StateVector,
};
pub use lindblad::{
    evolve, evolve_pure, expectation_series, expectation_series_complex, steady_state, DriveTerm,
    EvolutionResult, EvolveOptions, Hamiltonian, Hygiene, LindbladModel,
};
pub use num_complex::Complex64;
pub use jc::{build_jc_model, jc_contrast, jc_drive_all, jc_drive_evolution, DarkChoice, Frame, JcModel};
pub use jpm::{detection_probability, detection_probability_from_state, JpmParams, MeasurementCurve};
pub use protocol::{DrivePulse, Parity, QubitRegister, Tone};
