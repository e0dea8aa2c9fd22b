//! Effective three-mode boson model with pair scattering `a0† a2† a1 a1`.
//!
//! The crate builds the reduced tridiagonal Hamiltonian in the `D = 0`
//! sector, diagonalizes it, tracks the ground-state transition, analyses the
//! classical two-dimensional phase space and maps microcavity polariton
//! parameters onto the model couplings.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod error;
pub mod grid;
pub mod ground;
pub mod model;
pub mod phase_diagram;
pub mod polariton;
pub mod spectral;

mod eigen;

pub use classical::{ClassicalParams, OrbitClass, PhasePoint};
pub use error::{Error, Result};
pub use ground::{GroundReport, SweepTable};
pub use model::{build_basis, build_hamiltonian, dense_oracle, ModelParams, TridiagonalHamiltonian};
pub use phase_diagram::PhaseDiagram;
pub use polariton::MicrocavityParams;
pub use spectral::{diagonalize, Spectrum, StateLabel};
