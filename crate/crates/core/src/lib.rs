//! Boundary-driven quantum spin chains in the Lindblad formalism.

pub mod chain;
pub mod config;
pub mod currents;
pub mod driving;
pub mod error;
pub mod liouvillian;
pub mod pauli;
pub mod runner;
pub mod symmetry;
pub mod uniqueness;

pub use chain::{build_hamiltonian, ChainSpec, ModelKind};
pub use driving::{build_lindblad_set, invert_baths, DrivingCase, DrivingConfig, LindbladSet, Orientation};
pub use error::{Error, Result};
pub use pauli::{DenseOperator, OperatorSum, Pauli, PauliString};
