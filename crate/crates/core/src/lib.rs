//! Statevector simulation of qudit registers with nonstabilizerness tracking.
//!
//! The crate simulates D-level registers (qubits and qutrits in the main
//! pipelines, arbitrary D for the state layer), quantifies how far a state
//! sits from the stabilizer polytope, and drives two workloads on disordered
//! cost models: layered variational circuits and adiabatic ground-state
//! sweeps. Analysis routines aggregate ensembles of such runs into curves,
//! scaling fits, and conditional statistics.
//!
//! Conventions used throughout:
//!
//! * Basis states of an `N`-site register with local dimension `D` are
//!   indexed lexicographically with site 0 as the most significant digit.
//! * Generalized Pauli operators are written `X^a Z^b` per site, in that
//!   operator order and with no overall phase.
//! * Entropies and negativity measures are reported in bits (base-2 logs).

pub mod analysis;
pub mod anneal;
pub mod ansatz;
pub mod collapse;
pub mod config;
pub mod error;
pub mod gates;
pub mod io;
pub mod lanczos;
pub mod magic;
pub mod pauli;
pub mod pipeline;
pub mod qaoa;
pub mod sk;
pub mod state;

mod optimizer;
mod simplex;

pub use error::{Error, Result};
pub use state::QuditState;
