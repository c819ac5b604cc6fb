//! Classical ground states of Ising spin glasses on quasi-1D graphs, found by
//! annealing the transverse-field ground state inside the matrix-product
//! subspace: the state is tracked with DMRG while the field is ramped down,
//! then the spins are read out. Exact enumeration and simulated thermal
//! annealing live alongside as independent references.
//!
//! The crate is generic over the floating-point scalar (`f32`/`f64`) through
//! [`Scalar`]; the `*64` aliases below are the default precision.

pub mod baselines;
pub mod dmrg;
pub mod ed;
pub mod format;
pub mod hamiltonian;
pub mod instance;
pub mod lanczos;
pub mod linalg;
pub mod mps;
pub mod observables;
pub mod qwa;
pub mod rng;
mod scalar;

pub use scalar::Scalar;

pub use instance::{Geometry, Instance, SpinConfiguration};
pub use mps::{MatrixProductState, TruncationPolicy};

/// Default-precision aliases.
pub type Instance64 = Instance<f64>;
pub type MatrixProductState64 = MatrixProductState<f64>;
pub type TruncationPolicy64 = TruncationPolicy<f64>;
pub type MatrixProductOperator64 = hamiltonian::MatrixProductOperator<f64>;
pub type AnnealParams64 = qwa::AnnealParams<f64>;
pub type RunResult64 = qwa::RunResult<f64>;
pub type StaParams64 = baselines::StaParams<f64>;
