//! Finite-dimensional quantum operations: density operators, partial trace,
//! projective and POVM measurement, Kraus channels, information erasure and
//! von Neumann entropy, plus a two-chamber Maxwell-demon simulation with a
//! Landauer entropy ledger.
//!
//! Multi-party spaces use big-endian ordering: in `kron(A, B)` the first
//! factor is the most significant digit of the basis index.

pub mod channel;
pub mod demon;
pub mod entropy;
pub mod error;
pub mod linalg;
pub mod measurement;
pub mod par;
pub mod random;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod state;

pub use error::{Error, Result};
pub use linalg::{c, Complex, ComplexMatrix};
pub use par::Execution;
pub use state::{DensityOperator, Ket};
