//! Optimal copying of a single qubit into two (possibly unequal, possibly
//! anisotropic) copies, measured by trace-norm distinguishability.
//!
//! The crate is organised bottom-up:
//!
//! - [`pauli`]: Pauli matrices, the `L(jk;lm)` tensor and the `Λ` matrix.
//! - [`linalg`]: small dense Hermitian eigensolver, trace norm, partial trace.
//! - [`channel`]: Gram matrix `E`, isometry `V`, affine Bloch maps `B`/`C`.
//! - [`quality`]: quality functions for the `B`, `C` and `E` outputs.
//! - [`optimizer`]: the optimization map `G`, optimal pairs, Jacobians, class P.
//! - [`circuit`]: three-qubit simulator for the optimal copying circuits.
//! - [`validation`]: symmetry, concavity and monotonicity experiments.
//! - [`registry`]: name-keyed trait-object registries for interchangeable variants.
//! - [`sampling`]: seeded random generators shared by tests and scans.

pub mod channel;
pub mod circuit;
pub mod error;
pub mod linalg;
pub mod optimizer;
pub mod pauli;
pub mod quality;
pub mod registry;
pub mod sampling;
pub mod validation;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Default tolerance for physicality and consistency checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Even permutations `(q, q', q'')` of the spatial indices, zero-based
/// (component `q` of a 3-vector is index `q - 1`).
pub const CYCLIC: [(usize, usize, usize); 3] = [(0, 1, 2), (1, 2, 0), (2, 0, 1)];
