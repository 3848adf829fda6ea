//! # carrier
//!
//! Relative-entropy correlation measures for few-qubit states, and the
//! machinery to test how much entanglement two distant labs can gain by
//! sending a carrier system between them.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`qstate`] | density matrices, pure states, cuts, unitaries, state files |
//! | [`infotheory`] | von Neumann entropy, relative entropy, mutual information |
//! | [`separability`] | PPT test, Schmidt decomposition, Vidal–Tarrach threshold |
//! | [`correlations`] | relative entropy of discord and of entanglement, with bound directions |
//! | [`protocol`] | encode / transfer / decode scenarios and inequality verifiers |
//! | [`examples`] | constructors and end-to-end runs of the worked distribution protocols |
//!
//! All entropies are in bits. States are dense and small (total dimension at
//! most 16 for the measures, 64 for plain state manipulation).

#![forbid(unsafe_code)]

pub mod correlations;
pub mod error;
pub mod examples;
pub mod infotheory;
pub mod linalg;
pub mod optimize;
pub mod protocol;
pub mod qstate;
pub mod separability;

pub use error::{Error, Result};
pub use qstate::{CutSpec, DensityMatrix, PureState, UnitaryOp};
