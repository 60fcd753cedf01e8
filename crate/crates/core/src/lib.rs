//! Simulation of Shor's factoring circuit with a focus on macroscopic
//! entanglement and its sensitivity to low-frequency noise.
//!
//! The crate tracks the full pure state through every elementary step,
//! measures fluctuations of normalized additive operators, and injects
//! `1/f`-type classical noise to quantify how much each intermediate state
//! is damaged.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decoherence;
pub mod error;
pub mod fit;
pub mod gates;
pub mod kernel;
pub mod layout;
pub mod noise;
pub mod number;
pub mod observables;
pub mod pauli;
pub mod pipeline;
pub mod scaling;
pub mod schedule;
pub mod state;
pub mod unitary;

pub use error::{Error, Result};
pub use layout::RegisterLayout;
pub use pauli::Pauli;
pub use state::{BackendKind, PureState};

pub type C64 = num_complex::Complex64;
