#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Exact simulation of entangled coherent-state qubits.
//!
//! States are finite superpositions of multimode coherent states, so beam
//! splitters, displacements and ideal photodetection act in closed form.
//! A truncated number-basis engine in [`fock`] provides independent checks.

extern crate alloc;

pub mod conditioning;
pub mod entanglement;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod optics;
pub mod purification;
pub mod rng;
pub mod states;
pub mod verify;

pub use error::{Error, Result};
pub use states::{CoherentLabel, EntangledKind, MixedState, QuasiBell, SuperposedState};
