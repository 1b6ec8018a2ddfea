//! Closed Boolean circuits with feedback loops.
//!
//! A [`Circuit`] is a netlist of fixed-arity gates over external input ports,
//! where a port may be bound to a gate output (a feedback loop). A circuit
//! whose ports are all bound is *closed*; it is *stable* when some assignment
//! of Boolean values to its gate outputs preserves the function of every gate.
//!
//! The crate provides:
//!
//! * [`circuit`]: construction, validation, classification and evaluation;
//! * [`charsys`]: the characteristic system (feedforward and feedback
//!   equations) of a circuit and the induced assignment of a feedback vector;
//! * [`stability`]: three deciders for stability (enumeration, CNF + DPLL,
//!   and verification of an observation of the feedback source gates);
//! * [`cnf`]: CNF formulas, a deterministic DPLL solver, and synthesis of a
//!   circuit computing a CNF;
//! * [`reductions`]: circuit satisfiability to stability, verifier circuits to
//!   semi-closed circuits, instance closure and control gating;
//! * [`dynamics`]: synchronous and asynchronous update dynamics whose fixed
//!   points are the stable assignments;
//! * [`samples`]: small reference circuits, and [`random`] seeded generators.
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is enabled,
//! which only adds wall-clock timing to stability reports.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod charsys;
pub mod circuit;
pub mod cnf;
pub mod dynamics;
mod error;
pub mod random;
pub mod reductions;
pub mod samples;
pub mod stability;

pub use charsys::CharacteristicSystem;
pub use circuit::{Assignment, BuildError, BuildErrors, Circuit, CircuitBuilder, Class, GateKind, Source};
pub use cnf::{CnfFormula, DpllOutcome};
pub use error::Error;
pub use stability::{Method, Mode, StabilityReport, Verdict};

/// Decodes `index` into a vector of `n` bits, first element most significant.
pub fn bits_msb_first(index: u64, n: usize) -> alloc::vec::Vec<bool> {
    (0..n).map(|i| (index >> (n - 1 - i)) & 1 == 1).collect()
}

/// Inverse of [`bits_msb_first`].
pub fn index_msb_first(bits: &[bool]) -> u64 {
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b))
}
