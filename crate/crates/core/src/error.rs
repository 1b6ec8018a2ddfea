use alloc::string::String;

use thiserror::Error;

use crate::circuit::{BuildErrors, Class};

/// Errors raised by operations on validated circuits.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("circuit is {0}, expected an open circuit")]
    NotOpen(Class),
    #[error("circuit is {0}, expected a closed circuit")]
    NotClosed(Class),
    #[error("circuit is {0}, expected a semi-closed circuit")]
    NotSemiClosed(Class),
    #[error("expected a vector of length {expected}, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("assignment is not total: expected {expected_ports} ports and {expected_gates} gates, got {found_ports} and {found_gates}")]
    PartialAssignment { expected_ports: usize, expected_gates: usize, found_ports: usize, found_gates: usize },
    #[error("{found} feedback variables exceed the enumeration bound of {bound}")]
    TooManyFeedbackVariables { found: usize, bound: usize },
    #[error("conflict budget of {budget} exhausted before a verdict was reached")]
    Indeterminate { budget: u64 },
    #[error("observation domain mismatch: {0}")]
    WrongObservationDomain(String),
    #[error("circuit has no designated output gate")]
    NoDesignatedOutput,
    #[error("circuit has no input ports")]
    NoPorts,
    #[error("cannot split {ports} ports into {instance} instance ports and at least one certificate port")]
    BadSplit { ports: usize, instance: usize },
    #[error("vector is not a stable witness of the reduced circuit")]
    NotAWitness,
    #[error("state has length {found}, policy expects {expected}")]
    StateShapeMismatch { expected: usize, found: usize },
    #[error("formula has no variables or no clauses")]
    EmptyFormula,
    #[error("{0}")]
    Build(#[from] BuildErrors),
}
