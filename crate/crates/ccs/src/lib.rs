//! File formats and the command-line front end for closed-circuit stability.
//!
//! - [`netlist`]: the line-oriented circuit format, with line-numbered errors.
//! - [`dimacs`]: DIMACS CNF reading and writing.
//! - [`report`]: the JSON envelope every command prints.
//! - [`cli`]: argument parsing and command dispatch for the `ccs` binary.

pub mod cli;
pub mod dimacs;
pub mod netlist;
pub mod report;

pub use dimacs::{emit_dimacs, parse_dimacs, DimacsError};
pub use netlist::{emit_netlist, parse_netlist, NetlistError};
pub use report::RunReport;
