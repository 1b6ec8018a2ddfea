//! Seeded generators for random circuits and formulas.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::circuit::{Circuit, CircuitBuilder, GateKind};
use crate::cnf::CnfFormula;

const LOGIC_KINDS: [GateKind; 8] = [
    GateKind::Not,
    GateKind::Buf,
    GateKind::And,
    GateKind::Or,
    GateKind::Nand,
    GateKind::Nor,
    GateKind::Xor,
    GateKind::Xnor,
];

fn open_builder<R: Rng + ?Sized>(rng: &mut R, ports: &[String], n_gates: usize) -> CircuitBuilder {
    assert!(n_gates >= 1);
    let mut b = CircuitBuilder::new();
    let mut names: Vec<String> = ports.to_vec();
    for p in ports {
        b.add_port(p.clone());
    }
    for j in 1..=n_gates {
        let kind = if names.is_empty() {
            if rng.random() {
                GateKind::Const1
            } else {
                GateKind::Const0
            }
        } else {
            *LOGIC_KINDS.choose(rng).unwrap()
        };
        let pins: Vec<String> = (0..kind.arity()).map(|_| names.choose(rng).unwrap().clone()).collect();
        let name = format!("g{j}");
        b.add_gate(name.clone(), kind, pins);
        names.push(name);
    }
    b.set_output(format!("g{n_gates}"));
    b
}

fn port_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// Open circuit with ports `x1..xn` and gates `g1..gm` (each reading ports or
/// earlier gates); the output is `gm`.
pub fn open_circuit<R: Rng + ?Sized>(rng: &mut R, n_ports: usize, n_gates: usize) -> Circuit {
    open_builder(rng, &port_names("x", n_ports), n_gates).build().unwrap()
}

/// Closed circuit: an [`open_circuit`] with every port bound to a random gate.
pub fn closed_circuit<R: Rng + ?Sized>(rng: &mut R, n_ports: usize, n_gates: usize) -> Circuit {
    let ports = port_names("x", n_ports);
    let mut b = open_builder(rng, &ports, n_gates);
    for p in &ports {
        let g = rng.random_range(1..=n_gates);
        b.add_binding(p.clone(), format!("g{g}"));
    }
    b.build().unwrap()
}

/// Verifier-shaped open circuit: instance ports `i1..` followed by
/// certificate ports `y1..`.
pub fn verifier_circuit<R: Rng + ?Sized>(
    rng: &mut R,
    n_instance: usize,
    n_certificate: usize,
    n_gates: usize,
) -> Circuit {
    let mut ports = port_names("i", n_instance);
    ports.extend(port_names("y", n_certificate));
    open_builder(rng, &ports, n_gates).build().unwrap()
}

/// Random formula with clause lengths in `1..=max_len` over distinct variables.
pub fn cnf<R: Rng + ?Sized>(rng: &mut R, num_vars: usize, num_clauses: usize, max_len: usize) -> CnfFormula {
    let vars: Vec<i32> = (1..=num_vars as i32).collect();
    let clauses = (0..num_clauses)
        .map(|_| {
            let len = rng.random_range(1..=max_len.min(num_vars).max(1));
            vars.choose_multiple(rng, len).map(|&v| if rng.random() { v } else { -v }).collect()
        })
        .collect();
    CnfFormula::new(num_vars, clauses).unwrap()
}
