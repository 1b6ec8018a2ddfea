//! Circuit constructions that turn satisfiability questions into stability
//! questions.
//!
//! [`csat_to_ccs`] closes an open circuit `I` with one `NOT` gate on its output
//! and one `XOR` gate per port, `x_i = XOR(NOT(f), x_i)`. A feedback vector is
//! a witness of the result exactly when it satisfies `I`.
//! [`build_semi_closed`] applies the same gadget to the certificate ports of
//! a verifier circuit only, [`close_with_instance`] pins the remaining ports
//! to constants, and [`add_control_gate`] routes every loop through an `AND`
//! with a new control port.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::Serialize;

use crate::circuit::{Circuit, Class, GateKind};
use crate::stability::require_closed;
use crate::Error;

/// What a feedback gadget added to its source circuit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionRecord {
    /// [`Circuit::fingerprint`] of the source circuit, as 16 hex digits.
    pub source: String,
    pub not_gate: String,
    pub xor_gates: Vec<String>,
    /// `(port, xor gate)` per feedback loop, in port order.
    pub port_to_xor: Vec<(String, String)>,
    /// Ports left unbound (instance ports); empty for a full reduction.
    pub instance_ports: Vec<String>,
    /// Gate count of the source circuit.
    pub source_gates: usize,
    /// Number of feedback loops added.
    pub n: usize,
    /// Gate count of the result, always `source_gates + n + 1`.
    pub total_gates: usize,
}

fn require_open(c: &Circuit) -> Result<(), Error> {
    match c.classify() {
        Class::Open if c.n_ports() > 0 => Ok(()),
        Class::Open => Err(Error::NoPorts),
        other => Err(Error::NotOpen(other)),
    }
}

/// Adds `NOT(output)` and `x_p = XOR(NOT, x_p)` for each port `p` in `fed`.
fn add_feedback_gadget(c: &Circuit, fed: &[usize]) -> Result<(Circuit, ReductionRecord), Error> {
    let output = c.output().ok_or(Error::NoDesignatedOutput)?;
    let mut b = c.to_builder();
    let not_gate = b.fresh_name("neg_out");
    b.add_gate(not_gate.clone(), GateKind::Not, [c.gate(output).name().to_string()]);
    let mut xor_gates = Vec::with_capacity(fed.len());
    let mut port_to_xor = Vec::with_capacity(fed.len());
    for &p in fed {
        let port = c.ports()[p].clone();
        let xor = b.fresh_name(&format!("xor_{port}"));
        b.add_gate(xor.clone(), GateKind::Xor, [not_gate.clone(), port.clone()]);
        b.add_binding(port.clone(), xor.clone());
        xor_gates.push(xor.clone());
        port_to_xor.push((port, xor));
    }
    let reduced = b.build()?;
    let record = ReductionRecord {
        source: format!("{:016x}", c.fingerprint()),
        not_gate,
        xor_gates,
        port_to_xor,
        instance_ports: c.unbound_ports().filter(|p| !fed.contains(p)).map(|p| c.ports()[p].clone()).collect(),
        source_gates: c.n_gates(),
        n: fed.len(),
        total_gates: reduced.n_gates(),
    };
    debug_assert_eq!(record.total_gates, record.source_gates + record.n + 1);
    Ok((reduced, record))
}

/// Closes an open circuit so that it is stable iff the circuit is satisfiable.
///
/// The result keeps the source's ports (in order) and designated output.
pub fn csat_to_ccs(instance: &Circuit) -> Result<(Circuit, ReductionRecord), Error> {
    require_open(instance)?;
    let all: Vec<usize> = (0..instance.n_ports()).collect();
    add_feedback_gadget(instance, &all)
}

/// Maps a witness of `csat_to_ccs(instance)` back to a satisfying input of
/// `instance`, re-evaluating the instance to check it.
pub fn recover_witness(instance: &Circuit, record: &ReductionRecord, witness: &[bool]) -> Result<Vec<bool>, Error> {
    if witness.len() != record.n || record.n != instance.n_ports() {
        return Err(Error::LengthMismatch { expected: instance.n_ports(), found: witness.len() });
    }
    let values = witness.to_vec();
    let a = instance.eval_open(&values)?;
    match instance.output_value(&a) {
        Some(true) => Ok(values),
        Some(false) => Err(Error::NotAWitness),
        None => Err(Error::NoDesignatedOutput),
    }
}

/// Feeds back the certificate ports (all ports after the first `n_instance`)
/// of a verifier circuit. The instance ports stay free.
pub fn build_semi_closed(verifier: &Circuit, n_instance: usize) -> Result<(Circuit, ReductionRecord), Error> {
    match verifier.classify() {
        Class::Open => {}
        other => return Err(Error::NotOpen(other)),
    }
    if n_instance >= verifier.n_ports() {
        return Err(Error::BadSplit { ports: verifier.n_ports(), instance: n_instance });
    }
    let certificate: Vec<usize> = (n_instance..verifier.n_ports()).collect();
    add_feedback_gadget(verifier, &certificate)
}

/// Replaces each unbound port by a constant gate of the same name carrying
/// the corresponding bit (in port order). The result is closed.
pub fn close_with_instance(sc: &Circuit, bits: &[bool]) -> Result<Circuit, Error> {
    let class = sc.classify();
    if class != Class::SemiClosed {
        return Err(Error::NotSemiClosed(class));
    }
    let free: Vec<usize> = sc.unbound_ports().collect();
    if bits.len() != free.len() {
        return Err(Error::LengthMismatch { expected: free.len(), found: bits.len() });
    }
    let mut b = Circuit::builder();
    for (p, name) in sc.ports().iter().enumerate() {
        if !free.contains(&p) {
            b.add_port(name.clone());
        }
    }
    for (&p, &bit) in free.iter().zip(bits) {
        let kind = if bit { GateKind::Const1 } else { GateKind::Const0 };
        b.add_gate(sc.ports()[p].clone(), kind, core::iter::empty::<String>());
    }
    for g in sc.gates() {
        b.add_gate(g.name(), g.kind(), g.pins().iter().map(|&s| sc.source_name(s).to_string()));
    }
    for (p, g) in sc.bindings() {
        b.add_binding(sc.ports()[p].clone(), sc.gate(g).name());
    }
    if let Some(o) = sc.output() {
        b.set_output(sc.gate(o).name());
    }
    Ok(b.build()?)
}

/// Adds a free control port and rewires every loop `x_i = y_k` as
/// `x_i = AND(s, y_k)`. Closing the result with the control at 1 gives back
/// the original witnesses; at 0 every loop is forced to 0.
pub fn add_control_gate(c: &Circuit) -> Result<Circuit, Error> {
    add_control_gate_named(c, "s")
}

pub fn add_control_gate_named(c: &Circuit, control: &str) -> Result<Circuit, Error> {
    require_closed(c)?;
    let mut b = Circuit::builder();
    for p in c.ports() {
        b.add_port(p.clone());
    }
    for g in c.gates() {
        b.add_gate(g.name(), g.kind(), g.pins().iter().map(|&s| c.source_name(s).to_string()));
    }
    let s = b.fresh_name(control);
    b.add_port(s.clone());
    let mut gated = Vec::new();
    for (p, g) in c.bindings() {
        let port = &c.ports()[p];
        let and = b.fresh_name(&format!("and_{port}"));
        b.add_gate(and.clone(), GateKind::And, [s.clone(), c.gate(g).name().to_string()]);
        gated.push((port.clone(), and));
    }
    for (port, and) in gated {
        b.add_binding(port, and);
    }
    if let Some(o) = c.output() {
        b.set_output(c.gate(o).name());
    }
    Ok(b.build()?)
}
