//! Characteristic systems: one feedforward equation per gate and one
//! feedback equation per bound port.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::circuit::{Assignment, Circuit, Class, GateKind, Source};
use crate::Error;

/// `y_j = KIND(operands)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeedforwardEq {
    pub gate: usize,
    pub kind: GateKind,
    pub operands: Vec<Source>,
}

/// `x_i = y_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeedbackEq {
    pub port: usize,
    pub source: usize,
}

/// The system of Boolean equations describing a circuit.
///
/// Equations are kept local to each gate; composed functions of the feedback
/// variables are obtained through [`induced_assignment`] or [`FeedbackMap`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacteristicSystem {
    port_names: Vec<String>,
    gate_names: Vec<String>,
    feedforward: Vec<FeedforwardEq>,
    feedback: Vec<FeedbackEq>,
    output: Option<usize>,
}

impl CharacteristicSystem {
    /// Equations of `c` in declaration order.
    pub fn extract(c: &Circuit) -> Self {
        CharacteristicSystem {
            port_names: c.ports().to_vec(),
            gate_names: c.gates().iter().map(|g| String::from(g.name())).collect(),
            feedforward: c
                .gates()
                .iter()
                .enumerate()
                .map(|(j, g)| FeedforwardEq { gate: j, kind: g.kind(), operands: g.pins().to_vec() })
                .collect(),
            feedback: c.bindings().map(|(port, source)| FeedbackEq { port, source }).collect(),
            output: c.output(),
        }
    }

    /// Rebuilds the circuit this system describes.
    pub fn reconstruct(&self) -> Circuit {
        let name = |s: &Source| match *s {
            Source::Port(p) => self.port_names[p].clone(),
            Source::Gate(g) => self.gate_names[g].clone(),
        };
        let mut b = Circuit::builder();
        for p in &self.port_names {
            b.add_port(p.clone());
        }
        for eq in &self.feedforward {
            b.add_gate(self.gate_names[eq.gate].clone(), eq.kind, eq.operands.iter().map(name));
        }
        for eq in &self.feedback {
            b.add_binding(self.port_names[eq.port].clone(), self.gate_names[eq.source].clone());
        }
        if let Some(o) = self.output {
            b.set_output(self.gate_names[o].clone());
        }
        b.build().expect("a system extracted from a valid circuit rebuilds")
    }

    pub fn feedforward(&self) -> &[FeedforwardEq] {
        &self.feedforward
    }

    pub fn feedback(&self) -> &[FeedbackEq] {
        &self.feedback
    }

    pub fn n_feedback(&self) -> usize {
        self.feedback.len()
    }

    /// True iff every equation holds under `a`, i.e. `a` is a stable assignment.
    pub fn check_assignment(&self, a: &Assignment) -> Result<bool, Error> {
        if a.ports.len() != self.port_names.len() || a.gates.len() != self.gate_names.len() {
            return Err(Error::PartialAssignment {
                expected_ports: self.port_names.len(),
                expected_gates: self.gate_names.len(),
                found_ports: a.ports.len(),
                found_gates: a.gates.len(),
            });
        }
        let mut buf = [false; 2];
        let ff_ok = self.feedforward.iter().all(|eq| {
            for (slot, s) in buf.iter_mut().zip(&eq.operands) {
                *slot = a.value(*s);
            }
            a.gates[eq.gate] == eq.kind.eval(&buf[..eq.operands.len()])
        });
        Ok(ff_ok && self.feedback.iter().all(|eq| a.ports[eq.port] == a.gates[eq.source]))
    }
}

impl fmt::Display for CharacteristicSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |s: &Source| match *s {
            Source::Port(p) => self.port_names[p].as_str(),
            Source::Gate(g) => self.gate_names[g].as_str(),
        };
        for eq in &self.feedforward {
            write!(f, "{} = {}(", self.gate_names[eq.gate], eq.kind)?;
            for (i, s) in eq.operands.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                f.write_str(name(s))?;
            }
            f.write_str(")\n")?;
        }
        for eq in &self.feedback {
            writeln!(f, "{} = {}", self.port_names[eq.port], self.gate_names[eq.source])?;
        }
        Ok(())
    }
}

/// Total assignment obtained by driving the ports of a closed circuit with
/// `feedback_values` (in port order) and propagating through the gates.
///
/// Port values are copied from the vector, not from their source gates, so
/// only the feedback equations can fail under the result.
pub fn induced_assignment(c: &Circuit, feedback_values: &[bool]) -> Result<Assignment, Error> {
    let class = c.classify();
    if class != Class::Closed {
        return Err(Error::NotClosed(class));
    }
    if feedback_values.len() != c.n_ports() {
        return Err(Error::LengthMismatch { expected: c.n_ports(), found: feedback_values.len() });
    }
    let mut gates = vec![false; c.n_gates()];
    c.propagate(feedback_values, &mut gates);
    Ok(Assignment::new(feedback_values.to_vec(), gates))
}

/// The composed feedback map `x -> (y_{k_1}(x), ..., y_{k_n}(x))` of a closed
/// circuit, with reusable scratch space for tight loops.
#[derive(Clone, Debug)]
pub struct FeedbackMap<'c> {
    circuit: &'c Circuit,
    sources: Vec<usize>,
    gates: Vec<bool>,
}

impl<'c> FeedbackMap<'c> {
    pub fn new(circuit: &'c Circuit) -> Result<Self, Error> {
        let class = circuit.classify();
        if class != Class::Closed {
            return Err(Error::NotClosed(class));
        }
        let sources = (0..circuit.n_ports()).map(|p| circuit.binding(p).unwrap()).collect();
        Ok(FeedbackMap { circuit, sources, gates: vec![false; circuit.n_gates()] })
    }

    pub fn circuit(&self) -> &'c Circuit {
        self.circuit
    }

    pub fn n(&self) -> usize {
        self.sources.len()
    }

    /// Gate values induced by `x`, valid until the next call.
    pub fn induce(&mut self, x: &[bool]) -> &[bool] {
        self.circuit.propagate(x, &mut self.gates);
        &self.gates
    }

    /// Writes `F(x)` into `out`.
    pub fn apply(&mut self, x: &[bool], out: &mut [bool]) {
        self.circuit.propagate(x, &mut self.gates);
        for (o, &k) in out.iter_mut().zip(&self.sources) {
            *o = self.gates[k];
        }
    }

    /// `F(x) == x`, i.e. `x` is a stable witness.
    pub fn is_fixed(&mut self, x: &[bool]) -> bool {
        self.circuit.propagate(x, &mut self.gates);
        self.sources.iter().zip(x).all(|(&k, &v)| self.gates[k] == v)
    }
}
