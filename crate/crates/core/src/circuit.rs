//! Boolean netlists with feedback bindings.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Error;

/// Function computed by a gate.
///
/// `NOT`/`BUF` are unary, `CONST0`/`CONST1` are nullary and every other kind
/// takes exactly two inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    Not,
    Buf,
    And,
    Or,
    Nand,
    Nor,
    Xor,
    Xnor,
    Const0,
    Const1,
}

impl GateKind {
    pub const ALL: [GateKind; 10] = [
        GateKind::Not,
        GateKind::Buf,
        GateKind::And,
        GateKind::Or,
        GateKind::Nand,
        GateKind::Nor,
        GateKind::Xor,
        GateKind::Xnor,
        GateKind::Const0,
        GateKind::Const1,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Const0 | GateKind::Const1 => 0,
            GateKind::Not | GateKind::Buf => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Not => "NOT",
            GateKind::Buf => "BUF",
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Nand => "NAND",
            GateKind::Nor => "NOR",
            GateKind::Xor => "XOR",
            GateKind::Xnor => "XNOR",
            GateKind::Const0 => "CONST0",
            GateKind::Const1 => "CONST1",
        }
    }

    /// Applies the gate function. `inputs` must have length [`arity`](Self::arity).
    #[inline]
    pub fn eval(self, inputs: &[bool]) -> bool {
        debug_assert_eq!(inputs.len(), self.arity());
        match self {
            GateKind::Const0 => false,
            GateKind::Const1 => true,
            GateKind::Not => !inputs[0],
            GateKind::Buf => inputs[0],
            GateKind::And => inputs[0] & inputs[1],
            GateKind::Or => inputs[0] | inputs[1],
            GateKind::Nand => !(inputs[0] & inputs[1]),
            GateKind::Nor => !(inputs[0] | inputs[1]),
            GateKind::Xor => inputs[0] ^ inputs[1],
            GateKind::Xnor => !(inputs[0] ^ inputs[1]),
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownGateKind(pub String);

impl fmt::Display for UnknownGateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown gate kind `{}`", self.0)
    }
}

impl FromStr for GateKind {
    type Err = UnknownGateKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GateKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| UnknownGateKind(s.to_string()))
    }
}

/// Where a gate input (a pin) reads its value from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    /// External input port, by position in [`Circuit::ports`].
    Port(usize),
    /// Gate output, by position in [`Circuit::gates`].
    Gate(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gate {
    name: String,
    kind: GateKind,
    pins: Vec<Source>,
}

impl Gate {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn pins(&self) -> &[Source] {
        &self.pins
    }
}

/// Open: no bindings. Closed: every port bound. Semi-closed: anything in between.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Class {
    Open,
    SemiClosed,
    Closed,
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Class::Open => "Open",
            Class::SemiClosed => "SemiClosed",
            Class::Closed => "Closed",
        })
    }
}

/// Declaration that a build error refers to, by position within its kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Item {
    Port(usize),
    Gate(usize),
    Binding(usize),
    Output,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("identifier `{name}` is declared more than once")]
    DuplicateIdentifier { name: String, at: Item },
    #[error("reference to undeclared identifier `{name}`")]
    UnknownReference { name: String, at: Item },
    #[error("`{name}` is a gate, a feedback binding must target an input port")]
    NotAPort { name: String, at: Item },
    #[error("`{name}` is an input port, expected a gate")]
    NotAGate { name: String, at: Item },
    #[error("gate `{gate}` of kind {kind} takes {expected} inputs, got {found}")]
    ArityMismatch { gate: String, kind: GateKind, expected: usize, found: usize, at: Item },
    #[error("port `{port}` is bound more than once")]
    DuplicateBinding { port: String, at: Item },
    #[error("combinational cycle through gates {}", .gates.join(" -> "))]
    CombinationalCycle { gates: Vec<String>, at: Item },
}

impl BuildError {
    pub fn item(&self) -> Item {
        match self {
            BuildError::DuplicateIdentifier { at, .. }
            | BuildError::UnknownReference { at, .. }
            | BuildError::NotAPort { at, .. }
            | BuildError::NotAGate { at, .. }
            | BuildError::ArityMismatch { at, .. }
            | BuildError::DuplicateBinding { at, .. }
            | BuildError::CombinationalCycle { at, .. } => *at,
        }
    }
}

/// Every violation found while validating a circuit.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct BuildErrors(pub Vec<BuildError>);

impl fmt::Display for BuildErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct GateDecl {
    name: String,
    kind: GateKind,
    pins: Vec<String>,
}

/// Name-based description of a circuit, validated by [`build`](Self::build).
///
/// References may point forward; only the final set of declarations matters.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CircuitBuilder {
    ports: Vec<String>,
    gates: Vec<GateDecl>,
    bindings: Vec<(String, String)>,
    output: Option<String>,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn port(mut self, name: impl Into<String>) -> Self {
        self.add_port(name);
        self
    }

    pub fn gate<I, S>(mut self, name: impl Into<String>, kind: GateKind, pins: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.add_gate(name, kind, pins);
        self
    }

    /// Feedback binding `port = gate`.
    pub fn bind(mut self, port: impl Into<String>, gate: impl Into<String>) -> Self {
        self.add_binding(port, gate);
        self
    }

    pub fn output(mut self, gate: impl Into<String>) -> Self {
        self.set_output(gate);
        self
    }

    pub fn add_port(&mut self, name: impl Into<String>) {
        self.ports.push(name.into());
    }

    pub fn add_gate<I, S>(&mut self, name: impl Into<String>, kind: GateKind, pins: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.gates.push(GateDecl { name: name.into(), kind, pins: pins.into_iter().map(Into::into).collect() });
    }

    pub fn add_binding(&mut self, port: impl Into<String>, gate: impl Into<String>) {
        self.bindings.push((port.into(), gate.into()));
    }

    pub fn set_output(&mut self, gate: impl Into<String>) {
        self.output = Some(gate.into());
    }

    pub fn clear_output(&mut self) {
        self.output = None;
    }

    /// True if `name` is already used by a port or a gate.
    pub fn is_declared(&self, name: &str) -> bool {
        self.ports.iter().any(|p| p == name) || self.gates.iter().any(|g| g.name == name)
    }

    /// Returns `base` if unused, otherwise `base_1`, `base_2`, ...
    pub fn fresh_name(&self, base: &str) -> String {
        if !self.is_declared(base) {
            return base.to_string();
        }
        (1..).map(|i| alloc::format!("{base}_{i}")).find(|n| !self.is_declared(n)).unwrap()
    }

    pub fn build(self) -> Result<Circuit, BuildErrors> {
        let mut errors = Vec::new();
        let mut index: BTreeMap<String, Source> = BTreeMap::new();

        for (i, p) in self.ports.iter().enumerate() {
            if index.insert(p.clone(), Source::Port(i)).is_some() {
                errors.push(BuildError::DuplicateIdentifier { name: p.clone(), at: Item::Port(i) });
            }
        }
        for (j, g) in self.gates.iter().enumerate() {
            if index.contains_key(&g.name) {
                errors.push(BuildError::DuplicateIdentifier { name: g.name.clone(), at: Item::Gate(j) });
            } else {
                index.insert(g.name.clone(), Source::Gate(j));
            }
        }

        let mut gates = Vec::with_capacity(self.gates.len());
        for (j, g) in self.gates.iter().enumerate() {
            if g.pins.len() != g.kind.arity() {
                errors.push(BuildError::ArityMismatch {
                    gate: g.name.clone(),
                    kind: g.kind,
                    expected: g.kind.arity(),
                    found: g.pins.len(),
                    at: Item::Gate(j),
                });
            }
            let mut pins = Vec::with_capacity(g.pins.len());
            for pin in &g.pins {
                match index.get(pin) {
                    Some(src) => pins.push(*src),
                    None => errors.push(BuildError::UnknownReference { name: pin.clone(), at: Item::Gate(j) }),
                }
            }
            gates.push(Gate { name: g.name.clone(), kind: g.kind, pins });
        }

        let mut bindings = vec![None; self.ports.len()];
        for (b, (port, gate)) in self.bindings.iter().enumerate() {
            let at = Item::Binding(b);
            let p = match index.get(port) {
                Some(Source::Port(p)) => Some(*p),
                Some(Source::Gate(_)) => {
                    errors.push(BuildError::NotAPort { name: port.clone(), at });
                    None
                }
                None => {
                    errors.push(BuildError::UnknownReference { name: port.clone(), at });
                    None
                }
            };
            let g = match index.get(gate) {
                Some(Source::Gate(g)) => Some(*g),
                Some(Source::Port(_)) => {
                    errors.push(BuildError::NotAGate { name: gate.clone(), at });
                    None
                }
                None => {
                    errors.push(BuildError::UnknownReference { name: gate.clone(), at });
                    None
                }
            };
            if let (Some(p), Some(g)) = (p, g) {
                if bindings[p].is_some() {
                    errors.push(BuildError::DuplicateBinding { port: port.clone(), at });
                } else {
                    bindings[p] = Some(g);
                }
            }
        }

        let output = match &self.output {
            None => None,
            Some(name) => match index.get(name) {
                Some(Source::Gate(g)) => Some(*g),
                Some(Source::Port(_)) => {
                    errors.push(BuildError::NotAGate { name: name.clone(), at: Item::Output });
                    None
                }
                None => {
                    errors.push(BuildError::UnknownReference { name: name.clone(), at: Item::Output });
                    None
                }
            },
        };

        let order = match topological_order(&gates) {
            Ok(order) => order,
            Err(cycle) => {
                errors.push(BuildError::CombinationalCycle {
                    gates: cycle.iter().map(|&j| gates[j].name.clone()).collect(),
                    at: Item::Gate(cycle[0]),
                });
                Vec::new()
            }
        };

        if !errors.is_empty() {
            return Err(BuildErrors(errors));
        }
        Ok(Circuit { ports: self.ports, gates, bindings, output, order, index })
    }
}

/// Kahn's algorithm over gate-to-gate pins, always emitting the lowest ready
/// declaration index. On failure returns the gates of one cycle, in wiring order.
fn topological_order(gates: &[Gate]) -> Result<Vec<usize>, Vec<usize>> {
    let m = gates.len();
    let mut indegree = vec![0usize; m];
    let mut fanout: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (j, g) in gates.iter().enumerate() {
        for pin in &g.pins {
            if let Source::Gate(k) = *pin {
                indegree[j] += 1;
                fanout[k].push(j);
            }
        }
    }
    let mut ready: alloc::collections::BinaryHeap<core::cmp::Reverse<usize>> =
        (0..m).filter(|&j| indegree[j] == 0).map(core::cmp::Reverse).collect();
    let mut order = Vec::with_capacity(m);
    while let Some(core::cmp::Reverse(j)) = ready.pop() {
        order.push(j);
        for &k in &fanout[j] {
            indegree[k] -= 1;
            if indegree[k] == 0 {
                ready.push(core::cmp::Reverse(k));
            }
        }
    }
    if order.len() == m {
        return Ok(order);
    }
    // Every unsorted gate has an unsorted predecessor; walking predecessors
    // from any of them must revisit a gate.
    let start = (0..m).find(|&j| indegree[j] > 0).unwrap();
    let mut seen = vec![usize::MAX; m];
    let mut path = Vec::new();
    let mut cur = start;
    while seen[cur] == usize::MAX {
        seen[cur] = path.len();
        path.push(cur);
        cur = gates[cur]
            .pins
            .iter()
            .find_map(|pin| match *pin {
                Source::Gate(k) if indegree[k] > 0 => Some(k),
                _ => None,
            })
            .unwrap();
    }
    let mut cycle = path.split_off(seen[cur]);
    cycle.reverse();
    Err(cycle)
}

/// A validated, immutable netlist.
#[derive(Clone, Debug)]
pub struct Circuit {
    ports: Vec<String>,
    gates: Vec<Gate>,
    bindings: Vec<Option<usize>>,
    output: Option<usize>,
    order: Vec<usize>,
    index: BTreeMap<String, Source>,
}

impl PartialEq for Circuit {
    fn eq(&self, other: &Self) -> bool {
        self.ports == other.ports
            && self.gates == other.gates
            && self.bindings == other.bindings
            && self.output == other.output
    }
}

impl Eq for Circuit {}

impl Circuit {
    pub fn builder() -> CircuitBuilder {
        CircuitBuilder::new()
    }

    /// Declarations of this circuit, in declaration order.
    pub fn to_builder(&self) -> CircuitBuilder {
        let mut b = CircuitBuilder::new();
        for p in &self.ports {
            b.add_port(p.clone());
        }
        for g in &self.gates {
            b.add_gate(g.name.clone(), g.kind, g.pins.iter().map(|&s| self.source_name(s).to_string()));
        }
        for (p, g) in self.bindings() {
            b.add_binding(self.ports[p].clone(), self.gates[g].name.clone());
        }
        if let Some(o) = self.output {
            b.set_output(self.gates[o].name.clone());
        }
        b
    }

    pub fn ports(&self) -> &[String] {
        &self.ports
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn n_ports(&self) -> usize {
        self.ports.len()
    }

    pub fn n_gates(&self) -> usize {
        self.gates.len()
    }

    pub fn gate(&self, j: usize) -> &Gate {
        &self.gates[j]
    }

    /// Source gate of the binding on port `p`, if any.
    pub fn binding(&self, p: usize) -> Option<usize> {
        self.bindings[p]
    }

    /// `(port, source gate)` pairs in port order.
    pub fn bindings(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bindings.iter().enumerate().filter_map(|(p, g)| g.map(|g| (p, g)))
    }

    pub fn n_bindings(&self) -> usize {
        self.bindings.iter().filter(|b| b.is_some()).count()
    }

    pub fn unbound_ports(&self) -> impl Iterator<Item = usize> + '_ {
        self.bindings.iter().enumerate().filter(|(_, b)| b.is_none()).map(|(p, _)| p)
    }

    /// Distinct binding source gates, ordered by first use in port order.
    pub fn source_gates(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for (_, g) in self.bindings() {
            if !out.contains(&g) {
                out.push(g);
            }
        }
        out
    }

    pub fn output(&self) -> Option<usize> {
        self.output
    }

    /// Gate indices in dependency order (ties broken by declaration order).
    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    pub fn lookup(&self, name: &str) -> Option<Source> {
        self.index.get(name).copied()
    }

    pub fn source_name(&self, s: Source) -> &str {
        match s {
            Source::Port(p) => &self.ports[p],
            Source::Gate(g) => &self.gates[g].name,
        }
    }

    pub fn classify(&self) -> Class {
        let bound = self.n_bindings();
        if bound == self.ports.len() {
            Class::Closed
        } else if bound == 0 {
            Class::Open
        } else {
            Class::SemiClosed
        }
    }

    /// Evaluates every gate from the given port values, in topological order.
    pub fn propagate(&self, ports: &[bool], gates: &mut [bool]) {
        debug_assert_eq!(ports.len(), self.ports.len());
        debug_assert_eq!(gates.len(), self.gates.len());
        let mut buf = [false; 2];
        for &j in &self.order {
            let g = &self.gates[j];
            for (slot, pin) in buf.iter_mut().zip(&g.pins) {
                *slot = match *pin {
                    Source::Port(p) => ports[p],
                    Source::Gate(k) => gates[k],
                };
            }
            gates[j] = g.kind.eval(&buf[..g.pins.len()]);
        }
    }

    /// Combinational evaluation of an open circuit.
    pub fn eval_open(&self, inputs: &[bool]) -> Result<Assignment, Error> {
        let class = self.classify();
        if class != Class::Open {
            return Err(Error::NotOpen(class));
        }
        if inputs.len() != self.ports.len() {
            return Err(Error::LengthMismatch { expected: self.ports.len(), found: inputs.len() });
        }
        let mut gates = vec![false; self.gates.len()];
        self.propagate(inputs, &mut gates);
        Ok(Assignment { ports: inputs.to_vec(), gates })
    }

    /// Value of the designated output gate under `a`.
    pub fn output_value(&self, a: &Assignment) -> Option<bool> {
        self.output.map(|o| a.gates[o])
    }

    /// 64-bit FNV-1a digest of the structure (names, kinds, wiring, bindings, output).
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv64::new();
        for p in &self.ports {
            h.write(b"p");
            h.write(p.as_bytes());
            h.write(&[0]);
        }
        for g in &self.gates {
            h.write(b"g");
            h.write(g.name.as_bytes());
            h.write(&[0]);
            h.write(g.kind.name().as_bytes());
            for pin in &g.pins {
                h.write(&[0]);
                h.write(self.source_name(*pin).as_bytes());
            }
            h.write(&[1]);
        }
        for (p, g) in self.bindings() {
            h.write(b"f");
            h.write(self.ports[p].as_bytes());
            h.write(&[0]);
            h.write(self.gates[g].name.as_bytes());
            h.write(&[0]);
        }
        if let Some(o) = self.output {
            h.write(b"o");
            h.write(self.gates[o].name.as_bytes());
        }
        h.finish()
    }
}

struct Fnv64(u64);

impl Fnv64 {
    fn new() -> Self {
        Fnv64(0xcbf2_9ce4_8422_2325)
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

/// Boolean values for every port and every gate output of a circuit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Assignment {
    pub ports: Vec<bool>,
    pub gates: Vec<bool>,
}

impl Assignment {
    pub fn new(ports: Vec<bool>, gates: Vec<bool>) -> Self {
        Assignment { ports, gates }
    }

    pub fn value(&self, s: Source) -> bool {
        match s {
            Source::Port(p) => self.ports[p],
            Source::Gate(g) => self.gates[g],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;

    fn naive_eval(c: &Circuit, inputs: &[bool], s: Source) -> bool {
        match s {
            Source::Port(p) => inputs[p],
            Source::Gate(g) => {
                let gate = c.gate(g);
                let vals: Vec<bool> = gate.pins().iter().map(|&pin| naive_eval(c, inputs, pin)).collect();
                gate.kind().eval(&vals)
            }
        }
    }

    #[test]
    fn gate_kind_truth_tables() {
        let t = [(false, false), (false, true), (true, false), (true, true)];
        let table = |k: GateKind| t.map(|(a, b)| k.eval(&[a, b]));
        assert_eq!(table(GateKind::And), [false, false, false, true]);
        assert_eq!(table(GateKind::Or), [false, true, true, true]);
        assert_eq!(table(GateKind::Nand), [true, true, true, false]);
        assert_eq!(table(GateKind::Nor), [true, false, false, false]);
        assert_eq!(table(GateKind::Xor), [false, true, true, false]);
        assert_eq!(table(GateKind::Xnor), [true, false, false, true]);
        assert!(GateKind::Not.eval(&[false]));
        assert!(!GateKind::Buf.eval(&[false]));
        assert!(GateKind::Const1.eval(&[]));
        assert!(!GateKind::Const0.eval(&[]));
        for k in GateKind::ALL {
            assert_eq!(k.name().parse::<GateKind>().unwrap(), k);
        }
        assert!("nand".parse::<GateKind>().is_err());
    }

    #[test]
    fn nand_formula_is_open_with_four_gates() {
        let c = samples::nand_formula();
        assert_eq!(c.classify(), Class::Open);
        assert_eq!(c.n_gates(), 4);
        assert_eq!(c.n_ports(), 3);
    }

    #[test]
    fn buf_loop_is_closed() {
        let c = samples::buf_loop();
        assert_eq!(c.classify(), Class::Closed);
        assert_eq!(c.n_bindings(), 1);
    }

    #[test]
    fn classify_samples() {
        assert_eq!(samples::nand_feedback().classify(), Class::Closed);
        assert_eq!(samples::mixed_feedback().classify(), Class::Closed);
        assert_eq!(samples::gated_mixed_feedback().classify(), Class::SemiClosed);
        assert_eq!(samples::not_loop().classify(), Class::Closed);
    }

    #[test]
    fn direct_gate_cycle_is_rejected() {
        let err = Circuit::builder()
            .port("x1")
            .gate("g1", GateKind::And, ["g2", "x1"])
            .gate("g2", GateKind::Or, ["g1", "x1"])
            .build()
            .unwrap_err();
        assert_eq!(err.0.len(), 1);
        match &err.0[0] {
            BuildError::CombinationalCycle { gates, .. } => {
                let mut g = gates.clone();
                g.sort();
                assert_eq!(g, ["g1", "g2"]);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn self_loop_gate_is_a_cycle() {
        let err = Circuit::builder().gate("g", GateKind::Not, ["g"]).build().unwrap_err();
        assert!(matches!(&err.0[0], BuildError::CombinationalCycle { gates, .. } if gates == &["g"]));
    }

    #[test]
    fn cycle_reports_only_the_cycle() {
        // g3 hangs off the g1/g2 cycle but is not part of it.
        let err = Circuit::builder()
            .port("x")
            .gate("g3", GateKind::Not, ["g1"])
            .gate("g1", GateKind::And, ["g2", "x"])
            .gate("g2", GateKind::Buf, ["g1"])
            .build()
            .unwrap_err();
        match &err.0[0] {
            BuildError::CombinationalCycle { gates, .. } => assert!(!gates.contains(&"g3".to_string())),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn build_error_kinds() {
        let err = Circuit::builder()
            .port("x")
            .port("x")
            .gate("g", GateKind::And, ["x"])
            .gate("h", GateKind::Not, ["nope"])
            .bind("x", "g")
            .bind("x", "h")
            .bind("g", "h")
            .bind("x", "x")
            .output("x")
            .build()
            .unwrap_err();
        let e = &err.0;
        assert!(e.iter().any(|e| matches!(e, BuildError::DuplicateIdentifier { name, .. } if name == "x")));
        assert!(e.iter().any(|e| matches!(e, BuildError::ArityMismatch { expected: 2, found: 1, .. })));
        assert!(e.iter().any(|e| matches!(e, BuildError::UnknownReference { name, .. } if name == "nope")));
        assert!(e.iter().any(|e| matches!(e, BuildError::DuplicateBinding { .. })));
        assert!(e.iter().any(|e| matches!(e, BuildError::NotAPort { .. })));
        assert!(e.iter().any(|e| matches!(e, BuildError::NotAGate { at: Item::Output, .. })));
        assert!(e.iter().any(|e| matches!(e, BuildError::NotAGate { at: Item::Binding(3), .. })));
    }

    #[test]
    fn forward_references_are_allowed() {
        let c = Circuit::builder()
            .gate("g2", GateKind::Not, ["g1"])
            .gate("g1", GateKind::Buf, ["x"])
            .port("x")
            .bind("x", "g2")
            .build()
            .unwrap();
        assert_eq!(c.topological_order(), &[1, 0]);
    }

    #[test]
    fn eval_nand_formula_rows() {
        let c = samples::nand_formula();
        let a = c.eval_open(&[true, true, false]).unwrap();
        // NOT, AND, OR, NAND
        assert_eq!(a.gates, [false, true, false, true]);
        assert_eq!(c.output_value(&a), Some(true));
        let a = c.eval_open(&[true, true, true]).unwrap();
        assert_eq!(c.output_value(&a), Some(false));
    }

    #[test]
    fn eval_nand_formula_matches_truth_table() {
        let c = samples::nand_formula();
        for idx in 0..8u64 {
            let x = crate::bits_msb_first(idx, 3);
            let f = !((x[0] & x[1]) & (!x[1] | x[2]));
            let a = c.eval_open(&x).unwrap();
            assert_eq!(c.output_value(&a), Some(f), "row {x:?}");
        }
    }

    #[test]
    fn eval_csat_example() {
        let c = samples::csat_example();
        let a = c.eval_open(&[false, true]).unwrap();
        assert_eq!(c.output_value(&a), Some(true));
    }

    #[test]
    fn eval_open_errors() {
        assert_eq!(samples::buf_loop().eval_open(&[true]).unwrap_err(), Error::NotOpen(Class::Closed));
        assert_eq!(
            samples::nand_formula().eval_open(&[true]).unwrap_err(),
            Error::LengthMismatch { expected: 3, found: 1 }
        );
    }

    #[test]
    fn eval_agrees_with_naive_recursion() {
        for c in [samples::nand_formula(), samples::csat_example()] {
            let n = c.n_ports();
            for idx in 0..(1u64 << n) {
                let x = crate::bits_msb_first(idx, n);
                let a = c.eval_open(&x).unwrap();
                for j in 0..c.n_gates() {
                    assert_eq!(a.gates[j], naive_eval(&c, &x, Source::Gate(j)));
                }
            }
        }
    }

    #[test]
    fn to_builder_round_trips() {
        for c in samples::all() {
            assert_eq!(c.to_builder().build().unwrap(), c);
        }
    }

    #[test]
    fn fingerprint_distinguishes_bindings() {
        assert_ne!(samples::nand_feedback().fingerprint(), samples::mixed_feedback().fingerprint());
        assert_eq!(samples::nand_feedback().fingerprint(), samples::nand_feedback().fingerprint());
    }

    #[test]
    fn fresh_names_avoid_collisions() {
        let b = Circuit::builder().port("s").port("s_1");
        assert_eq!(b.fresh_name("s"), "s_2");
        assert_eq!(b.fresh_name("t"), "t");
    }
}
