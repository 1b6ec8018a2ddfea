//! CNF formulas, a deterministic DPLL solver and CNF-to-circuit synthesis.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, GateKind};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("literal {literal} is out of range for {num_vars} variables")]
pub struct LiteralOutOfRange {
    pub literal: i32,
    pub num_vars: usize,
}

/// Clause list over variables `1..=num_vars`, DIMACS sign convention.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self, LiteralOutOfRange> {
        for &l in clauses.iter().flatten() {
            if l == 0 || l.unsigned_abs() as usize > num_vars {
                return Err(LiteralOutOfRange { literal: l, num_vars });
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    pub fn add_clause(&mut self, clause: Vec<i32>) -> Result<(), LiteralOutOfRange> {
        if let Some(&l) = clause.iter().find(|l| **l == 0 || l.unsigned_abs() as usize > self.num_vars) {
            return Err(LiteralOutOfRange { literal: l, num_vars: self.num_vars });
        }
        self.clauses.push(clause);
        Ok(())
    }

    /// Evaluates the formula; `model[v - 1]` is the value of variable `v`.
    pub fn eval(&self, model: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|&l| model[l.unsigned_abs() as usize - 1] == (l > 0)))
    }

    /// DIMACS text, with optional `c` comment lines before the header.
    pub fn to_dimacs(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            out.push_str("c ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(&format!("p cnf {} {}\n", self.num_vars, self.clauses.len()));
        for clause in &self.clauses {
            for l in clause {
                out.push_str(&format!("{l} "));
            }
            out.push_str("0\n");
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DpllOutcome {
    /// Total model, `model[v - 1]` for variable `v`.
    Sat(Vec<bool>),
    Unsat,
    /// The conflict budget ran out; nothing is known about the formula.
    BudgetExceeded,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DpllStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
}

impl core::ops::AddAssign for DpllStats {
    fn add_assign(&mut self, rhs: Self) {
        self.decisions += rhs.decisions;
        self.conflicts += rhs.conflicts;
        self.propagations += rhs.propagations;
    }
}

#[derive(Clone, Copy, Debug)]
struct TrailEntry {
    var: usize,
    decision: bool,
}

/// Chronological-backtracking DPLL with unit propagation.
///
/// Branching always picks the lowest-index unassigned variable and tries
/// `false` first, so results are reproducible.
struct Dpll<'f> {
    clauses: &'f [Vec<i32>],
    // occurrences[var] lists the clauses mentioning var with either sign
    occurrences: Vec<Vec<usize>>,
    // 0 unassigned, 1 true, -1 false; index 0 unused
    values: Vec<i8>,
    trail: Vec<TrailEntry>,
    queue_head: usize,
    stats: DpllStats,
}

enum Propagation {
    Ok,
    Conflict,
}

impl<'f> Dpll<'f> {
    fn new(f: &'f CnfFormula) -> Self {
        let mut occurrences = vec![Vec::new(); f.num_vars + 1];
        for (ci, c) in f.clauses.iter().enumerate() {
            for &l in c {
                let v = l.unsigned_abs() as usize;
                if occurrences[v].last() != Some(&ci) {
                    occurrences[v].push(ci);
                }
            }
        }
        Dpll {
            clauses: &f.clauses,
            occurrences,
            values: vec![0; f.num_vars + 1],
            trail: Vec::new(),
            queue_head: 0,
            stats: DpllStats::default(),
        }
    }

    fn lit_value(&self, l: i32) -> i8 {
        let v = self.values[l.unsigned_abs() as usize];
        if l > 0 {
            v
        } else {
            -v
        }
    }

    fn assign(&mut self, l: i32, decision: bool) {
        let var = l.unsigned_abs() as usize;
        self.values[var] = if l > 0 { 1 } else { -1 };
        self.trail.push(TrailEntry { var, decision });
    }

    /// Examines one clause: `Err` on conflict, `Ok(Some(l))` if unit on `l`.
    fn inspect(&self, ci: usize) -> Result<Option<i32>, ()> {
        let mut unassigned = None;
        let mut count = 0;
        for &l in &self.clauses[ci] {
            match self.lit_value(l) {
                1 => return Ok(None),
                0 if unassigned != Some(l) => {
                    count += 1;
                    unassigned = Some(l);
                }
                _ => {}
            }
        }
        match count {
            0 => Err(()),
            1 => Ok(unassigned),
            _ => Ok(None),
        }
    }

    fn initial_units(&mut self) -> Propagation {
        for ci in 0..self.clauses.len() {
            match self.inspect(ci) {
                Err(()) => return Propagation::Conflict,
                Ok(Some(l)) => {
                    self.stats.propagations += 1;
                    self.assign(l, false);
                }
                Ok(None) => {}
            }
        }
        Propagation::Ok
    }

    fn propagate(&mut self) -> Propagation {
        while self.queue_head < self.trail.len() {
            let var = self.trail[self.queue_head].var;
            self.queue_head += 1;
            for k in 0..self.occurrences[var].len() {
                let ci = self.occurrences[var][k];
                match self.inspect(ci) {
                    Err(()) => return Propagation::Conflict,
                    Ok(Some(l)) => {
                        self.stats.propagations += 1;
                        self.assign(l, false);
                    }
                    Ok(None) => {}
                }
            }
        }
        Propagation::Ok
    }

    /// Undoes assignments up to the most recent `false` decision and flips it.
    fn backtrack(&mut self) -> bool {
        while let Some(e) = self.trail.pop() {
            let was_false = self.values[e.var] == -1;
            self.values[e.var] = 0;
            if e.decision && was_false {
                self.queue_head = self.trail.len();
                self.assign(e.var as i32, false);
                return true;
            }
        }
        false
    }

    fn solve(mut self, budget: Option<u64>) -> (DpllOutcome, DpllStats) {
        let n = self.values.len() - 1;
        if let Propagation::Conflict = self.initial_units() {
            self.stats.conflicts += 1;
            return (DpllOutcome::Unsat, self.stats);
        }
        loop {
            match self.propagate() {
                Propagation::Conflict => {
                    self.stats.conflicts += 1;
                    if budget.is_some_and(|b| self.stats.conflicts > b) {
                        return (DpllOutcome::BudgetExceeded, self.stats);
                    }
                    if !self.backtrack() {
                        return (DpllOutcome::Unsat, self.stats);
                    }
                }
                Propagation::Ok => match (1..=n).find(|&v| self.values[v] == 0) {
                    None => {
                        let model = self.values[1..].iter().map(|&v| v == 1).collect();
                        return (DpllOutcome::Sat(model), self.stats);
                    }
                    Some(v) => {
                        self.stats.decisions += 1;
                        self.assign(-(v as i32), true);
                    }
                },
            }
        }
    }
}

/// Decides `f`. `budget` bounds the number of conflicts; `None` is unbounded.
pub fn dpll(f: &CnfFormula, budget: Option<u64>) -> (DpllOutcome, DpllStats) {
    if f.clauses.iter().any(|c| c.is_empty()) {
        return (DpllOutcome::Unsat, DpllStats::default());
    }
    Dpll::new(f).solve(budget)
}

/// Open circuit whose designated output is 1 exactly on the models of `f`.
///
/// Port `x{v}` per variable; each clause is a left-deep OR tree over its
/// literals, negative literals read one shared `NOT` gate per variable, and
/// the clauses are joined by a left-deep AND tree. An empty clause becomes a
/// `CONST0` gate. If the root would be a bare port it is wrapped in a `BUF`.
pub fn cnf_to_circuit(f: &CnfFormula) -> Result<Circuit, Error> {
    if f.num_vars == 0 || f.clauses.is_empty() {
        return Err(Error::EmptyFormula);
    }
    let mut b = Circuit::builder();
    for v in 1..=f.num_vars {
        b.add_port(format!("x{v}"));
    }
    let mut negated = vec![false; f.num_vars + 1];
    let mut literal = |b: &mut crate::CircuitBuilder, l: i32| -> String {
        let v = l.unsigned_abs() as usize;
        if l > 0 {
            return format!("x{v}");
        }
        if !negated[v] {
            negated[v] = true;
            b.add_gate(format!("not{v}"), GateKind::Not, [format!("x{v}")]);
        }
        format!("not{v}")
    };

    let mut roots = Vec::with_capacity(f.clauses.len());
    for (i, clause) in f.clauses.iter().enumerate() {
        let i = i + 1;
        let root = match clause.split_first() {
            None => {
                let name = format!("empty{i}");
                b.add_gate(name.clone(), GateKind::Const0, core::iter::empty::<String>());
                name
            }
            Some((&first, rest)) => {
                let mut acc = literal(&mut b, first);
                for (k, &l) in rest.iter().enumerate() {
                    let rhs = literal(&mut b, l);
                    let name = format!("or{i}_{}", k + 1);
                    b.add_gate(name.clone(), GateKind::Or, [acc, rhs]);
                    acc = name;
                }
                acc
            }
        };
        roots.push(root);
    }

    let mut roots = roots.into_iter();
    let mut acc = roots.next().unwrap();
    for (k, r) in roots.enumerate() {
        let name = format!("and{}", k + 1);
        b.add_gate(name.clone(), GateKind::And, [acc, r]);
        acc = name;
    }
    if acc.starts_with('x') {
        b.add_gate("out", GateKind::Buf, [acc]);
        acc = String::from("out");
    }
    b.set_output(acc);
    Ok(b.build()?)
}
