//! Deciding whether a closed circuit is stable.
//!
//! Three routes are provided: [`brute_force_stable`] enumerates feedback
//! vectors, [`sat_stable`] encodes the characteristic system as CNF and runs
//! [`dpll`](crate::cnf::dpll), and [`verify_observed`] checks an observation of
//! the feedback source gates. A fourth, [`dynamics::fixed_point_report`],
//! enumerates fixed points of the loop-delay dynamics.
//!
//! Feedback vectors are indexed by port declaration order. Enumeration runs in
//! ascending binary order with the first port as the most significant bit, and
//! witness lists are always reported in that order.
//!
//! [`dynamics::fixed_point_report`]: crate::dynamics::fixed_point_report

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::time::Duration;

use serde::{Deserialize, Serialize, Serializer};

use crate::charsys::{induced_assignment, FeedbackMap};
use crate::circuit::{Assignment, Circuit, Class, GateKind, Source};
use crate::cnf::{dpll, CnfFormula, DpllOutcome, DpllStats};
use crate::{bits_msb_first, Error};

pub const DEFAULT_MAX_FEEDBACK: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Stable,
    Unstable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    BruteForce,
    Sat,
    Dynamics,
}

/// Stop at the first witness, or collect all of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    First,
    All,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub assignments_tested: u64,
    pub decisions: u64,
    pub conflicts: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub verdict: Verdict,
    #[serde(serialize_with = "serialize_witnesses")]
    pub witnesses: Vec<Vec<bool>>,
    pub method: Method,
    pub stats: Stats,
    #[serde(rename = "elapsed_ms", serialize_with = "serialize_millis")]
    pub elapsed: Duration,
}

impl StabilityReport {
    pub(crate) fn new(mut witnesses: Vec<Vec<bool>>, method: Method, stats: Stats, elapsed: Duration) -> Self {
        witnesses.sort();
        let verdict = if witnesses.is_empty() { Verdict::Unstable } else { Verdict::Stable };
        StabilityReport { verdict, witnesses, method, stats, elapsed }
    }

    pub fn is_stable(&self) -> bool {
        self.verdict == Verdict::Stable
    }
}

/// Renders a Boolean vector as a string of `0`/`1`.
pub fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn serialize_witnesses<S: Serializer>(w: &[Vec<bool>], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(w.iter().map(|v| bit_string(v)))
}

fn serialize_millis<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1e3)
}

/// Wall-clock stopwatch; always reads zero without the `std` feature.
pub(crate) struct Timer {
    #[cfg(feature = "std")]
    start: std::time::Instant,
}

impl Timer {
    pub(crate) fn start() -> Self {
        Timer {
            #[cfg(feature = "std")]
            start: std::time::Instant::now(),
        }
    }

    pub(crate) fn elapsed(&self) -> Duration {
        #[cfg(feature = "std")]
        {
            self.start.elapsed()
        }
        #[cfg(not(feature = "std"))]
        {
            Duration::ZERO
        }
    }
}

pub(crate) fn require_closed(c: &Circuit) -> Result<(), Error> {
    match c.classify() {
        Class::Closed => Ok(()),
        other => Err(Error::NotClosed(other)),
    }
}

/// Enumerates all `2^n` feedback vectors, `n <=` [`DEFAULT_MAX_FEEDBACK`].
pub fn brute_force_stable(c: &Circuit, mode: Mode) -> Result<StabilityReport, Error> {
    brute_force_stable_with(c, mode, DEFAULT_MAX_FEEDBACK)
}

pub fn brute_force_stable_with(c: &Circuit, mode: Mode, max_feedback: usize) -> Result<StabilityReport, Error> {
    require_closed(c)?;
    let n = c.n_ports();
    if n > max_feedback || n >= 64 {
        return Err(Error::TooManyFeedbackVariables { found: n, bound: max_feedback });
    }
    let timer = Timer::start();
    let mut map = FeedbackMap::new(c)?;
    let mut stats = Stats::default();
    let mut witnesses = Vec::new();
    let mut x = vec![false; n];
    for idx in 0..(1u64 << n) {
        for (i, b) in x.iter_mut().enumerate() {
            *b = (idx >> (n - 1 - i)) & 1 == 1;
        }
        stats.assignments_tested += 1;
        if map.is_fixed(&x) {
            witnesses.push(x.clone());
            if mode == Mode::First {
                break;
            }
        }
    }
    Ok(StabilityReport::new(witnesses, Method::BruteForce, stats, timer.elapsed()))
}

/// CNF encoding of a closed circuit's characteristic system.
///
/// Variable `p + 1` is port `p`; variable `n + g + 1` is gate `g`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cnf {
    pub formula: CnfFormula,
    names: Vec<String>,
    n_ports: usize,
}

impl Cnf {
    pub fn port_var(&self, p: usize) -> u32 {
        (p + 1) as u32
    }

    pub fn gate_var(&self, g: usize) -> u32 {
        (self.n_ports + g + 1) as u32
    }

    pub fn var_of(&self, name: &str) -> Option<u32> {
        self.names.iter().position(|n| n == name).map(|i| (i + 1) as u32)
    }

    /// Identifier of variable `v`.
    pub fn name_of(&self, v: u32) -> &str {
        &self.names[v as usize - 1]
    }

    /// Projects a model onto the port (feedback) variables.
    pub fn project(&self, model: &[bool]) -> Vec<bool> {
        model[..self.n_ports].to_vec()
    }

    /// DIMACS text with a `c var <index> <name>` comment per variable.
    pub fn to_dimacs(&self) -> String {
        let comments: Vec<String> =
            self.names.iter().enumerate().map(|(i, n)| format!("var {} {}", i + 1, n)).collect();
        self.formula.to_dimacs(&comments)
    }
}

/// Gate-consistency clauses for `y = kind(inputs)`.
fn gate_clauses(kind: GateKind, y: i32, inputs: &[i32]) -> Vec<Vec<i32>> {
    match (kind, inputs) {
        (GateKind::Const0, []) => vec![vec![-y]],
        (GateKind::Const1, []) => vec![vec![y]],
        (GateKind::Buf, &[a]) => vec![vec![-y, a], vec![y, -a]],
        (GateKind::Not, &[a]) => vec![vec![y, a], vec![-y, -a]],
        (GateKind::And, &[a, b]) => vec![vec![-y, a], vec![-y, b], vec![y, -a, -b]],
        (GateKind::Nand, &[a, b]) => vec![vec![y, a], vec![y, b], vec![-y, -a, -b]],
        (GateKind::Or, &[a, b]) => vec![vec![y, -a], vec![y, -b], vec![-y, a, b]],
        (GateKind::Nor, &[a, b]) => vec![vec![-y, -a], vec![-y, -b], vec![y, a, b]],
        (GateKind::Xor, &[a, b]) => vec![vec![-y, a, b], vec![-y, -a, -b], vec![y, -a, b], vec![y, a, -b]],
        (GateKind::Xnor, &[a, b]) => vec![vec![y, a, b], vec![y, -a, -b], vec![-y, -a, b], vec![-y, a, -b]],
        _ => unreachable!("arity is checked at build time"),
    }
}

/// One variable per port and per gate, gate-consistency clauses per gate and
/// two equality clauses per binding. Satisfiable iff `c` is stable.
pub fn to_cnf(c: &Circuit) -> Result<Cnf, Error> {
    require_closed(c)?;
    let n = c.n_ports();
    let var = |s: Source| -> i32 {
        match s {
            Source::Port(p) => (p + 1) as i32,
            Source::Gate(g) => (n + g + 1) as i32,
        }
    };
    let mut clauses = Vec::new();
    for (j, g) in c.gates().iter().enumerate() {
        let inputs: Vec<i32> = g.pins().iter().map(|&s| var(s)).collect();
        clauses.extend(gate_clauses(g.kind(), var(Source::Gate(j)), &inputs));
    }
    for (p, g) in c.bindings() {
        let (x, y) = (var(Source::Port(p)), var(Source::Gate(g)));
        clauses.push(vec![x, -y]);
        clauses.push(vec![-x, y]);
    }
    let names = c.ports().iter().cloned().chain(c.gates().iter().map(|g| g.name().to_string())).collect();
    let formula = CnfFormula::new(n + c.n_gates(), clauses).expect("variables are in range by construction");
    Ok(Cnf { formula, names, n_ports: n })
}

/// Runs DPLL on [`to_cnf`]; in [`Mode::All`] blocks each projected witness and
/// re-solves until unsatisfiable. `budget` caps the total number of conflicts.
pub fn sat_stable(c: &Circuit, mode: Mode, budget: Option<u64>) -> Result<StabilityReport, Error> {
    let timer = Timer::start();
    let mut cnf = to_cnf(c)?;
    let n = c.n_ports();
    let mut total = DpllStats::default();
    let mut witnesses = Vec::new();
    loop {
        let remaining = budget.map(|b| b.saturating_sub(total.conflicts));
        let (outcome, stats) = dpll(&cnf.formula, remaining);
        total += stats;
        match outcome {
            DpllOutcome::BudgetExceeded => return Err(Error::Indeterminate { budget: budget.unwrap_or(0) }),
            DpllOutcome::Unsat => break,
            DpllOutcome::Sat(model) => {
                let w = cnf.project(&model);
                if mode == Mode::First || n == 0 {
                    witnesses.push(w);
                    break;
                }
                let block =
                    w.iter().enumerate().map(|(p, &b)| if b { -(p as i32 + 1) } else { p as i32 + 1 }).collect();
                cnf.formula.add_clause(block).expect("port variables are in range");
                witnesses.push(w);
            }
        }
    }
    let stats = Stats { assignments_tested: 0, decisions: total.decisions, conflicts: total.conflicts };
    Ok(StabilityReport::new(witnesses, Method::Sat, stats, timer.elapsed()))
}

/// Observed values of the distinct binding source gates of a closed circuit.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Observation {
    values: BTreeMap<usize, bool>,
}

impl Observation {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `gate = value`; a second reading of the same gate must agree.
    pub fn insert(&mut self, gate: usize, value: bool) -> Result<(), Error> {
        match self.values.insert(gate, value) {
            Some(prev) if prev != value => {
                Err(Error::WrongObservationDomain(format!("gate #{gate} observed as both 0 and 1")))
            }
            _ => Ok(()),
        }
    }

    /// Builds an observation from `(gate name, value)` pairs.
    pub fn from_names<'a>(c: &Circuit, pairs: impl IntoIterator<Item = (&'a str, bool)>) -> Result<Self, Error> {
        let mut obs = Observation::new();
        for (name, value) in pairs {
            match c.lookup(name) {
                Some(Source::Gate(g)) => obs.insert(g, value)?,
                Some(Source::Port(_)) => {
                    return Err(Error::WrongObservationDomain(format!("`{name}` is a port, not a gate")))
                }
                None => return Err(Error::WrongObservationDomain(format!("unknown gate `{name}`"))),
            }
        }
        Ok(obs)
    }

    /// Reads the source gates of `c` off a total assignment.
    pub fn read(c: &Circuit, a: &Assignment) -> Self {
        Observation { values: c.source_gates().into_iter().map(|g| (g, a.gates[g])).collect() }
    }

    pub fn get(&self, gate: usize) -> Option<bool> {
        self.values.get(&gate).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, bool)> + '_ {
        self.values.iter().map(|(&g, &v)| (g, v))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ObservationVerdict {
    /// The observed values, fed back, reproduce themselves; the circuit is stable.
    ConfirmedStable(#[serde(serialize_with = "serialize_bits")] Vec<bool>),
    /// Some source gate's induced value differs from its observed value
    /// (listed by gate index). This shows instability only if the observation
    /// was taken after a stable circuit had settled.
    InconsistentObservation { mismatched: Vec<usize> },
}

fn serialize_bits<S: Serializer>(w: &[bool], s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&bit_string(w))
}

/// Checks `v_{k_i} = f_{k_i}(v_{k_1}, ..., v_{k_n})` for the observed source values.
pub fn verify_observed(c: &Circuit, obs: &Observation) -> Result<ObservationVerdict, Error> {
    require_closed(c)?;
    let sources = c.source_gates();
    let mut domain: Vec<usize> = sources.clone();
    domain.sort_unstable();
    let observed: Vec<usize> = obs.values.keys().copied().collect();
    if observed != domain {
        let names = |gs: &[usize]| -> String { gs.iter().map(|&g| c.gate(g).name()).collect::<Vec<_>>().join(", ") };
        let missing: Vec<usize> = domain.iter().copied().filter(|g| !obs.values.contains_key(g)).collect();
        let extra: Vec<usize> = observed.iter().copied().filter(|g| !domain.contains(g)).collect();
        return Err(Error::WrongObservationDomain(format!(
            "missing [{}], not feedback sources [{}]",
            names(&missing),
            names(&extra)
        )));
    }
    let v: Vec<bool> = (0..c.n_ports()).map(|p| obs.values[&c.binding(p).unwrap()]).collect();
    let a = induced_assignment(c, &v)?;
    let mismatched: Vec<usize> = sources.into_iter().filter(|&g| a.gates[g] != obs.values[&g]).collect();
    if mismatched.is_empty() {
        Ok(ObservationVerdict::ConfirmedStable(v))
    } else {
        Ok(ObservationVerdict::InconsistentObservation { mismatched })
    }
}

/// Every observation over the source gates of `c`, in ascending binary order.
pub fn all_observations(c: &Circuit) -> Vec<Observation> {
    let sources = c.source_gates();
    let k = sources.len();
    (0..(1u64 << k))
        .map(|i| {
            let bits = bits_msb_first(i, k);
            Observation { values: sources.iter().copied().zip(bits).collect() }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charsys::CharacteristicSystem;
    use crate::samples;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn not_loop_is_unstable_after_two_tests() {
        let r = brute_force_stable(&samples::not_loop(), Mode::First).unwrap();
        assert_eq!(r.verdict, Verdict::Unstable);
        assert_eq!(r.stats.assignments_tested, 2);
        assert!(r.witnesses.is_empty());
    }

    #[test]
    fn mixed_feedback_has_unique_witness() {
        let r = brute_force_stable(&samples::mixed_feedback(), Mode::All).unwrap();
        assert_eq!(r.verdict, Verdict::Stable);
        assert_eq!(r.witnesses, [bits("110")]);
        assert_eq!(r.stats.assignments_tested, 8);
    }

    #[test]
    fn buf_loop_has_both_witnesses() {
        let r = brute_force_stable(&samples::buf_loop(), Mode::All).unwrap();
        assert_eq!(r.witnesses, [bits("0"), bits("1")]);
        let r = brute_force_stable(&samples::buf_loop(), Mode::First).unwrap();
        assert_eq!(r.witnesses, [bits("0")]);
        assert_eq!(r.stats.assignments_tested, 1);
    }

    #[test]
    fn nand_feedback_is_unstable() {
        assert_eq!(brute_force_stable(&samples::nand_feedback(), Mode::All).unwrap().verdict, Verdict::Unstable);
        assert_eq!(sat_stable(&samples::nand_feedback(), Mode::First, None).unwrap().verdict, Verdict::Unstable);
    }

    #[test]
    fn brute_force_errors() {
        assert!(matches!(brute_force_stable(&samples::nand_formula(), Mode::All), Err(Error::NotClosed(Class::Open))));
        assert_eq!(
            brute_force_stable_with(&samples::mixed_feedback(), Mode::All, 2).unwrap_err(),
            Error::TooManyFeedbackVariables { found: 3, bound: 2 }
        );
    }

    #[test]
    fn cnf_of_not_loop_is_unsat_by_truth_table() {
        let cnf = to_cnf(&samples::not_loop()).unwrap();
        assert_eq!(cnf.formula.num_vars(), 2);
        assert_eq!(cnf.var_of("x"), Some(1));
        assert_eq!(cnf.var_of("y"), Some(2));
        assert!((0..4).all(|i| !cnf.formula.eval(&bits_msb_first(i, 2))));
        assert_eq!(dpll(&cnf.formula, None).0, DpllOutcome::Unsat);
    }

    #[test]
    fn cnf_of_buf_loop_has_two_models() {
        let cnf = to_cnf(&samples::buf_loop()).unwrap();
        let models = (0..4).filter(|&i| cnf.formula.eval(&bits_msb_first(i, 2))).count();
        assert_eq!(models, 2);
    }

    #[test]
    fn cnf_has_no_empty_clause() {
        for c in samples::closed() {
            let cnf = to_cnf(&c).unwrap();
            assert!(cnf.formula.clauses().iter().all(|cl| !cl.is_empty()));
        }
    }

    #[test]
    fn cnf_dimacs_names_variables() {
        let text = to_cnf(&samples::not_loop()).unwrap().to_dimacs();
        assert_eq!(text, "c var 1 x\nc var 2 y\np cnf 2 4\n2 1 0\n-2 -1 0\n1 -2 0\n-1 2 0\n");
    }

    #[test]
    fn dpll_projects_mixed_feedback_witness() {
        let c = samples::mixed_feedback();
        let cnf = to_cnf(&c).unwrap();
        match dpll(&cnf.formula, None).0 {
            DpllOutcome::Sat(model) => assert_eq!(cnf.project(&model), bits("110")),
            other => panic!("unexpected {other:?}"),
        }
        let r = sat_stable(&c, Mode::All, None).unwrap();
        assert_eq!(r.witnesses, [bits("110")]);
        assert_eq!(r.method, Method::Sat);
    }

    #[test]
    fn sat_enumerates_all_witnesses() {
        let r = sat_stable(&samples::buf_loop(), Mode::All, None).unwrap();
        assert_eq!(r.witnesses, [bits("0"), bits("1")]);
    }

    #[test]
    fn sat_budget_is_indeterminate() {
        assert!(matches!(
            sat_stable(&samples::nand_feedback(), Mode::First, Some(0)),
            Err(Error::Indeterminate { .. })
        ));
    }

    #[test]
    fn deciders_agree_on_samples() {
        for c in samples::closed() {
            let bf = brute_force_stable(&c, Mode::All).unwrap();
            let sat = sat_stable(&c, Mode::All, None).unwrap();
            assert_eq!(bf.witnesses, sat.witnesses);
            let sys = CharacteristicSystem::extract(&c);
            for w in &bf.witnesses {
                assert!(sys.check_assignment(&induced_assignment(&c, w).unwrap()).unwrap());
            }
        }
    }

    #[test]
    fn observed_mixed_feedback_is_confirmed() {
        let c = samples::mixed_feedback();
        let obs = Observation::from_names(&c, [("y4", true), ("y4", true), ("y1", false)]).unwrap();
        assert_eq!(verify_observed(&c, &obs).unwrap(), ObservationVerdict::ConfirmedStable(bits("110")));
    }

    #[test]
    fn observed_not_loop_is_inconsistent() {
        let c = samples::not_loop();
        for v in [false, true] {
            let obs = Observation::from_names(&c, [("y", v)]).unwrap();
            assert_eq!(
                verify_observed(&c, &obs).unwrap(),
                ObservationVerdict::InconsistentObservation { mismatched: vec![0] }
            );
        }
    }

    #[test]
    fn observation_domain_is_checked() {
        let c = samples::mixed_feedback();
        let missing = Observation::from_names(&c, [("y4", true)]).unwrap();
        assert!(matches!(verify_observed(&c, &missing), Err(Error::WrongObservationDomain(_))));
        let extra = Observation::from_names(&c, [("y4", true), ("y1", false), ("y2", true)]).unwrap();
        assert!(matches!(verify_observed(&c, &extra), Err(Error::WrongObservationDomain(_))));
        assert!(Observation::from_names(&c, [("x1", true)]).is_err());
        assert!(Observation::from_names(&c, [("y4", true), ("y4", false)]).is_err());
    }

    #[test]
    fn report_json_shape_fields() {
        let r = brute_force_stable(&samples::buf_loop(), Mode::All).unwrap();
        assert_eq!(r.witnesses.iter().map(|w| bit_string(w)).collect::<Vec<_>>(), ["0", "1"]);
    }
}
