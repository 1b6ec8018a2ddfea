//! Discrete-time update dynamics of closed circuits.
//!
//! Three policies are provided:
//!
//! * [`Policy::SyncLoopDelay`]: the state is the feedback vector `x` and one
//!   step applies the composed feedback map, `x' = F(x)`;
//! * [`Policy::SyncGateDelay`]: the state holds every gate output and each
//!   step recomputes all gates at once from the previous values;
//! * [`Policy::AsyncRandom`]: gate-output state, one uniformly chosen gate is
//!   recomputed per step.
//!
//! The fixed points of every policy are exactly the stable assignments. A
//! trajectory that does not settle says nothing about stability: synchronous
//! updates can oscillate forever around a stable circuit's only solution.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::charsys::FeedbackMap;
use crate::circuit::{Circuit, Source};
use crate::stability::{bit_string, require_closed, Method, Mode, StabilityReport, Stats, Timer};
use crate::{bits_msb_first, Error};

/// Largest state width for which cycles are detected by remembering every
/// visited state; wider states use Brent's algorithm.
pub const HASHING_MAX_BITS: usize = 20;

/// Largest state width [`fixed_points`] will enumerate.
pub const ENUMERATION_MAX_BITS: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Policy {
    SyncGateDelay,
    SyncLoopDelay,
    AsyncRandom,
}

impl Policy {
    pub fn state_len(self, c: &Circuit) -> usize {
        match self {
            Policy::SyncLoopDelay => c.n_ports(),
            Policy::SyncGateDelay | Policy::AsyncRandom => c.n_gates(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DynState(pub Vec<bool>);

impl Serialize for DynState {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&bit_string(&self.0))
    }
}

impl DynState {
    pub fn bits(&self) -> &[bool] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Init {
    Zeros,
    Ones,
    /// Uniform random bits drawn from the run's seed.
    Random,
    Given(DynState),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Outcome {
    /// `state` is reached at `step` and never changes afterwards.
    FixedPoint { state: DynState, step: u64 },
    /// States repeat from `entry` with minimal `period >= 2`.
    Cycle { entry: u64, period: u64 },
    /// No fixed point or cycle within `budget` steps.
    Exhausted { budget: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SimTrace {
    pub policy: Policy,
    /// Visited states starting with the initial one (empty unless recorded).
    pub states: Vec<DynState>,
    pub outcome: Outcome,
    pub seed: u64,
    /// Number of updates computed.
    pub steps: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub init: Init,
    pub policy: Policy,
    pub max_steps: u64,
    pub seed: u64,
    pub record_states: bool,
}

impl RunConfig {
    pub fn new(policy: Policy, init: Init, max_steps: u64) -> Self {
        RunConfig { init, policy, max_steps, seed: 0, record_states: true }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn record_states(mut self, record: bool) -> Self {
        self.record_states = record;
        self
    }
}

/// Scratch space for repeated steps on one circuit.
struct Stepper<'c> {
    circuit: &'c Circuit,
    map: FeedbackMap<'c>,
    // source gate of each port
    sources: Vec<usize>,
}

impl<'c> Stepper<'c> {
    fn new(circuit: &'c Circuit) -> Result<Self, Error> {
        require_closed(circuit)?;
        let sources = (0..circuit.n_ports()).map(|p| circuit.binding(p).unwrap()).collect();
        Ok(Stepper { circuit, map: FeedbackMap::new(circuit)?, sources })
    }

    /// Value gate `j` computes from the gate-output state `s`.
    fn gate_input_value(&self, s: &[bool], j: usize) -> bool {
        let g = self.circuit.gate(j);
        let mut buf = [false; 2];
        for (slot, pin) in buf.iter_mut().zip(g.pins()) {
            *slot = match *pin {
                Source::Gate(k) => s[k],
                Source::Port(p) => s[self.sources[p]],
            };
        }
        g.kind().eval(&buf[..g.pins().len()])
    }

    fn step(&mut self, policy: Policy, s: &[bool], out: &mut [bool]) {
        match policy {
            Policy::SyncLoopDelay => self.map.apply(s, out),
            Policy::SyncGateDelay | Policy::AsyncRandom => {
                for (j, o) in out.iter_mut().enumerate() {
                    *o = self.gate_input_value(s, j);
                }
            }
        }
    }

    fn is_fixed(&mut self, policy: Policy, s: &[bool]) -> bool {
        match policy {
            Policy::SyncLoopDelay => self.map.is_fixed(s),
            Policy::SyncGateDelay | Policy::AsyncRandom => (0..s.len()).all(|j| self.gate_input_value(s, j) == s[j]),
        }
    }
}

fn check_shape(c: &Circuit, s: &DynState, policy: Policy) -> Result<(), Error> {
    let expected = policy.state_len(c);
    if s.0.len() != expected {
        return Err(Error::StateShapeMismatch { expected, found: s.0.len() });
    }
    Ok(())
}

/// One synchronous update. For [`Policy::AsyncRandom`] this recomputes every
/// gate, i.e. behaves as [`Policy::SyncGateDelay`].
pub fn sync_step(c: &Circuit, s: &DynState, policy: Policy) -> Result<DynState, Error> {
    let mut st = Stepper::new(c)?;
    check_shape(c, s, policy)?;
    let mut out = vec![false; s.0.len()];
    st.step(policy, &s.0, &mut out);
    Ok(DynState(out))
}

/// Recomputes gate `gate` only, from a gate-output state.
pub fn async_update(c: &Circuit, s: &DynState, gate: usize) -> Result<DynState, Error> {
    let st = Stepper::new(c)?;
    check_shape(c, s, Policy::AsyncRandom)?;
    let mut out = s.clone();
    if gate < out.0.len() {
        out.0[gate] = st.gate_input_value(&s.0, gate);
    }
    Ok(out)
}

/// Recomputes one uniformly chosen gate.
pub fn async_step<R: Rng + ?Sized>(c: &Circuit, s: &DynState, rng: &mut R) -> Result<DynState, Error> {
    if c.n_gates() == 0 {
        return async_update(c, s, 0);
    }
    let gate = rng.random_range(0..c.n_gates());
    async_update(c, s, gate)
}

/// True iff one update under `policy` leaves `s` unchanged. For the
/// asynchronous policy this means no single-gate update changes it.
pub fn is_fixed_point(c: &Circuit, s: &DynState, policy: Policy) -> Result<bool, Error> {
    let mut st = Stepper::new(c)?;
    check_shape(c, s, policy)?;
    Ok(st.is_fixed(policy, &s.0))
}

fn initial_state(c: &Circuit, cfg: &RunConfig, rng: &mut ChaCha8Rng) -> Result<DynState, Error> {
    let len = cfg.policy.state_len(c);
    let s = match &cfg.init {
        Init::Zeros => DynState(vec![false; len]),
        Init::Ones => DynState(vec![true; len]),
        Init::Random => DynState((0..len).map(|_| rng.random::<bool>()).collect()),
        Init::Given(s) => s.clone(),
    };
    check_shape(c, &s, cfg.policy)?;
    Ok(s)
}

/// Iterates the dynamics until a fixed point, a cycle (synchronous policies
/// only) or `max_steps` updates.
pub fn run(c: &Circuit, cfg: &RunConfig) -> Result<SimTrace, Error> {
    let mut st = Stepper::new(c)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let init = initial_state(c, cfg, &mut rng)?;
    let max_steps = cfg.max_steps.max(1);
    let (states, outcome, steps) = match cfg.policy {
        Policy::AsyncRandom => run_async(&mut st, init, max_steps, cfg.record_states, &mut rng),
        policy if policy.state_len(c) <= HASHING_MAX_BITS => {
            run_sync_hashing(&mut st, policy, init, max_steps, cfg.record_states)
        }
        policy => run_sync_brent(&mut st, policy, init, max_steps, cfg.record_states),
    };
    Ok(SimTrace { policy: cfg.policy, states, outcome, seed: cfg.seed, steps })
}

fn run_async(
    st: &mut Stepper<'_>,
    init: DynState,
    max_steps: u64,
    record: bool,
    rng: &mut ChaCha8Rng,
) -> (Vec<DynState>, Outcome, u64) {
    let m = init.0.len();
    let mut states = Vec::new();
    let mut cur = init;
    let mut steps = 0;
    loop {
        if record {
            states.push(cur.clone());
        }
        if st.is_fixed(Policy::AsyncRandom, &cur.0) {
            return (states, Outcome::FixedPoint { state: cur, step: steps }, steps);
        }
        if steps == max_steps {
            return (states, Outcome::Exhausted { budget: max_steps }, steps);
        }
        let j = rng.random_range(0..m);
        cur.0[j] = st.gate_input_value(&cur.0, j);
        steps += 1;
    }
}

fn classify_repeat(state: DynState, first_seen: u64, now: u64) -> Outcome {
    match now - first_seen {
        1 => Outcome::FixedPoint { state, step: first_seen },
        period => Outcome::Cycle { entry: first_seen, period },
    }
}

fn run_sync_hashing(
    st: &mut Stepper<'_>,
    policy: Policy,
    init: DynState,
    max_steps: u64,
    record: bool,
) -> (Vec<DynState>, Outcome, u64) {
    let mut seen: BTreeMap<DynState, u64> = BTreeMap::new();
    let mut states = Vec::new();
    let mut cur = init;
    let mut next = vec![false; cur.0.len()];
    if record {
        states.push(cur.clone());
    }
    seen.insert(cur.clone(), 0);
    for t in 1..=max_steps {
        st.step(policy, &cur.0, &mut next);
        core::mem::swap(&mut cur.0, &mut next);
        if let Some(&first) = seen.get(&cur) {
            return (states, classify_repeat(cur, first, t), t);
        }
        if record {
            states.push(cur.clone());
        }
        seen.insert(cur.clone(), t);
    }
    (states, Outcome::Exhausted { budget: max_steps }, max_steps)
}

fn run_sync_brent(
    st: &mut Stepper<'_>,
    policy: Policy,
    init: DynState,
    max_steps: u64,
    record: bool,
) -> (Vec<DynState>, Outcome, u64) {
    let len = init.0.len();
    let mut states = Vec::new();
    if record {
        states.push(init.clone());
    }
    let mut scratch = vec![false; len];
    let mut advance = |st: &mut Stepper<'_>, s: &mut Vec<bool>| {
        st.step(policy, s, &mut scratch);
        core::mem::swap(s, &mut scratch);
    };

    // Period: the tortoise parks at powers of two while the hare walks on.
    let mut power = 1u64;
    let mut period = 1u64;
    let mut tortoise = init.0.clone();
    let mut hare = init.0.clone();
    advance(st, &mut hare);
    let mut steps = 1u64;
    if record {
        states.push(DynState(hare.clone()));
    }
    while tortoise != hare {
        if steps == max_steps {
            return (states, Outcome::Exhausted { budget: max_steps }, steps);
        }
        if power == period {
            tortoise.clone_from(&hare);
            power *= 2;
            period = 0;
        }
        advance(st, &mut hare);
        steps += 1;
        period += 1;
        if record {
            states.push(DynState(hare.clone()));
        }
    }

    // Entry: two walkers `period` apart meet at the first repeated state.
    let mut tortoise = init.0.clone();
    let mut hare = init.0;
    for _ in 0..period {
        advance(st, &mut hare);
    }
    let mut entry = 0u64;
    while tortoise != hare {
        advance(st, &mut tortoise);
        advance(st, &mut hare);
        entry += 1;
    }
    if record {
        states.truncate((entry + period) as usize);
    }
    (states, classify_repeat(DynState(tortoise), entry, entry + period), steps)
}

/// Every fixed point of `policy`, by exhaustive enumeration of the state
/// space in ascending binary order.
pub fn fixed_points(c: &Circuit, policy: Policy) -> Result<Vec<DynState>, Error> {
    let mut st = Stepper::new(c)?;
    let len = policy.state_len(c);
    if len > ENUMERATION_MAX_BITS {
        return Err(Error::TooManyFeedbackVariables { found: len, bound: ENUMERATION_MAX_BITS });
    }
    Ok((0..(1u64 << len)).map(|i| bits_msb_first(i, len)).filter(|s| st.is_fixed(policy, s)).map(DynState).collect())
}

/// Stability decided by enumerating the loop-delay fixed points.
pub fn fixed_point_report(c: &Circuit, mode: Mode) -> Result<StabilityReport, Error> {
    let timer = Timer::start();
    let mut st = Stepper::new(c)?;
    let n = c.n_ports();
    if n > ENUMERATION_MAX_BITS {
        return Err(Error::TooManyFeedbackVariables { found: n, bound: ENUMERATION_MAX_BITS });
    }
    let mut stats = Stats::default();
    let mut witnesses = Vec::new();
    for i in 0..(1u64 << n) {
        let x = bits_msb_first(i, n);
        stats.assignments_tested += 1;
        if st.is_fixed(Policy::SyncLoopDelay, &x) {
            witnesses.push(x);
            if mode == Mode::First {
                break;
            }
        }
    }
    Ok(StabilityReport::new(witnesses, Method::Dynamics, stats, timer.elapsed()))
}

/// Projects a gate-output state onto the feedback variables.
pub fn project_to_feedback(c: &Circuit, s: &DynState) -> DynState {
    DynState((0..c.n_ports()).map(|p| s.0[c.binding(p).unwrap()]).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilizationStats {
    pub policy: Policy,
    pub trials: u64,
    pub settled: u64,
    pub settled_fraction: f64,
    /// Over settled trials; `None` if none settled.
    pub mean_steps: Option<f64>,
    pub median_steps: Option<f64>,
    pub max_steps_observed: Option<u64>,
    /// Trials ending in a cycle, by period.
    pub cycles: BTreeMap<u64, u64>,
    pub exhausted: u64,
}

/// Per-trial seed: SplitMix64 of `seed + trial`.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    let mut z = seed.wrapping_add(trial.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Runs `trials` traces from random initial states and summarizes them.
pub fn stabilization_stats(
    c: &Circuit,
    policy: Policy,
    trials: u64,
    max_steps: u64,
    seed: u64,
) -> Result<StabilizationStats, Error> {
    require_closed(c)?;
    let mut settle_steps = Vec::new();
    let mut cycles = BTreeMap::new();
    let mut exhausted = 0;
    for t in 0..trials {
        let cfg = RunConfig::new(policy, Init::Random, max_steps).seed(trial_seed(seed, t)).record_states(false);
        match run(c, &cfg)?.outcome {
            Outcome::FixedPoint { step, .. } => settle_steps.push(step),
            Outcome::Cycle { period, .. } => *cycles.entry(period).or_insert(0) += 1,
            Outcome::Exhausted { .. } => exhausted += 1,
        }
    }
    settle_steps.sort_unstable();
    let settled = settle_steps.len() as u64;
    let mean_steps = (settled > 0).then(|| settle_steps.iter().sum::<u64>() as f64 / settled as f64);
    let median_steps = (settled > 0).then(|| {
        let k = settle_steps.len();
        if k % 2 == 1 {
            settle_steps[k / 2] as f64
        } else {
            (settle_steps[k / 2 - 1] + settle_steps[k / 2]) as f64 / 2.0
        }
    });
    Ok(StabilizationStats {
        policy,
        trials,
        settled,
        settled_fraction: if trials == 0 { 0.0 } else { settled as f64 / trials as f64 },
        mean_steps,
        median_steps,
        max_steps_observed: settle_steps.last().copied(),
        cycles,
        exhausted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;
    use crate::stability::brute_force_stable;

    fn st(s: &str) -> DynState {
        DynState(s.chars().map(|c| c == '1').collect())
    }

    #[test]
    fn not_loop_oscillates() {
        let c = samples::not_loop();
        assert_eq!(sync_step(&c, &st("0"), Policy::SyncLoopDelay).unwrap(), st("1"));
        assert_eq!(sync_step(&c, &st("1"), Policy::SyncLoopDelay).unwrap(), st("0"));
        for init in [Init::Zeros, Init::Ones] {
            let t = run(&c, &RunConfig::new(Policy::SyncLoopDelay, init, 100)).unwrap();
            assert_eq!(t.outcome, Outcome::Cycle { entry: 0, period: 2 });
        }
    }

    #[test]
    fn mixed_feedback_transitions() {
        let c = samples::mixed_feedback();
        let p = Policy::SyncLoopDelay;
        assert_eq!(sync_step(&c, &st("110"), p).unwrap(), st("110"));
        assert_eq!(sync_step(&c, &st("000"), p).unwrap(), st("111"));
        assert_eq!(sync_step(&c, &st("111"), p).unwrap(), st("000"));
        assert!(is_fixed_point(&c, &st("110"), p).unwrap());
        assert!(!is_fixed_point(&c, &st("111"), p).unwrap());
    }

    #[test]
    fn mixed_feedback_settles_from_010() {
        let c = samples::mixed_feedback();
        let t = run(&c, &RunConfig::new(Policy::SyncLoopDelay, Init::Given(st("010")), 100)).unwrap();
        assert_eq!(t.outcome, Outcome::FixedPoint { state: st("110"), step: 1 });
        assert_eq!(t.states, [st("010"), st("110")]);
    }

    #[test]
    fn mixed_feedback_all_zeros_cycles() {
        let c = samples::mixed_feedback();
        let t = run(&c, &RunConfig::new(Policy::SyncLoopDelay, Init::Zeros, 100)).unwrap();
        assert_eq!(t.outcome, Outcome::Cycle { entry: 0, period: 2 });
    }

    #[test]
    fn buf_loop_every_state_fixed() {
        let c = samples::buf_loop();
        for s in ["0", "1"] {
            assert!(is_fixed_point(&c, &st(s), Policy::SyncLoopDelay).unwrap());
            assert!(is_fixed_point(&c, &st(s), Policy::SyncGateDelay).unwrap());
        }
        let s = stabilization_stats(&c, Policy::SyncLoopDelay, 20, 10, 3).unwrap();
        assert_eq!(s.settled, 20);
        assert_eq!(s.max_steps_observed, Some(0));
    }

    #[test]
    fn not_loop_never_settles() {
        let c = samples::not_loop();
        let s = stabilization_stats(&c, Policy::SyncLoopDelay, 50, 10, 1).unwrap();
        assert_eq!(s.settled, 0);
        assert_eq!(s.cycles.get(&2), Some(&50));
        assert_eq!(s.mean_steps, None);
    }

    #[test]
    fn nand_feedback_never_settles() {
        let c = samples::nand_feedback();
        for i in 0..8 {
            let init = Init::Given(DynState(bits_msb_first(i, 3)));
            let t = run(&c, &RunConfig::new(Policy::SyncLoopDelay, init, 64)).unwrap();
            assert!(!matches!(t.outcome, Outcome::FixedPoint { .. }));
        }
    }

    #[test]
    fn async_from_fixed_point_is_unchanged() {
        let c = samples::mixed_feedback();
        let fixed = DynState(vec![false, true, false, true]);
        for j in 0..c.n_gates() {
            assert_eq!(async_update(&c, &fixed, j).unwrap(), fixed);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(async_step(&c, &fixed, &mut rng).unwrap(), fixed);
    }

    #[test]
    fn async_not_loop_single_gate() {
        let c = samples::not_loop();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(async_step(&c, &st("0"), &mut rng).unwrap(), st("1"));
    }

    #[test]
    fn gate_delay_fixed_points_project_to_witnesses() {
        for c in samples::closed() {
            let bf = brute_force_stable(&c, Mode::All).unwrap().witnesses;
            let loop_fp: Vec<Vec<bool>> =
                fixed_points(&c, Policy::SyncLoopDelay).unwrap().into_iter().map(|s| s.0).collect();
            assert_eq!(loop_fp, bf);
            let mut gate_fp: Vec<Vec<bool>> =
                fixed_points(&c, Policy::SyncGateDelay).unwrap().iter().map(|s| project_to_feedback(&c, s).0).collect();
            gate_fp.sort();
            gate_fp.dedup();
            assert_eq!(gate_fp, bf);
        }
    }

    #[test]
    fn brent_matches_hashing() {
        let c = samples::mixed_feedback();
        for i in 0..8 {
            let init = DynState(bits_msb_first(i, 3));
            for policy in [Policy::SyncLoopDelay, Policy::SyncGateDelay] {
                let init = if policy == Policy::SyncLoopDelay { init.clone() } else { DynState(bits_msb_first(i, 4)) };
                let mut stp = Stepper::new(&c).unwrap();
                let (hs, ho, _) = run_sync_hashing(&mut stp, policy, init.clone(), 50, true);
                let (bs, bo, _) = run_sync_brent(&mut stp, policy, init, 50, true);
                assert_eq!(ho, bo);
                assert_eq!(hs, bs);
            }
        }
    }

    #[test]
    fn shape_and_class_errors() {
        let c = samples::mixed_feedback();
        assert_eq!(
            sync_step(&c, &st("11"), Policy::SyncLoopDelay).unwrap_err(),
            Error::StateShapeMismatch { expected: 3, found: 2 }
        );
        assert!(matches!(
            run(&samples::nand_formula(), &RunConfig::new(Policy::SyncLoopDelay, Init::Zeros, 5)),
            Err(Error::NotClosed(_))
        ));
    }

    #[test]
    fn runs_are_deterministic() {
        let c = samples::mixed_feedback();
        let cfg = RunConfig::new(Policy::AsyncRandom, Init::Random, 200).seed(42);
        assert_eq!(run(&c, &cfg).unwrap(), run(&c, &cfg).unwrap());
    }

    #[test]
    fn exhausted_when_budget_is_short() {
        let c = samples::mixed_feedback();
        let t = run(&c, &RunConfig::new(Policy::SyncLoopDelay, Init::Zeros, 1)).unwrap();
        assert_eq!(t.outcome, Outcome::Exhausted { budget: 1 });
    }
}
