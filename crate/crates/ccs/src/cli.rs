//! The `ccs` command line.
//!
//! Every command prints one [`RunReport`] as JSON on stdout and diagnostics on
//! stderr. Exit codes: 0 positive answer, 1 negative answer, 2 usage or input
//! error, 3 indeterminate (budget exhausted).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use ccs_core::dynamics::{self, DynState, Init, Outcome, Policy, RunConfig};
use ccs_core::reductions::{self, ReductionRecord};
use ccs_core::stability::{self, bit_string, Observation, ObservationVerdict, DEFAULT_MAX_FEEDBACK};
use ccs_core::{CharacteristicSystem, Circuit, Class, CnfFormula, Error, Mode, StabilityReport};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::dimacs::parse_dimacs;
use crate::netlist::{emit_netlist, parse_netlist};
use crate::report::RunReport;

pub const EXIT_POSITIVE: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INDETERMINATE: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "ccs", version, about = "Stability analysis for Boolean circuits with feedback")]
pub struct Cli {
    /// Report elapsed times as zero so output is byte-for-byte reproducible.
    #[arg(long, global = true)]
    pub no_timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print whether a netlist is open, semi-closed or closed.
    Classify { file: PathBuf },
    /// Print the characteristic system of a netlist.
    Charsys { file: PathBuf },
    /// Decide whether a closed netlist has a stable assignment.
    Check {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Brute)]
        method: MethodArg,
        /// Collect every stable assignment instead of stopping at the first.
        #[arg(long)]
        all: bool,
        /// Refuse brute-force enumeration above this many feedback loops.
        #[arg(long, default_value_t = DEFAULT_MAX_FEEDBACK)]
        max_feedback: usize,
        /// Conflict budget for the SAT method.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Reduce an open circuit to a closed (csat) or semi-closed circuit.
    Reduce {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ReduceKind::Csat)]
        kind: ReduceKind,
        /// Leading ports left free as instance inputs (semiclosed only).
        #[arg(long, default_value_t = 0)]
        instance_ports: usize,
        /// Write the netlist here instead of embedding it in the report.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Close a semi-closed netlist with constant inputs, or gate a closed one
    /// with a control input.
    Close {
        file: PathBuf,
        /// Bits for the free ports, in port order, e.g. `0110`.
        #[arg(long, required_unless_present = "control", conflicts_with = "control")]
        bits: Option<String>,
        /// Fix a control input, e.g. `s=1`. A closed netlist first gets every
        /// loop routed through `AND(s, .)`; a semi-closed one must have `s` as
        /// its only free port.
        #[arg(long)]
        control: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the circuit dynamics from one initial state, or gather statistics
    /// over random initial states with `--trials`.
    Simulate {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = PolicyArg::Loop)]
        policy: PolicyArg,
        /// `zeros`, `ones`, `random` or `given:<bits>`.
        #[arg(long, default_value = "zeros", value_parser = parse_init)]
        init: Init,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        max_steps: u64,
        #[arg(long)]
        trials: Option<u64>,
        /// With `--trials`, also write a CSV summary row here (`-` for stderr).
        #[arg(long, requires = "trials")]
        csv: Option<PathBuf>,
        /// Omit the visited states from the report.
        #[arg(long)]
        no_states: bool,
    },
    /// Decide a DIMACS formula by reducing it to circuit stability.
    SolveCnf {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Sat)]
        via: MethodArg,
        #[arg(long, default_value_t = DEFAULT_MAX_FEEDBACK)]
        max_feedback: usize,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Check observed values of the feedback source gates, e.g. `y4=1,y1=0`.
    Observe {
        file: PathBuf,
        #[arg(long)]
        values: String,
    },
    /// Export the stability constraints of a closed netlist as DIMACS.
    ToCnf {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Brute,
    Sat,
    Dynamics,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReduceKind {
    Csat,
    Semiclosed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    /// Synchronous, one delay per feedback loop.
    Loop,
    /// Synchronous, one delay per gate.
    Gate,
    /// One random gate updated per step.
    Async,
}

impl From<PolicyArg> for Policy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Loop => Policy::SyncLoopDelay,
            PolicyArg::Gate => Policy::SyncGateDelay,
            PolicyArg::Async => Policy::AsyncRandom,
        }
    }
}

fn parse_bits(s: &str) -> Result<Vec<bool>, String> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(format!("expected 0 or 1, found `{other}`")),
        })
        .collect()
}

fn parse_init(s: &str) -> Result<Init, String> {
    match s {
        "zeros" => Ok(Init::Zeros),
        "ones" => Ok(Init::Ones),
        "random" => Ok(Init::Random),
        _ => match s.strip_prefix("given:") {
            Some(bits) => Ok(Init::Given(DynState(parse_bits(bits)?))),
            None => Err("expected zeros, ones, random or given:<bits>".into()),
        },
    }
}

/// A failed command: what to print on stderr and which code to exit with.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Indeterminate { .. }) { EXIT_INDETERMINATE } else { EXIT_USAGE };
        Failure { code, message: e.to_string() }
    }
}

/// Output of a successful command.
pub struct Completed {
    pub code: u8,
    pub report: RunReport,
}

struct Input {
    path: PathBuf,
    bytes: Vec<u8>,
}

impl Input {
    fn read(path: &Path) -> Result<Self, Failure> {
        let bytes = fs::read(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        Ok(Input { path: path.to_path_buf(), bytes })
    }

    fn text(&self) -> Result<&str, Failure> {
        std::str::from_utf8(&self.bytes)
            .map_err(|_| Failure::usage(format!("{}: not valid UTF-8", self.path.display())))
    }

    fn circuit(&self) -> Result<Circuit, Failure> {
        parse_netlist(self.text()?).map_err(|e| Failure::usage(format!("{}:\n{e}", self.path.display())))
    }

    fn formula(&self) -> Result<CnfFormula, Failure> {
        parse_dimacs(self.text()?).map_err(|e| Failure::usage(format!("{}: {e}", self.path.display())))
    }

    fn report(&self, command: &str, result: Value) -> RunReport {
        RunReport::new(command, &self.bytes, result)
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}

fn stability_value(c: &Circuit, mut r: StabilityReport, no_timing: bool) -> Value {
    if no_timing {
        r.elapsed = Duration::ZERO;
    }
    let mut v = to_value(&r);
    v["feedback_ports"] = to_value(&c.ports());
    v
}

fn indeterminate_value(method: MethodArg, budget: u64) -> Value {
    json!({ "verdict": "Indeterminate", "method": to_value(&method_of(method)), "budget": budget })
}

fn method_of(m: MethodArg) -> ccs_core::Method {
    match m {
        MethodArg::Brute => ccs_core::Method::BruteForce,
        MethodArg::Sat => ccs_core::Method::Sat,
        MethodArg::Dynamics => ccs_core::Method::Dynamics,
    }
}

fn decide(
    c: &Circuit,
    method: MethodArg,
    mode: Mode,
    max_feedback: usize,
    budget: Option<u64>,
) -> Result<StabilityReport, Error> {
    match method {
        MethodArg::Brute => stability::brute_force_stable_with(c, mode, max_feedback),
        MethodArg::Sat => stability::sat_stable(c, mode, budget),
        MethodArg::Dynamics => dynamics::fixed_point_report(c, mode),
    }
}

/// Writes a netlist to `output` if given, otherwise returns it for embedding.
fn place_netlist(c: &Circuit, output: Option<&Path>) -> Result<Value, Failure> {
    let text = emit_netlist(c);
    match output {
        Some(path) => {
            fs::write(path, &text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            Ok(json!({ "path": path.display().to_string() }))
        }
        None => Ok(json!({ "text": text })),
    }
}

fn reduction_value(c: &Circuit, record: &ReductionRecord, output: Option<&Path>) -> Result<Value, Failure> {
    Ok(json!({
        "class": to_value(&c.classify()),
        "netlist": place_netlist(c, output)?,
        "record": to_value(record),
    }))
}

pub fn execute(cli: &Cli) -> Result<Completed, Failure> {
    let ok = |report| Ok(Completed { code: EXIT_POSITIVE, report });
    match &cli.command {
        Command::Classify { file } => {
            let input = Input::read(file)?;
            let c = input.circuit()?;
            let result = json!({
                "class": to_value(&c.classify()),
                "ports": c.n_ports(),
                "gates": c.n_gates(),
                "feedback_loops": c.n_bindings(),
            });
            ok(input.report("classify", result))
        }
        Command::Charsys { file } => {
            let input = Input::read(file)?;
            let c = input.circuit()?;
            let sys = CharacteristicSystem::extract(&c);
            let lines: Vec<String> = sys.to_string().lines().map(str::to_string).collect();
            ok(input.report("charsys", json!({ "equations": lines, "feedback_variables": sys.n_feedback() })))
        }
        Command::Check { file, method, all, max_feedback, budget } => {
            let input = Input::read(file)?;
            let c = input.circuit()?;
            let mode = if *all { Mode::All } else { Mode::First };
            match decide(&c, *method, mode, *max_feedback, *budget) {
                Ok(r) => {
                    let code = if r.is_stable() { EXIT_POSITIVE } else { EXIT_NEGATIVE };
                    Ok(Completed { code, report: input.report("check", stability_value(&c, r, cli.no_timing)) })
                }
                Err(Error::Indeterminate { budget }) => Ok(Completed {
                    code: EXIT_INDETERMINATE,
                    report: input.report("check", indeterminate_value(*method, budget)),
                }),
                Err(e) => Err(e.into()),
            }
        }
        Command::Reduce { file, kind, instance_ports, output } => {
            let input = Input::read(file)?;
            let c = input.circuit()?;
            let (reduced, record) = match kind {
                ReduceKind::Csat if *instance_ports > 0 => {
                    return Err(Failure::usage("--instance-ports applies only to --kind semiclosed"))
                }
                ReduceKind::Csat => reductions::csat_to_ccs(&c)?,
                ReduceKind::Semiclosed => reductions::build_semi_closed(&c, *instance_ports)?,
            };
            ok(input.report("reduce", reduction_value(&reduced, &record, output.as_deref())?))
        }
        Command::Close { file, bits, control, output } => {
            let input = Input::read(file)?;
            let c = input.circuit()?;
            let closed = match (bits, control) {
                (Some(bits), _) => reductions::close_with_instance(&c, &parse_bits(bits).map_err(Failure::usage)?)?,
                (None, Some(spec)) => {
                    let (name, bit) =
                        spec.split_once('=').ok_or_else(|| Failure::usage("--control expects <name>=<0|1>"))?;
                    let bit = parse_bits(bit).map_err(Failure::usage)?;
                    if bit.len() != 1 {
                        return Err(Failure::usage("--control expects a single bit"));
                    }
                    match c.classify() {
                        // already gated: the named port must be the only free one
                        Class::SemiClosed => {
                            let free: Vec<&str> = c.unbound_ports().map(|p| c.ports()[p].as_str()).collect();
                            if free != [name] {
                                return Err(Failure::usage(format!(
                                    "--control {name}: free ports are [{}], expected only `{name}`",
                                    free.join(", ")
                                )));
                            }
                            reductions::close_with_instance(&c, &bit)?
                        }
                        _ => {
                            let gated = reductions::add_control_gate_named(&c, name)?;
                            reductions::close_with_instance(&gated, &bit)?
                        }
                    }
                }
                (None, None) => unreachable!("clap requires --bits or --control"),
            };
            let result = json!({
                "class": to_value(&closed.classify()),
                "netlist": place_netlist(&closed, output.as_deref())?,
            });
            ok(input.report("close", result))
        }
        Command::Simulate { file, policy, init, seed, max_steps, trials, csv, no_states } => {
            let input = Input::read(file)?;
            let c = input.circuit()?;
            let policy = Policy::from(*policy);
            let result = match trials {
                Some(trials) => {
                    let stats = dynamics::stabilization_stats(&c, policy, *trials, *max_steps, *seed)?;
                    if let Some(path) = csv {
                        let name = file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                        write_csv(path, &name, &stats)?;
                    }
                    json!({ "seed": seed, "max_steps": max_steps, "stats": to_value(&stats) })
                }
                None => {
                    let cfg = RunConfig::new(policy, init.clone(), *max_steps).seed(*seed).record_states(!no_states);
                    let trace = dynamics::run(&c, &cfg)?;
                    let mut v = to_value(&trace);
                    if let Outcome::FixedPoint { state, .. } = &trace.outcome {
                        // loop-delay states are already feedback vectors
                        let feedback = match policy {
                            Policy::SyncLoopDelay => state.clone(),
                            _ => dynamics::project_to_feedback(&c, state),
                        };
                        v["feedback"] = json!(bit_string(feedback.bits()));
                    }
                    v
                }
            };
            ok(input.report("simulate", result))
        }
        Command::SolveCnf { file, via, max_feedback, budget } => {
            let input = Input::read(file)?;
            let f = input.formula()?;
            let (code, result) = solve_cnf(&f, *via, *max_feedback, *budget, cli.no_timing)?;
            Ok(Completed { code, report: input.report("solve-cnf", result) })
        }
        Command::Observe { file, values } => {
            let input = Input::read(file)?;
            let c = input.circuit()?;
            let mut pairs = Vec::new();
            for item in values.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (name, bit) = item
                    .split_once('=')
                    .ok_or_else(|| Failure::usage(format!("expected <gate>=<0|1>, found `{item}`")))?;
                let bit = match bit.trim() {
                    "0" => false,
                    "1" => true,
                    other => return Err(Failure::usage(format!("expected 0 or 1 for `{name}`, found `{other}`"))),
                };
                pairs.push((name.trim(), bit));
            }
            let obs = Observation::from_names(&c, pairs)?;
            let (code, result) = match stability::verify_observed(&c, &obs)? {
                ObservationVerdict::ConfirmedStable(v) => (
                    EXIT_POSITIVE,
                    json!({ "verdict": "ConfirmedStable", "feedback": bit_string(&v), "feedback_ports": c.ports() }),
                ),
                ObservationVerdict::InconsistentObservation { mismatched } => {
                    let names: Vec<&str> = mismatched.iter().map(|&g| c.gate(g).name()).collect();
                    (EXIT_NEGATIVE, json!({ "verdict": "InconsistentObservation", "mismatched": names }))
                }
            };
            Ok(Completed { code, report: input.report("observe", result) })
        }
        Command::ToCnf { file, output } => {
            let input = Input::read(file)?;
            let c = input.circuit()?;
            let cnf = stability::to_cnf(&c)?;
            let text = cnf.to_dimacs();
            let dimacs = match output {
                Some(path) => {
                    fs::write(path, &text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
                    json!({ "path": path.display().to_string() })
                }
                None => json!({ "text": text }),
            };
            let result = json!({
                "variables": cnf.formula.num_vars(),
                "clauses": cnf.formula.clauses().len(),
                "dimacs": dimacs,
            });
            ok(input.report("to-cnf", result))
        }
    }
}

/// Formula to open circuit to closed circuit, decided with `via`; a stable
/// witness is mapped back to a model and re-checked against the formula.
pub fn solve_cnf(
    f: &CnfFormula,
    via: MethodArg,
    max_feedback: usize,
    budget: Option<u64>,
    no_timing: bool,
) -> Result<(u8, Value), Failure> {
    // The circuit construction needs at least one variable and one clause.
    if f.clauses().is_empty() {
        let model = vec![false; f.num_vars()];
        return Ok((EXIT_POSITIVE, json!({ "result": "SAT", "model": bit_string(&model), "method": "Trivial" })));
    }
    if f.num_vars() == 0 {
        return Ok((EXIT_NEGATIVE, json!({ "result": "UNSAT", "model": null, "method": "Trivial" })));
    }
    let instance = ccs_core::cnf::cnf_to_circuit(f)?;
    let (closed, record) = reductions::csat_to_ccs(&instance)?;
    let mut report = match decide(&closed, via, Mode::First, max_feedback, budget) {
        Ok(r) => r,
        Err(Error::Indeterminate { budget }) => {
            let mut v = indeterminate_value(via, budget);
            v["result"] = json!("UNKNOWN");
            return Ok((EXIT_INDETERMINATE, v));
        }
        Err(e) => return Err(e.into()),
    };
    if no_timing {
        report.elapsed = Duration::ZERO;
    }
    let circuit = json!({ "ports": closed.n_ports(), "gates": closed.n_gates() });
    match report.witnesses.first() {
        Some(w) => {
            let model = reductions::recover_witness(&instance, &record, w)?;
            if !f.eval(&model) {
                return Err(Failure::usage("internal error: recovered model does not satisfy the formula"));
            }
            Ok((
                EXIT_POSITIVE,
                json!({ "result": "SAT", "model": bit_string(&model), "method": to_value(&report.method),
                        "stats": to_value(&report.stats), "elapsed_ms": report.elapsed.as_secs_f64() * 1e3,
                        "circuit": circuit }),
            ))
        }
        None => Ok((
            EXIT_NEGATIVE,
            json!({ "result": "UNSAT", "model": null, "method": to_value(&report.method),
                    "stats": to_value(&report.stats), "elapsed_ms": report.elapsed.as_secs_f64() * 1e3,
                    "circuit": circuit }),
        )),
    }
}

#[derive(serde::Serialize)]
struct CsvRow<'a> {
    circuit: &'a str,
    policy: &'a str,
    trials: u64,
    settled_fraction: f64,
    mean_steps: Option<f64>,
    max_steps_observed: Option<u64>,
}

fn policy_name(p: Policy) -> &'static str {
    match p {
        Policy::SyncLoopDelay => "SyncLoopDelay",
        Policy::SyncGateDelay => "SyncGateDelay",
        Policy::AsyncRandom => "AsyncRandom",
    }
}

fn write_csv(path: &Path, circuit: &str, stats: &dynamics::StabilizationStats) -> Result<(), Failure> {
    let row = CsvRow {
        circuit,
        policy: policy_name(stats.policy),
        trials: stats.trials,
        settled_fraction: stats.settled_fraction,
        mean_steps: stats.mean_steps,
        max_steps_observed: stats.max_steps_observed,
    };
    let sink: Box<dyn Write> = if path == Path::new("-") {
        Box::new(std::io::stderr())
    } else {
        Box::new(fs::File::create(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?)
    };
    let mut w = csv::Writer::from_writer(sink);
    w.serialize(row)
        .and_then(|_| w.flush().map_err(csv::Error::from))
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_POSITIVE });
        }
    };
    match execute(&cli) {
        Ok(done) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(done.report.to_json().as_bytes()).is_err() {
                return ExitCode::from(EXIT_USAGE);
            }
            ExitCode::from(done.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_values() {
        assert_eq!(parse_init("zeros"), Ok(Init::Zeros));
        assert_eq!(parse_init("given:101"), Ok(Init::Given(DynState(vec![true, false, true]))));
        assert!(parse_init("given:12").is_err());
        assert!(parse_init("half").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn trivial_formulas() {
        let empty = CnfFormula::new(2, vec![]).unwrap();
        assert_eq!(solve_cnf(&empty, MethodArg::Sat, 24, None, true).unwrap().0, EXIT_POSITIVE);
        let falsum = CnfFormula::new(0, vec![vec![]]).unwrap();
        assert_eq!(solve_cnf(&falsum, MethodArg::Sat, 24, None, true).unwrap().0, EXIT_NEGATIVE);
    }

    #[test]
    fn solve_small_formula_all_methods() {
        let f = CnfFormula::new(2, vec![vec![1, -2], vec![-1]]).unwrap();
        for via in [MethodArg::Brute, MethodArg::Sat, MethodArg::Dynamics] {
            let (code, v) = solve_cnf(&f, via, 24, None, true).unwrap();
            assert_eq!(code, EXIT_POSITIVE);
            assert_eq!(v["model"], "00");
        }
    }
}
