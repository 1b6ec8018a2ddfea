//! The line-oriented netlist format.
//!
//! ```text
//! # comment
//! input x1
//! gate y1 NOT x2
//! gate y4 NAND y2 y3
//! feedback x1 y4
//! output y4
//! ```
//!
//! One statement per line, identifiers match `[A-Za-z_][A-Za-z0-9_]*`, and
//! references may point forward. `#` starts a comment anywhere on a line.

use std::fmt;

use ccs_core::circuit::{BuildError, Item};
use ccs_core::{Circuit, CircuitBuilder, GateKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosticKind {
    Syntax(String),
    Build(BuildError),
}

/// A problem found in a netlist, with its 1-based line when known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub kind: DiagnosticKind,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        match &self.kind {
            DiagnosticKind::Syntax(msg) => write!(f, "syntax error: {msg}"),
            DiagnosticKind::Build(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetlistError(pub Vec<Diagnostic>);

impl fmt::Display for NetlistError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for NetlistError {}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Default)]
struct Lines {
    ports: Vec<usize>,
    gates: Vec<usize>,
    bindings: Vec<usize>,
    output: Option<usize>,
}

impl Lines {
    fn of(&self, item: Item) -> Option<usize> {
        match item {
            Item::Port(i) => self.ports.get(i).copied(),
            Item::Gate(i) => self.gates.get(i).copied(),
            Item::Binding(i) => self.bindings.get(i).copied(),
            Item::Output => self.output,
        }
    }
}

pub fn parse_netlist(text: &str) -> Result<Circuit, NetlistError> {
    let mut b = CircuitBuilder::new();
    let mut lines = Lines::default();
    let mut diags = Vec::new();
    let syntax = |line: usize, msg: String| Diagnostic { line: Some(line), kind: DiagnosticKind::Syntax(msg) };

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let Some((&keyword, args)) = tokens.split_first() else {
            continue;
        };
        // every argument is an identifier except a gate's KIND
        let bad = args.iter().enumerate().find(|&(i, t)| !(keyword == "gate" && i == 1) && !is_identifier(t));
        if let Some((_, bad)) = bad {
            diags.push(syntax(line, format!("invalid identifier `{bad}`")));
            continue;
        }
        match keyword {
            "input" => {
                if args.len() != 1 {
                    diags.push(syntax(line, "expected `input <id>`".into()));
                    continue;
                }
                b.add_port(args[0]);
                lines.ports.push(line);
            }
            "gate" => {
                if args.len() < 2 {
                    diags.push(syntax(line, "expected `gate <id> <KIND> <src>...`".into()));
                    continue;
                }
                let kind: GateKind = match args[1].parse() {
                    Ok(k) => k,
                    Err(e) => {
                        diags.push(syntax(line, e.to_string()));
                        continue;
                    }
                };
                b.add_gate(args[0], kind, args[2..].iter().copied());
                lines.gates.push(line);
            }
            "feedback" => {
                if args.len() != 2 {
                    diags.push(syntax(line, "expected `feedback <port> <gate>`".into()));
                    continue;
                }
                b.add_binding(args[0], args[1]);
                lines.bindings.push(line);
            }
            "output" => {
                if args.len() != 1 {
                    diags.push(syntax(line, "expected `output <gate>`".into()));
                    continue;
                }
                if lines.output.is_some() {
                    diags.push(syntax(line, "output declared more than once".into()));
                    continue;
                }
                b.set_output(args[0]);
                lines.output = Some(line);
            }
            other => diags.push(syntax(line, format!("unknown statement `{other}`"))),
        }
    }

    if !diags.is_empty() {
        return Err(NetlistError(diags));
    }
    b.build().map_err(|errs| {
        NetlistError(
            errs.0
                .into_iter()
                .map(|e| Diagnostic { line: lines.of(e.item()), kind: DiagnosticKind::Build(e) })
                .collect(),
        )
    })
}

/// Canonical text: inputs, gates in topological order, feedbacks in port
/// order, then the output. Always ends with a newline.
pub fn emit_netlist(c: &Circuit) -> String {
    let mut out = String::new();
    for p in c.ports() {
        out.push_str("input ");
        out.push_str(p);
        out.push('\n');
    }
    for &j in c.topological_order() {
        let g = c.gate(j);
        out.push_str("gate ");
        out.push_str(g.name());
        out.push(' ');
        out.push_str(g.kind().name());
        for &pin in g.pins() {
            out.push(' ');
            out.push_str(c.source_name(pin));
        }
        out.push('\n');
    }
    for (p, g) in c.bindings() {
        out.push_str("feedback ");
        out.push_str(&c.ports()[p]);
        out.push(' ');
        out.push_str(c.gate(g).name());
        out.push('\n');
    }
    if let Some(o) = c.output() {
        out.push_str("output ");
        out.push_str(c.gate(o).name());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ccs_core::{samples, Class};

    #[test]
    fn buf_loop_parses_closed() {
        let c = parse_netlist("input x1\ngate g BUF x1\nfeedback x1 g\n").unwrap();
        assert_eq!(c.classify(), Class::Closed);
        assert_eq!(emit_netlist(&c).lines().count(), 3);
    }

    #[test]
    fn arity_mismatch_has_line() {
        let err = parse_netlist("input x1\n\ngate g AND x1\n").unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert_eq!(err.0[0].line, Some(3));
        assert!(matches!(err.0[0].kind, DiagnosticKind::Build(BuildError::ArityMismatch { .. })));
    }

    #[test]
    fn syntax_errors_have_lines() {
        let err = parse_netlist("input x1\nwire a b\ngate g FOO x1\ninput 1x\noutput\n").unwrap_err();
        let lines: Vec<_> = err.0.iter().map(|d| d.line).collect();
        assert_eq!(lines, [Some(2), Some(3), Some(4), Some(5)]);
        assert!(err.0.iter().all(|d| matches!(d.kind, DiagnosticKind::Syntax(_))));
    }

    #[test]
    fn comments_and_forward_references() {
        let text = "# loop\nfeedback x y  # bind later\ngate y NOT x\ninput x\n";
        let c = parse_netlist(text).unwrap();
        assert_eq!(c, samples::not_loop());
    }

    #[test]
    fn build_errors_map_to_lines() {
        let err = parse_netlist("input x\ngate a AND b x\ngate b OR a x\nfeedback x a\nfeedback x b\n").unwrap_err();
        let kinds: Vec<_> = err.0.iter().map(|d| (d.line, matches!(d.kind, DiagnosticKind::Build(_)))).collect();
        assert!(kinds.contains(&(Some(5), true)));
        assert!(err.0.iter().any(|d| matches!(d.kind, DiagnosticKind::Build(BuildError::CombinationalCycle { .. }))));
    }

    #[test]
    fn second_output_is_rejected() {
        let err = parse_netlist("input x\ngate g BUF x\noutput g\noutput g\n").unwrap_err();
        assert_eq!(err.0[0].line, Some(4));
    }

    #[test]
    fn emit_is_canonical() {
        let c = samples::nand_feedback();
        assert_eq!(
            emit_netlist(&c),
            "input x1\ninput x2\ninput x3\ngate y1 NOT x2\ngate y2 AND x1 x2\ngate y3 OR y1 x3\n\
             gate y4 NAND y2 y3\nfeedback x1 y4\nfeedback x2 y4\nfeedback x3 y4\noutput y4\n"
        );
    }

    #[test]
    fn samples_round_trip() {
        for c in samples::all() {
            let text = emit_netlist(&c);
            let back = parse_netlist(&text).unwrap();
            assert_eq!(back, c);
            assert_eq!(emit_netlist(&back), text);
        }
    }
}
