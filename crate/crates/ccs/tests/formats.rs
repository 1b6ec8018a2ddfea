use std::path::PathBuf;

use ccs::netlist::DiagnosticKind;
use ccs::{emit_dimacs, emit_netlist, parse_dimacs, parse_netlist};
use ccs_core::{random, samples, BuildError, Class};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn read_fixture(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "fixtures", name].iter().collect();
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn fixtures_match_builtin_samples() {
    let pairs = [
        ("nand_formula.net", samples::nand_formula()),
        ("nand_feedback.net", samples::nand_feedback()),
        ("mixed_feedback.net", samples::mixed_feedback()),
        ("gated.net", samples::gated_mixed_feedback()),
        ("not_loop.net", samples::not_loop()),
        ("buf_loop.net", samples::buf_loop()),
        ("csat_example.net", samples::csat_example()),
    ];
    for (name, sample) in pairs {
        assert_eq!(parse_netlist(&read_fixture(name)).unwrap(), sample, "{name}");
    }
}

#[test]
fn fixture_classes() {
    let class = |n| parse_netlist(&read_fixture(n)).unwrap().classify();
    assert_eq!(class("nand_formula.net"), Class::Open);
    assert_eq!(class("nand_feedback.net"), Class::Closed);
    assert_eq!(class("gated.net"), Class::SemiClosed);
    assert_eq!(class("and_verifier.net"), Class::Open);
}

#[test]
fn undeclared_source_points_at_its_line() {
    let err = parse_netlist("input a\n# gap\ngate g AND a b\noutput g\n").unwrap_err();
    assert_eq!(err.0.len(), 1);
    assert_eq!(err.0[0].line, Some(3));
    assert!(matches!(err.0[0].kind, DiagnosticKind::Build(BuildError::UnknownReference { .. })));
    assert!(err.to_string().starts_with("line 3:"));
}

#[test]
fn missing_output_reference() {
    let err = parse_netlist("input a\ngate g NOT a\noutput h\n").unwrap_err();
    assert_eq!(err.0[0].line, Some(3));
}

#[test]
fn cnf_fixture() {
    let f = parse_dimacs(&read_fixture("small.cnf")).unwrap();
    assert_eq!(f.num_vars(), 2);
    assert_eq!(f.clauses(), [vec![1, -2], vec![-1]]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn netlist_round_trip(seed: u64, n in 0usize..6, m in 1usize..16, closed: bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = if closed && n > 0 {
            random::closed_circuit(&mut rng, n, m)
        } else {
            random::open_circuit(&mut rng, n, m)
        };
        let text = emit_netlist(&c);
        let back = parse_netlist(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(emit_netlist(&back), text);
    }

    #[test]
    fn statement_order_does_not_matter(seed: u64, n in 1usize..5, m in 1usize..10, rot in 0usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random::closed_circuit(&mut rng, n, m);
        let text = emit_netlist(&c);
        // inputs keep their order (it defines the port order); the rest is scrambled
        let (inputs, mut rest): (Vec<&str>, Vec<&str>) = text.lines().partition(|l| l.starts_with("input"));
        rest.reverse();
        let k = rot % rest.len();
        rest.rotate_left(k);
        let scrambled = [inputs, rest].concat().join("\n");
        let back = parse_netlist(&scrambled).unwrap();
        let sorted = |t: String| {
            let mut v: Vec<String> = t.lines().map(String::from).collect();
            v.sort();
            v
        };
        prop_assert_eq!(sorted(emit_netlist(&back)), sorted(text));
        prop_assert_eq!(back.classify(), Class::Closed);
    }

    #[test]
    fn dimacs_round_trip(seed: u64, vars in 1usize..12, clauses in 0usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random::cnf(&mut rng, vars, clauses, 4);
        prop_assert_eq!(parse_dimacs(&emit_dimacs(&f)).unwrap(), f);
    }
}
