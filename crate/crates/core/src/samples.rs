//! Small reference circuits.
//!
//! Gates are named `y1, y2, ...` and ports `x1, x2, ...` so characteristic
//! systems print in the familiar `y3 = OR(y1, x3)` / `x1 = y4` form.

use alloc::vec;
use alloc::vec::Vec;

use crate::circuit::{Circuit, CircuitBuilder, GateKind};

fn nand_formula_builder() -> CircuitBuilder {
    Circuit::builder()
        .port("x1")
        .port("x2")
        .port("x3")
        .gate("y1", GateKind::Not, ["x2"])
        .gate("y2", GateKind::And, ["x1", "x2"])
        .gate("y3", GateKind::Or, ["y1", "x3"])
        .gate("y4", GateKind::Nand, ["y2", "y3"])
        .output("y4")
}

/// Open circuit computing `NAND(AND(x1, x2), OR(NOT(x2), x3))`.
pub fn nand_formula() -> Circuit {
    nand_formula_builder().build().unwrap()
}

/// [`nand_formula`] with the NAND output fed back to all three ports.
/// Unstable.
pub fn nand_feedback() -> Circuit {
    nand_formula_builder().bind("x1", "y4").bind("x2", "y4").bind("x3", "y4").build().unwrap()
}

/// [`nand_formula`] with `x1, x2` fed by the NAND and `x3` by the NOT gate.
/// Stable with the unique witness `(1, 1, 0)`.
pub fn mixed_feedback() -> Circuit {
    nand_formula_builder().bind("x1", "y4").bind("x2", "y4").bind("x3", "y1").build().unwrap()
}

/// [`mixed_feedback`] with every loop passing through `AND(s, .)` and a free
/// control port `s`. Semi-closed.
pub fn gated_mixed_feedback() -> Circuit {
    nand_formula_builder()
        .port("s")
        .gate("and_x1", GateKind::And, ["s", "y4"])
        .gate("and_x2", GateKind::And, ["s", "y4"])
        .gate("and_x3", GateKind::And, ["s", "y1"])
        .bind("x1", "and_x1")
        .bind("x2", "and_x2")
        .bind("x3", "and_x3")
        .build()
        .unwrap()
}

/// `y = NOT(x); x = y`. The smallest unstable circuit.
pub fn not_loop() -> Circuit {
    Circuit::builder().port("x").gate("y", GateKind::Not, ["x"]).bind("x", "y").build().unwrap()
}

/// `y = BUF(x); x = y`. Stable under both `x = 0` and `x = 1`.
pub fn buf_loop() -> Circuit {
    Circuit::builder().port("x").gate("y", GateKind::Buf, ["x"]).bind("x", "y").build().unwrap()
}

/// Open circuit computing `AND(NOT(x1), OR(x1, x2))`, satisfied only by
/// `(x1, x2) = (0, 1)`.
pub fn csat_example() -> Circuit {
    Circuit::builder()
        .port("x1")
        .port("x2")
        .gate("y1", GateKind::Not, ["x1"])
        .gate("y2", GateKind::Or, ["x1", "x2"])
        .gate("y3", GateKind::And, ["y1", "y2"])
        .output("y3")
        .build()
        .unwrap()
}

/// Every sample circuit.
pub fn all() -> Vec<Circuit> {
    vec![
        nand_formula(),
        nand_feedback(),
        mixed_feedback(),
        gated_mixed_feedback(),
        not_loop(),
        buf_loop(),
        csat_example(),
    ]
}

/// The closed sample circuits.
pub fn closed() -> Vec<Circuit> {
    vec![nand_feedback(), mixed_feedback(), not_loop(), buf_loop()]
}
