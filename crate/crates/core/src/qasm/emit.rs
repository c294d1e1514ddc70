use std::fmt::Write;

use crate::circuit::{Circuit, GateKind};

/// Serializes a circuit as OpenQASM 2.0 with a single `q`/`c` register pair.
///
/// Every line of `header_comment` becomes a `//` comment after the include.
pub fn emit_qasm(circuit: &Circuit, header_comment: &str) -> String {
    let mut out = String::with_capacity(32 * circuit.gates.len() + 64);
    out.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    for line in header_comment.lines() {
        let _ = writeln!(out, "// {line}");
    }
    let _ = writeln!(out, "qreg q[{}];", circuit.num_qubits);
    if circuit.num_clbits > 0 {
        let _ = writeln!(out, "creg c[{}];", circuit.num_clbits);
    }
    for g in &circuit.gates {
        out.push_str(&g.name);
        if !g.params.is_empty() {
            out.push('(');
            for (i, p) in g.params.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                // `Display` for f64 is the shortest string that round-trips.
                let _ = write!(out, "{p}");
            }
            out.push(')');
        }
        out.push(' ');
        for (i, q) in g.qubits.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "q[{q}]");
        }
        if g.kind == GateKind::Measure {
            if let Some(c) = g.clbit {
                let _ = write!(out, " -> c[{c}]");
            }
        }
        out.push_str(";\n");
    }
    out
}
