//! Affine lifting of a flat gate trace into macro-gates.
//!
//! A macro-gate is a run of consecutive gates with the same operation whose
//! operand indices are affine in a single iterator `i` over `0..n`, e.g.
//! `cx q[i], q[2i+1]` for `i` in `0..4`. Lifting is greedy: each run is
//! extended left to right for as long as every operand position stays on
//! the line fixed by the run's first two members.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind};

/// `a * i + b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Affine {
    pub a: i64,
    pub b: i64,
}

impl Affine {
    pub fn at(&self, i: i64) -> i64 {
        self.a * i + self.b
    }
}

impl Serialize for MacroGate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let pair = |f: &Affine| [f.a, f.b];
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("name", &self.name)?;
        m.serialize_entry("kind", &self.kind)?;
        m.serialize_entry("n", &self.n)?;
        m.serialize_entry("q1", &self.operands.first().map(pair))?;
        m.serialize_entry("q2", &self.operands.get(1).map(pair))?;
        if self.operands.len() > 2 {
            let all: Vec<[i64; 2]> = self.operands.iter().map(pair).collect();
            m.serialize_entry("qs", &all)?;
        }
        if !self.params.is_empty() {
            m.serialize_entry("params", &self.params)?;
        }
        if let Some(c) = &self.clbit {
            m.serialize_entry("clbit", &pair(c))?;
        }
        m.serialize_entry("sched", &[self.schedule.a, self.schedule.b])?;
        m.end()
    }
}

/// One lifted statement: iteration domain `{[i] : 0 <= i < n}`, one affine
/// qubit relation per operand position, and the schedule `i -> s*i + t0`.
#[derive(Clone, Debug, PartialEq)]
pub struct MacroGate {
    pub name: String,
    pub kind: GateKind,
    pub n: usize,
    pub operands: Vec<Affine>,
    pub params: Vec<f64>,
    pub clbit: Option<Affine>,
    pub schedule: Affine,
}

impl MacroGate {
    fn singleton(g: &Gate) -> Self {
        MacroGate {
            name: g.name.clone(),
            kind: g.kind,
            n: 1,
            operands: g
                .qubits
                .iter()
                .map(|&q| Affine { a: 0, b: q as i64 })
                .collect(),
            params: g.params.clone(),
            clbit: g.clbit.map(|c| Affine { a: 0, b: c as i64 }),
            schedule: Affine {
                a: 1,
                b: g.id as i64,
            },
        }
    }

    /// Whether `g` is the next instance of this run.
    fn admits(&self, g: &Gate) -> bool {
        if g.kind != self.kind
            || g.name != self.name
            || g.params != self.params
            || g.qubits.len() != self.operands.len()
            || g.clbit.is_some() != self.clbit.is_some()
            // barriers carry variable operand lists and stay singletons
            || g.kind == GateKind::Barrier
        {
            return false;
        }
        let i = self.n as i64;
        if self.n == 1 {
            // the second point fixes the slope
            return true;
        }
        g.qubits
            .iter()
            .zip(&self.operands)
            .all(|(&q, f)| f.at(i) == q as i64)
            && match (g.clbit, &self.clbit) {
                (Some(c), Some(f)) => f.at(i) == c as i64,
                _ => true,
            }
    }

    fn extend(&mut self, g: &Gate) {
        if self.n == 1 {
            for (f, &q) in self.operands.iter_mut().zip(&g.qubits) {
                f.a = q as i64 - f.b;
            }
            if let (Some(f), Some(c)) = (self.clbit.as_mut(), g.clbit) {
                f.a = c as i64 - f.b;
            }
        }
        self.n += 1;
    }

    /// Gate instance `i` of the run.
    pub fn instance(&self, i: usize) -> (Vec<i64>, Option<i64>) {
        let i = i as i64;
        (
            self.operands.iter().map(|f| f.at(i)).collect(),
            self.clbit.map(|f| f.at(i)),
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LiftedCircuit {
    pub name: String,
    pub num_qubits: usize,
    pub num_clbits: usize,
    pub macros: Vec<MacroGate>,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ExpandError {
    #[error("macro-gate {macro_index} instance {instance}: qubit index {value} out of range")]
    OutOfRange {
        macro_index: usize,
        instance: usize,
        value: i64,
    },
    #[error("macro-gate {macro_index} has an empty domain")]
    EmptyDomain { macro_index: usize },
}

pub fn lift(circuit: &Circuit) -> LiftedCircuit {
    let mut macros: Vec<MacroGate> = Vec::new();
    for g in &circuit.gates {
        match macros.last_mut() {
            Some(m) if m.admits(g) => m.extend(g),
            _ => macros.push(MacroGate::singleton(g)),
        }
    }
    LiftedCircuit {
        name: circuit.name.clone(),
        num_qubits: circuit.num_qubits,
        num_clbits: circuit.num_clbits,
        macros,
    }
}

pub fn expand(lifted: &LiftedCircuit) -> Result<Circuit, ExpandError> {
    let mut c = Circuit::new(lifted.name.clone(), lifted.num_qubits);
    c.num_clbits = lifted.num_clbits;
    for (mi, m) in lifted.macros.iter().enumerate() {
        if m.n == 0 {
            return Err(ExpandError::EmptyDomain { macro_index: mi });
        }
        for i in 0..m.n {
            let (qs, clbit) = m.instance(i);
            let mut qubits = Vec::with_capacity(qs.len());
            for v in qs {
                if v < 0 || v as usize >= lifted.num_qubits {
                    return Err(ExpandError::OutOfRange {
                        macro_index: mi,
                        instance: i,
                        value: v,
                    });
                }
                qubits.push(v as usize);
            }
            let clbit = match clbit {
                Some(v) if v < 0 || v as usize >= lifted.num_clbits => {
                    return Err(ExpandError::OutOfRange {
                        macro_index: mi,
                        instance: i,
                        value: v,
                    })
                }
                other => other.map(|v| v as usize),
            };
            c.push_full(m.kind, m.name.clone(), qubits, m.params.clone(), clbit);
        }
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CompressionStats {
    pub num_macros: usize,
    pub num_gates: usize,
    pub ratio: f64,
}

pub fn compression_stats(lifted: &LiftedCircuit) -> CompressionStats {
    let num_macros = lifted.macros.len();
    let num_gates: usize = lifted.macros.iter().map(|m| m.n).sum();
    let ratio = if num_macros == 0 {
        1.0
    } else {
        num_gates as f64 / num_macros as f64
    };
    CompressionStats {
        num_macros,
        num_gates,
        ratio,
    }
}

/// JSON dump of the macro-gates, one object per run.
pub fn macros_to_json(lifted: &LiftedCircuit) -> serde_json::Value {
    serde_json::to_value(&lifted.macros).expect("macro-gates serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace() -> Circuit {
        let mut c = Circuit::new("trace", 8);
        for (a, b) in [(0, 1), (1, 3), (2, 5), (3, 7)] {
            c.cx(a, b);
        }
        c
    }

    #[test]
    fn trace_lifts_to_one_macro_gate() {
        let l = lift(&trace());
        assert_eq!(l.macros.len(), 1);
        let m = &l.macros[0];
        assert_eq!(m.n, 4);
        assert_eq!(
            m.operands,
            vec![Affine { a: 1, b: 0 }, Affine { a: 2, b: 1 }]
        );
        assert_eq!(m.schedule, Affine { a: 1, b: 0 });
        assert_eq!(compression_stats(&l).ratio, 4.0);
    }

    #[test]
    fn expanding_the_trace_macro() {
        let l = LiftedCircuit {
            name: "trace".into(),
            num_qubits: 8,
            num_clbits: 0,
            macros: vec![MacroGate {
                name: "cx".into(),
                kind: GateKind::TwoQubit,
                n: 4,
                operands: vec![Affine { a: 1, b: 0 }, Affine { a: 2, b: 1 }],
                params: vec![],
                clbit: None,
                schedule: Affine { a: 1, b: 0 },
            }],
        };
        assert!(expand(&l).unwrap().structurally_eq(&trace()));
    }

    #[test]
    fn singleton_and_empty() {
        let mut c = Circuit::new("one", 2);
        c.cx(0, 1);
        let l = lift(&c);
        assert_eq!(l.macros[0].n, 1);
        assert_eq!(compression_stats(&l).ratio, 1.0);

        let empty = lift(&Circuit::new("e", 3));
        let s = compression_stats(&empty);
        assert_eq!((s.num_macros, s.ratio), (0, 1.0));
    }

    #[test]
    fn any_two_points_fit_and_a_third_can_break_the_line() {
        let mut c = Circuit::new("t", 8);
        c.cx(0, 1);
        c.cx(5, 2);
        c.cx(7, 0);
        let l = lift(&c);
        assert_eq!(l.macros.len(), 2);
        assert_eq!(l.macros[0].n, 2);
        assert_eq!(
            l.macros[0].operands,
            vec![Affine { a: 5, b: 0 }, Affine { a: 1, b: 1 }]
        );
        assert_eq!(l.macros[1].schedule.b, 2);
        assert!(expand(&l).unwrap().structurally_eq(&c));
    }

    #[test]
    fn expansion_range_is_checked() {
        let mut l = lift(&trace());
        l.num_qubits = 7;
        assert_eq!(
            expand(&l),
            Err(ExpandError::OutOfRange {
                macro_index: 0,
                instance: 3,
                value: 7
            })
        );
    }

    #[test]
    fn json_shape() {
        let v = macros_to_json(&lift(&trace()));
        assert_eq!(v[0]["n"], 4);
        assert_eq!(v[0]["q2"], serde_json::json!([2, 1]));
        assert_eq!(v[0]["sched"], serde_json::json!([1, 0]));
    }
}
