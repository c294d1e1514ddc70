//! Gate-level circuit representation shared by every stage of the pipeline.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Gate category. Routing only cares about arity; the name is kept for
/// emission and equivalence checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    OneQubit,
    TwoQubit,
    Swap,
    Barrier,
    Measure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    /// Position in program order, which doubles as the logical time step.
    pub id: usize,
    pub kind: GateKind,
    pub name: String,
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
    /// Target classical bit of a measurement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clbit: Option<usize>,
}

impl Gate {
    pub fn is_two_qubit(&self) -> bool {
        matches!(self.kind, GateKind::TwoQubit | GateKind::Swap)
    }

    /// Same operation on the same operands, ignoring the id.
    pub fn same_operation(&self, other: &Gate) -> bool {
        self.kind == other.kind
            && self.name == other.name
            && self.qubits == other.qubits
            && self.clbit == other.clbit
            && self.params.len() == other.params.len()
            && self
                .params
                .iter()
                .zip(&other.params)
                .all(|(a, b)| (a - b).abs() <= 1e-12)
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        if !self.params.is_empty() {
            let params: Vec<String> = self.params.iter().map(|p| p.to_string()).collect();
            write!(f, "({})", params.join(","))?;
        }
        let qs: Vec<String> = self.qubits.iter().map(|q| format!("q{q}")).collect();
        write!(f, " {}", qs.join(","))?;
        if let Some(c) = self.clbit {
            write!(f, " -> c{c}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub name: String,
    pub num_qubits: usize,
    #[serde(default)]
    pub num_clbits: usize,
    pub gates: Vec<Gate>,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CircuitError {
    #[error("gate {gate}: operand q[{qubit}] out of range (circuit has {num_qubits} qubits)")]
    QubitOutOfRange {
        gate: usize,
        qubit: usize,
        num_qubits: usize,
    },
    #[error("gate {gate}: classical bit c[{clbit}] out of range")]
    ClbitOutOfRange { gate: usize, clbit: usize },
    #[error("gate {gate}: duplicate operand q[{qubit}]")]
    DuplicateOperand { gate: usize, qubit: usize },
    #[error("gate {gate}: {kind:?} gate with {arity} operands")]
    BadArity {
        gate: usize,
        kind: GateKind,
        arity: usize,
    },
    #[error("gate at position {position} has id {id}")]
    NonDenseId { position: usize, id: usize },
}

impl Circuit {
    pub fn new(name: impl Into<String>, num_qubits: usize) -> Self {
        Circuit {
            name: name.into(),
            num_qubits,
            num_clbits: 0,
            gates: Vec::new(),
        }
    }

    /// Appends a gate, assigning the next dense id.
    pub fn push(&mut self, kind: GateKind, name: impl Into<String>, qubits: Vec<usize>) -> usize {
        self.push_full(kind, name, qubits, Vec::new(), None)
    }

    pub fn push_full(
        &mut self,
        kind: GateKind,
        name: impl Into<String>,
        qubits: Vec<usize>,
        params: Vec<f64>,
        clbit: Option<usize>,
    ) -> usize {
        let id = self.gates.len();
        self.gates.push(Gate {
            id,
            kind,
            name: name.into(),
            qubits,
            params,
            clbit,
        });
        id
    }

    pub fn cx(&mut self, a: usize, b: usize) -> usize {
        self.push(GateKind::TwoQubit, "cx", vec![a, b])
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    /// Quantum operations, i.e. every gate except barriers.
    pub fn qops(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| g.kind != GateKind::Barrier)
            .count()
    }

    /// Same gates in reverse program order with ids renumbered.
    pub fn reversed(&self) -> Circuit {
        let mut out = Circuit {
            name: format!("{}_reversed", self.name),
            num_qubits: self.num_qubits,
            num_clbits: self.num_clbits,
            gates: Vec::with_capacity(self.gates.len()),
        };
        for g in self.gates.iter().rev() {
            out.gates.push(Gate {
                id: out.gates.len(),
                ..g.clone()
            });
        }
        out
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        for (position, g) in self.gates.iter().enumerate() {
            if g.id != position {
                return Err(CircuitError::NonDenseId { position, id: g.id });
            }
            let arity_ok = match g.kind {
                GateKind::OneQubit | GateKind::Measure => g.qubits.len() == 1,
                GateKind::TwoQubit | GateKind::Swap => g.qubits.len() == 2,
                GateKind::Barrier => !g.qubits.is_empty(),
            };
            if !arity_ok {
                return Err(CircuitError::BadArity {
                    gate: g.id,
                    kind: g.kind,
                    arity: g.qubits.len(),
                });
            }
            for (i, &q) in g.qubits.iter().enumerate() {
                if q >= self.num_qubits {
                    return Err(CircuitError::QubitOutOfRange {
                        gate: g.id,
                        qubit: q,
                        num_qubits: self.num_qubits,
                    });
                }
                if g.qubits[..i].contains(&q) {
                    return Err(CircuitError::DuplicateOperand {
                        gate: g.id,
                        qubit: q,
                    });
                }
            }
            if let Some(c) = g.clbit {
                if c >= self.num_clbits {
                    return Err(CircuitError::ClbitOutOfRange {
                        gate: g.id,
                        clbit: c,
                    });
                }
            }
        }
        Ok(())
    }

    /// Structural equality: same width and the same gate sequence.
    pub fn structurally_eq(&self, other: &Circuit) -> bool {
        self.num_qubits == other.num_qubits
            && self.gates.len() == other.gates.len()
            && self
                .gates
                .iter()
                .zip(&other.gates)
                .all(|(a, b)| a.id == b.id && a.same_operation(b))
    }
}
