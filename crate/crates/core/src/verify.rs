//! Depth metrics and routing-correctness checks.
//!
//! Verification is permutation-level: starting from the initial layout, every
//! routing swap relabels the physical qubits, and every other routed gate must
//! be the next pending original gate on the logical qubits it lands on. Since
//! two gates depend on each other exactly when they share a qubit, per-qubit
//! order is the whole dependence partial order.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::mapping::Mapping;
use crate::topology::CouplingGraph;

/// How many layers an inserted SWAP occupies on its qubits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwapDepthModel {
    #[default]
    Unit,
    /// Decomposed into three sequential CX gates.
    ThreeCx,
}

impl SwapDepthModel {
    pub fn swap_weight(self) -> usize {
        match self {
            SwapDepthModel::Unit => 1,
            SwapDepthModel::ThreeCx => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SwapDepthModel::Unit => "unit",
            SwapDepthModel::ThreeCx => "three_cx",
        }
    }
}

impl std::str::FromStr for SwapDepthModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unit" => Ok(SwapDepthModel::Unit),
            "three_cx" | "three-cx" => Ok(SwapDepthModel::ThreeCx),
            _ => Err(format!("unknown swap depth model '{s}' (unit, three_cx)")),
        }
    }
}

/// Critical-path length: each gate takes one step on all of its qubits,
/// swaps take [`SwapDepthModel::swap_weight`] steps, barriers only align
/// their qubits.
pub fn depth(circuit: &Circuit, model: SwapDepthModel) -> usize {
    let mut t = vec![0usize; circuit.num_qubits];
    for g in &circuit.gates {
        let start = g.qubits.iter().map(|&q| t[q]).max().unwrap_or(0);
        let end = match g.kind {
            GateKind::Barrier => start,
            GateKind::Swap => start + model.swap_weight(),
            _ => start + 1,
        };
        for &q in &g.qubits {
            t[q] = end;
        }
    }
    t.into_iter().max().unwrap_or(0)
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("reference depth must be at least 1")]
pub struct ZeroReferenceDepth;

pub fn depth_factor(
    routed_depth: usize,
    reference_depth: usize,
) -> Result<f64, ZeroReferenceDepth> {
    if reference_depth == 0 {
        return Err(ZeroReferenceDepth);
    }
    Ok(routed_depth as f64 / reference_depth as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Nonadjacent,
    MissingGate,
    Reordered,
    WrongOperands,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Index into the routed circuit, or the original gate id for
    /// `missing_gate`.
    pub gate_id: usize,
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    fn push(&mut self, gate_id: usize, kind: ViolationKind, detail: String) {
        self.violations.push(Violation {
            gate_id,
            kind,
            detail,
        });
    }
}

struct Pending<'a> {
    original: &'a Circuit,
    queues: Vec<Vec<usize>>,
    cursor: Vec<usize>,
    matched: Vec<bool>,
}

impl<'a> Pending<'a> {
    fn new(original: &'a Circuit) -> Self {
        let mut queues = vec![Vec::new(); original.num_qubits];
        for g in &original.gates {
            for &q in &g.qubits {
                queues[q].push(g.id);
            }
        }
        Pending {
            original,
            cursor: vec![0; queues.len()],
            queues,
            matched: vec![false; original.gates.len()],
        }
    }

    fn head(&mut self, q: usize) -> Option<usize> {
        let queue = &self.queues[q];
        let cur = &mut self.cursor[q];
        while *cur < queue.len() && self.matched[queue[*cur]] {
            *cur += 1;
        }
        queue.get(*cur).copied()
    }

    /// The original gate that is next on every one of `logical`.
    fn ready_on(&mut self, logical: &[usize]) -> Option<&'a Gate> {
        let id = self.head(logical[0])?;
        let g = &self.original.gates[id];
        if g.qubits.len() != logical.len() {
            return None;
        }
        for &q in &logical[1..] {
            if self.head(q) != Some(id) {
                return None;
            }
        }
        Some(g)
    }

    fn find_later(&self, routed: &Gate, logical: &[usize]) -> Option<usize> {
        self.original
            .gates
            .iter()
            .find(|g| !self.matched[g.id] && matches_on(routed, g, logical))
            .map(|g| g.id)
    }
}

/// `routed` placed on `logical` performs original gate `g`.
fn matches_on(routed: &Gate, g: &Gate, logical: &[usize]) -> bool {
    let relabeled = Gate {
        qubits: logical.to_vec(),
        id: g.id,
        ..routed.clone()
    };
    relabeled.same_operation(g)
}

pub fn verify_routed(
    original: &Circuit,
    routed: &Circuit,
    initial_mapping: &Mapping,
    graph: &CouplingGraph,
) -> VerificationReport {
    let mut report = VerificationReport::default();
    let n_phys = graph.num_qubits();
    if initial_mapping.len() != n_phys || routed.num_qubits != n_phys {
        report.push(
            0,
            ViolationKind::WrongOperands,
            format!(
                "routed width {} / layout width {} do not match the device ({n_phys})",
                routed.num_qubits,
                initial_mapping.len()
            ),
        );
        report.ok = false;
        return report;
    }
    let n_log = original.num_qubits;
    let mut mapping = initial_mapping.clone();
    let mut pending = Pending::new(original);

    for (i, r) in routed.gates.iter().enumerate() {
        if r.qubits.iter().any(|&p| p >= n_phys) {
            report.push(
                i,
                ViolationKind::WrongOperands,
                format!("{r}: physical qubit out of range"),
            );
            continue;
        }
        let logical: Vec<usize> = r.qubits.iter().map(|&p| mapping.logical(p)).collect();
        let on_circuit = logical.iter().all(|&q| q < n_log);
        let ready = if on_circuit {
            pending
                .ready_on(&logical)
                .filter(|g| matches_on(r, g, &logical))
        } else {
            None
        };

        if let Some(g) = ready {
            pending.matched[g.id] = true;
            if r.qubits.len() == 2
                && r.kind != GateKind::Barrier
                && !graph.has_edge(r.qubits[0], r.qubits[1])
            {
                report.push(
                    i,
                    ViolationKind::Nonadjacent,
                    format!("{r}: physical qubits are not coupled"),
                );
            }
            continue;
        }

        if r.kind == GateKind::Swap {
            // routing swap
            if !graph.has_edge(r.qubits[0], r.qubits[1]) {
                report.push(
                    i,
                    ViolationKind::Nonadjacent,
                    format!("{r}: swap on uncoupled qubits"),
                );
            }
            mapping.swap_physical(r.qubits[0], r.qubits[1]);
            continue;
        }

        match on_circuit
            .then(|| pending.find_later(r, &logical))
            .flatten()
        {
            Some(id) => {
                pending.matched[id] = true;
                report.push(
                    i,
                    ViolationKind::Reordered,
                    format!("{r} executes original gate {id} before its predecessors"),
                );
            }
            None => report.push(
                i,
                ViolationKind::WrongOperands,
                format!("{r} acts on logical qubits {logical:?}, matching no pending gate"),
            ),
        }
    }

    for g in &original.gates {
        if !pending.matched[g.id] {
            report.push(
                g.id,
                ViolationKind::MissingGate,
                format!("{g} never executed"),
            );
        }
    }
    report.ok = report.violations.is_empty();
    report
}
