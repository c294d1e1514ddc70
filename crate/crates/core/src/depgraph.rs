//! Two-qubit-gate dependence DAG, transitive dependence weights, front layer
//! and the layered look-ahead window.
//!
//! Nodes are the two-qubit gates of a circuit in program order, so every edge
//! goes from a smaller to a larger node index. Only immediate edges are kept:
//! each qubit links consecutive two-qubit gates that touch it. Two gates that
//! share a qubit are therefore always connected by a path, which gives the
//! same transitive closure as the full pairwise shared-qubit relation.
//!
//! A barrier fences its qubits: every two-qubit gate after it on any of those
//! qubits depends on the last two-qubit gate before it on any of them.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::circuit::{Circuit, GateKind};

/// Memory budget for the reachability bitsets of one closure block.
const CLOSURE_BLOCK_BYTES: usize = 64 << 20;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DepGraphError {
    #[error("dependence graph has a cycle")]
    Cycle,
    #[error("edge ({0}, {1}) references a node outside the graph")]
    BadEdge(usize, usize),
}

/// Compressed adjacency lists.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Csr {
    offsets: Vec<u32>,
    targets: Vec<u32>,
}

impl Csr {
    fn from_lists(lists: &[Vec<u32>]) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        let mut targets = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        offsets.push(0);
        for l in lists {
            targets.extend_from_slice(l);
            offsets.push(targets.len() as u32);
        }
        Csr { offsets, targets }
    }

    #[inline]
    fn get(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepGraph {
    gate_ids: Vec<usize>,
    qubits: Vec<[usize; 2]>,
    succ: Csr,
    pred: Csr,
    omega: Vec<u64>,
}

impl DepGraph {
    /// Builds the immediate-edge DAG without computing weights.
    pub fn unweighted(circuit: &Circuit) -> DepGraph {
        let mut last: Vec<Vec<u32>> = vec![Vec::new(); circuit.num_qubits];
        let mut gate_ids = Vec::new();
        let mut qubits = Vec::new();
        let mut preds: Vec<Vec<u32>> = Vec::new();

        for g in &circuit.gates {
            match g.kind {
                GateKind::TwoQubit | GateKind::Swap => {
                    let v = gate_ids.len() as u32;
                    let (a, b) = (g.qubits[0], g.qubits[1]);
                    let mut p: Vec<u32> = last[a].iter().chain(&last[b]).copied().collect();
                    p.sort_unstable();
                    p.dedup();
                    preds.push(p);
                    gate_ids.push(g.id);
                    qubits.push([a, b]);
                    last[a] = vec![v];
                    last[b] = vec![v];
                }
                GateKind::Barrier => {
                    let mut fence: Vec<u32> = g
                        .qubits
                        .iter()
                        .flat_map(|&q| last[q].iter().copied())
                        .collect();
                    fence.sort_unstable();
                    fence.dedup();
                    for &q in &g.qubits {
                        last[q] = fence.clone();
                    }
                }
                GateKind::OneQubit | GateKind::Measure => {}
            }
        }

        Self::from_preds(gate_ids, qubits, &preds)
    }

    fn from_preds(gate_ids: Vec<usize>, qubits: Vec<[usize; 2]>, preds: &[Vec<u32>]) -> DepGraph {
        let mut succs: Vec<Vec<u32>> = vec![Vec::new(); preds.len()];
        for (v, ps) in preds.iter().enumerate() {
            for &p in ps {
                succs[p as usize].push(v as u32);
            }
        }
        DepGraph {
            gate_ids,
            qubits,
            succ: Csr::from_lists(&succs),
            pred: Csr::from_lists(preds),
            omega: Vec::new(),
        }
    }

    /// Arbitrary DAG over `n` nodes; used to exercise the closure on graphs
    /// that do not come from a circuit. Node qubits are left as `[0, 1]`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<DepGraph, DepGraphError> {
        let mut preds: Vec<Vec<u32>> = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(DepGraphError::BadEdge(a, b));
            }
            preds[b].push(a as u32);
        }
        for p in &mut preds {
            p.sort_unstable();
            p.dedup();
        }
        Ok(Self::from_preds((0..n).collect(), vec![[0, 1]; n], &preds))
    }

    pub fn len(&self) -> usize {
        self.gate_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gate_ids.is_empty()
    }

    /// Circuit gate id of node `v`.
    pub fn gate_id(&self, v: usize) -> usize {
        self.gate_ids[v]
    }

    /// Logical operands of node `v`.
    pub fn qubits(&self, v: usize) -> [usize; 2] {
        self.qubits[v]
    }

    pub fn successors(&self, v: usize) -> &[u32] {
        self.succ.get(v)
    }

    pub fn predecessors(&self, v: usize) -> &[u32] {
        self.pred.get(v)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).flat_map(move |v| self.successors(v).iter().map(move |&s| (v, s as usize)))
    }

    pub fn edge_count(&self) -> usize {
        self.succ.targets.len()
    }

    /// Transitive dependence weights; empty until [`DepGraph::set_omega`] or
    /// [`build_depgraph`].
    pub fn omega(&self) -> &[u64] {
        &self.omega
    }

    pub fn set_omega(&mut self, omega: Vec<u64>) {
        assert_eq!(omega.len(), self.len(), "one weight per node");
        self.omega = omega;
    }

    /// DOT rendering annotated with gate ids and weights.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph deps {\n  node [shape=box];\n");
        for v in 0..self.len() {
            let [a, b] = self.qubits[v];
            let w = self
                .omega
                .get(v)
                .map(|w| format!(" w={w}"))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "  n{v} [label=\"g{} q{a},q{b}{w}\"];",
                self.gate_ids[v]
            );
        }
        for (a, b) in self.edges() {
            let _ = writeln!(out, "  n{a} -> n{b};");
        }
        out.push_str("}\n");
        out
    }
}

/// Builds the dependence DAG and its transitive weights.
pub fn build_depgraph(circuit: &Circuit) -> DepGraph {
    let mut dg = DepGraph::unweighted(circuit);
    let omega = transitive_weights(&dg).expect("program-order edges are acyclic");
    dg.set_omega(omega);
    dg
}

/// Number of distinct transitive successors of every node.
///
/// Reachability sets are unions of successor bitsets in reverse topological
/// order. Targets are processed in column blocks so the working set stays
/// under a fixed budget for any graph size.
pub fn transitive_weights(dg: &DepGraph) -> Result<Vec<u64>, DepGraphError> {
    let n = dg.len();
    let order = topological_order(dg)?;
    let mut position = vec![0u32; n];
    for (i, &v) in order.iter().enumerate() {
        position[v as usize] = i as u32;
    }
    // successor positions, indexed by position
    let succ_pos: Vec<Vec<u32>> = order
        .iter()
        .map(|&v| {
            dg.successors(v as usize)
                .iter()
                .map(|&s| position[s as usize])
                .collect()
        })
        .collect();

    let mut counts = vec![0u64; n];
    if n == 0 {
        return Ok(counts);
    }
    let max_words = (CLOSURE_BLOCK_BYTES / 8 / n).max(1);
    let words = n.div_ceil(64).min(max_words);
    let block = words * 64;
    let mut rows = vec![0u64; n * words];

    let mut start = 0;
    while start < n {
        let end = (start + block).min(n);
        // only positions before `end` can reach a target in [start, end)
        for pos in (0..end).rev() {
            let (head, tail) = rows.split_at_mut((pos + 1) * words);
            let row = &mut head[pos * words..];
            row.fill(0);
            for &s in &succ_pos[pos] {
                let s = s as usize;
                if s >= end {
                    continue;
                }
                if s >= start {
                    let bit = s - start;
                    row[bit / 64] |= 1 << (bit % 64);
                }
                // s comes after pos, so its row is already final
                let off = (s - pos - 1) * words;
                for (d, x) in row.iter_mut().zip(&tail[off..off + words]) {
                    *d |= *x;
                }
            }
            counts[order[pos] as usize] += row.iter().map(|w| w.count_ones() as u64).sum::<u64>();
        }
        start = end;
    }
    Ok(counts)
}

fn topological_order(dg: &DepGraph) -> Result<Vec<u32>, DepGraphError> {
    let n = dg.len();
    let mut indeg: Vec<u32> = (0..n).map(|v| dg.predecessors(v).len() as u32).collect();
    // min-heap by index keeps program order when it is already topological
    let mut ready: BTreeSet<u32> = (0..n as u32).filter(|&v| indeg[v as usize] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &s in dg.successors(v as usize) {
            indeg[s as usize] -= 1;
            if indeg[s as usize] == 0 {
                ready.insert(s);
            }
        }
    }
    if order.len() != n {
        return Err(DepGraphError::Cycle);
    }
    Ok(order)
}

/// Unexecuted nodes whose predecessors have all executed.
pub fn front_layer(dg: &DepGraph, executed: &[bool]) -> Vec<usize> {
    (0..dg.len())
        .filter(|&v| !executed[v] && dg.predecessors(v).iter().all(|&p| executed[p as usize]))
        .collect()
}

/// Incremental execution state: remaining predecessor counts, the front
/// layer and the set of unexecuted nodes in program order.
#[derive(Clone, Debug)]
pub struct Progress {
    remaining: Vec<u32>,
    executed: Vec<bool>,
    front: BTreeSet<u32>,
    unexecuted: BTreeSet<u32>,
}

impl Progress {
    pub fn new(dg: &DepGraph) -> Self {
        let remaining: Vec<u32> = (0..dg.len())
            .map(|v| dg.predecessors(v).len() as u32)
            .collect();
        let front = (0..dg.len() as u32)
            .filter(|&v| remaining[v as usize] == 0)
            .collect();
        Progress {
            remaining,
            executed: vec![false; dg.len()],
            front,
            unexecuted: (0..dg.len() as u32).collect(),
        }
    }

    pub fn front(&self) -> &BTreeSet<u32> {
        &self.front
    }

    pub fn is_done(&self) -> bool {
        self.unexecuted.is_empty()
    }

    pub fn is_executed(&self, v: usize) -> bool {
        self.executed[v]
    }

    pub fn executed(&self) -> &[bool] {
        &self.executed
    }

    /// Unexecuted nodes in program order.
    pub fn unexecuted(&self) -> impl Iterator<Item = usize> + '_ {
        self.unexecuted.iter().map(|&v| v as usize)
    }

    /// Marks a front node executed and promotes successors that become ready.
    pub fn execute(&mut self, dg: &DepGraph, v: usize) {
        assert!(
            self.front.remove(&(v as u32)),
            "node {v} is not in the front layer"
        );
        self.executed[v] = true;
        self.unexecuted.remove(&(v as u32));
        for &s in dg.successors(v) {
            let r = &mut self.remaining[s as usize];
            *r -= 1;
            if *r == 0 {
                self.front.insert(s);
            }
        }
    }
}

/// How non-front gates are admitted to the look-ahead window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowPolicy {
    /// The earliest unexecuted gates in program order.
    #[default]
    TopologicalPrefix,
    /// The earliest unexecuted gates that touch a qubit of the front layer.
    QubitAffinity,
}

/// Front layer plus the look-ahead gates, grouped by dependence distance.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LayeredWindow {
    /// `layers[0]` is the front layer; gates in `layers[l]` sit at dependence
    /// distance `l` from it.
    pub layers: Vec<Vec<usize>>,
    pub size: usize,
}

impl LayeredWindow {
    pub fn front(&self) -> &[usize] {
        self.layers.first().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn gates(&self) -> impl Iterator<Item = usize> + '_ {
        self.layers.iter().flatten().copied()
    }
}

/// Window capacity `c * n_f`.
pub fn window_capacity(c: usize, front_qubits: usize) -> usize {
    c * front_qubits
}

/// Reusable scratch for window construction.
#[derive(Clone, Debug)]
pub struct WindowBuilder {
    layer_of: Vec<u32>,
    touched: Vec<bool>,
}

impl WindowBuilder {
    pub fn new(dg: &DepGraph, num_qubits: usize) -> Self {
        WindowBuilder {
            layer_of: vec![0; dg.len()],
            touched: vec![false; num_qubits],
        }
    }

    /// Builds the window of at most `capacity` gates (never fewer than the
    /// front itself) and assigns each gate the longest-path distance from the
    /// front within the window, counted from 1.
    pub fn build(
        &mut self,
        dg: &DepGraph,
        progress: &Progress,
        capacity: usize,
        policy: WindowPolicy,
    ) -> LayeredWindow {
        let front: Vec<usize> = progress.front().iter().map(|&v| v as usize).collect();
        let mut members: Vec<usize> = Vec::with_capacity(capacity.max(front.len()));
        for &v in &front {
            self.layer_of[v] = 1;
        }
        if policy == WindowPolicy::QubitAffinity {
            for &v in &front {
                for q in dg.qubits(v) {
                    self.touched[q] = true;
                }
            }
        }

        let extra = capacity.saturating_sub(front.len());
        if extra > 0 {
            let scan_limit = 64 * capacity;
            for (scanned, v) in progress.unexecuted().enumerate() {
                if members.len() == extra || scanned >= scan_limit {
                    break;
                }
                if self.layer_of[v] == 1 {
                    continue;
                }
                if policy == WindowPolicy::QubitAffinity
                    && !dg.qubits(v).iter().any(|&q| self.touched[q])
                {
                    continue;
                }
                members.push(v);
            }
        }

        // members ascend in program order, so in-window predecessors come first
        let mut layers: Vec<Vec<usize>> = vec![front.clone()];
        for &v in &members {
            let depth = dg
                .predecessors(v)
                .iter()
                .map(|&p| self.layer_of[p as usize])
                .max()
                .unwrap_or(0)
                .max(1)
                + 1;
            self.layer_of[v] = depth;
            let idx = depth as usize - 1;
            if layers.len() <= idx {
                layers.resize(idx + 1, Vec::new());
            }
            layers[idx].push(v);
        }

        for &v in front.iter().chain(&members) {
            self.layer_of[v] = 0;
        }
        if policy == WindowPolicy::QubitAffinity {
            for &v in &front {
                for q in dg.qubits(v) {
                    self.touched[q] = false;
                }
            }
        }
        layers.retain(|l| !l.is_empty());
        LayeredWindow {
            size: front.len() + members.len(),
            layers,
        }
    }
}

/// One-shot window construction.
pub fn lookahead_window(
    dg: &DepGraph,
    progress: &Progress,
    front_qubits: usize,
    c: usize,
) -> LayeredWindow {
    let num_qubits = (0..dg.len())
        .flat_map(|v| dg.qubits(v))
        .max()
        .map_or(0, |q| q + 1);
    WindowBuilder::new(dg, num_qubits).build(
        dg,
        progress,
        window_capacity(c, front_qubits),
        WindowPolicy::TopologicalPrefix,
    )
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
    fn trace_edges_and_weights() {
        let dg = build_depgraph(&trace());
        let edges: Vec<(usize, usize)> = dg.edges().collect();
        assert_eq!(edges, vec![(0, 1), (1, 3)]);
        assert_eq!(dg.omega(), &[2, 1, 0, 0]);
    }

    #[test]
    fn single_gate_has_no_edges() {
        let mut c = Circuit::new("one", 2);
        c.cx(0, 1);
        let dg = build_depgraph(&c);
        assert_eq!(dg.edge_count(), 0);
        assert_eq!(dg.omega(), &[0]);
    }

    #[test]
    fn chain_weights_closed_form() {
        let n = 37;
        let mut c = Circuit::new("chain", 2);
        for _ in 0..n {
            c.cx(0, 1);
        }
        let dg = build_depgraph(&c);
        for i in 0..n {
            assert_eq!(dg.omega()[i], (n - 1 - i) as u64);
        }
    }

    #[test]
    fn single_qubit_gates_are_not_nodes() {
        let mut c = Circuit::new("t", 3);
        c.push(GateKind::OneQubit, "h", vec![0]);
        c.cx(0, 1);
        c.push(GateKind::Measure, "measure", vec![1]);
        c.cx(1, 2);
        let dg = build_depgraph(&c);
        assert_eq!(dg.len(), 2);
        assert_eq!(dg.gate_id(0), 1);
        assert_eq!(dg.gate_id(1), 3);
        assert_eq!(dg.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn barrier_fences_its_qubits() {
        let mut c = Circuit::new("t", 4);
        c.cx(0, 1);
        c.push(GateKind::Barrier, "barrier", vec![1, 2]);
        c.cx(2, 3);
        c.cx(0, 3);
        let dg = build_depgraph(&c);
        assert_eq!(dg.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(dg.omega(), &[2, 1, 0]);
    }

    #[test]
    fn cycle_is_an_error() {
        let dg = DepGraph::from_edges(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(transitive_weights(&dg), Err(DepGraphError::Cycle));
        assert!(DepGraph::from_edges(2, &[(0, 5)]).is_err());
    }

    #[test]
    fn closure_on_non_program_order_dag() {
        // 3 -> 1 -> 0, 3 -> 2, 2 -> 0
        let dg = DepGraph::from_edges(4, &[(3, 1), (1, 0), (3, 2), (2, 0)]).unwrap();
        assert_eq!(transitive_weights(&dg).unwrap(), vec![0, 1, 1, 3]);
    }

    #[test]
    fn front_layer_of_trace() {
        let dg = build_depgraph(&trace());
        let mut executed = vec![false; 4];
        assert_eq!(front_layer(&dg, &executed), vec![0, 2]);
        executed[0] = true;
        assert_eq!(front_layer(&dg, &executed), vec![1, 2]);
        let empty = build_depgraph(&Circuit::new("e", 2));
        assert!(front_layer(&empty, &[]).is_empty());
    }

    #[test]
    fn progress_tracks_front() {
        let dg = build_depgraph(&trace());
        let mut p = Progress::new(&dg);
        assert_eq!(p.front().iter().copied().collect::<Vec<_>>(), vec![0, 2]);
        p.execute(&dg, 0);
        assert_eq!(p.front().iter().copied().collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(p.unexecuted().collect::<Vec<_>>(), vec![1, 2, 3]);
    }

    #[test]
    fn window_of_three_gate_chain() {
        let mut c = Circuit::new("chain", 4);
        c.cx(0, 3);
        c.cx(3, 1);
        c.cx(1, 2);
        let dg = build_depgraph(&c);
        let p = Progress::new(&dg);
        let w = lookahead_window(&dg, &p, 2, 3);
        assert_eq!(w.size, 3);
        assert_eq!(w.layers, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn window_of_independent_gates_is_one_layer() {
        let mut c = Circuit::new("t", 6);
        c.cx(0, 1);
        c.cx(2, 3);
        c.cx(4, 5);
        let dg = build_depgraph(&c);
        let w = lookahead_window(&dg, &Progress::new(&dg), 6, 3);
        assert_eq!(w.layers, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn window_truncates_at_capacity() {
        let mut c = Circuit::new("chain", 2);
        for _ in 0..100 {
            c.cx(0, 1);
        }
        let dg = build_depgraph(&c);
        let w = lookahead_window(&dg, &Progress::new(&dg), 2, 3);
        assert_eq!(w.size, 6);
        assert_eq!(w.layers.len(), 6);
    }

    #[test]
    fn longest_path_sets_the_layer() {
        // g0(0,1) -> g1(1,2) -> g2(2,3); g3(0,3) depends on g0 and g2
        let mut c = Circuit::new("t", 5);
        c.cx(0, 1);
        c.cx(1, 2);
        c.cx(2, 3);
        c.cx(0, 3);
        let dg = build_depgraph(&c);
        let w = lookahead_window(&dg, &Progress::new(&dg), 2, 10);
        assert_eq!(w.layers, vec![vec![0], vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn affinity_policy_filters_by_front_qubits() {
        let mut c = Circuit::new("t", 6);
        c.cx(0, 1);
        c.cx(0, 1);
        c.cx(2, 3);
        c.cx(3, 4);
        c.cx(1, 5);
        let dg = build_depgraph(&c);
        let mut p = Progress::new(&dg);
        p.execute(&dg, 2);
        let mut wb = WindowBuilder::new(&dg, 6);
        let w = wb.build(&dg, &p, 12, WindowPolicy::QubitAffinity);
        // front = {g0, g3}; g1 and g4 touch front qubits
        assert_eq!(w.layers, vec![vec![0, 3], vec![1], vec![4]]);
    }

    #[test]
    fn dot_dump_mentions_weights() {
        let dot = build_depgraph(&trace()).to_dot();
        assert!(dot.contains("n0 -> n1;"));
        assert!(dot.contains("w=2"));
    }
}
