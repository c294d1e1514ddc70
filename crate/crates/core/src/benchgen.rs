//! Circuits with a known optimal depth on a given device.
//!
//! Each of the `T` cycles is a set of operand-disjoint gates, so the circuit
//! has depth at most `T`. A witness chain (one two-qubit gate per cycle,
//! each sharing a qubit with the previous one) makes it exactly `T`. Since
//! every two-qubit gate sits on a coupling edge, the unscrambled circuit
//! needs no swaps under the identity layout, so `T` is optimal. The
//! published circuit has its qubits relabeled by a random permutation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateKind};
use crate::topology::CouplingGraph;

const ONE_QUBIT_GATES: [&str; 6] = ["h", "x", "y", "z", "s", "t"];

/// Expected gates per qubit and cycle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Densities {
    pub p1q: f64,
    pub p2q: f64,
}

impl Default for Densities {
    fn default() -> Self {
        Densities { p1q: 0.1, p2q: 0.5 }
    }
}

#[derive(Clone, Debug)]
pub struct BenchSpec<'g> {
    pub graph: &'g CouplingGraph,
    pub target_depth: usize,
    pub densities: Densities,
    pub seed: u64,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum BenchError {
    #[error("target depth must be at least 1")]
    ZeroDepth,
    #[error("device needs at least one coupling edge")]
    NoEdges,
    #[error("densities must satisfy 0 <= p1q <= 1 and 0 <= p2q <= 1 (got {0:?})")]
    BadDensities(Densities),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generated {
    /// Relabeled circuit, the benchmark input.
    pub circuit: Circuit,
    /// Same gates on physical qubits; routable with zero swaps.
    pub unscrambled: Circuit,
    pub optimal_depth: usize,
    /// `scramble[p]` is the label physical qubit `p` carries in `circuit`.
    pub scramble: Vec<usize>,
}

pub fn generate(spec: &BenchSpec<'_>, name: &str) -> Result<Generated, BenchError> {
    let d = spec.densities;
    if !(0.0..=1.0).contains(&d.p1q) || !(0.0..=1.0).contains(&d.p2q) {
        return Err(BenchError::BadDensities(d));
    }
    if spec.target_depth == 0 {
        return Err(BenchError::ZeroDepth);
    }
    let g = spec.graph;
    if g.edges().is_empty() {
        return Err(BenchError::NoEdges);
    }
    let n = g.num_qubits();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pairs_per_cycle = ((d.p2q * n as f64 / 2.0).round() as usize).max(1);

    let mut c = Circuit::new(name, n);
    let mut busy = vec![false; n];
    let mut edges = g.edges().to_vec();
    let mut chain = rng.gen_range(0..n);
    for _ in 0..spec.target_depth {
        busy.iter_mut().for_each(|b| *b = false);

        let nbrs = g.neighbors(chain);
        let other = nbrs[rng.gen_range(0..nbrs.len())];
        c.cx(chain, other);
        busy[chain] = true;
        busy[other] = true;
        let mut placed = 1;
        chain = if rng.gen_bool(0.5) { chain } else { other };

        edges.shuffle(&mut rng);
        for &(a, b) in &edges {
            if placed >= pairs_per_cycle {
                break;
            }
            if !busy[a] && !busy[b] {
                let (a, b) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
                c.cx(a, b);
                busy[a] = true;
                busy[b] = true;
                placed += 1;
            }
        }

        for (q, &taken) in busy.iter().enumerate() {
            if !taken && rng.gen_bool(d.p1q) {
                let gate = ONE_QUBIT_GATES[rng.gen_range(0..ONE_QUBIT_GATES.len())];
                c.push(GateKind::OneQubit, gate, vec![q]);
            }
        }
    }

    let mut scramble: Vec<usize> = (0..n).collect();
    scramble.shuffle(&mut rng);
    let mut scrambled = c.clone();
    for gate in &mut scrambled.gates {
        for q in &mut gate.qubits {
            *q = scramble[*q];
        }
    }
    Ok(Generated {
        circuit: scrambled,
        unscrambled: c,
        optimal_depth: spec.target_depth,
        scramble,
    })
}

/// Suite entry; `name` encodes width, depth and index.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteEntry {
    pub name: String,
    pub seed: u64,
    pub generated: Generated,
}

pub fn suite_name(qubits: usize, depth: usize, index: usize) -> String {
    format!("queko_{qubits}q_d{depth}_i{index}")
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn make_suite(
    graph: &CouplingGraph,
    depths: &[usize],
    per_depth: usize,
    seed: u64,
    densities: Densities,
) -> Result<Vec<SuiteEntry>, BenchError> {
    let mut out = Vec::with_capacity(depths.len() * per_depth);
    for &depth in depths {
        for index in 0..per_depth {
            let name = suite_name(graph.num_qubits(), depth, index);
            let s = splitmix64(seed ^ splitmix64(((depth as u64) << 32) | index as u64));
            let spec = BenchSpec {
                graph,
                target_depth: depth,
                densities,
                seed: s,
            };
            out.push(SuiteEntry {
                generated: generate(&spec, &name)?,
                name,
                seed: s,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub file: String,
    pub qubits: usize,
    pub optimal_depth: usize,
    pub seed: u64,
    pub densities: Densities,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub graph: String,
    pub seed: u64,
    pub circuits: Vec<ManifestEntry>,
}

pub fn manifest(
    graph: &CouplingGraph,
    seed: u64,
    densities: Densities,
    suite: &[SuiteEntry],
) -> Manifest {
    Manifest {
        graph: graph.name().to_string(),
        seed,
        circuits: suite
            .iter()
            .map(|e| ManifestEntry {
                name: e.name.clone(),
                file: format!("{}.qasm", e.name),
                qubits: e.generated.circuit.num_qubits,
                optimal_depth: e.generated.optimal_depth,
                seed: e.seed,
                densities,
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::gen_grid8;
    use crate::verify::{depth, SwapDepthModel};

    #[test]
    fn depth_is_exactly_the_target() {
        let g = gen_grid8(9, 9).unwrap();
        for t in [1, 7, 100] {
            let spec = BenchSpec {
                graph: &g,
                target_depth: t,
                densities: Densities::default(),
                seed: t as u64,
            };
            let out = generate(&spec, "x").unwrap();
            assert_eq!(depth(&out.unscrambled, SwapDepthModel::Unit), t);
            assert_eq!(depth(&out.circuit, SwapDepthModel::Unit), t);
            for gate in out.unscrambled.gates.iter().filter(|g| g.is_two_qubit()) {
                assert!(g.has_edge(gate.qubits[0], gate.qubits[1]));
            }
        }
    }

    #[test]
    fn suites_are_deterministic() {
        let g = gen_grid8(3, 3).unwrap();
        let a = make_suite(&g, &[5, 10], 3, 42, Densities::default()).unwrap();
        let b = make_suite(&g, &[5, 10], 3, 42, Densities::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);
        assert_eq!(a[4].name, "queko_9q_d10_i1");
        assert!(make_suite(&g, &[5], 0, 1, Densities::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn rejects_bad_specs() {
        let g = gen_grid8(2, 2).unwrap();
        let mut spec = BenchSpec {
            graph: &g,
            target_depth: 0,
            densities: Densities::default(),
            seed: 0,
        };
        assert_eq!(generate(&spec, "x"), Err(BenchError::ZeroDepth));
        spec.target_depth = 3;
        spec.densities.p2q = 1.5;
        assert!(matches!(
            generate(&spec, "x"),
            Err(BenchError::BadDensities(_))
        ));
    }
}
