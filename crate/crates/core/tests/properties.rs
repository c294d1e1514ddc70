#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;
use qroute::depgraph::{build_depgraph, transitive_weights, DepGraph};
use qroute::lift::{expand, lift};
use qroute::qasm::{emit_qasm, parse_qasm};
use qroute::router::{m_score, DecayKey, ScoreContext, Scorer, WindowGate};
use qroute::scalar::Exact;
use qroute::topology::{apsp, gen_grid8, gen_line};
use qroute::verify::{depth, verify_routed, SwapDepthModel};
use qroute::{route, Circuit, CouplingGraph, GateKind, Mapping, RouterConfig, Variant};

fn circuit_strategy(max_qubits: usize, max_gates: usize) -> impl Strategy<Value = Circuit> {
    (2..=max_qubits).prop_flat_map(move |n| {
        prop::collection::vec((0u8..10, 0..n, 0..n), 0..max_gates).prop_map(move |ops| {
            let mut c = Circuit::new("p", n);
            c.num_clbits = n;
            for (k, a, b) in ops {
                match k {
                    0 => {
                        c.push(GateKind::OneQubit, "h", vec![a]);
                    }
                    1 => {
                        c.push_full(GateKind::OneQubit, "rz", vec![a], vec![0.25], None);
                    }
                    2 if a != b => {
                        c.push(GateKind::Barrier, "barrier", vec![a, b]);
                    }
                    3 => {
                        c.push_full(GateKind::Measure, "measure", vec![a], vec![], Some(b % n));
                    }
                    4 if a != b => {
                        c.push(GateKind::Swap, "swap", vec![a, b]);
                    }
                    _ if a != b => {
                        c.cx(a, b);
                    }
                    _ => {}
                }
            }
            c
        })
    })
}

/// Reachability counts by DFS from every node.
fn dfs_weights(dg: &DepGraph) -> Vec<u64> {
    let n = dg.len();
    (0..n)
        .map(|s| {
            let mut seen = vec![false; n];
            let mut stack = vec![s];
            let mut count = 0;
            while let Some(v) = stack.pop() {
                for &w in dg.successors(v) {
                    let w = w as usize;
                    if !seen[w] {
                        seen[w] = true;
                        count += 1;
                        stack.push(w);
                    }
                }
            }
            count
        })
        .collect()
}

/// Reachability under "a earlier gate shares a qubit", ignoring barriers.
fn shared_qubit_closure(c: &Circuit) -> Vec<Vec<bool>> {
    let twoq: Vec<&qroute::Gate> = c.gates.iter().filter(|g| g.is_two_qubit()).collect();
    let n = twoq.len();
    let mut r = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            if twoq[i].qubits.iter().any(|q| twoq[j].qubits.contains(q)) {
                r[i][j] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

fn floyd_warshall(g: &CouplingGraph) -> Vec<Vec<u32>> {
    let n = g.num_qubits();
    let inf = u32::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for i in 0..n {
        d[i][i] = 0;
    }
    for &(a, b) in g.edges() {
        d[a][b] = 1;
        d[b][a] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

fn random_connected_graph() -> impl Strategy<Value = CouplingGraph> {
    (2usize..24).prop_flat_map(|n| {
        (
            prop::collection::vec(any::<prop::sample::Index>(), n - 1),
            prop::collection::vec((0..n, 0..n), 0..2 * n),
        )
            .prop_map(move |(parents, extra)| {
                // random spanning tree plus extra edges
                let mut edges: Vec<(usize, usize)> =
                    (1..n).map(|v| (parents[v - 1].index(v), v)).collect();
                for (a, b) in extra {
                    if a != b {
                        edges.push((a.min(b), a.max(b)));
                    }
                }
                edges.sort_unstable();
                edges.dedup();
                CouplingGraph::new("random", n, edges).unwrap()
            })
    })
}

fn device(kind: u8, n: usize) -> CouplingGraph {
    match kind % 3 {
        0 => gen_line(n).unwrap(),
        1 => {
            let side = (1..).find(|s| s * s >= n).unwrap().max(2);
            gen_grid8(side, side).unwrap()
        }
        _ => CouplingGraph::sherbrooke(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn weights_match_dfs(c in circuit_strategy(12, 80)) {
        let dg = build_depgraph(&c);
        let oracle = dfs_weights(&dg);
        prop_assert_eq!(dg.omega(), oracle.as_slice());
        prop_assert_eq!(transitive_weights(&dg).unwrap(), dfs_weights(&dg));
    }

    #[test]
    fn depgraph_reachability_matches_shared_qubits(c in circuit_strategy(10, 60)) {
        let plain = Circuit {
            gates: c.gates.iter().filter(|g| g.kind != GateKind::Barrier).cloned().collect(),
            ..c.clone()
        };
        let plain = Circuit { gates: plain.gates.into_iter().enumerate().map(|(i, g)| qroute::Gate { id: i, ..g }).collect(), ..plain };
        let dg = build_depgraph(&plain);
        let r = shared_qubit_closure(&plain);
        for (i, row) in r.iter().enumerate() {
            prop_assert_eq!(dg.omega()[i], row.iter().filter(|&&x| x).count() as u64);
        }
        for (a, b) in dg.edges() {
            prop_assert!(a < b && r[a][b]);
        }
    }

    #[test]
    fn bfs_matches_floyd_warshall(g in random_connected_graph()) {
        let d = apsp(&g);
        let fw = floyd_warshall(&g);
        for (i, row) in fw.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                prop_assert_eq!(d.get(i, j), x);
            }
        }
    }

    #[test]
    fn lift_round_trips(c in circuit_strategy(10, 60)) {
        let back = expand(&lift(&c)).unwrap();
        prop_assert!(back.structurally_eq(&c));
    }

    #[test]
    fn qasm_round_trips(c in circuit_strategy(10, 60)) {
        let text = emit_qasm(&c, "");
        let back = parse_qasm(&text).unwrap();
        prop_assert_eq!(emit_qasm(&back, ""), text);
    }

    #[test]
    fn routing_is_sound(
        c in circuit_strategy(16, 60),
        kind in 0u8..3,
        variant in 0usize..4,
        seed in any::<u64>(),
    ) {
        let g = device(kind, c.num_qubits);
        let cfg = RouterConfig::<f64> { seed, ..RouterConfig::with_variant(Variant::ALL[variant]) };
        let r = route(&c, &g, &cfg).unwrap();
        let rep = verify_routed(&c, &r.routed, &r.initial_mapping, &g);
        prop_assert!(rep.ok, "{:?}", rep.violations);
        prop_assert!(r.final_mapping.is_bijection());
        for gate in r.routed.gates.iter().filter(|g| g.is_two_qubit()) {
            prop_assert!(g.has_edge(gate.qubits[0], gate.qubits[1]));
        }
        prop_assert_eq!(
            r.swap_count,
            r.routed.gates.iter().filter(|g| g.kind == GateKind::Swap).count()
                - c.gates.iter().filter(|g| g.kind == GateKind::Swap).count()
        );
        let again = route(&c, &g, &cfg).unwrap();
        prop_assert_eq!(&r.routed, &again.routed);
        prop_assert_eq!(&r.initial_mapping, &again.initial_mapping);
    }

    #[test]
    fn depth_bounds_and_commutation(c in circuit_strategy(10, 60), at in any::<prop::sample::Index>()) {
        let d = depth(&c, SwapDepthModel::Unit);
        for q in 0..c.num_qubits {
            let touching = c.gates.iter().filter(|g| g.kind != GateKind::Barrier && g.qubits.contains(&q)).count();
            prop_assert!(d >= touching);
        }
        if c.gates.len() >= 2 {
            let i = at.index(c.gates.len() - 1);
            let (a, b) = (&c.gates[i], &c.gates[i + 1]);
            if !a.qubits.iter().any(|q| b.qubits.contains(q)) {
                let mut swapped = c.clone();
                swapped.gates.swap(i, i + 1);
                prop_assert_eq!(depth(&swapped, SwapDepthModel::Unit), d);
            }
        }
    }

    #[test]
    fn incremental_scores_are_exact(
        layers in prop::collection::vec(prop::collection::vec((0usize..9, 0usize..9, 0u64..20), 1..5), 1..5),
        perm_seed in any::<u64>(),
        decay in prop::collection::vec(0u32..5, 9),
        variant in 0usize..4,
    ) {
        let g = gen_grid8(3, 3).unwrap();
        let dist = apsp(&g);
        let layers: Vec<Vec<WindowGate>> = layers
            .into_iter()
            .map(|l| l.into_iter().filter(|(a, b, _)| a != b).map(|(a, b, w)| WindowGate { qubits: [a, b], omega: w }).collect())
            .collect();
        let mut log2phys: Vec<usize> = (0..9).collect();
        let mut s = perm_seed;
        for i in (1..9).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            log2phys.swap(i, (s >> 33) as usize % (i + 1));
        }
        let mapping = Mapping::from_log2phys(log2phys).unwrap();
        let decay: Vec<Exact> = decay.into_iter().map(|k| Exact::new(1000 + k as i128, 1000)).collect();
        let ctx = ScoreContext {
            layers: &layers,
            mapping: &mapping,
            dist: &dist,
            decay: &decay,
            decay_key: DecayKey::Logical,
            variant: Variant::ALL[variant],
        };
        let mut scorer = Scorer::new(9);
        scorer.load(&ctx);
        for &(a, b) in g.edges() {
            prop_assert_eq!(scorer.score((a, b), &ctx), m_score((a, b), &ctx));
        }

        // uniform scaling of D keeps the argmin set
        let scaled = dist.scaled(3);
        let ctx3 = ScoreContext { dist: &scaled, ..ctx };
        let argmin = |c: &ScoreContext<'_, Exact>| {
            let scores: Vec<Exact> = g.edges().iter().map(|&e| m_score(e, c)).collect();
            let best = scores.iter().min().copied().unwrap();
            scores.iter().map(|&s| s == best).collect::<Vec<_>>()
        };
        prop_assert_eq!(argmin(&ctx), argmin(&ctx3));
        for &e in g.edges() {
            prop_assert_eq!(m_score(e, &ctx3), m_score(e, &ctx) * Exact::from_integer(3));
        }
    }
}

#[test]
fn generated_circuits_route_without_swaps() {
    use qroute::benchgen::{generate, BenchSpec, Densities};
    let g = gen_grid8(9, 9).unwrap();
    for (t, seed) in [(1, 1), (20, 2), (100, 3)] {
        let spec = BenchSpec {
            graph: &g,
            target_depth: t,
            densities: Densities::default(),
            seed,
        };
        let out = generate(&spec, "g").unwrap();
        let cfg = RouterConfig::<f64>::with_variant(Variant::DependencyWeighted);
        let r = route(&out.unscrambled, &g, &cfg).unwrap();
        assert_eq!(r.swap_count, 0);
        assert_eq!(r.depth, t);
        let mut seen = out.scramble.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..81).collect::<Vec<_>>());
        let scrambled = route(&out.circuit, &g, &cfg).unwrap();
        assert!(scrambled.depth >= t);
    }
}
