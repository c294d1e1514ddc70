//! SWAP-based routing loop.
//!
//! Ready two-qubit gates (operands adjacent under the current mapping) are
//! executed eagerly; when none is ready the best-scoring swap on an edge
//! next to the front layer is applied. Everything else (one-qubit gates,
//! measures, barriers) is emitted as soon as it heads the per-qubit gate
//! order of all its operands.

pub mod score;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, CircuitError, GateKind};
use crate::depgraph::{window_capacity, DepGraph, Progress, WindowBuilder, WindowPolicy};
use crate::mapping::{Mapping, NotAPermutation};
use crate::scalar::Score;
use crate::topology::{apsp, CouplingGraph, DistanceMatrix};
use crate::verify::{depth, SwapDepthModel};

pub use score::{candidate_swaps, m_score, DecayKey, ScoreContext, Scorer, Variant, WindowGate};

#[derive(Clone, Debug, PartialEq)]
pub struct RouterConfig<S = f64> {
    /// Window constant `c`; the window holds `c · n_f` gates. Defaults to
    /// one more than the device's maximum degree.
    pub window_constant: Option<usize>,
    pub decay_increment: S,
    pub seed: u64,
    pub variant: Variant,
    /// Use `ω + 1` instead of `ω` as gate weight.
    pub omega_smoothing: bool,
    /// Consecutive swaps without an execution before the oldest front gate is
    /// routed along a shortest path. Defaults to `3 · |Q_phys|`.
    pub stall_limit: Option<usize>,
    pub swap_depth_model: SwapDepthModel,
    pub window_policy: WindowPolicy,
    pub decay_key: DecayKey,
    /// Forward/backward passes for the bidirectional initial mapping. The
    /// `full` variant always runs at least one.
    pub passes: usize,
    pub timeout: Option<Duration>,
}

impl<S: Score> Default for RouterConfig<S> {
    fn default() -> Self {
        RouterConfig {
            window_constant: None,
            decay_increment: S::from_f64(0.001).expect("decay increment representable"),
            seed: 0,
            variant: Variant::default(),
            omega_smoothing: false,
            stall_limit: None,
            swap_depth_model: SwapDepthModel::Unit,
            window_policy: WindowPolicy::default(),
            decay_key: DecayKey::default(),
            passes: 1,
            timeout: None,
        }
    }
}

impl<S: Score> RouterConfig<S> {
    pub fn with_variant(variant: Variant) -> Self {
        RouterConfig {
            variant,
            ..Self::default()
        }
    }

    fn effective_passes(&self) -> usize {
        if self.variant.bidirectional() {
            self.passes.max(1)
        } else {
            0
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum RouteError {
    #[error("circuit uses {logical} qubits but the device has {physical}")]
    TooManyQubits { logical: usize, physical: usize },
    #[error("invalid circuit: {0}")]
    InvalidCircuit(#[from] CircuitError),
    #[error("invalid initial mapping: {0}")]
    BadMapping(#[from] NotAPermutation),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("routing exceeded the {0:?} time limit")]
    Timeout(Duration),
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RouteTimings {
    pub depgraph: Duration,
    pub closure: Duration,
    pub route: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RouteResult {
    /// Original gates plus inserted swaps, on physical qubits.
    pub routed: Circuit,
    pub initial_mapping: Mapping,
    pub final_mapping: Mapping,
    pub swap_count: usize,
    /// Swaps inserted by the stall fallback rather than by the scorer.
    pub forced_swaps: usize,
    pub depth: usize,
    pub timings: RouteTimings,
}

/// A circuit together with its weighted dependence graph.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub circuit: Circuit,
    pub dg: DepGraph,
    pub depgraph_time: Duration,
    pub closure_time: Duration,
}

impl Prepared {
    pub fn new(circuit: Circuit) -> Result<Self, RouteError> {
        circuit.validate()?;
        let t0 = Instant::now();
        let mut dg = DepGraph::unweighted(&circuit);
        let t1 = Instant::now();
        let omega =
            crate::depgraph::transitive_weights(&dg).expect("program-order graph is acyclic");
        dg.set_omega(omega);
        let t2 = Instant::now();
        Ok(Prepared {
            circuit,
            dg,
            depgraph_time: t1 - t0,
            closure_time: t2 - t1,
        })
    }
}

/// A device with its distance matrix, reusable across circuits.
#[derive(Clone, Debug)]
pub struct Router<'g> {
    graph: &'g CouplingGraph,
    dist: DistanceMatrix,
}

impl<'g> Router<'g> {
    pub fn new(graph: &'g CouplingGraph) -> Self {
        Router {
            graph,
            dist: apsp(graph),
        }
    }

    pub fn graph(&self) -> &CouplingGraph {
        self.graph
    }

    pub fn dist(&self) -> &DistanceMatrix {
        &self.dist
    }

    pub fn prepare(&self, circuit: &Circuit) -> Result<Prepared, RouteError> {
        self.check_width(circuit)?;
        Prepared::new(circuit.clone())
    }

    fn check_width(&self, circuit: &Circuit) -> Result<(), RouteError> {
        if circuit.num_qubits > self.graph.num_qubits() {
            return Err(RouteError::TooManyQubits {
                logical: circuit.num_qubits,
                physical: self.graph.num_qubits(),
            });
        }
        Ok(())
    }

    /// Routes from the configured starting layout: identity, or the
    /// bidirectional mapping for the `full` variant.
    pub fn route<S: Score>(
        &self,
        prepared: &Prepared,
        config: &RouterConfig<S>,
    ) -> Result<RouteResult, RouteError> {
        let passes = config.effective_passes();
        let initial = if passes > 0 {
            let reversed = Prepared::new(prepared.circuit.reversed())?;
            self.bidirectional(prepared, &reversed, config, passes)?
        } else {
            Mapping::identity(self.graph.num_qubits())
        };
        self.route_prepared(prepared, initial, config)
    }

    fn bidirectional<S: Score>(
        &self,
        forward: &Prepared,
        backward: &Prepared,
        config: &RouterConfig<S>,
        passes: usize,
    ) -> Result<Mapping, RouteError> {
        let mut mapping = Mapping::identity(self.graph.num_qubits());
        for pass in 0..passes {
            let mut cfg = config.clone();
            cfg.seed = config.seed.wrapping_add(2 * pass as u64 + 1);
            mapping = self.route_prepared(forward, mapping, &cfg)?.final_mapping;
            cfg.seed = config.seed.wrapping_add(2 * pass as u64 + 2);
            mapping = self.route_prepared(backward, mapping, &cfg)?.final_mapping;
        }
        Ok(mapping)
    }

    /// Runs the routing loop from `initial`, which must have device width.
    pub fn route_prepared<S: Score>(
        &self,
        prepared: &Prepared,
        initial: Mapping,
        config: &RouterConfig<S>,
    ) -> Result<RouteResult, RouteError> {
        self.check_width(&prepared.circuit)?;
        let n_phys = self.graph.num_qubits();
        if initial.len() != n_phys {
            return Err(RouteError::BadMapping(NotAPermutation(n_phys)));
        }
        let c = config
            .window_constant
            .unwrap_or(self.graph.max_degree() + 1);
        if config.variant.uses_window() && c <= self.graph.max_degree() {
            return Err(RouteError::InvalidConfig(format!(
                "window constant {c} must exceed the maximum degree {}",
                self.graph.max_degree()
            )));
        }
        let stall_limit = config.stall_limit.unwrap_or(3 * n_phys);
        if stall_limit == 0 {
            return Err(RouteError::InvalidConfig(
                "stall limit must be at least 1".into(),
            ));
        }

        let start = Instant::now();
        let mut run = Run::new(self, prepared, initial.clone(), config, c, stall_limit);
        run.run(start)?;
        let routed = run.routed;
        let result = RouteResult {
            depth: depth(&routed, config.swap_depth_model),
            swap_count: run.swap_count,
            forced_swaps: run.forced_swaps,
            final_mapping: run.mapping,
            initial_mapping: initial,
            routed,
            timings: RouteTimings {
                depgraph: prepared.depgraph_time,
                closure: prepared.closure_time,
                route: start.elapsed(),
            },
        };
        Ok(result)
    }
}

/// Routes `circuit` on `graph` in one call.
pub fn route<S: Score>(
    circuit: &Circuit,
    graph: &CouplingGraph,
    config: &RouterConfig<S>,
) -> Result<RouteResult, RouteError> {
    let router = Router::new(graph);
    let prepared = router.prepare(circuit)?;
    router.route(&prepared, config)
}

/// Forward/backward refinement of the starting layout. `passes = 0` gives
/// the identity.
pub fn bidirectional_initial_mapping<S: Score>(
    circuit: &Circuit,
    graph: &CouplingGraph,
    config: &RouterConfig<S>,
    passes: usize,
) -> Result<Mapping, RouteError> {
    let router = Router::new(graph);
    let forward = router.prepare(circuit)?;
    let backward = router.prepare(&circuit.reversed())?;
    router.bidirectional(&forward, &backward, config, passes)
}

/// Picks the minimum-score swap; ties are broken uniformly with `rng`.
pub fn select_swap<S: Score, R: Rng>(
    scored: &[((usize, usize), S)],
    rng: &mut R,
) -> (usize, usize) {
    let best = scored
        .iter()
        .map(|&(_, s)| s)
        .fold(None, |m: Option<S>, s| match m {
            Some(m) if s < m => Some(s),
            None => Some(s),
            keep => keep,
        })
        .expect("at least one candidate");
    let tied: Vec<(usize, usize)> = scored
        .iter()
        .filter(|&&(_, s)| S::ties(s, best))
        .map(|&(p, _)| p)
        .collect();
    if tied.len() == 1 {
        tied[0]
    } else {
        tied[rng.gen_range(0..tied.len())]
    }
}

const NO_NODE: u32 = u32::MAX;

struct Run<'a, S> {
    graph: &'a CouplingGraph,
    dist: &'a DistanceMatrix,
    circuit: &'a Circuit,
    dg: &'a DepGraph,
    config: &'a RouterConfig<S>,
    c: usize,
    stall_limit: usize,

    mapping: Mapping,
    decay: Vec<S>,
    progress: Progress,
    rng: ChaCha8Rng,
    windows: WindowBuilder,
    scorer: Scorer<S>,

    node_of: Vec<u32>,
    queues: Vec<Vec<usize>>,
    cursor: Vec<usize>,
    emitted: Vec<bool>,
    stack: Vec<usize>,

    routed: Circuit,
    swap_count: usize,
    forced_swaps: usize,
}

impl<'a, S: Score> Run<'a, S> {
    fn new(
        router: &'a Router<'a>,
        prepared: &'a Prepared,
        mapping: Mapping,
        config: &'a RouterConfig<S>,
        c: usize,
        stall_limit: usize,
    ) -> Self {
        let circuit = &prepared.circuit;
        let dg = &prepared.dg;
        let n_phys = router.graph.num_qubits();
        let mut node_of = vec![NO_NODE; circuit.len()];
        for v in 0..dg.len() {
            node_of[dg.gate_id(v)] = v as u32;
        }
        let mut queues = vec![Vec::new(); circuit.num_qubits];
        for g in &circuit.gates {
            for &q in &g.qubits {
                queues[q].push(g.id);
            }
        }
        let mut routed = Circuit::new(circuit.name.clone(), n_phys);
        routed.num_clbits = circuit.num_clbits;
        Run {
            graph: router.graph,
            dist: &router.dist,
            circuit,
            dg,
            config,
            c,
            stall_limit,
            mapping,
            decay: vec![S::one(); n_phys],
            progress: Progress::new(dg),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            windows: WindowBuilder::new(dg, circuit.num_qubits),
            scorer: Scorer::new(n_phys),
            node_of,
            cursor: vec![0; queues.len()],
            queues,
            emitted: vec![false; circuit.len()],
            stack: Vec::new(),
            routed,
            swap_count: 0,
            forced_swaps: 0,
        }
    }

    fn head(&self, q: usize) -> Option<usize> {
        self.queues[q].get(self.cursor[q]).copied()
    }

    fn emit(&mut self, id: usize) {
        let g = &self.circuit.gates[id];
        let phys = g.qubits.iter().map(|&q| self.mapping.phys(q)).collect();
        self.routed
            .push_full(g.kind, g.name.clone(), phys, g.params.clone(), g.clbit);
        self.emitted[id] = true;
        for &q in &g.qubits {
            debug_assert_eq!(self.head(q), Some(id));
            self.cursor[q] += 1;
            self.stack.push(q);
        }
    }

    /// Emits every non-routing gate that heads all of its operand queues.
    fn flush(&mut self) {
        while let Some(q) = self.stack.pop() {
            let Some(id) = self.head(q) else { continue };
            if self.node_of[id] != NO_NODE {
                continue;
            }
            let g = &self.circuit.gates[id];
            if g.qubits.iter().all(|&r| self.head(r) == Some(id)) {
                self.emit(id);
            }
        }
    }

    fn execute(&mut self, v: usize) {
        self.progress.execute(self.dg, v);
        self.emit(self.dg.gate_id(v));
        self.flush();
    }

    fn is_ready(&self, v: usize) -> bool {
        let [a, b] = self.dg.qubits(v);
        self.graph
            .has_edge(self.mapping.phys(a), self.mapping.phys(b))
    }

    fn execute_ready(&mut self) -> bool {
        let mut any = false;
        loop {
            let ready: Vec<usize> = self
                .progress
                .front()
                .iter()
                .map(|&v| v as usize)
                .filter(|&v| self.is_ready(v))
                .collect();
            if ready.is_empty() {
                return any;
            }
            for v in ready {
                self.execute(v);
            }
            any = true;
        }
    }

    fn apply_swap(&mut self, (p1, p2): (usize, usize)) {
        debug_assert!(self.graph.has_edge(p1, p2));
        if self.config.variant.uses_decay() {
            let (k1, k2) = match self.config.decay_key {
                DecayKey::Logical => (self.mapping.logical(p1), self.mapping.logical(p2)),
                DecayKey::Physical => (p1, p2),
            };
            self.decay[k1] = self.decay[k1] + self.config.decay_increment;
            self.decay[k2] = self.decay[k2] + self.config.decay_increment;
        }
        self.mapping.swap_physical(p1, p2);
        debug_assert!(self.mapping.is_bijection());
        self.routed.push(GateKind::Swap, "swap", vec![p1, p2]);
        self.swap_count += 1;
    }

    fn window_layers(&mut self) -> Vec<Vec<WindowGate>> {
        let gate = |dg: &DepGraph, v: usize| WindowGate {
            qubits: dg.qubits(v),
            omega: dg.omega()[v] + u64::from(self.config.omega_smoothing),
        };
        if !self.config.variant.uses_window() {
            return vec![self
                .progress
                .front()
                .iter()
                .map(|&v| gate(self.dg, v as usize))
                .collect()];
        }
        let mut front_qubits: Vec<usize> = self
            .progress
            .front()
            .iter()
            .flat_map(|&v| self.dg.qubits(v as usize))
            .collect();
        front_qubits.sort_unstable();
        front_qubits.dedup();
        let capacity = window_capacity(self.c, front_qubits.len());
        let window =
            self.windows
                .build(self.dg, &self.progress, capacity, self.config.window_policy);
        window
            .layers
            .iter()
            .map(|l| l.iter().map(|&v| gate(self.dg, v)).collect())
            .collect()
    }

    fn best_swap(&mut self) -> (usize, usize) {
        let layers = self.window_layers();
        let graph = self.graph;
        let candidates = candidate_swaps(
            self.progress
                .front()
                .iter()
                .map(|&v| self.dg.qubits(v as usize)),
            &self.mapping,
            |p| graph.neighbors(p).to_vec(),
        );
        let ctx = ScoreContext {
            layers: &layers,
            mapping: &self.mapping,
            dist: self.dist,
            decay: &self.decay,
            decay_key: self.config.decay_key,
            variant: self.config.variant,
        };
        self.scorer.load(&ctx);
        let scored: Vec<((usize, usize), S)> = candidates
            .into_iter()
            .map(|s| (s, self.scorer.score(s, &ctx)))
            .collect();
        select_swap(&scored, &mut self.rng)
    }

    /// One step of `v`'s first operand toward its second along a shortest
    /// path, moving to the lowest-index closer neighbor.
    fn forced_step(&self, v: usize) -> (usize, usize) {
        let [a, b] = self.dg.qubits(v);
        let (pa, pb) = (self.mapping.phys(a), self.mapping.phys(b));
        let here = self.dist.get(pa, pb);
        let next = self
            .graph
            .neighbors(pa)
            .iter()
            .copied()
            .find(|&n| self.dist.get(n, pb) < here)
            .expect("connected graph has a closer neighbor");
        (pa.min(next), pa.max(next))
    }

    fn run(&mut self, start: Instant) -> Result<(), RouteError> {
        self.stack.extend(0..self.circuit.num_qubits);
        self.flush();
        let mut stall = 0usize;
        let mut forced: Option<usize> = None;
        let mut iterations = 0u64;
        while !self.progress.is_done() {
            if self.execute_ready() {
                self.decay.iter_mut().for_each(|d| *d = S::one());
                stall = 0;
                if forced.is_some_and(|v| self.progress.is_executed(v)) {
                    forced = None;
                }
                if self.progress.is_done() {
                    break;
                }
            }
            iterations += 1;
            if let Some(limit) = self.config.timeout {
                if iterations.is_multiple_of(256) && start.elapsed() > limit {
                    return Err(RouteError::Timeout(limit));
                }
            }
            if forced.is_none() && stall >= self.stall_limit {
                forced = self.progress.front().first().map(|&v| v as usize);
            }
            let swap = match forced {
                Some(v) => {
                    self.forced_swaps += 1;
                    self.forced_step(v)
                }
                None => self.best_swap(),
            };
            self.apply_swap(swap);
            stall += 1;
        }
        self.stack.extend(0..self.circuit.num_qubits);
        self.flush();
        assert!(
            self.emitted.iter().all(|&e| e),
            "every gate is emitted once routing finishes"
        );
        Ok(())
    }
}
