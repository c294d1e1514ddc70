//! Swap cost.
//!
//! For a candidate swap `s` hosting logicals `q1`, `q2`:
//!
//! ```text
//! M(s) = max(δ[q1], δ[q2]) · Σ_ℓ  1/(ℓ·|G_ℓ|) · Σ_{g ∈ G_ℓ} ω_g · D[φ_s(g.a)][φ_s(g.b)]
//! ```
//!
//! where `φ_s` is the mapping after the swap. The distance-only baseline
//! keeps just the front layer with unit weights, no normalization and no
//! decay.

use serde::{Deserialize, Serialize};

use crate::mapping::Mapping;
use crate::scalar::{self, Score};
use crate::topology::DistanceMatrix;

/// Cumulative ablation ladder of the cost function.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    DistanceOnly,
    LayerAdjusted,
    DependencyWeighted,
    /// Dependency-weighted cost plus a bidirectional initial mapping.
    #[default]
    Full,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::DistanceOnly,
        Variant::LayerAdjusted,
        Variant::DependencyWeighted,
        Variant::Full,
    ];

    pub fn uses_window(self) -> bool {
        self != Variant::DistanceOnly
    }

    pub fn uses_decay(self) -> bool {
        self != Variant::DistanceOnly
    }

    pub fn uses_omega(self) -> bool {
        matches!(self, Variant::DependencyWeighted | Variant::Full)
    }

    pub fn bidirectional(self) -> bool {
        self == Variant::Full
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::DistanceOnly => "distance_only",
            Variant::LayerAdjusted => "layer_adjusted",
            Variant::DependencyWeighted => "dependency_weighted",
            Variant::Full => "full",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.replace('-', "_");
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == norm)
            .ok_or_else(|| {
                format!("unknown variant '{s}' (distance_only, layer_adjusted, dependency_weighted, full)")
            })
    }
}

/// Which identity the decay vector is indexed by.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayKey {
    #[default]
    Logical,
    Physical,
}

/// A window gate as seen by the scorer: logical operands and raw weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowGate {
    pub qubits: [usize; 2],
    pub omega: u64,
}

/// Everything `M(s)` reads. `layers[0]` is the front layer.
#[derive(Clone, Copy, Debug)]
pub struct ScoreContext<'a, S> {
    pub layers: &'a [Vec<WindowGate>],
    pub mapping: &'a Mapping,
    pub dist: &'a DistanceMatrix,
    pub decay: &'a [S],
    pub decay_key: DecayKey,
    pub variant: Variant,
}

impl<S: Score> ScoreContext<'_, S> {
    fn weight(&self, g: &WindowGate) -> u64 {
        if self.variant.uses_omega() {
            g.omega
        } else {
            1
        }
    }

    fn scored_layers(&self) -> usize {
        if self.variant.uses_window() {
            self.layers.len()
        } else {
            self.layers.len().min(1)
        }
    }

    fn layer_coef(&self, li: usize) -> S {
        if self.variant.uses_window() {
            S::one() / S::from_count(((li + 1) * self.layers[li].len()) as u64)
        } else {
            S::one()
        }
    }

    pub fn decay_factor(&self, (p1, p2): (usize, usize)) -> S {
        if !self.variant.uses_decay() {
            return S::one();
        }
        let (k1, k2) = match self.decay_key {
            DecayKey::Logical => (self.mapping.logical(p1), self.mapping.logical(p2)),
            DecayKey::Physical => (p1, p2),
        };
        scalar::max(self.decay[k1], self.decay[k2])
    }
}

/// Direct evaluation of the cost of `swap`, without committing it.
pub fn m_score<S: Score>(swap: (usize, usize), ctx: &ScoreContext<'_, S>) -> S {
    let (p1, p2) = swap;
    let (q1, q2) = (ctx.mapping.logical(p1), ctx.mapping.logical(p2));
    let pos = |q: usize| {
        if q == q1 {
            p2
        } else if q == q2 {
            p1
        } else {
            ctx.mapping.phys(q)
        }
    };
    let mut total = S::zero();
    for li in 0..ctx.scored_layers() {
        let layer = &ctx.layers[li];
        if layer.is_empty() {
            continue;
        }
        let sum: u64 = layer
            .iter()
            .map(|g| ctx.weight(g) * u64::from(ctx.dist.get(pos(g.qubits[0]), pos(g.qubits[1]))))
            .sum();
        total = total + ctx.layer_coef(li) * S::from_count(sum);
    }
    ctx.decay_factor(swap) * total
}

/// Candidate swaps: every coupling edge incident to a physical qubit that
/// hosts an operand of a front gate, as sorted unordered pairs.
pub fn candidate_swaps(
    front: impl IntoIterator<Item = [usize; 2]>,
    mapping: &Mapping,
    neighbors: impl Fn(usize) -> Vec<usize>,
) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for qs in front {
        for q in qs {
            let p1 = mapping.phys(q);
            for p2 in neighbors(p1) {
                out.push((p1.min(p2), p1.max(p2)));
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Incremental evaluator: per-layer integer sums under the current mapping,
/// then per candidate only the window gates touching the two swapped
/// logicals are re-evaluated.
#[derive(Clone, Debug)]
pub struct Scorer<S> {
    gates: Vec<(u32, [usize; 2], u64)>,
    coef: Vec<S>,
    base_total: S,
    touch: Vec<Vec<u32>>,
    touched: Vec<usize>,
    delta: Vec<i64>,
    dirty: Vec<usize>,
}

impl<S: Score> Scorer<S> {
    pub fn new(width: usize) -> Self {
        Scorer {
            gates: Vec::new(),
            coef: Vec::new(),
            base_total: S::zero(),
            touch: vec![Vec::new(); width],
            touched: Vec::new(),
            delta: Vec::new(),
            dirty: Vec::new(),
        }
    }

    pub fn load(&mut self, ctx: &ScoreContext<'_, S>) {
        for &q in &self.touched {
            self.touch[q].clear();
        }
        self.touched.clear();
        self.gates.clear();
        self.coef.clear();

        let nl = ctx.scored_layers();
        let mut base = vec![0u64; nl];
        for (li, layer) in ctx.layers[..nl].iter().enumerate() {
            self.coef.push(if layer.is_empty() {
                S::zero()
            } else {
                ctx.layer_coef(li)
            });
            for g in layer {
                let w = ctx.weight(g);
                let [a, b] = g.qubits;
                base[li] += w * u64::from(ctx.dist.get(ctx.mapping.phys(a), ctx.mapping.phys(b)));
                let i = self.gates.len() as u32;
                self.gates.push((li as u32, g.qubits, w));
                for q in [a, b] {
                    if self.touch[q].is_empty() {
                        self.touched.push(q);
                    }
                    self.touch[q].push(i);
                }
            }
        }
        self.base_total = base
            .iter()
            .zip(&self.coef)
            .fold(S::zero(), |acc, (&s, &c)| acc + c * S::from_count(s));
        self.delta.clear();
        self.delta.resize(nl, 0);
    }

    /// Same value as [`m_score`] for the loaded context.
    pub fn score(&mut self, swap: (usize, usize), ctx: &ScoreContext<'_, S>) -> S {
        let (p1, p2) = swap;
        let (q1, q2) = (ctx.mapping.logical(p1), ctx.mapping.logical(p2));
        let pos = |q: usize| {
            if q == q1 {
                p2
            } else if q == q2 {
                p1
            } else {
                ctx.mapping.phys(q)
            }
        };
        let visit = |i: u32, this: &mut Self| {
            let (li, [a, b], w) = this.gates[i as usize];
            let old = ctx.dist.get(ctx.mapping.phys(a), ctx.mapping.phys(b));
            let new = ctx.dist.get(pos(a), pos(b));
            if old != new {
                let li = li as usize;
                this.dirty.push(li);
                this.delta[li] += w as i64 * (i64::from(new) - i64::from(old));
            }
        };
        for k in 0..self.touch.get(q1).map_or(0, Vec::len) {
            let i = self.touch[q1][k];
            visit(i, self);
        }
        for k in 0..self.touch.get(q2).map_or(0, Vec::len) {
            let i = self.touch[q2][k];
            let [a, b] = self.gates[i as usize].1;
            if a != q1 && b != q1 {
                visit(i, self);
            }
        }

        let mut total = self.base_total;
        self.dirty.sort_unstable();
        self.dirty.dedup();
        for &li in &self.dirty {
            let d = self.delta[li];
            if d != 0 {
                total = total + self.coef[li] * S::from_i64(d).expect("delta representable");
            }
            self.delta[li] = 0;
        }
        self.dirty.clear();
        ctx.decay_factor(swap) * total
    }
}
