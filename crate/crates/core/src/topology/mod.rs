//! Physical coupling graphs and their SWAP-distance matrices.

mod distance;

use std::collections::{BTreeSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use distance::{apsp, DistanceMatrix};

const SHERBROOKE_JSON: &str = include_str!("../../data/sherbrooke_127.json");
const ANKAA3_JSON: &str = include_str!("../../data/ankaa3_82.json");

#[derive(Debug, thiserror::Error)]
pub enum TopologyError {
    #[error("coupling graph is disconnected")]
    Disconnected,
    #[error("edge ({0}, {1}) references a qubit outside 0..{2}")]
    OutOfRange(usize, usize, usize),
    #[error("self-loop on qubit {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("graph must have at least one qubit")]
    Empty,
    #[error("invalid bridge endpoint: {0}")]
    InvalidBridge(String),
    #[error("unknown builtin topology '{0}'")]
    UnknownBuiltin(String),
    #[error("reading coupling file: {0}")]
    Io(#[from] std::io::Error),
    #[error("coupling JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Undirected, connected coupling graph over physical qubits `0..num_qubits`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CouplingGraph {
    name: String,
    num_qubits: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct CouplingFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    num_qubits: usize,
    edges: Vec<[usize; 2]>,
}

impl CouplingGraph {
    /// Validates and builds a graph. Edges are normalized to `(min, max)`.
    pub fn new(
        name: impl Into<String>,
        num_qubits: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, TopologyError> {
        if num_qubits == 0 {
            return Err(TopologyError::Empty);
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= num_qubits || b >= num_qubits {
                return Err(TopologyError::OutOfRange(a, b, num_qubits));
            }
            if a == b {
                return Err(TopologyError::SelfLoop(a));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(TopologyError::DuplicateEdge(a, b));
            }
        }
        let mut adjacency = vec![Vec::new(); num_qubits];
        for &(a, b) in &set {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        let g = CouplingGraph {
            name: name.into(),
            num_qubits,
            edges: set.into_iter().collect(),
            adjacency,
        };
        if !g.is_connected() {
            return Err(TopologyError::Disconnected);
        }
        Ok(g)
    }

    pub fn from_json(text: &str) -> Result<Self, TopologyError> {
        let f: CouplingFile = serde_json::from_str(text)?;
        CouplingGraph::new(
            f.name.unwrap_or_else(|| "custom".into()),
            f.num_qubits,
            f.edges.into_iter().map(|[a, b]| (a, b)),
        )
    }

    pub fn load(path: &Path) -> Result<Self, TopologyError> {
        let text = std::fs::read_to_string(path)?;
        let mut g = Self::from_json(&text)?;
        if g.name == "custom" {
            if let Some(stem) = path.file_stem() {
                g.name = stem.to_string_lossy().into_owned();
            }
        }
        Ok(g)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&CouplingFile {
            name: Some(self.name.clone()),
            num_qubits: self.num_qubits,
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        })
        .expect("coupling graph serializes")
    }

    /// 127-qubit heavy-hex device (at most three neighbours per qubit).
    pub fn sherbrooke() -> Self {
        Self::from_json(SHERBROOKE_JSON).expect("shipped topology is valid")
    }

    /// 82-qubit square-lattice device (at most four neighbours per qubit).
    pub fn ankaa3() -> Self {
        Self::from_json(ANKAA3_JSON).expect("shipped topology is valid")
    }

    /// Two Sherbrooke copies joined through two bridge qubits (256 qubits).
    pub fn sherbrooke_2x() -> Self {
        let mut g = gen_concat2x(&Self::sherbrooke(), None).expect("default bridges are valid");
        g.name = "sherbrooke2x".into();
        g
    }

    /// Resolves builtin names: `sherbrooke`, `ankaa3`, `sherbrooke2x`,
    /// `line:N`, `grid8:RxC`.
    pub fn builtin(spec: &str) -> Result<Self, TopologyError> {
        let bad = || TopologyError::UnknownBuiltin(spec.to_string());
        match spec {
            "sherbrooke" => return Ok(Self::sherbrooke()),
            "ankaa3" => return Ok(Self::ankaa3()),
            "sherbrooke2x" => return Ok(Self::sherbrooke_2x()),
            _ => {}
        }
        if let Some(n) = spec.strip_prefix("line:") {
            return gen_line(n.parse().map_err(|_| bad())?);
        }
        if let Some(dims) = spec.strip_prefix("grid8:") {
            let (r, c) = dims.split_once('x').ok_or_else(bad)?;
            return gen_grid8(r.parse().map_err(|_| bad())?, c.parse().map_err(|_| bad())?);
        }
        Err(bad())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted neighbours of `p`.
    pub fn neighbors(&self, p: usize) -> &[usize] {
        &self.adjacency[p]
    }

    pub fn degree(&self, p: usize) -> usize {
        self.adjacency[p].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.num_qubits && self.adjacency[a].binary_search(&b).is_ok()
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.num_qubits];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(p) = queue.pop_front() {
            for &n in &self.adjacency[p] {
                if !seen[n] {
                    seen[n] = true;
                    count += 1;
                    queue.push_back(n);
                }
            }
        }
        count == self.num_qubits
    }
}

pub fn gen_line(n: usize) -> Result<CouplingGraph, TopologyError> {
    CouplingGraph::new(format!("line{n}"), n, (1..n).map(|i| (i - 1, i)))
}

/// `rows x cols` grid where each cell couples to its eight nearest
/// neighbours (orthogonal and diagonal). Qubit `r * cols + c` sits at `(r, c)`.
pub fn gen_grid8(rows: usize, cols: usize) -> Result<CouplingGraph, TopologyError> {
    if rows == 0 || cols == 0 {
        return Err(TopologyError::Empty);
    }
    let at = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((at(r, c), at(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((at(r, c), at(r + 1, c)));
                if c + 1 < cols {
                    edges.push((at(r, c), at(r + 1, c + 1)));
                }
                if c > 0 {
                    edges.push((at(r, c), at(r + 1, c - 1)));
                }
            }
        }
    }
    CouplingGraph::new(format!("grid8_{rows}x{cols}"), rows * cols, edges)
}

/// Bridge endpoints used by [`gen_concat2x`] when none are given: the two
/// lowest-index qubits of degree one or two, taken at the same local index
/// in both copies.
pub fn default_bridges(g: &CouplingGraph) -> Result<[(usize, usize); 2], TopologyError> {
    let boundary: Vec<usize> = (0..g.num_qubits())
        .filter(|&p| (1..=2).contains(&g.degree(p)))
        .take(2)
        .collect();
    match boundary[..] {
        [a, b] => Ok([(a, a), (b, b)]),
        _ => Err(TopologyError::InvalidBridge(
            "graph has fewer than two boundary qubits of degree 1 or 2".into(),
        )),
    }
}

/// Two disjoint copies of `g` plus two bridge qubits. Copy 0 keeps indices
/// `0..n`, copy 1 uses `n..2n`, and bridge `i` is qubit `2n + i`, coupled to
/// local qubit `bridges[i].0` of copy 0 and `bridges[i].1` of copy 1.
pub fn gen_concat2x(
    g: &CouplingGraph,
    bridges: Option<[(usize, usize); 2]>,
) -> Result<CouplingGraph, TopologyError> {
    let n = g.num_qubits();
    let bridges = match bridges {
        Some(b) => b,
        None => default_bridges(g)?,
    };
    for &(a, b) in &bridges {
        if a >= n || b >= n {
            return Err(TopologyError::InvalidBridge(format!(
                "({a}, {b}) outside 0..{n}"
            )));
        }
    }
    let mut edges: Vec<(usize, usize)> = g.edges().to_vec();
    edges.extend(g.edges().iter().map(|&(a, b)| (a + n, b + n)));
    for (i, &(a, b)) in bridges.iter().enumerate() {
        let bridge = 2 * n + i;
        edges.push((a, bridge));
        edges.push((bridge, b + n));
    }
    CouplingGraph::new(format!("{}_2x", g.name()), 2 * n + 2, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_qubit_line_from_json() {
        let g = CouplingGraph::from_json(r#"{"num_qubits":3, "edges":[[0,1],[1,2]]}"#).unwrap();
        assert_eq!(g.num_qubits(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            CouplingGraph::from_json(r#"{"num_qubits":2, "edges":[]}"#),
            Err(TopologyError::Disconnected)
        ));
        assert!(matches!(
            CouplingGraph::from_json(r#"{"num_qubits":2, "edges":[[0,2]]}"#),
            Err(TopologyError::OutOfRange(0, 2, 2))
        ));
        assert!(matches!(
            CouplingGraph::from_json(r#"{"num_qubits":2, "edges":[[1,1]]}"#),
            Err(TopologyError::SelfLoop(1))
        ));
        assert!(matches!(
            CouplingGraph::from_json(r#"{"num_qubits":2, "edges":[[0,1],[1,0]]}"#),
            Err(TopologyError::DuplicateEdge(1, 0))
        ));
        assert!(matches!(gen_line(0), Err(TopologyError::Empty)));
        assert!(matches!(gen_grid8(0, 3), Err(TopologyError::Empty)));
    }

    #[test]
    fn sherbrooke_shape() {
        let g = CouplingGraph::sherbrooke();
        assert_eq!(g.num_qubits(), 127);
        assert_eq!(g.max_degree(), 3);
        assert_eq!(g.edges().len(), 144);
    }

    #[test]
    fn ankaa3_shape() {
        let g = CouplingGraph::ankaa3();
        assert_eq!(g.num_qubits(), 82);
        assert_eq!(g.max_degree(), 4);
    }

    #[test]
    fn grid8_counts() {
        let g = gen_grid8(9, 9).unwrap();
        assert_eq!(g.num_qubits(), 81);
        assert_eq!(g.degree(4 * 9 + 4), 8);
        assert_eq!(g.max_degree(), 8);
        assert_eq!(g.degree(0), 3);
        assert_eq!(g.degree(80), 3);

        let g = gen_grid8(1, 2).unwrap();
        assert_eq!((g.num_qubits(), g.edges().len()), (2, 1));
    }

    #[test]
    fn grid8_3x3_edge_count_matches_enumeration() {
        // brute force: every pair of cells at Chebyshev distance 1
        let cells: Vec<(i32, i32)> = (0..3).flat_map(|r| (0..3).map(move |c| (r, c))).collect();
        let mut expected = 0;
        for i in 0..cells.len() {
            for j in i + 1..cells.len() {
                let (dr, dc) = (cells[i].0 - cells[j].0, cells[i].1 - cells[j].1);
                if dr.abs().max(dc.abs()) == 1 {
                    expected += 1;
                }
            }
        }
        assert_eq!(expected, 20);
        assert_eq!(gen_grid8(3, 3).unwrap().edges().len(), expected);
    }

    #[test]
    fn concat2x_sizes() {
        let g = CouplingGraph::sherbrooke_2x();
        assert_eq!(g.num_qubits(), 256);

        let line = gen_line(2).unwrap();
        let g = gen_concat2x(&line, None).unwrap();
        assert_eq!(g.num_qubits(), 6);
        assert!(g.has_edge(0, 4) && g.has_edge(4, 2));
        assert!(g.has_edge(1, 5) && g.has_edge(5, 3));

        assert!(matches!(
            gen_concat2x(&line, Some([(0, 0), (0, 7)])),
            Err(TopologyError::InvalidBridge(_))
        ));
    }

    #[test]
    fn builtins() {
        assert_eq!(CouplingGraph::builtin("line:5").unwrap().num_qubits(), 5);
        assert_eq!(CouplingGraph::builtin("grid8:2x3").unwrap().num_qubits(), 6);
        assert!(CouplingGraph::builtin("torus").is_err());
    }

    #[test]
    fn json_roundtrip() {
        let g = gen_grid8(2, 2).unwrap();
        assert_eq!(CouplingGraph::from_json(&g.to_json()).unwrap(), g);
    }
}
