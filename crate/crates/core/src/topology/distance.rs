use std::collections::VecDeque;
use std::fmt::Write;

use super::CouplingGraph;

/// All-pairs SWAP distances, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<u32>,
}

impl DistanceMatrix {
    #[inline]
    pub fn get(&self, a: usize, b: usize) -> u32 {
        self.d[a * self.n + b]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn row(&self, a: usize) -> &[u32] {
        &self.d[a * self.n..(a + 1) * self.n]
    }

    /// Returns a copy with every entry multiplied by `factor`.
    pub fn scaled(&self, factor: u32) -> DistanceMatrix {
        DistanceMatrix {
            n: self.n,
            d: self.d.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn diameter(&self) -> u32 {
        self.d.iter().copied().max().unwrap_or(0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for a in 0..self.n {
            for (i, x) in self.row(a).iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{x}");
            }
            out.push('\n');
        }
        out
    }
}

/// Unweighted shortest paths by one BFS per source.
pub fn apsp(g: &CouplingGraph) -> DistanceMatrix {
    let n = g.num_qubits();
    let mut d = vec![u32::MAX; n * n];
    let mut queue = VecDeque::with_capacity(n);
    for src in 0..n {
        let row = &mut d[src * n..(src + 1) * n];
        row[src] = 0;
        queue.clear();
        queue.push_back(src);
        while let Some(p) = queue.pop_front() {
            let next = row[p] + 1;
            for &q in g.neighbors(p) {
                if row[q] == u32::MAX {
                    row[q] = next;
                    queue.push_back(q);
                }
            }
        }
    }
    DistanceMatrix { n, d }
}
