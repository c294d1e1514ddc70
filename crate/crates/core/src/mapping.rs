use serde::{Deserialize, Serialize};

/// Bijection between logical and physical qubits.
///
/// Both sides have the device width; logical indices past the circuit's
/// width are idle placeholders so every physical qubit always hosts exactly
/// one logical index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Mapping {
    log2phys: Vec<usize>,
    phys2log: Vec<usize>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("layout is not a permutation of 0..{0}")]
pub struct NotAPermutation(pub usize);

impl Mapping {
    pub fn identity(n: usize) -> Self {
        Mapping {
            log2phys: (0..n).collect(),
            phys2log: (0..n).collect(),
        }
    }

    /// `log2phys[q]` is the physical home of logical `q`.
    pub fn from_log2phys(log2phys: Vec<usize>) -> Result<Self, NotAPermutation> {
        let n = log2phys.len();
        let mut phys2log = vec![usize::MAX; n];
        for (q, &p) in log2phys.iter().enumerate() {
            if p >= n || phys2log[p] != usize::MAX {
                return Err(NotAPermutation(n));
            }
            phys2log[p] = q;
        }
        Ok(Mapping { log2phys, phys2log })
    }

    /// Pads a partial layout (one entry per circuit qubit) to device width by
    /// assigning the unused physical qubits to idle logical indices in order.
    pub fn from_partial(partial: &[usize], n_phys: usize) -> Result<Self, NotAPermutation> {
        let mut used = vec![false; n_phys];
        for &p in partial {
            if p >= n_phys || used[p] {
                return Err(NotAPermutation(n_phys));
            }
            used[p] = true;
        }
        let mut full = partial.to_vec();
        full.extend((0..n_phys).filter(|&p| !used[p]));
        Self::from_log2phys(full)
    }

    pub fn len(&self) -> usize {
        self.log2phys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log2phys.is_empty()
    }

    #[inline]
    pub fn phys(&self, logical: usize) -> usize {
        self.log2phys[logical]
    }

    #[inline]
    pub fn logical(&self, physical: usize) -> usize {
        self.phys2log[physical]
    }

    pub fn log2phys(&self) -> &[usize] {
        &self.log2phys
    }

    pub fn phys2log(&self) -> &[usize] {
        &self.phys2log
    }

    /// Composes the mapping with the transposition of physical `a` and `b`:
    /// the logical qubits they host trade places.
    pub fn swap_physical(&mut self, a: usize, b: usize) {
        let (qa, qb) = (self.phys2log[a], self.phys2log[b]);
        self.phys2log.swap(a, b);
        self.log2phys[qa] = b;
        self.log2phys[qb] = a;
    }

    pub fn is_bijection(&self) -> bool {
        self.log2phys.len() == self.phys2log.len()
            && self
                .log2phys
                .iter()
                .enumerate()
                .all(|(q, &p)| p < self.phys2log.len() && self.phys2log[p] == q)
    }
}

impl TryFrom<Vec<usize>> for Mapping {
    type Error = NotAPermutation;

    fn try_from(v: Vec<usize>) -> Result<Self, Self::Error> {
        Mapping::from_log2phys(v)
    }
}

impl From<Mapping> for Vec<usize> {
    fn from(m: Mapping) -> Self {
        m.log2phys
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_exchanges_hosted_logicals() {
        let mut m = Mapping::identity(3);
        m.swap_physical(1, 2);
        assert_eq!(m.log2phys(), &[0, 2, 1]);
        assert_eq!(m.logical(2), 1);
        assert!(m.is_bijection());
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(Mapping::from_log2phys(vec![0, 0]).is_err());
        assert!(Mapping::from_log2phys(vec![0, 2]).is_err());
        assert!(Mapping::from_partial(&[3, 3], 4).is_err());
    }

    #[test]
    fn partial_layouts_are_padded() {
        let m = Mapping::from_partial(&[2, 0], 4).unwrap();
        assert_eq!(m.log2phys(), &[2, 0, 1, 3]);
    }

    #[test]
    fn serde_as_list() {
        let m = Mapping::from_log2phys(vec![1, 0]).unwrap();
        assert_eq!(serde_json::to_string(&m).unwrap(), "[1,0]");
        let back: Mapping = serde_json::from_str("[1,0]").unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<Mapping>("[1,1]").is_err());
    }
}
