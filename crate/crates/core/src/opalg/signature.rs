use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Index set of one lattice coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CoordKind {
    /// `ℕ₀`
    HalfLine,
    /// `ℤ`
    Line,
}

/// `ℓ²(lattice) ⊗ ℂ^d` for a product lattice of half-lines and lines.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct LatticeSignature {
    pub coords: Vec<CoordKind>,
    pub internal_dim: usize,
}

impl LatticeSignature {
    pub fn new(coords: Vec<CoordKind>, internal_dim: usize) -> Self {
        assert!(internal_dim >= 1, "internal dimension must be positive");
        LatticeSignature { coords, internal_dim }
    }

    pub fn finite(d: usize) -> Self {
        LatticeSignature::new(Vec::new(), d)
    }

    pub fn half_lines(l: usize, d: usize) -> Self {
        LatticeSignature::new(vec![CoordKind::HalfLine; l], d)
    }

    pub fn lines(m: usize, d: usize) -> Self {
        LatticeSignature::new(vec![CoordKind::Line; m], d)
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    /// Window size: `K` points per half-line, `2K` per line, times `d`.
    pub fn window_len(&self, k: usize) -> usize {
        self.coords
            .iter()
            .map(|c| match c {
                CoordKind::HalfLine => k,
                CoordKind::Line => 2 * k,
            })
            .product::<usize>()
            * self.internal_dim
    }

    /// Same lattice with every half-line widened to a line.
    pub fn dilated(&self) -> Self {
        LatticeSignature::new(vec![CoordKind::Line; self.coords.len()], self.internal_dim)
    }
}

impl fmt::Display for LatticeSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = self.coords.iter().filter(|c| **c == CoordKind::HalfLine).count();
        let l = self.coords.len() - h;
        write!(f, "l2(N0^{h} x Z^{l}) x C^{}", self.internal_dim)
    }
}

/// A tagged union of lattice blocks. Operators act block-diagonally.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Signature {
    pub blocks: Vec<LatticeSignature>,
}

impl Signature {
    pub fn single(block: LatticeSignature) -> Self {
        Signature { blocks: vec![block] }
    }

    pub fn direct_sum<'a, I: IntoIterator<Item = &'a Signature>>(parts: I) -> Self {
        Signature { blocks: parts.into_iter().flat_map(|s| s.blocks.iter().cloned()).collect() }
    }

    pub fn ensure_same(&self, other: &Signature) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SignatureMismatch(format!("{self} vs {other}")))
        }
    }

    pub fn window_len(&self, k: usize) -> usize {
        self.blocks.iter().map(|b| b.window_len(k)).sum()
    }

    /// Window basis in the fixed order: block, then multi-index
    /// lexicographically, then internal index.
    pub fn window_basis(&self, k: usize) -> Vec<BasisKey> {
        let mut out = Vec::with_capacity(self.window_len(k));
        for (b, block) in self.blocks.iter().enumerate() {
            let ranges: Vec<(i64, i64)> = block
                .coords
                .iter()
                .map(|c| match c {
                    CoordKind::HalfLine => (0, k as i64),
                    CoordKind::Line => (-(k as i64), k as i64),
                })
                .collect();
            let mut indices: Vec<Vec<i64>> = vec![Vec::new()];
            for &(lo, hi) in &ranges {
                indices = indices
                    .into_iter()
                    .flat_map(|prefix| {
                        (lo..hi).map(move |k| {
                            let mut next = prefix.clone();
                            next.push(k);
                            next
                        })
                    })
                    .collect();
            }
            for index in indices {
                for m in 0..block.internal_dim {
                    out.push(BasisKey { block: b, index: index.clone(), internal: m });
                }
            }
        }
        out
    }

    pub fn contains(&self, key: &BasisKey) -> bool {
        self.blocks.get(key.block).is_some_and(|b| {
            key.index.len() == b.coords.len()
                && key.internal < b.internal_dim
                && key.index.iter().zip(&b.coords).all(|(&k, c)| *c == CoordKind::Line || k >= 0)
        })
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|b| b.to_string()).collect();
        write!(f, "{}", parts.join(" (+) "))
    }
}

/// A basis vector `e_index ⊗ w_internal` in block `block`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BasisKey {
    pub block: usize,
    pub index: Vec<i64>,
    pub internal: usize,
}

impl BasisKey {
    pub fn new(block: usize, index: Vec<i64>, internal: usize) -> Self {
        BasisKey { block, index, internal }
    }
}

impl fmt::Display for BasisKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.index.iter().map(|k| k.to_string()).collect();
        write!(f, "[{}]e({})⊗w{}", self.block, idx.join(","), self.internal)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_order_is_lexicographic() {
        let sig = Signature::single(LatticeSignature::half_lines(2, 2));
        let basis = sig.window_basis(2);
        assert_eq!(basis.len(), 8);
        let mut sorted = basis.clone();
        sorted.sort();
        assert_eq!(basis, sorted);
        assert_eq!(basis[2], BasisKey::new(0, vec![0, 1], 0));
    }

    #[test]
    fn line_window_is_symmetric() {
        let sig = Signature::single(LatticeSignature::lines(1, 1));
        let idx: Vec<i64> = sig.window_basis(3).iter().map(|k| k.index[0]).collect();
        assert_eq!(idx, vec![-3, -2, -1, 0, 1, 2]);
    }

    #[test]
    fn pure_internal_block() {
        let sig = Signature::single(LatticeSignature::finite(3));
        assert_eq!(sig.window_basis(4).len(), 3);
    }

    #[test]
    fn direct_sum_concatenates() {
        let a = Signature::single(LatticeSignature::half_lines(1, 1));
        let b = Signature::single(LatticeSignature::lines(1, 1));
        let s = Signature::direct_sum([&a, &b]);
        assert_eq!(s.window_basis(2).len(), 2 + 4);
        assert_eq!(s.window_len(2), 6);
    }
}
