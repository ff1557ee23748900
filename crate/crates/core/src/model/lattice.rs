use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Spin quantum number, stored as `2S` so half-integers stay exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinValue {
    two_s: u32,
}

impl SpinValue {
    pub fn new(two_s: u32) -> Result<Self> {
        if two_s == 0 {
            return Err(Error::invalid("two_s must be at least 1"));
        }
        Ok(SpinValue { two_s })
    }

    pub fn half() -> Self {
        SpinValue { two_s: 1 }
    }

    pub fn two_s(self) -> u32 {
        self.two_s
    }

    pub fn s(self) -> f64 {
        self.two_s as f64 / 2.0
    }
}

/// The box `[0, side)^dim` of Z^dim with nearest-neighbor bonds.
///
/// Sites are ordered lexicographically with the first coordinate slowest.
/// Unused coordinates (beyond `dim`) are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeBox {
    dim: usize,
    side: usize,
    sites: Vec<[usize; 3]>,
    bonds: Vec<(usize, usize)>,
    exterior: Vec<u32>,
}

impl LatticeBox {
    pub fn new(dim: usize, side: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::invalid(format!("dim must be 1, 2 or 3 (got {dim})")));
        }
        if side == 0 {
            return Err(Error::invalid("side must be at least 1"));
        }
        let count = side
            .checked_pow(dim as u32)
            .filter(|&c| c <= 1 << 20)
            .ok_or_else(|| Error::invalid("lattice too large"))?;
        let mut sites = Vec::with_capacity(count);
        for idx in 0..count {
            let mut c = [0usize; 3];
            let mut rest = idx;
            for j in (0..dim).rev() {
                c[j] = rest % side;
                rest /= side;
            }
            sites.push(c);
        }
        let stride = |j: usize| side.pow((dim - 1 - j) as u32);
        let mut bonds = Vec::new();
        let mut exterior = vec![0u32; count];
        for (i, c) in sites.iter().enumerate() {
            for j in 0..dim {
                if c[j] + 1 < side {
                    bonds.push((i, i + stride(j)));
                } else {
                    exterior[i] += 1;
                }
                if c[j] == 0 {
                    exterior[i] += 1;
                }
            }
        }
        bonds.sort_unstable();
        Ok(LatticeBox { dim, side, sites, bonds, exterior })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[[usize; 3]] {
        &self.sites
    }

    pub fn bonds(&self) -> &[(usize, usize)] {
        &self.bonds
    }

    /// Number of nearest neighbors of each site that lie outside the box.
    pub fn exterior_neighbors(&self) -> &[u32] {
        &self.exterior
    }

    /// Sites with at least one exterior neighbor.
    pub fn boundary_sites(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.exterior[i] > 0).collect()
    }

    pub fn index_of(&self, c: &[usize]) -> Option<usize> {
        let mut idx = 0;
        for j in 0..self.dim {
            let v = *c.get(j)?;
            if v >= self.side {
                return None;
            }
            idx = idx * self.side + v;
        }
        Some(idx)
    }

    /// In-box nearest neighbors of site `i`.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let c = self.sites[i];
        let mut out = Vec::with_capacity(2 * self.dim);
        for j in 0..self.dim {
            let mut d = c;
            if c[j] > 0 {
                d[j] = c[j] - 1;
                out.push(self.index_of(&d[..self.dim]).expect("in box"));
            }
            if c[j] + 1 < self.side {
                d[j] = c[j] + 1;
                out.push(self.index_of(&d[..self.dim]).expect("in box"));
            }
        }
        out
    }

    pub fn are_neighbors(&self, a: usize, b: usize) -> bool {
        let (p, q) = (self.sites[a], self.sites[b]);
        (0..3).map(|j| p[j].abs_diff(q[j])).sum::<usize>() == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bond_counts() {
        for (dim, side, sites, bonds) in [(1, 2, 2, 1), (3, 2, 8, 12), (2, 3, 9, 12), (1, 1, 1, 0)] {
            let l = LatticeBox::new(dim, side).unwrap();
            assert_eq!(l.len(), sites);
            assert_eq!(l.bonds().len(), bonds);
            assert_eq!(bonds, dim * (side - 1) * side.pow(dim as u32 - 1));
        }
    }

    #[test]
    fn corner_has_three_missing_neighbors() {
        let l = LatticeBox::new(3, 2).unwrap();
        assert!(l.exterior_neighbors().iter().all(|&e| e == 3));
        let l = LatticeBox::new(3, 3).unwrap();
        let centre = l.index_of(&[1, 1, 1]).unwrap();
        assert_eq!(l.exterior_neighbors()[centre], 0);
        assert_eq!(l.boundary_sites().len(), 26);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(LatticeBox::new(0, 2).is_err());
        assert!(LatticeBox::new(4, 2).is_err());
        assert!(LatticeBox::new(2, 0).is_err());
        assert!(SpinValue::new(0).is_err());
    }

    #[test]
    fn neighbors_match_bonds() {
        let l = LatticeBox::new(2, 3).unwrap();
        let total: usize = (0..l.len()).map(|i| l.neighbors(i).len()).sum();
        assert_eq!(total, 2 * l.bonds().len());
        for &(a, b) in l.bonds() {
            assert!(l.are_neighbors(a, b));
        }
    }
}
