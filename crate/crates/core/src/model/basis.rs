use std::cmp::Ordering;

use super::{LatticeBox, SpinValue};
use crate::{Error, Result};

/// All occupation vectors with `sum n_x = N` and `n_x <= cap`, in strict
/// lexicographic order. The cap is `2S` for the physical spin space; a cap of
/// one gives the hard-core subspace.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    lattice: LatticeBox,
    spin: SpinValue,
    total_n: usize,
    cap: u8,
    sites: usize,
    states: Vec<u8>,
}

impl SectorBasis {
    pub fn new(lattice: &LatticeBox, spin: SpinValue, total_n: usize) -> Result<Self> {
        Self::with_cap(lattice, spin, total_n, spin.two_s())
    }

    /// Hard-core basis (`n_x <= 1`) for spin `spin`.
    pub fn hard_core(lattice: &LatticeBox, spin: SpinValue, total_n: usize) -> Result<Self> {
        Self::with_cap(lattice, spin, total_n, 1)
    }

    fn with_cap(lattice: &LatticeBox, spin: SpinValue, total_n: usize, cap: u32) -> Result<Self> {
        let cap = cap.min(spin.two_s());
        if cap > u8::MAX as u32 {
            return Err(Error::invalid("occupation cap too large"));
        }
        let sites = lattice.len();
        if total_n > cap as usize * sites {
            return Err(Error::invalid(format!(
                "sector N={total_n} out of range 0..={}",
                cap as usize * sites
            )));
        }
        let mut states = Vec::new();
        let mut current = vec![0u8; sites];
        fill(&mut current, 0, total_n, cap as usize, &mut states);
        Ok(SectorBasis {
            lattice: lattice.clone(),
            spin,
            total_n,
            cap: cap as u8,
            sites,
            states,
        })
    }

    pub fn lattice(&self) -> &LatticeBox {
        &self.lattice
    }

    pub fn spin(&self) -> SpinValue {
        self.spin
    }

    pub fn total_n(&self) -> usize {
        self.total_n
    }

    pub fn cap(&self) -> u8 {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.states.len() / self.sites.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn state(&self, i: usize) -> &[u8] {
        &self.states[i * self.sites..(i + 1) * self.sites]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u8]> {
        self.states.chunks(self.sites.max(1))
    }

    /// Position of `occ` in the basis, by binary search over the sorted states.
    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        if occ.len() != self.sites {
            return None;
        }
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.state(mid).cmp(occ) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(mid),
            }
        }
        None
    }
}

fn fill(current: &mut [u8], pos: usize, remaining: usize, cap: usize, out: &mut Vec<u8>) {
    let sites = current.len();
    if pos == sites {
        if remaining == 0 {
            out.extend_from_slice(current);
        }
        return;
    }
    let room_after = cap * (sites - pos - 1);
    let lo = remaining.saturating_sub(room_after);
    let hi = remaining.min(cap);
    for v in lo..=hi {
        current[pos] = v as u8;
        fill(current, pos + 1, remaining - v, cap, out);
    }
    current[pos] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> LatticeBox {
        LatticeBox::new(1, n).unwrap()
    }

    #[test]
    fn small_sectors() {
        let b = SectorBasis::new(&chain(2), SpinValue::half(), 1).unwrap();
        assert_eq!(b.iter().collect::<Vec<_>>(), vec![&[0u8, 1][..], &[1, 0][..]]);
        let b = SectorBasis::new(&chain(2), SpinValue::new(2).unwrap(), 2).unwrap();
        assert_eq!(b.len(), 3);
        let b = SectorBasis::new(&chain(4), SpinValue::half(), 2).unwrap();
        assert_eq!(b.len(), 6);
    }

    #[test]
    fn sectors_are_complete_and_ordered() {
        let l = LatticeBox::new(2, 2).unwrap();
        for two_s in 1..=3u32 {
            let spin = SpinValue::new(two_s).unwrap();
            let mut total = 0;
            for n in 0..=(two_s as usize * 4) {
                let b = SectorBasis::new(&l, spin, n).unwrap();
                for i in 0..b.len() {
                    assert_eq!(b.index_of(b.state(i)), Some(i));
                    if i > 0 {
                        assert!(b.state(i - 1) < b.state(i));
                    }
                }
                total += b.len();
            }
            assert_eq!(total, (two_s as usize + 1).pow(4));
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(SectorBasis::new(&chain(2), SpinValue::half(), 3).is_err());
        let hc = SectorBasis::hard_core(&chain(3), SpinValue::new(2).unwrap(), 2).unwrap();
        assert_eq!(hc.len(), 3);
        assert!(hc.index_of(&[2, 0, 0]).is_none());
    }
}
