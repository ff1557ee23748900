//! Exact simple-random-walk distributions on Z^dim.
//!
//! Probabilities are invariant under the hyperoctahedral group, so only
//! canonical displacements (absolute values sorted descending) are stored.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::ed::InequalityCertificate;
use crate::{Error, Result};

/// Canonical displacement: absolute coordinates, descending, zero padded.
pub type WalkKey = [u8; 6];

/// Largest supported number of steps.
pub const MAX_STEPS: usize = 64;
/// Largest supported dimension.
pub const MAX_DIM: usize = 6;

#[derive(Clone, Debug)]
pub struct WalkTable {
    dim: usize,
    steps: usize,
    tables: Vec<HashMap<WalkKey, f64>>,
    keys: Vec<Vec<WalkKey>>,
}

/// Sort absolute values descending into a key. Returns `None` if a
/// coordinate does not fit.
pub fn canonical(w: &[i64]) -> Option<WalkKey> {
    if w.len() > MAX_DIM {
        return None;
    }
    let mut key = [0u8; 6];
    for (k, x) in key.iter_mut().zip(w) {
        *k = u8::try_from(x.unsigned_abs()).ok()?;
    }
    key.sort_unstable_by(|a, b| b.cmp(a));
    Some(key)
}

fn canonical_points(dim: usize, j: usize) -> Vec<WalkKey> {
    // Partitions of m <= j with m = j mod 2 into at most `dim` parts.
    // `left` is the unused part of the budget j, so parity matches when it is even.
    fn rec(dim: usize, pos: usize, left: usize, cap: usize, cur: &mut WalkKey, out: &mut Vec<WalkKey>) {
        if pos == dim {
            if left % 2 == 0 {
                out.push(*cur);
            }
            return;
        }
        for v in (0..=cap.min(left)).rev() {
            cur[pos] = v as u8;
            rec(dim, pos + 1, left - v, v, cur, out);
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    let mut cur = [0u8; 6];
    rec(dim, 0, j, j, &mut cur, &mut out);
    out.sort_unstable();
    out
}

impl WalkTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Canonical support points of `P_j`, ascending.
    pub fn keys(&self, j: usize) -> &[WalkKey] {
        &self.keys[j]
    }

    pub fn p_key(&self, j: usize, key: &WalkKey) -> f64 {
        self.tables.get(j).and_then(|t| t.get(key)).copied().unwrap_or(0.0)
    }

    /// `P_j(w)`; zero outside the support or beyond the table.
    pub fn p(&self, j: usize, w: &[i64]) -> f64 {
        if w.len() != self.dim {
            return 0.0;
        }
        canonical(w).map_or(0.0, |k| self.p_key(j, &k))
    }

    /// `Q_n(w) = sum_{j<n} P_j(w)`.
    pub fn q(&self, n: usize, w: &[i64]) -> f64 {
        (0..n.min(self.steps + 1)).map(|j| self.p(j, w)).sum()
    }

    /// Number of raw displacements with this canonical key.
    pub fn multiplicity(&self, key: &WalkKey) -> u64 {
        let coords = &key[..self.dim];
        let nonzero = coords.iter().filter(|&&c| c != 0).count() as u32;
        let mut perms = factorial(self.dim as u64);
        let mut i = 0;
        while i < coords.len() {
            let mut r = i;
            while r < coords.len() && coords[r] == coords[i] {
                r += 1;
            }
            perms /= factorial((r - i) as u64);
            i = r;
        }
        perms << nonzero
    }

    /// All raw displacements represented by `key`.
    pub fn expand(&self, key: &WalkKey) -> Vec<Vec<i64>> {
        let mut coords: Vec<i64> = key[..self.dim].iter().map(|&c| c as i64).collect();
        coords.sort_unstable();
        let mut out = Vec::new();
        // Distinct permutations in lexicographic order, then all sign choices.
        loop {
            let nz: Vec<usize> = (0..coords.len()).filter(|&i| coords[i] != 0).collect();
            for mask in 0u32..(1 << nz.len()) {
                let mut w = coords.clone();
                for (b, &i) in nz.iter().enumerate() {
                    if mask >> b & 1 == 1 {
                        w[i] = -w[i];
                    }
                }
                out.push(w);
            }
            if !next_permutation(&mut coords) {
                break;
            }
        }
        out
    }

    /// Largest deviation of `sum_w P_j(w)` from one over all `j`.
    pub fn normalization_error(&self) -> f64 {
        (0..=self.steps)
            .map(|j| {
                let total: f64 = self.keys[j].iter().map(|k| self.p_key(j, k) * self.multiplicity(k) as f64).sum();
                (total - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Check the support only contains displacements with the right parity
    /// and l1 norm at most `j`.
    pub fn support_is_consistent(&self) -> bool {
        (0..=self.steps).all(|j| {
            self.keys[j].iter().all(|k| {
                let l1: usize = k.iter().map(|&c| c as usize).sum();
                l1 <= j && l1 % 2 == j % 2 && self.p_key(j, k) > 0.0
            })
        })
    }
}

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

fn next_permutation(v: &mut [i64]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Exact tables `P_0..P_n` of the simple symmetric walk on Z^dim.
pub fn walk_table(dim: usize, n: usize) -> Result<WalkTable> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::invalid(format!("walk dimension must be in 1..={MAX_DIM} (got {dim})")));
    }
    if n > MAX_STEPS {
        return Err(Error::Budget { what: "walk steps".into(), required: n, budget: MAX_STEPS });
    }
    let mut tables: Vec<HashMap<WalkKey, f64>> = Vec::with_capacity(n + 1);
    let mut keys = Vec::with_capacity(n + 1);
    let origin = [0u8; 6];
    tables.push(HashMap::from([(origin, 1.0)]));
    keys.push(vec![origin]);
    let weight = 1.0 / (2 * dim) as f64;
    for j in 1..=n {
        let prev = &tables[j - 1];
        let pts = canonical_points(dim, j);
        let values: Vec<f64> = pts
            .par_iter()
            .map(|key| {
                let mut acc = 0.0;
                for i in 0..dim {
                    for delta in [-1i16, 1] {
                        let mut nb = *key;
                        nb[i] = (key[i] as i16 + delta).unsigned_abs() as u8;
                        nb[..dim].sort_unstable_by(|a, b| b.cmp(a));
                        acc += prev.get(&nb).copied().unwrap_or(0.0);
                    }
                }
                acc * weight
            })
            .collect();
        let map: HashMap<WalkKey, f64> = pts.iter().copied().zip(values).filter(|(_, v)| *v > 0.0).collect();
        let mut ks: Vec<WalkKey> = map.keys().copied().collect();
        ks.sort_unstable();
        tables.push(map);
        keys.push(ks);
    }
    Ok(WalkTable { dim, steps: n, tables, keys })
}

/// `P_j(w) <= (3 pi / j)^3 exp(-b0 |w|^2 / (2j))` for `1 <= j <= n` and all
/// support points. Requires a six-dimensional table.
pub fn gaussian_bound_check(table: &WalkTable, b0: f64) -> Result<InequalityCertificate> {
    if table.dim != 6 {
        return Err(Error::Precondition(format!("Gaussian bound needs dim 6 (got {})", table.dim)));
    }
    let mut min_slack = f64::INFINITY;
    let mut witness = String::from("none");
    let mut min_rel = f64::INFINITY;
    for j in 1..=table.steps {
        let pref = (3.0 * std::f64::consts::PI / j as f64).powi(3);
        for key in table.keys(j) {
            let r2: f64 = key.iter().map(|&c| (c as f64).powi(2)).sum();
            let rhs = pref * (-b0 * r2 / (2.0 * j as f64)).exp();
            let lhs = table.p_key(j, key);
            let slack = rhs - lhs;
            if slack < min_slack {
                min_slack = slack;
                witness = format!("j={j} w={:?}", &key[..6]);
            }
            min_rel = min_rel.min(slack / rhs);
        }
    }
    Ok(InequalityCertificate::new("gaussian_bound", min_slack, 0.0, witness)
        .with_note(format!("smallest relative slack {min_rel:.3e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_steps_in_six_dimensions() {
        let t = walk_table(6, 4).unwrap();
        assert_eq!(t.p(0, &[0; 6]), 1.0);
        assert!((t.p(1, &[0, 0, -1, 0, 0, 0]) - 1.0 / 12.0).abs() < 1e-16);
        assert!((t.p(2, &[0; 6]) - 1.0 / 12.0).abs() < 1e-16);
        assert_eq!(t.p(2, &[1, 0, 0, 0, 0, 0]), 0.0);
        assert_eq!(t.p(3, &[4, 0, 0, 0, 0, 0]), 0.0);
    }

    #[test]
    fn one_dimensional_walk_is_binomial() {
        let t = walk_table(1, 10).unwrap();
        // P_10(2) = C(10, 6) / 2^10
        assert!((t.p(10, &[2]) - 210.0 / 1024.0).abs() < 1e-15);
        assert!((t.p(10, &[-2]) - 210.0 / 1024.0).abs() < 1e-15);
    }

    #[test]
    fn invariants_hold() {
        for dim in [2, 3, 6] {
            let t = walk_table(dim, 16).unwrap();
            assert!(t.normalization_error() < 1e-12);
            assert!(t.support_is_consistent());
        }
    }

    #[test]
    fn expansion_matches_multiplicity() {
        let t = walk_table(6, 6).unwrap();
        for j in 0..=6 {
            for k in t.keys(j) {
                let raw = t.expand(k);
                assert_eq!(raw.len() as u64, t.multiplicity(k));
                for w in &raw {
                    assert_eq!(canonical(w).unwrap(), *k);
                }
            }
        }
    }

    #[test]
    fn brute_force_agrees_in_two_dimensions() {
        let n = 8;
        let t = walk_table(2, n).unwrap();
        let size = 2 * n + 1;
        let mut grid = vec![0.0; size * size];
        grid[n * size + n] = 1.0;
        for _ in 0..n {
            let mut next = vec![0.0; size * size];
            for x in 1..size - 1 {
                for y in 1..size - 1 {
                    let v = grid[x * size + y] / 4.0;
                    next[(x + 1) * size + y] += v;
                    next[(x - 1) * size + y] += v;
                    next[x * size + y + 1] += v;
                    next[x * size + y - 1] += v;
                }
            }
            grid = next;
        }
        for x in 0..size {
            for y in 0..size {
                let w = [x as i64 - n as i64, y as i64 - n as i64];
                assert!((t.p(n, &w) - grid[x * size + y]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn refuses_out_of_range() {
        assert!(walk_table(7, 2).is_err());
        assert!(matches!(walk_table(6, 65), Err(Error::Budget { .. })));
    }
}
