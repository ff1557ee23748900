//! Census of shortest lattice paths hugging the straight segment.
//!
//! For every ordered pair `(x, y)` of the cube `[0, l)^3` one monotone
//! path of length `|x - y|_1` is chosen: the one minimizing the summed
//! squared distance of its vertices to the segment `[x, y]`, ties broken by
//! the lexicographically smallest vertex sequence. `N` counts how many
//! chosen paths cross each directed bond.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::numeric::loglog_slope;
use crate::{Error, Result};

/// Largest side accepted by the census.
pub const MAX_SIDE: usize = 12;

/// Directed unit steps, indexed as `2 * axis + (negative as usize)`.
const DIRECTIONS: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathCensus {
    pub side: usize,
    /// `counts[site * 6 + direction]`, sites in lexicographic order.
    pub counts: Vec<u64>,
    pub max_count: u64,
    /// Bond carrying `max_count`, as (site, neighbour).
    pub max_bond: ([usize; 3], [usize; 3]),
    pub pairs: u64,
    /// Summed path lengths; equals the summed l1 distances.
    pub total_length: u64,
}

impl PathCensus {
    /// Count on the directed bond from `from` to its neighbour `to`.
    pub fn count(&self, from: [usize; 3], to: [usize; 3]) -> Option<u64> {
        let l = self.side;
        let mut dir = None;
        for axis in 0..3 {
            if to[axis] == from[axis] + 1 && (0..3).all(|j| j == axis || to[j] == from[j]) {
                dir = Some(2 * axis);
            }
            if from[axis] == to[axis] + 1 && (0..3).all(|j| j == axis || to[j] == from[j]) {
                dir = Some(2 * axis + 1);
            }
        }
        let site = (from[0] * l + from[1]) * l + from[2];
        dir.map(|d| self.counts[site * DIRECTIONS + d])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathFit {
    pub sides: Vec<usize>,
    pub max_counts: Vec<u64>,
    pub exponent: f64,
}

/// `|d|^2` times the squared distance from `v` to the segment from the
/// origin to `d`; exact in integers.
fn scaled_distance(v: [i64; 3], d: [i64; 3]) -> i64 {
    let dd = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    let proj = v[0] * d[0] + v[1] * d[1] + v[2] * d[2];
    if proj <= 0 {
        return dd * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    }
    if proj >= dd {
        let w = [v[0] - d[0], v[1] - d[1], v[2] - d[2]];
        return dd * (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
    }
    let c = [v[1] * d[2] - v[2] * d[1], v[2] * d[0] - v[0] * d[2], v[0] * d[1] - v[1] * d[0]];
    c[0] * c[0] + c[1] * c[1] + c[2] * c[2]
}

/// The chosen path from `x` to `y` as its vertex sequence.
pub fn chosen_path(x: [i64; 3], y: [i64; 3]) -> Vec<[i64; 3]> {
    let sign = [0, 1, 2].map(|j| (y[j] - x[j]).signum());
    let len = [0, 1, 2].map(|j| (y[j] - x[j]).unsigned_abs() as usize);
    let d = [0, 1, 2].map(|j| y[j] - x[j]);
    let dims = [len[0] + 1, len[1] + 1, len[2] + 1];
    let idx = |u: [usize; 3]| (u[0] * dims[1] + u[1]) * dims[2] + u[2];
    let offset = |u: [usize; 3]| [0, 1, 2].map(|j| sign[j] * u[j] as i64);
    // best[u]: minimal cost of a monotone path from local point u to the end.
    let mut best = vec![i64::MAX; dims[0] * dims[1] * dims[2]];
    for u0 in (0..dims[0]).rev() {
        for u1 in (0..dims[1]).rev() {
            for u2 in (0..dims[2]).rev() {
                let u = [u0, u1, u2];
                let here = scaled_distance(offset(u), d);
                let mut next = i64::MAX;
                for j in 0..3 {
                    if u[j] < len[j] {
                        let mut w = u;
                        w[j] += 1;
                        next = next.min(best[idx(w)]);
                    }
                }
                best[idx(u)] = here + if next == i64::MAX { 0 } else { next };
            }
        }
    }
    let mut path = Vec::with_capacity(len.iter().sum::<usize>() + 1);
    let mut u = [0usize; 3];
    path.push(x);
    while u != len {
        let mut choice: Option<([i64; 3], [usize; 3], i64)> = None;
        for j in 0..3 {
            if u[j] < len[j] {
                let mut w = u;
                w[j] += 1;
                let cost = best[idx(w)];
                let off = offset(w);
                let v = [x[0] + off[0], x[1] + off[1], x[2] + off[2]];
                let better = match &choice {
                    None => true,
                    Some((pv, _, pc)) => cost < *pc || (cost == *pc && v < *pv),
                };
                if better {
                    choice = Some((v, w, cost));
                }
            }
        }
        let (v, w, _) = choice.expect("a step remains");
        path.push(v);
        u = w;
    }
    path
}

fn direction(a: [i64; 3], b: [i64; 3]) -> usize {
    for axis in 0..3 {
        if b[axis] == a[axis] + 1 {
            return 2 * axis;
        }
        if b[axis] + 1 == a[axis] {
            return 2 * axis + 1;
        }
    }
    unreachable!("vertices are not adjacent")
}

fn tally(side: usize, paths: impl Iterator<Item = Vec<[i64; 3]>>) -> (Vec<u64>, u64, u64) {
    let l = side as i64;
    let mut counts = vec![0u64; side * side * side * DIRECTIONS];
    let mut pairs = 0;
    let mut total = 0;
    for p in paths {
        pairs += 1;
        total += (p.len() - 1) as u64;
        for w in p.windows(2) {
            let site = ((w[0][0] * l + w[0][1]) * l + w[0][2]) as usize;
            counts[site * DIRECTIONS + direction(w[0], w[1])] += 1;
        }
    }
    (counts, pairs, total)
}

fn finish(side: usize, counts: Vec<u64>, pairs: u64, total_length: u64) -> PathCensus {
    let (arg, &max_count) = counts.iter().enumerate().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0))).expect("non-empty");
    let site = arg / DIRECTIONS;
    let dir = arg % DIRECTIONS;
    let from = [site / (side * side), (site / side) % side, site % side];
    let mut to = from;
    if dir % 2 == 0 {
        to[dir / 2] += 1;
    } else {
        to[dir / 2] -= 1;
    }
    PathCensus { side, counts, max_count, max_bond: (from, to), pairs, total_length }
}

fn all_points(side: usize) -> Vec<[i64; 3]> {
    let l = side as i64;
    (0..l).flat_map(|a| (0..l).flat_map(move |b| (0..l).map(move |c| [a, b, c]))).collect()
}

/// Census over all ordered pairs of distinct sites of `[0, side)^3`.
pub fn path_census(side: usize) -> Result<PathCensus> {
    if side == 0 || side > MAX_SIDE {
        return Err(Error::invalid(format!("census side must be in 1..={MAX_SIDE} (got {side})")));
    }
    let points = all_points(side);
    let partial: Vec<(Vec<u64>, u64, u64)> = points
        .par_iter()
        .map(|&x| tally(side, points.iter().filter(|&&y| y != x).map(|&y| chosen_path(x, y))))
        .collect();
    let mut counts = vec![0u64; side * side * side * DIRECTIONS];
    let (mut pairs, mut total) = (0, 0);
    for (c, p, t) in partial {
        for (a, b) in counts.iter_mut().zip(c) {
            *a += b;
        }
        pairs += p;
        total += t;
    }
    Ok(finish(side, counts, pairs, total))
}

/// Reference census by enumerating every monotone path. Only for tiny sides.
pub fn brute_force_census(side: usize) -> Result<PathCensus> {
    if side == 0 || side > 3 {
        return Err(Error::invalid("brute-force census limited to side <= 3"));
    }
    let points = all_points(side);
    let mut chosen = Vec::new();
    for &x in &points {
        for &y in &points {
            if x == y {
                continue;
            }
            let d = [0, 1, 2].map(|j| y[j] - x[j]);
            let mut steps = Vec::new();
            for j in 0..3 {
                for _ in 0..d[j].abs() {
                    steps.push(j);
                }
            }
            let mut best: Option<(i64, Vec<[i64; 3]>)> = None;
            let mut order = steps.clone();
            order.sort_unstable();
            loop {
                let mut v = x;
                let mut path = vec![x];
                for &j in &order {
                    v[j] += d[j].signum();
                    path.push(v);
                }
                let cost: i64 = path.iter().map(|p| scaled_distance([p[0] - x[0], p[1] - x[1], p[2] - x[2]], d)).sum();
                let better = match &best {
                    None => true,
                    Some((c, p)) => cost < *c || (cost == *c && path < *p),
                };
                if better {
                    best = Some((cost, path));
                }
                if !next_perm(&mut order) {
                    break;
                }
            }
            chosen.push(best.expect("at least one path").1);
        }
    }
    let (counts, pairs, total) = tally(side, chosen.into_iter());
    Ok(finish(side, counts, pairs, total))
}

fn next_perm(v: &mut [usize]) -> bool {
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

/// Least-squares exponent of the maximal bond count against the side.
pub fn path_exponent_fit(sides: &[usize]) -> Result<PathFit> {
    if sides.len() < 2 {
        return Err(Error::invalid("need at least two sides for a fit"));
    }
    let max_counts: Vec<u64> = sides.iter().map(|&s| path_census(s).map(|c| c.max_count)).collect::<Result<_>>()?;
    let xs: Vec<f64> = sides.iter().map(|&s| s as f64).collect();
    let ys: Vec<f64> = max_counts.iter().map(|&c| c as f64).collect();
    Ok(PathFit { sides: sides.to_vec(), max_counts, exponent: loglog_slope(&xs, &ys) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_distance_is_exact() {
        let d = [2, 1, 0];
        assert_eq!(scaled_distance([0, 0, 0], d), 0);
        assert_eq!(scaled_distance([2, 1, 0], d), 0);
        // (1,0,0): cross product with d is (0,0,1), squared norm 1
        assert_eq!(scaled_distance([1, 0, 0], d), 1);
        assert_eq!(scaled_distance([-1, 0, 0], d), 5);
    }

    #[test]
    fn paths_are_shortest_and_self_avoiding() {
        let x = [0, 3, 1];
        let y = [4, 0, 2];
        let p = chosen_path(x, y);
        assert_eq!(p.len(), 4 + 3 + 1 + 1);
        assert_eq!(p[0], x);
        assert_eq!(*p.last().unwrap(), y);
        let mut seen = p.clone();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), p.len());
    }

    #[test]
    fn adjacent_pair_uses_its_bond() {
        assert_eq!(chosen_path([1, 1, 1], [1, 2, 1]), vec![[1, 1, 1], [1, 2, 1]]);
    }

    #[test]
    fn dynamic_programming_matches_enumeration() {
        for side in [2, 3] {
            let a = path_census(side).unwrap();
            let b = brute_force_census(side).unwrap();
            assert_eq!(a.counts, b.counts, "side {side}");
            assert_eq!(a.total_length, b.total_length);
        }
    }

    #[test]
    fn side_two_lengths_at_most_three() {
        let c = path_census(2).unwrap();
        assert_eq!(c.pairs, 56);
        // Distances in {0,1}^3: 12 at distance 1 per direction pair... total sum
        // of l1 distances over ordered pairs is 8 * (3 * 1 + 3 * 2 + 1 * 3) = 96.
        assert_eq!(c.total_length, 96);
    }
}
