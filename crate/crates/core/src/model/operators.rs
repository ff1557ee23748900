use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{SectorBasis, SparseSymmetricOperator};

/// Boundary treatment of the Heisenberg and free-boson operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Open,
    /// Spins outside the box pinned to `S^3 = -S`: adds `S n_x` per missing
    /// exterior neighbor.
    DirichletField,
}

/// One off-diagonal move: transfer a particle from `from` to `to`.
struct Hop {
    from: usize,
    to: usize,
    coef: f64,
}

/// Assembles an operator whose rows are given by a diagonal value and a list
/// of single-particle hops. Targets outside the basis are dropped, which is
/// exactly the compression onto the span of the basis.
fn assemble<D, H>(basis: &SectorBasis, diag: D, hops: H) -> SparseSymmetricOperator
where
    D: Fn(&[u8]) -> f64 + Sync,
    H: Fn(&[u8], &mut Vec<Hop>) + Sync,
{
    let rows: Vec<Vec<(usize, f64)>> = (0..basis.len())
        .into_par_iter()
        .map(|i| {
            let occ = basis.state(i);
            let mut row = vec![(i, diag(occ))];
            let mut moves = Vec::new();
            hops(occ, &mut moves);
            let mut target = occ.to_vec();
            for mv in moves {
                if mv.coef == 0.0 {
                    continue;
                }
                target[mv.from] -= 1;
                target[mv.to] += 1;
                if let Some(j) = basis.index_of(&target) {
                    if j > i {
                        row.push((j, mv.coef));
                    }
                }
                target[mv.from] += 1;
                target[mv.to] -= 1;
            }
            row
        })
        .collect();
    SparseSymmetricOperator::from_rows(basis.len(), rows)
}

/// `<n_to+1, n_from-1| S^+_to S^-_from |n_to, n_from>` with `S^3 = n - S`.
/// The product is taken under a single square root so that perfect squares
/// are exact.
fn ladder(two_s: f64, n_to: u8, n_from: u8) -> f64 {
    let (t, f) = (n_to as f64, n_from as f64);
    ((t + 1.0) * (two_s - t) * f * (two_s - f + 1.0)).max(0.0).sqrt()
}

/// `constant + sum_{(i,j,c)} c S_i . S_j` from exact spin-matrix elements.
fn spin_dot(basis: &SectorBasis, pairs: &[(usize, usize, f64)], constant: f64) -> SparseSymmetricOperator {
    let s = basis.spin().s();
    let two_s = 2.0 * s;
    let cap = basis.spin().two_s() as u8;
    assemble(
        basis,
        |occ| {
            constant
                + pairs
                    .iter()
                    .map(|&(i, j, c)| c * (occ[i] as f64 - s) * (occ[j] as f64 - s))
                    .sum::<f64>()
        },
        |occ, out| {
            for &(i, j, c) in pairs {
                // S^+_i S^-_j moves a particle j -> i, and the reverse.
                for (to, from) in [(i, j), (j, i)] {
                    if occ[from] > 0 && occ[to] < cap {
                        let coef = 0.5 * c * ladder(two_s, occ[to], occ[from]);
                        out.push(Hop { from, to, coef });
                    }
                }
            }
        },
    )
}

/// `sum_{(i,j,c)} c (S^2 - S_i . S_j)` on the sector.
pub fn pair_operator(basis: &SectorBasis, pairs: &[(usize, usize, f64)]) -> SparseSymmetricOperator {
    let s2 = basis.spin().s().powi(2);
    let constant: f64 = pairs.iter().map(|p| p.2 * s2).sum();
    let negated: Vec<_> = pairs.iter().map(|&(i, j, c)| (i, j, -c)).collect();
    spin_dot(basis, &negated, constant)
}

fn dirichlet_field(basis: &SectorBasis) -> SparseSymmetricOperator {
    let s = basis.spin().s();
    let ext = basis.lattice().exterior_neighbors();
    let diag: Vec<f64> = basis
        .iter()
        .map(|occ| s * occ.iter().zip(ext).map(|(&n, &e)| n as f64 * e as f64).sum::<f64>())
        .collect();
    SparseSymmetricOperator::from_diagonal(&diag)
}

/// Heisenberg Hamiltonian `sum_bonds (S^2 - S_x . S_y)` on the sector,
/// optionally with the Dirichlet boundary field.
pub fn heisenberg_operator(basis: &SectorBasis, boundary: Boundary) -> SparseSymmetricOperator {
    let pairs: Vec<_> = basis.lattice().bonds().iter().map(|&(a, b)| (a, b, 1.0)).collect();
    let h = pair_operator(basis, &pairs);
    match boundary {
        Boundary::Open => h,
        Boundary::DirichletField => h.combine(1.0, &dirichlet_field(basis), 1.0),
    }
}

/// The same Hamiltonian assembled from its Holstein-Primakoff boson form.
pub fn bosonic_operator(basis: &SectorBasis) -> SparseSymmetricOperator {
    let s = basis.spin().s();
    let two_s = 2.0 * s;
    let cap = basis.spin().two_s() as u8;
    let bonds = basis.lattice().bonds();
    assemble(
        basis,
        |occ| {
            bonds
                .iter()
                .map(|&(x, y)| {
                    let (nx, ny) = (occ[x] as f64, occ[y] as f64);
                    s * (nx + ny) - nx * ny
                })
                .sum()
        },
        |occ, out| {
            for &(x, y) in bonds {
                for (to, from) in [(x, y), (y, x)] {
                    if occ[from] > 0 && occ[to] < cap {
                        let (nt, nf) = (occ[to] as f64, occ[from] as f64);
                        let coef = -s
                            * (nt + 1.0).sqrt()
                            * (1.0 - nt / two_s).sqrt()
                            * (1.0 - (nf - 1.0) / two_s).sqrt()
                            * nf.sqrt();
                        out.push(Hop { from, to, coef });
                    }
                }
            }
        },
    )
}

/// Free-boson operator `T = S sum_bonds (-a+_x a_y - a+_y a_x + n_x + n_y)`
/// compressed to the basis (hence to `n_x <= 2S`).
pub fn free_boson_operator(basis: &SectorBasis, boundary: Boundary) -> SparseSymmetricOperator {
    let s = basis.spin().s();
    let bonds = basis.lattice().bonds();
    let t = assemble(
        basis,
        |occ| bonds.iter().map(|&(x, y)| s * (occ[x] as f64 + occ[y] as f64)).sum(),
        |occ, out| {
            for &(x, y) in bonds {
                for (to, from) in [(x, y), (y, x)] {
                    if occ[from] > 0 {
                        let coef = -s * ((occ[to] as f64 + 1.0) * occ[from] as f64).sqrt();
                        out.push(Hop { from, to, coef });
                    }
                }
            }
        },
    );
    match boundary {
        Boundary::Open => t,
        Boundary::DirichletField => t.combine(1.0, &dirichlet_field(basis), 1.0),
    }
}

/// Total-spin Casimir `|sum_x S_x|^2`.
pub fn casimir_operator(basis: &SectorBasis) -> SparseSymmetricOperator {
    let s = basis.spin().s();
    let n = basis.lattice().len();
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((i, j, 2.0));
        }
    }
    spin_dot(basis, &pairs, n as f64 * s * (s + 1.0))
}

/// `K = T - H` (open boundaries) together with the diagonal majorant
/// `1/2 sum_bonds (4 n_x n_y + n_x(n_x-1) + n_y(n_y-1))`.
pub fn interaction_split(basis: &SectorBasis) -> (SparseSymmetricOperator, SparseSymmetricOperator) {
    let k = free_boson_operator(basis, Boundary::Open).sub(&heisenberg_operator(basis, Boundary::Open));
    let bonds = basis.lattice().bonds();
    let diag: Vec<f64> = basis
        .iter()
        .map(|occ| {
            0.5 * bonds
                .iter()
                .map(|&(x, y)| {
                    let (nx, ny) = (occ[x] as f64, occ[y] as f64);
                    4.0 * nx * ny + nx * (nx - 1.0) + ny * (ny - 1.0)
                })
                .sum::<f64>()
        })
        .collect();
    (k, SparseSymmetricOperator::from_diagonal(&diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LatticeBox, SpinValue};

    fn basis(dim: usize, side: usize, two_s: u32, n: usize) -> SectorBasis {
        SectorBasis::new(&LatticeBox::new(dim, side).unwrap(), SpinValue::new(two_s).unwrap(), n).unwrap()
    }

    #[test]
    fn one_particle_is_laplacian() {
        let b = basis(1, 4, 3, 1);
        let h = bosonic_operator(&b).to_dense();
        let s = 1.5;
        for i in 0..4usize {
            for j in 0..4 {
                let expect = if i == j {
                    s * if i == 0 || i == 3 { 1.0 } else { 2.0 }
                } else if i.abs_diff(j) == 1 {
                    -s
                } else {
                    0.0
                };
                assert!((h[(i, j)] - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn constructions_agree() {
        for (dim, side) in [(1, 4), (2, 2)] {
            for two_s in 1..=3 {
                for n in 0..=3 {
                    let b = basis(dim, side, two_s, n);
                    let d = heisenberg_operator(&b, Boundary::Open).max_abs_diff(&bosonic_operator(&b));
                    assert!(d <= 1e-12, "dim {dim} 2S {two_s} N {n}: {d}");
                }
            }
        }
    }

    #[test]
    fn interaction_vanishes_below_two_particles() {
        for n in 0..=1 {
            let (k, kb) = interaction_split(&basis(2, 2, 2, n));
            assert_eq!(k.nnz(), 0);
            assert_eq!(kb.nnz(), 0);
        }
        let (k, kb) = interaction_split(&basis(1, 4, 2, 2));
        assert!(k.nnz() > 0);
        assert!(kb.is_diagonal());
    }

    #[test]
    fn vacuum_casimir() {
        let b = basis(2, 2, 1, 0);
        let c = casimir_operator(&b);
        assert_eq!(c.dimension(), 1);
        assert!((c.get(0, 0) - 2.0 * 3.0).abs() < 1e-12);
    }
}
