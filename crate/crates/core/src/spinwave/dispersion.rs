//! Momentum grids of the box Laplacian and free-boson free energies.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::SpinValue;
use crate::numeric::pairwise_sum;
use crate::{Error, Result};

/// Largest grid materialized point by point.
pub const GRID_BUDGET: usize = 1 << 21;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridBoundary {
    /// Momenta `pi j / (l+1)`, `j = 1..l`.
    Dirichlet,
    /// Momenta `pi j / l`, `j = 0..l-1`.
    Neumann,
}

/// One-dimensional momenta of the box Laplacian.
pub fn momenta_1d(side: usize, boundary: GridBoundary) -> Vec<f64> {
    match boundary {
        GridBoundary::Dirichlet => (1..=side).map(|j| PI * j as f64 / (side + 1) as f64).collect(),
        GridBoundary::Neumann => (0..side).map(|j| PI * j as f64 / side as f64).collect(),
    }
}

/// `2(1 - cos p)`, written as `4 sin^2(p/2)` to keep small values exact.
pub fn energy_1d(p: f64) -> f64 {
    4.0 * (0.5 * p).sin().powi(2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionGrid {
    pub boundary: GridBoundary,
    pub dim: usize,
    pub side: usize,
    /// Row-major, last component fastest.
    pub momenta: Vec<Vec<f64>>,
    pub energies: Vec<f64>,
}

pub fn dispersion_grid(side: usize, dim: usize, boundary: GridBoundary) -> Result<DispersionGrid> {
    if side == 0 || !(1..=3).contains(&dim) {
        return Err(Error::invalid(format!("grid needs side >= 1 and dim in 1..=3 (got {side}, {dim})")));
    }
    let count = side.checked_pow(dim as u32).filter(|&c| c <= GRID_BUDGET);
    let Some(count) = count else {
        return Err(Error::Budget { what: "dispersion grid points".into(), required: side.saturating_pow(dim as u32), budget: GRID_BUDGET });
    };
    let axis = momenta_1d(side, boundary);
    let mut momenta = Vec::with_capacity(count);
    let mut energies = Vec::with_capacity(count);
    for idx in 0..count {
        let mut rest = idx;
        let mut p = vec![0.0; dim];
        for j in (0..dim).rev() {
            p[j] = axis[rest % side];
            rest /= side;
        }
        energies.push(p.iter().map(|&c| energy_1d(c)).sum());
        momenta.push(p);
    }
    Ok(DispersionGrid { boundary, dim, side, momenta, energies })
}

impl DispersionGrid {
    /// Dirichlet eigenfunction `[2/(l+1)]^{dim/2} prod_j sin((x_j + 1) p_j)`;
    /// `None` on Neumann grids.
    pub fn eigenfunction(&self, p_index: usize, x: &[usize]) -> Option<f64> {
        if self.boundary != GridBoundary::Dirichlet || x.len() != self.dim {
            return None;
        }
        let p = self.momenta.get(p_index)?;
        let norm = (2.0 / (self.side + 1) as f64).powf(self.dim as f64 / 2.0);
        Some(norm * p.iter().zip(x).map(|(&pj, &xj)| ((xj + 1) as f64 * pj).sin()).product::<f64>())
    }
}

/// `ln(1 - e^{-x})` for `x > 0`.
fn log_one_minus_exp(x: f64) -> f64 {
    (-(-x).exp_m1()).ln()
}

/// `(beta l^dim)^{-1} sum_p ln(1 - e^{-beta S eps(p)})`, skipping the zero
/// mode of Neumann grids.
pub fn free_boson_free_energy(grid: &DispersionGrid, beta: f64, spin: SpinValue) -> Result<f64> {
    let bs = beta * spin.s();
    if !(bs > 0.0 && bs.is_finite()) {
        return Err(Error::invalid(format!("beta S must be positive and finite (got {bs})")));
    }
    let terms: Vec<f64> = grid.energies.iter().filter(|&&e| e > 0.0).map(|&e| log_one_minus_exp(bs * e)).collect();
    Ok(pairwise_sum(&terms) / (beta * grid.energies.len() as f64))
}

/// Largest cube summed term by term in [`cube_log_sum`].
pub const DIRECT_SUM_BUDGET: usize = 1 << 27;

/// `l^{-dim} sum_p ln(1 - e^{-bs eps(p)})` on a cube grid without
/// materializing it: a direct product sum up to [`DIRECT_SUM_BUDGET`] points,
/// otherwise the series `-sum_k k^{-1} (sum_j e^{-k bs eps_j})^dim` (zero
/// mode removed for Neumann).
pub fn cube_log_sum(side: usize, dim: usize, boundary: GridBoundary, bs: f64) -> Result<f64> {
    if side == 0 || !(1..=3).contains(&dim) || !(bs > 0.0) {
        return Err(Error::invalid("cube sum needs side >= 1, dim in 1..=3, bs > 0"));
    }
    let eps: Vec<f64> = momenta_1d(side, boundary).into_iter().map(energy_1d).collect();
    let volume = (side as f64).powi(dim as i32);
    match side.checked_pow(dim as u32) {
        Some(n) if n <= DIRECT_SUM_BUDGET => Ok(direct_log_sum(&eps, dim, bs) / volume),
        _ => Ok(series_log_sum(&eps, dim, bs)? / volume),
    }
}

/// Term-by-term product sum, parallel over the first axis.
fn direct_log_sum(eps: &[f64], dim: usize, bs: f64) -> f64 {
    let term = |e: f64| if e > 0.0 { log_one_minus_exp(bs * e) } else { 0.0 };
    let rows: Vec<f64> = eps
        .par_iter()
        .map(|&a| match dim {
            1 => term(a),
            2 => pairwise_sum(&eps.iter().map(|&b| term(a + b)).collect::<Vec<_>>()),
            _ => {
                let row: Vec<f64> = eps
                    .iter()
                    .map(|&b| pairwise_sum(&eps.iter().map(|&c| term(a + b + c)).collect::<Vec<_>>()))
                    .collect();
                pairwise_sum(&row)
            }
        })
        .collect();
    pairwise_sum(&rows)
}

/// `sum_{p != 0} ln(1 - e^{-bs eps(p)})` over the product grid with axis
/// energies `eps` (ascending), by the k-series.
pub(crate) fn series_log_sum(eps: &[f64], dim: usize, bs: f64) -> Result<f64> {
    let positive: Vec<f64> = eps.iter().copied().filter(|&e| e > 0.0).collect();
    let has_zero = positive.len() < eps.len();
    let e_min = positive[0];
    let mut terms = Vec::new();
    let mut acc = 0.0;
    // Past x0 > 1 consecutive terms shrink at least by e^{-bs e_min}, so the
    // remainder is at most term / (1 - e^{-bs e_min}).
    let geometric = -(-bs * e_min).exp_m1();
    for k in 1usize.. {
        let x0 = k as f64 * bs * e_min;
        // r = sum over nonzero modes; stop once terms are negligible.
        let mut r = 0.0;
        for &e in &positive {
            let x = k as f64 * bs * e;
            if x > x0 + 45.0 {
                break;
            }
            r += (-x).exp();
        }
        let power = if has_zero {
            // (1 + r)^dim - 1 without cancellation
            (1..=dim).map(|i| binomial(dim, i) * r.powi(i as i32)).sum::<f64>()
        } else {
            r.powi(dim as i32)
        };
        let term = -power / k as f64;
        terms.push(term);
        acc += term;
        if x0 > 1.0 && term.abs() < 1e-18 * geometric * acc.abs() {
            break;
        }
        if k > 100_000_000 {
            return Err(Error::NotConverged { what: "boson k-series".into(), residual: term });
        }
    }
    Ok(pairwise_sum(&terms))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode() {
        let g = dispersion_grid(1, 1, GridBoundary::Dirichlet).unwrap();
        assert!((g.momenta[0][0] - PI / 2.0).abs() < 1e-15);
        assert!((g.energies[0] - 2.0).abs() < 1e-15);
        let beta = 1.3;
        let f = free_boson_free_energy(&g, beta, SpinValue::half()).unwrap();
        assert!((f - (1.0 - (-2.0 * beta * 0.5f64).exp()).ln() / beta).abs() < 1e-15);
    }

    #[test]
    fn grid_extremes() {
        let n = dispersion_grid(4, 3, GridBoundary::Neumann).unwrap();
        assert_eq!(n.energies[0], 0.0);
        assert_eq!(n.energies.len(), 64);
        let max = [PI; 3].iter().map(|&p| energy_1d(p)).sum::<f64>();
        assert!((max - 12.0).abs() < 1e-14);
        assert!(n.energies.iter().all(|&e| (0.0..=12.0).contains(&e)));
    }

    #[test]
    fn dirichlet_eigenfunctions_are_orthonormal() {
        let g = dispersion_grid(4, 2, GridBoundary::Dirichlet).unwrap();
        for a in 0..16 {
            for b in 0..16 {
                let mut s = 0.0;
                for x in 0..4 {
                    for y in 0..4 {
                        s += g.eigenfunction(a, &[x, y]).unwrap() * g.eigenfunction(b, &[x, y]).unwrap();
                    }
                }
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn free_energy_increases_with_beta() {
        let g = dispersion_grid(5, 3, GridBoundary::Dirichlet).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for beta in [0.5, 1.0, 2.0, 4.0] {
            let f = free_boson_free_energy(&g, beta, SpinValue::half()).unwrap();
            assert!(f <= 0.0 && f > prev);
            prev = f;
        }
    }

    #[test]
    fn series_matches_direct_sum() {
        for boundary in [GridBoundary::Dirichlet, GridBoundary::Neumann] {
            for bs in [1.0, 5.0, 50.0] {
                for (side, dim) in [(40, 3), (60, 2), (100, 1)] {
                    let grid_sum = {
                        let g = dispersion_grid(side, dim, boundary).unwrap();
                        let t: Vec<f64> = g.energies.iter().filter(|&&e| e > 0.0).map(|&e| log_one_minus_exp(bs * e)).collect();
                        pairwise_sum(&t) / g.energies.len() as f64
                    };
                    let eps: Vec<f64> = momenta_1d(side, boundary).into_iter().map(energy_1d).collect();
                    let series = series_log_sum(&eps, dim, bs).unwrap() / (side as f64).powi(dim as i32);
                    assert!((series - grid_sum).abs() < 1e-12 * grid_sum.abs(), "{boundary:?} {bs} {side} {dim}: {series} {grid_sum}");
                }
            }
        }
    }
}
