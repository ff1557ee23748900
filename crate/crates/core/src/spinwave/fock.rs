//! Exact Fock-space traces of the free magnon Hamiltonian on small boxes,
//! restricted to hard-core configurations (at most one boson per site).
//!
//! For `T = sum_xy h_xy a_x^+ a_y` with `h = S(-Laplacian)` (Dirichlet) and
//! single-site occupation sets `A`, `B` of equal size,
//! `<A| e^{-beta T} |B> = per(M[A, B])` with `M = e^{-beta h}`.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::constants::zeta_half_integers;
use super::dispersion::{dispersion_grid, GridBoundary};
use crate::ed::InequalityCertificate;
use crate::kernels::heat_kernel_diag;
use crate::model::{LatticeBox, SpinValue};
use crate::numeric::pairwise_sum;
use crate::{Error, Result};

/// Largest matrix whose permanent is computed.
pub const PERMANENT_BUDGET: usize = 12;
/// Largest box for the projected entropy check.
pub const ENTROPY_BUDGET: usize = 10;

/// Permanent by Ryser's formula with Gray-code subset order.
pub fn permanent(a: &DMatrix<f64>) -> Result<f64> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::invalid(format!("permanent needs a square matrix (got {}x{})", n, a.ncols())));
    }
    if n > PERMANENT_BUDGET {
        return Err(Error::Budget { what: "permanent size".into(), required: n, budget: PERMANENT_BUDGET });
    }
    Ok(ryser(n, |i, j| a[(i, j)]))
}

fn ryser(n: usize, entry: impl Fn(usize, usize) -> f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut sums = [0.0f64; PERMANENT_BUDGET];
    let mut total = 0.0;
    for g in 1u32..(1 << n) {
        let j = g.trailing_zeros() as usize;
        let gray = g ^ (g >> 1);
        let sign_in = if gray & (1 << j) != 0 { 1.0 } else { -1.0 };
        for (i, s) in sums.iter_mut().enumerate().take(n) {
            *s += sign_in * entry(i, j);
        }
        let prod: f64 = sums[..n].iter().product();
        if gray.count_ones() % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
    }
    if n % 2 == 1 {
        -total
    } else {
        total
    }
}

/// `S(-Laplacian)` with Dirichlet conditions: `2 dim S` on the diagonal and
/// `-S` between neighbours.
pub fn dirichlet_hopping(lattice: &LatticeBox, spin: SpinValue) -> DMatrix<f64> {
    let n = lattice.len();
    let s = spin.s();
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = 2.0 * lattice.dim() as f64 * s;
    }
    for &(a, b) in lattice.bonds() {
        h[(a, b)] = -s;
        h[(b, a)] = -s;
    }
    h
}

/// `f(h)` for symmetric `h` through its eigendecomposition.
fn matrix_function(h: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(h.clone());
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..(1 << n))
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|&i| m & (1 << i) != 0).collect())
        .collect()
}

fn sub_permanent(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> f64 {
    ryser(rows.len(), |i, j| m[(rows[i], cols[j])])
}

/// `(1 - e^{-beta S eps})^{-1}` multiplied over the Dirichlet modes.
fn full_trace(lattice: &LatticeBox, bs: f64) -> Result<(f64, Vec<f64>)> {
    let grid = dispersion_grid(lattice.side(), lattice.dim(), GridBoundary::Dirichlet)?;
    let log = pairwise_sum(&grid.energies.iter().map(|&e| -(-(-bs * e).exp_m1()).ln()).collect::<Vec<_>>());
    Ok((log.exp(), grid.energies))
}

fn validate(lattice: &LatticeBox, beta: f64, spin: SpinValue, budget: usize) -> Result<f64> {
    if lattice.len() > budget {
        return Err(Error::Budget { what: "sites for exact Fock traces".into(), required: lattice.len(), budget });
    }
    let bs = beta * spin.s();
    if !(bs > 0.0 && bs.is_finite()) {
        return Err(Error::invalid(format!("beta S must be positive and finite (got {bs})")));
    }
    Ok(bs)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardcoreReport {
    pub sites: usize,
    pub beta: f64,
    pub two_s: u32,
    /// `Tr P e^{-beta T} = sum_A per(M_A)`.
    pub projected_trace: f64,
    /// `Tr e^{-beta T} = prod_p (1 - e^{-beta S eps(p)})^{-1}`.
    pub full_trace: f64,
    pub ratio: f64,
    /// `1 - C3 |Lambda| / (beta S)^3`, on three-dimensional boxes.
    pub lower_bound: Option<f64>,
    pub certificate: Option<InequalityCertificate>,
}

/// Fraction of the free-boson partition function carried by hard-core
/// configurations.
pub fn hardcore_ratio(lattice: &LatticeBox, beta: f64, spin: SpinValue) -> Result<HardcoreReport> {
    let bs = validate(lattice, beta, spin, PERMANENT_BUDGET)?;
    let n = lattice.len();
    let m = matrix_function(&dirichlet_hopping(lattice, spin), |e| (-beta * e).exp());
    let per: Vec<f64> = (0u32..(1 << n))
        .into_par_iter()
        .map(|mask| {
            let a: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            sub_permanent(&m, &a, &a)
        })
        .collect();
    let projected_trace = pairwise_sum(&per);
    let (full_trace, _) = full_trace(lattice, bs)?;
    let ratio = projected_trace / full_trace;
    let (lower_bound, certificate) = if lattice.dim() == 3 {
        let c3 = 8.0 / std::f64::consts::PI.powi(3) * zeta_half_integers().0.powi(2);
        let bound = 1.0 - c3 * n as f64 / bs.powi(3);
        let cert = InequalityCertificate::new(
            "hardcore_ratio",
            ratio - bound,
            1e-12,
            format!("{n} sites, beta S = {bs}"),
        )
        .with_note(format!("ratio {ratio:.12}, bound {bound:.6}"));
        (Some(bound), Some(cert))
    } else {
        (None, None)
    };
    Ok(HardcoreReport { sites: n, beta, two_s: spin.two_s(), projected_trace, full_trace, ratio, lower_bound, certificate })
}

/// `Tr (P T e^{-beta T}) = -d/d beta Tr P e^{-beta T}`, as
/// `sum_A sum_{i in A} per(M_A with row i replaced by (hM)_{i,A})`.
pub fn projected_energy_trace(lattice: &LatticeBox, beta: f64, spin: SpinValue) -> Result<f64> {
    validate(lattice, beta, spin, PERMANENT_BUDGET)?;
    let h = dirichlet_hopping(lattice, spin);
    let m = matrix_function(&h, |e| (-beta * e).exp());
    let hm = matrix_function(&h, |e| e * (-beta * e).exp());
    Ok(energy_trace(&m, &hm))
}

fn energy_trace(m: &DMatrix<f64>, hm: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let terms: Vec<f64> = (1u32..(1 << n))
        .into_par_iter()
        .map(|mask| {
            let a: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            let k = a.len();
            let parts: Vec<f64> = (0..k)
                .map(|r| ryser(k, |i, j| if i == r { hm[(a[i], a[j])] } else { m[(a[i], a[j])] }))
                .collect();
            pairwise_sum(&parts)
        })
        .collect();
    pairwise_sum(&terms)
}

/// `Tr Gamma ln Gamma <= -ln Tr P e^{-beta T} - beta Tr T e^{-beta T} / Z_P
/// + beta Tr T (1-P) e^{-beta T} / Z_P` for `Gamma = P e^{-beta T} P / Z_P`.
///
/// The right side is evaluated as `-ln Z_P - beta Tr(P T e^{-beta T}) / Z_P`;
/// the unprojected trace `Tr T e^{-beta T}` comes from Wick's rule.
pub fn projected_entropy_check(lattice: &LatticeBox, beta: f64, spin: SpinValue) -> Result<InequalityCertificate> {
    let bs = validate(lattice, beta, spin, ENTROPY_BUDGET)?;
    let n = lattice.len();
    let h = dirichlet_hopping(lattice, spin);
    let m = matrix_function(&h, |e| (-beta * e).exp());
    let hm = matrix_function(&h, |e| e * (-beta * e).exp());

    let blocks: Vec<DMatrix<f64>> = (0..=n)
        .into_par_iter()
        .map(|k| {
            let sets = subsets_of_size(n, k);
            DMatrix::from_fn(sets.len(), sets.len(), |a, b| sub_permanent(&m, &sets[a], &sets[b]))
        })
        .collect();
    let z_p = pairwise_sum(&blocks.iter().map(|g| g.trace()).collect::<Vec<_>>());
    let mut entropy_terms = Vec::new();
    for g in &blocks {
        for w in SymmetricEigen::new(g / z_p).eigenvalues.iter() {
            if *w > 0.0 {
                entropy_terms.push(w * w.ln());
            }
        }
    }
    let lhs = pairwise_sum(&entropy_terms);
    let x = energy_trace(&m, &hm);
    let rhs = -z_p.ln() - beta * x / z_p;

    let (z_f, energies) = full_trace(lattice, bs)?;
    let s = spin.s();
    let wick = z_f * pairwise_sum(&energies.iter().map(|&e| s * e / (bs * e).exp_m1()).collect::<Vec<_>>());
    Ok(InequalityCertificate::new("projected_entropy", rhs - lhs, 1e-9, format!("{n} sites, beta S = {bs}")).with_note(
        format!(
            "Tr G ln G = {lhs:.12e}, bound = {rhs:.12e}, Z_P = {z_p:.12e}, Tr T e^(-bT) = {wick:.6e}, Tr T(1-P) e^(-bT) = {:.6e}",
            wick - x
        ),
    ))
}

/// `e^{t Laplacian_D}(x, x) <= e^{-2 dim t} I_0(2t)^dim` for all sites and
/// the given times.
pub fn heat_kernel_domination_check(lattice: &LatticeBox, times: &[f64]) -> Result<InequalityCertificate> {
    if times.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
        return Err(Error::invalid("times must be finite and nonnegative"));
    }
    let lap = dirichlet_hopping(lattice, SpinValue::new(2)?);
    let eig = SymmetricEigen::new(lap);
    let mut worst = (f64::INFINITY, String::from("none"));
    for &t in times {
        let bound = heat_kernel_diag(t, lattice.dim() as u32);
        for x in 0..lattice.len() {
            let diag: f64 =
                (0..lattice.len()).map(|p| eig.eigenvectors[(x, p)].powi(2) * (-t * eig.eigenvalues[p]).exp()).sum();
            if bound - diag < worst.0 {
                worst = (bound - diag, format!("t={t} x={:?}", &lattice.sites()[x][..lattice.dim()]));
            }
        }
    }
    Ok(InequalityCertificate::new("heat_kernel_domination", worst.0, 1e-14, worst.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permanents_of_small_matrices() {
        assert_eq!(permanent(&DMatrix::zeros(0, 0)).unwrap(), 1.0);
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert!((permanent(&a).unwrap() - 10.0).abs() < 1e-12);
        // per(J_n) = n!
        let j = DMatrix::from_element(6, 6, 1.0);
        assert!((permanent(&j).unwrap() - 720.0).abs() < 1e-9);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 3.0, 5.0]));
        assert!((permanent(&d).unwrap() - 30.0).abs() < 1e-12);
        assert!(permanent(&DMatrix::zeros(13, 13)).is_err());
    }

    #[test]
    fn permanent_matches_expansion() {
        let a = DMatrix::from_fn(5, 5, |i, j| ((i * 7 + j * 3) % 5) as f64 + 0.5);
        let mut brute = 0.0;
        let mut perm: Vec<usize> = (0..5).collect();
        // Heap's algorithm over all permutations.
        fn heap(k: usize, p: &mut Vec<usize>, a: &DMatrix<f64>, out: &mut f64) {
            if k == 1 {
                *out += (0..p.len()).map(|i| a[(i, p[i])]).product::<f64>();
                return;
            }
            for i in 0..k {
                heap(k - 1, p, a, out);
                if k % 2 == 0 {
                    p.swap(i, k - 1);
                } else {
                    p.swap(0, k - 1);
                }
            }
        }
        heap(5, &mut perm, &a, &mut brute);
        assert!((permanent(&a).unwrap() - brute).abs() < 1e-9 * brute);
    }

    #[test]
    fn single_site_ratio() {
        let l = LatticeBox::new(1, 1).unwrap();
        let beta = 0.7;
        let r = hardcore_ratio(&l, beta, SpinValue::half()).unwrap();
        let q = (-2.0 * beta * 0.5f64).exp();
        assert!((r.ratio - (1.0 - q) * (1.0 + q)).abs() < 1e-14);
        assert!(r.certificate.is_none());
    }

    #[test]
    fn cube_ratio_obeys_bound() {
        let l = LatticeBox::new(3, 2).unwrap();
        let spin = SpinValue::half();
        for bs in [2.0, 3.0, 5.0] {
            let r = hardcore_ratio(&l, bs / spin.s(), spin).unwrap();
            assert!(r.ratio > 0.0 && r.ratio <= 1.0);
            assert!(r.certificate.unwrap().passed);
        }
    }

    #[test]
    fn energy_trace_is_derivative() {
        let l = LatticeBox::new(1, 4).unwrap();
        let spin = SpinValue::half();
        let beta = 2.0;
        let z = |b: f64| hardcore_ratio(&l, b, spin).unwrap().projected_trace;
        let d = 1e-5;
        let fd = -(z(beta + d) - z(beta - d)) / (2.0 * d);
        let x = projected_energy_trace(&l, beta, spin).unwrap();
        assert!((x - fd).abs() < 1e-8 * x.abs());
    }

    #[test]
    fn projected_entropy_holds() {
        let spin = SpinValue::half();
        let chain = LatticeBox::new(1, 4).unwrap();
        let c = projected_entropy_check(&chain, 2.0 / spin.s(), spin).unwrap();
        assert!(c.passed, "{c:?}");
        let cube = LatticeBox::new(3, 2).unwrap();
        let c = projected_entropy_check(&cube, 3.0 / spin.s(), spin).unwrap();
        assert!(c.passed, "{c:?}");
    }

    #[test]
    fn heat_kernel_is_dominated() {
        let chain = LatticeBox::new(1, 4).unwrap();
        assert!(heat_kernel_domination_check(&chain, &[0.7]).unwrap().passed);
        let cube = LatticeBox::new(3, 3).unwrap();
        assert!(heat_kernel_domination_check(&cube, &[0.0, 0.1, 1.0, 5.0]).unwrap().passed);
    }
}
