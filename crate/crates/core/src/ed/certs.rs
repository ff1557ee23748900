use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::certificate::InequalityCertificate;
use super::eigen::{min_eigenvalue, DENSE_THRESHOLD};
use super::thermal::{thermal_summaries, THERMAL_BUDGET};
use crate::model::{
    free_boson_operator, heisenberg_operator, interaction_split, pair_operator, Boundary, LatticeBox, SectorBasis,
    SparseSymmetricOperator, SpinValue,
};
use crate::{Error, Result};

/// Tolerance on minimum eigenvalues of operator differences.
const OPERATOR_TOL: f64 = 1e-10;

fn dense_checked(op: &SparseSymmetricOperator) -> Result<DMatrix<f64>> {
    if op.dimension() > DENSE_THRESHOLD {
        return Err(Error::Budget { what: "dense check".into(), required: op.dimension(), budget: DENSE_THRESHOLD });
    }
    Ok(op.to_dense())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeSiteReport {
    /// Minimum eigenvalue on the full three-spin space.
    pub matrix: InequalityCertificate,
    /// The scalar sufficient condition over `t = 0..2S`.
    pub scalar: InequalityCertificate,
}

impl ThreeSiteReport {
    pub fn combined(&self) -> InequalityCertificate {
        InequalityCertificate::merge("three-site", &[self.matrix.clone(), self.scalar.clone()])
    }
}

/// `(S^2 - S_x.S_y) + (S^2 - S_y.S_z) - 1/2 (S^2 - S_x.S_z) >= 0` on three spins.
pub fn three_site_check(spin: SpinValue) -> Result<ThreeSiteReport> {
    let chain = LatticeBox::new(1, 3)?;
    let pairs = [(0, 1, 1.0), (1, 2, 1.0), (0, 2, -0.5)];
    let mut worst = (f64::INFINITY, 0);
    for n in 0..=3 * spin.two_s() as usize {
        let basis = SectorBasis::new(&chain, spin, n)?;
        let m = min_eigenvalue(dense_checked(&pair_operator(&basis, &pairs))?);
        if m < worst.0 {
            worst = (m, n);
        }
    }
    let matrix = InequalityCertificate::new("three-site-matrix", worst.0, OPERATOR_TOL, format!("N={}", worst.1));
    let s = spin.s();
    let mut scalar_worst = (f64::INFINITY, 0);
    for t2 in 0..=spin.two_s() {
        let t = t2 as f64;
        let v = s * s - s / 2.0 - s * t + t * (t + 1.0) / 4.0;
        if v < scalar_worst.0 {
            scalar_worst = (v, t2);
        }
    }
    let scalar =
        InequalityCertificate::new("three-site-scalar", scalar_worst.0, OPERATOR_TOL, format!("t={}", scalar_worst.1));
    Ok(ThreeSiteReport { matrix, scalar })
}

/// `K <= 1/2 sum_bonds (4 n_x n_y + n_x(n_x-1) + n_y(n_y-1))` on one sector.
pub fn k_bound_check(lattice: &LatticeBox, spin: SpinValue, total_n: usize) -> Result<InequalityCertificate> {
    let basis = SectorBasis::new(lattice, spin, total_n)?;
    let (k, bound) = interaction_split(&basis);
    let m = min_eigenvalue(dense_checked(&bound.sub(&k))?);
    Ok(InequalityCertificate::new("k-bound", m, OPERATOR_TOL, format!("N={total_n}")))
}

/// On the hard-core subspace, `P H^D P <= T + (2S-1) sum_bonds n_x n_y`,
/// where `T` carries the Dirichlet boundary term.
pub fn hardcore_thp_check(lattice: &LatticeBox, spin: SpinValue) -> Result<InequalityCertificate> {
    let sites = lattice.len();
    let total = 1usize.checked_shl(sites as u32).unwrap_or(usize::MAX);
    if sites >= usize::BITS as usize || total > THERMAL_BUDGET {
        return Err(Error::Budget { what: "hard-core space".into(), required: total, budget: THERMAL_BUDGET });
    }
    let coupling = spin.two_s() as f64 - 1.0;
    let bonds = lattice.bonds();
    let mut worst = (f64::INFINITY, 0);
    for n in 0..=sites {
        let basis = SectorBasis::hard_core(lattice, spin, n)?;
        let t = free_boson_operator(&basis, Boundary::DirichletField);
        let h = heisenberg_operator(&basis, Boundary::DirichletField);
        let pairs: Vec<f64> = basis
            .iter()
            .map(|occ| coupling * bonds.iter().map(|&(x, y)| (occ[x] * occ[y]) as f64).sum::<f64>())
            .collect();
        let diff = t.combine(1.0, &SparseSymmetricOperator::from_diagonal(&pairs), 1.0).sub(&h);
        let m = min_eigenvalue(dense_checked(&diff)?);
        if m < worst.0 {
            worst = (m, n);
        }
    }
    Ok(InequalityCertificate::new("hard-core-comparison", worst.0, OPERATOR_TOL, format!("N={}", worst.1)))
}

/// `f(S, beta, Lambda_{k l}) >= f(S, beta, Lambda_l)` for each beta.
pub fn subadditivity_check(
    spin: SpinValue,
    betas: &[f64],
    ell: usize,
    k: usize,
    dim: usize,
) -> Result<InequalityCertificate> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let small = thermal_summaries(&LatticeBox::new(dim, ell)?, spin, betas)?;
    let large = thermal_summaries(&LatticeBox::new(dim, k * ell)?, spin, betas)?;
    let mut worst = (f64::INFINITY, f64::NAN);
    for (a, b) in small.iter().zip(&large) {
        let slack = b.free_energy_per_site - a.free_energy_per_site;
        if slack < worst.0 {
            worst = (slack, a.beta);
        }
    }
    Ok(InequalityCertificate::new("subadditivity", worst.0, 1e-10, format!("beta={}", worst.1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_form_vanishes_at_top() {
        for two_s in 1..=5 {
            let r = three_site_check(SpinValue::new(two_s).unwrap()).unwrap();
            assert!(r.scalar.min_slack.abs() < 1e-12);
            assert!(r.matrix.passed, "{:?}", r.matrix);
        }
    }

    #[test]
    fn k_bound_trivial_sectors() {
        let l = LatticeBox::new(1, 4).unwrap();
        let c = k_bound_check(&l, SpinValue::half(), 1).unwrap();
        assert_eq!(c.min_slack, 0.0);
    }
}
