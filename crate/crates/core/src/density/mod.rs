//! Two-particle densities of eigenstates and the inequalities they obey.
//! The differential inequality comes in direct, reflected and iterated
//! forms; flatness near the maximum and the sup-to-mass ratio sit beside it.

mod inequality;
mod iterate;
mod reflect;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ed::{gap_bound_report, spectrum, InequalityCertificate};
use crate::model::{heisenberg_operator, Boundary, LatticeBox, SectorBasis, SpinValue};
use crate::spinwave::MeasuredConstants;
use crate::{Error, Result};

pub use inequality::{diff_inequality_parts, diff_inequality_slack, flatness_check, FlatnessRecord, FlatnessReport};
pub use iterate::{assembled_bound, iterated_walk_bound, walk_rule_steps, AssembledBound, WalkBoundReport, DEFAULT_EPSILON};
pub use reflect::{reflect_extend, reflection_identity_check, ReflectedField};

/// Eigen-residual above which a state is not treated as an eigenstate.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-8;

/// `rho(x1, x2) = <Psi| a+_x1 a+_x2 a_x2 a_x1 |Psi>` on a box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoParticleDensity {
    pub dim: usize,
    pub side: usize,
    pub two_s: u32,
    pub particles: usize,
    /// Row `x1`, column `x2`.
    pub values: DMatrix<f64>,
    /// Energy of the source state.
    pub energy: f64,
    /// `||H Psi - E Psi||`, when known.
    pub residual: Option<f64>,
    pub norm_1: f64,
    pub norm_inf: f64,
}

impl TwoParticleDensity {
    pub fn lattice(&self) -> LatticeBox {
        LatticeBox::new(self.dim, self.side).expect("density built from a valid box")
    }

    pub fn spin(&self) -> SpinValue {
        SpinValue::new(self.two_s).expect("density built from a valid spin")
    }

    pub fn sites(&self) -> usize {
        self.values.nrows()
    }

    /// `sum rho - N(N-1)`.
    pub fn sum_rule_error(&self) -> f64 {
        let n = self.particles as f64;
        self.values.sum() - n * (n - 1.0)
    }

    fn require_eigenstate(&self) -> Result<()> {
        match self.residual {
            Some(r) if r > EIGEN_RESIDUAL_TOL => Err(Error::Precondition(format!(
                "source state is not an eigenstate (residual {r:.2e} > {EIGEN_RESIDUAL_TOL:.0e})"
            ))),
            _ => Ok(()),
        }
    }
}

/// Two-particle density of `state`, given in the occupation basis `basis`.
pub fn two_particle_density(state: &[f64], basis: &SectorBasis, energy: f64) -> Result<TwoParticleDensity> {
    if state.len() != basis.len() {
        return Err(Error::invalid(format!("state has {} amplitudes, basis has {} states", state.len(), basis.len())));
    }
    let norm: f64 = state.iter().map(|c| c * c).sum();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::invalid(format!("state not normalized (norm^2 = {norm})")));
    }
    let n = basis.lattice().len();
    let mut values = DMatrix::zeros(n, n);
    for (c, occ) in state.iter().zip(basis.iter()) {
        let w = c * c;
        if w == 0.0 {
            continue;
        }
        for x1 in 0..n {
            let n1 = occ[x1] as f64;
            if n1 == 0.0 {
                continue;
            }
            for x2 in 0..n {
                let n2 = occ[x2] as f64 - if x1 == x2 { 1.0 } else { 0.0 };
                values[(x1, x2)] += w * n1 * n2;
            }
        }
    }
    let lattice = basis.lattice();
    Ok(TwoParticleDensity {
        dim: lattice.dim(),
        side: lattice.side(),
        two_s: basis.spin().two_s(),
        particles: basis.total_n(),
        norm_1: values.sum(),
        norm_inf: values.max(),
        values,
        energy,
        residual: None,
    })
}

/// Densities of the eigenstates of the open-boundary Heisenberg Hamiltonian
/// in sector `n`, each with its eigen-residual. `count` limits the number
/// of states (lowest first).
pub fn eigenstate_densities(
    lattice: &LatticeBox,
    spin: SpinValue,
    n: usize,
    count: Option<usize>,
) -> Result<Vec<TwoParticleDensity>> {
    let basis = SectorBasis::new(lattice, spin, n)?;
    let op = heisenberg_operator(&basis, Boundary::Open);
    let spec = spectrum(&op, true, count)?;
    let take = count.unwrap_or(spec.eigenvalues.len()).min(spec.eigenvalues.len());
    (0..take)
        .map(|i| {
            let v = spec.vector(i).expect("vectors requested");
            let e = spec.eigenvalues[i];
            let hv = op.apply(&v);
            let residual = hv.iter().zip(&v).map(|(h, x)| (h - e * x).powi(2)).sum::<f64>().sqrt();
            let mut rho = two_particle_density(&v, &basis, e)?;
            rho.residual = Some(residual);
            Ok(rho)
        })
        .collect()
}

/// `sigma` with `rho = sigma (1 - delta_{x1 x2} / (2S))`; zero diagonal for
/// `S = 1/2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaDensity {
    pub dim: usize,
    pub side: usize,
    pub two_s: u32,
    pub values: DMatrix<f64>,
    pub energy: f64,
    pub norm_1: f64,
    pub norm_inf: f64,
}

impl SigmaDensity {
    pub fn lattice(&self) -> LatticeBox {
        LatticeBox::new(self.dim, self.side).expect("density built from a valid box")
    }

    pub fn spin(&self) -> SpinValue {
        SpinValue::new(self.two_s).expect("density built from a valid spin")
    }

    /// Back to `rho`.
    pub fn to_rho(&self) -> DMatrix<f64> {
        let mut rho = self.values.clone();
        let factor = 1.0 - 1.0 / self.two_s as f64;
        for i in 0..rho.nrows() {
            rho[(i, i)] *= factor;
        }
        rho
    }
}

pub fn sigma_transform(rho: &TwoParticleDensity, spin: SpinValue) -> SigmaDensity {
    let mut values = rho.values.clone();
    let factor = 1.0 - 1.0 / spin.two_s() as f64;
    for i in 0..values.nrows() {
        values[(i, i)] = if spin.two_s() == 1 { 0.0 } else { values[(i, i)] / factor };
    }
    SigmaDensity {
        dim: rho.dim,
        side: rho.side,
        two_s: spin.two_s(),
        norm_1: values.sum(),
        norm_inf: values.max(),
        values,
        energy: rho.energy,
    }
}

/// `||rho||_inf / (||rho||_1 max(E^3/S^3, l^{-6}))`; `None` when `rho = 0`.
pub fn sup_ratio(rho: &TwoParticleDensity, ell: usize, spin: SpinValue) -> Option<f64> {
    if !(rho.norm_1 > 0.0) || ell == 0 {
        return None;
    }
    let scale = (rho.energy.max(0.0) / spin.s()).powi(3).max((ell as f64).powi(-6));
    Some(rho.norm_inf / (rho.norm_1 * scale))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupRatioSurvey {
    pub states: usize,
    pub not_applicable: usize,
    pub max_ratio: f64,
    /// Energy of the maximizing state.
    pub witness_energy: f64,
}

/// Largest sup ratio over the sector-`n` eigenstates of a box.
pub fn sup_ratio_survey(lattice: &LatticeBox, spin: SpinValue, n: usize) -> Result<SupRatioSurvey> {
    let densities = eigenstate_densities(lattice, spin, n, None)?;
    let mut survey = SupRatioSurvey { states: densities.len(), not_applicable: 0, max_ratio: 0.0, witness_energy: f64::NAN };
    for rho in &densities {
        match sup_ratio(rho, lattice.side(), spin) {
            Some(r) if r > survey.max_ratio => {
                survey.max_ratio = r;
                survey.witness_energy = rho.energy;
            }
            Some(_) => {}
            None => survey.not_applicable += 1,
        }
    }
    Ok(survey)
}

/// Constants of the lower bound read off the `2x2x2` box at `S = 1/2`:
/// the smallest gap ratio and the largest sup ratio over two-particle
/// eigenstates.
pub fn measure_constants() -> Result<MeasuredConstants> {
    let lattice = LatticeBox::new(3, 2)?;
    let spin = SpinValue::half();
    let gap = gap_bound_report(&lattice, spin)?;
    let survey = sup_ratio_survey(&lattice, spin, 2)?;
    MeasuredConstants::new(
        gap.min_ratio,
        survey.max_ratio,
        format!("2x2x2 box, S=1/2: gap ratio minimum, sup ratio maximum over {} states with N=2", survey.states),
    )
}

/// Sum-rule and symmetry checks of a density, with entries nonnegative.
pub fn density_invariants(rho: &TwoParticleDensity) -> InequalityCertificate {
    let asym = (&rho.values - rho.values.transpose()).abs().max();
    let min = rho.values.min();
    let sum_err = rho.sum_rule_error().abs();
    let slack = (1e-9 - asym).min(1e-9 - sum_err).min(min + 1e-12);
    InequalityCertificate::new(
        "density_invariants",
        slack,
        0.0,
        format!("N={} E={:.6e}", rho.particles, rho.energy),
    )
    .with_note(format!("asymmetry {asym:.1e}, sum rule error {sum_err:.1e}, min entry {min:.1e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_particle_density_vanishes() {
        let l = LatticeBox::new(1, 4).unwrap();
        for rho in eigenstate_densities(&l, SpinValue::half(), 1, None).unwrap() {
            assert_eq!(rho.norm_1, 0.0);
            assert!(sup_ratio(&rho, 4, SpinValue::half()).is_none());
        }
    }

    #[test]
    fn sum_rule_and_symmetry() {
        let l = LatticeBox::new(2, 2).unwrap();
        for two_s in [1, 2] {
            let spin = SpinValue::new(two_s).unwrap();
            for n in 2..=3 {
                for rho in eigenstate_densities(&l, spin, n, None).unwrap() {
                    assert!(density_invariants(&rho).passed);
                    assert!(rho.residual.unwrap() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn chain_ground_state_is_uniform_pair() {
        // The lowest N=2 state of the open 4-chain is the fully symmetric
        // one at E=0: amplitude 1/sqrt(6) on each of the six pairs.
        let l = LatticeBox::new(1, 4).unwrap();
        let rho = &eigenstate_densities(&l, SpinValue::half(), 2, Some(1)).unwrap()[0];
        assert!(rho.energy.abs() < 1e-12);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 0.0 } else { 1.0 / 6.0 };
                assert!((rho.values[(i, j)] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sigma_conventions() {
        let l = LatticeBox::new(1, 3).unwrap();
        let spin = SpinValue::new(2).unwrap();
        let rho = &eigenstate_densities(&l, spin, 2, None).unwrap()[2];
        let sigma = sigma_transform(rho, spin);
        for i in 0..3 {
            assert!((sigma.values[(i, i)] - 2.0 * rho.values[(i, i)]).abs() < 1e-15);
            for j in 0..3 {
                if i != j {
                    assert_eq!(sigma.values[(i, j)], rho.values[(i, j)]);
                }
            }
        }
        assert!((sigma.to_rho() - &rho.values).abs().max() < 1e-15);
        let half = SpinValue::half();
        let rho = &eigenstate_densities(&l, half, 2, None).unwrap()[0];
        let sigma = sigma_transform(rho, half);
        assert_eq!(sigma.values, rho.values);
    }

    #[test]
    fn rejects_mismatched_state() {
        let l = LatticeBox::new(1, 3).unwrap();
        let basis = SectorBasis::new(&l, SpinValue::half(), 2).unwrap();
        assert!(two_particle_density(&[1.0], &basis, 0.0).is_err());
        assert!(two_particle_density(&[1.0, 1.0, 1.0], &basis, 0.0).is_err());
    }

    #[test]
    fn norm_inequality_bounds_ratio() {
        let l = LatticeBox::new(1, 4).unwrap();
        let spin = SpinValue::half();
        for rho in eigenstate_densities(&l, spin, 2, None).unwrap() {
            let scale = (rho.energy / spin.s()).powi(3).max(4f64.powi(-6));
            let r = sup_ratio(&rho, 4, spin).unwrap();
            assert!(r <= 1.0 / scale + 1e-12);
        }
    }
}
