use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::certificate::InequalityCertificate;
use super::eigen::{dense_eigh, DENSE_THRESHOLD};
use super::thermal::THERMAL_BUDGET;
use crate::model::{casimir_operator, heisenberg_operator, Boundary, LatticeBox, SectorBasis, SpinValue};
use crate::{Error, Result};

/// Energies below this are treated as zero.
const ZERO_ENERGY: f64 = 1e-8;

/// An eigenstate with its sector and total-spin label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledLevel {
    pub sector_n: usize,
    pub index: usize,
    pub energy: f64,
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub gap: f64,
    /// `(energy, t)` for the ground and first excited levels.
    pub casimir_labels: Vec<(f64, f64)>,
    pub reference_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapBoundReport {
    pub certificate: InequalityCertificate,
    pub min_ratio: f64,
    pub witness: Option<LabeledLevel>,
}

fn casimir_t(c: f64) -> f64 {
    let t = 0.5 * ((1.0 + 4.0 * c.max(0.0)).sqrt() - 1.0);
    (2.0 * t).round() / 2.0
}

fn label_sector(basis: &SectorBasis) -> Vec<LabeledLevel> {
    let (energies, vectors) = dense_eigh(heisenberg_operator(basis, Boundary::Open).to_dense());
    let casimir = casimir_operator(basis).to_dense();
    let mut out = Vec::with_capacity(energies.len());
    let mut start = 0;
    while start < energies.len() {
        let mut end = start + 1;
        while end < energies.len() && energies[end] - energies[end - 1] <= 1e-8 * (1.0 + energies[end - 1].abs()) {
            end += 1;
        }
        // Diagonalize the Casimir inside the degenerate cluster.
        let v: DMatrix<f64> = vectors.columns(start, end - start).into_owned();
        let projected = v.transpose() * &casimir * &v;
        let projected = (&projected + projected.transpose()) * 0.5;
        let (cvals, _) = dense_eigh(projected);
        for (k, c) in cvals.into_iter().enumerate() {
            out.push(LabeledLevel {
                sector_n: basis.total_n(),
                index: start + k,
                energy: energies[start + k],
                t: casimir_t(c),
            });
        }
        start = end;
    }
    out
}

/// Every eigenstate of every sector with its total-spin label.
pub fn labeled_spectrum(lattice: &LatticeBox, spin: SpinValue) -> Result<Vec<LabeledLevel>> {
    let total = (spin.two_s() as usize + 1).checked_pow(lattice.len() as u32).unwrap_or(usize::MAX);
    if total > THERMAL_BUDGET {
        return Err(Error::Budget { what: "labelled spectrum".into(), required: total, budget: THERMAL_BUDGET });
    }
    let max_n = spin.two_s() as usize * lattice.len();
    let bases: Vec<SectorBasis> = (0..=max_n).map(|n| SectorBasis::new(lattice, spin, n)).collect::<Result<_>>()?;
    if let Some(big) = bases.iter().find(|b| b.len() > DENSE_THRESHOLD) {
        return Err(Error::Budget { what: "dense sector".into(), required: big.len(), budget: DENSE_THRESHOLD });
    }
    let per_sector: Vec<Vec<LabeledLevel>> = bases.par_iter().map(label_sector).collect();
    Ok(per_sector.into_iter().flatten().collect())
}

/// Smallest nonzero eigenvalue over all sectors.
pub fn spectral_gap(lattice: &LatticeBox, spin: SpinValue) -> Result<GapReport> {
    if lattice.len() < 2 {
        return Err(Error::invalid("spectral gap needs at least two sites"));
    }
    let levels = labeled_spectrum(lattice, spin)?;
    let gap = levels
        .iter()
        .map(|l| l.energy)
        .filter(|&e| e > ZERO_ENERGY)
        .fold(f64::INFINITY, f64::min);
    let cutoff = gap + 1e-8 * (1.0 + gap);
    let casimir_labels = levels.iter().filter(|l| l.energy <= cutoff).map(|l| (l.energy, l.t)).collect();
    let ell = lattice.side() as f64;
    Ok(GapReport {
        gap,
        casimir_labels,
        reference_value: 2.0 * spin.s() * (1.0 - (std::f64::consts::PI / ell).cos()),
    })
}

/// Minimum over non-maximal total spin of `l^2 E / (S (S l^dim - t))`.
pub fn gap_bound_report(lattice: &LatticeBox, spin: SpinValue) -> Result<GapBoundReport> {
    let levels = labeled_spectrum(lattice, spin)?;
    let s = spin.s();
    let t_max = s * lattice.len() as f64;
    let ell2 = (lattice.side() * lattice.side()) as f64;
    let mut best: Option<(f64, &LabeledLevel)> = None;
    for level in &levels {
        if level.t < t_max - 1e-6 {
            let ratio = ell2 * level.energy / (s * (t_max - level.t));
            if best.map_or(true, |(r, _)| ratio < r) {
                best = Some((ratio, level));
            }
        }
    }
    let (min_ratio, witness) = match best {
        Some((r, l)) => (r, Some(l.clone())),
        None => (f64::INFINITY, None),
    };
    let label = witness
        .as_ref()
        .map(|w| format!("N={} index={} E={:.6e} t={}", w.sector_n, w.index, w.energy, w.t))
        .unwrap_or_else(|| "no state below maximal spin".into());
    let mut certificate = InequalityCertificate::new("gap_ratio", min_ratio, 0.0, label);
    certificate.passed = min_ratio > 0.0;
    Ok(GapBoundReport { certificate, min_ratio, witness })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_modes_are_maximal_spin() {
        let l = LatticeBox::new(2, 2).unwrap();
        for two_s in 1..=2 {
            let spin = SpinValue::new(two_s).unwrap();
            let levels = labeled_spectrum(&l, spin).unwrap();
            let t_max = spin.s() * 4.0;
            let zeros: Vec<_> = levels.iter().filter(|l| l.energy.abs() < ZERO_ENERGY).collect();
            assert_eq!(zeros.len(), 2 * (two_s as usize * 2) + 1);
            assert!(zeros.iter().all(|l| (l.t - t_max).abs() < 1e-9));
        }
    }

    #[test]
    fn two_site_gap() {
        let l = LatticeBox::new(1, 2).unwrap();
        let g = spectral_gap(&l, SpinValue::half()).unwrap();
        assert!((g.gap - 1.0).abs() < 1e-12);
        assert!((g.reference_value - 1.0).abs() < 1e-12);
    }
}
