use rayon::prelude::*;

use super::eigen::{dense_eigh, DENSE_THRESHOLD};
use crate::model::{heisenberg_operator, Boundary, LatticeBox, SectorBasis, SpinValue};
use crate::numeric::pairwise_sum;
use crate::{Error, Result};

/// Largest total Hilbert-space dimension summed over for thermal quantities.
pub const THERMAL_BUDGET: usize = 1 << 17;

#[derive(Clone, Debug)]
pub struct ThermalSummary {
    pub beta: f64,
    pub spin: SpinValue,
    pub lattice: LatticeBox,
    pub partition_function: f64,
    pub free_energy_per_site: f64,
}

fn hilbert_dimension(lattice: &LatticeBox, spin: SpinValue) -> Option<usize> {
    (spin.two_s() as usize + 1).checked_pow(lattice.len() as u32)
}

/// Full open-boundary spectra of every particle-number sector, in sector order.
pub fn sector_spectra(lattice: &LatticeBox, spin: SpinValue) -> Result<Vec<Vec<f64>>> {
    let total = hilbert_dimension(lattice, spin).unwrap_or(usize::MAX);
    if total > THERMAL_BUDGET {
        return Err(Error::Budget { what: "thermal sum".into(), required: total, budget: THERMAL_BUDGET });
    }
    let max_n = spin.two_s() as usize * lattice.len();
    let bases: Vec<SectorBasis> = (0..=max_n)
        .map(|n| SectorBasis::new(lattice, spin, n))
        .collect::<Result<_>>()?;
    if let Some(big) = bases.iter().find(|b| b.len() > DENSE_THRESHOLD) {
        return Err(Error::Budget { what: "dense sector".into(), required: big.len(), budget: DENSE_THRESHOLD });
    }
    Ok(bases
        .par_iter()
        .map(|b| dense_eigh(heisenberg_operator(b, Boundary::Open).to_dense()).0)
        .collect())
}

/// Partition function and free energy per site for each inverse temperature,
/// diagonalizing every sector once.
pub fn thermal_summaries(lattice: &LatticeBox, spin: SpinValue, betas: &[f64]) -> Result<Vec<ThermalSummary>> {
    if let Some(b) = betas.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
        return Err(Error::invalid(format!("beta must be positive and finite (got {b})")));
    }
    let spectra = sector_spectra(lattice, spin)?;
    let energies: Vec<f64> = spectra.into_iter().flatten().collect();
    let ground = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let shift = if (-1e-10..0.0).contains(&ground) { ground } else { 0.0 };
    Ok(betas
        .iter()
        .map(|&beta| {
            let weights: Vec<f64> = energies.iter().map(|e| (-beta * (e - shift)).exp()).collect();
            let z = pairwise_sum(&weights);
            ThermalSummary {
                beta,
                spin,
                lattice: lattice.clone(),
                partition_function: z,
                free_energy_per_site: -z.ln() / (beta * lattice.len() as f64),
            }
        })
        .collect())
}

pub fn thermal_summary(lattice: &LatticeBox, spin: SpinValue, beta: f64) -> Result<ThermalSummary> {
    Ok(thermal_summaries(lattice, spin, &[beta])?.remove(0))
}
