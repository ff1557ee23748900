//! Spectra and thermal sums, plus finite-dimensional operator inequalities.

mod certificate;
mod certs;
pub mod eigen;
mod gap;
mod thermal;

pub use certificate::InequalityCertificate;
pub use certs::{hardcore_thp_check, k_bound_check, subadditivity_check, three_site_check, ThreeSiteReport};
pub use eigen::{spectrum, spectrum_with, SolverOptions, SpectrumResult};
pub use gap::{gap_bound_report, labeled_spectrum, spectral_gap, GapBoundReport, GapReport, LabeledLevel};
pub use thermal::{sector_spectra, thermal_summaries, thermal_summary, ThermalSummary, THERMAL_BUDGET};
