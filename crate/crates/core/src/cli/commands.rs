//! Work units for each subcommand. A unit is a pure job returning rows; the
//! runner turns rows into records and refusals into status records.

use std::fmt::Display;
use std::sync::Arc;

use super::config::ExperimentConfig;
use super::record::{CertificateSummary, Input, Output};
use crate::density::{
    density_invariants, diff_inequality_parts, eigenstate_densities, flatness_check, iterated_walk_bound, measure_constants,
    sigma_transform, sup_ratio,
};
use crate::ed::{gap_bound_report, labeled_spectrum, spectral_gap, spectrum, thermal_summaries, InequalityCertificate};
use crate::kernels::greens::watson_constant;
use crate::kernels::{
    decay_bound_check, gaussian_bound_check, greens, greens_properties_check, i0_bound_check, path_census, path_exponent_fit,
    reflection_sum_check, walk_table,
};
use crate::model::{heisenberg_operator, Boundary, SectorBasis};
use crate::spinwave::{constants, lower_bound, upper_bound, BoundAssembly, MeasuredConstants, Provenance};
use crate::{Error, Result};

/// One output row of a unit; its inputs extend the unit's inputs.
#[derive(Clone, Debug, Default)]
pub struct Row {
    pub inputs: Vec<Input>,
    pub outputs: Vec<Output>,
    pub certificates: Vec<CertificateSummary>,
    pub notes: Vec<String>,
}

impl Row {
    pub fn new() -> Self {
        Row::default()
    }

    pub fn input(mut self, name: &str, value: impl Display) -> Self {
        self.inputs.push(Input { name: name.into(), value: value.to_string() });
        self
    }

    pub fn output(mut self, name: &str, value: f64) -> Self {
        self.outputs.push(Output { name: name.into(), value, provenance: None });
        self
    }

    pub fn sourced(mut self, name: &str, value: f64, provenance: impl Into<String>) -> Self {
        self.outputs.push(Output { name: name.into(), value, provenance: Some(provenance.into()) });
        self
    }

    pub fn cert(mut self, c: &InequalityCertificate) -> Self {
        self.certificates.push(c.into());
        if let Some(note) = &c.note {
            self.notes.push(format!("{}: {note}", c.name));
        }
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

pub type Job = Box<dyn Fn() -> Result<Vec<Row>> + Send + Sync>;

pub struct Unit {
    pub inputs: Vec<Input>,
    pub job: Job,
}

pub fn inputs(pairs: &[(&str, &dyn Display)]) -> Vec<Input> {
    pairs.iter().map(|(n, v)| Input { name: n.to_string(), value: v.to_string() }).collect()
}

fn system_inputs(cfg: &ExperimentConfig) -> Vec<Input> {
    inputs(&[("dim", &cfg.dim), ("side", &cfg.side), ("two_s", &cfg.two_s)])
}

pub fn spectrum_units(cfg: &ExperimentConfig) -> Result<Vec<Unit>> {
    let lattice = cfg.lattice()?;
    let spin = cfg.spin()?;
    let mut unit_inputs = system_inputs(cfg);
    let job: Job = match cfg.sector {
        Some(n) => {
            unit_inputs.push(Input { name: "sector".into(), value: n.to_string() });
            Box::new(move || {
                let basis = SectorBasis::new(&lattice, spin, n)?;
                let op = heisenberg_operator(&basis, Boundary::Open);
                let spec = spectrum(&op, false, None)?;
                let method = if spec.eigenvalues.len() == basis.len() { "dense, all levels" } else { "Lanczos, lowest levels" };
                Ok(spec
                    .eigenvalues
                    .iter()
                    .enumerate()
                    .map(|(i, &e)| Row::new().input("level", i).output("energy", e).note(method))
                    .collect())
            })
        }
        None => Box::new(move || {
            Ok(labeled_spectrum(&lattice, spin)?
                .into_iter()
                .map(|l| Row::new().input("sector", l.sector_n).input("level", l.index).output("energy", l.energy).output("t", l.t))
                .collect())
        }),
    };
    Ok(vec![Unit { inputs: unit_inputs, job }])
}

pub fn free_energy_units(cfg: &ExperimentConfig) -> Result<Vec<Unit>> {
    let lattice = cfg.lattice()?;
    let spin = cfg.spin()?;
    let betas = if cfg.beta.is_empty() { vec![1.0] } else { cfg.beta.clone() };
    let job: Job = Box::new(move || {
        Ok(thermal_summaries(&lattice, spin, &betas)?
            .into_iter()
            .map(|t| Row::new().input("beta", t.beta).output("Z", t.partition_function).output("f", t.free_energy_per_site))
            .collect())
    });
    Ok(vec![Unit { inputs: system_inputs(cfg), job }])
}

pub fn gap_units(cfg: &ExperimentConfig) -> Result<Vec<Unit>> {
    let lattice = cfg.lattice()?;
    let spin = cfg.spin()?;
    let tol = cfg.tol.unwrap_or(1e-8);
    let job: Job = Box::new(move || {
        let gap = spectral_gap(&lattice, spin)?;
        let bound = gap_bound_report(&lattice, spin)?;
        let vs_reference = InequalityCertificate::new(
            "gap_le_reference",
            gap.reference_value - gap.gap,
            tol,
            format!("gap {:.12} reference {:.12}", gap.gap, gap.reference_value),
        );
        let labels: Vec<String> = gap.casimir_labels.iter().map(|(e, t)| format!("E={e:.10} t={t}")).collect();
        Ok(vec![Row::new()
            .output("gap", gap.gap)
            .sourced("reference", gap.reference_value, "formula 2S(1-cos(pi/l))")
            .output("min_ratio", bound.min_ratio)
            .cert(&vs_reference)
            .cert(&bound.certificate)
            .note(format!("lowest excited levels: {}", labels.join("; ")))])
    });
    Ok(vec![Unit { inputs: system_inputs(cfg), job }])
}

fn provenance_label(p: Provenance, measured: &MeasuredConstants) -> String {
    match p {
        Provenance::Computed => "computed".into(),
        Provenance::Measured => format!("measured: {}", measured.source),
    }
}

fn assembly_outputs(mut row: Row, a: &BoundAssembly, prefix: &str, measured: &MeasuredConstants) -> Row {
    row = row.output(&format!("{prefix}_total"), a.total).output(&format!("{prefix}_ratio"), a.ratio());
    row = row.output(&format!("{prefix}_ell"), a.ell_choice as f64);
    for t in &a.terms {
        row = row.output(&format!("{prefix}.{}", t.name), t.value);
    }
    for x in &a.auxiliary {
        row = row.sourced(&format!("{prefix}.{}", x.name), x.value, provenance_label(x.provenance, measured));
    }
    row
}

/// Both bound assemblies at one inverse temperature.
pub fn bounds_row(beta: f64, spin: crate::model::SpinValue, measured: &MeasuredConstants) -> Result<Row> {
    let up = upper_bound(beta, spin)?;
    let low = lower_bound(beta, spin, measured)?;
    let order = InequalityCertificate::new("upper_ge_lower", up.total - low.total, 0.0, format!("beta={beta}"));
    let negative = InequalityCertificate::new("totals_negative", -up.total.max(low.total), 0.0, format!("beta={beta}"));
    let row = Row::new()
        .output("beta_s", beta * spin.s())
        .sourced("main", up.main(), "formula C0 S^{-3/2} beta^{-5/2}");
    let row = assembly_outputs(row, &up, "upper", measured);
    let row = assembly_outputs(row, &low, "lower", measured);
    Ok(row.cert(&order).cert(&negative))
}

pub fn bounds_units(cfg: &ExperimentConfig) -> Result<Vec<Unit>> {
    let spin = cfg.spin()?;
    let betas: Vec<f64> =
        if cfg.beta.is_empty() { [1e2, 1e3, 1e4, 1e5].iter().map(|bs| bs / spin.s()).collect() } else { cfg.beta.clone() };
    let measured = Arc::new(measure_constants().map_err(|e| e.to_string()));
    Ok(betas
        .into_iter()
        .map(|beta| {
            let measured = Arc::clone(&measured);
            let job: Job = Box::new(move || {
                let m = measured.as_ref().as_ref().map_err(|e| Error::Precondition(format!("measured constants: {e}")))?;
                Ok(vec![bounds_row(beta, spin, m)?])
            });
            Unit { inputs: inputs(&[("two_s", &cfg.two_s), ("beta", &beta)]), job }
        })
        .collect())
}

/// Every certificate of one sector's eigenstates, a row per state.
pub fn density_rows(
    lattice: &crate::model::LatticeBox,
    spin: crate::model::SpinValue,
    n: usize,
    steps: &[usize],
) -> Result<Vec<Row>> {
    let mass = (lattice.side() as f64).powi(-2);
    let mut rows = Vec::new();
    for (i, rho) in eigenstate_densities(lattice, spin, n, None)?.iter().enumerate() {
        let sigma = sigma_transform(rho, spin);
        let (ineq_rho, ineq_lap) = diff_inequality_parts(rho, spin)?;
        let flat = flatness_check(&sigma, spin)?;
        let mut row = Row::new()
            .input("state", i)
            .output("energy", rho.energy)
            .output("residual", rho.residual.unwrap_or(f64::NAN))
            .output("norm_1", rho.norm_1)
            .output("norm_inf", rho.norm_inf)
            .output("sup_ratio", sup_ratio(rho, lattice.side(), spin).unwrap_or(f64::NAN))
            .cert(&density_invariants(rho))
            .cert(&ineq_rho)
            .cert(&ineq_lap)
            .cert(&flat.certificate);
        let mut walk = Vec::new();
        let mut assembled = None;
        for &k in steps {
            match iterated_walk_bound(&sigma, k, mass) {
                Ok(report) => {
                    if let Some(d) = report.route_difference {
                        if d > 1e-12 {
                            return Err(Error::NotConverged { what: "walk-table cross-check".into(), residual: d });
                        }
                    }
                    assembled = report.assembled.clone().or(assembled);
                    walk.push(report.certificate);
                }
                Err(Error::Precondition(msg)) => {
                    row = row.note(format!("walk bound not applicable: {msg}"));
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if !walk.is_empty() {
            let merged = InequalityCertificate::merge("iterated_walk_bound", &walk)
                .with_note(format!("n in {:?}, F = {mass}", &steps[..walk.len()]));
            row = row.cert(&merged);
        }
        if let Some(a) = assembled {
            row = row.output("assembled_steps", a.steps as f64).output("assembled_delta_max", a.delta_max).cert(&a.certificate);
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn rho2_units(cfg: &ExperimentConfig) -> Result<Vec<Unit>> {
    let lattice = cfg.lattice()?;
    let spin = cfg.spin()?;
    let n = cfg.sector.unwrap_or(2);
    let steps = vec![cfg.steps.unwrap_or(20)];
    let mut unit_inputs = system_inputs(cfg);
    unit_inputs.push(Input { name: "sector".into(), value: n.to_string() });
    let job: Job = Box::new(move || density_rows(&lattice, spin, n, &steps));
    Ok(vec![Unit { inputs: unit_inputs, job }])
}

/// Normalization and support checks of one walk table, plus the Gaussian bound.
pub fn walk_table_row(dim: usize, n: usize, tol: f64) -> Result<Row> {
    let table = walk_table(dim, n)?;
    let b0 = constants::b0_by_bisection(1e-12);
    let err = table.normalization_error();
    let norm = InequalityCertificate::new("walk_normalization", tol - err, 0.0, format!("max |sum_w P_j(w) - 1| = {err:.2e}"));
    let support = InequalityCertificate::new(
        "walk_parity_symmetry",
        if table.support_is_consistent() { 0.0 } else { -1.0 },
        0.0,
        "parity, l1 support and sign/permutation symmetry",
    );
    let mut row = Row::new().output("normalization_error", err).cert(&norm).cert(&support);
    if dim == 6 {
        row = row.sourced("b0", b0, "bisection of 6 b^2/sinh^2 b = b").cert(&gaussian_bound_check(&table, b0)?);
    }
    Ok(row)
}

pub fn kernels_units(cfg: &ExperimentConfig) -> Result<Vec<Unit>> {
    let walk_dim = 2 * cfg.dim;
    let n = cfg.steps.unwrap_or(20);
    let tol = cfg.tol.unwrap_or(1e-12);
    let side = cfg.side;
    let mass = (side as f64).powi(-2);
    let mut units = vec![
        Unit {
            inputs: inputs(&[("check", &"walk_table"), ("walk_dim", &walk_dim), ("steps", &n)]),
            job: Box::new(move || Ok(vec![walk_table_row(walk_dim, n, tol)?])),
        },
        Unit {
            inputs: inputs(&[("check", &"bessel_i0_bound")]),
            job: Box::new(|| Ok(vec![Row::new().cert(&i0_bound_check(400)?)])),
        },
        Unit {
            inputs: inputs(&[("check", &"green_decay"), ("side", &side)]),
            job: Box::new(move || Ok(vec![Row::new().cert(&decay_bound_check(&[mass, 0.1, 1.0])?)])),
        },
    ];
    for dist in 1..=3.min(side / 2).max(1) {
        units.push(Unit {
            inputs: inputs(&[("check", &"reflection_sum"), ("side", &side), ("dist", &dist)]),
            job: Box::new(move || {
                let r = reflection_sum_check(side, dist, mass)?;
                Ok(vec![Row::new()
                    .output("lhs", r.lhs)
                    .output("rhs", r.rhs)
                    .output("crosscheck_diff", r.crosscheck_diff)
                    .cert(&r.certificate)])
            }),
        });
    }
    Ok(units)
}

/// Constants with their provenance, plus the Green's-function values at
/// the origin and a neighbour.
pub fn constants_row() -> Result<Row> {
    let c = constants()?;
    let mut row = Row::new();
    for rec in &c.records {
        row = row.sourced(&rec.name, rec.value, format!("{}; {}", rec.formula, rec.method));
    }
    let g00 = greens([0, 0, 0], 0.0)?;
    let g01 = greens([1, 0, 0], 0.0)?;
    let watson = watson_constant();
    let agreement = InequalityCertificate::new("c0_two_way", 1e-6 - c.c0_agreement(), 0.0, format!("|diff| = {:.2e}", c.c0_agreement()));
    let neighbour = InequalityCertificate::new(
        "greens_neighbour",
        1e-9 - (g01 - (g00 - 1.0 / 6.0)).abs(),
        0.0,
        format!("G0(0,e) = {g01:.12}, G0(0,0) - 1/6 = {:.12}", g00 - 1.0 / 6.0),
    );
    let origin = InequalityCertificate::new("greens_origin_closed_form", 1e-9 - (g00 - watson).abs(), 0.0, format!("G0(0,0) = {g00:.12}"));
    Ok(row
        .sourced("6C4-1", 6.0 * c.c4 - 1.0, "closed form")
        .sourced("G0(0,0)", g00, "quadrature of the heat-kernel integral")
        .sourced("G0(0,e)", g01, "quadrature of the heat-kernel integral")
        .cert(&agreement)
        .cert(&origin)
        .cert(&neighbour))
}

pub fn greens_units(_cfg: &ExperimentConfig) -> Result<Vec<Unit>> {
    Ok(vec![
        Unit { inputs: inputs(&[("check", &"constants")]), job: Box::new(|| Ok(vec![constants_row()?])) },
        Unit {
            inputs: inputs(&[("check", &"greens_properties")]),
            job: Box::new(|| Ok(vec![Row::new().cert(&greens_properties_check()?)])),
        },
    ])
}

pub fn paths_units(cfg: &ExperimentConfig) -> Result<Vec<Unit>> {
    let sides = if cfg.sides.is_empty() { vec![4, 6, 8, 10] } else { cfg.sides.clone() };
    let limit = cfg.tol.map(|t| 4.0 + t).unwrap_or(4.3);
    let mut units: Vec<Unit> = sides
        .iter()
        .map(|&side| Unit {
            inputs: inputs(&[("check", &"census"), ("side", &side)]),
            job: Box::new(move || {
                let c = path_census(side)?;
                Ok(vec![Row::new()
                    .output("max_count", c.max_count as f64)
                    .output("pairs", c.pairs as f64)
                    .output("total_length", c.total_length as f64)
                    .note(format!("busiest bond {:?} -> {:?}", c.max_bond.0, c.max_bond.1))])
            }),
        })
        .collect();
    if sides.len() >= 2 {
        units.push(Unit {
            inputs: inputs(&[("check", &"fit")]),
            job: Box::new(move || {
                let fit = path_exponent_fit(&sides)?;
                let cert = InequalityCertificate::new("path_exponent", limit - fit.exponent, 0.0, format!("sides {:?}", fit.sides));
                Ok(vec![Row::new().output("exponent", fit.exponent).cert(&cert)])
            }),
        });
    }
    Ok(units)
}
