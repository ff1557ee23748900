//! The `verify-all` suite: one work unit per acceptance criterion.

use super::commands::{bounds_row, constants_row, density_rows, inputs, walk_table_row, Row, Unit};
use super::config::Suite;
use crate::density::measure_constants;
use crate::ed::{
    gap_bound_report, hardcore_thp_check, k_bound_check, sector_spectra, spectral_gap, subadditivity_check, three_site_check,
    InequalityCertificate,
};
use crate::kernels::{decay_bound_check, path_exponent_fit, reflection_sum_check};
use crate::model::{bosonic_operator, heisenberg_operator, Boundary, LatticeBox, SectorBasis, SpinValue};
use crate::numeric::loglog_slope;
use crate::spinwave::{hardcore_ratio, projected_entropy_check};
use crate::Result;

pub const CRITERIA: usize = 10;

fn lattice(dim: usize, side: usize) -> Result<LatticeBox> {
    LatticeBox::new(dim, side)
}

fn label(l: &LatticeBox, spin: SpinValue) -> String {
    format!("dim={} side={} 2S={}", l.dim(), l.side(), spin.two_s())
}

/// `S(S+1) + S^2 - t(t+1)/2` with multiplicity `2t+1`, `t = 0..2S`.
pub fn two_site_oracle(spin: SpinValue) -> Vec<f64> {
    let s = spin.s();
    let mut out = Vec::new();
    for t in 0..=spin.two_s() {
        let t = t as f64;
        let e = s * (s + 1.0) + s * s - t * (t + 1.0) / 2.0;
        out.extend(std::iter::repeat(e).take((2.0 * t + 1.0) as usize));
    }
    out.sort_by(f64::total_cmp);
    out
}

fn criterion_1() -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for two_s in [1, 2, 3] {
        let spin = SpinValue::new(two_s)?;
        let mut levels: Vec<f64> = sector_spectra(&lattice(1, 2)?, spin)?.into_iter().flatten().collect();
        levels.sort_by(f64::total_cmp);
        let oracle = two_site_oracle(spin);
        let diff = if levels.len() == oracle.len() {
            levels.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        let cert = InequalityCertificate::new("two_site_spectrum", 1e-10 - diff, 0.0, format!("2S={two_s}, {} levels", levels.len()));
        rows.push(Row::new().input("check", format!("two sites 2S={two_s}")).output("max_diff", diff).cert(&cert));
    }
    Ok(rows)
}

fn criterion_2() -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for (dim, side) in [(1, 4), (2, 3), (3, 2)] {
        let l = lattice(dim, side)?;
        for two_s in [1, 2] {
            let spin = SpinValue::new(two_s)?;
            let mut worst = (0.0f64, 0usize);
            for n in 0..=two_s as usize * l.len() {
                let basis = SectorBasis::new(&l, spin, n)?;
                let d = heisenberg_operator(&basis, Boundary::Open).max_abs_diff(&bosonic_operator(&basis));
                if d > worst.0 {
                    worst = (d, n);
                }
            }
            let cert = InequalityCertificate::new("bosonic_vs_spin", 1e-12 - worst.0, 0.0, format!("N={}", worst.1));
            rows.push(Row::new().input("check", label(&l, spin)).output("max_diff", worst.0).cert(&cert));
        }
    }
    Ok(rows)
}

fn criterion_3(suite: Suite) -> Result<Vec<Row>> {
    let mut systems = vec![(3, 2, 1), (1, 4, 1), (1, 4, 2), (2, 2, 1), (2, 2, 2), (1, 3, 3)];
    if suite == Suite::Full {
        systems.extend([(2, 3, 1), (1, 6, 1), (1, 5, 2)]);
    }
    let mut rows = Vec::new();
    for (dim, side, two_s) in systems {
        let l = lattice(dim, side)?;
        let spin = SpinValue::new(two_s)?;
        let gap = spectral_gap(&l, spin)?;
        let bound = gap_bound_report(&l, spin)?;
        let mut row = Row::new()
            .input("check", label(&l, spin))
            .output("gap", gap.gap)
            .sourced("reference", gap.reference_value, "formula 2S(1-cos(pi/l))")
            .output("min_ratio", bound.min_ratio)
            .cert(&InequalityCertificate::new("gap_le_reference", gap.reference_value - gap.gap, 1e-8, ""))
            .cert(&InequalityCertificate::new("gap_ratio_positive", bound.min_ratio, 0.0, "").with_note("strictly positive required"));
        if let Some(c) = row.certificates.last_mut() {
            c.passed = bound.min_ratio > 0.0;
        }
        if (dim, side, two_s) == (3, 2, 1) {
            row = row.cert(&InequalityCertificate::new("cube_gap_is_one", 1e-8 - (gap.gap - 1.0).abs(), 0.0, format!("gap {}", gap.gap)));
        }
        rows.push(row);
    }
    Ok(rows)
}

fn criterion_4(suite: Suite) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    let max_two_s = if suite == Suite::Full { 5 } else { 3 };
    for two_s in 1..=max_two_s {
        let r = three_site_check(SpinValue::new(two_s)?)?;
        rows.push(Row::new().input("check", format!("three sites 2S={two_s}")).cert(&r.matrix).cert(&r.scalar));
    }
    for (dim, side) in [(1, 4), (2, 2)] {
        let l = lattice(dim, side)?;
        for two_s in [1, 2] {
            let spin = SpinValue::new(two_s)?;
            let parts: Vec<InequalityCertificate> = (0..=3).map(|n| k_bound_check(&l, spin, n)).collect::<Result<_>>()?;
            rows.push(Row::new().input("check", format!("K bound {}", label(&l, spin))).cert(&InequalityCertificate::merge("k-bound", &parts)));
        }
    }
    for (dim, side, two_s) in [(1, 3, 2), (3, 2, 1)] {
        let l = lattice(dim, side)?;
        let spin = SpinValue::new(two_s)?;
        rows.push(Row::new().input("check", format!("hard core {}", label(&l, spin))).cert(&hardcore_thp_check(&l, spin)?));
    }
    Ok(rows)
}

fn criterion_5(suite: Suite) -> Result<Vec<Row>> {
    let steps: Vec<usize> = if suite == Suite::Full { (0..=20).collect() } else { vec![1, 2, 5, 10, 20] };
    let mut rows = Vec::new();
    for (dim, side) in [(1, 4), (3, 2)] {
        let l = lattice(dim, side)?;
        for two_s in [1, 2] {
            let spin = SpinValue::new(two_s)?;
            for row in density_rows(&l, spin, 2, &steps)? {
                let state = row.inputs[0].value.clone();
                let mut row = row;
                row.inputs = vec![super::record::Input { name: "check".into(), value: format!("{} N=2 state {state}", label(&l, spin)) }];
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

fn criterion_6() -> Result<Vec<Row>> {
    let row = constants_row()?;
    let get = |name: &str| row.outputs.iter().find(|o| o.name == name).map(|o| o.value).unwrap_or(f64::NAN);
    let band = |name: &str, target: f64, tol: f64| {
        let v = get(name);
        InequalityCertificate::new(format!("{name}_matches"), tol - (v - target).abs(), 0.0, format!("{v} vs {target} +- {tol}"))
    };
    let checks = [
        band("b0", 1.942, 1e-3),
        band("C4", 0.2527, 5e-4),
        band("6C4-1", 0.516, 1e-3),
        band("G0(0,0)", 0.2527, 5e-4),
    ];
    let mut row = row.input("check", "constants");
    for c in &checks {
        row = row.cert(c);
    }
    Ok(vec![row])
}

fn criterion_7(suite: Suite) -> Result<Vec<Row>> {
    let n = if suite == Suite::Full { 40 } else { 20 };
    let mut rows = vec![walk_table_row(6, n, 1e-12)?.input("check", format!("walk table dim 6 n={n}"))];
    let sides: &[usize] = if suite == Suite::Full { &[6, 9, 12] } else { &[6] };
    let masses: Vec<f64> = sides.iter().map(|&l| (l as f64).powi(-2)).chain([0.1, 1.0]).collect();
    rows.push(Row::new().input("check", "Green's function decay").cert(&decay_bound_check(&masses)?));
    for &ell in sides {
        for dist in 1..=3 {
            let r = reflection_sum_check(ell, dist, (ell as f64).powi(-2))?;
            rows.push(
                Row::new()
                    .input("check", format!("reflection sum l={ell} dist={dist}"))
                    .output("lhs", r.lhs)
                    .output("rhs", r.rhs)
                    .cert(&r.certificate),
            );
        }
    }
    Ok(rows)
}

fn criterion_8() -> Result<Vec<Row>> {
    let cube = lattice(3, 2)?;
    let chain = lattice(1, 4)?;
    let half = SpinValue::half();
    let mut rows = Vec::new();
    for bs in [2.0, 3.0, 5.0] {
        let r = hardcore_ratio(&cube, bs / half.s(), half)?;
        let mut row = Row::new().input("check", format!("hard-core ratio beta S={bs}")).output("ratio", r.ratio);
        if let (Some(b), Some(c)) = (r.lower_bound, &r.certificate) {
            row = row.output("lower_bound", b).cert(c);
        }
        rows.push(row);
    }
    for (l, grid) in [(&chain, &[0.5, 2.0, 5.0][..]), (&cube, &[2.0, 3.0][..])] {
        for &bs in grid {
            let c = projected_entropy_check(l, bs / half.s(), half)?;
            rows.push(Row::new().input("check", format!("entropy dim={} beta S={bs}", l.dim())).cert(&c));
        }
    }
    Ok(rows)
}

fn criterion_9() -> Result<Vec<Row>> {
    let measured = measure_constants()?;
    let grid = [1e2, 1e3, 1e4, 1e5];
    let mut rows = Vec::new();
    for two_s in [1, 2] {
        let spin = SpinValue::new(two_s)?;
        let mut deviations = Vec::new();
        for bs in grid {
            let row = bounds_row(bs / spin.s(), spin, &measured)?;
            let ratio = row.outputs.iter().find(|o| o.name == "upper_ratio").map(|o| o.value).unwrap_or(f64::NAN);
            deviations.push((ratio - 1.0).abs());
            rows.push(row.input("check", format!("bounds 2S={two_s} beta S={bs}")));
        }
        let decrease = deviations.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
        let rate = -loglog_slope(&grid, &deviations);
        rows.push(
            Row::new()
                .input("check", format!("upper-bound convergence 2S={two_s}"))
                .output("rate", rate)
                .cert(&InequalityCertificate::new("deviation_decreasing", decrease, 0.0, format!("{deviations:?}")))
                .cert(&InequalityCertificate::new("rate_exponent", rate - 0.3, 0.0, format!("fitted {rate:.4}"))),
        );
    }
    Ok(rows)
}

fn criterion_10() -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for two_s in [1, 2] {
        let c = subadditivity_check(SpinValue::new(two_s)?, &[0.5, 1.0, 2.0, 4.0], 4, 2, 1)?;
        rows.push(Row::new().input("check", format!("subadditivity chain 4 -> 8, 2S={two_s}")).cert(&c));
    }
    let fit = path_exponent_fit(&[4, 6, 8, 10])?;
    rows.push(
        Row::new()
            .input("check", "path census")
            .output("exponent", fit.exponent)
            .cert(&InequalityCertificate::new("path_exponent", 4.3 - fit.exponent, 0.0, format!("max counts {:?}", fit.max_counts))),
    );
    Ok(rows)
}

/// Rows of one criterion.
pub fn criterion(k: usize, suite: Suite) -> Result<Vec<Row>> {
    match k {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(suite),
        4 => criterion_4(suite),
        5 => criterion_5(suite),
        6 => criterion_6(),
        7 => criterion_7(suite),
        8 => criterion_8(),
        9 => criterion_9(),
        10 => criterion_10(),
        _ => Err(crate::Error::invalid(format!("no criterion {k}"))),
    }
}

pub fn suite_units(suite: Suite) -> Vec<Unit> {
    (1..=CRITERIA)
        .map(|k| Unit {
            inputs: inputs(&[("criterion", &k)]),
            job: Box::new(move || criterion(k, suite)),
        })
        .collect()
}
