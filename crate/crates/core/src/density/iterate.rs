//! Iterating the reflected differential inequality into a random-walk
//! bound, and the fully assembled estimate in three dimensions.
//!
//! On `Z^D` with `D = 2 dim` and degree `2D`, the reflected inequality reads
//! `sigma <= c (<sigma> + kappa ||sigma||_inf chi)` with
//! `c = (1 - 2E/(2D S))^{-1}` and `kappa = 1/(2D S)`. After `n` steps,
//! `sigma(z) <= c^n [sum_w P_n(z,w) sigma^R(w) + kappa ||sigma||_inf sum_w Q_n(z,w) chi^R(w)]`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::reflect::{reflect_extend, ReflectedField};
use super::SigmaDensity;
use crate::ed::InequalityCertificate;
use crate::kernels::greens::watson_constant;
use crate::kernels::reflection::{boundary_distance, fold_1d};
use crate::kernels::walk_table;
use crate::model::LatticeBox;
use crate::spinwave::constants::b0_by_bisection;
use crate::{Error, Result};

/// Default of the unspecified small parameter in `n = floor(eps min(l^2, S/E))`.
pub const DEFAULT_EPSILON: f64 = 0.05;
/// Largest number of (base point, displacement) evaluations spent on the
/// walk-table cross-check.
pub const DISPLACEMENT_BUDGET: usize = 2_000_000;

const SLACK_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkBoundReport {
    /// `rhs(z) - sigma(z)` over the base cell, right side from folded walk tables.
    pub certificate: InequalityCertificate,
    pub steps: usize,
    pub energy: f64,
    /// `c^n`.
    pub amplification: f64,
    /// Largest difference between the sums from iterating the reflecting
    /// walk on the base cell and the same sums from folded walk tables.
    /// `None` when the tables exceed [`DISPLACEMENT_BUDGET`].
    pub route_difference: Option<f64>,
    /// The three-dimensional assembled estimate at `F` and the step rule.
    pub assembled: Option<AssembledBound>,
}

fn coordinates(lattice: &LatticeBox, a: usize, b: usize) -> Vec<i64> {
    let d = lattice.dim();
    let mut z: Vec<i64> = lattice.sites()[a][..d].iter().map(|&c| c as i64).collect();
    z.extend(lattice.sites()[b][..d].iter().map(|&c| c as i64));
    z
}

fn walk_constants(sigma: &SigmaDensity) -> Result<(f64, f64, f64)> {
    let s = sigma.spin().s();
    let degree = 4.0 * sigma.dim as f64;
    let e = sigma.energy.max(0.0);
    let threshold = degree * s / 2.0;
    if !(e < threshold) {
        return Err(Error::Precondition(format!(
            "walk bound needs E < {threshold} S-units (2 dim S); got E = {e:.6}"
        )));
    }
    Ok((degree, 1.0 / (1.0 - 2.0 * e / (degree * s)), 1.0 / (degree * s)))
}

/// Points `w` of `Z^dim` with `|w|_1 <= j` and `|w|_1 = j (mod 2)`: the
/// support of `P_j`.
fn parity_points(dim: usize, j: usize) -> u128 {
    let binom = |n: usize, k: usize| -> u128 { (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128) };
    // Points with |w|_1 = r: choose k nonzero coordinates, their signs, and a composition of r.
    let sphere = |r: usize| -> u128 {
        if r == 0 {
            return 1;
        }
        (1..=dim.min(r)).map(|k| binom(dim, k) * binom(r - 1, k - 1) << k).sum()
    };
    (0..=j).filter(|r| (j - r) % 2 == 0).map(sphere).sum()
}

/// Sums `sum_w P_n(z,w) sigma^R(w)` and `sum_{j<n} sum_w P_j(z,w) chi^R(w)` for
/// every base point, by folding the walk-table displacements. `None` when
/// the evaluation count exceeds the budget.
fn folded_table_sums(field: &ReflectedField, n: usize) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    let points = (field.base().values.nrows() as u128).pow(2);
    let total: u128 = (0..=n).map(|j| parity_points(field.coords(), j)).sum();
    if total * points > DISPLACEMENT_BUDGET as u128 {
        return Ok(None);
    }
    let lattice = field.base().lattice();
    let sites = lattice.len();
    let table = walk_table(field.coords(), n)?;
    let mut lists: Vec<Vec<(Vec<i64>, f64)>> = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let mut list = Vec::new();
        for key in table.keys(j) {
            let p = table.p_key(j, key);
            for v in table.expand(key) {
                list.push((v, p));
            }
        }
        lists.push(list);
    }
    let mut p_sigma = vec![0.0; sites * sites];
    let mut q_chi = vec![0.0; sites * sites];
    for a in 0..sites {
        for b in 0..sites {
            let z = coordinates(&lattice, a, b);
            let shifted = |v: &[i64]| -> Vec<i64> { z.iter().zip(v).map(|(x, y)| x + y).collect() };
            p_sigma[a * sites + b] = lists[n].iter().map(|(v, p)| p * field.get(&shifted(v))).sum();
            q_chi[a * sites + b] = lists[..n].iter().flatten().map(|(v, p)| p * field.chi(&shifted(v))).sum();
        }
    }
    Ok(Some((p_sigma, q_chi)))
}

/// The same sums by iterating the averaging operator of the reflecting walk
/// on the base cell.
fn reflecting_walk_sums(field: &ReflectedField, n: usize) -> (Vec<f64>, Vec<f64>) {
    let lattice = field.base().lattice();
    let sites = lattice.len();
    let ell = lattice.side() as i64;
    let mut neighbours = Vec::with_capacity(sites * sites);
    for a in 0..sites {
        for b in 0..sites {
            let z = coordinates(&lattice, a, b);
            let mut list = Vec::new();
            for axis in 0..z.len() {
                for step in [-1, 1] {
                    let mut w = z.clone();
                    w[axis] = fold_1d(w[axis] + step, ell).0;
                    let (x, y) = field.base_sites(&w);
                    list.push(x * sites + y);
                }
            }
            neighbours.push(list);
        }
    }
    let average = |f: &[f64]| -> Vec<f64> {
        neighbours.iter().map(|l| l.iter().map(|&i| f[i]).sum::<f64>() / l.len() as f64).collect()
    };
    let mut sigma: Vec<f64> = (0..sites * sites).map(|z| field.base().values[(z / sites, z % sites)]).collect();
    let mut chi: Vec<f64> = (0..sites * sites).map(|z| if lattice.are_neighbors(z / sites, z % sites) { 1.0 } else { 0.0 }).collect();
    let mut q_chi = vec![0.0; sites * sites];
    for _ in 0..n {
        for (q, c) in q_chi.iter_mut().zip(&chi) {
            *q += c;
        }
        sigma = average(&sigma);
        chi = average(&chi);
    }
    (sigma, q_chi)
}

/// Checks the `n`-step walk bound at every base-cell point. `mass` is the
/// `F` of the assembled estimate, evaluated on three-dimensional boxes.
pub fn iterated_walk_bound(sigma: &SigmaDensity, n: usize, mass: f64) -> Result<WalkBoundReport> {
    let (_, c, kappa) = walk_constants(sigma)?;
    let field = reflect_extend(sigma);
    let (p_sigma, q_chi) = reflecting_walk_sums(&field, n);
    let route_difference = folded_table_sums(&field, n)?.map(|(p_table, q_table)| {
        p_sigma
            .iter()
            .zip(&p_table)
            .chain(q_chi.iter().zip(&q_table))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    });
    let sites = sigma.values.nrows();
    let amplification = c.powi(n as i32);
    let mut worst = (f64::INFINITY, String::from("none"));
    for z in 0..sites * sites {
        let rhs = amplification * (p_sigma[z] + kappa * sigma.norm_inf * q_chi[z]);
        let slack = rhs - sigma.values[(z / sites, z % sites)];
        if slack < worst.0 {
            worst = (slack, format!("x1={} x2={}", z / sites, z % sites));
        }
    }
    let certificate = InequalityCertificate::new("iterated_walk_bound", worst.0, SLACK_TOL, worst.1)
        .with_note(format!("n={n}, E={:.6e}, c^n={amplification:.6}", sigma.energy));
    let assembled = if sigma.dim == 3 { Some(assembled_bound(sigma, DEFAULT_EPSILON, mass)?) } else { None };
    Ok(WalkBoundReport { certificate, steps: n, energy: sigma.energy, amplification, route_difference, assembled })
}

/// `floor(eps min(l^2, S/E))`, with `S/E = inf` at `E = 0`.
pub fn walk_rule_steps(ell: usize, spin_s: f64, energy: f64, epsilon: f64) -> usize {
    let l2 = (ell * ell) as f64;
    let ratio = if energy > 0.0 { spin_s / energy } else { f64::INFINITY };
    (epsilon * l2.min(ratio)).floor() as usize
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssembledBound {
    pub epsilon: f64,
    pub mass: f64,
    /// Step count from the rule.
    pub rule_steps: usize,
    /// Step count used; the estimate holds for every `n >= 1`, so a rule
    /// value of zero is raised to one.
    pub steps: usize,
    /// `((1 + F/6) / (1 - E/(6S)))^n`.
    pub growth: f64,
    /// Largest `delta` with `growth <= (1 - delta)/(6 C4 - 1 + C4 l^{-2})`.
    pub delta_max: f64,
    pub certificate: InequalityCertificate,
}

/// The three-dimensional estimate
/// `sigma(z) <= c^n ||sigma||_1 (3 pi/n)^3 (3 + sqrt(2 pi n/(b0 l^2)))^6
///   + ((1+F/6) c)^n S^{-1} ||sigma||_inf (3C4 - 1/2 + C4 F/2
///   + (6+F)/(pi d) [2(1+sqrt F)^{l/3} / (1 - (1+sqrt F)^{-l/3})]^3)`
/// at every base point `z` a distance `d` from the complement of the box.
pub fn assembled_bound(sigma: &SigmaDensity, epsilon: f64, mass: f64) -> Result<AssembledBound> {
    if sigma.dim != 3 {
        return Err(Error::invalid("the assembled estimate is three-dimensional"));
    }
    if !(mass > 0.0 && epsilon > 0.0) {
        return Err(Error::invalid("assembled estimate needs F > 0 and eps > 0"));
    }
    let (_, c, _) = walk_constants(sigma)?;
    let s = sigma.spin().s();
    let ell = sigma.side;
    let lf = ell as f64;
    let rule_steps = walk_rule_steps(ell, s, sigma.energy, epsilon);
    let n = rule_steps.max(1);
    let nf = n as f64;
    let b0 = b0_by_bisection(1e-12);
    let c4 = watson_constant();
    let gaussian = c.powi(n as i32) * sigma.norm_1 * (3.0 * PI / nf).powi(3) * (3.0 + (2.0 * PI * nf / (b0 * lf * lf)).sqrt()).powi(6);
    let growth = ((1.0 + mass / 6.0) * c).powi(n as i32);
    let root = 1.0 + mass.sqrt();
    let finite_size = (2.0 * root.powf(lf / 3.0) / (1.0 - root.powf(-lf / 3.0))).powi(3);
    let lattice = sigma.lattice();
    let sites = lattice.len();
    let mut worst = (f64::INFINITY, String::from("none"));
    for a in 0..sites {
        for b in 0..sites {
            let z = coordinates(&lattice, a, b);
            let d = boundary_distance(&z, ell as i64) as f64;
            let bracket = 3.0 * c4 - 0.5 + c4 * mass / 2.0 + (6.0 + mass) / (PI * d) * finite_size;
            let bound = gaussian + growth / s * sigma.norm_inf * bracket;
            let slack = bound - sigma.values[(a, b)];
            if slack < worst.0 {
                worst = (slack, format!("x1={a} x2={b} d={d}"));
            }
        }
    }
    let delta_max = 1.0 - growth * (6.0 * c4 - 1.0 + c4 / (lf * lf));
    Ok(AssembledBound {
        epsilon,
        mass,
        rule_steps,
        steps: n,
        growth,
        delta_max,
        certificate: InequalityCertificate::new("assembled_walk_bound", worst.0, SLACK_TOL, worst.1)
            .with_note(format!("n={n} (rule {rule_steps}), growth {growth:.6}, delta_max {delta_max:.4}")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{eigenstate_densities, sigma_transform};
    use crate::model::SpinValue;

    fn chain_sigmas() -> Vec<SigmaDensity> {
        let l = LatticeBox::new(1, 4).unwrap();
        let spin = SpinValue::half();
        eigenstate_densities(&l, spin, 2, None).unwrap().iter().map(|r| sigma_transform(r, spin)).collect()
    }

    #[test]
    fn chain_bound_holds_for_all_steps() {
        for sigma in chain_sigmas() {
            for n in [0, 1, 2, 5, 12, 20] {
                match iterated_walk_bound(&sigma, n, 1.0 / 16.0) {
                    Ok(r) => {
                        assert!(r.certificate.passed, "{r:?}");
                        assert!(r.route_difference.unwrap() < 1e-13);
                    }
                    Err(Error::Precondition(_)) => assert!(sigma.energy >= 2.0 * 0.5),
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }

    #[test]
    fn zero_sigma_gives_zero_sides() {
        let mut sigma = chain_sigmas().remove(0);
        sigma.values.fill(0.0);
        sigma.norm_1 = 0.0;
        sigma.norm_inf = 0.0;
        let r = iterated_walk_bound(&sigma, 4, 1.0 / 16.0).unwrap();
        assert_eq!(r.certificate.min_slack, 0.0);
    }

    #[test]
    fn support_counts() {
        assert_eq!(parity_points(1, 3), 4);
        assert_eq!(parity_points(2, 2), 1 + 8);
        let table = walk_table(6, 6).unwrap();
        for j in 0..=6 {
            let m: u64 = table.keys(j).iter().filter(|k| table.p_key(j, k) > 0.0).map(|k| table.multiplicity(k)).sum();
            assert_eq!(m as u128, parity_points(6, j));
        }
    }

    #[test]
    fn step_rule() {
        assert_eq!(walk_rule_steps(10, 0.5, 0.0, 0.05), 5);
        assert_eq!(walk_rule_steps(10, 0.5, 0.01, 0.05), 2);
    }

    #[test]
    fn cube_assembled_estimate() {
        let l = LatticeBox::new(3, 2).unwrap();
        let spin = SpinValue::half();
        for rho in eigenstate_densities(&l, spin, 2, Some(4)).unwrap() {
            let sigma = sigma_transform(&rho, spin);
            let r = iterated_walk_bound(&sigma, 3, 0.25).unwrap();
            assert!(r.certificate.passed);
            assert!(r.route_difference.unwrap() < 1e-13);
            assert!(r.assembled.unwrap().certificate.passed);
            let long = iterated_walk_bound(&sigma, 20, 0.25).unwrap();
            assert!(long.certificate.passed && long.route_difference.is_none());
        }
    }
}
