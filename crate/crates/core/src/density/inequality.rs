//! The differential inequality of an eigenstate's two-particle density and
//! the flatness bound it implies near the maximum.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{sigma_transform, SigmaDensity, TwoParticleDensity};
use crate::ed::InequalityCertificate;
use crate::model::{LatticeBox, SpinValue};
use crate::Result;

/// Slack tolerance of both inequality forms.
const SLACK_TOL: f64 = 1e-9;

fn neighbor_lists(lattice: &LatticeBox) -> Vec<Vec<usize>> {
    (0..lattice.len()).map(|i| lattice.neighbors(i)).collect()
}

/// Certificates of the pointwise inequality
/// `(2E/S) rho >= sum_{y~x1} [rho(x1,x2)(1 - d_{y,x2}/2S) - rho(y,x2)(1 - d_{x1,x2}/2S)] + (same in x2)`
/// and of its Laplacian form for `sigma`,
/// `(-Lap_x1 - Lap_x2) sigma <= (2E/S) sigma + S^{-1} sigma chi_{|x1-x2|=1}`.
pub fn diff_inequality_parts(
    rho: &TwoParticleDensity,
    spin: SpinValue,
) -> Result<(InequalityCertificate, InequalityCertificate)> {
    rho.require_eigenstate()?;
    let lattice = rho.lattice();
    let nbrs = neighbor_lists(&lattice);
    let n = lattice.len();
    let s = spin.s();
    let inv = 1.0 / (2.0 * s);
    let e = rho.energy;
    let r = &rho.values;
    let sigma = sigma_transform(rho, spin);
    let sg = &sigma.values;

    let mut worst_rho = (f64::INFINITY, String::from("none"));
    let mut worst_sigma = (f64::INFINITY, String::from("none"));
    for x1 in 0..n {
        for x2 in 0..n {
            let d12 = if x1 == x2 { inv } else { 0.0 };
            let mut rhs = 0.0;
            for &y in &nbrs[x1] {
                let dy = if y == x2 { inv } else { 0.0 };
                rhs += r[(x1, x2)] * (1.0 - dy) - r[(y, x2)] * (1.0 - d12);
            }
            for &y in &nbrs[x2] {
                let dy = if y == x1 { inv } else { 0.0 };
                rhs += r[(x1, x2)] * (1.0 - dy) - r[(x1, y)] * (1.0 - d12);
            }
            let slack = 2.0 * e / s * r[(x1, x2)] - rhs;
            if slack < worst_rho.0 {
                worst_rho = (slack, format!("x1={x1} x2={x2}"));
            }

            let lap: f64 = nbrs[x1].iter().map(|&y| sg[(x1, x2)] - sg[(y, x2)]).sum::<f64>()
                + nbrs[x2].iter().map(|&y| sg[(x1, x2)] - sg[(x1, y)]).sum::<f64>();
            let chi = if lattice.are_neighbors(x1, x2) { 1.0 } else { 0.0 };
            let slack = 2.0 * e / s * sg[(x1, x2)] + sg[(x1, x2)] * chi / s - lap;
            if slack < worst_sigma.0 {
                worst_sigma = (slack, format!("x1={x1} x2={x2}"));
            }
        }
    }
    let label = format!("E={e:.6e}");
    Ok((
        InequalityCertificate::new("diff_inequality_rho", worst_rho.0, SLACK_TOL, format!("{} {label}", worst_rho.1)),
        InequalityCertificate::new("diff_inequality_laplacian", worst_sigma.0, SLACK_TOL, format!("{} {label}", worst_sigma.1)),
    ))
}

/// Both forms merged into one certificate.
pub fn diff_inequality_slack(rho: &TwoParticleDensity, spin: SpinValue) -> Result<InequalityCertificate> {
    let (a, b) = diff_inequality_parts(rho, spin)?;
    let note = format!("rho form slack {:.3e}, laplacian form slack {:.3e}", a.min_slack, b.min_slack);
    Ok(InequalityCertificate::merge("diff_inequality", &[a, b]).with_note(note))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatnessRecord {
    pub n: usize,
    pub min_on_sphere: f64,
    pub rhs: f64,
    /// The right side is not positive, so the bound says nothing.
    pub vacuous: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub certificate: InequalityCertificate,
    /// Index `x1 * |Lambda| + x2` of the maximizer.
    pub z0: usize,
    pub records: Vec<FlatnessRecord>,
}

/// Distances from `z0` on `Lambda x Lambda`: the l1 distance for `S >= 1`,
/// the graph distance avoiding the diagonal for `S = 1/2`.
fn pair_distances(lattice: &LatticeBox, z0: usize, avoid_diagonal: bool) -> Vec<Option<usize>> {
    let n = lattice.len();
    let nbrs = neighbor_lists(lattice);
    let mut dist = vec![None; n * n];
    let mut queue = VecDeque::new();
    dist[z0] = Some(0);
    queue.push_back(z0);
    while let Some(z) = queue.pop_front() {
        let (x1, x2) = (z / n, z % n);
        let d = dist[z].expect("queued");
        let moves = nbrs[x1].iter().map(|&y| (y, x2)).chain(nbrs[x2].iter().map(|&y| (x1, y)));
        for (a, b) in moves {
            if avoid_diagonal && a == b {
                continue;
            }
            let w = a * n + b;
            if dist[w].is_none() {
                dist[w] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// `min_{dist(z, z0) = n} sigma(z) >= ||sigma||_inf (1 - K E r^n)` for every
/// `n` with a nonempty sphere, where `z0` maximizes `sigma`. With `D = 4 dim`
/// the degree on `Lambda x Lambda`: `K = 2/((D-1) S)`, `r = D/(1 - 1/(2S))`
/// for `S >= 1`, and `K = 4/(D-1)`, `r = D` for `S = 1/2`.
pub fn flatness_check(sigma: &SigmaDensity, spin: SpinValue) -> Result<FlatnessReport> {
    let lattice = sigma.lattice();
    let n = lattice.len();
    let s = spin.s();
    let e = sigma.energy.max(0.0);
    let values: Vec<f64> = (0..n * n).map(|z| sigma.values[(z / n, z % n)]).collect();
    let (z0, max) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
    let half = spin.two_s() == 1;
    let dist = pair_distances(&lattice, z0, half);
    let degree = 4.0 * lattice.dim() as f64;
    let (k, r) = if half { (4.0 / (degree - 1.0), degree) } else { (2.0 / ((degree - 1.0) * s), degree / (1.0 - 0.5 / s)) };
    let max_dist = dist.iter().flatten().copied().max().unwrap_or(0);
    let mut records = Vec::new();
    let mut worst = (f64::INFINITY, String::from("no sphere"));
    for step in 1..=max_dist {
        let min_on_sphere = (0..n * n)
            .filter(|&z| dist[z] == Some(step))
            .map(|z| values[z])
            .fold(f64::INFINITY, f64::min);
        let rhs = max * (1.0 - k * e * r.powi(step as i32));
        let slack = min_on_sphere - rhs;
        if slack < worst.0 {
            worst = (slack, format!("n={step}"));
        }
        records.push(FlatnessRecord { n: step, min_on_sphere, rhs, vacuous: rhs <= 0.0 });
    }
    let informative = records.iter().filter(|r| !r.vacuous).count();
    let certificate = InequalityCertificate::new("flatness", worst.0, SLACK_TOL, worst.1)
        .with_note(format!("{informative} of {} spheres informative, E={e:.6e}", records.len()));
    Ok(FlatnessReport { certificate, z0, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::eigenstate_densities;

    #[test]
    fn chain_eigenstates_satisfy_both_forms() {
        let l = LatticeBox::new(1, 4).unwrap();
        for two_s in [1, 2, 3] {
            let spin = SpinValue::new(two_s).unwrap();
            for rho in eigenstate_densities(&l, spin, 2, None).unwrap() {
                let (a, b) = diff_inequality_parts(&rho, spin).unwrap();
                assert!(a.passed && b.passed, "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn single_particle_has_zero_slack() {
        let l = LatticeBox::new(1, 4).unwrap();
        for rho in eigenstate_densities(&l, SpinValue::half(), 1, None).unwrap() {
            let c = diff_inequality_slack(&rho, SpinValue::half()).unwrap();
            assert_eq!(c.min_slack, 0.0);
        }
    }

    #[test]
    fn non_eigenstate_is_flagged() {
        let l = LatticeBox::new(1, 4).unwrap();
        let mut rho = eigenstate_densities(&l, SpinValue::half(), 2, Some(1)).unwrap().remove(0);
        rho.residual = Some(1e-3);
        assert!(diff_inequality_slack(&rho, SpinValue::half()).is_err());
    }

    #[test]
    fn flatness_on_small_systems() {
        let l = LatticeBox::new(3, 2).unwrap();
        let spin = SpinValue::half();
        let rho = eigenstate_densities(&l, spin, 2, Some(1)).unwrap().remove(0);
        let report = flatness_check(&sigma_transform(&rho, spin), spin).unwrap();
        assert!(report.certificate.passed);
        assert!(report.records.len() >= 2);
        let chain = LatticeBox::new(1, 4).unwrap();
        let s1 = SpinValue::new(2).unwrap();
        for rho in eigenstate_densities(&chain, s1, 2, None).unwrap() {
            let report = flatness_check(&sigma_transform(&rho, s1), s1).unwrap();
            assert!(report.certificate.passed, "{report:?}");
        }
    }

    #[test]
    fn constant_sigma_is_flat() {
        let l = LatticeBox::new(1, 3).unwrap();
        let spin = SpinValue::new(2).unwrap();
        let mut rho = eigenstate_densities(&l, spin, 2, Some(1)).unwrap().remove(0);
        rho.values.fill(0.5);
        rho.energy = 0.0;
        let sigma = sigma_transform(&rho, spin);
        let mut flat = sigma.clone();
        flat.values.fill(1.0);
        let report = flatness_check(&flat, spin).unwrap();
        assert!(report.records.iter().all(|r| r.min_on_sphere == 1.0 && r.rhs == 1.0));
        assert_eq!(report.certificate.min_slack, 0.0);
    }
}
