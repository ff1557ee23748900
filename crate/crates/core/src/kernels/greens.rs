//! The massive lattice Green's function of Z^3,
//! `G_F(x) = int_0^inf e^{-Ft} prod_j e^{-2t} I_{|x_j|}(2t) dt`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::bessel::scaled_bessel_into;
use crate::ed::InequalityCertificate;
use crate::numeric::{integrate_breaks, Quadrature};
use crate::{Error, Result};

/// `(sqrt 3 - 1) Gamma(1/24)^2 Gamma(11/24)^2 / (192 pi^3)`, the value of
/// the massless Green's function at the origin.
pub fn watson_constant() -> f64 {
    (3f64.sqrt() - 1.0) * gamma(1.0 / 24.0).powi(2) * gamma(11.0 / 24.0).powi(2) / (192.0 * PI.powi(3))
}

/// `int_0^inf f(t) dt`: `[0, split]` directly and `[split, inf)` through
/// `t = split / u^2`, so no truncation is involved. `f` must be integrable
/// with at most `t^{-3/2}` decay.
pub(crate) fn semi_infinite<F: Fn(f64) -> f64>(
    f: F,
    split: f64,
    head_breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> (Quadrature, Quadrature) {
    let mut breaks: Vec<f64> = head_breaks.iter().copied().filter(|&b| b > 0.0 && b < split).collect();
    breaks.push(0.0);
    breaks.push(split);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let head = integrate_breaks(&f, &breaks, abs_tol * 0.5, rel_tol, max_intervals);
    let tail = integrate_breaks(
        |u: f64| {
            let t = split / (u * u);
            if !t.is_finite() {
                return 0.0;
            }
            f(t) * 2.0 * split / (u * u * u)
        },
        &[0.0, 0.25, 0.5, 1.0],
        abs_tol * 0.5,
        rel_tol,
        max_intervals,
    );
    (head, tail)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenValue {
    pub value: f64,
    /// Quadrature error estimate on `[0, split]`.
    pub head_error: f64,
    /// Quadrature error estimate of the mapped tail `[split, inf)`.
    pub tail_error: f64,
    pub intervals: usize,
}

impl GreenValue {
    pub fn error(&self) -> f64 {
        self.head_error + self.tail_error
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenEvaluator {
    pub mass: f64,
    /// Boundary between direct and mapped integration.
    pub split: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl GreenEvaluator {
    pub fn new(mass: f64) -> Result<Self> {
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::invalid(format!("mass must be finite and >= 0 (got {mass})")));
        }
        Ok(GreenEvaluator { mass, split: 16.0, abs_tol: 1e-14, rel_tol: 1e-12, max_intervals: 2000 })
    }

    pub fn with_tolerance(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    /// Integrand at time `t`.
    pub fn integrand(&self, x: [i64; 3], t: f64) -> f64 {
        let mass = (-self.mass * t).exp();
        if mass == 0.0 {
            return 0.0;
        }
        let a = x.map(|c| c.unsigned_abs() as usize);
        let nmax = a.iter().copied().max().unwrap_or(0);
        let mut seq = vec![0.0; nmax + 1];
        scaled_bessel_into(2.0 * t, &mut seq);
        mass * seq[a[0]] * seq[a[1]] * seq[a[2]]
    }

    pub fn eval(&self, x: [i64; 3]) -> Result<GreenValue> {
        let r2: f64 = x.iter().map(|&c| (c * c) as f64).sum();
        let peak = r2 / 6.0;
        let (head, tail) = semi_infinite(
            |t| self.integrand(x, t),
            self.split.max(2.0 * peak),
            &[0.5, 2.0, 6.0, 0.5 * peak, peak, 2.0 * peak],
            self.abs_tol,
            self.rel_tol,
            self.max_intervals,
        );
        let value = head.value + tail.value;
        let error = head.error + tail.error;
        if !(head.converged && tail.converged) {
            return Err(Error::NotConverged { what: format!("Green's function at {x:?}, F={}", self.mass), residual: error });
        }
        if value <= 0.0 {
            return Err(Error::NotConverged { what: format!("Green's function at {x:?} not positive"), residual: value });
        }
        Ok(GreenValue { value, head_error: head.error, tail_error: tail.error, intervals: head.intervals + tail.intervals })
    }
}

/// `G_F(x)`.
pub fn greens(x: [i64; 3], mass: f64) -> Result<f64> {
    Ok(GreenEvaluator::new(mass)?.eval(x)?.value)
}

/// `(2 / (pi |x|_inf)) (1 + sqrt F)^{-|x|_inf}`, valid for `x != 0`.
pub fn decay_bound(x: [i64; 3], mass: f64) -> f64 {
    let r = x.iter().map(|c| c.abs()).max().unwrap_or(0) as f64;
    2.0 / (PI * r) * (1.0 + mass.sqrt()).powf(-r)
}

/// Positivity and monotonicity (along coordinate rays and in the mass),
/// then the delta relation with `G_0(0)` checked against its closed form.
pub fn greens_properties_check() -> Result<InequalityCertificate> {
    let mut parts = Vec::new();
    let masses = [0.0, 0.1, 1.0];
    let bases: [[i64; 3]; 4] = [[0, 0, 0], [0, 1, 0], [1, 2, 0], [0, 1, 1]];
    let mut min_value = f64::INFINITY;
    let mut min_value_at = String::new();
    for &mass in &masses[..2] {
        let ev = GreenEvaluator::new(mass)?;
        let mut worst = (f64::INFINITY, String::new());
        for base in bases {
            for axis in 0..3 {
                let mut prev = ev.eval(base)?.value;
                for k in 1..=6 {
                    let mut x = base;
                    x[axis] += k;
                    let g = ev.eval(x)?.value;
                    if g < min_value {
                        min_value = g;
                        min_value_at = format!("x={x:?} F={mass}");
                    }
                    if prev - g < worst.0 {
                        worst = (prev - g, format!("x={x:?} axis={axis} F={mass}"));
                    }
                    prev = g;
                }
            }
        }
        parts.push(InequalityCertificate::new("greens_ray_decrease", worst.0, 0.0, worst.1).with_note("strict decrease required"));
    }
    parts.push(InequalityCertificate::new("greens_positive", min_value, 0.0, min_value_at));
    // Strict positivity and strict decrease: zero slack fails.
    for p in parts.iter_mut() {
        p.passed = p.min_slack > 0.0;
    }

    let mut worst_mass = (f64::INFINITY, String::new());
    for x in [[0, 0, 0], [1, 0, 0], [2, 1, 0], [3, 3, 3]] {
        let values: Vec<f64> = [0.0, 0.01, 0.1, 1.0].iter().map(|&m| greens(x, m)).collect::<Result<_>>()?;
        for w in values.windows(2) {
            if w[0] - w[1] < worst_mass.0 {
                worst_mass = (w[0] - w[1], format!("x={x:?}"));
            }
        }
    }
    parts.push(InequalityCertificate::new("greens_mass_monotone", worst_mass.0, 0.0, worst_mass.1));

    let mut worst_delta = 0.0f64;
    for mass in masses {
        let ev = GreenEvaluator::new(mass)?;
        let g0 = ev.eval([0, 0, 0])?.value;
        let g1 = ev.eval([1, 0, 0])?.value;
        worst_delta = worst_delta.max(((6.0 + mass) * g0 - 6.0 * g1 - 1.0).abs());
    }
    parts.push(InequalityCertificate::new("greens_delta_relation", 1e-9 - worst_delta, 0.0, format!("residual {worst_delta:.2e}")));

    let g00 = greens([0, 0, 0], 0.0)?;
    let diff = (g00 - watson_constant()).abs();
    parts.push(InequalityCertificate::new("greens_watson", 5e-4 - diff, 0.0, format!("G0(0)={g00:.15} closed form {:.15}", watson_constant())));
    let summary: Vec<String> = parts
        .iter()
        .map(|p| format!("{}{}: slack {:.3e}", if p.passed { "" } else { "FAILED " }, p.name, p.min_slack))
        .collect();
    let cert = InequalityCertificate::merge("greens_properties", &parts).with_note(summary.join("; "));
    Ok(cert)
}

/// `G_F(x) <= (2 / (pi |x|_inf)) (1 + sqrt F)^{-|x|_inf}` on a sample of
/// `x != 0` and masses.
pub fn decay_bound_check(masses: &[f64]) -> Result<InequalityCertificate> {
    let mut worst = (f64::INFINITY, String::from("none"));
    let mut min_rel = f64::INFINITY;
    for &mass in masses {
        let ev = GreenEvaluator::new(mass)?;
        for a in 0..=6i64 {
            for b in 0..=a {
                for c in 0..=b {
                    if a == 0 {
                        continue;
                    }
                    let x = [a, b, c];
                    let g = ev.eval(x)?.value;
                    let bound = decay_bound(x, mass);
                    if bound - g < worst.0 {
                        worst = (bound - g, format!("x={x:?} F={mass}"));
                    }
                    min_rel = min_rel.min((bound - g) / bound);
                }
            }
        }
    }
    Ok(InequalityCertificate::new("greens_decay_bound", worst.0, 0.0, worst.1)
        .with_note(format!("smallest relative slack {min_rel:.3e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from an independent arbitrary-precision quadrature.
    const REFERENCE: [([i64; 3], f64, f64); 6] = [
        ([0, 0, 0], 0.0, 0.252_731_009_858_663),
        ([1, 0, 0], 0.0, 0.086_064_343_191_996_3),
        ([0, 0, 0], 0.1, 0.226_668_596_506_943),
        ([1, 0, 0], 0.1, 0.063_779_739_782_059_1),
        ([2, 1, 0], 0.5, 0.007_351_795_721_055_89),
        ([3, 0, 0], 1.0, 0.001_749_697_129_462_54),
    ];

    #[test]
    fn matches_reference_values() {
        for (x, m, v) in REFERENCE {
            let g = greens(x, m).unwrap();
            assert!((g - v).abs() < 1e-11 * v.max(1e-3), "x={x:?} F={m}: {g} vs {v}");
        }
    }

    #[test]
    fn closed_form_constant() {
        assert!((watson_constant() - 0.252_731_009_858_663).abs() < 1e-13);
    }

    #[test]
    fn neighbour_is_origin_minus_one_sixth() {
        let g0 = greens([0, 0, 0], 0.0).unwrap();
        let g1 = greens([0, -1, 0], 0.0).unwrap();
        assert!((g1 - (g0 - 1.0 / 6.0)).abs() < 1e-11);
    }

    #[test]
    fn symmetric_under_reflection_and_permutation() {
        let a = greens([2, -1, 3], 0.2).unwrap();
        let b = greens([-3, 2, 1], 0.2).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn rejects_negative_mass() {
        assert!(greens([0, 0, 0], -1.0).is_err());
    }
}
