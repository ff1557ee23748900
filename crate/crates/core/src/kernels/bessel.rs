//! Modified Bessel functions of the first kind, integer order.
//!
//! Two independent routes: the integral representation evaluated by
//! adaptive quadrature (accurate, slow), and a Miller backward recurrence
//! normalized by `I_0 + 2 sum_k I_k = e^x`, switching to the Hankel
//! asymptotic series for large arguments (fast, used inside quadratures).

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::ed::InequalityCertificate;
use crate::numeric::integrate_breaks;
use crate::{Error, Result};

/// `e^{-t} I_n(t)` from
/// `I_n(t) = (t/2)^n / (sqrt(pi) Gamma(n+1/2)) int_0^pi sin^{2n}(th) e^{t cos th} dth`.
pub fn bessel_in_scaled(n: u32, t: f64) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("Bessel argument must be finite and >= 0 (got {t})")));
    }
    if t == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    let nf = n as f64;
    let log_pref = nf * (t / 2.0).ln() - ln_gamma(nf + 0.5) - 0.5 * PI.ln();
    // The integrand peaks where 2n cot(th) = t sin(th); split around it.
    let width = 1.0 / t.sqrt().max(1.0);
    let peak = if n == 0 { 0.0 } else { (2.0 * nf / (t + 2.0 * nf)).sqrt().asin().min(PI) };
    let mut breaks = vec![0.0, PI];
    for c in [0.5, 1.0, 2.0, 4.0, 8.0] {
        breaks.push((peak + c * width).min(PI));
        if peak > c * width {
            breaks.push(peak - c * width);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let log_sin_scale = |th: f64| -> f64 {
        let s = th.sin();
        if s <= 0.0 {
            if n == 0 {
                (-2.0 * t * (0.5 * th).sin().powi(2)).exp()
            } else {
                0.0
            }
        } else {
            (2.0 * nf * s.ln() - 2.0 * t * (0.5 * th).sin().powi(2) + log_pref).exp()
        }
    };
    let q = integrate_breaks(log_sin_scale, &breaks, 1e-300, 1e-13, 4000);
    if !q.converged {
        return Err(Error::NotConverged { what: format!("Bessel I_{n}({t})"), residual: q.error });
    }
    Ok(q.value)
}

/// `I_n(t)` by the integral representation.
pub fn bessel_in(n: u32, t: f64) -> Result<f64> {
    Ok(bessel_in_scaled(n, t)? * t.exp())
}

/// Ascending series `sum_k (t/2)^{2k+n} / (k! (k+n)!)`.
pub fn bessel_in_series(n: u32, t: f64) -> f64 {
    let half = t / 2.0;
    let mut term = (0..n).fold(1.0, |acc, k| acc * half / (k + 1) as f64);
    let mut sum = term;
    for k in 1..200 {
        term *= half * half / (k as f64 * (k + n) as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

fn hankel_scaled(n: usize, x: f64) -> f64 {
    let mu = 4.0 * (n * n) as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..80 {
        let odd = (2 * k - 1) as f64;
        term *= -(mu - odd * odd) / (8.0 * k as f64 * x);
        if term.abs() >= prev {
            break;
        }
        sum += term;
        prev = term.abs();
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}

/// `e^{-x} I_k(x)` for `k = 0..=nmax`.
pub fn scaled_bessel_sequence(x: f64, nmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    scaled_bessel_into(x, &mut out);
    out
}

/// In-place variant of [`scaled_bessel_sequence`]; fills `out[k]` for all `k`.
pub fn scaled_bessel_into(x: f64, out: &mut [f64]) {
    let nmax = out.len().saturating_sub(1);
    if x <= 0.0 {
        out.iter_mut().for_each(|v| *v = 0.0);
        if let Some(v) = out.first_mut() {
            *v = 1.0;
        }
        return;
    }
    let nm = nmax as f64;
    if x >= 50.0 && x >= 2.0 * nm * nm {
        for (k, v) in out.iter_mut().enumerate() {
            *v = hankel_scaled(k, x);
        }
        return;
    }
    let start = ((nm * nm + 80.0 * x).sqrt().ceil() as usize + 30).max(nmax + 30);
    let mut above = 0.0f64;
    let mut current = 1e-280f64;
    let mut sum = 0.0f64;
    out.iter_mut().for_each(|v| *v = 0.0);
    for k in (1..=start).rev() {
        if k <= nmax {
            out[k] = current;
        }
        sum += 2.0 * current;
        let below = (2.0 * k as f64 / x) * current + above;
        above = current;
        current = below;
        if current > 1e250 {
            let r = 1e-250;
            current *= r;
            above *= r;
            sum *= r;
            out.iter_mut().for_each(|v| *v *= r);
        }
    }
    out[0] = current;
    sum += current;
    out.iter_mut().for_each(|v| *v /= sum);
}

/// Heat kernel on the diagonal of Z^dim: `e^{-2 dim t} I_0(2t)^dim`.
pub fn heat_kernel_diag(t: f64, dim: u32) -> f64 {
    scaled_bessel_sequence(2.0 * t, 0)[0].powi(dim as i32)
}

/// `I_0(t) <= 2 e^t / sqrt(pi t)` on `points` log-spaced times in
/// `[1e-2, 1e2]`, using the quadrature route.
pub fn i0_bound_check(points: usize) -> Result<InequalityCertificate> {
    if points < 2 {
        return Err(Error::invalid("need at least two sample points"));
    }
    let mut worst = (f64::INFINITY, String::from("none"));
    for k in 0..points {
        let t = 10f64.powf(-2.0 + 4.0 * k as f64 / (points - 1) as f64);
        // Compared in the scaled form e^{-t} I_0(t) <= 2 / sqrt(pi t).
        let slack = 2.0 / (PI * t).sqrt() - bessel_in_scaled(0, t)?;
        if slack < worst.0 {
            worst = (slack, format!("t={t:.4e}"));
        }
    }
    Ok(InequalityCertificate::new("i0_bound", worst.0, 0.0, worst.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    // Reference values computed with an arbitrary-precision library.
    const REFERENCE: [(u32, f64, f64); 7] = [
        (0, 0.5, 1.063_483_370_741_323_5),
        (1, 1.0, 0.565_159_103_992_485_0),
        (3, 2.0, 0.212_739_959_239_852_66),
        (0, 10.0, 2815.716_628_466_254_5),
        (5, 20.0, 23_018_392.213_413_67),
        (2, 100.0, 1.052_384_319_324_310_6e42),
        (10, 3.0, 1.946_439_347_061_296_9e-5),
    ];

    #[test]
    fn quadrature_matches_reference() {
        for (n, t, v) in REFERENCE {
            assert!(close(bessel_in(n, t).unwrap(), v, 1e-11), "I_{n}({t})");
        }
        assert_eq!(bessel_in(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_in(1, 0.0).unwrap(), 0.0);
        assert!(close(bessel_in(0, 1.0).unwrap(), 1.266_065_877_752_008_4, 1e-12));
    }

    #[test]
    fn sequence_matches_reference() {
        for (n, t, v) in REFERENCE {
            let seq = scaled_bessel_sequence(t, n as usize + 3);
            assert!(close(seq[n as usize] * t.exp(), v, 1e-12), "I_{n}({t})");
        }
    }

    #[test]
    fn series_matches_quadrature_for_small_arguments() {
        for n in 0..8 {
            for t in [0.01, 0.3, 1.0, 1.7, 2.0] {
                let a = bessel_in_series(n, t);
                let b = bessel_in(n, t).unwrap();
                assert!(close(a, b, 1e-11), "n={n} t={t}: {a} {b}");
            }
        }
    }

    #[test]
    fn sequence_matches_quadrature_across_regimes() {
        for x in [1e-6, 0.1, 3.0, 49.0, 51.0, 400.0, 5000.0, 2e5] {
            let seq = scaled_bessel_sequence(x, 40);
            for n in [0usize, 1, 2, 7, 20, 40] {
                let q = bessel_in_scaled(n as u32, x).unwrap();
                assert!((seq[n] - q).abs() <= 1e-12 * q.max(1e-290) + 1e-300, "n={n} x={x}: {} {q}", seq[n]);
            }
        }
    }

    #[test]
    fn heat_kernel_starts_at_one() {
        assert_eq!(heat_kernel_diag(0.0, 3), 1.0);
    }

    #[test]
    fn i0_bound_holds() {
        let c = i0_bound_check(41).unwrap();
        assert!(c.passed && c.min_slack > 0.0);
        for t in [0.1, 1.0, 10.0] {
            assert!(bessel_in(0, t).unwrap() <= 2.0 * t.exp() / (PI * t).sqrt());
        }
    }
}
