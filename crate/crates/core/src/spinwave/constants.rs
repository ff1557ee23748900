//! Closed-form constants of the spin-wave expansion.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::kernels::greens::watson_constant;
use crate::numeric::{integrate_breaks, pairwise_sum};
use crate::{Error, Result};

/// Terms summed directly before the Euler-Maclaurin tail.
pub const ZETA_TERMS: usize = 1_000_000;

/// Riemann zeta for real `s > 1`: direct sum of the first `ZETA_TERMS - 1`
/// terms plus an Euler-Maclaurin tail from `N = ZETA_TERMS`.
pub fn zeta(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::invalid(format!("zeta needs s > 1 (got {s})")));
    }
    let n = ZETA_TERMS;
    let terms: Vec<f64> = (1..n).rev().map(|k| (k as f64).powf(-s)).collect();
    let nf = n as f64;
    let tail = nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s) + s / 12.0 * nf.powf(-s - 1.0)
        - s * (s + 1.0) * (s + 2.0) / 720.0 * nf.powf(-s - 3.0);
    Ok(pairwise_sum(&terms) + tail)
}

/// `zeta(3/2)` and `zeta(5/2)`, computed once.
pub fn zeta_half_integers() -> (f64, f64) {
    static CACHE: OnceLock<(f64, f64)> = OnceLock::new();
    *CACHE.get_or_init(|| (zeta(1.5).expect("s > 1"), zeta(2.5).expect("s > 1")))
}

/// Where a constant came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantRecord {
    pub name: String,
    pub value: f64,
    pub formula: String,
    pub method: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// `-zeta(5/2) / (8 pi^{3/2})`.
    pub c0: f64,
    /// The same constant by radial quadrature.
    pub c0_quadrature: f64,
    /// `8 pi^{-3} zeta(3/2)^2`.
    pub c3: f64,
    /// Massless Green's function of Z^3 at the origin.
    pub c4: f64,
    /// Positive root of `6 b^2 / sinh^2 b = b`.
    pub b0: f64,
    pub zeta_3_2: f64,
    pub zeta_5_2: f64,
    pub records: Vec<ConstantRecord>,
}

impl Constants {
    pub fn c0_agreement(&self) -> f64 {
        (self.c0 - self.c0_quadrature).abs()
    }
}

/// `(2 pi)^{-3} int_{R^3} ln(1 - e^{-|p|^2}) dp = (2 pi^2)^{-1} int_0^inf p^2 ln(1 - e^{-p^2}) dp`.
pub fn c0_by_quadrature() -> Result<(f64, f64)> {
    let f = |p: f64| p * p * (-(-p * p).exp_m1()).ln();
    let q = integrate_breaks(f, &[0.0, 0.5, 1.0, 2.0, 4.0, 8.0], 1e-15, 1e-12, 2000);
    // Tail beyond 8: |ln(1-e^{-p^2})| <= 2 e^{-p^2} there, and
    // int_8^inf p^2 e^{-p^2} dp < 5 e^{-64}.
    let tail = 10.0 * (-64.0f64).exp();
    if !q.converged {
        return Err(Error::NotConverged { what: "C0 radial quadrature".into(), residual: q.error });
    }
    Ok((q.value / (2.0 * PI * PI), (q.error + tail) / (2.0 * PI * PI)))
}

/// Bisection for the root of `6 b / sinh^2 b - 1` on `[1, 3]`.
pub fn b0_by_bisection(tol: f64) -> f64 {
    let g = |b: f64| 6.0 * b / b.sinh().powi(2) - 1.0;
    let (mut lo, mut hi) = (1.0f64, 3.0f64);
    debug_assert!(g(lo) > 0.0 && g(hi) < 0.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All constants, each with its provenance.
pub fn constants() -> Result<Constants> {
    let (z32, z52) = zeta_half_integers();
    let c0 = -z52 / (8.0 * PI.powf(1.5));
    let (c0_quadrature, c0_err) = c0_by_quadrature()?;
    let c3 = 8.0 / PI.powi(3) * z32 * z32;
    let c4 = watson_constant();
    let b0 = b0_by_bisection(1e-14);
    let rec = |name: &str, value: f64, formula: &str, method: String| ConstantRecord {
        name: name.into(),
        value,
        formula: formula.into(),
        method,
    };
    let records = vec![
        rec("zeta(3/2)", z32, "sum_n n^{-3/2}", format!("direct sum to {ZETA_TERMS} + Euler-Maclaurin tail")),
        rec("zeta(5/2)", z52, "sum_n n^{-5/2}", format!("direct sum to {ZETA_TERMS} + Euler-Maclaurin tail")),
        rec("C0", c0, "-zeta(5/2)/(8 pi^{3/2})", "series".into()),
        rec(
            "C0 (quadrature)",
            c0_quadrature,
            "(2 pi^2)^{-1} int_0^inf p^2 ln(1-e^{-p^2}) dp",
            format!("adaptive Gauss-Kronrod on [0,8], error <= {c0_err:.1e}"),
        ),
        rec("C3", c3, "8 pi^{-3} zeta(3/2)^2", "series".into()),
        rec("C4", c4, "(sqrt3-1) Gamma(1/24)^2 Gamma(11/24)^2/(192 pi^3)", "closed form".into()),
        rec("b0", b0, "6 b^2/sinh^2 b = b", "bisection on [1,3] to 1e-14".into()),
    ];
    Ok(Constants { c0, c0_quadrature, c3, c4, b0, zeta_3_2: z32, zeta_5_2: z52, records })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from an arbitrary-precision library.
    const ZETA_3_2: f64 = 2.612_375_348_685_488_3;
    const ZETA_5_2: f64 = 1.341_487_257_250_917_2;
    const ZETA_7_2: f64 = 1.126_733_867_317_056_6;
    const C0: f64 = -0.030_114_229_487_159_4;
    const C3: f64 = 1.760_806_054_280_14;
    const B0: f64 = 1.941_578_040_175_24;

    #[test]
    fn zeta_values() {
        assert!((zeta(1.5).unwrap() - ZETA_3_2).abs() < 1e-13);
        assert!((zeta(2.5).unwrap() - ZETA_5_2).abs() < 1e-14);
        assert!((zeta(3.5).unwrap() - ZETA_7_2).abs() < 1e-14);
        assert!(zeta(1.0).is_err());
    }

    #[test]
    fn constants_match_reference() {
        let c = constants().unwrap();
        assert!((c.c0 - C0).abs() < 1e-15);
        assert!((c.c0_quadrature - C0).abs() < 1e-12);
        assert!((c.c3 - C3).abs() < 1e-13);
        assert!((c.b0 - B0).abs() < 1e-9);
        assert!((c.c4 - 0.252_731_009_858_663).abs() < 1e-13);
        assert!(c.c0 < 0.0);
        assert_eq!(c.records.len(), 7);
    }

    #[test]
    fn published_roundings() {
        let c = constants().unwrap();
        assert!((c.b0 - 1.942).abs() < 1e-3);
        assert!((c.c4 - 0.2527).abs() < 5e-4);
        assert!((6.0 * c.c4 - 1.0 - 0.516).abs() < 1e-3);
        assert!((3.0 * c.c4 - 0.5 - 0.2582).abs() < 1e-4);
    }
}
