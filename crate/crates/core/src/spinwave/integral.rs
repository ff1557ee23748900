//! The Brillouin-zone integral `(2 pi)^{-3} int ln(1 - e^{-bs eps(p)}) dp`
//! and its comparison with lattice sums and the continuum constant.
//!
//! Expanding the logarithm and integrating each factor gives
//! `-sum_k k^{-1} g(k bs)^3` with `g(a) = e^{-2a} I_0(2a)`. The continuum
//! value `C0 bs^{-3/2}` is the same series with `g(a)` replaced by its
//! leading asymptotics `(4 pi a)^{-1/2}`, so the difference converges fast.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::constants::zeta_half_integers;
use super::dispersion::{cube_log_sum, GridBoundary};
use crate::ed::InequalityCertificate;
use crate::kernels::scaled_bessel_sequence;
use crate::model::SpinValue;
use crate::numeric::{integrate_breaks, pairwise_sum};
use crate::{Error, Result};

/// Terms summed directly in the lattice series.
const DIRECT_TERMS: usize = 20_000;

// e^{-x} I_0(x) sqrt(2 pi x) = 1 + a1/x + a2/x^2 + a3/x^3 + ...
const HANKEL: [f64; 3] = [1.0 / 8.0, 9.0 / 128.0, 225.0 / 3072.0];

/// `g(a) = e^{-2a} I_0(2a)`, the one-dimensional return probability density.
pub fn return_density(a: f64) -> f64 {
    scaled_bessel_sequence(2.0 * a, 0)[0]
}

/// `sum_{k > n} k^{-s}` by Euler-Maclaurin.
fn zeta_tail(s: f64, n: usize) -> f64 {
    let nf = n as f64;
    nf.powf(1.0 - s) / (s - 1.0) - 0.5 * nf.powf(-s) + s / 12.0 * nf.powf(-s - 1.0)
}

/// `sum_k k^{-p} [g(k bs)^3 - (4 pi k bs)^{-3/2}]`.
pub fn cube_series_excess(bs: f64, p: f64) -> Result<f64> {
    if !(bs > 0.0 && bs.is_finite()) {
        return Err(Error::invalid(format!("bs must be positive (got {bs})")));
    }
    let lead = |a: f64| (4.0 * PI * a).powf(-1.5);
    let terms: Vec<f64> = (1..=DIRECT_TERMS)
        .rev()
        .map(|k| {
            let a = k as f64 * bs;
            (k as f64).powf(-p) * (return_density(a).powi(3) - lead(a))
        })
        .collect();
    // h(a)^3 - 1 with h(a) = 1 + c1/a + c2/a^2 + c3/a^3, c_m = a_m / 2^m.
    let c1 = HANKEL[0] / 2.0;
    let c2 = HANKEL[1] / 4.0;
    let c3 = HANKEL[2] / 8.0;
    let d1 = 3.0 * c1;
    let d2 = 3.0 * c2 + 3.0 * c1 * c1;
    let d3 = 3.0 * c3 + 6.0 * c1 * c2 + c1 * c1 * c1;
    let base = p + 1.5;
    let tail = lead(bs)
        * (d1 / bs * zeta_tail(base + 1.0, DIRECT_TERMS)
            + d2 / (bs * bs) * zeta_tail(base + 2.0, DIRECT_TERMS)
            + d3 / bs.powi(3) * zeta_tail(base + 3.0, DIRECT_TERMS));
    Ok(pairwise_sum(&terms) + tail)
}

/// Split of the lattice integral into the continuum term and the rest.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralSplit {
    /// `C0 bs^{-3/2}`.
    pub main: f64,
    /// Lattice integral minus `main`.
    pub excess: f64,
}

impl IntegralSplit {
    pub fn total(&self) -> f64 {
        self.main + self.excess
    }
}

/// `(2 pi)^{-3} int_{[-pi,pi]^3} ln(1 - e^{-bs eps(p)}) dp`.
pub fn lattice_integral(bs: f64) -> Result<IntegralSplit> {
    let c0 = -zeta_half_integers().1 / (8.0 * PI.powf(1.5));
    Ok(IntegralSplit { main: c0 * bs.powf(-1.5), excess: -cube_series_excess(bs, 1.0)? })
}

/// Mean occupation of a site for free bosons on Z^3: `sum_k g(k bs)^3`.
pub fn site_occupation(bs: f64) -> Result<f64> {
    Ok((4.0 * PI * bs).powf(-1.5) * zeta_half_integers().0 + cube_series_excess(bs, 0.0)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiemannReport {
    pub beta: f64,
    pub two_s: u32,
    pub ell: usize,
    /// `(beta l^3)^{-1} sum_D ln(1 - e^{-beta S eps})`.
    pub dirichlet_sum: f64,
    /// Same over the Neumann grid without the zero mode.
    pub neumann_sum: f64,
    /// `beta^{-1}` times the lattice integral.
    pub integral: f64,
    /// `C0 S^{-3/2} beta^{-5/2}`.
    pub main: f64,
    /// `(dirichlet_sum - integral) S beta^2 l`: the smallest constant for
    /// which the Dirichlet Riemann bound holds.
    pub dirichlet_constant: f64,
    /// `(integral - neumann_sum) S beta^2 l`.
    pub neumann_constant: f64,
    /// Exponent used for the upper corridor term `C / (beta (beta S)^alpha)`.
    pub alpha: f64,
    /// `(integral - main) beta (beta S)^alpha`.
    pub upper_corridor_constant: f64,
    /// `(integral / main - 1) beta S`.
    pub lower_corridor_constant: f64,
    /// Upper corridor edge from `eps(p) <= |p|^2`: the integral exceeds the
    /// continuum value at most by the part of R^3 outside the zone.
    pub upper_edge: f64,
    /// Explicit lower corridor edge from `eps(p) >= |p|^2 max(1 - |p|^2/12, 4/pi^2)`.
    pub lower_edge: f64,
    pub corridor: InequalityCertificate,
}

/// Riemann-sum and corridor comparison at inverse temperature `beta`.
pub fn riemann_and_integral_checks(beta: f64, spin: SpinValue, ell: usize, alpha: f64) -> Result<RiemannReport> {
    let s = spin.s();
    let bs = beta * s;
    if !(bs >= 1.0) {
        return Err(Error::Precondition(format!("needs beta S >= 1 (got {bs})")));
    }
    if ell == 0 {
        return Err(Error::invalid("ell must be positive"));
    }
    let split = lattice_integral(bs)?;
    let integral = split.total() / beta;
    let main = split.main / beta;
    let dirichlet_sum = cube_log_sum(ell, 3, GridBoundary::Dirichlet, bs)? / beta;
    let neumann_sum = cube_log_sum(ell, 3, GridBoundary::Neumann, bs)? / beta;
    let scale = s * beta * beta * ell as f64;

    // Outside the zone: (2 pi^2)^{-1} int_pi^inf p^2 |ln(1 - e^{-bs p^2})| dp,
    // with |ln(1 - e^{-y})| <= e^{-y} / (1 - e^{-y}).
    let outside = {
        let q = integrate_breaks(|p: f64| p * p * (-bs * p * p).exp(), &[PI, PI + 1.0, PI + 4.0, PI + 16.0], 1e-300, 1e-10, 2000);
        let far = (-bs * (PI + 16.0).powi(2)).exp();
        (q.value + far) / (1.0 - (-bs * PI * PI).exp()) / (2.0 * PI * PI)
    };
    let upper_edge = outside / beta;

    let inner = integrate_breaks(
        |p: f64| {
            let y = 2.0 * bs * p * p / 3.0;
            if y == 0.0 {
                return 0.0;
            }
            p * p * (bs * p.powi(4) / 12.0) / y.exp_m1()
        },
        &[0.0, 0.5, 1.0, 2.0],
        1e-300,
        1e-10,
        2000,
    );
    let outer = integrate_breaks(
        |p: f64| p * p * (-(-4.0 * bs * p * p / (PI * PI)).exp_m1()).ln(),
        &[2.0, 3.0, 5.0, 10.0, 30.0],
        1e-300,
        1e-10,
        2000,
    );
    let lower_edge = (-inner.value + outer.value) / (2.0 * PI * PI) / beta;
    let excess = integral - main;
    let slack_upper = upper_edge - excess;
    let slack_lower = excess - lower_edge;
    let corridor = InequalityCertificate::new(
        "integral_corridor",
        slack_upper.min(slack_lower),
        1e-12 * main.abs(),
        if slack_upper < slack_lower { "upper edge" } else { "lower edge" },
    )
    .with_note(format!("integral - main = {excess:.6e}, edges [{lower_edge:.6e}, {upper_edge:.6e}]"));
    Ok(RiemannReport {
        beta,
        two_s: spin.two_s(),
        ell,
        dirichlet_sum,
        neumann_sum,
        integral,
        main,
        dirichlet_constant: (dirichlet_sum - integral) * scale,
        neumann_constant: (integral - neumann_sum) * scale,
        alpha,
        upper_corridor_constant: excess * beta * bs.powf(alpha),
        lower_corridor_constant: (integral / main - 1.0) * bs,
        upper_edge,
        lower_edge,
        corridor,
    })
}

/// Sampled check of `eps(p) <= |p|^2` on the zone.
pub fn dispersion_bound_check(samples: usize, seed: u64) -> InequalityCertificate {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = (f64::INFINITY, String::from("none"));
    for _ in 0..samples {
        let p: [f64; 3] = [0, 1, 2].map(|_| rng.gen_range(-PI..=PI));
        let eps: f64 = p.iter().map(|&c| 2.0 * (1.0 - c.cos())).sum();
        let slack = p.iter().map(|c| c * c).sum::<f64>() - eps;
        if slack < worst.0 {
            worst = (slack, format!("p={p:?}"));
        }
    }
    InequalityCertificate::new("dispersion_bound", worst.0, 1e-15, worst.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Brillouin-zone integrals from an independent 10^7-term Bessel series
    // (separate I_0 implementation) with its power-law tail; a direct
    // three-dimensional quadrature agrees to 1e-8.
    const ZONE: [(f64, f64); 2] = [(1.0, -0.037_675_369_922_556_39), (5.0, -0.002_784_464_851_378_67)];

    #[test]
    fn zone_integral_matches_reference() {
        for (bs, v) in ZONE {
            let got = lattice_integral(bs).unwrap().total();
            assert!((got - v).abs() < 1e-13, "{bs}: {got} vs {v}");
        }
    }

    #[test]
    fn occupation_matches_direct_series() {
        // At bs = 1 the direct series converges like k^{-3/2}; compare with a
        // long partial sum plus its integral tail.
        let bs = 1.0;
        let n = 2_000_000usize;
        let direct: f64 = (1..=n).rev().map(|k| return_density(k as f64 * bs).powi(3)).sum();
        let tail = (4.0 * PI * bs).powf(-1.5) * 2.0 / (n as f64).sqrt();
        let got = site_occupation(bs).unwrap();
        assert!((got - (direct + tail)).abs() < 1e-10, "{got} {}", direct + tail);
    }

    #[test]
    fn riemann_sums_converge() {
        let spin = SpinValue::half();
        let beta = 4.0;
        let mut prev = f64::INFINITY;
        for ell in [8, 16, 32, 64] {
            let r = riemann_and_integral_checks(beta, spin, ell, 1.0).unwrap();
            let gap = (r.dirichlet_sum - r.integral).abs();
            assert!(gap < prev);
            prev = gap;
            assert!(r.dirichlet_sum >= r.integral);
            assert!(r.neumann_sum <= r.integral + 1e-15);
        }
    }

    #[test]
    fn corridor_holds() {
        let r = riemann_and_integral_checks(200.0, SpinValue::half(), 32, 1.0).unwrap();
        assert!(r.corridor.passed, "{:?}", r.corridor);
        assert!(r.lower_corridor_constant > 0.0);
    }

    #[test]
    fn dispersion_dominated_by_quadratic() {
        assert!(dispersion_bound_check(100_000, 7).passed);
    }
}
