//! Summation and quadrature, with a small log-log fit.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Pairwise (tree) summation. The split points depend only on the length,
/// so the result is reproducible for a fixed input order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Outcome of an adaptive quadrature.
#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
    pub converged: bool,
}

// Gauss-Kronrod 7/15 nodes and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss-Kronrod quadrature over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Quadrature {
    integrate_breaks(f, &[a, b], abs_tol, rel_tol, 4000)
}

/// Adaptive quadrature starting from the partition given by `breaks`
/// (ascending). Bisects the interval with the largest error estimate until
/// the summed estimate drops below `max(abs_tol, rel_tol * |value|)`.
pub fn integrate_breaks<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Quadrature {
    let mut heap = BinaryHeap::new();
    let (mut run_value, mut run_error) = (0.0, 0.0);
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (value, error) = gk15(&f, w[0], w[1]);
            run_value += value;
            run_error += error;
            heap.push(Piece { a: w[0], b: w[1], value, error });
        }
    }
    loop {
        // Running sums steer the loop; the reported totals are recomputed
        // in interval order before returning.
        let target = abs_tol.max(rel_tol * run_value.abs());
        if run_error <= target || heap.len() >= max_intervals {
            let (value, error) = totals(&heap);
            let target = abs_tol.max(rel_tol * value.abs());
            if error <= target || heap.len() >= max_intervals {
                return Quadrature {
                    value,
                    error,
                    intervals: heap.len(),
                    converged: error <= target,
                };
            }
            run_value = value;
            run_error = error;
        }
        let worst = heap.pop().expect("non-empty partition");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval can no longer be split in floating point.
            run_error -= worst.error;
            heap.push(Piece { error: 0.0, ..worst });
            continue;
        }
        run_value -= worst.value;
        run_error -= worst.error;
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gk15(&f, a, b);
            run_value += value;
            run_error += error;
            heap.push(Piece { a, b, value, error });
        }
        if run_error < 0.0 {
            run_error = 0.0;
        }
    }
}

fn totals(heap: &BinaryHeap<Piece>) -> (f64, f64) {
    // Sum in interval order so the result does not depend on heap layout.
    let mut pieces: Vec<&Piece> = heap.iter().collect();
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
    let values: Vec<f64> = pieces.iter().map(|p| p.value).collect();
    let errors: Vec<f64> = pieces.iter().map(|p| p.error).collect();
    (pairwise_sum(&values), pairwise_sum(&errors))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let q = integrate(|x| x.powi(7) - 3.0 * x * x, 0.0, 2.0, 1e-14, 0.0);
        assert!((q.value - (32.0 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn log_singularity_converges() {
        // integral of ln x over (0,1] is -1
        let q = integrate(|x: f64| x.ln(), 0.0, 1.0, 1e-10, 0.0);
        assert!(q.converged);
        assert!((q.value + 1.0).abs() < 1e-9);
    }

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let xs: Vec<f64> = (1..=1000).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&xs), 500500.0);
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
        assert!((loglog_slope(&xs, &ys) - 1.5).abs() < 1e-12);
    }
}
