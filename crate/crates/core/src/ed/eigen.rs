//! Dense and restarted-Lanczos symmetric eigensolvers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::SparseSymmetricOperator;
use crate::{Error, Result};

/// Rows above which the iterative solver is used.
pub const DENSE_THRESHOLD: usize = 4096;

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub dense_threshold: usize,
    /// Maximum Krylov basis size before a thick restart.
    pub krylov_dim: usize,
    pub max_restarts: usize,
    pub residual_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            dense_threshold: DENSE_THRESHOLD,
            krylov_dim: 60,
            max_restarts: 400,
            residual_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub sector_n: Option<usize>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal columns matching `eigenvalues`.
    pub eigenvectors: Option<DMatrix<f64>>,
    pub residual_tol: f64,
}

impl SpectrumResult {
    pub fn with_sector(mut self, n: usize) -> Self {
        self.sector_n = Some(n);
        self
    }

    pub fn vector(&self, i: usize) -> Option<Vec<f64>> {
        self.eigenvectors.as_ref().map(|v| v.column(i).iter().copied().collect())
    }
}

/// Eigenvalues (and optionally vectors) of `op`: the full spectrum when the
/// dimension is at most the dense threshold, otherwise the `k` lowest.
pub fn spectrum(op: &SparseSymmetricOperator, want_vectors: bool, k: Option<usize>) -> Result<SpectrumResult> {
    spectrum_with(op, want_vectors, k, &SolverOptions::default())
}

pub fn spectrum_with(
    op: &SparseSymmetricOperator,
    want_vectors: bool,
    k: Option<usize>,
    opts: &SolverOptions,
) -> Result<SpectrumResult> {
    let n = op.dimension();
    if n == 0 {
        return Err(Error::invalid("empty operator"));
    }
    if n <= opts.dense_threshold {
        let (values, vectors) = dense_eigh(op.to_dense());
        return Ok(SpectrumResult {
            sector_n: None,
            eigenvalues: values,
            eigenvectors: want_vectors.then_some(vectors),
            residual_tol: opts.residual_tol,
        });
    }
    let k = k.unwrap_or(6).clamp(1, n);
    let (values, vectors) = lanczos_lowest(op, k, opts)?;
    Ok(SpectrumResult {
        sector_n: None,
        eigenvalues: values,
        eigenvectors: want_vectors.then_some(vectors),
        residual_tol: opts.residual_tol,
    })
}

/// Full symmetric eigendecomposition with ascending eigenvalues.
pub fn dense_eigh(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Smallest eigenvalue of a dense symmetric matrix together with its index.
pub fn min_eigenvalue(m: DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

fn orthogonalize(w: &mut DVector<f64>, against: &[DVector<f64>]) {
    // Classical Gram-Schmidt, applied twice.
    for _ in 0..2 {
        for v in against {
            let c = v.dot(w);
            w.axpy(-c, v, 1.0);
        }
    }
}

/// Unit vector along the part of `w` orthogonal to `locked` and `basis`, or
/// `None` when that part is lost in rounding.
fn fresh_direction(mut w: DVector<f64>, locked: &[DVector<f64>], basis: &[DVector<f64>]) -> Option<DVector<f64>> {
    let start = w.norm();
    orthogonalize(&mut w, locked);
    orthogonalize(&mut w, basis);
    let nrm = w.norm();
    if !(nrm > 1e-10 * start) {
        return None;
    }
    w /= nrm;
    // Cancellation above leaves components of relative size eps/(nrm/start).
    orthogonalize(&mut w, locked);
    orthogonalize(&mut w, basis);
    let nrm = w.norm();
    Some(w / nrm)
}

fn apply(op: &SparseSymmetricOperator, v: &DVector<f64>) -> DVector<f64> {
    DVector::from_vec(op.apply(v.as_slice()))
}

/// Thick-restart Lanczos with full reorthogonalization for the lowest
/// eigenpairs of `op` restricted to the orthogonal complement of `locked`.
/// Returns Ritz pairs sorted ascending; all of the first `k` have residual
/// at most `opts.residual_tol`.
fn thick_restart(
    op: &SparseSymmetricOperator,
    k: usize,
    locked: &[DVector<f64>],
    seed: u64,
    opts: &SolverOptions,
) -> Result<Vec<(f64, DVector<f64>)>> {
    let n = op.dimension();
    let free = n - locked.len();
    let k = k.min(free);
    let m = opts.krylov_dim.max(2 * k + 10).min(free);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_unit = |rng: &mut ChaCha8Rng, basis: &[DVector<f64>]| -> Option<DVector<f64>> {
        (0..8).find_map(|_| fresh_direction(DVector::from_fn(n, |_, _| rng.gen_range(-0.5..0.5)), locked, basis))
    };
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(m + 1);
    let mut images: Vec<DVector<f64>> = Vec::with_capacity(m + 1);
    let v0 = random_unit(&mut rng, &basis).ok_or_else(|| Error::invalid("no free directions"))?;
    images.push(apply(op, &v0));
    basis.push(v0);
    let mut best = f64::INFINITY;
    for restart in 0..=opts.max_restarts {
        while basis.len() < m {
            let w = images.last().expect("non-empty").clone();
            let v = match fresh_direction(w, locked, &basis).or_else(|| random_unit(&mut rng, &basis)) {
                Some(v) => v,
                None => break,
            };
            images.push(apply(op, &v));
            basis.push(v);
        }
        let dim = basis.len();
        let h = DMatrix::from_fn(dim, dim, |i, j| 0.5 * (basis[i].dot(&images[j]) + basis[j].dot(&images[i])));
        let (theta, y) = dense_eigh(h);
        let ritz = |i: usize| -> (DVector<f64>, DVector<f64>) {
            let mut x = DVector::zeros(n);
            let mut ax = DVector::zeros(n);
            for j in 0..dim {
                x.axpy(y[(j, i)], &basis[j], 1.0);
                ax.axpy(y[(j, i)], &images[j], 1.0);
            }
            (x, ax)
        };
        let want = k.min(dim);
        let mut pairs = Vec::with_capacity(want);
        let mut worst: f64 = 0.0;
        let mut converged_prefix = None;
        for i in 0..want {
            let (x, ax) = ritz(i);
            // Residual of the operator deflated by the locked vectors; their
            // own small residuals would otherwise set a floor here.
            let mut res = &ax - &x * theta[i];
            orthogonalize(&mut res, locked);
            let r = res.norm();
            if r > opts.residual_tol && converged_prefix.is_none() {
                converged_prefix = Some(i);
            }
            worst = worst.max(r);
            pairs.push((theta[i], x, ax));
        }
        best = best.min(worst);
        let prefix = converged_prefix.unwrap_or(want);
        // After a restart, hand back the converged leading pairs so the
        // caller can lock them; the rest of a slow cluster then converges
        // in the complement.
        if prefix == want || dim == free || (restart > 0 && prefix > 0) {
            let take = if dim == free { want } else { prefix };
            return Ok(pairs.into_iter().take(take).map(|(t, x, _)| (t, x)).collect());
        }
        // Continue from the next Krylov direction, keeping the best Ritz vectors.
        // Residual of the last basis vector against the whole current basis,
        // not only the part that is kept.
        let next = fresh_direction(images.last().expect("non-empty").clone(), locked, &basis);
        let keep = (k + (m - k) / 2).min(dim - 1).max(k);
        let mut new_basis = Vec::with_capacity(m + 1);
        let mut new_images = Vec::with_capacity(m + 1);
        // The kept Ritz vectors are re-orthonormalized and their images
        // recomputed, so rounding in the combinations does not accumulate
        // over restarts into a residual floor.
        let kept = pairs.into_iter().take(keep).map(|(_, x, _)| x).chain((want..keep).map(|i| ritz(i).0));
        for x in kept {
            if let Some(v) = fresh_direction(x, locked, &new_basis) {
                new_images.push(apply(op, &v));
                new_basis.push(v);
            }
        }
        basis = new_basis;
        images = new_images;
        if let Some(v) = next.and_then(|v| fresh_direction(v, locked, &basis)).or_else(|| random_unit(&mut rng, &basis)) {
            images.push(apply(op, &v));
            basis.push(v);
        }
    }
    Err(Error::NotConverged { what: "Lanczos".into(), residual: best })
}

/// The `k` lowest eigenpairs by thick-restart Lanczos. Converged pairs are
/// locked and the search repeated from fresh start vectors in the
/// complement, so that degenerate eigenvalues are found with their
/// multiplicity.
pub fn lanczos_lowest(op: &SparseSymmetricOperator, k: usize, opts: &SolverOptions) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = op.dimension();
    let k = k.min(n);
    let mut found: Vec<(f64, DVector<f64>)> = Vec::new();
    let mut seed = 0x5eed_u64;
    let gap_tol = 1e-9 * (1.0 + op.max_abs());
    while found.len() < n {
        seed = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let locked: Vec<DVector<f64>> = found.iter().map(|p| p.1.clone()).collect();
        let need = if found.len() < k { k - found.len() } else { 1 };
        let batch = thick_restart(op, need, &locked, seed, opts)?;
        let current_max = if found.len() >= k {
            found[k - 1].0
        } else {
            f64::INFINITY
        };
        let mut added = false;
        for (theta, x) in batch {
            if found.len() >= k && theta >= current_max - gap_tol {
                break;
            }
            found.push((theta, x));
            added = true;
        }
        found.sort_by(|a, b| a.0.total_cmp(&b.0));
        if found.len() >= k && !added {
            break;
        }
    }
    found.truncate(k);
    let values = found.iter().map(|p| p.0).collect();
    let mut vectors = DMatrix::zeros(n, k);
    for (j, (_, x)) in found.iter().enumerate() {
        vectors.set_column(j, x);
    }
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{heisenberg_operator, Boundary, LatticeBox, SectorBasis, SpinValue};

    fn forced() -> SolverOptions {
        SolverOptions { dense_threshold: 0, krylov_dim: 24, ..SolverOptions::default() }
    }

    fn sector(dim: usize, side: usize, two_s: u32, n: usize) -> SparseSymmetricOperator {
        let l = LatticeBox::new(dim, side).unwrap();
        heisenberg_operator(&SectorBasis::new(&l, SpinValue::new(two_s).unwrap(), n).unwrap(), Boundary::Open)
    }

    #[test]
    fn lanczos_matches_dense_with_multiplicity() {
        // Cubic symmetry makes the low levels of these sectors degenerate.
        for (op, k) in [(sector(3, 2, 1, 2), 10), (sector(2, 3, 1, 3), 12), (sector(1, 4, 2, 4), 8)] {
            let (dense, _) = dense_eigh(op.to_dense());
            let (values, vectors) = lanczos_lowest(&op, k, &forced()).unwrap();
            assert_eq!(values.len(), k);
            for (a, b) in values.iter().zip(&dense) {
                assert!((a - b).abs() < 1e-8, "{values:?} vs {:?}", &dense[..k]);
            }
            let gram = vectors.transpose() * &vectors;
            assert!((gram - DMatrix::identity(k, k)).abs().max() < 1e-8);
            for (i, &e) in values.iter().enumerate() {
                let v = vectors.column(i).into_owned();
                let r = (apply(&op, &v) - &v * e).norm();
                assert!(r < 1e-7, "residual {r}");
            }
        }
    }

    #[test]
    fn dense_path_returns_everything() {
        let op = sector(1, 4, 1, 2);
        let s = spectrum(&op, true, Some(2)).unwrap();
        assert_eq!(s.eigenvalues.len(), 6);
        assert!(s.eigenvalues[0].abs() < 1e-12);
        assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(s.vector(5).unwrap().len(), 6);
    }

    #[test]
    fn iterative_path_is_reproducible() {
        let op = sector(2, 3, 1, 3);
        let a = spectrum_with(&op, false, Some(5), &forced()).unwrap();
        let b = spectrum_with(&op, false, Some(5), &forced()).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
    }
}
