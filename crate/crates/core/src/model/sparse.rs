use nalgebra::DMatrix;

/// Real symmetric matrix stored as compressed rows of its upper triangle
/// (diagonal included). Explicit zeros are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymmetricOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSymmetricOperator {
    /// Builds from per-row entries `(col, value)`; entries with `col < row`
    /// are mirrored into the upper triangle. Duplicates are summed.
    pub fn from_rows(dim: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        assert_eq!(rows.len(), dim);
        let mut upper: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        for (r, row) in rows.into_iter().enumerate() {
            for (c, v) in row {
                assert!(c < dim, "column out of range");
                if c >= r {
                    upper[r].push((c, v));
                } else {
                    upper[c].push((r, v));
                }
            }
        }
        Self::from_upper(dim, upper)
    }

    fn from_upper(dim: usize, mut upper: Vec<Vec<(usize, f64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in upper.iter_mut() {
            row.sort_by_key(|e| e.0);
            let mut i = 0;
            while i < row.len() {
                let c = row[i].0;
                let mut v = 0.0;
                while i < row.len() && row[i].0 == c {
                    v += row[i].1;
                    i += 1;
                }
                assert!(v.is_finite(), "non-finite matrix entry");
                if v != 0.0 {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        SparseSymmetricOperator { dim, row_ptr, cols, vals }
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_upper(dim, vec![Vec::new(); dim])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self::from_upper(diag.len(), diag.iter().enumerate().map(|(i, &v)| vec![(i, v)]).collect())
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    /// Number of stored (upper-triangle) entries.
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Stored entries `(row, col, value)` with `col >= row`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (r, c) = if r <= c { (r, c) } else { (c, r) };
        let span = &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]];
        match span.binary_search(&c) {
            Ok(k) => self.vals[self.row_ptr[r] + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries().all(|(r, c, _)| r == c)
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.iter_mut().for_each(|v| *v = 0.0);
        for r in 0..self.dim {
            let xr = x[r];
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[k];
                let v = self.vals[k];
                acc += v * x[c];
                if c != r {
                    y[c] += v * xr;
                }
            }
            y[r] += acc;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.matvec(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
            m[(c, r)] = v;
        }
        m
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut upper: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.dim];
        for (r, c, v) in self.entries() {
            upper[r].push((c, a * v));
        }
        for (r, c, v) in other.entries() {
            upper[r].push((c, b * v));
        }
        Self::from_upper(self.dim, upper)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(1.0, other, -1.0)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).entries().map(|(_, _, v)| v.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirrors_and_merges() {
        let op = SparseSymmetricOperator::from_rows(
            3,
            vec![vec![(0, 1.0), (2, 0.5)], vec![(1, 0.0)], vec![(0, 0.5), (2, -2.0)]],
        );
        assert_eq!(op.nnz(), 3);
        assert_eq!(op.get(2, 0), 1.0);
        assert_eq!(op.get(1, 1), 0.0);
        let y = op.apply(&[1.0, 1.0, 1.0]);
        assert_eq!(y, vec![2.0, 0.0, -1.0]);
        let d = op.to_dense();
        assert_eq!(d, d.transpose());
    }

    #[test]
    fn subtraction_drops_exact_zeros() {
        let a = SparseSymmetricOperator::from_diagonal(&[1.0, 2.0]);
        assert_eq!(a.sub(&a).nnz(), 0);
        assert_eq!(a.max_abs_diff(&a), 0.0);
    }
}
