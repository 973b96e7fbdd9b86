//! Minimal sparse kernel: CSR storage, reverse Cuthill-McKee ordering and a
//! banded Cholesky factorization. This is all the sparse machinery the
//! shift-inverted eigensolver and the Steklov Schur complement need at desk
//! scale; matrices stay in the tens of thousands of nonzeros.

use crate::scalar::Real;
use std::io::Write;

#[derive(Debug, thiserror::Error)]
pub enum SparseError {
    #[error("matrix is not positive definite: pivot {pivot} at column {col}")]
    NotPositiveDefinite { col: usize, pivot: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> Csr<T> {
    /// Builds from (row, col, value) triplets, summing duplicates.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut per_row: Vec<Vec<(usize, T)>> = vec![Vec::new(); nrows];
        for &(i, j, v) in triplets {
            assert!(i < nrows && j < ncols, "triplet out of bounds");
            per_row[i].push((j, v));
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in &mut per_row {
            row.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut v = T::zero();
                while k < row.len() && row[k].0 == j {
                    v += row[k].1;
                    k += 1;
                }
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Csr { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi].iter().copied().zip(self.values[lo..hi].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.row(i).find(|&(c, _)| c == j).map_or(T::zero(), |(_, v)| v)
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    /// y = A x
    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for i in 0..self.nrows {
            let mut acc = T::zero();
            for (j, v) in self.row(i) {
                acc += v * x[j];
            }
            y[i] = acc;
        }
    }

    pub fn matvec_alloc(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.nrows];
        self.matvec(x, &mut y);
        y
    }

    /// x' A x for square symmetric A.
    pub fn quadratic_form(&self, x: &[T]) -> T {
        let mut acc = T::zero();
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                acc += x[i] * v * x[j];
            }
        }
        acc
    }

    pub fn sum_entries(&self) -> T {
        self.values.iter().copied().sum()
    }

    /// self + c * other, assuming identical dimensions.
    pub fn add_scaled(&self, other: &Csr<T>, c: T) -> Csr<T> {
        assert_eq!(self.nrows, other.nrows);
        assert_eq!(self.ncols, other.ncols);
        let mut triplets: Vec<(usize, usize, T)> = self.triplets().collect();
        triplets.extend(other.triplets().map(|(i, j, v)| (i, j, c * v)));
        Csr::from_triplets(self.nrows, self.ncols, &triplets)
    }

    pub fn scale(&self, c: T) -> Csr<T> {
        let mut out = self.clone();
        for v in &mut out.values {
            *v = *v * c;
        }
        out
    }

    /// Extracts the submatrix with the given rows and columns (in the given
    /// order). Index maps are assumed duplicate free.
    pub fn restrict(&self, rows: &[usize], cols: &[usize]) -> Csr<T> {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (new, &old) in cols.iter().enumerate() {
            col_map[old] = new;
        }
        let mut triplets = Vec::new();
        for (new_i, &old_i) in rows.iter().enumerate() {
            for (j, v) in self.row(old_i) {
                if col_map[j] != usize::MAX {
                    triplets.push((new_i, col_map[j], v));
                }
            }
        }
        Csr::from_triplets(rows.len(), cols.len(), &triplets)
    }

    /// Maximum |A_ij - A_ji| over all stored entries.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for (i, j, v) in self.triplets() {
            let d = (v - self.get(j, i)).abs();
            if d > worst {
                worst = d;
            }
        }
        worst
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<T>
    where
        T: nalgebra::Scalar + num_traits::Zero,
    {
        let mut m = nalgebra::DMatrix::<T>::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    /// Writes the matrix as a Matrix Market coordinate file (general form,
    /// 1-based indices) for external cross-checks.
    pub fn write_matrix_market<W: Write>(&self, w: &mut W) -> Result<(), SparseError> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (i, j, v) in self.triplets() {
            writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v.to_f64().unwrap())?;
        }
        Ok(())
    }
}

/// Reverse Cuthill-McKee ordering of a symmetric sparsity pattern.
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee<T: Real>(a: &Csr<T>) -> Vec<usize> {
    let n = a.nrows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, _) in a.triplets() {
        if i != j {
            adj[i].push(j);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(|l| l.len()).collect();

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    loop {
        // lowest-degree unvisited vertex starts the next component
        let start = match (0..n).filter(|&v| !visited[v]).min_by_key(|&v| degree[v]) {
            Some(s) => s,
            None => break,
        };
        visited[start] = true;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> =
                adj[v].iter().copied().filter(|&u| !visited[u]).collect();
            nbrs.sort_by_key(|&u| degree[u]);
            for u in nbrs {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

/// Symmetric positive definite banded Cholesky factorization, used as the
/// direct solver behind the shift-inverted iteration and the Steklov Schur
/// complement. Stores the lower band of L.
pub struct BandedCholesky<T> {
    n: usize,
    kd: usize,
    /// band(r, j) = L[j + r, j], row-major in r.
    band: Vec<T>,
    /// perm[new] = old
    perm: Vec<usize>,
}

impl<T: Real> BandedCholesky<T> {
    /// Factorizes a symmetric positive definite CSR matrix after RCM
    /// reordering.
    pub fn factor(a: &Csr<T>) -> Result<Self, SparseError> {
        if a.nrows() != a.ncols() {
            return Err(SparseError::DimensionMismatch(format!(
                "{}x{} not square",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows();
        let perm = reverse_cuthill_mckee(a);
        let mut inv_perm = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv_perm[old] = new;
        }
        let mut kd = 0usize;
        for (i, j, _) in a.triplets() {
            let (pi, pj) = (inv_perm[i], inv_perm[j]);
            kd = kd.max(pi.abs_diff(pj));
        }
        let mut band = vec![T::zero(); (kd + 1) * n];
        let idx = |r: usize, j: usize| r * n + j;
        for (i, j, v) in a.triplets() {
            let (pi, pj) = (inv_perm[i], inv_perm[j]);
            if pi >= pj {
                band[idx(pi - pj, pj)] += v;
            }
        }
        // unblocked banded Cholesky, O(n kd^2)
        for j in 0..n {
            let mut diag = band[idx(0, j)];
            let k_lo = j.saturating_sub(kd);
            for k in k_lo..j {
                let l_jk = band[idx(j - k, k)];
                diag -= l_jk * l_jk;
            }
            if diag <= T::zero() {
                return Err(SparseError::NotPositiveDefinite {
                    col: j,
                    pivot: diag.to_f64().unwrap_or(f64::NAN),
                });
            }
            let l_jj = diag.sqrt();
            band[idx(0, j)] = l_jj;
            let i_hi = (j + kd).min(n - 1);
            for i in (j + 1)..=i_hi {
                let mut v = band[idx(i - j, j)];
                let k_lo = i.saturating_sub(kd).max(k_lo);
                for k in k_lo..j {
                    v -= band[idx(i - k, k)] * band[idx(j - k, k)];
                }
                band[idx(i - j, j)] = v / l_jj;
            }
        }
        Ok(BandedCholesky { n, kd, band, perm })
    }

    pub fn bandwidth(&self) -> usize {
        self.kd
    }

    /// Solves A x = b.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let kd = self.kd;
        let idx = |r: usize, j: usize| r * n + j;
        let mut y = vec![T::zero(); n];
        for i in 0..n {
            y[i] = b[self.perm[i]];
        }
        // L z = Pb
        for j in 0..n {
            let zj = y[j] / self.band[idx(0, j)];
            y[j] = zj;
            let i_hi = (j + kd).min(n - 1);
            for i in (j + 1)..=i_hi {
                let l = self.band[idx(i - j, j)];
                if l != T::zero() {
                    y[i] = y[i] - l * zj;
                }
            }
        }
        // L' x = z
        for j in (0..n).rev() {
            let mut v = y[j];
            let i_hi = (j + kd).min(n - 1);
            for i in (j + 1)..=i_hi {
                let l = self.band[idx(i - j, j)];
                if l != T::zero() {
                    v -= l * y[i];
                }
            }
            y[j] = v / self.band[idx(0, j)];
        }
        let mut x = vec![T::zero(); n];
        for i in 0..n {
            x[self.perm[i]] = y[i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> Csr<f64> {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + 0.1 * i as f64));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        Csr::from_triplets(n, n, &t)
    }

    #[test]
    fn triplets_sum_duplicates() {
        let a = Csr::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 0, 0.5)]);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(1, 0), 0.5);
        assert_eq!(a.get(1, 1), 0.0);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn matvec_matches_dense() {
        let a = laplacian_1d(17);
        let x: Vec<f64> = (0..17).map(|i| (i as f64 * 0.37).sin()).collect();
        let y = a.matvec_alloc(&x);
        let dense = a.to_dense();
        let xd = nalgebra::DVector::from_vec(x.clone());
        let yd = &dense * &xd;
        for i in 0..17 {
            assert!((y[i] - yd[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn banded_cholesky_solves() {
        let a = laplacian_1d(40);
        let chol = BandedCholesky::factor(&a).unwrap();
        let b: Vec<f64> = (0..40).map(|i| (i as f64).cos()).collect();
        let x = chol.solve(&b);
        let r = a.matvec_alloc(&x);
        for i in 0..40 {
            assert!((r[i] - b[i]).abs() < 1e-11, "residual at {i}");
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = Csr::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, -1.0)]);
        assert!(matches!(
            BandedCholesky::factor(&a),
            Err(SparseError::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn rcm_reduces_bandwidth_of_shuffled_path() {
        // path graph with scrambled labels
        let n = 60;
        let relabel: Vec<usize> = (0..n).map(|i| (i * 37) % n).collect();
        let mut t = Vec::new();
        for i in 0..n {
            t.push((relabel[i], relabel[i], 3.0));
            if i + 1 < n {
                t.push((relabel[i], relabel[i + 1], -1.0));
                t.push((relabel[i + 1], relabel[i], -1.0));
            }
        }
        let a = Csr::from_triplets(n, n, &t);
        let chol = BandedCholesky::factor(&a).unwrap();
        assert!(chol.bandwidth() <= 2, "bandwidth {}", chol.bandwidth());
    }

    #[test]
    fn matrix_market_output_parses() {
        let a = laplacian_1d(3);
        let mut buf = Vec::new();
        a.write_matrix_market(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("%%MatrixMarket"));
        let header: Vec<usize> =
            lines.next().unwrap().split_whitespace().map(|s| s.parse().unwrap()).collect();
        assert_eq!(header, vec![3, 3, 7]);
        let mut total = 0.0;
        for line in lines {
            let f: Vec<f64> = line.split_whitespace().map(|s| s.parse().unwrap()).collect();
            assert_eq!(f.len(), 3);
            total += f[2];
        }
        assert!((total - a.sum_entries()).abs() < 1e-12);
    }
}
