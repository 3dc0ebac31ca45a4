//! Compressed-row storage for symmetric sparse matrices.

use std::io::Write;

use crate::scalar::Scalar;

/// Symmetric sparse matrix stored as full CSR (both triangles), rows sorted
/// by column.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> SparseSymMatrix<T> {
    /// Builds the matrix from upper-or-lower entries `(i, j, v)`; each entry
    /// with `i != j` is mirrored, so symmetry holds exactly. Duplicates are
    /// summed in input order.
    pub fn from_symmetric_entries(n: usize, entries: &[(usize, usize, T)]) -> Self {
        let mut full: Vec<(usize, usize, T)> = Vec::with_capacity(2 * entries.len());
        for &(i, j, v) in entries {
            assert!(i < n && j < n, "entry ({i}, {j}) out of range for dimension {n}");
            full.push((i, j, v));
            if i != j {
                full.push((j, i, v));
            }
        }
        full.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; n + 1];
        let mut col_idx = Vec::with_capacity(full.len());
        let mut values: Vec<T> = Vec::with_capacity(full.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in full {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, col_idx, values }
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        Self {
            n: diag.len(),
            row_ptr: (0..=diag.len()).collect(),
            col_idx: (0..diag.len()).collect(),
            values: diag.to_vec(),
        }
    }

    /// Dense symmetric input; entries with `|a_ij| = 0` are dropped.
    pub fn from_dense(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        let mut entries = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "dense matrix must be square");
            for j in 0..=i {
                if row[j] != T::zero() || i == j {
                    entries.push((i, j, row[j]));
                }
            }
        }
        Self::from_symmetric_entries(n, &entries)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(T::zero(), |k| vals[k])
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).all(|(&j, &v)| j == i || v == T::zero())
        })
    }

    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `xᵀ A x`.
    pub fn quad_form(&self, x: &[T]) -> T {
        (0..self.n)
            .map(|i| {
                let (cols, vals) = self.row(i);
                x[i] * cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum::<T>()
            })
            .sum()
    }

    /// `a·A + b·B` on the union sparsity pattern.
    pub fn linear_combination(a: T, lhs: &Self, b: T, rhs: &Self) -> Self {
        assert_eq!(lhs.n, rhs.n, "dimension mismatch");
        let mut row_ptr = vec![0; lhs.n + 1];
        let mut col_idx = Vec::with_capacity(lhs.nnz().max(rhs.nnz()));
        let mut values = Vec::with_capacity(col_idx.capacity());
        for i in 0..lhs.n {
            let (ca, va) = lhs.row(i);
            let (cb, vb) = rhs.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                let ja = ca.get(p).copied().unwrap_or(usize::MAX);
                let jb = cb.get(q).copied().unwrap_or(usize::MAX);
                let (j, v) = if ja == jb {
                    p += 1;
                    q += 1;
                    (ja, a * va[p - 1] + b * vb[q - 1])
                } else if ja < jb {
                    p += 1;
                    (ja, a * va[p - 1])
                } else {
                    q += 1;
                    (jb, b * vb[q - 1])
                };
                col_idx.push(j);
                values.push(v);
            }
            row_ptr[i + 1] = col_idx.len();
        }
        Self { n: lhs.n, row_ptr, col_idx, values }
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { values: self.values.iter().map(|&v| v * s).collect(), ..self.clone() }
    }

    /// Largest `|a_ij - a_ji|`; zero for matrices built by this type.
    pub fn symmetry_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut out = vec![vec![T::zero(); self.n]; self.n];
        for (i, row) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
        }
        out
    }

    /// Coordinate text format: one `row col value` line per stored entry,
    /// zero-based indices.
    pub fn write_coordinate<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut s = String::new();
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                s.push_str(&format!("{i} {j} {v}\n"));
            }
        }
        out.write_all(s.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirrored_entries_and_duplicates() {
        let m = SparseSymMatrix::from_symmetric_entries(3, &[(0, 0, 2.0), (1, 0, -1.0), (0, 1, -0.5), (2, 2, 1.0)]);
        assert_eq!(m.get(0, 1), -1.5);
        assert_eq!(m.get(1, 0), -1.5);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.symmetry_defect(), 0.0);
        assert_eq!(m.mul_vec(&[1.0, 1.0, 1.0]), vec![0.5, -1.5, 1.0]);
        assert_eq!(m.quad_form(&[1.0, 2.0, 0.0]), 2.0 - 6.0);
    }

    #[test]
    fn linear_combination_union_pattern() {
        let a = SparseSymMatrix::from_diagonal(&[1.0, 2.0]);
        let b = SparseSymMatrix::from_dense(&[vec![0.0, 3.0], vec![3.0, 1.0]]);
        let c = SparseSymMatrix::linear_combination(2.0, &a, -1.0, &b);
        assert_eq!(c.to_dense(), vec![vec![2.0, -3.0], vec![-3.0, 3.0]]);
    }

    #[test]
    fn coordinate_output() {
        let a = SparseSymMatrix::from_dense(&[vec![1.0, 0.5], vec![0.5, 2.0]]);
        let mut buf = Vec::new();
        a.write_coordinate(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0 0 1\n0 1 0.5\n1 0 0.5\n1 1 2\n");
    }
}
