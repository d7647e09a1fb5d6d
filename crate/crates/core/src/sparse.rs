//! Compressed sparse row matrices and a banded Cholesky factorization.
//!
//! The meshes here are structured, so after row-major node numbering every
//! system matrix has bandwidth `nx + 2`. A banded (lower-profile) Cholesky
//! factorization is therefore the natural direct solver: deterministic,
//! no pivoting, O(n·b²) to factor and O(n·b) per solve.

use crate::error::{Error, Result};

/// Symmetric-agnostic CSR matrix. Duplicate triplets are summed in
/// insertion order; exact zeros produced by cancellation are dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> CsrMatrix {
        // stable sort keeps duplicate contributions in insertion order, so
        // symmetric assembly yields bitwise-symmetric matrices
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));

        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();

        let mut last: Option<(usize, usize)> = None;
        for &k in &order {
            let (i, j, v) = triplets[k];
            assert!(i < n_rows && j < n_cols, "triplet ({i},{j}) out of bounds");
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }

        let mut m = CsrMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        };
        m.drop_zeros();
        m
    }

    pub fn diagonal(entries: &[f64]) -> CsrMatrix {
        let triplets: Vec<_> = entries
            .iter()
            .enumerate()
            .map(|(i, &v)| (i, i, v))
            .collect();
        CsrMatrix::from_triplets(entries.len(), entries.len(), &triplets)
    }

    fn drop_zeros(&mut self) {
        let mut row_ptr = vec![0usize; self.n_rows + 1];
        let mut col_idx = Vec::with_capacity(self.col_idx.len());
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.n_rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.values[k] != 0.0 {
                    col_idx.push(self.col_idx[k]);
                    values.push(self.values[k]);
                    row_ptr[i + 1] += 1;
                }
            }
        }
        for i in 0..self.n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        self.row_ptr = row_ptr;
        self.col_idx = col_idx;
        self.values = values;
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.col_idx[k], self.values[k]))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i)
            .find(|&(c, _)| c == j)
            .map(|(_, v)| v)
            .unwrap_or(0.0)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        let mut y = vec![0.0; self.n_rows];
        for i in 0..self.n_rows {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
        y
    }

    /// xᵀ·A·y for square A.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        assert_eq!(self.n_rows, self.n_cols);
        let mut acc = 0.0;
        for i in 0..self.n_rows {
            let mut row_acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                row_acc += self.values[k] * y[self.col_idx[k]];
            }
            acc += x[i] * row_acc;
        }
        acc
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    pub fn sum_entries(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n_rows)
            .map(|i| self.row(i).map(|(_, v)| v).sum())
            .collect()
    }

    /// Σ c_k · A_k over square matrices of equal dimension.
    pub fn linear_combination(terms: &[(f64, &CsrMatrix)]) -> CsrMatrix {
        assert!(!terms.is_empty());
        let n = terms[0].1.n_rows;
        let mut triplets = Vec::new();
        for &(c, m) in terms {
            assert_eq!(m.n_rows, n);
            assert_eq!(m.n_cols, n);
            for i in 0..n {
                for (j, v) in m.row(i) {
                    triplets.push((i, j, c * v));
                }
            }
        }
        CsrMatrix::from_triplets(n, n, &triplets)
    }

    /// Replace rows and columns of masked indices by the identity. Used to
    /// impose essential boundary conditions without renumbering.
    pub fn with_identity_rows(&self, mask: &[bool]) -> CsrMatrix {
        assert_eq!(mask.len(), self.n_rows);
        let mut triplets = Vec::new();
        for i in 0..self.n_rows {
            if mask[i] {
                triplets.push((i, i, 1.0));
            } else {
                for (j, v) in self.row(i) {
                    if !mask[j] {
                        triplets.push((i, j, v));
                    }
                }
            }
        }
        CsrMatrix::from_triplets(self.n_rows, self.n_cols, &triplets)
    }

    pub fn max_abs_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n_cols]; self.n_rows];
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                dense[i][j] = v;
            }
        }
        dense
    }
}

/// Lower-band Cholesky factor of a symmetric positive definite matrix.
pub struct BandedCholesky {
    n: usize,
    bandwidth: usize,
    // factor[i * (bandwidth + 1) + (bandwidth - (i - j))] = L[i][j]
    factor: Vec<f64>,
}

impl BandedCholesky {
    /// Factor `matrix + diag(extra_diag)`. The diagonal addition covers the
    /// Newton Hessian, whose only iteration-dependent part is diagonal.
    pub fn factor(matrix: &CsrMatrix, extra_diag: &[f64]) -> Result<BandedCholesky> {
        let n = matrix.n_rows();
        assert_eq!(matrix.n_cols(), n);
        assert_eq!(extra_diag.len(), n);

        let mut bandwidth = 0usize;
        for i in 0..n {
            for (j, _) in matrix.row(i) {
                bandwidth = bandwidth.max(i.abs_diff(j));
            }
        }

        let stride = bandwidth + 1;
        let mut band = vec![0.0; n * stride];
        // band[i][b] holds column j = i - bandwidth + b
        for i in 0..n {
            for (j, v) in matrix.row(i) {
                if j <= i {
                    band[i * stride + (bandwidth - (i - j))] = v;
                }
            }
            band[i * stride + bandwidth] += extra_diag[i];
        }

        for i in 0..n {
            let lo = i.saturating_sub(bandwidth);
            for j in lo..=i {
                let klo = lo.max(j.saturating_sub(bandwidth));
                let mut sum = band[i * stride + (bandwidth - (i - j))];
                for k in klo..j {
                    sum -= band[i * stride + (bandwidth - (i - k))]
                        * band[j * stride + (bandwidth - (j - k))];
                }
                if i == j {
                    if sum <= 0.0 || !sum.is_finite() {
                        return Err(Error::LinearSolveBreakdown(format!(
                            "nonpositive pivot {sum:e} at row {i}"
                        )));
                    }
                    band[i * stride + bandwidth] = sum.sqrt();
                } else {
                    band[i * stride + (bandwidth - (i - j))] = sum / band[j * stride + bandwidth];
                }
            }
        }

        Ok(BandedCholesky {
            n,
            bandwidth,
            factor: band,
        })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let bw = self.bandwidth;
        let stride = bw + 1;
        let mut x = rhs.to_vec();
        // forward: L y = rhs
        for i in 0..self.n {
            let lo = i.saturating_sub(bw);
            let mut sum = x[i];
            for j in lo..i {
                sum -= self.factor[i * stride + (bw - (i - j))] * x[j];
            }
            x[i] = sum / self.factor[i * stride + bw];
        }
        // backward: Lᵀ x = y
        for i in (0..self.n).rev() {
            let hi = (i + bw).min(self.n - 1);
            let mut sum = x[i];
            for j in (i + 1)..=hi {
                sum -= self.factor[j * stride + (bw - (j - i))] * x[j];
            }
            x[i] = sum / self.factor[i * stride + bw];
        }
        x
    }
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
