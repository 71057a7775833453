//! Dense row-major matrices and LU solves for the small square systems the
//! solver needs (bases are n-by-n with n rarely above a few dozen).

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Build from row vectors. Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in &rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Copy with `row` inserted before index `at`.
    pub fn with_row_inserted(&self, at: usize, row: &[f64]) -> Matrix {
        assert_eq!(row.len(), self.cols);
        assert!(at <= self.rows);
        let mut data = Vec::with_capacity((self.rows + 1) * self.cols);
        data.extend_from_slice(&self.data[..at * self.cols]);
        data.extend_from_slice(row);
        data.extend_from_slice(&self.data[at * self.cols..]);
        Matrix { rows: self.rows + 1, cols: self.cols, data }
    }

    /// Submatrix made of the given rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(idx.len(), self.cols);
        for (k, &i) in idx.iter().enumerate() {
            m.row_mut(k).copy_from_slice(self.row(i));
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// LU factorization with partial pivoting.
pub struct Lu {
    n: usize,
    lu: Matrix,
    perm: Vec<usize>,
    swaps: usize,
}

impl Lu {
    /// Factor a square matrix; `None` when numerically singular.
    pub fn factor(a: &Matrix) -> Option<Lu> {
        let n = a.rows();
        assert_eq!(n, a.cols(), "LU needs a square matrix");
        let tol = 1e-12 * a.max_abs().max(1.0);
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        for k in 0..n {
            let mut p = k;
            let mut best = lu.get(k, k).abs();
            for i in k + 1..n {
                let v = lu.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best < tol {
                return None;
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu.get(k, j);
                    lu.set(k, j, lu.get(p, j));
                    lu.set(p, j, tmp);
                }
                perm.swap(k, p);
                swaps += 1;
            }
            let pivot = lu.get(k, k);
            for i in k + 1..n {
                let f = lu.get(i, k) / pivot;
                lu.set(i, k, f);
                for j in k + 1..n {
                    lu.set(i, j, lu.get(i, j) - f * lu.get(k, j));
                }
            }
        }
        Some(Lu { n, lu, perm, swaps })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = rhs[self.perm[i]];
            for j in 0..i {
                s -= self.lu.get(i, j) * y[j];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.lu.get(i, j) * y[j];
            }
            y[i] = s / self.lu.get(i, i);
        }
        y
    }

    pub fn det(&self) -> f64 {
        let mut d = if self.swaps % 2 == 0 { 1.0 } else { -1.0 };
        for i in 0..self.n {
            d *= self.lu.get(i, i);
        }
        d
    }
}

/// One-shot square solve; `None` when singular.
pub fn solve_square(a: &Matrix, rhs: &[f64]) -> Option<Vec<f64>> {
    Lu::factor(a).map(|lu| lu.solve(rhs))
}
