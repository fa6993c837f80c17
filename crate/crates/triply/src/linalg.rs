//! Dense exact linear algebra over [`ExactReal`].
//!
//! Plain Gaussian elimination with exact pivoting; no growth control is
//! needed because every decision (pivot choice, rank, singularity) is an
//! exact sign or zero test.

use crate::qfield::ExactReal;

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<ExactReal>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![ExactReal::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ExactReal::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<ExactReal>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|row| row.len()).unwrap_or(0);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> ExactReal) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[ExactReal] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows);
        Matrix::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = ExactReal::zero();
            for k in 0..self.cols {
                acc += &(&self[(i, k)] * &rhs[(k, j)]);
            }
            acc
        })
    }

    /// Kronecker product.
    pub fn kron(&self, rhs: &Matrix) -> Matrix {
        Matrix::from_fn(self.rows * rhs.rows, self.cols * rhs.cols, |i, j| {
            &self[(i / rhs.rows, j / rhs.cols)] * &rhs[(i % rhs.rows, j % rhs.cols)]
        })
    }

    /// Submatrix keeping the given rows and columns, in the given order.
    pub fn submatrix(&self, keep_rows: &[usize], keep_cols: &[usize]) -> Matrix {
        Matrix::from_fn(keep_rows.len(), keep_cols.len(), |i, j| {
            self[(keep_rows[i], keep_cols[j])].clone()
        })
    }

    /// Determinant by fraction-producing elimination on a working copy.
    pub fn det(&self) -> ExactReal {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = ExactReal::one();
        for col in 0..n {
            let pivot = match (col..n).find(|&r| !m[(r, col)].is_zero()) {
                Some(p) => p,
                None => return ExactReal::zero(),
            };
            if pivot != col {
                m.swap_rows(pivot, col);
                det = -det;
            }
            let p = m[(col, col)].clone();
            det *= &p;
            let p_inv = p.inv().expect("nonzero pivot");
            for r in (col + 1)..n {
                if m[(r, col)].is_zero() {
                    continue;
                }
                let factor = &m[(r, col)] * &p_inv;
                for c in col..n {
                    let delta = &factor * &m[(col, c)];
                    m[(r, c)] -= &delta;
                }
            }
        }
        det
    }

    /// Rank via elimination.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        let mut row = 0;
        for col in 0..m.cols {
            let pivot = match (row..m.rows).find(|&r| !m[(r, col)].is_zero()) {
                Some(p) => p,
                None => continue,
            };
            m.swap_rows(pivot, row);
            let p_inv = m[(row, col)].inv().expect("nonzero pivot");
            for r in (row + 1)..m.rows {
                if m[(r, col)].is_zero() {
                    continue;
                }
                let factor = &m[(r, col)] * &p_inv;
                for c in col..m.cols {
                    let delta = &factor * &m[(row, c)];
                    m[(r, c)] -= &delta;
                }
            }
            rank += 1;
            row += 1;
            if row == m.rows {
                break;
            }
        }
        rank
    }

    /// Solve A·x = b exactly. Returns None if A is singular.
    pub fn solve(&self, b: &[ExactReal]) -> Option<Vec<ExactReal>> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(b.len(), self.rows);
        let n = self.rows;
        let mut m = self.clone();
        let mut rhs = b.to_vec();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m[(r, col)].is_zero())?;
            m.swap_rows(pivot, col);
            rhs.swap(pivot, col);
            let p_inv = m[(col, col)].inv().expect("nonzero pivot");
            for r in (col + 1)..n {
                if m[(r, col)].is_zero() {
                    continue;
                }
                let factor = &m[(r, col)] * &p_inv;
                for c in col..n {
                    let delta = &factor * &m[(col, c)];
                    m[(r, c)] -= &delta;
                }
                let delta = &factor * &rhs[col];
                rhs[r] -= &delta;
            }
        }
        let mut x = vec![ExactReal::zero(); n];
        for col in (0..n).rev() {
            let mut acc = rhs[col].clone();
            for c in (col + 1)..n {
                acc -= &(&m[(col, c)] * &x[c]);
            }
            x[col] = acc * m[(col, col)].inv().expect("nonzero pivot");
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Matrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![ExactReal::zero(); n];
            e[j] = ExactReal::one();
            cols.push(self.solve(&e)?);
        }
        Some(Matrix::from_fn(n, n, |i, j| cols[j][i].clone()))
    }

    /// A one-dimensional kernel vector of a singular square matrix,
    /// normalized so its first nonzero coordinate is 1. Returns None if the
    /// kernel is trivial or has dimension greater than one.
    pub fn kernel_vector(&self) -> Option<Vec<ExactReal>> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        // Row echelon with column pivoting bookkeeping.
        let mut pivot_col_of_row = Vec::new();
        let mut row = 0;
        for col in 0..n {
            let pivot = match (row..n).find(|&r| !m[(r, col)].is_zero()) {
                Some(p) => p,
                None => continue,
            };
            m.swap_rows(pivot, row);
            let p_inv = m[(row, col)].inv().expect("nonzero pivot");
            for r in (row + 1)..n {
                if m[(r, col)].is_zero() {
                    continue;
                }
                let factor = &m[(r, col)] * &p_inv;
                for c in col..n {
                    let delta = &factor * &m[(row, c)];
                    m[(r, c)] -= &delta;
                }
            }
            pivot_col_of_row.push(col);
            row += 1;
        }
        if row != n - 1 {
            return None;
        }
        let free_col = (0..n).find(|c| !pivot_col_of_row.contains(c))?;
        let mut x = vec![ExactReal::zero(); n];
        x[free_col] = ExactReal::one();
        for (r, &pc) in pivot_col_of_row.iter().enumerate().rev() {
            let mut acc = ExactReal::zero();
            for c in (pc + 1)..n {
                acc -= &(&m[(r, c)] * &x[c]);
            }
            x[pc] = acc * m[(r, pc)].inv().expect("nonzero pivot");
        }
        // Normalize first nonzero coordinate to 1.
        let lead = x.iter().find(|v| !v.is_zero())?.clone();
        let lead_inv = lead.inv().ok()?;
        for v in &mut x {
            *v = &*v * &lead_inv;
        }
        Some(x)
    }

    /// For a symmetric matrix: checks positive semidefiniteness by pivoted
    /// symmetric elimination and returns the exact rank, or None if an
    /// indefiniteness witness appears.
    pub fn psd_rank(&self) -> Option<usize> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut active: Vec<usize> = (0..n).collect();
        let mut rank = 0;
        while !active.is_empty() {
            // A PSD matrix with an all-zero diagonal on the active block is
            // zero there; a negative diagonal entry is a witness.
            let mut pivot = None;
            for (pos, &i) in active.iter().enumerate() {
                match m[(i, i)].sign() {
                    s if s > 0 => {
                        pivot = Some(pos);
                        break;
                    }
                    0 => {}
                    _ => return None,
                }
            }
            let pos = match pivot {
                Some(p) => p,
                None => {
                    // Diagonal all zero: block must vanish entirely.
                    for &i in &active {
                        for &j in &active {
                            if !m[(i, j)].is_zero() {
                                return None;
                            }
                        }
                    }
                    break;
                }
            };
            let i = active.remove(pos);
            rank += 1;
            let p_inv = m[(i, i)].inv().expect("positive pivot");
            for a in 0..active.len() {
                let r = active[a];
                if m[(r, i)].is_zero() {
                    continue;
                }
                let factor = &m[(r, i)] * &p_inv;
                for b in 0..active.len() {
                    let c = active[b];
                    let delta = &factor * &m[(i, c)];
                    m[(r, c)] -= &delta;
                }
            }
        }
        Some(rank)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = ExactReal;
    fn index(&self, (r, c): (usize, usize)) -> &ExactReal {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut ExactReal {
        &mut self.data[r * self.cols + c]
    }
}

impl std::fmt::Debug for Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.rows {
            for j in 0..self.cols {
                write!(f, "{}{}", if j > 0 { "\t" } else { "" }, self[(i, j)])?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfield::ratio;

    fn int(n: i64) -> ExactReal {
        ExactReal::from_int(n)
    }

    #[test]
    fn solve_with_radicals() {
        // [[1, √2], [√2, 1]] x = [1, 0]  =>  x = [-1, √2]
        let s2 = ExactReal::sqrt_int(2);
        let m = Matrix::from_rows(vec![
            vec![int(1), s2.clone()],
            vec![s2.clone(), int(1)],
        ]);
        let x = m.solve(&[int(1), int(0)]).unwrap();
        assert_eq!(x, vec![int(-1), s2]);
    }

    #[test]
    fn det_and_rank() {
        let m = Matrix::from_rows(vec![
            vec![int(2), int(0), int(1)],
            vec![int(0), int(3), int(0)],
            vec![int(4), int(0), int(2)],
        ]);
        assert!(m.det().is_zero());
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn inverse_round_trip() {
        let m = Matrix::from_rows(vec![
            vec![int(1), int(2)],
            vec![int(3), int(5)],
        ]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Matrix::identity(2));
    }

    #[test]
    fn psd_rank_detects_indefinite() {
        let psd = Matrix::from_rows(vec![
            vec![int(1), int(1)],
            vec![int(1), int(1)],
        ]);
        assert_eq!(psd.psd_rank(), Some(1));
        let indef = Matrix::from_rows(vec![
            vec![int(1), int(2)],
            vec![int(2), int(1)],
        ]);
        assert_eq!(indef.psd_rank(), None);
        let gram = Matrix::from_rows(vec![
            vec![int(1), ExactReal::from_rational(ratio(-1, 2))],
            vec![ExactReal::from_rational(ratio(-1, 2)), int(1)],
        ]);
        assert_eq!(gram.psd_rank(), Some(2));
    }

    #[test]
    fn kernel_vector_of_singular() {
        let m = Matrix::from_rows(vec![
            vec![int(1), int(2)],
            vec![int(2), int(4)],
        ]);
        let v = m.kernel_vector().unwrap();
        // (1, -1/2) normalized to leading 1.
        assert_eq!(v[0], int(1));
        assert_eq!(v[1], ExactReal::from_rational(ratio(-1, 2)));
    }
}
