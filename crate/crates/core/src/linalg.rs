//! Fixed-capacity vectors, matrices and third-order arrays for dimensions 1..=3.
//!
//! Storage is inline so evaluations in the hot loops never allocate.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use serde::{Serialize, Serializer};

pub const MAX_DIM: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vector {
    dim: usize,
    data: [f64; MAX_DIM],
}

impl Vector {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        Self { dim, data: [0.0; MAX_DIM] }
    }

    pub fn from_slice(values: &[f64]) -> Self {
        let mut v = Self::zeros(values.len());
        v.data[..values.len()].copy_from_slice(values);
        v
    }

    pub fn filled(dim: usize, value: f64) -> Self {
        let mut v = Self::zeros(dim);
        for i in 0..dim {
            v.data[i] = value;
        }
        v
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[i] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data[..self.dim]
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.as_slice().to_vec()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        (0..self.dim).map(|i| self.data[i] * other.data[i]).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.as_slice().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scale(&self, s: f64) -> Vector {
        *self * s
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        debug_assert!(i < self.dim);
        &self.data[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        debug_assert!(i < self.dim);
        &mut self.data[i]
    }
}

impl Add for Vector {
    type Output = Vector;
    fn add(mut self, rhs: Vector) -> Vector {
        for i in 0..self.dim {
            self.data[i] += rhs.data[i];
        }
        self
    }
}

impl AddAssign for Vector {
    fn add_assign(&mut self, rhs: Vector) {
        for i in 0..self.dim {
            self.data[i] += rhs.data[i];
        }
    }
}

impl Sub for Vector {
    type Output = Vector;
    fn sub(mut self, rhs: Vector) -> Vector {
        for i in 0..self.dim {
            self.data[i] -= rhs.data[i];
        }
        self
    }
}

impl Mul<f64> for Vector {
    type Output = Vector;
    fn mul(mut self, s: f64) -> Vector {
        for i in 0..self.dim {
            self.data[i] *= s;
        }
        self
    }
}

impl Neg for Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self * -1.0
    }
}

impl Serialize for Vector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.as_slice().serialize(s)
    }
}

/// Square matrix indexed as `m[(row, col)]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: [[f64; MAX_DIM]; MAX_DIM],
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        Self { dim, data: [[0.0; MAX_DIM]; MAX_DIM] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i][i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let mut m = Self::zeros(rows.len());
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), rows.len(), "matrix must be square");
            m.data[i][..row.len()].copy_from_slice(row);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t.data[i][j] = self.data[j][i];
            }
        }
        t
    }

    pub fn det(&self) -> f64 {
        let a = &self.data;
        match self.dim {
            1 => a[0][0],
            2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
            _ => {
                a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
            }
        }
    }

    /// Cofactor matrix: `C[(i, j)]` is the signed minor of entry (i, j).
    pub fn cofactors(&self) -> Matrix {
        let n = self.dim;
        let a = &self.data;
        let mut c = Matrix::zeros(n);
        match n {
            1 => c.data[0][0] = 1.0,
            2 => {
                c.data[0][0] = a[1][1];
                c.data[0][1] = -a[1][0];
                c.data[1][0] = -a[0][1];
                c.data[1][1] = a[0][0];
            }
            _ => {
                for i in 0..3 {
                    for j in 0..3 {
                        let (r0, r1) = others(i);
                        let (c0, c1) = others(j);
                        let minor = a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
                        c.data[i][j] = if (i + j) % 2 == 0 { minor } else { -minor };
                    }
                }
            }
        }
        c
    }

    /// Directional derivative of the cofactor matrix at `self` along `da`.
    pub fn cofactors_derivative(&self, da: &Matrix) -> Matrix {
        let n = self.dim;
        let a = &self.data;
        let d = &da.data;
        let mut c = Matrix::zeros(n);
        match n {
            1 => {}
            2 => c = da.cofactors(),
            _ => {
                for i in 0..3 {
                    for j in 0..3 {
                        let (r0, r1) = others(i);
                        let (c0, c1) = others(j);
                        let minor = d[r0][c0] * a[r1][c1] + a[r0][c0] * d[r1][c1]
                            - d[r0][c1] * a[r1][c0]
                            - a[r0][c1] * d[r1][c0];
                        c.data[i][j] = if (i + j) % 2 == 0 { minor } else { -minor };
                    }
                }
            }
        }
        c
    }

    /// Inverse by cofactors, returned together with the determinant.
    /// `None` when the determinant is exactly zero or not finite.
    pub fn inverse_with_det(&self) -> Option<(Matrix, f64)> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let adj = self.cofactors().transpose();
        Some((adj * (1.0 / det), det))
    }

    pub fn mul_vec(&self, v: &Vector) -> Vector {
        let mut out = Vector::zeros(self.dim);
        for i in 0..self.dim {
            out[i] = (0..self.dim).map(|j| self.data[i][j] * v[j]).sum();
        }
        out
    }

    /// Row vector times matrix, `vᵀ M`.
    pub fn left_mul_vec(&self, v: &Vector) -> Vector {
        let mut out = Vector::zeros(self.dim);
        for j in 0..self.dim {
            out[j] = (0..self.dim).map(|i| v[i] * self.data[i][j]).sum();
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i][i]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m = m.max(self.data[i][j].abs());
            }
        }
        m
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    m = m.max(self.data[i][j].abs());
                }
            }
        }
        m
    }

    /// True when the symmetric part is positive semidefinite (Sylvester on all
    /// principal minors, which is exact for n <= 3).
    pub fn symmetric_part_psd(&self, tol: f64) -> bool {
        let s = (*self + self.transpose()) * 0.5;
        let n = self.dim;
        for i in 0..n {
            if s.data[i][i] < -tol {
                return false;
            }
        }
        if n >= 2 {
            for i in 0..n {
                for j in (i + 1)..n {
                    let m = s.data[i][i] * s.data[j][j] - s.data[i][j] * s.data[j][i];
                    if m < -tol {
                        return false;
                    }
                }
            }
        }
        if n == 3 && s.det() < -tol {
            return false;
        }
        true
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.data[i][..self.dim].to_vec()).collect()
    }
}

fn others(i: usize) -> (usize, usize) {
    match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.dim && j < self.dim);
        &self.data[i][j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.dim && j < self.dim);
        &mut self.data[i][j]
    }
}

impl Add for Matrix {
    type Output = Matrix;
    fn add(mut self, rhs: Matrix) -> Matrix {
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.data[i][j] += rhs.data[i][j];
            }
        }
        self
    }
}

impl Sub for Matrix {
    type Output = Matrix;
    fn sub(mut self, rhs: Matrix) -> Matrix {
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.data[i][j] -= rhs.data[i][j];
            }
        }
        self
    }
}

impl Mul<f64> for Matrix {
    type Output = Matrix;
    fn mul(mut self, s: f64) -> Matrix {
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.data[i][j] *= s;
            }
        }
        self
    }
}

impl Mul for Matrix {
    type Output = Matrix;
    fn mul(self, rhs: Matrix) -> Matrix {
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[i][j] = (0..n).map(|k| self.data[i][k] * rhs.data[k][j]).sum();
            }
        }
        out
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

/// Third-order array indexed as `t[(i, j, k)]`; for second derivatives the
/// first index is the component and the last two are the differentiation
/// variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tensor3 {
    dim: usize,
    data: [[[f64; MAX_DIM]; MAX_DIM]; MAX_DIM],
}

impl Tensor3 {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        Self { dim, data: [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The matrix slice `(j, k) -> t[(i, j, k)]`.
    pub fn component(&self, i: usize) -> Matrix {
        let mut m = Matrix::zeros(self.dim);
        for j in 0..self.dim {
            for k in 0..self.dim {
                m[(j, k)] = self.data[i][j][k];
            }
        }
        m
    }

    /// The matrix slice `(i, j) -> t[(i, j, k)]` for fixed last index.
    pub fn slice_last(&self, k: usize) -> Matrix {
        let mut m = Matrix::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(i, j)] = self.data[i][j][k];
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.dim;
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    m = m.max(self.data[i][j][k].abs());
                }
            }
        }
        m
    }

    pub fn max_abs_diff(&self, other: &Tensor3) -> f64 {
        let n = self.dim;
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    m = m.max((self.data[i][j][k] - other.data[i][j][k]).abs());
                }
            }
        }
        m
    }
}

impl Index<(usize, usize, usize)> for Tensor3 {
    type Output = f64;
    fn index(&self, (i, j, k): (usize, usize, usize)) -> &f64 {
        debug_assert!(i < self.dim && j < self.dim && k < self.dim);
        &self.data[i][j][k]
    }
}

impl IndexMut<(usize, usize, usize)> for Tensor3 {
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut f64 {
        debug_assert!(i < self.dim && j < self.dim && k < self.dim);
        &mut self.data[i][j][k]
    }
}
