//! Dense matrices over an exact or floating field.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::param::ParamRat;
use crate::error::{Error, Result};

/// Field operations needed by the matrix routines.
pub trait Scalar: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn negate(&self) -> Self;
    /// Multiplicative inverse; `None` for zero.
    fn recip(&self) -> Option<Self>;
    /// Magnitude used for pivot selection; exact fields take any nonzero.
    fn pivot_weight(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            1.0
        }
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn recip(&self) -> Option<Self> {
        (!Zero::is_zero(self)).then(|| BigRational::recip(self))
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn recip(&self) -> Option<Self> {
        (*self != 0.0).then(|| 1.0 / self)
    }
    fn pivot_weight(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for ParamRat {
    fn zero() -> Self {
        ParamRat::zero()
    }
    fn one() -> Self {
        ParamRat::one()
    }
    fn is_zero(&self) -> bool {
        ParamRat::is_zero(self)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn recip(&self) -> Option<Self> {
        self.inv()
    }
}

/// Row-major matrix.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds from rows; all rows must have the same length.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Builds from rows with an explicit column count, so empty row lists
    /// and zero-width rows keep their shape.
    pub fn from_rows_sized(rows: Vec<Vec<T>>, cols: usize) -> Result<Self> {
        if rows.iter().any(|row| row.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(T::is_zero)
    }

    pub fn map<U: Scalar>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn try_map<U: Scalar, E>(&self, f: impl FnMut(&T) -> std::result::Result<U, E>) -> std::result::Result<Matrix<U>, E> {
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect::<std::result::Result<_, _>>()?,
        })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        if self.cols != o.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let v = out.get(i, j).plus(&a.times(b));
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    fn zip(&self, o: &Self, what: &str, f: impl Fn(&T, &T) -> T) -> Result<Self> {
        if self.shape() != o.shape() {
            return Err(Error::Dimension(format!(
                "cannot {what} {}x{} and {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.zip(o, "add", T::plus)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.zip(o, "subtract", T::minus)
    }

    pub fn negate(&self) -> Self {
        self.map(T::negate)
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|x| x.times(c))
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc.plus(self.get(i, i)))
    }

    pub fn pow(&self, k: usize) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::Dimension("power of a non-square matrix".into()));
        }
        let mut acc = Self::identity(self.rows);
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Submatrix with the given row and column indices, in that order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    /// Assembles a block matrix; blocks in a block-row share a height and
    /// blocks in a block-column share a width.
    pub fn blocks(grid: &[Vec<&Self>]) -> Result<Self> {
        let heights: Vec<usize> = grid.iter().map(|r| r.first().map_or(0, |b| b.rows)).collect();
        let widths: Vec<usize> = grid.first().map_or(Vec::new(), |r| r.iter().map(|b| b.cols).collect());
        for (bi, r) in grid.iter().enumerate() {
            if r.len() != widths.len() {
                return Err(Error::Dimension("ragged block rows".into()));
            }
            for (bj, b) in r.iter().enumerate() {
                if b.rows != heights[bi] || b.cols != widths[bj] {
                    return Err(Error::Dimension(format!("block ({bi},{bj}) has shape {}x{}", b.rows, b.cols)));
                }
            }
        }
        let (h, w): (usize, usize) = (heights.iter().sum(), widths.iter().sum());
        let mut out = Self::zeros(h, w);
        let mut r0 = 0;
        for (bi, r) in grid.iter().enumerate() {
            let mut c0 = 0;
            for (bj, b) in r.iter().enumerate() {
                for i in 0..b.rows {
                    for j in 0..b.cols {
                        out.set(r0 + i, c0 + j, b.get(i, j).clone());
                    }
                }
                c0 += widths[bj];
            }
            r0 += heights[bi];
        }
        Ok(out)
    }

    /// Gauss-Jordan inverse.
    pub fn inverse(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::Dimension("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let piv = (col..n)
                .filter(|&r| !a.get(r, col).is_zero())
                .max_by(|&x, &y| {
                    a.get(x, col)
                        .pivot_weight()
                        .partial_cmp(&a.get(y, col).pivot_weight())
                        .unwrap_or(std::cmp::Ordering::Equal)
                        .then(y.cmp(&x))
                })
                .ok_or(Error::Singular)?;
            a.swap_rows(col, piv);
            inv.swap_rows(col, piv);
            let p = a.get(col, col).recip().ok_or(Error::Singular)?;
            for j in 0..n {
                let v = a.get(col, j).times(&p);
                a.set(col, j, v);
                let v = inv.get(col, j).times(&p);
                inv.set(col, j, v);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col).clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let v = a.get(r, j).minus(&f.times(a.get(col, j)));
                    a.set(r, j, v);
                    let v = inv.get(r, j).minus(&f.times(inv.get(col, j)));
                    inv.set(r, j, v);
                }
            }
        }
        Ok(inv)
    }

    /// Determinant by fraction-carrying elimination.
    pub fn det(&self) -> Result<T> {
        if self.rows != self.cols {
            return Err(Error::Dimension("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = T::one();
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !a.get(r, col).is_zero()) else {
                return Ok(T::zero());
            };
            if piv != col {
                a.swap_rows(col, piv);
                det = det.negate();
            }
            let p = a.get(col, col).clone();
            det = det.times(&p);
            let pi = p.recip().ok_or(Error::Singular)?;
            for r in col + 1..n {
                let f = a.get(r, col).times(&pi);
                if f.is_zero() {
                    continue;
                }
                for j in col..n {
                    let v = a.get(r, j).minus(&f.times(a.get(col, j)));
                    a.set(r, j, v);
                }
            }
        }
        Ok(det)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Whether all entries strictly above the diagonal are zero.
    pub fn is_lower_triangular(&self) -> bool {
        (0..self.rows).all(|i| (i + 1..self.cols).all(|j| self.get(i, j).is_zero()))
    }

    /// Kronecker product with the identity of size `k` on the right.
    pub fn kron_identity(&self, k: usize) -> Self {
        Self::from_fn(self.rows * k, self.cols * k, |i, j| {
            if i % k == j % k {
                self.get(i / k, j / k).clone()
            } else {
                T::zero()
            }
        })
    }
}

impl<T: Scalar + fmt::Display> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::poly::rat;

    fn q(rows: &[&[i64]]) -> Matrix<BigRational> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| rat(x, 1)).collect()).collect()).unwrap()
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let m = q(&[&[2, -1], &[-1, 1]]);
        let inv = m.inverse().unwrap();
        assert_eq!(inv.mul(&m).unwrap(), Matrix::identity(2));
        assert_eq!(m.det().unwrap(), rat(1, 1));
    }

    #[test]
    fn singular_matrix_errors() {
        let m = q(&[&[1, 2], &[2, 4]]);
        assert_eq!(m.inverse(), Err(Error::Singular));
        assert_eq!(m.det().unwrap(), rat(0, 1));
    }

    #[test]
    fn block_assembly() {
        let a = q(&[&[1]]);
        let b = q(&[&[2, 3]]);
        let c = q(&[&[4], &[5]]);
        let d = q(&[&[6, 7], &[8, 9]]);
        let m = Matrix::blocks(&[vec![&a, &b], vec![&c, &d]]).unwrap();
        assert_eq!(m, q(&[&[1, 2, 3], &[4, 6, 7], &[5, 8, 9]]));
    }

    #[test]
    fn float_inverse_uses_partial_pivoting() {
        let m = Matrix::from_rows(vec![vec![1e-20, 1.0], vec![1.0, 1.0]]).unwrap();
        let inv = m.inverse().unwrap();
        let p = inv.mul(&m).unwrap();
        assert!((p.get(0, 0) - 1.0).abs() < 1e-12);
        assert!(p.get(0, 1).abs() < 1e-12);
    }
}
