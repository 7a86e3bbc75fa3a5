use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::Rational;

/// Dense row-major matrix.
///
/// Zero-row matrices are allowed (they show up as kernels of full-rank
/// maps); the public entry points that need a non-empty matrix check it.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type IntegerMatrix = Matrix<BigInt>;
pub type RationalMatrix = Matrix<Rational>;

impl<T> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::argument(format!(
                "{} entries do not fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[T]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Clone> Matrix<T> {
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::argument("matrix needs at least one row"));
        };
        let cols = first.len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::argument("ragged matrix rows"));
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flat_map(|r| r.iter().cloned()).collect(),
        })
    }

    /// Matrix with no rows and `cols` columns.
    pub fn empty(cols: usize) -> Self {
        Matrix { rows: 0, cols, data: Vec::new() }
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.iter_rows().map(<[T]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self[(i, j)].clone());
            }
        }
        Matrix { rows: self.cols, cols: self.rows, data }
    }

    /// The given rows, in order, as a new matrix.
    pub fn select_rows(&self, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut data = Vec::new();
        let mut rows = 0;
        for i in indices {
            data.extend_from_slice(self.row(i));
            rows += 1;
        }
        Matrix { rows, cols: self.cols, data }
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn stack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::argument("stacked matrices differ in column count"));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix { rows: self.rows + other.rows, cols: self.cols, data })
    }
}

impl<T: Clone + Zero> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }
}

impl<T: Clone + Zero + One> Matrix<T> {
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn diagonal(entries: &[T]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }
}

impl<T> Matrix<T>
where
    T: Clone + Zero,
    for<'a> &'a T: Mul<&'a T, Output = T>,
    T: Add<T, Output = T>,
{
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::argument(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a * &other[(k, j)];
                    let cell = &mut out[(i, j)];
                    *cell = std::mem::replace(cell, T::zero()) + prod;
                }
            }
        }
        Ok(out)
    }

    /// `self * self^T`.
    pub fn gram(&self) -> Self {
        let mut out = Self::zeros(self.rows, self.rows);
        for i in 0..self.rows {
            for j in i..self.rows {
                let v = dot(self.row(i), self.row(j));
                out[(j, i)] = v.clone();
                out[(i, j)] = v;
            }
        }
        out
    }
}

pub(crate) fn dot<T>(a: &[T], b: &[T]) -> T
where
    T: Zero + Add<T, Output = T>,
    for<'x> &'x T: Mul<&'x T, Output = T>,
{
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + x * y)
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Display> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.data[i * self.cols + j])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl IntegerMatrix {
    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self> {
        let rows: Vec<Vec<BigInt>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        Matrix::from_rows(&rows)
    }

    pub fn to_rational(&self) -> RationalMatrix {
        self.map(|x| Rational::from_integer(x.clone()))
    }

    /// Entries as `i64`, if they all fit.
    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        use num_traits::ToPrimitive;
        self.iter_rows()
            .map(|r| r.iter().map(ToPrimitive::to_i64).collect())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.to_rational().rank()
    }
}

impl RationalMatrix {
    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self> {
        Ok(IntegerMatrix::from_i64_rows(rows)?.to_rational())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map(|x| x * c)
    }

    /// Exact Gaussian elimination; returns the reduced row echelon form and
    /// the pivot columns.
    fn row_reduce(&self) -> (RationalMatrix, Vec<usize>) {
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..a.cols {
            if r == a.rows {
                break;
            }
            let Some(p) = (r..a.rows).find(|&i| !a[(i, c)].is_zero()) else {
                continue;
            };
            a.swap_rows(r, p);
            let inv = a[(r, c)].recip();
            for j in c..a.cols {
                a[(r, j)] = &a[(r, j)] * &inv;
            }
            for i in 0..a.rows {
                if i == r || a[(i, c)].is_zero() {
                    continue;
                }
                let f = a[(i, c)].clone();
                for j in c..a.cols {
                    let delta = &f * &a[(r, j)];
                    a[(i, j)] -= delta;
                }
            }
            pivots.push(c);
            r += 1;
        }
        (a, pivots)
    }

    pub fn rank(&self) -> usize {
        self.row_reduce().1.len()
    }

    pub fn determinant(&self) -> Result<Rational> {
        if self.rows != self.cols {
            return Err(Error::argument("determinant of a non-square matrix"));
        }
        let mut a = self.clone();
        let n = a.rows;
        let mut det = Rational::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !a[(i, c)].is_zero()) else {
                return Ok(Rational::zero());
            };
            if p != c {
                a.swap_rows(p, c);
                det = -det;
            }
            let pivot = a[(c, c)].clone();
            det *= &pivot;
            for i in c + 1..n {
                if a[(i, c)].is_zero() {
                    continue;
                }
                let f = &a[(i, c)] / &pivot;
                for j in c..n {
                    let delta = &f * &a[(c, j)];
                    a[(i, j)] -= delta;
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Result<RationalMatrix> {
        if self.rows != self.cols {
            return Err(Error::argument("inverse of a non-square matrix"));
        }
        let n = self.rows;
        let mut aug = RationalMatrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = Rational::one();
        }
        let (red, pivots) = aug.row_reduce();
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(Error::RankDeficient { rank: pivots.iter().filter(|&&p| p < n).count(), rows: n });
        }
        let mut inv = RationalMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = red[(i, n + j)].clone();
            }
        }
        Ok(inv)
    }

    /// Entries as integers, if every entry is integral.
    pub fn to_integer(&self) -> Option<IntegerMatrix> {
        if self.data.iter().all(|x| x.is_integer()) {
            Some(self.map(|x| x.to_integer()))
        } else {
            None
        }
    }

    /// Least common multiple of all denominators.
    pub fn common_denominator(&self) -> BigInt {
        use num_integer::Integer;
        self.data.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
    }
}

/// Determinant of an integer matrix by fraction-free (Bareiss) elimination.
pub fn integer_determinant(m: &IntegerMatrix) -> Result<BigInt> {
    if m.rows != m.cols {
        return Err(Error::argument("determinant of a non-square matrix"));
    }
    let n = m.rows;
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut a = m.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[(k, k)].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[(i, k)].is_zero()) else {
                return Ok(BigInt::zero());
            };
            a.swap_rows(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)]) / &prev;
                a[(i, j)] = v;
            }
        }
        prev = a[(k, k)].clone();
    }
    Ok(sign * &a[(n - 1, n - 1)])
}
