//! Dense matrices over a [`Scalar`] backend and the exact elimination kernels
//! used by the oracles and certificates.

use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{common_denominator, format_rational, parse_rational, Rational, Scalar};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidArgument("ragged matrix rows".into()));
        }
        Ok(Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn diagonal(values: &[S]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = v.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[S]) {
        for (i, v) in values.iter().enumerate() {
            self[(i, j)] = v.clone();
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn trace(&self) -> S {
        (0..self.rows.min(self.cols)).fold(S::zero(), |acc, i| acc + self[(i, i)].clone())
    }

    /// The submatrix on the given (ordered) row and column indices.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &i in rows {
            for &j in cols {
                data.push(self[(i, j)].clone());
            }
        }
        Self { rows: rows.len(), cols: cols.len(), data }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] = out[(i, j)].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn scale(&self, t: &S) -> Self {
        self.map(|x| x.clone() * t.clone())
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(|x| x.to_f64())
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;

    fn index(&self, (i, j): (usize, usize)) -> &S {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Serialize for Matrix<Rational> {
    fn serialize<Z: Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        let rows: Vec<Vec<String>> =
            (0..self.rows).map(|i| self.row(i).iter().map(format_rational).collect()).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix<Rational> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<String>>::deserialize(d)?;
        let parsed = rows
            .iter()
            .map(|row| row.iter().map(|t| parse_rational(t)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        Matrix::from_rows(parsed).map_err(serde::de::Error::custom)
    }
}

/// Exact determinant by fraction-free (Bareiss) elimination.
///
/// Rows are first scaled to integers by their own common denominators, so all
/// intermediate values stay in `Z` and every division in the loop is exact.
pub fn det_bareiss(m: &Matrix<Rational>) -> Rational {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.rows();
    if n == 0 {
        return Rational::one();
    }
    let mut scale = BigInt::one();
    let mut a: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for i in 0..n {
        let d = common_denominator(m.row(i));
        a.push(m.row(i).iter().map(|x| (x * Rational::from_integer(d.clone())).to_integer()).collect());
        scale *= d;
    }
    let det = bareiss_in_place(&mut a);
    Rational::new(det, scale)
}

/// Bareiss elimination on an integer matrix; returns its determinant.
pub fn bareiss_in_place(a: &mut [Vec<BigInt>]) -> BigInt {
    let n = a.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(p) => {
                    a.swap(k, p);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

/// Solves `A X = B` by Gaussian elimination with largest-magnitude pivoting.
/// Returns `None` when `A` is singular (exactly, for the rational backend).
pub fn solve<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Option<Matrix<S>> {
    assert!(a.is_square() && a.rows() == b.rows(), "solve dimension mismatch");
    let n = a.rows();
    let m = b.cols();
    let mut lhs = a.to_rows();
    let mut rhs = b.to_rows();
    for k in 0..n {
        let pivot = (k..n)
            .filter(|&i| !lhs[i][k].is_zero())
            .max_by(|&i, &j| {
                lhs[i][k].abs().partial_cmp(&lhs[j][k].abs()).unwrap_or(std::cmp::Ordering::Equal)
            })?;
        lhs.swap(k, pivot);
        rhs.swap(k, pivot);
        let p = lhs[k][k].clone();
        for i in k + 1..n {
            if lhs[i][k].is_zero() {
                continue;
            }
            let f = lhs[i][k].clone() / p.clone();
            for j in k..n {
                let v = lhs[i][j].clone() - f.clone() * lhs[k][j].clone();
                lhs[i][j] = v;
            }
            for j in 0..m {
                let v = rhs[i][j].clone() - f.clone() * rhs[k][j].clone();
                rhs[i][j] = v;
            }
        }
    }
    let mut x: Matrix<S> = Matrix::zeros(n, m);
    for j in 0..m {
        for i in (0..n).rev() {
            let mut acc = rhs[i][j].clone();
            for k in i + 1..n {
                acc = acc - lhs[i][k].clone() * x[(k, j)].clone();
            }
            x[(i, j)] = acc / lhs[i][i].clone();
        }
    }
    Some(x)
}

/// Exact rank by row reduction over the rationals.
pub fn rank(m: &Matrix<Rational>) -> usize {
    let mut a = m.to_rows();
    let (rows, cols) = (m.rows(), m.cols());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        for i in r + 1..rows {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] / &a[r][c];
            for j in c..cols {
                let v = &a[i][j] - &f * &a[r][j];
                a[i][j] = v;
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

/// True when every leading principal minor is strictly positive.
pub fn leading_minors_positive(m: &Matrix<Rational>) -> bool {
    let idx: Vec<usize> = (0..m.rows()).collect();
    (1..=m.rows()).all(|k| det_bareiss(&m.select(&idx[..k], &idx[..k])).is_positive())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn q(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()).unwrap()
    }

    fn cofactor_det(m: &Matrix<Rational>) -> Rational {
        let n = m.rows();
        if n == 0 {
            return Rational::one();
        }
        let rest: Vec<usize> = (1..n).collect();
        (0..n).fold(Rational::zero(), |acc, j| {
            let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
            let term = &m[(0, j)] * cofactor_det(&m.select(&rest, &cols));
            if j % 2 == 0 { acc + term } else { acc - term }
        })
    }

    #[test]
    fn bareiss_matches_cofactor_expansion() {
        let m = Matrix::from_rows(vec![
            vec![rat(1, 2), int(3), rat(-2, 3), int(0)],
            vec![int(0), int(0), int(4), rat(1, 7)],
            vec![int(2), rat(5, 3), int(1), int(-1)],
            vec![rat(1, 9), int(0), int(2), int(3)],
        ])
        .unwrap();
        assert_eq!(det_bareiss(&m), cofactor_det(&m));
        assert_eq!(det_bareiss(&q(&[&[1, 2], &[3, 4]])), int(-2));
        assert_eq!(det_bareiss(&q(&[&[1, 2], &[2, 4]])), int(0));
    }

    #[test]
    fn solve_exact_and_singular() {
        let a = q(&[&[2, 1], &[1, 3]]);
        let b = q(&[&[1], &[2]]);
        let x = solve(&a, &b).unwrap();
        assert_eq!(a.mul(&x), b);
        assert!(solve(&q(&[&[1, 2], &[2, 4]]), &b).is_none());
    }

    #[test]
    fn rank_counts_independent_rows() {
        assert_eq!(rank(&q(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]])), 2);
        assert_eq!(rank(&Matrix::<Rational>::identity(4)), 4);
        assert_eq!(rank(&Matrix::<Rational>::zeros(3, 2)), 0);
    }
}
