use super::Rational;
use crate::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use std::fmt;

pub type RVector = Vec<Rational>;

/// Dense row-major rational matrix with fixed dimensions.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rational::one();
        }
        m
    }

    /// Builds a matrix from rows; every row must have the same length.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::dim(format!("row {i} has {} entries, expected {n_cols}", row.len())));
            }
            data.extend(row);
        }
        Ok(RMatrix { rows: n_rows, cols: n_cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RMatrix { rows, cols, data }
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

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Rational) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> RVector {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Result<RVector> {
        if x.len() != self.cols {
            return Err(Error::dim(format!("matrix has {} columns, vector has {} entries", self.cols, x.len())));
        }
        Ok((0..self.rows).map(|i| super::dot(self.row(i), x)).collect())
    }

    /// Frobenius inner product.
    pub fn frobenius(&self, other: &RMatrix) -> Result<Rational> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::dim("frobenius product of differently shaped matrices"));
        }
        Ok(super::dot(&self.data, &other.data))
    }

    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let rows = indices.iter().map(|&i| self.row(i).to_vec()).collect();
        Self::from_rows(rows).unwrap_or_else(|_| Self::zeros(0, self.cols))
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.data
    }
}

impl fmt::Debug for RMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.rows).map(|i| super::format_vector(self.row(i))).collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

/// Exact rank by fraction-free (Bareiss) elimination. Each row is first
/// scaled to integers by the lcm of its denominators, which preserves rank.
pub fn rank(a: &RMatrix) -> usize {
    let mut m: Vec<Vec<BigInt>> = (0..a.rows()).map(|i| integer_row(a.row(i))).collect();
    let (rows, cols) = (a.rows(), a.cols());
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = &m[i][j] * &m[r][c] - &m[i][c] * &m[r][j];
                m[i][j] = v / &prev;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        r += 1;
    }
    r
}

fn integer_row(row: &[Rational]) -> Vec<BigInt> {
    let lcm = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect()
}

/// Solves `a x = b` exactly. Returns `Ok(None)` when `a` is singular.
pub fn solve_linear_system(a: &RMatrix, b: &[Rational]) -> Result<Option<RVector>> {
    if !a.is_square() {
        return Err(Error::Structural(format!("system matrix is {}x{}, not square", a.rows(), a.cols())));
    }
    if b.len() != a.rows() {
        return Err(Error::dim(format!("rhs has {} entries for {} equations", b.len(), a.rows())));
    }
    let n = a.rows();
    let mut m: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            let mut row = a.row(i).to_vec();
            row.push(b[i].clone());
            row
        })
        .collect();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else { return Ok(None) };
        m.swap(c, p);
        let pivot = m[c][c].clone();
        if !pivot.is_one() {
            for x in m[c][c..].iter_mut() {
                *x /= &pivot;
            }
        }
        let pivot_row = m[c].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == c || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for j in c..=n {
                if !pivot_row[j].is_zero() {
                    row[j] -= &factor * &pivot_row[j];
                }
            }
        }
    }
    Ok(Some(m.into_iter().map(|mut row| row.pop().unwrap()).collect()))
}

#[cfg(test)]
mod tests {
    use super::super::{int, rat};
    use super::*;

    fn mat(rows: &[&[i64]]) -> RMatrix {
        RMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()).unwrap()
    }

    #[test]
    fn identity_solve() {
        let x = solve_linear_system(&RMatrix::identity(2), &[rat(1, 2), rat(1, 3)]).unwrap();
        assert_eq!(x, Some(vec![rat(1, 2), rat(1, 3)]));
    }

    #[test]
    fn diagonal_solve() {
        let x = solve_linear_system(&mat(&[&[2, 0], &[0, 3]]), &[int(1), int(1)]).unwrap();
        assert_eq!(x, Some(vec![rat(1, 2), rat(1, 3)]));
    }

    #[test]
    fn rank_deficient_system_is_singular() {
        let x = solve_linear_system(&mat(&[&[1, 1], &[1, 1]]), &[int(1), int(2)]).unwrap();
        assert_eq!(x, None);
    }

    #[test]
    fn non_square_system_is_structural_error() {
        let err = solve_linear_system(&mat(&[&[1, 1]]), &[int(1)]).unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }

    #[test]
    fn ragged_rows_are_rejected() {
        assert!(RMatrix::from_rows(vec![vec![int(1)], vec![int(1), int(2)]]).is_err());
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&RMatrix::zeros(3, 3)), 0);
        assert_eq!(rank(&RMatrix::identity(4)), 4);
        assert_eq!(rank(&mat(&[&[1, 2], &[2, 4], &[3, 6]])), 1);
        let fractional = RMatrix::from_rows(vec![vec![rat(1, 2), rat(1, 3)], vec![rat(3, 2), int(1)]]).unwrap();
        assert_eq!(rank(&fractional), 1);
    }
}
