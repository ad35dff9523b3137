//! Exact linear algebra over a field of fractions.
//!
//! Every rank decision in the intersection poset has to be exact: real
//! arrangements routinely contain pairs of subspaces whose intersection drops
//! by a single dimension, and a floating-point rank test cannot tell that apart
//! from a generic drop. Everything here is therefore generic over [`Field`],
//! which is only implemented for exact rational types.

use std::fmt;
use std::hash::Hash;
use std::ops::Neg;

use num::rational::Ratio;
use num::{Integer, Signed};
use num_traits::Num;

use crate::error::{Error, Result};

/// An exact field scalar. Implemented for `Ratio<T>` over signed integer
/// types; deliberately not implemented for `f32`/`f64`.
pub trait Field:
    Clone + PartialEq + Eq + Hash + fmt::Debug + Num + Neg<Output = Self> + Send + Sync
{
}

impl<T> Field for Ratio<T> where
    T: Clone + Integer + Signed + Hash + fmt::Debug + Send + Sync
{
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Field> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Input(format!(
                "matrix of shape {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    /// Builds a matrix from explicit rows; every row must have `cols` entries.
    pub fn from_rows(cols: usize, rows: Vec<Vec<T>>) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        let n = rows.len();
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Input(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(Self {
            rows: n,
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[T]> {
        (0..self.rows).map(move |r| self.row(r))
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::Input(format!(
                "cannot stack matrices with {} and {} columns",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(Self {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }
}

/// Row-reduces to reduced row-echelon form, dropping zero rows.
/// Returns the canonical matrix and its rank.
pub fn rref<T: Field>(m: &Matrix<T>) -> (Matrix<T>, usize) {
    let (reduced, pivots) = rref_with_pivots(m);
    let rank = pivots.len();
    (reduced, rank)
}

fn rref_with_pivots<T: Field>(m: &Matrix<T>) -> (Matrix<T>, Vec<usize>) {
    let cols = m.cols;
    let mut rows: Vec<Vec<T>> = m.row_iter().map(|r| r.to_vec()).collect();
    let mut pivots = Vec::new();
    let mut lead = 0;
    for col in 0..cols {
        if lead == rows.len() {
            break;
        }
        let Some(p) = (lead..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(lead, p);
        let inv = T::one() / rows[lead][col].clone();
        for x in rows[lead].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        let pivot_row = rows[lead].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == lead || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row).skip(col) {
                *x = x.clone() - f.clone() * y.clone();
            }
        }
        pivots.push(col);
        lead += 1;
    }
    rows.truncate(lead);
    let rank = rows.len();
    let data = rows.into_iter().flatten().collect();
    (
        Matrix {
            rows: rank,
            cols,
            data,
        },
        pivots,
    )
}

/// Rank of a matrix.
pub fn rank<T: Field>(m: &Matrix<T>) -> usize {
    rref(m).1
}

/// Canonical basis of the right null space `{x : m x = 0}`.
pub fn kernel_basis<T: Field>(m: &Matrix<T>) -> Subspace<T> {
    let (r, pivots) = rref_with_pivots(m);
    let n = m.cols;
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut basis = Vec::new();
    for free in (0..n).filter(|&c| !is_pivot[c]) {
        let mut v = vec![T::zero(); n];
        v[free] = T::one();
        for (i, &p) in pivots.iter().enumerate() {
            v[p] = -r.get(i, free).clone();
        }
        basis.push(v);
    }
    let basis = Matrix::from_rows(n, basis).expect("kernel rows have ambient length");
    Subspace::canonical(n, basis)
}

/// A linear subspace of `T^ambient_dim`, stored as the reduced row-echelon
/// form of a spanning set. Two subspaces are equal iff their stored bases are
/// identical, so the derived `Eq`/`Hash` are subspace equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace<T> {
    ambient_dim: usize,
    basis: Matrix<T>,
}

impl<T: Field> Subspace<T> {
    fn canonical(ambient_dim: usize, spanning: Matrix<T>) -> Self {
        let (basis, _) = rref(&spanning);
        Self { ambient_dim, basis }
    }

    /// Row span of the given vectors.
    pub fn from_span(ambient_dim: usize, rows: Vec<Vec<T>>) -> Result<Self> {
        let m = Matrix::from_rows(ambient_dim, rows)?;
        Ok(Self::canonical(ambient_dim, m))
    }

    /// Solution set of the homogeneous system whose rows are given.
    pub fn from_equations(ambient_dim: usize, rows: Vec<Vec<T>>) -> Result<Self> {
        let m = Matrix::from_rows(ambient_dim, rows)?;
        Ok(kernel_basis(&m))
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: Matrix::identity(ambient_dim),
        }
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: Matrix::zeros(0, ambient_dim),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.rows
    }

    pub fn codim(&self) -> usize {
        self.ambient_dim - self.dim()
    }

    pub fn basis(&self) -> &Matrix<T> {
        &self.basis
    }

    /// A basis of defining equations: rows `e` with `e . x = 0` exactly on
    /// this subspace.
    pub fn equations(&self) -> Matrix<T> {
        kernel_basis(&self.basis).basis
    }

    fn check_ambient(&self, other: &Self) -> Result<()> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::Input(format!(
                "ambient dimension mismatch: {} vs {}",
                self.ambient_dim, other.ambient_dim
            )));
        }
        Ok(())
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.check_ambient(other)?;
        let eqs = self.equations().vstack(&other.equations())?;
        Ok(kernel_basis(&eqs))
    }

    /// Dimension of `self + other`.
    pub fn sum_dim(&self, other: &Self) -> Result<usize> {
        self.check_ambient(other)?;
        Ok(rank(&self.basis.vstack(&other.basis)?))
    }

    /// Whether `other` is contained in `self`.
    pub fn contains(&self, other: &Self) -> Result<bool> {
        Ok(self.sum_dim(other)? == self.dim())
    }

    /// Evaluates every defining equation on `point`; zero iff the point lies
    /// in the subspace.
    pub fn contains_point(&self, point: &[T]) -> bool {
        self.equations().row_iter().all(|e| {
            e.iter()
                .zip(point)
                .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
                .is_zero()
        })
    }
}

/// Equality of two subspaces given in canonical form.
pub fn subspace_equal<T: Field>(a: &Subspace<T>, b: &Subspace<T>) -> Result<bool> {
    a.check_ambient(b)?;
    Ok(a == b)
}
