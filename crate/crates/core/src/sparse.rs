//! Compressed-row sparse matrices and direct solvers.

use std::io::Write;

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::Side;

use crate::error::SolverError;
use crate::Real;

/// CSR matrix with sorted, duplicate-free column indices per row.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Real>,
}

impl SparseMatrix {
    /// Builds from `(row, col, value)` entries; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, entries: &[(usize, usize, Real)]) -> Self {
        let mut sorted: Vec<(usize, usize, Real)> = entries.to_vec();
        // stable sort keeps the summation order of duplicates deterministic
        sorted.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<Real> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            assert!(r < nrows && c < ncols, "entry ({r}, {c}) outside {nrows}x{ncols}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn diagonal_from(d: &[Real]) -> Self {
        let entries: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(d.len(), d.len(), &entries)
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self::from_triplets(nrows, ncols, &[])
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries of row `r` as `(col, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Real)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Real)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> Real {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[range.clone()].binary_search(&c) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[Real]) -> Vec<Real> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    /// `A^T x`.
    pub fn matvec_transpose(&self, x: &[Real]) -> Vec<Real> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![0.0; self.ncols];
        for (r, c, v) in self.triplets() {
            y[c] += v * x[r];
        }
        y
    }

    pub fn transpose(&self) -> Self {
        let entries: Vec<_> = self.triplets().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &entries)
    }

    /// `a * self + b * other`.
    pub fn lincomb(&self, a: Real, other: &SparseMatrix, b: Real) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let entries: Vec<_> = self
            .triplets()
            .map(|(r, c, v)| (r, c, a * v))
            .chain(other.triplets().map(|(r, c, v)| (r, c, b * v)))
            .collect();
        Self::from_triplets(self.nrows, self.ncols, &entries)
    }

    pub fn diagonal(&self) -> Vec<Real> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<Real> {
        (0..self.nrows).map(|r| self.row(r).map(|(_, v)| v).sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<Real> {
        self.matvec_transpose(&vec![1.0; self.nrows])
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> Real {
        let scale = self.values.iter().fold(0.0, |m: Real, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        self.triplets()
            .map(|(r, c, v)| (v - self.get(c, r)).abs())
            .fold(0.0, Real::max)
            / scale
    }

    pub fn to_dense(&self) -> Vec<Vec<Real>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, c, v) in self.triplets() {
            d[r][c] = v;
        }
        d
    }

    /// `row col value` lines (0-based), one stored entry per line.
    pub fn write_coordinate(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "# {} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (r, c, v) in self.triplets() {
            writeln!(w, "{r} {c} {v:.17e}")?;
        }
        Ok(())
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, Real>, SolverError> {
        let trip: Vec<_> = self.triplets().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &trip)
            .map_err(|e| SolverError::Factorization(format!("{e:?}")))
    }
}

fn to_col(b: &[Real]) -> Col<Real> {
    Col::from_fn(b.len(), |i| b[i])
}

fn from_col(x: &Col<Real>) -> Vec<Real> {
    (0..x.nrows()).map(|i| x[i]).collect()
}

/// Sparse LU factorization of a square matrix.
pub struct LuSolver {
    n: usize,
    lu: faer::sparse::linalg::solvers::Lu<usize, Real>,
}

impl LuSolver {
    pub fn new(a: &SparseMatrix) -> Result<Self, SolverError> {
        if a.nrows != a.ncols {
            return Err(SolverError::Factorization("matrix is not square".into()));
        }
        let lu = a
            .to_faer()?
            .sp_lu()
            .map_err(|e| SolverError::Factorization(format!("{e:?}")))?;
        Ok(Self { n: a.nrows, lu })
    }

    pub fn solve(&self, b: &[Real]) -> Result<Vec<Real>, SolverError> {
        check_rhs(self.n, b)?;
        finite(from_col(&self.lu.solve(to_col(b))))
    }
}

/// Sparse Cholesky factorization of a symmetric positive definite matrix.
pub struct CholeskySolver {
    n: usize,
    llt: faer::sparse::linalg::solvers::Llt<usize, Real>,
}

impl CholeskySolver {
    pub fn new(a: &SparseMatrix) -> Result<Self, SolverError> {
        if a.nrows != a.ncols {
            return Err(SolverError::Factorization("matrix is not square".into()));
        }
        let llt = a
            .to_faer()?
            .sp_cholesky(Side::Lower)
            .map_err(|_| SolverError::NotPositiveDefinite)?;
        Ok(Self { n: a.nrows, llt })
    }

    pub fn solve(&self, b: &[Real]) -> Result<Vec<Real>, SolverError> {
        check_rhs(self.n, b)?;
        finite(from_col(&self.llt.solve(to_col(b))))
    }
}

fn check_rhs(n: usize, b: &[Real]) -> Result<(), SolverError> {
    if b.len() != n {
        return Err(SolverError::Factorization(format!(
            "right-hand side has length {}, expected {n}",
            b.len()
        )));
    }
    Ok(())
}

fn finite(x: Vec<Real>) -> Result<Vec<Real>, SolverError> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(SolverError::Factorization("solution is not finite (singular matrix?)".into()))
    }
}

/// Euclidean norm.
pub fn norm2(x: &[Real]) -> Real {
    x.iter().map(|v| v * v).sum::<Real>().sqrt()
}

pub fn dot(x: &[Real], y: &[Real]) -> Real {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}
