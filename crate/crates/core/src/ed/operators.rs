//! Ladder and quadrature operators in a truncated Fock space.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Sparse real matrix stored row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    fn from_entries(dim: usize, entries: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut rows = vec![Vec::new(); dim];
        for (i, j, v) in entries {
            if v != 0.0 {
                rows[i].push((j, v));
            }
        }
        for r in &mut rows {
            r.sort_by_key(|&(j, _)| j);
        }
        Self { dim, rows }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i].iter().find(|&&(c, _)| c == j).map_or(0.0, |&(_, v)| v)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `xᵀ M x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(x)
            .map(|(r, xi)| xi * r.iter().map(|&(j, v)| v * x[j]).sum::<f64>())
            .sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_entries(
            self.dim,
            self.rows
                .iter()
                .enumerate()
                .flat_map(|(i, r)| r.iter().map(move |&(j, v)| (j, i, v))),
        )
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, v) in r {
                m[(i, j)] = v;
            }
        }
        m
    }
}

/// Operators on the Fock space `{|0⟩, …, |N⟩}`.
///
/// `x2` and `p2` are the closed forms `(2n + 1 ± (a†² + a²)) / 2`, not products
/// of the truncated `x` matrix, so they are exact on every retained level.
#[derive(Debug, Clone)]
pub struct FockOperators {
    pub cutoff: usize,
    pub a: SparseMatrix,
    pub a_dag: SparseMatrix,
    pub n: SparseMatrix,
    /// `x = (a† + a) / sqrt(2)`.
    pub x: SparseMatrix,
    pub x2: SparseMatrix,
    /// Real representation of `p² = -∂²_x`.
    pub p2: SparseMatrix,
    /// `a†² + a²`.
    pub pair: SparseMatrix,
}

pub fn build_operators(cutoff: usize) -> Result<FockOperators> {
    if cutoff < 2 {
        return Err(Error::domain(format!("cutoff must be at least 2, got {cutoff}")));
    }
    let dim = cutoff + 1;
    let sqrt = |k: usize| (k as f64).sqrt();
    let a = SparseMatrix::from_entries(dim, (0..cutoff).map(|m| (m, m + 1, sqrt(m + 1))));
    let a_dag = a.transpose();
    let n = SparseMatrix::from_entries(dim, (0..dim).map(|m| (m, m, m as f64)));
    let x = SparseMatrix::from_entries(
        dim,
        (0..cutoff).flat_map(|m| {
            let v = sqrt(m + 1) / std::f64::consts::SQRT_2;
            [(m, m + 1, v), (m + 1, m, v)]
        }),
    );
    let pair_entries = || {
        (0..dim.saturating_sub(2)).flat_map(|m| {
            let v = sqrt((m + 1) * (m + 2));
            [(m, m + 2, v), (m + 2, m, v)]
        })
    };
    let pair = SparseMatrix::from_entries(dim, pair_entries());
    let diag = |m: usize| (2 * m + 1) as f64 / 2.0;
    let x2 = SparseMatrix::from_entries(
        dim,
        (0..dim)
            .map(|m| (m, m, diag(m)))
            .chain(pair_entries().map(|(i, j, v)| (i, j, v / 2.0))),
    );
    let p2 = SparseMatrix::from_entries(
        dim,
        (0..dim)
            .map(|m| (m, m, diag(m)))
            .chain(pair_entries().map(|(i, j, v)| (i, j, -v / 2.0))),
    );
    Ok(FockOperators {
        cutoff,
        a,
        a_dag,
        n,
        x,
        x2,
        p2,
        pair,
    })
}
