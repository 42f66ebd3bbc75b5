use alloc::vec::Vec;
use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use num_complex::Complex64;
use num_traits::Float;

use super::assemble::{AssembledSystem, SystemMeta};
use super::field::DiscreteField;
use crate::{Error, Result};

/// Required relative residual `‖Ax - b‖ / ‖b‖`.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Compressed sparse rows with duplicates summed.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<Complex64>,
}

impl CsrMatrix {
    pub fn from_triplets(n: usize, mut trip: Vec<(usize, usize, Complex64)>) -> Self {
        trip.sort_unstable_by_key(|t| (t.0, t.1));
        let mut row_ptr = alloc::vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(trip.len() / 4);
        let mut vals: Vec<Complex64> = Vec::with_capacity(trip.len() / 4);
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in trip {
            if last == Some((i, j)) {
                *vals.last_mut().expect("entry exists") += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, (0..n).map(|i| (i, i, Complex64::new(1.0, 0.0))).collect())
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .map(|p| self.vals[p] * x[self.cols[p]])
                    .sum()
            })
            .collect()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let row = &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]];
        match row.binary_search(&j) {
            Ok(p) => self.vals[self.row_ptr[i] + p],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// A solved field with its diagnostics.
#[derive(Debug, Clone)]
pub struct Solution {
    pub field: DiscreteField,
    /// Relative residual of the linear solve on the free dofs.
    pub residual: f64,
    /// `‖b‖₂` of the right-hand side.
    pub rhs_norm: f64,
    /// `‖x‖₂` of the free-dof solution vector.
    pub free_norm: f64,
    pub meta: SystemMeta,
}

/// Direct sparse LU solve, with up to three steps of iterative refinement.
pub fn solve(sys: &AssembledSystem) -> Result<Solution> {
    let n = sys.n_free();
    let bn = norm(&sys.rhs);
    let done = |x: Vec<Complex64>, residual: f64| Solution {
        free_norm: norm(&x),
        field: DiscreteField { space: sys.space.clone(), dofs: sys.expand(&x), alpha: sys.meta.alpha },
        residual,
        rhs_norm: bn,
        meta: sys.meta.clone(),
    };
    if bn == 0.0 {
        return Ok(done(alloc::vec![Complex64::new(0.0, 0.0); n], 0.0));
    }
    let a = &sys.matrix;
    let trip: Vec<Triplet<usize, usize, Complex64>> = (0..n)
        .flat_map(|i| (a.row_ptr[i]..a.row_ptr[i + 1]).map(move |p| (i, p)))
        .map(|(i, p)| Triplet::new(i, a.cols[p], a.vals[p]))
        .collect();
    let mat = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &trip).map_err(|_| Error::Singular)?;
    let lu = mat.sp_lu().map_err(|_| Error::Singular)?;
    let apply = |r: &[Complex64]| -> Vec<Complex64> {
        let rhs = Mat::<Complex64>::from_fn(n, 1, |i, _| r[i]);
        let sol = lu.solve(&rhs);
        (0..n).map(|i| sol[(i, 0)]).collect()
    };
    let mut x = apply(&sys.rhs);
    let residual_of = |x: &[Complex64]| -> (Vec<Complex64>, f64) {
        let ax = a.matvec(x);
        let r: Vec<Complex64> = sys.rhs.iter().zip(&ax).map(|(b, y)| b - y).collect();
        let rn = norm(&r) / bn;
        (r, rn)
    };
    let (mut r, mut res) = residual_of(&x);
    for _ in 0..3 {
        if !(res > 1e-14) {
            break;
        }
        let dx = apply(&r);
        let cand: Vec<Complex64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
        let (r2, res2) = residual_of(&cand);
        if !(res2 < res) {
            break;
        }
        x = cand;
        r = r2;
        res = res2;
    }
    if !res.is_finite() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular);
    }
    if res > RESIDUAL_TOL {
        return Err(Error::Residual(res));
    }
    Ok(done(x, res))
}
