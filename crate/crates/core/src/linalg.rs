//! Small dense kernels on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub fn det(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    m.clone().lu().determinant()
}

pub fn det_c(m: &DMatrix<C64>) -> C64 {
    if m.nrows() == 0 {
        return C64::new(1.0, 0.0);
    }
    m.clone().lu().determinant()
}

pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Number of singular values above `rel * max`.
pub fn numerical_rank(m: &DMatrix<f64>, rel: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        None => 0,
        Some(&0.0) => 0,
        Some(&top) => s.iter().filter(|&&v| v > rel * top).count(),
    }
}

pub fn min_singular_value(m: &DMatrix<f64>) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

pub fn gram(cols: &DMatrix<f64>) -> DMatrix<f64> {
    cols.transpose() * cols
}

pub fn select_columns(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), idx.len(), |i, j| m[(i, idx[j])])
}

pub fn select_rows(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), m.ncols(), |i, j| m[(idx[i], j)])
}

pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    if a.nrows() == 0 {
        return Some(DVector::zeros(0));
    }
    a.clone().lu().solve(b)
}

/// 2-norm condition number via singular values; infinite for singular input.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (None, None) => 1.0,
        _ => f64::INFINITY,
    }
}

/// Greedy column-pivoted selection of `k` columns maximizing the Gram volume.
pub fn pivot_columns(m: &DMatrix<f64>, k: usize) -> Vec<usize> {
    let mut residual = m.clone();
    let mut chosen = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best = None;
        let mut best_norm = -1.0;
        for j in 0..residual.ncols() {
            if chosen.contains(&j) {
                continue;
            }
            let nrm = residual.column(j).norm();
            if nrm > best_norm {
                best_norm = nrm;
                best = Some(j);
            }
        }
        let Some(j) = best else { break };
        chosen.push(j);
        if best_norm > 0.0 {
            let q = residual.column(j) / best_norm;
            for c in 0..residual.ncols() {
                let proj = q.dot(&residual.column(c));
                let upd = residual.column(c) - &q * proj;
                residual.set_column(c, &upd);
            }
        }
    }
    chosen.sort_unstable();
    chosen
}

/// Symmetric eigenvalues in ascending order. Asymmetry above 1e-10 (relative) is rejected.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let scale = a.amax().max(1.0);
    let asym = (a - a.transpose()).amax();
    if asym > 1e-10 * scale {
        return Err(Error::Precondition(format!("matrix not symmetric (asymmetry {asym:e})")));
    }
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let sym = (a + a.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(ev)
}

/// Negative index of inertia of a symmetric matrix.
pub fn sigma_minus(a: &DMatrix<f64>) -> Result<usize> {
    let ev = symmetric_eigenvalues(a)?;
    if let Some(&tiny) = ev.iter().find(|v| v.abs() < 1e-10) {
        return Err(Error::DegenerateSignature { eigenvalue: tiny });
    }
    Ok(ev.iter().filter(|&&v| v < 0.0).count())
}

/// Eigenvalues of a general complex matrix (complex Schur form).
pub fn complex_eigenvalues(a: &DMatrix<C64>) -> Vec<C64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    a.clone().schur().eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_else(|| {
        // fall back to the diagonal of the Schur form when the quasi-triangular
        // extraction is refused
        let (_, t) = a.clone().schur().unpack();
        (0..t.nrows()).map(|i| t[(i, i)]).collect()
    })
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|v| C64::new(v, 0.0))
}

/// Pairwise summation, used everywhere results must not depend on scheduling.
pub fn pairwise_sum(v: &[C64]) -> C64 {
    if v.len() <= 16 {
        return v.iter().fold(C64::new(0.0, 0.0), |acc, x| acc + x);
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

pub fn pairwise_sum_real(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum_real(&v[..mid]) + pairwise_sum_real(&v[mid..])
}
