use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DVector;

use super::{check_h, Amplitude, LocalOperator};
use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::manifold::{jacobian, EikonalChart, ManifoldPath};
use crate::maslov::path_index;

const CAUSTIC_GUARD: f64 = 1e-6;

/// How the index of each preimage branch is obtained.
#[derive(Clone, Debug, PartialEq)]
pub enum BranchIndex {
    Fixed(i64),
    /// ind of the straight path from the central point to the branch
    FromCentral { alpha0: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub alpha: Vec<f64>,
    pub jacobian: f64,
    pub index: i64,
}

/// Regular-point formula summed over all preimages of x.
#[derive(Clone)]
pub struct NonsingularChart {
    eik: Arc<dyn EikonalChart>,
    index: BranchIndex,
    /// seed values per coordinate; the tensor grid seeds the branch search
    seed_axes: Vec<Vec<f64>>,
    reference_quarter_turns: i32,
}

impl NonsingularChart {
    pub fn new(eik: Arc<dyn EikonalChart>, index: BranchIndex, seed_axes: Vec<Vec<f64>>) -> Result<Self> {
        if seed_axes.len() != eik.dim() || seed_axes.iter().any(|s| s.is_empty()) {
            return Err(Error::Config("one nonempty seed list per coordinate required".into()));
        }
        Ok(Self { eik, index, seed_axes, reference_quarter_turns: 0 })
    }

    pub fn with_reference_quarter_turns(mut self, q: i32) -> Self {
        self.reference_quarter_turns = q;
        self
    }

    fn newton(&self, x: &DVector<f64>, seed: &[f64]) -> Option<Vec<f64>> {
        let domain = self.eik.domain();
        let tol = 1e-13 * (1.0 + x.amax());
        let mut a = seed.to_vec();
        for _ in 0..60 {
            if !domain.contains(&a) {
                return None;
            }
            let f = self.eik.position(&a) - x;
            if f.amax() <= tol {
                domain.wrap(&mut a);
                return Some(a);
            }
            let step = linalg::solve(&self.eik.dposition(&a), &(-f))?;
            let cap = 1.0 / step.amax().max(1.0);
            for (v, s) in a.iter_mut().zip(step.iter()) {
                *v += cap * s;
            }
        }
        None
    }

    /// All regular preimages of x, deduplicated on the manifold.
    pub fn branches(&self, x: &[f64]) -> Result<Vec<Branch>> {
        let xv = DVector::from_column_slice(x);
        let mut found: Vec<(Vec<f64>, DVector<f64>)> = Vec::new();
        let total: usize = self.seed_axes.iter().map(|s| s.len()).product();
        let mut idx = vec![0usize; self.seed_axes.len()];
        for _ in 0..total {
            let seed: Vec<f64> = idx.iter().enumerate().map(|(d, &i)| self.seed_axes[d][i]).collect();
            if let Some(a) = self.newton(&xv, &seed) {
                let p = self.eik.momentum(&a);
                if !found.iter().any(|(_, q)| (q - &p).amax() < 1e-6) {
                    found.push((a, p));
                }
            }
            for d in (0..idx.len()).rev() {
                idx[d] += 1;
                if idx[d] < self.seed_axes[d].len() {
                    break;
                }
                idx[d] = 0;
            }
        }
        found.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut out = Vec::with_capacity(found.len());
        for (alpha, _) in found {
            let j = jacobian(self.eik.as_ref(), &alpha)?;
            if j.abs() < CAUSTIC_GUARD {
                return Err(Error::NearCaustic { jacobian: j });
            }
            let index = match &self.index {
                BranchIndex::Fixed(m) => *m,
                BranchIndex::FromCentral { alpha0 } => path_index(self.eik.as_ref(), &ManifoldPath::segment(alpha0.clone(), alpha.clone()))?.value,
            };
            out.push(Branch { alpha, jacobian: j, index });
        }
        Ok(out)
    }

    /// e^{iτ/h} a √(|μ||P|) / det(X_ψᵀX_ψ)^{1/4} at one branch, without the index factor.
    pub fn branch_term(&self, a: &dyn Amplitude, alpha: &[f64], h: f64) -> Result<C64> {
        let n = self.eik.dim();
        let cols: Vec<usize> = (1..n).collect();
        let g = linalg::det(&linalg::gram(&linalg::select_columns(&self.eik.dposition(alpha), &cols)));
        let mu = self.eik.density(alpha);
        let pn = self.eik.momentum(alpha).norm();
        let tau = alpha[0] + self.eik.tau_offset();
        let mag = (mu.abs() * pn).sqrt() / g.abs().powf(0.25);
        Ok(C64::from_polar(mag, tau / h) * a.value(alpha))
    }

    pub fn evaluate(&self, a: &dyn Amplitude, x: &[f64], h: f64) -> Result<C64> {
        check_h(h)?;
        if x.len() != self.eik.dim() {
            return Err(Error::Dimension { expected: self.eik.dim(), got: x.len() });
        }
        let q = C64::from_polar(1.0, PI * self.reference_quarter_turns as f64 / 2.0);
        let mut total = C64::new(0.0, 0.0);
        for b in self.branches(x)? {
            total += C64::from_polar(1.0, -PI * b.index as f64 / 2.0) * self.branch_term(a, &b.alpha, h)?;
        }
        Ok(q * total)
    }
}

impl LocalOperator for NonsingularChart {
    fn apply(&self, a: &dyn Amplitude, x: &[f64], h: f64) -> Result<C64> {
        self.evaluate(a, x, h)
    }
}

/// Regular-point formula with one index for every branch.
pub fn evaluate_nonsingular(
    eik: Arc<dyn EikonalChart>,
    a: &dyn Amplitude,
    x: &[f64],
    h: f64,
    m: i64,
    seed_axes: Vec<Vec<f64>>,
) -> Result<C64> {
    NonsingularChart::new(eik, BranchIndex::Fixed(m), seed_axes)?.evaluate(a, x, h)
}
