//! Local and global canonical operators.
//!
//! Three local evaluators share the [`LocalOperator`] interface: the
//! eikonal-coordinate chart that stays valid at caustics
//! ([`NewSingularChart`]), the classical mixed-coordinate chart
//! ([`StandardChart`]) and the regular-point formula
//! ([`NonsingularChart`]).

mod new_chart;
mod nonsingular;
mod quantization;
mod standard;

use std::sync::Arc;

pub use new_chart::{m_matrix, split_psi, Me1Solver, NewChartOptions, NewSingularChart, PsiSplit};
pub use nonsingular::{evaluate_nonsingular, Branch, BranchIndex, NonsingularChart};
pub use quantization::{action_integral, check_quantization, QuantizationResidual};
pub use standard::{inflated_box, support_truncation, CanonicalInverse, StandardChart};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Amplitude on the manifold, a function of the chart coordinates.
pub trait Amplitude: Send + Sync {
    fn value(&self, alpha: &[f64]) -> C64;
}

impl<F> Amplitude for F
where
    F: Fn(&[f64]) -> C64 + Send + Sync,
{
    fn value(&self, alpha: &[f64]) -> C64 {
        self(alpha)
    }
}

/// a ≡ 0.
pub struct ZeroAmplitude;

impl Amplitude for ZeroAmplitude {
    fn value(&self, _alpha: &[f64]) -> C64 {
        C64::new(0.0, 0.0)
    }
}

/// e(α)·a(α).
pub struct Weighted<'a> {
    pub weight: &'a (dyn Fn(&[f64]) -> f64 + Send + Sync),
    pub inner: &'a dyn Amplitude,
}

impl Amplitude for Weighted<'_> {
    fn value(&self, alpha: &[f64]) -> C64 {
        let w = (self.weight)(alpha);
        if w == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            self.inner.value(alpha) * w
        }
    }
}

fn psi_raw(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// C^∞ step: 0 for s ≤ 0, 1 for s ≥ 1.
pub fn smooth_step(s: f64) -> f64 {
    let a = psi_raw(s);
    let b = psi_raw(1.0 - s);
    if a + b == 0.0 {
        return if s >= 1.0 { 1.0 } else { 0.0 };
    }
    a / (a + b)
}

/// 1 on |r| ≤ plateau, 0 on |r| ≥ support.
pub fn bump(r: f64, plateau: f64, support: f64) -> f64 {
    let r = r.abs();
    if r <= plateau {
        1.0
    } else if r >= support {
        0.0
    } else {
        1.0 - smooth_step((r - plateau) / (support - plateau))
    }
}

/// Cutoff χ in the ψ″ variables: a product of bumps around ψ″*.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CutoffSpec {
    /// (plateau, support) per ψ″ coordinate; None means χ ≡ 1 in that coordinate
    pub radii: Vec<Option<(f64, f64)>>,
}

impl CutoffSpec {
    pub fn none(dim: usize) -> Self {
        Self { radii: vec![None; dim] }
    }

    pub fn validate(&self) -> Result<()> {
        for r in self.radii.iter().flatten() {
            if !(r.0 >= 0.0 && r.1 > r.0) {
                return Err(Error::Config(format!("cutoff radii {r:?} must satisfy 0 <= plateau < support")));
            }
        }
        Ok(())
    }

    /// χ at offsets d = ψ″ − ψ″* (periodic offsets already reduced).
    pub fn chi(&self, offsets: &[f64]) -> f64 {
        self.radii.iter().zip(offsets).map(|(r, d)| r.map_or(1.0, |(p, s)| bump(*d, p, s))).product()
    }
}

/// One local canonical operator acting on amplitudes.
pub trait LocalOperator: Send + Sync {
    fn apply(&self, a: &dyn Amplitude, x: &[f64], h: f64) -> Result<C64>;
}

pub type Weight = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Charts with weights e_j summing to one on the amplitude support.
#[derive(Clone, Default)]
pub struct PartitionOfUnity {
    pub entries: Vec<(Arc<dyn LocalOperator>, Weight)>,
    /// points of the amplitude support where Σ e_j = 1 is verified
    pub samples: Vec<Vec<f64>>,
}

impl PartitionOfUnity {
    pub fn single(op: Arc<dyn LocalOperator>) -> Self {
        Self { entries: vec![(op, Arc::new(|_: &[f64]| 1.0))], samples: Vec::new() }
    }

    /// Largest |Σ e_j − 1| at sample points where the amplitude is nonzero.
    pub fn deviation(&self, a: &dyn Amplitude) -> f64 {
        self.samples
            .iter()
            .filter(|s| a.value(s).norm() > 0.0)
            .map(|s| (self.entries.iter().map(|(_, w)| w(s)).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Σ_j K_j(e_j a).
pub fn evaluate_global(partition: &PartitionOfUnity, a: &dyn Amplitude, x: &[f64], h: f64) -> Result<C64> {
    let dev = partition.deviation(a);
    if dev > 1e-12 || partition.entries.is_empty() {
        return Err(Error::Coverage { deviation: if partition.entries.is_empty() { 1.0 } else { dev } });
    }
    let mut total = C64::new(0.0, 0.0);
    for (op, w) in &partition.entries {
        let weighted = Weighted { weight: w.as_ref(), inner: a };
        total += op.apply(&weighted, x, h)?;
    }
    Ok(total)
}

pub(crate) fn check_h(h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Config(format!("h must be positive, got {h}")));
    }
    Ok(())
}

/// Offset reduced to (−L/2, L/2] for periodic axes.
pub(crate) fn periodic_offset(d: f64, period: Option<f64>) -> f64 {
    match period {
        Some(l) => d - l * (d / l).round(),
        None => d,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_shape() {
        assert_eq!(bump(0.5, 1.0, 2.0), 1.0);
        assert_eq!(bump(-2.5, 1.0, 2.0), 0.0);
        let mid = bump(1.5, 1.0, 2.0);
        assert!((mid - 0.5).abs() < 1e-14);
        assert!(bump(1.2, 1.0, 2.0) > bump(1.8, 1.0, 2.0));
    }

    #[test]
    fn zero_weight_partition() {
        struct Const(C64);
        impl LocalOperator for Const {
            fn apply(&self, a: &dyn Amplitude, x: &[f64], _h: f64) -> Result<C64> {
                Ok(self.0 * a.value(x))
            }
        }
        let one = |_: &[f64]| C64::new(1.0, 0.0);
        let p = PartitionOfUnity {
            entries: vec![
                (Arc::new(Const(C64::new(2.0, 0.0))), Arc::new(|_: &[f64]| 1.0)),
                (Arc::new(Const(C64::new(5.0, 0.0))), Arc::new(|_: &[f64]| 0.0)),
            ],
            samples: vec![vec![0.0]],
        };
        assert_eq!(evaluate_global(&p, &one, &[0.3], 0.1).unwrap(), C64::new(2.0, 0.0));
        let bad = PartitionOfUnity { entries: vec![(Arc::new(Const(C64::new(1.0, 0.0))), Arc::new(|_: &[f64]| 0.5))], samples: vec![vec![0.0]] };
        assert!(matches!(evaluate_global(&bad, &one, &[0.0], 0.1), Err(Error::Coverage { .. })));
    }
}
