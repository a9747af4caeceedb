//! Λ³ = {x = τ n(ω), p = n(ω)}: rays through the origin, a point focus at τ = 0.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::REFERENCE_QUARTER_TURNS;
use crate::canonical::{bump, BranchIndex, CanonicalInverse, NewChartOptions, NewSingularChart, NonsingularChart, StandardChart};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::manifold::{EikonalChart, IndexSet, LagrangianChart, ParamAxis, ParamDomain};
use crate::quadrature::QuadratureSpec;
use crate::special::bessel_j_series;

/// Coordinates (τ, θ, ψ), measure sinθ dτ dθ dψ.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RadialManifold;

pub fn radial_manifold() -> RadialManifold {
    RadialManifold
}

fn unit(theta: f64, psi: f64) -> [f64; 3] {
    [theta.sin() * psi.cos(), theta.sin() * psi.sin(), theta.cos()]
}

fn unit_theta(theta: f64, psi: f64) -> [f64; 3] {
    [theta.cos() * psi.cos(), theta.cos() * psi.sin(), -theta.sin()]
}

fn unit_psi(theta: f64, psi: f64) -> [f64; 3] {
    [-theta.sin() * psi.sin(), theta.sin() * psi.cos(), 0.0]
}

impl LagrangianChart for RadialManifold {
    fn dim(&self) -> usize {
        3
    }
    fn domain(&self) -> ParamDomain {
        ParamDomain::new(vec![ParamAxis::real_line(), ParamAxis::interval(0.0, PI), ParamAxis::circle(0.0, 2.0 * PI)])
    }
    fn position(&self, a: &[f64]) -> DVector<f64> {
        let n = unit(a[1], a[2]);
        DVector::from_fn(3, |i, _| a[0] * n[i])
    }
    fn momentum(&self, a: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(&unit(a[1], a[2]))
    }
    fn density(&self, a: &[f64]) -> f64 {
        a[1].sin()
    }
    fn dposition(&self, a: &[f64]) -> DMatrix<f64> {
        let (n, nt, np) = (unit(a[1], a[2]), unit_theta(a[1], a[2]), unit_psi(a[1], a[2]));
        DMatrix::from_fn(3, 3, |i, j| match j {
            0 => n[i],
            1 => a[0] * nt[i],
            _ => a[0] * np[i],
        })
    }
    fn dmomentum(&self, a: &[f64]) -> DMatrix<f64> {
        let (nt, np) = (unit_theta(a[1], a[2]), unit_psi(a[1], a[2]));
        DMatrix::from_fn(3, 3, |i, j| match j {
            0 => 0.0,
            1 => nt[i],
            _ => np[i],
        })
    }
    fn name(&self) -> String {
        "radial".into()
    }
}

impl EikonalChart for RadialManifold {}

/// Central point (τ, θ, ψ) = (1, π/2, 0).
pub fn radial_central_point() -> Vec<f64> {
    vec![1.0, 0.5 * PI, 0.0]
}

/// Focal center (0, π/2, 0).
pub fn radial_center() -> Vec<f64> {
    vec![0.0, 0.5 * PI, 0.0]
}

/// −2 sin(|x|/h)/|x|.
pub fn radial_field(x: &[f64], h: f64) -> Result<C64> {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(Error::SingularOracle);
    }
    Ok(C64::new(-2.0 * (r / h).sin() / r, 0.0))
}

/// −√(2π/(h|x|)) J_{1/2}(|x|/h), the same field through the half-order Bessel function.
pub fn radial_field_bessel(x: &[f64], h: f64) -> Result<C64> {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(Error::SingularOracle);
    }
    Ok(C64::new(-(2.0 * PI / (h * r)).sqrt() * bessel_j_series(0.5, r / h), 0.0))
}

/// Amplitude equal to 1 for |τ| ≤ plateau, vanishing for |τ| ≥ support.
pub fn radial_cutoff_amplitude(plateau: f64, support: f64) -> impl Fn(&[f64]) -> C64 + Send + Sync + Clone {
    move |a: &[f64]| C64::new(bump(a[0], plateau, support), 0.0)
}

pub fn radial_new_chart(quadrature: QuadratureSpec) -> Result<NewSingularChart> {
    let mut opts = NewChartOptions::new(radial_central_point());
    opts.reference_quarter_turns = REFERENCE_QUARTER_TURNS;
    opts.quadrature = quadrature;
    NewSingularChart::new(Arc::new(RadialManifold), radial_center(), opts)
}

/// α(x₃, p⊥) on the upper hemisphere θ < π/2.
pub fn radial_cap_inverse() -> CanonicalInverse {
    Arc::new(|x_i: &[f64], p: &[f64]| {
        let s = (p[0] * p[0] + p[1] * p[1]).sqrt();
        if s >= 1.0 {
            return Ok(None);
        }
        let theta = s.asin();
        let psi = if s == 0.0 { 0.0 } else { p[1].atan2(p[0]).rem_euclid(2.0 * PI) };
        Ok(Some(vec![x_i[0] / theta.cos(), theta, psi]))
    })
}

/// Chart I = {3} (coordinates (p₁, p₂, x₃)) on the upper hemisphere, with
/// momentum support |p⊥| ≤ `p_max`.
pub fn radial_standard_chart(index: i64, p_max: f64, quadrature: QuadratureSpec) -> Result<StandardChart> {
    let subset = IndexSet::one_based(3, &[3])?;
    Ok(StandardChart::new(Arc::new(RadialManifold), subset, |a: &[f64]| a[0], index)?
        .with_inverse(radial_cap_inverse())
        .with_momentum_support(vec![(-p_max, p_max), (-p_max, p_max)])?
        .with_quadrature(quadrature)
        .with_reference_quarter_turns(REFERENCE_QUARTER_TURNS))
}

/// Regular-point evaluator with branch indices from the central point.
pub fn radial_nonsingular_chart(max_radius: f64) -> Result<NonsingularChart> {
    let taus: Vec<f64> = (-4..=4).filter(|&i| i != 0).map(|i| 0.5 * i as f64 * max_radius.max(0.5)).collect();
    NonsingularChart::new(
        Arc::new(RadialManifold),
        BranchIndex::FromCentral { alpha0: radial_central_point() },
        vec![taus, vec![0.4, 1.2, 2.0, 2.7], vec![0.3, 1.8, 3.3, 4.8]],
    )
    .map(|c| c.with_reference_quarter_turns(REFERENCE_QUARTER_TURNS))
}
