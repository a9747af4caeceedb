//! Tensor-product quadrature with simultaneous level doubling.
//!
//! Periodic axes use the trapezoid rule, other axes composite 16-point
//! Gauss–Legendre panels. Each refinement doubles the nodes on every axis;
//! the result is accepted once two consecutive levels agree to `rel_tol`
//! measured against max(|I|, ∫|f|).

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{pairwise_sum, pairwise_sum_real, C64};

const PANEL_ORDER: usize = 16;
const BASE_NODES: usize = 16;
const MAX_TOTAL_NODES: usize = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisRule {
    Periodic,
    GaussLegendre,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadAxis {
    pub lo: f64,
    pub hi: f64,
    pub rule: AxisRule,
}

impl QuadAxis {
    pub fn periodic(lo: f64, hi: f64) -> Self {
        Self { lo, hi, rule: AxisRule::Periodic }
    }
    pub fn legendre(lo: f64, hi: f64) -> Self {
        Self { lo, hi, rule: AxisRule::GaussLegendre }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    /// cap on nodes per axis
    pub max_nodes: usize,
    /// first level at which convergence may be declared
    pub min_level: usize,
    /// absolute floor on the change between levels, for integrals that cancel to zero
    pub abs_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rel_tol: 1e-8, max_nodes: 1 << 14, min_level: 1, abs_tol: 0.0 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol >= 0.0) || self.max_nodes < BASE_NODES {
            return Err(Error::Config(format!("invalid quadrature spec {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOutcome {
    pub value: C64,
    pub nodes_per_axis: usize,
    /// last relative change between levels
    pub estimate: f64,
}

fn legendre_16() -> &'static (Vec<f64>, Vec<f64>) {
    static CELL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    CELL.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

/// Gauss–Legendre nodes and weights on [-1, 1] (Newton on the three-term recurrence).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Nodes and weights of one axis at a refinement level.
pub fn axis_nodes(axis: &QuadAxis, level: usize) -> Vec<(f64, f64)> {
    let len = axis.hi - axis.lo;
    match axis.rule {
        AxisRule::Periodic => {
            let n = BASE_NODES << level;
            let step = len / n as f64;
            (0..n).map(|j| (axis.lo + j as f64 * step, step)).collect()
        }
        AxisRule::GaussLegendre => {
            let panels = 1usize << level;
            let (gx, gw) = legendre_16();
            let pw = len / panels as f64;
            let mut out = Vec::with_capacity(panels * PANEL_ORDER);
            for p in 0..panels {
                let a = axis.lo + p as f64 * pw;
                for (x, w) in gx.iter().zip(gw) {
                    out.push((a + 0.5 * pw * (x + 1.0), 0.5 * pw * w));
                }
            }
            out
        }
    }
}

fn integrate_level<F>(axes: &[QuadAxis], level: usize, f: &F) -> Result<(C64, f64)>
where
    F: Fn(&[f64]) -> Result<C64>,
{
    let per_axis: Vec<Vec<(f64, f64)>> = axes.iter().map(|a| axis_nodes(a, level)).collect();
    let total: usize = per_axis.iter().map(|v| v.len()).product();
    let mut vals = Vec::with_capacity(total);
    let mut mags = Vec::with_capacity(total);
    let mut idx = vec![0usize; axes.len()];
    let mut point = vec![0.0; axes.len()];
    for _ in 0..total {
        let mut w = 1.0;
        for (d, nodes) in per_axis.iter().enumerate() {
            point[d] = nodes[idx[d]].0;
            w *= nodes[idx[d]].1;
        }
        let v = f(&point)? * w;
        mags.push(v.norm());
        vals.push(v);
        for d in (0..axes.len()).rev() {
            idx[d] += 1;
            if idx[d] < per_axis[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
    Ok((pairwise_sum(&vals), pairwise_sum_real(&mags)))
}

fn nodes_at(axis: &QuadAxis, level: usize) -> usize {
    match axis.rule {
        AxisRule::Periodic => BASE_NODES << level,
        AxisRule::GaussLegendre => PANEL_ORDER << level,
    }
}

/// Adaptive tensor-product integral of `f` over the box `axes`.
pub fn integrate<F>(axes: &[QuadAxis], spec: &QuadratureSpec, context: &'static str, f: F) -> Result<QuadOutcome>
where
    F: Fn(&[f64]) -> Result<C64>,
{
    spec.validate()?;
    if axes.is_empty() {
        return Ok(QuadOutcome { value: f(&[])?, nodes_per_axis: 0, estimate: 0.0 });
    }
    let mut prev: Option<C64> = None;
    let mut estimate = f64::INFINITY;
    let mut level = 0;
    loop {
        let per: Vec<usize> = axes.iter().map(|a| nodes_at(a, level)).collect();
        let total: usize = per.iter().product();
        if per.iter().any(|&n| n > spec.max_nodes) || total > MAX_TOTAL_NODES {
            return Err(Error::Accuracy { context, achieved: estimate });
        }
        let (value, mass) = integrate_level(axes, level, &f)?;
        if let Some(p) = prev {
            let scale = value.norm().max(mass);
            let change = (value - p).norm();
            estimate = if scale > 0.0 { change / scale } else { 0.0 };
            if level >= spec.min_level && (change <= spec.rel_tol * scale + spec.abs_tol || scale == 0.0) {
                return Ok(QuadOutcome { value, nodes_per_axis: per[0], estimate });
            }
        }
        prev = Some(value);
        level += 1;
    }
}

pub fn integrate_real<F>(axes: &[QuadAxis], spec: &QuadratureSpec, context: &'static str, f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    Ok(integrate(axes, spec, context, |p| f(p).map(|v| C64::new(v, 0.0)))?.value.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_exact_for_polynomials() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let m30: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((m30 - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn periodic_trapezoid_spectral() {
        let spec = QuadratureSpec::default();
        let r = integrate(&[QuadAxis::periodic(0.0, 2.0 * std::f64::consts::PI)], &spec, "test", |p| {
            Ok(C64::new((p[0].cos()).exp(), 0.0))
        })
        .unwrap();
        // 2π I0(1)
        assert!((r.value.re - 2.0 * std::f64::consts::PI * 1.266_065_877_752_008_4).abs() < 1e-13);
    }

    #[test]
    fn two_dimensional_box() {
        let spec = QuadratureSpec::default();
        let r = integrate(&[QuadAxis::legendre(0.0, 1.0), QuadAxis::legendre(-1.0, 2.0)], &spec, "test", |p| {
            Ok(C64::new(p[0] * p[0] * p[1].exp(), 0.0))
        })
        .unwrap();
        let exact = (2f64.exp() - (-1f64).exp()) / 3.0;
        assert!((r.value.re - exact).abs() < 1e-13);
    }

    #[test]
    fn node_cap_reports_accuracy() {
        let spec = QuadratureSpec { rel_tol: 1e-8, max_nodes: 32, min_level: 1, abs_tol: 0.0 };
        let r = integrate(&[QuadAxis::legendre(0.0, 1.0)], &spec, "test", |p| Ok(C64::from_polar(1.0, 1e4 * p[0] * p[0])));
        assert!(matches!(r, Err(Error::Accuracy { .. })));
    }
}
