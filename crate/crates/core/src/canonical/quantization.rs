use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::manifold::{pdx_form, LagrangianChart, ManifoldPath};
use crate::maslov::cycle_index;
use crate::quadrature::{integrate_real, QuadAxis, QuadratureSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct QuantizationResidual {
    /// ∮ P dX
    pub action: f64,
    pub index: i64,
    /// (2/(πh))∮P dX − ind γ reduced mod 4 into (−2, 2]
    pub residual: f64,
    pub passes: bool,
}

fn closing_gap(chart: &(impl LagrangianChart + ?Sized), cycle: &ManifoldPath) -> f64 {
    let domain = chart.domain();
    let (a, b) = (cycle.start(), cycle.end());
    a.iter()
        .zip(&b)
        .zip(&domain.axes)
        .map(|((u, v), ax)| {
            let d = v - u;
            if ax.periodic {
                let l = ax.hi - ax.lo;
                (d - l * (d / l).round()).abs()
            } else {
                d.abs()
            }
        })
        .fold(0.0, f64::max)
}

/// ∮ P dX along a path.
pub fn action_integral(chart: &(impl LagrangianChart + ?Sized), path: &ManifoldPath) -> Result<f64> {
    let spec = QuadratureSpec { rel_tol: 1e-12, abs_tol: 1e-14, ..QuadratureSpec::default() };
    integrate_real(&[QuadAxis::legendre(0.0, 1.0)], &spec, "canonical_operator", |t| {
        let a = path.at(t[0]);
        let form = pdx_form(chart, &a)?;
        let v = path.velocity(t[0]);
        Ok(form.iter().zip(&v).map(|(f, d)| f * d).sum())
    })
}

/// Bohr–Sommerfeld residual for each cycle.
pub fn check_quantization(chart: &(impl LagrangianChart + ?Sized), cycles: &[ManifoldPath], h: f64, tol: f64) -> Result<Vec<QuantizationResidual>> {
    super::check_h(h)?;
    let mut out = Vec::with_capacity(cycles.len());
    for c in cycles {
        let gap = closing_gap(chart, c);
        if gap > 1e-10 {
            return Err(Error::NotACycle { gap });
        }
        let action = action_integral(chart, c)?;
        let index = cycle_index(chart, c)?.value;
        let mut r = (2.0 / (PI * h) * action - index as f64).rem_euclid(4.0);
        if r > 2.0 {
            r -= 4.0;
        }
        out.push(QuantizationResidual { action, index, residual: r, passes: r.abs() < tol });
    }
    Ok(out)
}
