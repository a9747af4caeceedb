//! Oscillatory integrals e^{iπm/4}(2πh)^{−m/2}∫e^{iΦ(x,θ)/h}a(x,θ)dθ: brute-force
//! quadrature, stationary points, the leading stationary-phase term and the
//! 1/h-Fourier transform pair.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::manifold::fd_jacobian;
use crate::quadrature::{integrate, QuadAxis, QuadOutcome, QuadratureSpec};

/// Φ(x, θ) on ℝⁿ × V, V a box in ℝᵐ. Derivatives default to central differences.
pub trait PhaseFunction: Send + Sync {
    fn n(&self) -> usize;
    fn m(&self) -> usize;
    fn phase(&self, x: &[f64], theta: &[f64]) -> f64;
    /// The box V.
    fn theta_box(&self) -> Vec<(f64, f64)>;

    fn grad_x(&self, x: &[f64], theta: &[f64]) -> DVector<f64> {
        fd_jacobian(|y| DVector::from_element(1, self.phase(y, theta)), x).row(0).transpose()
    }
    fn grad_theta(&self, x: &[f64], theta: &[f64]) -> DVector<f64> {
        fd_jacobian(|t| DVector::from_element(1, self.phase(x, t)), theta).row(0).transpose()
    }
    /// Φ_θθ (m×m)
    fn hess_theta_theta(&self, x: &[f64], theta: &[f64]) -> DMatrix<f64> {
        fd_jacobian(|t| self.grad_theta(x, t), theta)
    }
    /// Φ_θx (m×n): row j is ∂_x Φ_θj
    fn hess_theta_x(&self, x: &[f64], theta: &[f64]) -> DMatrix<f64> {
        fd_jacobian(|y| self.grad_theta(y, theta), x)
    }
    /// Φ_xx (n×n)
    fn hess_x_x(&self, x: &[f64], theta: &[f64]) -> DMatrix<f64> {
        fd_jacobian(|y| self.grad_x(y, theta), x)
    }
    fn name(&self) -> String {
        "phase".into()
    }
}

/// Largest relative mismatch between supplied and finite-difference derivatives.
pub fn derivative_mismatch(phase: &dyn PhaseFunction, x: &[f64], theta: &[f64]) -> f64 {
    let rel = |a: &DMatrix<f64>, b: &DMatrix<f64>| (a - b).amax() / (1.0 + a.amax());
    let gx = fd_jacobian(|y| DVector::from_element(1, phase.phase(y, theta)), x).transpose();
    let gt = fd_jacobian(|t| DVector::from_element(1, phase.phase(x, t)), theta).transpose();
    let htt = fd_jacobian(|t| phase.grad_theta(x, t), theta);
    let htx = fd_jacobian(|y| phase.grad_theta(y, theta), x);
    let hxx = fd_jacobian(|y| phase.grad_x(y, theta), x);
    let as_col = |v: DVector<f64>| DMatrix::from_column_slice(v.len(), 1, v.as_slice());
    [
        rel(&as_col(phase.grad_x(x, theta)), &gx),
        rel(&as_col(phase.grad_theta(x, theta)), &gt),
        rel(&phase.hess_theta_theta(x, theta), &htt),
        rel(&phase.hess_theta_x(x, theta), &htx),
        rel(&phase.hess_x_x(x, theta), &hxx),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Φ = xθ + θ³/3, n = m = 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AiryPhase {
    pub half_width: f64,
}

impl Default for AiryPhase {
    fn default() -> Self {
        Self { half_width: 3.5 }
    }
}

impl PhaseFunction for AiryPhase {
    fn n(&self) -> usize {
        1
    }
    fn m(&self) -> usize {
        1
    }
    fn phase(&self, x: &[f64], t: &[f64]) -> f64 {
        x[0] * t[0] + t[0].powi(3) / 3.0
    }
    fn theta_box(&self) -> Vec<(f64, f64)> {
        vec![(-self.half_width, self.half_width)]
    }
    fn grad_x(&self, _x: &[f64], t: &[f64]) -> DVector<f64> {
        DVector::from_element(1, t[0])
    }
    fn grad_theta(&self, x: &[f64], t: &[f64]) -> DVector<f64> {
        DVector::from_element(1, x[0] + t[0] * t[0])
    }
    fn hess_theta_theta(&self, _x: &[f64], t: &[f64]) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, 2.0 * t[0])
    }
    fn hess_theta_x(&self, _x: &[f64], _t: &[f64]) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, 1.0)
    }
    fn hess_x_x(&self, _x: &[f64], _t: &[f64]) -> DMatrix<f64> {
        DMatrix::zeros(1, 1)
    }
    fn name(&self) -> String {
        "airy".into()
    }
}

/// Φ = xθ − θ²/2, n = m = 1; V centred at 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianPhase {
    pub half_width: f64,
}

impl Default for GaussianPhase {
    fn default() -> Self {
        Self { half_width: 16.0 }
    }
}

impl PhaseFunction for GaussianPhase {
    fn n(&self) -> usize {
        1
    }
    fn m(&self) -> usize {
        1
    }
    fn phase(&self, x: &[f64], t: &[f64]) -> f64 {
        x[0] * t[0] - 0.5 * t[0] * t[0]
    }
    fn theta_box(&self) -> Vec<(f64, f64)> {
        vec![(-self.half_width, self.half_width)]
    }
    fn grad_x(&self, _x: &[f64], t: &[f64]) -> DVector<f64> {
        DVector::from_element(1, t[0])
    }
    fn grad_theta(&self, x: &[f64], t: &[f64]) -> DVector<f64> {
        DVector::from_element(1, x[0] - t[0])
    }
    fn hess_theta_theta(&self, _x: &[f64], _t: &[f64]) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, -1.0)
    }
    fn hess_theta_x(&self, _x: &[f64], _t: &[f64]) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, 1.0)
    }
    fn hess_x_x(&self, _x: &[f64], _t: &[f64]) -> DMatrix<f64> {
        DMatrix::zeros(1, 1)
    }
    fn name(&self) -> String {
        "gaussian".into()
    }
}

fn check_x(phase: &dyn PhaseFunction, x: &[f64], h: f64) -> Result<()> {
    if x.len() != phase.n() {
        return Err(Error::Dimension { expected: phase.n(), got: x.len() });
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Config(format!("h must be positive, got {h}")));
    }
    Ok(())
}

/// e^{iπm/4}(2πh)^{−m/2}∫_V e^{iΦ/h} a dθ with its quadrature record.
pub fn brute_quadrature_detailed(
    phase: &dyn PhaseFunction,
    a: &dyn Fn(&[f64], &[f64]) -> C64,
    x: &[f64],
    h: f64,
    spec: &QuadratureSpec,
) -> Result<(C64, QuadOutcome)> {
    check_x(phase, x, h)?;
    let m = phase.m() as f64;
    let axes: Vec<QuadAxis> = phase.theta_box().into_iter().map(|(lo, hi)| QuadAxis::legendre(lo, hi)).collect();
    let out = integrate(&axes, spec, "oscillatory", |t| {
        let av = a(x, t);
        if av == C64::new(0.0, 0.0) {
            return Ok(av);
        }
        Ok(C64::from_polar(1.0, phase.phase(x, t) / h) * av)
    })?;
    let pref = C64::from_polar((2.0 * PI * h).powf(-m / 2.0), PI * m / 4.0);
    Ok((pref * out.value, out))
}

pub fn brute_quadrature(phase: &dyn PhaseFunction, a: &dyn Fn(&[f64], &[f64]) -> C64, x: &[f64], h: f64, spec: &QuadratureSpec) -> Result<C64> {
    brute_quadrature_detailed(phase, a, x, h, spec).map(|r| r.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationaryPoint {
    pub theta: Vec<f64>,
    /// Φ_θθ at θ̄
    pub hessian: DMatrix<f64>,
    pub phase: f64,
    pub degenerate: bool,
}

const SEEDS_PER_AXIS: usize = 12;

fn newton_root(phase: &dyn PhaseFunction, x: &[f64], seed: &[f64], bx: &[(f64, f64)]) -> Option<Vec<f64>> {
    let mut t = seed.to_vec();
    for _ in 0..400 {
        let g = phase.grad_theta(x, &t);
        if g.amax() == 0.0 {
            return Some(t);
        }
        let step = linalg::solve(&phase.hess_theta_theta(x, &t), &(-&g))?;
        for (v, s) in t.iter_mut().zip(step.iter()) {
            *v += s;
        }
        if t.iter().zip(bx).any(|(v, (lo, hi))| !(v >= lo && v <= hi)) {
            return None;
        }
        if step.amax() <= 1e-15 * (1.0 + t.iter().fold(0.0f64, |m, v| m.max(v.abs()))) {
            let scale = 1.0 + phase.grad_x(x, &t).amax();
            return (phase.grad_theta(x, &t).amax() <= 1e-9 * scale).then_some(t);
        }
    }
    None
}

/// Roots of Φ_θ(x, ·) in the box V by multi-start Newton.
pub fn stationary_points(phase: &dyn PhaseFunction, x: &[f64]) -> Vec<StationaryPoint> {
    let bx = phase.theta_box();
    let m = bx.len();
    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut idx = vec![0usize; m];
    let total = SEEDS_PER_AXIS.pow(m as u32);
    for _ in 0..total {
        let seed: Vec<f64> =
            idx.iter().zip(&bx).map(|(&i, (lo, hi))| lo + (hi - lo) * (i as f64 + 0.5) / SEEDS_PER_AXIS as f64).collect();
        if let Some(t) = newton_root(phase, x, &seed, &bx) {
            if !found.iter().any(|f| f.iter().zip(&t).all(|(a, b)| (a - b).abs() < 1e-6)) {
                found.push(t);
            }
        }
        for d in (0..m).rev() {
            idx[d] += 1;
            if idx[d] < SEEDS_PER_AXIS {
                break;
            }
            idx[d] = 0;
        }
    }
    found.sort_by(|a, b| a.partial_cmp(b).unwrap());
    found
        .into_iter()
        .map(|theta| {
            let hessian = phase.hess_theta_theta(x, &theta);
            let scale = hessian.amax().max(1.0).powi(m as i32);
            let degenerate = linalg::det(&hessian).abs() < 1e-10 * scale;
            StationaryPoint { phase: phase.phase(x, &theta), theta, hessian, degenerate }
        })
        .collect()
}

/// 1/√det(−Φ_θθ) with arg det(−Φ_θθ) = −πσ₋(−Φ_θθ).
pub fn inverse_sqrt_det(neg_hessian: &DMatrix<f64>) -> Result<C64> {
    let ev = linalg::symmetric_eigenvalues(neg_hessian)?;
    let sm = linalg::sigma_minus(neg_hessian)?;
    let mag: f64 = ev.iter().map(|l| l.abs().sqrt()).product();
    Ok(C64::from_polar(1.0 / mag, PI * sm as f64 / 2.0))
}

/// Σ_θ̄ e^{iΦ(x,θ̄)/h} a(x,θ̄)/√det(−Φ_θθ).
pub fn stationary_phase_eval(phase: &dyn PhaseFunction, a: &dyn Fn(&[f64], &[f64]) -> C64, x: &[f64], h: f64) -> Result<C64> {
    check_x(phase, x, h)?;
    let mut total = C64::new(0.0, 0.0);
    for sp in stationary_points(phase, x) {
        if sp.degenerate {
            return Err(Error::Fold { theta: sp.theta });
        }
        total += C64::from_polar(1.0, sp.phase / h) * a(x, &sp.theta) * inverse_sqrt_det(&(-&sp.hessian))?;
    }
    Ok(total)
}

/// Uniform grid lo, lo + d, …, hi with `count` points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformAxis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl UniformAxis {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 2 || !(hi > lo) {
            return Err(Error::Config(format!("uniform axis needs lo < hi and at least 2 points, got [{lo}, {hi}] × {count}")));
        }
        Ok(Self { lo, hi, count })
    }
    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.count - 1) as f64
    }
    pub fn point(&self, i: usize) -> f64 {
        self.lo + self.step() * i as f64
    }
}

/// Samples on a tensor grid, last axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    pub axes: Vec<UniformAxis>,
    pub values: Vec<C64>,
}

impl SampledFunction {
    pub fn from_fn(axes: Vec<UniformAxis>, f: impl Fn(&[f64]) -> C64) -> Self {
        let total: usize = axes.iter().map(|a| a.count).product();
        let mut values = Vec::with_capacity(total);
        let mut point = vec![0.0; axes.len()];
        for flat in 0..total {
            let mut rem = flat;
            for d in (0..axes.len()).rev() {
                point[d] = axes[d].point(rem % axes[d].count);
                rem /= axes[d].count;
            }
            values.push(f(&point));
        }
        Self { axes, values }
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.axes.len()];
        for d in (0..self.axes.len().saturating_sub(1)).rev() {
            s[d] = s[d + 1] * self.axes[d + 1].count;
        }
        s
    }

    /// Largest |u| on the two end faces of `axis`, relative to max |u|.
    pub fn edge_ratio(&self, axis: usize) -> f64 {
        let peak = self.values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        if peak == 0.0 {
            return 0.0;
        }
        let stride = self.strides()[axis];
        let n = self.axes[axis].count;
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let k = (i / stride) % n;
                k == 0 || k == n - 1
            })
            .fold(0.0f64, |m, (_, v)| m.max(v.norm()))
            / peak
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FourierDirection {
    /// x_Ī → p_Ī with e^{−iπ|Ī|/4} and e^{−ipx/h}
    Forward,
    /// p_Ī → x_Ī with e^{iπ|Ī|/4} and e^{ipx/h}
    Inverse,
}

/// 1/h-Fourier transform over the listed axes by the trapezoid rule. `targets`
/// gives the output grid of each transformed axis.
pub fn h_fourier(
    u: &SampledFunction,
    transformed: &[usize],
    targets: &[UniformAxis],
    h: f64,
    direction: FourierDirection,
    window_tol: f64,
) -> Result<SampledFunction> {
    if transformed.len() != targets.len() || transformed.iter().any(|&a| a >= u.axes.len()) {
        return Err(Error::Config("one target grid per transformed axis required".into()));
    }
    if !(h > 0.0) {
        return Err(Error::Config(format!("h must be positive, got {h}")));
    }
    let sign = match direction {
        FourierDirection::Forward => -1.0,
        FourierDirection::Inverse => 1.0,
    };
    let mut cur = u.clone();
    for (&axis, target) in transformed.iter().zip(targets) {
        let estimate = cur.edge_ratio(axis);
        if estimate > window_tol {
            return Err(Error::WindowTruncation { estimate });
        }
        cur = transform_axis(&cur, axis, *target, h, sign);
    }
    Ok(cur)
}

fn transform_axis(u: &SampledFunction, axis: usize, target: UniformAxis, h: f64, sign: f64) -> SampledFunction {
    let src = u.axes[axis];
    let dx = src.step();
    let weights: Vec<f64> = (0..src.count).map(|i| if i == 0 || i == src.count - 1 { 0.5 * dx } else { dx }).collect();
    let pref = C64::from_polar((2.0 * PI * h).powf(-0.5), sign * PI / 4.0);
    let mut axes = u.axes.clone();
    axes[axis] = target;
    let stride_in = u.strides()[axis];
    let outer: usize = u.axes[..axis].iter().map(|a| a.count).product();
    let inner = stride_in;
    let mut values = vec![C64::new(0.0, 0.0); outer * target.count * inner];
    let mut terms = vec![C64::new(0.0, 0.0); src.count];
    for o in 0..outer {
        for j in 0..target.count {
            let p = target.point(j);
            let kernel: Vec<C64> = (0..src.count).map(|i| C64::from_polar(weights[i], sign * p * src.point(i) / h)).collect();
            for r in 0..inner {
                for i in 0..src.count {
                    terms[i] = kernel[i] * u.values[(o * src.count + i) * inner + r];
                }
                values[(o * target.count + j) * inner + r] = pref * linalg::pairwise_sum(&terms);
            }
        }
    }
    SampledFunction { axes, values }
}

/// Least-squares slope of log e against log h.
pub fn fitted_order(hs: &[f64], errors: &[f64]) -> f64 {
    let n = hs.len() as f64;
    let lx: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ly: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    cov / var
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::bump;

    #[test]
    fn supplied_derivatives_match() {
        for x in [-1.0, 0.3] {
            for t in [-0.7, 1.2] {
                assert!(derivative_mismatch(&AiryPhase::default(), &[x], &[t]) < 1e-6);
                assert!(derivative_mismatch(&GaussianPhase::default(), &[x], &[t]) < 1e-6);
            }
        }
    }

    #[test]
    fn airy_stationary_points() {
        let sp = stationary_points(&AiryPhase::default(), &[-1.0]);
        assert_eq!(sp.len(), 2);
        assert!((sp[0].theta[0] + 1.0).abs() < 1e-12 && (sp[1].theta[0] - 1.0).abs() < 1e-12);
        assert!((sp[0].hessian[(0, 0)] + 2.0).abs() < 1e-12 && (sp[1].hessian[(0, 0)] - 2.0).abs() < 1e-12);
        assert!(sp.iter().all(|s| !s.degenerate));
        let fold = stationary_points(&AiryPhase::default(), &[0.0]);
        assert_eq!(fold.len(), 1);
        assert!(fold[0].degenerate);
        assert!(stationary_points(&AiryPhase::default(), &[0.5]).is_empty());
    }

    #[test]
    fn gaussian_stationary_point() {
        let sp = stationary_points(&GaussianPhase::default(), &[0.7]);
        assert_eq!(sp.len(), 1);
        assert!((sp[0].theta[0] - 0.7).abs() < 1e-12);
        assert_eq!(sp[0].hessian[(0, 0)], -1.0);
    }

    #[test]
    fn fold_is_refused() {
        let one = |_: &[f64], _: &[f64]| C64::new(1.0, 0.0);
        assert!(matches!(stationary_phase_eval(&AiryPhase::default(), &one, &[0.0], 0.1), Err(Error::Fold { .. })));
    }

    #[test]
    fn zero_amplitude_vanishes() {
        let zero = |_: &[f64], _: &[f64]| C64::new(0.0, 0.0);
        let v = brute_quadrature(&AiryPhase::default(), &zero, &[-1.0], 0.1, &QuadratureSpec::default()).unwrap();
        assert_eq!(v, C64::new(0.0, 0.0));
    }

    #[test]
    fn gaussian_brute_matches_fresnel() {
        let g = GaussianPhase::default();
        let a = |x: &[f64], t: &[f64]| C64::new(bump(t[0] - x[0], 7.0, 15.0), 0.0);
        for (x, h) in [(0.3, 0.1), (-0.8, 0.05)] {
            let v = brute_quadrature(&g, &a, &[x], h, &QuadratureSpec::default()).unwrap();
            let exact = C64::from_polar(1.0, x * x / (2.0 * h));
            assert!((v - exact).norm() < 1e-6, "{v} vs {exact}");
        }
    }

    #[test]
    fn fourier_round_trip() {
        let h = 0.1;
        let ax = UniformAxis::new(-3.0, 3.0, 241).unwrap();
        let u = SampledFunction::from_fn(vec![ax], |x| C64::new((-x[0] * x[0] / (2.0 * h)).exp(), 0.0));
        let fwd = h_fourier(&u, &[0], &[ax], h, FourierDirection::Forward, 1e-10).unwrap();
        for (i, v) in fwd.values.iter().enumerate() {
            let p = ax.point(i);
            let expect = C64::from_polar((-p * p / (2.0 * h)).exp(), -PI / 4.0);
            assert!((v - expect).norm() < 1e-10);
        }
        let back = h_fourier(&fwd, &[0], &[ax], h, FourierDirection::Inverse, 1e-10).unwrap();
        for (a, b) in back.values.iter().zip(&u.values) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn fourier_linearity_and_window() {
        let h = 0.05;
        let ax = UniformAxis::new(-3.0, 3.0, 301).unwrap();
        let g = |c: f64| move |x: &[f64]| C64::new((-(x[0] - c).powi(2) / (2.0 * h)).exp(), 0.0);
        let (u1, u2) = (SampledFunction::from_fn(vec![ax], g(0.4)), SampledFunction::from_fn(vec![ax], g(-0.5)));
        let sum = SampledFunction { axes: vec![ax], values: u1.values.iter().zip(&u2.values).map(|(a, b)| a + b * 2.0).collect() };
        let f = |u: &SampledFunction| h_fourier(u, &[0], &[ax], h, FourierDirection::Forward, 1e-10).unwrap();
        let (f1, f2, fs) = (f(&u1), f(&u2), f(&sum));
        for i in 0..ax.count {
            assert!((fs.values[i] - f1.values[i] - f2.values[i] * 2.0).norm() < 1e-12);
        }
        let wide = SampledFunction::from_fn(vec![ax], |_| C64::new(1.0, 0.0));
        assert!(matches!(h_fourier(&wide, &[0], &[ax], h, FourierDirection::Forward, 1e-10), Err(Error::WindowTruncation { .. })));
    }

    #[test]
    fn order_fit() {
        let hs = [0.1, 0.05, 0.025];
        let e: Vec<f64> = hs.iter().map(|h| 3.0 * h * h).collect();
        assert!((fitted_order(&hs, &e) - 2.0).abs() < 1e-12);
    }
}
