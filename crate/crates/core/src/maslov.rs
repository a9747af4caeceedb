//! Maslov indices by continuous argument tracking of regularized Jacobians.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::manifold::{jacobian, jacobian_eps, IndexSet, LagrangianChart, ManifoldPath};

pub use crate::linalg::sigma_minus;

/// ε values used for the ε → 0 limit.
pub const EPS_SCHEDULE: [f64; 4] = [0.3, 0.1, 0.03, 0.01];
const ZERO_GUARD: f64 = 1e-12;
const MAX_SAMPLES: usize = 1 << 16;
const INITIAL_SAMPLES: usize = 16;
const ROUNDING: f64 = 0.1;
const REGULAR_ENDPOINT: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct ArgTrace {
    pub samples: Vec<(f64, C64)>,
    pub unwrapped_arg: Vec<f64>,
    pub total_variation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndexResult {
    /// nearest integer to `raw`
    pub value: i64,
    pub raw: f64,
    pub eps_sequence: Vec<(f64, f64)>,
}

impl IndexResult {
    fn from_raw(raw: f64, eps_sequence: Vec<(f64, f64)>) -> Self {
        Self { value: raw.round() as i64, raw, eps_sequence }
    }

    pub fn integer(value: i64) -> Self {
        Self { value, raw: value as f64, eps_sequence: Vec::new() }
    }

    pub fn is_integral(&self) -> bool {
        (self.raw - self.value as f64).abs() < ROUNDING
    }

    /// The value entering e^{-iπm/2}: `raw` snapped to the nearest half-integer
    /// when within rounding tolerance, else `raw` itself.
    pub fn effective(&self) -> f64 {
        let half = (2.0 * self.raw).round() / 2.0;
        if (self.raw - half).abs() < ROUNDING {
            half
        } else {
            self.raw
        }
    }
}

fn principal_step(a: C64, b: C64) -> f64 {
    (b / a).arg()
}

struct Tracer<'a, F: Fn(f64) -> Result<C64>> {
    f: &'a F,
    samples: Vec<(f64, C64)>,
}

impl<F: Fn(f64) -> Result<C64>> Tracer<'_, F> {
    fn eval(&self, t: f64) -> Result<C64> {
        let z = (self.f)(t)?;
        if !(z.norm() > ZERO_GUARD) {
            return Err(Error::RegularizationNeeded { t });
        }
        Ok(z)
    }

    // Appends accepted samples on (t0, t1]; z0 is already recorded.
    fn refine(&mut self, t0: f64, z0: C64, t1: f64, z1: C64) -> Result<()> {
        let mut stack = vec![(t1, z1)];
        let (mut ta, mut za) = (t0, z0);
        while let Some(&(tb, zb)) = stack.last() {
            if self.samples.len() + stack.len() > MAX_SAMPLES || tb - ta < 1e-13 {
                return Err(Error::Nonconvergence {
                    context: "maslov_index",
                    detail: format!("argument refinement exhausted near t = {ta}"),
                });
            }
            let tm = 0.5 * (ta + tb);
            let zm = self.eval(tm)?;
            let whole = principal_step(za, zb);
            let left = principal_step(za, zm);
            let right = principal_step(zm, zb);
            // the modulus bound keeps fast turns near a small |J| from aliasing
            let close = |u: C64, v: C64| (v - u).norm() <= 0.5 * u.norm().min(v.norm());
            let ok = whole.abs() < PI / 4.0 && (left + right - whole).abs() < 1e-9 && close(za, zm) && close(zm, zb);
            if ok {
                self.samples.push((tm, zm));
                self.samples.push((tb, zb));
                stack.pop();
                ta = tb;
                za = zb;
            } else {
                stack.push((tm, zm));
            }
        }
        Ok(())
    }
}

/// Continuous argument of `f` on [0, 1] by adaptive bisection.
pub fn trace_argument<F>(f: F) -> Result<ArgTrace>
where
    F: Fn(f64) -> Result<C64>,
{
    let mut tracer = Tracer { f: &f, samples: Vec::new() };
    let z0 = tracer.eval(0.0)?;
    tracer.samples.push((0.0, z0));
    let mut prev = (0.0, z0);
    for i in 1..=INITIAL_SAMPLES {
        let t = i as f64 / INITIAL_SAMPLES as f64;
        let z = tracer.eval(t)?;
        tracer.refine(prev.0, prev.1, t, z)?;
        prev = (t, z);
    }
    let mut unwrapped = Vec::with_capacity(tracer.samples.len());
    let mut acc = tracer.samples[0].1.arg();
    unwrapped.push(acc);
    for w in tracer.samples.windows(2) {
        acc += principal_step(w[0].1, w[1].1);
        unwrapped.push(acc);
    }
    let total_variation = acc - unwrapped[0];
    Ok(ArgTrace { samples: tracer.samples, unwrapped_arg: unwrapped, total_variation })
}

/// (1/π)·(variation of arg jfun along the path).
pub fn arg_variation<F>(path: &ManifoldPath, jfun: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<C64>,
{
    Ok(trace_argument(|t| jfun(&path.at(t)))?.total_variation / PI)
}

fn check_regular_endpoints(chart: &(impl LagrangianChart + ?Sized), path: &ManifoldPath) -> Result<()> {
    for (which, t) in [("start", 0.0), ("end", 1.0)] {
        if jacobian(chart, &path.at(t))?.abs() < REGULAR_ENDPOINT {
            return Err(Error::InvalidEndpoint { which });
        }
    }
    Ok(())
}

fn extrapolate(seq: &[(f64, f64)]) -> f64 {
    let (e1, r1) = seq[seq.len() - 2];
    let (e2, r2) = seq[seq.len() - 1];
    r2 - e2 * (r1 - r2) / (e1 - e2)
}

/// ind γ as the ε → 0 limit of the argument variation of J^ε.
pub fn path_index(chart: &(impl LagrangianChart + ?Sized), path: &ManifoldPath) -> Result<IndexResult> {
    check_regular_endpoints(chart, path)?;
    let mut seq = Vec::with_capacity(EPS_SCHEDULE.len());
    for &eps in &EPS_SCHEDULE {
        seq.push((eps, arg_variation(path, |a| jacobian_eps(chart, a, eps))?));
    }
    let raw = extrapolate(&seq);
    let res = IndexResult::from_raw(raw, seq);
    let last_two_stable = res.eps_sequence[2].1.round() == res.eps_sequence[3].1.round();
    if !res.is_integral() || !last_two_stable || res.eps_sequence[3].1.round() as i64 != res.value {
        return Err(Error::IndexInconsistent { raw });
    }
    Ok(res)
}

/// Index of a closed path; the argument variation of J^ε does not depend on ε.
pub fn cycle_index(chart: &(impl LagrangianChart + ?Sized), cycle: &ManifoldPath) -> Result<IndexResult> {
    let mut seq = Vec::new();
    for eps in [1.0, 0.1, 0.01] {
        seq.push((eps, arg_variation(cycle, |a| jacobian_eps(chart, a, eps))?));
    }
    let raw = seq[seq.len() - 1].1;
    let spread = seq.iter().map(|(_, r)| (r - raw).abs()).fold(0.0, f64::max);
    let res = IndexResult::from_raw(raw, seq);
    if spread > 1e-6 || !res.is_integral() {
        return Err(Error::IndexInconsistent { raw });
    }
    Ok(res)
}

/// det of the matrix whose rows j ∈ I are `a_i`·dX_j + `b_i`·dP_j and whose rows j ∈ Ī
/// are `a_c`·dX_j + `b_c`·dP_j, divided by μ.
fn mixed_det(
    chart: &(impl LagrangianChart + ?Sized),
    alpha: &[f64],
    subset: &IndexSet,
    (a_i, b_i): (C64, C64),
    (a_c, b_c): (C64, C64),
) -> Result<C64> {
    let dx = chart.dposition(alpha);
    let dp = chart.dmomentum(alpha);
    let mu = chart.density(alpha);
    if mu == 0.0 {
        return Err(Error::InvalidMeasure { point: alpha.to_vec() });
    }
    let n = dx.nrows();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let (a, b) = if subset.contains(i) { (a_i, b_i) } else { (a_c, b_c) };
        a * dx[(i, j)] + b * dp[(i, j)]
    });
    Ok(linalg::det_c(&m) / mu)
}

/// Schedule functions of the focal-endpoint formula: (ε/ε₀, θ, ϰ).
pub fn schedule(t: f64) -> (f64, f64, f64) {
    ((PI * t).sin(), (0.5 * PI * t).cos().powi(2), (0.5 * PI * t).sin().powi(2))
}

fn check_schedule() -> Result<()> {
    let (e0, th0, k0) = schedule(0.0);
    let (e1, th1, k1) = schedule(1.0);
    let ok = e0.abs() < 1e-15 && e1.abs() < 1e-15 && (th0 - 1.0).abs() < 1e-15 && th1.abs() < 1e-15 && k0.abs() < 1e-15 && (k1 - 1.0).abs() < 1e-15;
    if ok {
        Ok(())
    } else {
        Err(Error::Config("schedule functions violate boundary conditions".into()))
    }
}

/// Index m_{(U,I)} of a canonical chart, via a path from the central point to α* ∈ U.
pub fn chart_index(chart: &(impl LagrangianChart + ?Sized), path: &ManifoldPath, subset: &IndexSet) -> Result<IndexResult> {
    let a0 = path.start();
    if !(jacobian(chart, &a0)? > REGULAR_ENDPOINT) {
        return Err(Error::InvalidEndpoint { which: "start" });
    }
    let a_star = path.end();
    if jacobian(chart, &a_star)?.abs() > 1e-8 {
        chart_index_regular(chart, path, subset)
    } else {
        chart_index_focal(chart, path, subset)
    }
}

/// Regular α*: ind γ + (1/π)[arg]_{θ=0}^{1} + |Ī|/2.
pub fn chart_index_regular(chart: &(impl LagrangianChart + ?Sized), path: &ManifoldPath, subset: &IndexSet) -> Result<IndexResult> {
    let ind = path_index(chart, path)?;
    let a_star = path.end();
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let homotopy = trace_argument(|th| mixed_det(chart, &a_star, subset, (one, zero), (C64::new(1.0 - th, 0.0), C64::new(0.0, -th))))?;
    let nbar = subset.complement().len() as f64;
    let raw = ind.value as f64 + homotopy.total_variation / PI + 0.5 * nbar;
    let res = IndexResult::from_raw(raw, ind.eps_sequence);
    if !res.is_integral() {
        return Err(Error::IndexInconsistent { raw });
    }
    Ok(res)
}

/// Focal α*: variation along γ of the scheduled mixed determinant, + |Ī|/2.
pub fn chart_index_focal(chart: &(impl LagrangianChart + ?Sized), path: &ManifoldPath, subset: &IndexSet) -> Result<IndexResult> {
    check_schedule()?;
    let nbar = subset.complement().len() as f64;
    let mut seq = Vec::new();
    for &eps0 in &EPS_SCHEDULE {
        let var = arg_variation_t(path, |t, a| {
            let (e, th, ka) = schedule(t);
            mixed_det(chart, a, subset, (C64::new(1.0, 0.0), C64::new(0.0, -eps0 * e)), (C64::new(th, 0.0), C64::new(0.0, -ka)))
        })?;
        seq.push((eps0, var + 0.5 * nbar));
    }
    let raw = seq[seq.len() - 1].1;
    let res = IndexResult::from_raw(raw, seq);
    let spread = res.eps_sequence.iter().map(|(_, r)| (r - raw).abs()).fold(0.0, f64::max);
    if !res.is_integral() || spread > ROUNDING {
        return Err(Error::IndexInconsistent { raw });
    }
    Ok(res)
}

fn arg_variation_t<F>(path: &ManifoldPath, f: F) -> Result<f64>
where
    F: Fn(f64, &[f64]) -> Result<C64>,
{
    Ok(trace_argument(|t| f(t, &path.at(t)))?.total_variation / PI)
}

/// Arguments of the eigenvalues of `a`, each required to lie in [-π/2, π/2], and their sum.
pub fn eigen_arg_sum(a: &DMatrix<C64>) -> Result<(Vec<f64>, f64)> {
    let ev = linalg::complex_eigenvalues(a);
    let mut args = Vec::with_capacity(ev.len());
    for l in ev {
        if l.norm() < 1e-12 {
            return Err(Error::DegenerateChart("singular eigenvalue block".into()));
        }
        let arg = l.arg();
        if arg.abs() > 0.5 * PI + 1e-8 {
            return Err(Error::NumericalBranch { arg });
        }
        args.push(arg.clamp(-0.5 * PI, 0.5 * PI));
    }
    let sum = args.iter().sum();
    Ok((args, sum))
}

/// The (2n−k−1)-square matrix [[E − iτ_xx, −iτ_xψ″], [−iτ_ψ″x, −iτ_ψ″ψ″]].
pub fn new_chart_block(tau_hessian: &DMatrix<f64>, n: usize) -> DMatrix<C64> {
    let d = tau_hessian.nrows();
    DMatrix::from_fn(d, d, |i, j| {
        let e = if i == j && i < n { 1.0 } else { 0.0 };
        C64::new(e, -tau_hessian[(i, j)])
    })
}

/// Index m_U of a new singular chart. `tau_hessian` is the Hessian of τ(x, ψ″) at
/// (x*, ψ″*), ordered (x, ψ″); the path runs from the central point to α*.
pub fn new_chart_index(chart: &(impl LagrangianChart + ?Sized), path: &ManifoldPath, tau_hessian: &DMatrix<f64>) -> Result<IndexResult> {
    let n = chart.dim();
    let a0 = path.start();
    if !(jacobian(chart, &a0)? > REGULAR_ENDPOINT) {
        return Err(Error::InvalidEndpoint { which: "start" });
    }
    let at_start = trace_argument(|e| jacobian_eps(chart, &a0, e))?.total_variation;
    let along = trace_argument(|t| jacobian_eps(chart, &path.at(t), 1.0))?.total_variation;
    let block = new_chart_block(tau_hessian, n);
    if linalg::det_c(&block).norm() < 1e-12 {
        return Err(Error::DegenerateChart("eigenvalue block is singular".into()));
    }
    let (_, sum) = eigen_arg_sum(&block)?;
    let raw = (at_start + along - sum) / PI;
    Ok(IndexResult::from_raw(raw, vec![(1.0, raw)]))
}
