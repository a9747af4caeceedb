//! Parametrized Lagrangian manifolds with a measure, and the Jacobians of
//! their projections.
//!
//! A chart supplies X(α), P(α), the density μ(α) of dμ = μ dα, and
//! optionally analytic first derivatives. Matrices of derivatives store
//! ∂/∂α_j in column j.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamAxis {
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
}

impl ParamAxis {
    pub fn interval(lo: f64, hi: f64) -> Self {
        Self { lo, hi, periodic: false }
    }
    pub fn real_line() -> Self {
        Self { lo: f64::NEG_INFINITY, hi: f64::INFINITY, periodic: false }
    }
    pub fn circle(period_start: f64, period_end: f64) -> Self {
        Self { lo: period_start, hi: period_end, periodic: true }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamDomain {
    pub axes: Vec<ParamAxis>,
}

impl ParamDomain {
    pub fn new(axes: Vec<ParamAxis>) -> Self {
        Self { axes }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn contains(&self, a: &[f64]) -> bool {
        a.len() == self.axes.len()
            && a.iter().zip(&self.axes).all(|(v, ax)| v.is_finite() && (ax.periodic || (*v >= ax.lo && *v <= ax.hi)))
    }

    pub fn check(&self, a: &[f64]) -> Result<()> {
        if a.len() != self.axes.len() {
            return Err(Error::Dimension { expected: self.axes.len(), got: a.len() });
        }
        if !self.contains(a) {
            return Err(Error::Domain { point: a.to_vec() });
        }
        Ok(())
    }

    /// Reduce periodic coordinates into their fundamental interval.
    pub fn wrap(&self, a: &mut [f64]) {
        for (v, ax) in a.iter_mut().zip(&self.axes) {
            if ax.periodic {
                let len = ax.hi - ax.lo;
                *v = ax.lo + (*v - ax.lo).rem_euclid(len);
            }
        }
    }
}

/// Which coordinates are x-coordinates in a canonical chart (x_I, p_Ī).
/// Indices are zero-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSet {
    n: usize,
    members: Vec<usize>,
}

impl IndexSet {
    pub fn new(n: usize, members: &[usize]) -> Result<Self> {
        let mut m = members.to_vec();
        m.sort_unstable();
        m.dedup();
        if m.len() != members.len() || m.iter().any(|&i| i >= n) {
            return Err(Error::Config(format!("invalid index subset {members:?} for n = {n}")));
        }
        Ok(Self { n, members: m })
    }

    /// Subset given with the usual 1-based labels.
    pub fn one_based(n: usize, labels: &[usize]) -> Result<Self> {
        if labels.contains(&0) {
            return Err(Error::Config("labels are 1-based".into()));
        }
        Self::new(n, &labels.iter().map(|l| l - 1).collect::<Vec<_>>())
    }

    pub fn all(n: usize) -> Self {
        Self { n, members: (0..n).collect() }
    }

    pub fn empty(n: usize) -> Self {
        Self { n, members: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn complement(&self) -> Vec<usize> {
        (0..self.n).filter(|i| !self.members.contains(i)).collect()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.contains(&i)
    }
}

/// Central finite-difference Jacobian, step 1e-5·max(1, |α_j|).
pub fn fd_jacobian<F>(f: F, a: &[f64]) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> DVector<f64>,
{
    let f0 = f(a);
    let mut jac = DMatrix::zeros(f0.len(), a.len());
    let mut b = a.to_vec();
    for j in 0..a.len() {
        let step = 1e-5 * a[j].abs().max(1.0);
        b[j] = a[j] + step;
        let fp = f(&b);
        b[j] = a[j] - step;
        let fm = f(&b);
        b[j] = a[j];
        jac.set_column(j, &((fp - fm) / (2.0 * step)));
    }
    jac
}

pub trait LagrangianChart: Send + Sync {
    fn dim(&self) -> usize;
    fn domain(&self) -> ParamDomain;
    fn position(&self, a: &[f64]) -> DVector<f64>;
    fn momentum(&self, a: &[f64]) -> DVector<f64>;
    fn density(&self, a: &[f64]) -> f64;

    fn dposition(&self, a: &[f64]) -> DMatrix<f64> {
        fd_jacobian(|b| self.position(b), a)
    }

    fn dmomentum(&self, a: &[f64]) -> DMatrix<f64> {
        fd_jacobian(|b| self.momentum(b), a)
    }

    fn name(&self) -> String {
        "chart".into()
    }
}

/// A chart whose first coordinate is the action τ, with dτ = P dX.
pub trait EikonalChart: LagrangianChart {
    /// Action at τ = 0 relative to the central point.
    fn tau_offset(&self) -> f64 {
        0.0
    }
}

impl<T: LagrangianChart + ?Sized> LagrangianChart for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn domain(&self) -> ParamDomain {
        (**self).domain()
    }
    fn position(&self, a: &[f64]) -> DVector<f64> {
        (**self).position(a)
    }
    fn momentum(&self, a: &[f64]) -> DVector<f64> {
        (**self).momentum(a)
    }
    fn density(&self, a: &[f64]) -> f64 {
        (**self).density(a)
    }
    fn dposition(&self, a: &[f64]) -> DMatrix<f64> {
        (**self).dposition(a)
    }
    fn dmomentum(&self, a: &[f64]) -> DMatrix<f64> {
        (**self).dmomentum(a)
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

impl<T: EikonalChart + ?Sized> EikonalChart for Arc<T> {
    fn tau_offset(&self) -> f64 {
        (**self).tau_offset()
    }
}

type VecMap = Arc<dyn Fn(&[f64]) -> DVector<f64> + Send + Sync>;

/// Chart given by closures; derivatives by finite differences.
#[derive(Clone)]
pub struct FnChart {
    pub domain: ParamDomain,
    pub x: VecMap,
    pub p: VecMap,
    pub mu: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    pub label: String,
    /// eikonal offset, meaningful only when the first coordinate is τ
    pub offset: f64,
}

impl FnChart {
    pub fn new<X, P, M>(domain: ParamDomain, x: X, p: P, mu: M) -> Self
    where
        X: Fn(&[f64]) -> DVector<f64> + Send + Sync + 'static,
        P: Fn(&[f64]) -> DVector<f64> + Send + Sync + 'static,
        M: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self { domain, x: Arc::new(x), p: Arc::new(p), mu: Arc::new(mu), label: "fn-chart".into(), offset: 0.0 }
    }
}

impl LagrangianChart for FnChart {
    fn dim(&self) -> usize {
        self.domain.dim()
    }
    fn domain(&self) -> ParamDomain {
        self.domain.clone()
    }
    fn position(&self, a: &[f64]) -> DVector<f64> {
        (self.x)(a)
    }
    fn momentum(&self, a: &[f64]) -> DVector<f64> {
        (self.p)(a)
    }
    fn density(&self, a: &[f64]) -> f64 {
        (self.mu)(a)
    }
    fn name(&self) -> String {
        self.label.clone()
    }
}

impl EikonalChart for FnChart {
    fn tau_offset(&self) -> f64 {
        self.offset
    }
}

fn checked_density(chart: &(impl LagrangianChart + ?Sized), a: &[f64]) -> Result<f64> {
    let mu = chart.density(a);
    if mu == 0.0 || !mu.is_finite() {
        return Err(Error::InvalidMeasure { point: a.to_vec() });
    }
    Ok(mu)
}

/// Max-norm of the antisymmetric part of dPᵀ dX.
pub fn lagrangian_defect(chart: &(impl LagrangianChart + ?Sized), a: &[f64]) -> Result<f64> {
    chart.domain().check(a)?;
    let s = chart.dmomentum(a).transpose() * chart.dposition(a);
    Ok(((&s - s.transpose()) * 0.5).amax())
}

/// Residuals of ⟨P, X_τ⟩ = 1, ⟨P, X_ψ⟩ = 0 and the symmetry relations.
pub fn eikonal_defect(chart: &(impl EikonalChart + ?Sized), a: &[f64]) -> Result<f64> {
    let form = pdx_form(chart, a)?;
    let mut defect = (form[0] - 1.0).abs();
    for j in 1..form.len() {
        defect = defect.max(form[j].abs());
    }
    Ok(defect.max(lagrangian_defect(chart, a)?))
}

/// Components ⟨P, X_{α_j}⟩ of the form P dX in the chart coordinates.
pub fn pdx_form(chart: &(impl LagrangianChart + ?Sized), a: &[f64]) -> Result<DVector<f64>> {
    chart.domain().check(a)?;
    Ok(chart.dposition(a).transpose() * chart.momentum(a))
}

/// J^ε = det ∂(X − iεP)/∂α / μ.
pub fn jacobian_eps(chart: &(impl LagrangianChart + ?Sized), a: &[f64], eps: f64) -> Result<C64> {
    chart.domain().check(a)?;
    let mu = checked_density(chart, a)?;
    let dx = chart.dposition(a);
    let dp = chart.dmomentum(a);
    let m = DMatrix::from_fn(dx.nrows(), dx.ncols(), |i, j| C64::new(dx[(i, j)], -eps * dp[(i, j)]));
    Ok(linalg::det_c(&m) / mu)
}

/// Real Jacobian det(∂X/∂α)/μ.
pub fn jacobian(chart: &(impl LagrangianChart + ?Sized), a: &[f64]) -> Result<f64> {
    chart.domain().check(a)?;
    let mu = checked_density(chart, a)?;
    Ok(linalg::det(&chart.dposition(a)) / mu)
}

/// Rows of ∂(X_I, P_Ī)/∂α in ascending coordinate order.
pub fn canonical_rows(dx: &DMatrix<f64>, dp: &DMatrix<f64>, subset: &IndexSet) -> DMatrix<f64> {
    DMatrix::from_fn(dx.nrows(), dx.ncols(), |i, j| if subset.contains(i) { dx[(i, j)] } else { dp[(i, j)] })
}

/// J_I = det ∂(X_I, P_Ī)/∂α / μ.
pub fn jacobian_canonical(chart: &(impl LagrangianChart + ?Sized), a: &[f64], subset: &IndexSet) -> Result<f64> {
    chart.domain().check(a)?;
    let mu = checked_density(chart, a)?;
    let rows = canonical_rows(&chart.dposition(a), &chart.dmomentum(a), subset);
    Ok(linalg::det(&rows) / mu)
}

/// |J| in eikonal coordinates: √det(X_ψᵀX_ψ) / (|μ| |P|).
pub fn jacobian_eikonal_abs(chart: &(impl EikonalChart + ?Sized), a: &[f64]) -> Result<f64> {
    chart.domain().check(a)?;
    let mu = checked_density(chart, a)?;
    let pn = chart.momentum(a).norm();
    if pn < 1e-14 {
        return Err(Error::ConditionViolated { norm: pn });
    }
    let n = chart.dim();
    let cols: Vec<usize> = (1..n).collect();
    let g = linalg::gram(&linalg::select_columns(&chart.dposition(a), &cols));
    Ok(linalg::det(&g).max(0.0).sqrt() / (mu.abs() * pn))
}

/// Gram matrix of the columns X_{α_j}, j ∈ cols.
pub fn gram(chart: &(impl LagrangianChart + ?Sized), a: &[f64], cols: &[usize]) -> Result<DMatrix<f64>> {
    chart.domain().check(a)?;
    if cols.iter().any(|&c| c >= chart.dim()) {
        return Err(Error::Config(format!("column subset {cols:?} out of range")));
    }
    Ok(linalg::gram(&linalg::select_columns(&chart.dposition(a), cols)))
}

/// Largest relative discrepancy between the chart's derivatives and central differences.
pub fn derivative_discrepancy(chart: &(impl LagrangianChart + ?Sized), a: &[f64]) -> Result<f64> {
    chart.domain().check(a)?;
    let fx = fd_jacobian(|b| chart.position(b), a);
    let fp = fd_jacobian(|b| chart.momentum(b), a);
    let ex = (chart.dposition(a) - &fx).amax() / fx.amax().max(1.0);
    let ep = (chart.dmomentum(a) - &fp).amax() / fp.amax().max(1.0);
    Ok(ex.max(ep))
}

/// Product of a chart with the line {p_{n+1} = 1}; the new coordinate is x_{n+1}.
#[derive(Clone)]
pub struct Uniformized {
    pub base: Arc<dyn LagrangianChart>,
}

pub fn uniformize(chart: Arc<dyn LagrangianChart>) -> Uniformized {
    Uniformized { base: chart }
}

impl LagrangianChart for Uniformized {
    fn dim(&self) -> usize {
        self.base.dim() + 1
    }
    fn domain(&self) -> ParamDomain {
        let mut d = self.base.domain();
        d.axes.push(ParamAxis::real_line());
        d
    }
    fn position(&self, a: &[f64]) -> DVector<f64> {
        let n = self.base.dim();
        let x = self.base.position(&a[..n]);
        DVector::from_fn(n + 1, |i, _| if i < n { x[i] } else { a[n] })
    }
    fn momentum(&self, a: &[f64]) -> DVector<f64> {
        let n = self.base.dim();
        let p = self.base.momentum(&a[..n]);
        DVector::from_fn(n + 1, |i, _| if i < n { p[i] } else { 1.0 })
    }
    fn density(&self, a: &[f64]) -> f64 {
        self.base.density(&a[..self.base.dim()])
    }
    fn dposition(&self, a: &[f64]) -> DMatrix<f64> {
        let n = self.base.dim();
        let d = self.base.dposition(&a[..n]);
        let mut out = DMatrix::zeros(n + 1, n + 1);
        out.view_mut((0, 0), (n, n)).copy_from(&d);
        out[(n, n)] = 1.0;
        out
    }
    fn dmomentum(&self, a: &[f64]) -> DMatrix<f64> {
        let n = self.base.dim();
        let d = self.base.dmomentum(&a[..n]);
        let mut out = DMatrix::zeros(n + 1, n + 1);
        out.view_mut((0, 0), (n, n)).copy_from(&d);
        out
    }
    fn name(&self) -> String {
        format!("uniformized({})", self.base.name())
    }
}

/// Piecewise-smooth path γ: [0,1] → parameter space.
#[derive(Clone)]
pub struct ManifoldPath {
    gamma: Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>,
}

impl std::fmt::Debug for ManifoldPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ManifoldPath({:?} -> {:?})", self.start(), self.end())
    }
}

impl ManifoldPath {
    pub fn new<F>(gamma: F) -> Self
    where
        F: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        Self { gamma: Arc::new(gamma) }
    }

    pub fn constant(p: Vec<f64>) -> Self {
        Self::new(move |_| p.clone())
    }

    pub fn segment(a: Vec<f64>, b: Vec<f64>) -> Self {
        Self::new(move |t| a.iter().zip(&b).map(|(u, v)| u + t * (v - u)).collect())
    }

    /// Uniform-in-t polyline through the given vertices.
    pub fn polyline(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Config("polyline needs at least one vertex".into()));
        }
        if points.len() == 1 {
            return Ok(Self::constant(points[0].clone()));
        }
        let segs = points.len() - 1;
        Ok(Self::new(move |t| {
            let s = (t.clamp(0.0, 1.0) * segs as f64).min(segs as f64 - 1e-300);
            let i = (s.floor() as usize).min(segs - 1);
            let u = s - i as f64;
            points[i].iter().zip(&points[i + 1]).map(|(a, b)| a + u * (b - a)).collect()
        }))
    }

    pub fn at(&self, t: f64) -> Vec<f64> {
        (self.gamma)(t)
    }

    pub fn start(&self) -> Vec<f64> {
        self.at(0.0)
    }

    pub fn end(&self) -> Vec<f64> {
        self.at(1.0)
    }

    /// γ then δ, traversed at double speed.
    pub fn concat(&self, other: &ManifoldPath) -> Self {
        let (a, b) = (self.clone(), other.clone());
        Self::new(move |t| if t <= 0.5 { a.at(2.0 * t) } else { b.at(2.0 * t - 1.0) })
    }

    pub fn reversed(&self) -> Self {
        let a = self.clone();
        Self::new(move |t| a.at(1.0 - t))
    }

    /// γ ∘ g for a monotone g with g(0) = 0, g(1) = 1.
    pub fn reparametrized<G>(&self, g: G) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let a = self.clone();
        Self::new(move |t| a.at(g(t)))
    }

    /// dγ/dt by central differences (one-sided at the ends).
    pub fn velocity(&self, t: f64) -> Vec<f64> {
        let h = 1e-6;
        let (t0, t1) = ((t - h).max(0.0), (t + h).min(1.0));
        let (a, b) = (self.at(t0), self.at(t1));
        a.iter().zip(&b).map(|(u, v)| (v - u) / (t1 - t0)).collect()
    }
}

/// Reference point of the action and the indices; J(α₀) > 0.
#[derive(Clone, Debug, PartialEq)]
pub struct CentralPoint {
    pub alpha0: Vec<f64>,
}

impl CentralPoint {
    pub fn new(chart: &(impl LagrangianChart + ?Sized), alpha0: Vec<f64>) -> Result<Self> {
        let j = jacobian(chart, &alpha0)?;
        if !(j > 1e-10) {
            return Err(Error::Config(format!("central point must have J > 0, got J = {j:e}")));
        }
        Ok(Self { alpha0 })
    }
}

/// Halton sequence point `index` (1-based is customary) in base `base`.
pub fn halton(mut index: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// Quasi-random points in a finite box.
pub fn quasi_random_points(bounds: &[(f64, f64)], count: usize) -> Vec<Vec<f64>> {
    const PRIMES: [usize; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    (1..=count)
        .map(|i| bounds.iter().enumerate().map(|(d, (lo, hi))| lo + (hi - lo) * halton(i, PRIMES[d % 8])).collect())
        .collect()
}
