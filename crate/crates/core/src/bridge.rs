//! From Fourier integrals with a nondegenerate phase Φ(x, θ) to the canonical
//! operator on Λ_Φ = {(x, Φ_x) : Φ_θ = 0}.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::canonical::{CanonicalInverse, StandardChart};
use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::manifold::{fd_jacobian, IndexSet, LagrangianChart, ParamDomain};
use crate::oscillatory::{brute_quadrature, stationary_points, PhaseFunction};
use crate::quadrature::QuadratureSpec;

const ON_SET_TOL: f64 = 1e-10;

/// A point of C_Φ with its lift (x, Φ_x).
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalPoint {
    pub x: Vec<f64>,
    pub theta: Vec<f64>,
    pub p: Vec<f64>,
    /// |Φ_θ|∞
    pub residual: f64,
}

impl CriticalPoint {
    pub fn new(phase: &dyn PhaseFunction, x: &[f64], theta: &[f64]) -> Result<Self> {
        let residual = phase.grad_theta(x, theta).amax();
        if residual >= ON_SET_TOL {
            return Err(Error::Precondition(format!("(x, θ) = ({x:?}, {theta:?}) is off C_Φ: |Φ_θ| = {residual:e}")));
        }
        Ok(Self { x: x.to_vec(), theta: theta.to_vec(), p: phase.grad_x(x, theta).as_slice().to_vec(), residual })
    }
}

/// [Φ_θx | Φ_θθ], m × (n + m).
pub fn theta_gradient_jacobian(phase: &dyn PhaseFunction, x: &[f64], theta: &[f64]) -> DMatrix<f64> {
    let (n, m) = (phase.n(), phase.m());
    let mut d = DMatrix::zeros(m, n + m);
    d.view_mut((0, 0), (m, n)).copy_from(&phase.hess_theta_x(x, theta));
    d.view_mut((0, n), (m, m)).copy_from(&phase.hess_theta_theta(x, theta));
    d
}

/// True iff σ_min[Φ_θx | Φ_θθ] > 1e-8; also returns σ_min.
pub fn nondegeneracy_check(phase: &dyn PhaseFunction, x: &[f64], theta: &[f64]) -> Result<(bool, f64)> {
    CriticalPoint::new(phase, x, theta)?;
    let s = linalg::min_singular_value(&theta_gradient_jacobian(phase, x, theta));
    Ok((s > 1e-8, s))
}

/// Points of C_Φ over x, lifted to Λ_Φ.
pub fn critical_set(phase: &dyn PhaseFunction, x: &[f64]) -> Vec<CriticalPoint> {
    stationary_points(phase, x).into_iter().filter_map(|sp| CriticalPoint::new(phase, x, &sp.theta).ok()).collect()
}

/// τ = Φ restricted to C_Φ.
pub fn action_on_lift(phase: &dyn PhaseFunction, cp: &CriticalPoint) -> Result<f64> {
    let r = phase.grad_theta(&cp.x, &cp.theta).amax();
    if r >= ON_SET_TOL {
        return Err(Error::Precondition(format!("point is off C_Φ: |Φ_θ| = {r:e}")));
    }
    Ok(phase.phase(&cp.x, &cp.theta))
}

/// Coordinates β ∈ ℝⁿ on C_Φ.
pub trait CriticalParametrization: Send + Sync {
    fn dim(&self) -> usize;
    fn domain(&self) -> ParamDomain;
    /// β ↦ (x, θ) ∈ C_Φ
    fn embed(&self, beta: &[f64]) -> (Vec<f64>, Vec<f64>);
    /// A retraction of a neighbourhood of C_Φ onto β; amplitudes on Λ_Φ are
    /// extended off C_Φ through it.
    fn project(&self, x: &[f64], theta: &[f64]) -> Vec<f64>;
    /// ∂(x, θ)/∂β, (n + m) × n
    fn d_embed(&self, beta: &[f64]) -> DMatrix<f64> {
        fd_jacobian(
            |b| {
                let (x, t) = self.embed(b);
                DVector::from_iterator(x.len() + t.len(), x.into_iter().chain(t))
            },
            beta,
        )
    }
}

/// Λ_Φ parametrized by C_Φ coordinates, carrying a density μ(β)dβ.
#[derive(Clone)]
pub struct LiftedChart {
    pub phase: Arc<dyn PhaseFunction>,
    pub param: Arc<dyn CriticalParametrization>,
    pub density: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    /// restriction of the parameter domain, e.g. to one sheet
    pub restriction: Option<ParamDomain>,
}

impl LiftedChart {
    pub fn new(
        phase: Arc<dyn PhaseFunction>,
        param: Arc<dyn CriticalParametrization>,
        density: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    ) -> Self {
        Self { phase, param, density, restriction: None }
    }

    pub fn restricted(&self, domain: ParamDomain) -> Self {
        Self { restriction: Some(domain), ..self.clone() }
    }

    pub fn critical_point(&self, beta: &[f64]) -> Result<CriticalPoint> {
        let (x, t) = self.param.embed(beta);
        CriticalPoint::new(self.phase.as_ref(), &x, &t)
    }

    /// τ(β) = Φ(γ(β)).
    pub fn tau(&self, beta: &[f64]) -> f64 {
        let (x, t) = self.param.embed(beta);
        self.phase.phase(&x, &t)
    }

    /// |∂_β τ − p·∂_β x|∞ by finite differences.
    pub fn action_defect(&self, beta: &[f64]) -> f64 {
        let dtau = fd_jacobian(|b| DVector::from_element(1, self.tau(b)), beta);
        let px = self.momentum(beta).transpose() * self.dposition(beta);
        (dtau - px).amax()
    }
}

impl LagrangianChart for LiftedChart {
    fn dim(&self) -> usize {
        self.param.dim()
    }
    fn domain(&self) -> ParamDomain {
        self.restriction.clone().unwrap_or_else(|| self.param.domain())
    }
    fn position(&self, a: &[f64]) -> DVector<f64> {
        DVector::from_vec(self.param.embed(a).0)
    }
    fn momentum(&self, a: &[f64]) -> DVector<f64> {
        let (x, t) = self.param.embed(a);
        self.phase.grad_x(&x, &t)
    }
    fn density(&self, a: &[f64]) -> f64 {
        (self.density)(a)
    }
    fn dposition(&self, a: &[f64]) -> DMatrix<f64> {
        let n = self.phase.n();
        self.param.d_embed(a).rows(0, n).into_owned()
    }
    fn dmomentum(&self, a: &[f64]) -> DMatrix<f64> {
        let (x, t) = self.param.embed(a);
        let (n, m) = (self.phase.n(), self.phase.m());
        let mut h = DMatrix::zeros(n, n + m);
        h.view_mut((0, 0), (n, n)).copy_from(&self.phase.hess_x_x(&x, &t));
        h.view_mut((0, n), (n, m)).copy_from(&self.phase.hess_theta_x(&x, &t).transpose());
        h * self.param.d_embed(a)
    }
    fn name(&self) -> String {
        format!("lift({})", self.phase.name())
    }
}

/// Extension of dμ off C_Φ used to evaluate F.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extension {
    /// pullback along the orthogonal projection onto C_Φ
    Orthogonal,
    /// pullback along a projection tilted by the Φ_θ directions
    Oblique,
}

/// F = (d̃μ ∧ (−dΦ_θ))/(dx ∧ dθ) on C_Φ.
pub fn density_factor(lift: &LiftedChart, beta: &[f64], extension: Extension) -> Result<f64> {
    let cp = lift.critical_point(beta)?;
    let phase = lift.phase.as_ref();
    let (n, m) = (phase.n(), phase.m());
    let dg = lift.param.d_embed(beta);
    let dphi = theta_gradient_jacobian(phase, &cp.x, &cp.theta);
    let v = match extension {
        Extension::Orthogonal => dg.clone(),
        Extension::Oblique => &dg + dphi.transpose() * DMatrix::from_element(m, n, 0.5),
    };
    let left = (v.transpose() * &dg).try_inverse().ok_or(Error::InconsistentMeasure { value: 0.0 })? * v.transpose();
    let mut full = DMatrix::zeros(n + m, n + m);
    full.view_mut((0, 0), (n, n + m)).copy_from(&left);
    full.view_mut((n, 0), (m, n + m)).copy_from(&dphi);
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let f = sign * (lift.density)(beta) * linalg::det(&full);
    if !(f.abs() >= 1e-12) {
        return Err(Error::InconsistentMeasure { value: f });
    }
    Ok(f)
}

/// √F with arg F ∈ {0, π}.
pub fn sqrt_density_factor(f: f64) -> C64 {
    if f >= 0.0 {
        C64::new(f.sqrt(), 0.0)
    } else {
        C64::new(0.0, (-f).sqrt())
    }
}

/// [[−Φ_θθ, −Φ_θx_Ī], [−Φ_x_Īθ, −Φ_x_Īx_Ī]].
pub fn bridge_block(phase: &dyn PhaseFunction, cp: &CriticalPoint, subset: &IndexSet) -> DMatrix<f64> {
    let bar = subset.complement();
    let m = phase.m();
    let k = bar.len();
    let tt = phase.hess_theta_theta(&cp.x, &cp.theta);
    let tx = linalg::select_columns(&phase.hess_theta_x(&cp.x, &cp.theta), &bar);
    let xx = linalg::select_rows(&linalg::select_columns(&phase.hess_x_x(&cp.x, &cp.theta), &bar), &bar);
    let mut b = DMatrix::zeros(m + k, m + k);
    b.view_mut((0, 0), (m, m)).copy_from(&(-tt));
    b.view_mut((0, m), (m, k)).copy_from(&(-&tx));
    b.view_mut((m, 0), (k, m)).copy_from(&(-tx.transpose()));
    b.view_mut((m, m), (k, k)).copy_from(&(-xx));
    0.5 * (&b + b.transpose())
}

/// m = −arg F/π − σ₋(block) + |Ī| with arg F ∈ {0, π}.
pub fn bridge_index(phase: &dyn PhaseFunction, f: f64, cp: &CriticalPoint, subset: &IndexSet) -> Result<i64> {
    if !(f.is_finite() && f != 0.0) {
        return Err(Error::InconsistentMeasure { value: f });
    }
    let sm = linalg::sigma_minus(&bridge_block(phase, cp, subset))? as i64;
    let arg_turns = if f >= 0.0 { 0 } else { 1 };
    Ok(-arg_turns - sm + subset.complement().len() as i64)
}

/// Φ = xθ + θ³/3 on C_Φ = {x = −θ²}, β = θ.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AiryParametrization;

impl CriticalParametrization for AiryParametrization {
    fn dim(&self) -> usize {
        1
    }
    fn domain(&self) -> ParamDomain {
        ParamDomain::new(vec![crate::manifold::ParamAxis::real_line()])
    }
    fn embed(&self, b: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (vec![-b[0] * b[0]], vec![b[0]])
    }
    fn project(&self, _x: &[f64], t: &[f64]) -> Vec<f64> {
        t.to_vec()
    }
    fn d_embed(&self, b: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(2, 1, &[-2.0 * b[0], 1.0])
    }
}

/// Chart phase Φ(x, θ) = τ(α) − θ·X_Ī(α) + θ·x_Ī with α = α(x_I, p_Ī = θ), built
/// from a canonical chart (U, I) of a Lagrangian manifold.
#[derive(Clone)]
pub struct PhpPhase {
    chart: Arc<dyn LagrangianChart>,
    subset: IndexSet,
    eikonal: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    inverse: CanonicalInverse,
    theta_box: Vec<(f64, f64)>,
}

impl PhpPhase {
    pub fn new<T>(chart: Arc<dyn LagrangianChart>, subset: IndexSet, eikonal: T, inverse: CanonicalInverse, theta_box: Vec<(f64, f64)>) -> Result<Self>
    where
        T: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        let k = subset.complement().len();
        if k == 0 || theta_box.len() != k || subset.n() != chart.dim() {
            return Err(Error::Config("chart phase needs Ī ≠ ∅ and one θ interval per p_Ī".into()));
        }
        Ok(Self { chart, subset, eikonal: Arc::new(eikonal), inverse, theta_box })
    }

    pub fn alpha(&self, x: &[f64], theta: &[f64]) -> Option<Vec<f64>> {
        let x_i: Vec<f64> = self.subset.members().iter().map(|&i| x[i]).collect();
        (self.inverse)(&x_i, theta).ok().flatten()
    }

    pub fn subset(&self) -> &IndexSet {
        &self.subset
    }
    pub fn chart(&self) -> &Arc<dyn LagrangianChart> {
        &self.chart
    }
    pub fn inverse(&self) -> &CanonicalInverse {
        &self.inverse
    }
}

impl PhaseFunction for PhpPhase {
    fn n(&self) -> usize {
        self.subset.n()
    }
    fn m(&self) -> usize {
        self.theta_box.len()
    }
    fn phase(&self, x: &[f64], theta: &[f64]) -> f64 {
        let Some(a) = self.alpha(x, theta) else { return f64::NAN };
        let xs = self.chart.position(&a);
        let bar = self.subset.complement();
        (self.eikonal)(&a) + bar.iter().zip(theta).map(|(&i, t)| t * (x[i] - xs[i])).sum::<f64>()
    }
    fn theta_box(&self) -> Vec<(f64, f64)> {
        self.theta_box.clone()
    }
    /// (P_I(α), θ) in the x ordering.
    fn grad_x(&self, x: &[f64], theta: &[f64]) -> DVector<f64> {
        let Some(a) = self.alpha(x, theta) else { return DVector::from_element(x.len(), f64::NAN) };
        let p = self.chart.momentum(&a);
        let bar = self.subset.complement();
        DVector::from_fn(x.len(), |i, _| match bar.iter().position(|&b| b == i) {
            Some(k) => theta[k],
            None => p[i],
        })
    }
    /// x_Ī − X_Ī(α).
    fn grad_theta(&self, x: &[f64], theta: &[f64]) -> DVector<f64> {
        let bar = self.subset.complement();
        let Some(a) = self.alpha(x, theta) else { return DVector::from_element(bar.len(), f64::NAN) };
        let xs = self.chart.position(&a);
        DVector::from_iterator(bar.len(), bar.iter().map(|&i| x[i] - xs[i]))
    }
    fn name(&self) -> String {
        format!("chart-phase({})", self.chart.name())
    }
}

/// β = (x_I, θ) on the critical set of a [`PhpPhase`]; x_Ī = X_Ī(α(x_I, θ)).
#[derive(Clone)]
pub struct PhpParametrization {
    pub phase: PhpPhase,
    pub domain: ParamDomain,
}

impl PhpParametrization {
    /// μ_I = μ(α)/det ∂(x_I, p_Ī)/∂α, the density of dμ in the coordinates β.
    /// Undefined where α itself is a singular parametrization.
    pub fn density(&self, beta: &[f64]) -> f64 {
        let (x, t) = self.embed(beta);
        let Some(a) = self.phase.alpha(&x, &t) else { return f64::NAN };
        let chart = &self.phase.chart;
        let rows = crate::manifold::canonical_rows(&chart.dposition(&a), &chart.dmomentum(&a), &self.phase.subset);
        chart.density(&a) / linalg::det(&rows)
    }
}

impl CriticalParametrization for PhpParametrization {
    fn dim(&self) -> usize {
        self.phase.subset.n()
    }
    fn domain(&self) -> ParamDomain {
        self.domain.clone()
    }
    fn embed(&self, beta: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let members = self.phase.subset.members();
        let bar = self.phase.subset.complement();
        let (x_i, theta) = beta.split_at(members.len());
        let n = self.dim();
        let xs = (self.phase.inverse)(x_i, theta).ok().flatten().map(|a| self.phase.chart.position(&a));
        let x = (0..n)
            .map(|i| match members.iter().position(|&m| m == i) {
                Some(k) => x_i[k],
                None => xs.as_ref().map_or(f64::NAN, |v| v[bar[bar.iter().position(|&b| b == i).unwrap()]]),
            })
            .collect();
        (x, theta.to_vec())
    }
    fn project(&self, x: &[f64], theta: &[f64]) -> Vec<f64> {
        self.phase.subset.members().iter().map(|&i| x[i]).chain(theta.iter().copied()).collect()
    }
}

/// One canonical chart (U, I) of Λ_Φ used on the canonical-operator side.
#[derive(Clone)]
pub struct BridgePiece {
    pub subset: IndexSet,
    /// U in β coordinates
    pub domain: ParamDomain,
    /// β at which the index is computed
    pub reference: Vec<f64>,
    pub seeds: Vec<Vec<f64>>,
    pub inverse: Option<CanonicalInverse>,
    pub momentum_support: Option<Vec<(f64, f64)>>,
}

#[derive(Clone)]
pub struct EquivalenceSetup {
    pub lift: LiftedChart,
    pub pieces: Vec<BridgePiece>,
    /// cutoff in θ on the Fourier-integral side, part of the amplitude on both sides
    pub theta_cutoff: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    pub quadrature: QuadratureSpec,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceRow {
    pub h: f64,
    pub fourier: C64,
    pub canonical: C64,
    /// |difference| / max(|fourier|, |canonical|)
    pub residual: f64,
}

impl EquivalenceSetup {
    /// The standard chart of a piece, with τ from the lift and m from [`bridge_index`].
    pub fn piece_chart(&self, piece: &BridgePiece) -> Result<StandardChart> {
        let lift = Arc::new(self.lift.restricted(piece.domain.clone()));
        let cp = lift.critical_point(&piece.reference)?;
        let f = density_factor(&lift, &piece.reference, Extension::Orthogonal)?;
        let m = bridge_index(lift.phase.as_ref(), f, &cp, &piece.subset)?;
        let tau_lift = lift.clone();
        let mut chart = StandardChart::new(lift, piece.subset.clone(), move |b: &[f64]| tau_lift.tau(b), m)?
            .with_seeds(piece.seeds.clone())
            .with_quadrature(self.quadrature);
        if let Some(inv) = &piece.inverse {
            chart = chart.with_inverse(inv.clone());
        }
        if let Some(s) = &piece.momentum_support {
            chart = chart.with_momentum_support(s.clone())?;
        }
        Ok(chart)
    }
}

/// I[Φ, φ√F] against K φ over an h-sweep at one x.
pub fn equivalence_residual(
    setup: &EquivalenceSetup,
    phi: &(dyn Fn(&[f64]) -> C64 + Send + Sync),
    x: &[f64],
    hs: &[f64],
) -> Result<Vec<EquivalenceRow>> {
    if setup.pieces.is_empty() {
        return Err(Error::Coverage { deviation: 1.0 });
    }
    let lift = &setup.lift;
    let charts = setup.pieces.iter().map(|p| setup.piece_chart(p)).collect::<Result<Vec<_>>>()?;
    let fio_amp = |x: &[f64], t: &[f64]| -> C64 {
        let c = (setup.theta_cutoff)(t);
        if c == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let beta = lift.param.project(x, t);
        let v = phi(&beta);
        if v == C64::new(0.0, 0.0) {
            return v;
        }
        match density_factor(lift, &beta, Extension::Orthogonal) {
            Ok(f) => v * sqrt_density_factor(f) * c,
            Err(_) => C64::new(f64::NAN, f64::NAN),
        }
    };
    let canon_amp = |b: &[f64]| -> C64 {
        let (_, t) = lift.param.embed(b);
        phi(b) * (setup.theta_cutoff)(&t)
    };
    let mut rows = Vec::with_capacity(hs.len());
    for &h in hs {
        let fourier = brute_quadrature(lift.phase.as_ref(), &fio_amp, x, h, &setup.quadrature)?;
        let mut canonical = C64::new(0.0, 0.0);
        for chart in &charts {
            canonical += chart.evaluate_standard(&canon_amp, x, h)?;
        }
        let scale = fourier.norm().max(canonical.norm()).max(f64::MIN_POSITIVE);
        rows.push(EquivalenceRow { h, fourier, canonical, residual: (fourier - canonical).norm() / scale });
    }
    Ok(rows)
}

/// Phase of e^{iπm}·sign(J_I): equals 1 when πm is a branch of arg J_I.
pub fn index_branch_consistency(lift: &LiftedChart, beta: &[f64], subset: &IndexSet) -> Result<f64> {
    let cp = lift.critical_point(beta)?;
    let f = density_factor(lift, beta, Extension::Orthogonal)?;
    let m = bridge_index(lift.phase.as_ref(), f, &cp, subset)?;
    let j = crate::manifold::jacobian_canonical(lift, beta, subset)?;
    Ok((PI * m as f64).cos() * j.signum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillatory::AiryPhase;

    fn airy_lift() -> LiftedChart {
        LiftedChart::new(Arc::new(AiryPhase::default()), Arc::new(AiryParametrization), Arc::new(|_: &[f64]| 1.0))
    }

    #[test]
    fn airy_nondegenerate_everywhere() {
        let ph = AiryPhase::default();
        for t in [-2.0, -0.5, 0.0, 1.0] {
            let (ok, s) = nondegeneracy_check(&ph, &[-t * t], &[t]).unwrap();
            assert!(ok && s >= 1.0 - 1e-12);
        }
        assert!(matches!(nondegeneracy_check(&ph, &[1.0], &[0.0]), Err(Error::Precondition(_))));
    }

    #[test]
    fn degenerate_phase_detected() {
        struct Sq;
        impl PhaseFunction for Sq {
            fn n(&self) -> usize {
                1
            }
            fn m(&self) -> usize {
                1
            }
            fn phase(&self, x: &[f64], t: &[f64]) -> f64 {
                t[0] * t[0] * x[0]
            }
            fn theta_box(&self) -> Vec<(f64, f64)> {
                vec![(-1.0, 1.0)]
            }
        }
        let (ok, s) = nondegeneracy_check(&Sq, &[0.0], &[0.0]).unwrap();
        assert!(!ok && s < 1e-8);
    }

    #[test]
    fn airy_critical_set_and_action() {
        let ph = AiryPhase::default();
        let cs = critical_set(&ph, &[-1.0]);
        assert_eq!(cs.len(), 2);
        assert!((cs[1].p[0] - 1.0).abs() < 1e-12 && (cs[0].p[0] + 1.0).abs() < 1e-12);
        assert!((action_on_lift(&ph, &cs[1]).unwrap() + 2.0 / 3.0).abs() < 1e-12);
        assert!(critical_set(&ph, &[0.5]).is_empty());
        let lift = airy_lift();
        for b in [-1.3, 0.4, 2.0] {
            assert!(lift.action_defect(&[b]) < 1e-6);
            assert!(crate::manifold::lagrangian_defect(&lift, &[b]).unwrap() < 1e-8);
        }
    }

    #[test]
    fn airy_density_factor_and_index() {
        let lift = airy_lift();
        for b in [-1.0, 1.0, 0.3] {
            for e in [Extension::Orthogonal, Extension::Oblique] {
                assert!((density_factor(&lift, &[b], e).unwrap() - 1.0).abs() < 1e-10);
            }
        }
        let scaled = LiftedChart::new(lift.phase.clone(), lift.param.clone(), Arc::new(|_: &[f64]| 2.5));
        assert!((density_factor(&scaled, &[0.7], Extension::Orthogonal).unwrap() - 2.5).abs() < 1e-10);
        let ph = AiryPhase::default();
        let empty = IndexSet::empty(1);
        for b in [1.0, -1.0] {
            let cp = lift.critical_point(&[b]).unwrap();
            assert_eq!(bridge_index(&ph, 1.0, &cp, &empty).unwrap(), 0);
        }
        let x_chart = IndexSet::all(1);
        assert_eq!(bridge_index(&ph, 1.0, &lift.critical_point(&[1.0]).unwrap(), &x_chart).unwrap(), -1);
        assert_eq!(bridge_index(&ph, 1.0, &lift.critical_point(&[-1.0]).unwrap(), &x_chart).unwrap(), 0);
        assert_eq!(bridge_index(&ph, -1.0, &lift.critical_point(&[-1.0]).unwrap(), &x_chart).unwrap(), -1);
    }

    #[test]
    fn index_reproduces_jacobian_sign() {
        let lift = airy_lift();
        for b in [-1.5, -0.2, 0.3, 1.1] {
            assert_eq!(index_branch_consistency(&lift, &[b], &IndexSet::all(1)).unwrap(), 1.0);
            assert_eq!(index_branch_consistency(&lift, &[b], &IndexSet::empty(1)).unwrap(), 1.0);
        }
    }

    #[test]
    fn zero_amplitude_gives_zero_residual_sides() {
        let lift = airy_lift();
        let piece = BridgePiece {
            subset: IndexSet::all(1),
            domain: ParamDomain::new(vec![crate::manifold::ParamAxis::interval(0.01, 4.0)]),
            reference: vec![1.0],
            seeds: vec![vec![1.5]],
            inverse: None,
            momentum_support: None,
        };
        let setup = EquivalenceSetup { lift, pieces: vec![piece], theta_cutoff: Arc::new(|_: &[f64]| 1.0), quadrature: QuadratureSpec::default() };
        let rows = equivalence_residual(&setup, &|_: &[f64]| C64::new(0.0, 0.0), &[-1.0], &[0.1]).unwrap();
        assert_eq!(rows[0].fourier, C64::new(0.0, 0.0));
        assert_eq!(rows[0].canonical, C64::new(0.0, 0.0));
    }
}
