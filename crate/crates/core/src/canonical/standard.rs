use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DVector;

use super::{bump, check_h, Amplitude, LocalOperator};
use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::manifold::{canonical_rows, jacobian_canonical, IndexSet, LagrangianChart};
use crate::quadrature::{integrate, QuadAxis, QuadratureSpec};

/// α(x_I, p_Ī); `Ok(None)` means the coordinates are outside the chart, where
/// the amplitude is taken to vanish.
pub type CanonicalInverse = Arc<dyn Fn(&[f64], &[f64]) -> Result<Option<Vec<f64>>> + Send + Sync>;

const INFLATION: f64 = 1.2;

/// The box inflated by 20% about its centre.
pub fn inflated_box(support: &[(f64, f64)]) -> Vec<(f64, f64)> {
    support
        .iter()
        .map(|(lo, hi)| {
            let c = 0.5 * (lo + hi);
            let w = 0.5 * (hi - lo) * INFLATION;
            (c - w, c + w)
        })
        .collect()
}

/// Product of bumps equal to 1 on the box and 0 outside the inflated box.
pub fn support_truncation(support: &[(f64, f64)], p: &[f64]) -> f64 {
    support
        .iter()
        .zip(p)
        .map(|((lo, hi), v)| {
            let c = 0.5 * (lo + hi);
            let w = 0.5 * (hi - lo);
            bump(v - c, w, w * INFLATION)
        })
        .product()
}

/// Classical canonical chart (U, I) with coordinates (x_I, p_Ī).
#[derive(Clone)]
pub struct StandardChart {
    chart: Arc<dyn LagrangianChart>,
    subset: IndexSet,
    eikonal: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    tau0: f64,
    index: i64,
    momentum_support: Vec<(f64, f64)>,
    inverse: Option<CanonicalInverse>,
    seeds: Vec<Vec<f64>>,
    quadrature: QuadratureSpec,
    reference_quarter_turns: i32,
}

impl StandardChart {
    /// `eikonal` is τ_{(U,I)} as a function of α; `index` is m_{(U,I)}.
    pub fn new<T>(chart: Arc<dyn LagrangianChart>, subset: IndexSet, eikonal: T, index: i64) -> Result<Self>
    where
        T: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if subset.n() != chart.dim() {
            return Err(Error::Dimension { expected: chart.dim(), got: subset.n() });
        }
        let nbar = subset.complement().len();
        Ok(Self {
            chart,
            subset,
            eikonal: Arc::new(eikonal),
            tau0: 0.0,
            index,
            momentum_support: vec![(-1.0, 1.0); nbar],
            inverse: None,
            seeds: Vec::new(),
            quadrature: QuadratureSpec::default(),
            reference_quarter_turns: 0,
        })
    }

    pub fn with_inverse(mut self, inverse: CanonicalInverse) -> Self {
        self.inverse = Some(inverse);
        self
    }
    pub fn with_seeds(mut self, seeds: Vec<Vec<f64>>) -> Self {
        self.seeds = seeds;
        self
    }
    /// Box containing the p_Ī-support of the amplitude; the integral runs over it inflated by 20%.
    pub fn with_momentum_support(mut self, support: Vec<(f64, f64)>) -> Result<Self> {
        if support.len() != self.subset.complement().len() || support.iter().any(|(lo, hi)| !(hi > lo)) {
            return Err(Error::Config("momentum support must give one nonempty interval per p_Ī coordinate".into()));
        }
        self.momentum_support = support;
        Ok(self)
    }
    pub fn with_tau0(mut self, tau0: f64) -> Self {
        self.tau0 = tau0;
        self
    }
    pub fn with_quadrature(mut self, spec: QuadratureSpec) -> Self {
        self.quadrature = spec;
        self
    }
    pub fn with_reference_quarter_turns(mut self, q: i32) -> Self {
        self.reference_quarter_turns = q;
        self
    }

    pub fn subset(&self) -> &IndexSet {
        &self.subset
    }
    pub fn index(&self) -> i64 {
        self.index
    }

    /// Integration box for p_Ī.
    pub fn momentum_box(&self) -> Vec<QuadAxis> {
        inflated_box(&self.momentum_support).into_iter().map(|(lo, hi)| QuadAxis::legendre(lo, hi)).collect()
    }

    /// Smooth truncation: 1 on the momentum support, 0 outside the inflated box.
    pub fn truncation(&self, p: &[f64]) -> f64 {
        support_truncation(&self.momentum_support, p)
    }

    /// Solves X_I(α) = x_I, P_Ī(α) = p_Ī.
    pub fn coordinates_to_alpha(&self, x_i: &[f64], p_bar: &[f64]) -> Result<Option<Vec<f64>>> {
        if let Some(inv) = &self.inverse {
            return inv(x_i, p_bar);
        }
        let members = self.subset.members().to_vec();
        let bar = self.subset.complement();
        let n = self.chart.dim();
        let domain = self.chart.domain();
        let target = DVector::from_fn(n, |i, _| {
            if let Some(k) = members.iter().position(|&m| m == i) {
                x_i[k]
            } else {
                p_bar[bar.iter().position(|&m| m == i).unwrap()]
            }
        });
        let tol = 1e-13 * (1.0 + target.amax());
        for seed in &self.seeds {
            let mut a = seed.clone();
            for _ in 0..60 {
                if !domain.contains(&a) {
                    break;
                }
                let x = self.chart.position(&a);
                let p = self.chart.momentum(&a);
                let f = DVector::from_fn(n, |i, _| if self.subset.contains(i) { x[i] } else { p[i] }) - &target;
                if f.amax() <= tol {
                    domain.wrap(&mut a);
                    return Ok(Some(a));
                }
                let rows = canonical_rows(&self.chart.dposition(&a), &self.chart.dmomentum(&a), &self.subset);
                let Some(step) = linalg::solve(&rows, &(-f)) else { break };
                for (v, s) in a.iter_mut().zip(step.iter()) {
                    *v += s;
                }
            }
        }
        Err(Error::CoordinateChart(format!("no α with (x_I, p_Ī) = ({x_i:?}, {p_bar:?})")))
    }

    fn split_x(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let x_i = self.subset.members().iter().map(|&i| x[i]).collect();
        let x_bar = self.subset.complement().iter().map(|&i| x[i]).collect();
        (x_i, x_bar)
    }

    /// e^{(i/h)(τ − p_Ī X_Ī)} a / √|J_I| at α(x_I, p_Ī), without e^{−iπm/2}.
    fn chart_term(&self, a: &dyn Amplitude, x_i: &[f64], p: &[f64], h: f64) -> Result<C64> {
        let Some(alpha) = self.coordinates_to_alpha(x_i, p)? else {
            return Ok(C64::new(0.0, 0.0));
        };
        let av = a.value(&alpha);
        if av == C64::new(0.0, 0.0) {
            return Ok(av);
        }
        let j = jacobian_canonical(self.chart.as_ref(), &alpha, &self.subset)?;
        if j.abs() < 1e-10 {
            return Err(Error::CoordinateChart(format!("J_I = {j:e} vanishes at α = {alpha:?}")));
        }
        let xs = self.chart.position(&alpha);
        let px: f64 = self.subset.complement().iter().zip(p).map(|(&i, pi)| pi * xs[i]).sum();
        let phase = ((self.eikonal)(&alpha) + self.tau0 - px) / h;
        Ok(C64::from_polar(1.0, phase) * av / j.abs().sqrt())
    }

    /// Integrand of the inverse 1/h-Fourier transform over p_Ī, without prefactors.
    pub fn integrand(&self, a: &dyn Amplitude, x: &[f64], p: &[f64], h: f64) -> Result<C64> {
        let t = self.truncation(p);
        if t == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        let (x_i, x_bar) = self.split_x(x);
        let px: f64 = p.iter().zip(&x_bar).map(|(a, b)| a * b).sum();
        Ok(C64::from_polar(t, px / h) * self.chart_term(a, &x_i, p, h)?)
    }

    /// e^{iπ|Ī|/4}(2πh)^{−|Ī|/2} e^{−iπm/2} e^{iπq/2}.
    pub fn prefactor(&self, h: f64) -> C64 {
        let nbar = self.subset.complement().len() as f64;
        let turns = nbar / 4.0 - self.index as f64 / 2.0 + self.reference_quarter_turns as f64 / 2.0;
        C64::from_polar(1.0, PI * turns) * (2.0 * PI * h).powf(-nbar / 2.0)
    }

    pub fn evaluate_standard(&self, a: &dyn Amplitude, x: &[f64], h: f64) -> Result<C64> {
        check_h(h)?;
        if x.len() != self.chart.dim() {
            return Err(Error::Dimension { expected: self.chart.dim(), got: x.len() });
        }
        let nbar = self.subset.complement().len();
        if nbar == 0 {
            return Ok(self.prefactor(h) * self.chart_term(a, x, &[], h)?);
        }
        let axes = self.momentum_box();
        let out = integrate(&axes, &self.quadrature, "canonical_operator", |p| self.integrand(a, x, p, h))?;
        Ok(self.prefactor(h) * out.value)
    }
}

impl LocalOperator for StandardChart {
    fn apply(&self, a: &dyn Amplitude, x: &[f64], h: f64) -> Result<C64> {
        self.evaluate_standard(a, x, h)
    }
}
