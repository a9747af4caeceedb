use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{check_h, periodic_offset, Amplitude, CutoffSpec, LocalOperator};
use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::manifold::{EikonalChart, ManifoldPath};
use crate::maslov::{new_chart_index, IndexResult};
use crate::quadrature::{integrate, QuadAxis, QuadOutcome, QuadratureSpec};

const NEWTON_ITERS: usize = 50;
const HESSIAN_STEP: f64 = 1e-3;

/// Partition of ψ into ψ′ (independent columns of X_ψ at the center) and ψ″.
/// Indices refer to the chart coordinates, so they lie in 1..n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsiSplit {
    pub k: usize,
    pub psi_prime: Vec<usize>,
    pub psi_second: Vec<usize>,
}

pub fn split_psi(eik: &(impl EikonalChart + ?Sized), center: &[f64]) -> Result<PsiSplit> {
    eik.domain().check(center)?;
    let n = eik.dim();
    let psi_cols: Vec<usize> = (1..n).collect();
    let x_psi = linalg::select_columns(&eik.dposition(center), &psi_cols);
    let k = linalg::numerical_rank(&x_psi, 1e-8);
    let psi_prime: Vec<usize> = linalg::pivot_columns(&x_psi, k).into_iter().map(|j| j + 1).collect();
    let psi_second = (1..n).filter(|j| !psi_prime.contains(j)).collect();
    Ok(PsiSplit { k, psi_prime, psi_second })
}

/// M = [P | X_ψ′ | P_ψ″ − P_ψ′ G⁻¹ X_ψ′ᵀ X_ψ″] and its determinant.
pub fn m_matrix(eik: &(impl EikonalChart + ?Sized), split: &PsiSplit, alpha: &[f64]) -> Result<(DMatrix<f64>, f64)> {
    let n = eik.dim();
    let p = eik.momentum(alpha);
    let dx = eik.dposition(alpha);
    let dp = eik.dmomentum(alpha);
    let x1 = linalg::select_columns(&dx, &split.psi_prime);
    let x2 = linalg::select_columns(&dx, &split.psi_second);
    let p1 = linalg::select_columns(&dp, &split.psi_prime);
    let p2 = linalg::select_columns(&dp, &split.psi_second);
    let g = linalg::gram(&x1);
    let corr = if split.k > 0 {
        let ginv = g.clone().try_inverse().ok_or(Error::LeavingW { condition: f64::INFINITY })?;
        &p2 - &p1 * ginv * x1.transpose() * &x2
    } else {
        p2
    };
    let mut m = DMatrix::zeros(n, n);
    m.set_column(0, &p);
    for j in 0..split.k {
        m.set_column(1 + j, &x1.column(j));
    }
    for j in 0..corr.ncols() {
        m.set_column(1 + split.k + j, &corr.column(j));
    }
    let det = linalg::det(&m);
    let scale: f64 = m.column_iter().map(|c| c.norm()).product();
    if !(scale > 0.0) || det.abs() < 1e-12 * scale {
        return Err(Error::DegenerateM { det });
    }
    Ok((m, det))
}

/// Specialized solver for (τ, ψ′) given (x, ψ″).
pub type Me1Solver = Arc<dyn Fn(&[f64], &[f64]) -> Result<Vec<f64>> + Send + Sync>;

#[derive(Clone)]
pub struct NewChartOptions {
    pub central_point: Vec<f64>,
    /// path from the central point to the center; straight segment if None
    pub path: Option<ManifoldPath>,
    pub cutoff: Option<CutoffSpec>,
    /// x-part of W; unrestricted if None
    pub x_box: Option<Vec<(f64, f64)>>,
    /// global phase e^{iπq/2} fixing the normalization of the operator
    pub reference_quarter_turns: i32,
    pub quadrature: QuadratureSpec,
    pub solver: Option<Me1Solver>,
    pub split: Option<PsiSplit>,
}

impl NewChartOptions {
    pub fn new(central_point: Vec<f64>) -> Self {
        Self {
            central_point,
            path: None,
            cutoff: None,
            x_box: None,
            reference_quarter_turns: 0,
            quadrature: QuadratureSpec::default(),
            solver: None,
            split: None,
        }
    }
}

enum NewtonOutcome {
    Converged(Vec<f64>),
    IllConditioned(f64),
    Failed,
}

/// Eikonal-coordinate chart around a focal point.
#[derive(Clone)]
pub struct NewSingularChart {
    eik: Arc<dyn EikonalChart>,
    center: Vec<f64>,
    split: PsiSplit,
    x_star: Vec<f64>,
    psi2_star: Vec<f64>,
    psi2_axes: Vec<QuadAxis>,
    psi2_periods: Vec<Option<f64>>,
    cutoff: CutoffSpec,
    x_box: Option<Vec<(f64, f64)>>,
    tau_hessian: DMatrix<f64>,
    index: IndexResult,
    path: ManifoldPath,
    reference_quarter_turns: i32,
    quadrature: QuadratureSpec,
    solver: Option<Me1Solver>,
}

impl std::fmt::Debug for NewSingularChart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NewSingularChart")
            .field("chart", &self.eik.name())
            .field("center", &self.center)
            .field("split", &self.split)
            .field("index", &self.index)
            .finish()
    }
}

impl NewSingularChart {
    pub fn new(eik: Arc<dyn EikonalChart>, center: Vec<f64>, opts: NewChartOptions) -> Result<Self> {
        let domain = eik.domain();
        domain.check(&center)?;
        opts.quadrature.validate()?;
        let split = match opts.split {
            Some(s) => s,
            None => split_psi(eik.as_ref(), &center)?,
        };
        let n = eik.dim();
        if split.k + 1 > n || split.psi_prime.len() != split.k || split.psi_prime.len() + split.psi_second.len() != n - 1 {
            return Err(Error::Config(format!("inconsistent ψ split {split:?}")));
        }
        let cutoff = opts.cutoff.unwrap_or_else(|| CutoffSpec::none(split.psi_second.len()));
        cutoff.validate()?;
        if cutoff.radii.len() != split.psi_second.len() {
            return Err(Error::Config("cutoff must list one entry per ψ″ coordinate".into()));
        }
        let psi2_star: Vec<f64> = split.psi_second.iter().map(|&j| center[j]).collect();
        let mut psi2_axes = Vec::new();
        let mut psi2_periods = Vec::new();
        for (slot, &j) in split.psi_second.iter().enumerate() {
            let ax = domain.axes[j];
            if ax.periodic {
                psi2_axes.push(QuadAxis::periodic(ax.lo, ax.hi));
                psi2_periods.push(Some(ax.hi - ax.lo));
            } else {
                let (lo, hi) = match cutoff.radii[slot] {
                    Some((_, s)) => ((center[j] - s).max(ax.lo), (center[j] + s).min(ax.hi)),
                    None => (ax.lo, ax.hi),
                };
                if !(lo.is_finite() && hi.is_finite()) {
                    return Err(Error::Config(format!("ψ″ coordinate {j} is unbounded and has no cutoff")));
                }
                psi2_axes.push(QuadAxis::legendre(lo, hi));
                psi2_periods.push(None);
            }
        }
        let x_star: Vec<f64> = eik.position(&center).iter().copied().collect();
        let path = opts.path.unwrap_or_else(|| ManifoldPath::segment(opts.central_point.clone(), center.clone()));
        let mut chart = Self {
            eik,
            center,
            split,
            x_star,
            psi2_star,
            psi2_axes,
            psi2_periods,
            cutoff,
            x_box: opts.x_box,
            tau_hessian: DMatrix::zeros(0, 0),
            index: IndexResult::integer(0),
            path,
            reference_quarter_turns: opts.reference_quarter_turns,
            quadrature: opts.quadrature,
            solver: opts.solver,
        };
        chart.tau_hessian = chart.compute_tau_hessian()?;
        chart.index = new_chart_index(chart.eik.as_ref(), &chart.path, &chart.tau_hessian)?;
        Ok(chart)
    }

    pub fn eikonal_chart(&self) -> &Arc<dyn EikonalChart> {
        &self.eik
    }
    pub fn center(&self) -> &[f64] {
        &self.center
    }
    pub fn split(&self) -> &PsiSplit {
        &self.split
    }
    pub fn x_star(&self) -> &[f64] {
        &self.x_star
    }
    pub fn index(&self) -> &IndexResult {
        &self.index
    }
    pub fn tau_hessian(&self) -> &DMatrix<f64> {
        &self.tau_hessian
    }
    pub fn reference_quarter_turns(&self) -> i32 {
        self.reference_quarter_turns
    }
    /// m_U − q: the index actually entering e^{−iπm/2}.
    pub fn effective_index(&self) -> f64 {
        self.index.effective() - self.reference_quarter_turns as f64
    }

    pub fn with_quadrature(mut self, spec: QuadratureSpec) -> Self {
        self.quadrature = spec;
        self
    }

    /// α from the unknowns u = (τ, ψ′) and ψ″.
    pub fn assemble(&self, u: &[f64], psi2: &[f64]) -> Vec<f64> {
        let mut a = vec![0.0; self.eik.dim()];
        a[0] = u[0];
        for (i, &j) in self.split.psi_prime.iter().enumerate() {
            a[j] = u[1 + i];
        }
        for (i, &j) in self.split.psi_second.iter().enumerate() {
            a[j] = psi2[i];
        }
        a
    }

    fn residual(&self, x: &[f64], alpha: &[f64]) -> DVector<f64> {
        let d = DVector::from_column_slice(x) - self.eik.position(alpha);
        let p = self.eik.momentum(alpha);
        let dx = self.eik.dposition(alpha);
        let mut r = DVector::zeros(self.split.k + 1);
        r[0] = p.dot(&d);
        for (i, &j) in self.split.psi_prime.iter().enumerate() {
            r[1 + i] = dx.column(j).dot(&d);
        }
        r
    }

    fn newton(&self, x: &[f64], psi2: &[f64], u0: &[f64]) -> NewtonOutcome {
        let domain = self.eik.domain();
        let xs = x.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
        let mut u = u0.to_vec();
        for _ in 0..NEWTON_ITERS {
            let alpha = self.assemble(&u, psi2);
            if !domain.contains(&alpha) {
                return NewtonOutcome::Failed;
            }
            let r = self.residual(x, &alpha);
            let scale = xs * self.eik.momentum(&alpha).norm().max(1.0);
            if r.amax() <= 1e-12 * scale {
                let mut a = alpha;
                domain.wrap(&mut a);
                let mut sol = vec![a[0]];
                sol.extend(self.split.psi_prime.iter().map(|&j| a[j]));
                return NewtonOutcome::Converged(sol);
            }
            let jac = self.residual_jacobian(x, &u, psi2);
            let cond = linalg::condition_number(&jac);
            if cond > 1e12 {
                return NewtonOutcome::IllConditioned(cond);
            }
            let Some(step) = linalg::solve(&jac, &(-&r)) else {
                return NewtonOutcome::IllConditioned(f64::INFINITY);
            };
            let rn = r.norm();
            let mut lambda = 1.0;
            let mut next = u.clone();
            for _ in 0..12 {
                next = u.iter().zip(step.iter()).map(|(a, s)| a + lambda * s).collect();
                let trial = self.assemble(&next, psi2);
                if domain.contains(&trial) && self.residual(x, &trial).norm() < rn {
                    break;
                }
                lambda *= 0.5;
            }
            u = next;
        }
        NewtonOutcome::Failed
    }

    fn residual_jacobian(&self, x: &[f64], u: &[f64], psi2: &[f64]) -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(u.len(), u.len());
        let mut v = u.to_vec();
        for j in 0..u.len() {
            let s = 1e-6 * u[j].abs().max(1.0);
            v[j] = u[j] + s;
            let rp = self.residual(x, &self.assemble(&v, psi2));
            v[j] = u[j] - s;
            let rm = self.residual(x, &self.assemble(&v, psi2));
            v[j] = u[j];
            jac.set_column(j, &((rp - rm) / (2.0 * s)));
        }
        jac
    }

    fn center_unknowns(&self) -> Vec<f64> {
        let mut u = vec![self.center[0]];
        u.extend(self.split.psi_prime.iter().map(|&j| self.center[j]));
        u
    }

    /// Solves the implicit system for (τ, ψ′) at (x, ψ″).
    pub fn solve_me1(&self, x: &[f64], psi2: &[f64], guess: Option<&[f64]>) -> Result<Vec<f64>> {
        if x.len() != self.eik.dim() || psi2.len() != self.split.psi_second.len() {
            return Err(Error::Dimension { expected: self.eik.dim(), got: x.len() });
        }
        if let Some(solver) = &self.solver {
            return solver(x, psi2);
        }
        let c = self.center_unknowns();
        let xs = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut starts: Vec<Vec<f64>> = Vec::with_capacity(8);
        if let Some(g) = guess {
            starts.push(g.to_vec());
        }
        starts.push(c.clone());
        for (dt, dp) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 0.5), (0.0, -0.5), (2.0, 0.5), (-2.0, -0.5), (3.0, 1.0)] {
            if starts.len() >= 8 {
                break;
            }
            let mut s = c.clone();
            s[0] += dt * (1.0 + xs);
            for v in s.iter_mut().skip(1) {
                *v += dp;
            }
            starts.push(s);
        }
        let mut worst_cond: Option<f64> = None;
        for s in &starts {
            match self.newton(x, psi2, s) {
                NewtonOutcome::Converged(u) => {
                    let alpha = self.assemble(&u, psi2);
                    let g = linalg::det(&linalg::gram(&linalg::select_columns(&self.eik.dposition(&alpha), &self.split.psi_prime)));
                    if self.split.k > 0 && g <= 1e-10 {
                        continue;
                    }
                    return Ok(u);
                }
                NewtonOutcome::IllConditioned(c) => worst_cond = Some(worst_cond.map_or(c, |w: f64| w.max(c))),
                NewtonOutcome::Failed => {}
            }
        }
        match worst_cond {
            Some(condition) => Err(Error::LeavingW { condition }),
            None => Err(Error::OutsideChart(format!("no solution of the implicit system at x = {x:?}, ψ″ = {psi2:?}"))),
        }
    }

    fn tau_at(&self, z: &[f64]) -> Result<f64> {
        let n = self.eik.dim();
        Ok(self.solve_me1(&z[..n], &z[n..], Some(&self.center_unknowns()))?[0])
    }

    /// Hessian of τ(x, ψ″) at (x*, ψ″*), variables ordered (x, ψ″).
    fn compute_tau_hessian(&self) -> Result<DMatrix<f64>> {
        let mut z: Vec<f64> = self.x_star.clone();
        z.extend_from_slice(&self.psi2_star);
        let d = z.len();
        let s = HESSIAN_STEP;
        let t0 = self.tau_at(&z)?;
        let mut hmat = DMatrix::zeros(d, d);
        let mut w = z.clone();
        for i in 0..d {
            w[i] = z[i] + s;
            let tp = self.tau_at(&w)?;
            w[i] = z[i] - s;
            let tm = self.tau_at(&w)?;
            w[i] = z[i];
            hmat[(i, i)] = (tp - 2.0 * t0 + tm) / (s * s);
            for j in 0..i {
                let mut acc = 0.0;
                for (si, sj, sign) in [(s, s, 1.0), (s, -s, -1.0), (-s, s, -1.0), (-s, -s, 1.0)] {
                    w[i] = z[i] + si;
                    w[j] = z[j] + sj;
                    acc += sign * self.tau_at(&w)?;
                }
                w[i] = z[i];
                w[j] = z[j];
                hmat[(i, j)] = acc / (4.0 * s * s);
                hmat[(j, i)] = hmat[(i, j)];
            }
        }
        Ok(hmat)
    }

    fn check_x(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.eik.dim() {
            return Err(Error::Dimension { expected: self.eik.dim(), got: x.len() });
        }
        if let Some(b) = &self.x_box {
            if x.iter().zip(b).any(|(v, (lo, hi))| v < lo || v > hi) {
                return Err(Error::OutsideChart(format!("x = {x:?} outside W")));
            }
        }
        Ok(())
    }

    /// Integrand of the ψ″ integral (without the global prefactor).
    pub fn integrand(&self, a: &dyn Amplitude, x: &[f64], psi2: &[f64], h: f64) -> Result<C64> {
        let offsets: Vec<f64> = psi2
            .iter()
            .zip(&self.psi2_star)
            .zip(&self.psi2_periods)
            .map(|((v, c), per)| periodic_offset(v - c, *per))
            .collect();
        let chi = self.cutoff.chi(&offsets);
        if chi == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        let u = self.solve_me1(x, psi2, None)?;
        let alpha = self.assemble(&u, psi2);
        let av = a.value(&alpha);
        if av == C64::new(0.0, 0.0) {
            return Ok(av);
        }
        let (_, det_m) = m_matrix(self.eik.as_ref(), &self.split, &alpha)?;
        let g = linalg::det(&linalg::gram(&linalg::select_columns(&self.eik.dposition(&alpha), &self.split.psi_prime)));
        if self.split.k > 0 && g <= 1e-10 {
            return Err(Error::LeavingW { condition: 1.0 / g.max(f64::MIN_POSITIVE) });
        }
        let mu = self.eik.density(&alpha);
        let tau = alpha[0] + self.eik.tau_offset();
        let mag = (mu * det_m).abs().sqrt() / g.sqrt() * chi;
        Ok(C64::from_polar(1.0, tau / h) * av * mag)
    }

    pub fn prefactor(&self, h: f64) -> C64 {
        let dim2 = self.split.psi_second.len() as f64;
        C64::from_polar(1.0, -PI * self.effective_index() / 2.0) * (2.0 * PI * h).powf(-dim2 / 2.0)
    }

    pub fn evaluate_detailed(&self, a: &dyn Amplitude, x: &[f64], h: f64) -> Result<(C64, QuadOutcome)> {
        check_h(h)?;
        self.check_x(x)?;
        let out = integrate(&self.psi2_axes, &self.quadrature, "canonical_operator", |psi2| self.integrand(a, x, psi2, h))?;
        Ok((self.prefactor(h) * out.value, QuadOutcome { value: self.prefactor(h) * out.value, ..out }))
    }

    pub fn evaluate_new(&self, a: &dyn Amplitude, x: &[f64], h: f64) -> Result<C64> {
        Ok(self.evaluate_detailed(a, x, h)?.0)
    }
}

impl LocalOperator for NewSingularChart {
    fn apply(&self, a: &dyn Amplitude, x: &[f64], h: f64) -> Result<C64> {
        self.evaluate_new(a, x, h)
    }
}
