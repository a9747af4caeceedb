//! Bessel-beam manifold Λ³₀ = {x = (α n(ψ), φ), p = (λ(φ) n(ψ), αλ′(φ) + k)}
//! and its shift Λ_t along the flow of H = c|p|.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::REFERENCE_QUARTER_TURNS;
use crate::canonical::{Amplitude, Me1Solver, NewChartOptions, NewSingularChart};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::manifold::{EikonalChart, LagrangianChart, ParamAxis, ParamDomain};
use crate::quadrature::QuadratureSpec;
use crate::special::bessel_j0;

/// Radial momentum profile λ(φ) with its first two derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// a(1 + tanh φ) + b
    Tanh { a: f64, b: f64 },
}

impl Profile {
    pub fn value(&self, phi: f64) -> f64 {
        match *self {
            Profile::Constant(l) => l,
            Profile::Tanh { a, b } => a * (1.0 + phi.tanh()) + b,
        }
    }
    pub fn d1(&self, phi: f64) -> f64 {
        match *self {
            Profile::Constant(_) => 0.0,
            Profile::Tanh { a, .. } => a / phi.cosh().powi(2),
        }
    }
    pub fn d2(&self, phi: f64) -> f64 {
        match *self {
            Profile::Constant(_) => 0.0,
            Profile::Tanh { a, .. } => -2.0 * a * phi.tanh() / phi.cosh().powi(2),
        }
    }
    /// λ > 0 everywhere.
    pub fn validate(&self) -> Result<()> {
        let inf = match *self {
            Profile::Constant(l) => l,
            Profile::Tanh { a, b } => b.min(2.0 * a + b),
        };
        if !(inf > 0.0) || !inf.is_finite() {
            return Err(Error::Profile { value: inf });
        }
        Ok(())
    }
}

/// Local quantities in the flow-transported coordinates (α, φ, ψ).
#[derive(Clone, Copy, Debug)]
struct Local {
    l: f64,
    l1: f64,
    l2: f64,
    p3: f64,
    pn: f64,
    radial: f64,
    x3: f64,
    // ∂(𝒳, X₃)/∂(α, φ)
    r_a: f64,
    r_f: f64,
    z_a: f64,
    z_f: f64,
}

fn local(profile: &Profile, k: f64, ct: f64, alpha: f64, phi: f64) -> Local {
    let l = profile.value(phi);
    let l1 = profile.d1(phi);
    let l2 = profile.d2(phi);
    let p3 = alpha * l1 + k;
    let pn = (l * l + p3 * p3).sqrt();
    let pn3 = pn * pn * pn;
    let dpn_f = l * l1 + p3 * alpha * l2;
    Local {
        l,
        l1,
        l2,
        p3,
        pn,
        radial: alpha + ct * l / pn,
        x3: phi + ct * p3 / pn,
        r_a: 1.0 - ct * l * p3 * l1 / pn3,
        r_f: ct * (l1 / pn - l * dpn_f / pn3),
        z_a: ct * l1 * l * l / pn3,
        z_f: 1.0 + ct * (alpha * l2 / pn - p3 * dpn_f / pn3),
    }
}

/// The beam manifold in its original coordinates (α, φ, ψ) with μ = 1/λ(φ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesselBeam {
    pub profile: Profile,
    pub k: f64,
}

pub fn beam_manifold(profile: Profile, k: f64) -> Result<BesselBeam> {
    profile.validate()?;
    Ok(BesselBeam { profile, k })
}

fn beam_domain() -> ParamDomain {
    ParamDomain::new(vec![ParamAxis::real_line(), ParamAxis::real_line(), ParamAxis::circle(0.0, 2.0 * PI)])
}

fn ab_position(s: &Local, psi: f64) -> DVector<f64> {
    DVector::from_vec(vec![s.radial * psi.cos(), s.radial * psi.sin(), s.x3])
}

fn ab_momentum(s: &Local, psi: f64) -> DVector<f64> {
    DVector::from_vec(vec![s.l * psi.cos(), s.l * psi.sin(), s.p3])
}

// Columns ∂/∂α, ∂/∂φ, ∂/∂ψ.
fn ab_dposition(s: &Local, psi: f64) -> DMatrix<f64> {
    let (c, sn) = (psi.cos(), psi.sin());
    DMatrix::from_row_slice(3, 3, &[s.r_a * c, s.r_f * c, -s.radial * sn, s.r_a * sn, s.r_f * sn, s.radial * c, s.z_a, s.z_f, 0.0])
}

fn ab_dmomentum(s: &Local, alpha: f64, psi: f64) -> DMatrix<f64> {
    let (c, sn) = (psi.cos(), psi.sin());
    DMatrix::from_row_slice(3, 3, &[0.0, s.l1 * c, -s.l * sn, 0.0, s.l1 * sn, s.l * c, s.l1, alpha * s.l2, 0.0])
}

impl LagrangianChart for BesselBeam {
    fn dim(&self) -> usize {
        3
    }
    fn domain(&self) -> ParamDomain {
        beam_domain()
    }
    fn position(&self, a: &[f64]) -> DVector<f64> {
        ab_position(&local(&self.profile, self.k, 0.0, a[0], a[1]), a[2])
    }
    fn momentum(&self, a: &[f64]) -> DVector<f64> {
        ab_momentum(&local(&self.profile, self.k, 0.0, a[0], a[1]), a[2])
    }
    fn density(&self, a: &[f64]) -> f64 {
        1.0 / self.profile.value(a[1])
    }
    fn dposition(&self, a: &[f64]) -> DMatrix<f64> {
        ab_dposition(&local(&self.profile, self.k, 0.0, a[0], a[1]), a[2])
    }
    fn dmomentum(&self, a: &[f64]) -> DMatrix<f64> {
        ab_dmomentum(&local(&self.profile, self.k, 0.0, a[0], a[1]), a[0], a[2])
    }
    fn name(&self) -> String {
        "beam".into()
    }
}

impl BesselBeam {
    /// τ = λ(φ)α + kφ.
    pub fn eikonal(&self, alpha: f64, phi: f64) -> f64 {
        self.profile.value(phi) * alpha + self.k * phi
    }

    /// Eikonal coordinates (τ, φ, ψ) on Λ_t.
    pub fn eikonal_chart(&self, t: f64, c: f64) -> Result<BeamEikonal> {
        if !(t >= 0.0) || !(c > 0.0) {
            return Err(Error::Config(format!("need t >= 0 and c > 0, got t = {t}, c = {c}")));
        }
        Ok(BeamEikonal { beam: *self, t, c })
    }

    /// The ψ-cycle at fixed (α, φ).
    pub fn psi_cycle(&self, alpha: f64, phi: f64) -> crate::manifold::ManifoldPath {
        crate::manifold::ManifoldPath::new(move |s| vec![alpha, phi, 2.0 * PI * s])
    }
}

/// Λ_t in eikonal coordinates (τ, φ, ψ), μ = λ(φ)⁻².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamEikonal {
    pub beam: BesselBeam,
    pub t: f64,
    pub c: f64,
}

impl BeamEikonal {
    pub fn alpha_of(&self, tau: f64, phi: f64) -> f64 {
        (tau - self.beam.k * phi) / self.beam.profile.value(phi)
    }

    fn local_at(&self, a: &[f64]) -> (f64, Local) {
        let alpha = self.alpha_of(a[0], a[1]);
        (alpha, local(&self.beam.profile, self.beam.k, self.c * self.t, alpha, a[1]))
    }

    // (α, φ, ψ) columns to (τ, φ, ψ) columns.
    fn to_eikonal(m: &DMatrix<f64>, s: &Local) -> DMatrix<f64> {
        let mut out = m.clone();
        let col_a = m.column(0).into_owned();
        out.set_column(0, &(&col_a / s.l));
        out.set_column(1, &(m.column(1) - &col_a * (s.p3 / s.l)));
        out
    }

    /// Flow image of the point with coordinates (α, φ, ψ).
    pub fn evolve_point(&self, alpha: f64, phi: f64, psi: f64) -> EvolvedBeamState {
        let s = local(&self.beam.profile, self.beam.k, self.c * self.t, alpha, phi);
        EvolvedBeamState {
            t: self.t,
            c: self.c,
            alpha,
            phi,
            psi,
            lambda: s.l,
            p3: s.p3,
            p_norm: s.pn,
            radial: s.radial,
            x3: s.x3,
            tau: self.beam.eikonal(alpha, phi),
            position: [s.radial * psi.cos(), s.radial * psi.sin(), s.x3],
            momentum: [s.l * psi.cos(), s.l * psi.sin(), s.p3],
        }
    }

    /// Solves α + tcλ/|P| = q, φ + tcP₃/|P| = x₃ by Newton with continuation in t.
    pub fn evolved_solve(&self, q: f64, x3: f64) -> Result<(f64, f64, f64)> {
        let ct_final = self.c * self.t;
        if ct_final == 0.0 {
            return Ok((q, x3, self.beam.eikonal(q, x3)));
        }
        let mut steps = 1usize;
        'outer: while steps <= 1 << 12 {
            let (mut alpha, mut phi) = (q, x3);
            for j in 1..=steps {
                let ct = ct_final * j as f64 / steps as f64;
                let mut done = false;
                for _ in 0..10 {
                    let s = local(&self.beam.profile, self.beam.k, ct, alpha, phi);
                    let (f1, f2) = (s.radial - q, s.x3 - x3);
                    let det = s.r_a * s.z_f - s.r_f * s.z_a;
                    if det.abs() < 1e-10 {
                        return Err(Error::CausticOnset { value: det });
                    }
                    let da = -(s.z_f * f1 - s.r_f * f2) / det;
                    let df = -(-s.z_a * f1 + s.r_a * f2) / det;
                    alpha += da;
                    phi += df;
                    let s = local(&self.beam.profile, self.beam.k, ct, alpha, phi);
                    if (s.radial - q).abs().max((s.x3 - x3).abs()) <= 1e-13 * (1.0 + q.abs() + x3.abs()) {
                        done = true;
                        break;
                    }
                }
                if !done {
                    steps *= 2;
                    continue 'outer;
                }
            }
            return Ok((alpha, phi, self.beam.eikonal(alpha, phi)));
        }
        Err(Error::Nonconvergence { context: "examples", detail: format!("evolved solve at q = {q}, x3 = {x3}") })
    }

    /// |P|⁴ − 2ctλ|P|(kλ′ + α(λ′² − λλ″/2)); vanishes on the focal set away from the axis.
    pub fn caustic_onset(&self, phi: f64, alpha: f64) -> f64 {
        caustic_onset(&self.beam.profile, self.beam.k, phi, alpha, self.t, self.c)
    }

    /// 𝒳 = α + ctλ/|P|; vanishes on the axis caustic.
    pub fn axis_condition(&self, phi: f64, alpha: f64) -> f64 {
        local(&self.beam.profile, self.beam.k, self.c * self.t, alpha, phi).radial
    }

    /// | |P|² − ctλ(2P₃λ′ − αλλ″)/|P| |, the closed form of |det M| on Λ_t (ψ′ = {φ}).
    pub fn det_m_closed_form(&self, alpha: f64, phi: f64) -> f64 {
        let s = local(&self.beam.profile, self.beam.k, self.c * self.t, alpha, phi);
        let ct = self.c * self.t;
        (s.pn * s.pn - ct * s.l * (2.0 * s.p3 * s.l1 - alpha * s.l * s.l2) / s.pn).abs()
    }

    /// α of the axis caustic at φ, by Newton from α = 0.
    pub fn axis_alpha(&self, phi: f64) -> Result<f64> {
        let ct = self.c * self.t;
        let mut alpha = 0.0;
        for _ in 0..60 {
            let s = local(&self.beam.profile, self.beam.k, ct, alpha, phi);
            if s.radial.abs() < 1e-14 {
                return Ok(alpha);
            }
            alpha -= s.radial / s.r_a;
        }
        Err(Error::Nonconvergence { context: "examples", detail: "axis caustic".into() })
    }
}

pub fn caustic_onset(profile: &Profile, k: f64, phi: f64, alpha: f64, t: f64, c: f64) -> f64 {
    let l = profile.value(phi);
    let l1 = profile.d1(phi);
    let l2 = profile.d2(phi);
    let pn = (l * l + (alpha * l1 + k).powi(2)).sqrt();
    pn.powi(4) - 2.0 * c * t * l * pn * (k * l1 + alpha * (l1 * l1 - 0.5 * l * l2))
}

impl LagrangianChart for BeamEikonal {
    fn dim(&self) -> usize {
        3
    }
    fn domain(&self) -> ParamDomain {
        beam_domain()
    }
    fn position(&self, a: &[f64]) -> DVector<f64> {
        ab_position(&self.local_at(a).1, a[2])
    }
    fn momentum(&self, a: &[f64]) -> DVector<f64> {
        ab_momentum(&self.local_at(a).1, a[2])
    }
    fn density(&self, a: &[f64]) -> f64 {
        self.beam.profile.value(a[1]).powi(-2)
    }
    fn dposition(&self, a: &[f64]) -> DMatrix<f64> {
        let (_, s) = self.local_at(a);
        Self::to_eikonal(&ab_dposition(&s, a[2]), &s)
    }
    fn dmomentum(&self, a: &[f64]) -> DMatrix<f64> {
        let (alpha, s) = self.local_at(a);
        Self::to_eikonal(&ab_dmomentum(&s, alpha, a[2]), &s)
    }
    fn name(&self) -> String {
        if self.t == 0.0 {
            "beam-eikonal".into()
        } else {
            format!("evolved-beam(t={})", self.t)
        }
    }
}

impl EikonalChart for BeamEikonal {}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolvedBeamState {
    pub t: f64,
    pub c: f64,
    pub alpha: f64,
    pub phi: f64,
    pub psi: f64,
    /// 𝒫 = λ(φ)
    pub lambda: f64,
    pub p3: f64,
    pub p_norm: f64,
    /// 𝒳
    pub radial: f64,
    pub x3: f64,
    pub tau: f64,
    pub position: [f64; 3],
    pub momentum: [f64; 3],
}

impl EvolvedBeamState {
    /// R(φ, x₃, t) = t²c² − (x₃ − φ)² at the image point.
    pub fn r_value(&self) -> f64 {
        (self.t * self.c).powi(2) - (self.x3 - self.phi).powi(2)
    }
}

/// √(2πi/h) a(|x⊥|, x₃) e^{ikx₃/h} J₀(λ(x₃)|x⊥|/h).
pub fn beam_reference_field(beam: &BesselBeam, x: &[f64], h: f64, a: &dyn Fn(f64, f64) -> C64) -> C64 {
    let r = x[0].hypot(x[1]);
    let pref = C64::from_polar((2.0 * PI / h).sqrt(), PI / 4.0);
    pref * a(r, x[2]) * C64::from_polar(1.0, beam.k * x[2] / h) * bessel_j0(beam.profile.value(x[2]) * r / h)
}

/// Amplitude in eikonal coordinates from a function of (α, φ).
pub fn beam_amplitude<F>(chart: BeamEikonal, f: F) -> impl Amplitude + Clone
where
    F: Fn(f64, f64) -> C64 + Send + Sync + Clone,
{
    move |a: &[f64]| f(chart.alpha_of(a[0], a[1]), a[1])
}

/// New singular chart around the axis caustic at φ = ψ = 0. With `closed_form_solver`
/// the implicit system is solved by [`BeamEikonal::evolved_solve`].
pub fn beam_new_chart(chart: BeamEikonal, quadrature: QuadratureSpec, closed_form_solver: bool) -> Result<NewSingularChart> {
    let alpha_star = chart.axis_alpha(0.0)?;
    let lam0 = chart.beam.profile.value(0.0);
    let center = vec![lam0 * alpha_star, 0.0, 0.0];
    let central = vec![lam0 * (alpha_star - 1.0), 0.0, 0.0];
    let mut opts = NewChartOptions::new(central);
    opts.reference_quarter_turns = REFERENCE_QUARTER_TURNS;
    opts.quadrature = quadrature;
    if closed_form_solver {
        let solver: Me1Solver = Arc::new(move |x: &[f64], psi2: &[f64]| {
            let q = x[0] * psi2[0].cos() + x[1] * psi2[0].sin();
            let (_, phi, tau) = chart.evolved_solve(q, x[2])?;
            Ok(vec![tau, phi])
        });
        opts.solver = Some(solver);
    }
    NewSingularChart::new(Arc::new(chart), center, opts)
}

/// Field on Λ_t from the new singular chart with the closed-form solve.
pub fn evolved_field(chart: BeamEikonal, x: &[f64], h: f64, a: &dyn Amplitude, quadrature: QuadratureSpec) -> Result<C64> {
    beam_new_chart(chart, quadrature, true)?.evaluate_new(a, x, h)
}
