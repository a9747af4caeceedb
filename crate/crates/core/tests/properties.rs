use std::f64::consts::PI;
use std::sync::Arc;

use caustica::bridge::*;
use caustica::examples::*;
use caustica::linalg::sigma_minus;
use caustica::manifold::*;
use caustica::maslov::{chart_index, cycle_index, path_index};
use caustica::oscillatory::*;
use caustica::C64;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn tanh_beam() -> BesselBeam {
    beam_manifold(Profile::Tanh { a: 1.0, b: 1.0 }, 1.0).unwrap()
}

fn builtin_charts() -> Vec<Arc<dyn EikonalChart>> {
    EXAMPLE_NAMES.iter().map(|n| builtin(n).unwrap().eikonal_chart().unwrap()).collect()
}

// (τ, angle, ψ) away from the spherical poles and the evolved beam's caustics
fn chart_point() -> impl Strategy<Value = [f64; 3]> {
    (-1.5..1.5f64, 0.2..(PI - 0.2), 0.0..(2.0 * PI)).prop_map(|(a, b, c)| [a, b, c])
}

fn beam_point(e: &BeamEikonal, p: [f64; 3]) -> [f64; 3] {
    // angle coordinate mapped into φ ∈ (−1.4, 1.4)
    let phi = p[1] - 0.5 * PI;
    [e.beam.eikonal(p[0], phi), phi, p[2]]
}

fn radial_tau() -> impl Strategy<Value = f64> {
    prop_oneof![-2.0..-0.2f64, 0.2..2.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn builtin_charts_are_eikonal(p in chart_point()) {
        let b = tanh_beam();
        let evolved = b.eikonal_chart(0.5, 1.0).unwrap();
        for (i, chart) in builtin_charts().into_iter().enumerate() {
            let a = if i == 0 { p } else { beam_point(&evolved, p) };
            prop_assert!(eikonal_defect(&chart, &a).unwrap() <= 1e-10);
            prop_assert!(lagrangian_defect(&chart, &a).unwrap() <= 1e-10);
            prop_assert!(derivative_discrepancy(&chart, &a).unwrap() <= 1e-6);
        }
        let original = [p[0], p[1] - 0.5 * PI, p[2]];
        prop_assert!(lagrangian_defect(&b, &original).unwrap() <= 1e-10);
    }

    #[test]
    fn eikonal_jacobian_is_modulus_of_direct(p in chart_point()) {
        let b = tanh_beam();
        for t in [0.0, 0.5] {
            let e = b.eikonal_chart(t, 1.0).unwrap();
            let a = beam_point(&e, p);
            let direct = jacobian_eps(&e, &a, 0.0).unwrap().norm();
            let eik = jacobian_eikonal_abs(&e, &a).unwrap();
            prop_assert!((direct - eik).abs() <= 1e-8 * direct.max(1e-6), "{direct} {eik}");
        }
        let direct = jacobian_eps(&RadialManifold, &p, 0.0).unwrap().norm();
        let eik = jacobian_eikonal_abs(&RadialManifold, &p).unwrap();
        prop_assert!((direct - eik).abs() <= 1e-8 * direct.max(1e-6));
    }

    #[test]
    fn regularized_jacobian_never_vanishes(p in chart_point(), q in chart_point()) {
        let b = tanh_beam();
        let e = b.eikonal_chart(0.0, 1.0).unwrap();
        let (pa, qa) = (beam_point(&e, p), beam_point(&e, q));
        for s in 0..=20 {
            let t = s as f64 / 20.0;
            let r: Vec<f64> = (0..3).map(|i| p[i] + t * (q[i] - p[i])).collect();
            let ba: Vec<f64> = (0..3).map(|i| pa[i] + t * (qa[i] - pa[i])).collect();
            for eps in [0.01, 0.1, 1.0] {
                prop_assert!(jacobian_eps(&RadialManifold, &r, eps).unwrap().norm() > 1e-12);
                prop_assert!(jacobian_eps(&e, &ba, eps).unwrap().norm() > 1e-12);
            }
        }
    }

    #[test]
    fn regularized_jacobian_tends_to_real_one(p in chart_point()) {
        prop_assume!(p[0].abs() > 0.05);
        let j0 = jacobian_eps(&RadialManifold, &p, 0.0).unwrap();
        let diffs: Vec<f64> = (0..6)
            .map(|m| (jacobian_eps(&RadialManifold, &p, 0.1 * 0.5f64.powi(m)).unwrap() - j0).norm())
            .collect();
        prop_assert!(diffs.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn path_index_is_additive(a in radial_tau(), b in radial_tau(), c in radial_tau(), th in 0.3..2.8f64, ps in 0.0..6.0f64) {
        let p = |s: f64, t: f64| ManifoldPath::segment(vec![s, th, ps], vec![t, th + 0.1, ps]);
        let ab = p(a, b);
        let bc = ManifoldPath::segment(vec![b, th + 0.1, ps], vec![c, th, ps]);
        let whole = path_index(&RadialManifold, &ab.concat(&bc)).unwrap().value;
        let parts = path_index(&RadialManifold, &ab).unwrap().value + path_index(&RadialManifold, &bc).unwrap().value;
        prop_assert_eq!(whole, parts);
        prop_assert_eq!(path_index(&RadialManifold, &ab.reversed()).unwrap().value, -path_index(&RadialManifold, &ab).unwrap().value);
        // two sign changes of τ through the focus each add ±2
        let crossings = 2 * (((a < 0.0) != (b < 0.0)) as i64) * if a < 0.0 { 1 } else { -1 };
        prop_assert_eq!(path_index(&RadialManifold, &ab).unwrap().value, crossings);
    }

    #[test]
    fn path_index_survives_reparametrization_and_homotopy(a in radial_tau(), b in radial_tau(), bend in -0.4..0.4f64, k in 1.0..3.0f64) {
        let seg = ManifoldPath::segment(vec![a, 1.0, 0.5], vec![b, 1.2, 0.5]);
        let base = path_index(&RadialManifold, &seg).unwrap().value;
        let slow = seg.reparametrized(move |t| t.powf(k));
        prop_assert_eq!(path_index(&RadialManifold, &slow).unwrap().value, base);
        // endpoints fixed, interior pushed off in θ and ψ
        let bent = ManifoldPath::new(move |t| {
            let s = (PI * t).sin();
            vec![a + t * (b - a), 1.0 + 0.2 * t + bend * s, 0.5 + bend * s]
        });
        prop_assert_eq!(path_index(&RadialManifold, &bent).unwrap().value, base);
    }

    #[test]
    fn beam_cycles_are_epsilon_independent(al in -1.5..1.5f64, ph in -1.0..1.0f64) {
        prop_assume!(al.abs() > 0.05);
        let b = tanh_beam();
        let r = cycle_index(&b, &b.psi_cycle(al, ph)).unwrap();
        prop_assert_eq!(r.value, 0);
        let spread = r.eps_sequence.iter().map(|(_, v)| (v - r.raw).abs()).fold(0.0, f64::max);
        prop_assert!(spread <= 1e-6);
    }

    #[test]
    fn chart_index_is_branch_of_arg(tau in radial_tau(), th in 0.2..1.3f64, ps in 0.0..6.0f64) {
        let subset = IndexSet::one_based(3, &[3]).unwrap();
        let path = ManifoldPath::segment(vec![1.0, 0.25 * PI, 0.0], vec![tau, th, ps]);
        let m = chart_index(&RadialManifold, &path, &subset).unwrap();
        let j = jacobian_canonical(&RadialManifold, &[tau, th, ps], &subset).unwrap();
        let phase = C64::from_polar(1.0, PI * m.value as f64) * j.signum();
        prop_assert!((phase - C64::new(1.0, 0.0)).norm() <= 1e-6);
    }

    #[test]
    fn negative_index_complements(v in proptest::collection::vec(-2.0..2.0f64, 9), d in 1usize..=3) {
        let a = DMatrix::from_fn(d, d, |i, j| v[3 * i.min(j) + i.max(j)]);
        let ev = a.clone().symmetric_eigen().eigenvalues;
        prop_assume!(ev.iter().all(|e| e.abs() > 1e-6));
        prop_assert_eq!(sigma_minus(&a).unwrap() + sigma_minus(&(-a)).unwrap(), d);
    }

    #[test]
    fn fourier_round_trip(w in 0.3..1.0f64, c in -0.5..0.5f64, k in -3.0..3.0f64, h in 0.05..0.2f64) {
        // both steps below the Nyquist bound πh/(half-width of the other grid)
        let (xmax, pmax) = (6.0, k.abs() + 10.0 * h / w + 0.5);
        let count = (3.0 * xmax * pmax / (PI * h)).ceil() as usize + 1;
        let x = UniformAxis::new(-xmax, xmax, count).unwrap();
        let p = UniformAxis::new(-pmax, pmax, count).unwrap();
        let f = move |s: &[f64]| C64::from_polar((-((s[0] - c) / w).powi(2)).exp(), k * s[0] / h);
        let u = SampledFunction::from_fn(vec![x], f);
        let fwd = h_fourier(&u, &[0], &[p], h, FourierDirection::Forward, 1e-12).unwrap();
        let back = h_fourier(&fwd, &[0], &[x], h, FourierDirection::Inverse, 1e-6).unwrap();
        let err = u.values.iter().zip(&back.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn airy_lift_density_and_index(beta in prop_oneof![-2.5..-0.1f64, 0.1..2.5f64]) {
        let lift = LiftedChart::new(Arc::new(AiryPhase::default()), Arc::new(AiryParametrization), Arc::new(|_: &[f64]| 1.0));
        let b = [beta];
        prop_assert!(lagrangian_defect(&lift, &b).unwrap() <= 1e-8);
        let f1 = density_factor(&lift, &b, Extension::Orthogonal).unwrap();
        let f2 = density_factor(&lift, &b, Extension::Oblique).unwrap();
        prop_assert!((f1 - f2).abs() <= 1e-8 * f1.abs());
        prop_assert!((index_branch_consistency(&lift, &b, &IndexSet::all(1)).unwrap() - 1.0).abs() < 1e-12);
    }
}

fn php_lift() -> LiftedChart {
    let support = vec![(-0.6, 0.6), (-0.6, 0.6)];
    let subset = IndexSet::one_based(3, &[3]).unwrap();
    let php = PhpPhase::new(Arc::new(RadialManifold), subset, |a: &[f64]| a[0], radial_cap_inverse(), caustica::canonical::inflated_box(&support)).unwrap();
    let param = PhpParametrization {
        phase: php.clone(),
        domain: ParamDomain::new(vec![ParamAxis::real_line(), ParamAxis::interval(-0.9, 0.9), ParamAxis::interval(-0.9, 0.9)]),
    };
    let pd = param.clone();
    LiftedChart::new(Arc::new(php), Arc::new(param), Arc::new(move |b: &[f64]| pd.density(b)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn chart_phase_lift(x3 in -1.5..1.5f64, p1 in -0.5..0.5f64, p2 in -0.5..0.5f64) {
        prop_assume!(p1.abs() + p2.abs() > 0.02);
        let lift = php_lift();
        let b = [x3, p1, p2];
        prop_assert!(lagrangian_defect(&lift, &b).unwrap() <= 1e-8);
        let f1 = density_factor(&lift, &b, Extension::Orthogonal).unwrap();
        let f2 = density_factor(&lift, &b, Extension::Oblique).unwrap();
        prop_assert!((f1 - f2).abs() <= 1e-8 * f1.abs());
        // dx₃ dp⊥ against the radial measure
        prop_assert!((f1.abs() - 1.0 / (1.0 - p1 * p1 - p2 * p2)).abs() <= 1e-6);
        prop_assert!((index_branch_consistency(&lift, &b, &IndexSet::one_based(3, &[3]).unwrap()).unwrap() - 1.0).abs() < 1e-12);
    }
}
