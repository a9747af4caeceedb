//! Acceptance criteria, one PASS/FAIL line each.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use caustica::bridge::*;
use caustica::canonical::*;
use caustica::examples::*;
use caustica::manifold::*;
use caustica::maslov::{cycle_index, path_index};
use caustica::oscillatory::*;
use caustica::quadrature::QuadratureSpec;
use caustica::C64;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

const TANH: Profile = Profile::Tanh { a: 1.0, b: 1.0 };

// 1. evaluate_new on the radial manifold against −2 sin(|x|/h)/|x|
fn radial_exact_field() -> Verdict {
    let chart = radial_new_chart(QuadratureSpec::default()).unwrap();
    let a = radial_cutoff_amplitude(10.0, 20.0);
    let points: Vec<[f64; 3]> = (1..=20)
        .map(|i| {
            let r = 0.5 + 1.5 * halton(i, 2);
            let th = (1.0 - 2.0 * halton(i, 3)).acos();
            let ps = 2.0 * PI * halton(i, 5);
            [r * th.sin() * ps.cos(), r * th.sin() * ps.sin(), r * th.cos()]
        })
        .collect();
    let mut worst: f64 = 0.0;
    for h in [0.1, 0.05] {
        for x in &points {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let v = chart.evaluate_new(&a, x, h).unwrap();
            // relative to the envelope 2/|x|, since the field itself has zeros
            worst = worst.max((v - radial_field(x, h).unwrap()).norm() * r / 2.0);
        }
    }
    verdict(worst <= 1e-5, format!("max relative error {worst:.2e} over 20 points, h in {{0.1, 0.05}} (tol 1e-5)"))
}

// 2. Bessel-beam leading order
fn beam_leading_order() -> Verdict {
    let beam = beam_manifold(TANH, 1.0).unwrap();
    let e = beam.eikonal_chart(0.0, 1.0).unwrap();
    let chart = beam_new_chart(e, QuadratureSpec::default(), false).unwrap();
    let amp = beam_amplitude(e, |al: f64, ph: f64| C64::new((-al * al - ph * ph).exp(), 0.0));
    let aref = |r: f64, x3: f64| C64::new((-r * r - x3 * x3).exp(), 0.0);
    let points: Vec<[f64; 3]> = (0..10)
        .map(|i| {
            let r = 0.6 + 0.06 * i as f64;
            let ang = 0.7 * i as f64;
            [r * ang.cos(), r * ang.sin(), -0.5 + 0.1 * i as f64]
        })
        .collect();
    let hs = [0.2, 0.1, 0.05, 0.025];
    let errs: Vec<f64> = hs
        .iter()
        .map(|&h| {
            let worst = points
                .iter()
                .map(|x| (chart.evaluate_new(&amp, x, h).unwrap() - beam_reference_field(&beam, x, h, &aref)).norm())
                .fold(0.0, f64::max);
            worst * h.sqrt()
        })
        .collect();
    let order = fitted_order(&hs, &errs);
    verdict(
        (0.9..=1.3).contains(&order),
        format!("h^(1/2)-scaled max errors {} fitted order {order:.3} (band [0.9, 1.3])", sci(&errs)),
    )
}

// 3. new vs standard representation near the focus
fn new_vs_standard() -> Verdict {
    let newc = radial_new_chart(QuadratureSpec::default()).unwrap();
    let std = radial_standard_chart(0, 0.96, QuadratureSpec::default()).unwrap();
    let amp = |a: &[f64]| C64::new(bump(a[0], 1.0, 2.0) * smooth_step((a[1].cos() - 0.3) / 0.4), 0.0);
    let points = [[0.0, 0.0, 0.0], [0.0, 0.0, 0.2], [0.1, -0.1, 0.3], [0.2, 0.1, -0.1], [-0.3, 0.0, 0.2], [0.05, 0.3, 0.1]];
    let hs = [0.2, 0.1, 0.05, 0.025];
    let errs: Vec<f64> = hs
        .iter()
        .map(|&h| {
            let (mut diff, mut field): (f64, f64) = (0.0, 0.0);
            for x in &points {
                let a = newc.evaluate_new(&amp, x, h).unwrap();
                let b = std.evaluate_standard(&amp, x, h).unwrap();
                diff = diff.max((a - b).norm());
                field = field.max(a.norm());
            }
            diff / field
        })
        .collect();
    let order = fitted_order(&hs, &errs);
    verdict(
        (0.9..=1.5).contains(&order),
        format!("relative differences {} fitted order {order:.3} (band [0.9, 1.5])", sci(&errs)),
    )
}

// 4. stationary phase against brute-force quadrature
fn stationary_phase() -> Verdict {
    let airy = AiryPhase::default();
    let hs = [0.1, 0.05, 0.025, 0.0125, 0.00625];
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, sign) in [("theta>0", 1.0), ("theta<0", -1.0)] {
        let a = move |_: &[f64], t: &[f64]| C64::new(bump(t[0], 2.5, 3.4) * smooth_step(sign * t[0] + 0.5), 0.0);
        let mut errs = Vec::new();
        let mut args = Vec::new();
        for &h in &hs {
            let b = brute_quadrature(&airy, &a, &[-1.0], h, &QuadratureSpec::default()).unwrap();
            let s = stationary_phase_eval(&airy, &a, &[-1.0], h).unwrap();
            errs.push((b - s).norm());
            args.push((b / s).arg().abs());
        }
        let order = fitted_order(&hs, &errs);
        let phase_ok = args.last().unwrap() < &0.01 && args.last() < args.first();
        pass &= order >= 0.9 && phase_ok;
        detail.push(format!("airy {name} order {order:.3} |arg(brute/sp)| {:.1e}", args.last().unwrap()));
    }
    let whole = |_: &[f64], t: &[f64]| C64::new(bump(t[0], 2.5, 3.4), 0.0);
    let errs: Vec<f64> = hs
        .iter()
        .map(|&h| {
            let b = brute_quadrature(&airy, &whole, &[-1.0], h, &QuadratureSpec::default()).unwrap();
            (b - stationary_phase_eval(&airy, &whole, &[-1.0], h).unwrap()).norm()
        })
        .collect();
    detail.push(format!("(both branches together: errors {}, not used for the verdict)", sci(&errs)));
    let gauss = GaussianPhase::default();
    let ga = |_: &[f64], t: &[f64]| C64::new(bump(t[0], 10.0, 15.0), 0.0);
    let mut gworst: f64 = 0.0;
    for (x, h) in [(0.0, 0.1), (1.3, 0.05), (-2.0, 0.2), (0.7, 0.025)] {
        let b = brute_quadrature(&gauss, &ga, &[x], h, &QuadratureSpec::default()).unwrap();
        let s = stationary_phase_eval(&gauss, &ga, &[x], h).unwrap();
        gworst = gworst.max((b - s).norm());
    }
    pass &= gworst <= 1e-8;
    detail.push(format!("gaussian max |sp - brute| {gworst:.1e} (tol 1e-8)"));
    verdict(pass, detail.join("; "))
}

// 5. equivalence of the Fourier-integral and canonical-operator representations
fn equivalence() -> Verdict {
    let lift = LiftedChart::new(Arc::new(AiryPhase::default()), Arc::new(AiryParametrization), Arc::new(|_: &[f64]| 1.0));
    let piece = |lo: f64, hi: f64, r: f64| BridgePiece {
        subset: IndexSet::all(1),
        domain: ParamDomain::new(vec![ParamAxis::interval(lo, hi)]),
        reference: vec![r],
        seeds: vec![vec![1.5 * r]],
        inverse: None,
        momentum_support: None,
    };
    let setup = EquivalenceSetup {
        lift,
        pieces: vec![piece(0.01, 4.0, 1.0), piece(-4.0, -0.01, -1.0)],
        theta_cutoff: Arc::new(|t: &[f64]| bump(t[0], 2.5, 3.4)),
        quadrature: QuadratureSpec::default(),
    };
    let hs = [0.1, 0.05, 0.025];
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, sign) in [("beta>0", 1.0), ("beta<0", -1.0)] {
        let phi = move |b: &[f64]| C64::new(smooth_step(sign * b[0] + 0.5), 0.0);
        let rows = equivalence_residual(&setup, &phi, &[-1.0], &hs).unwrap();
        let order = fitted_order(&hs, &rows.iter().map(|r| r.residual).collect::<Vec<_>>());
        pass &= order >= 0.9;
        detail.push(format!("airy {name} order {order:.3}"));
    }
    let one = |_: &[f64]| C64::new(1.0, 0.0);
    let rows = equivalence_residual(&setup, &one, &[-1.0], &hs).unwrap();
    detail.push(format!("(phi = 1: residuals {}, not used for the verdict)", sci(&rows.iter().map(|r| r.residual).collect::<Vec<_>>())));

    let support = vec![(-0.6, 0.6), (-0.6, 0.6)];
    let subset = IndexSet::one_based(3, &[3]).unwrap();
    let php = PhpPhase::new(Arc::new(RadialManifold), subset.clone(), |a: &[f64]| a[0], radial_cap_inverse(), inflated_box(&support)).unwrap();
    let domain = ParamDomain::new(vec![ParamAxis::real_line(), ParamAxis::interval(-0.9, 0.9), ParamAxis::interval(-0.9, 0.9)]);
    let param = PhpParametrization { phase: php.clone(), domain: domain.clone() };
    let pd = param.clone();
    let lift = LiftedChart::new(Arc::new(php), Arc::new(param), Arc::new(move |b: &[f64]| pd.density(b)));
    let inverse: CanonicalInverse = Arc::new(|xi: &[f64], p: &[f64]| Ok(Some(vec![xi[0], p[0], p[1]])));
    let piece = BridgePiece { subset, domain, reference: vec![1.0, 0.2, 0.1], seeds: vec![], inverse: Some(inverse), momentum_support: Some(support.clone()) };
    let setup = EquivalenceSetup {
        lift,
        pieces: vec![piece],
        theta_cutoff: Arc::new(move |t: &[f64]| support_truncation(&support, t)),
        quadrature: QuadratureSpec::default(),
    };
    let phi = |b: &[f64]| C64::new(bump((b[1] * b[1] + b[2] * b[2]).sqrt(), 0.3, 0.5), 0.0);
    let rows = equivalence_residual(&setup, &phi, &[0.1, -0.05, 0.8], &[0.1, 0.05]).unwrap();
    let worst = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    pass &= worst <= 1e-8;
    detail.push(format!("chart phase on the radial manifold: max residual {worst:.1e} (quadrature tol 1e-8)"));
    verdict(pass, detail.join("; "))
}

// 6. Maslov indices and quantization
fn maslov_indices() -> Verdict {
    let through = path_index(&RadialManifold, &ManifoldPath::segment(vec![-1.0, 1.0, 0.5], vec![1.0, 1.0, 0.5])).unwrap().value;
    let constants = [vec![0.7, 1.0, 0.5], vec![-1.2, 2.0, 4.0]]
        .into_iter()
        .map(|p| path_index(&RadialManifold, &ManifoldPath::constant(p)).unwrap().value)
        .collect::<Vec<_>>();
    let beam = beam_manifold(TANH, 1.0).unwrap();
    let cyc = beam.psi_cycle(0.7, 0.2);
    let ci = cycle_index(&beam, &cyc).unwrap();
    let spread = ci.eps_sequence.iter().map(|(_, v)| (v - ci.raw).abs()).fold(0.0, f64::max);
    let quant = check_quantization(&beam, &[cyc, beam.psi_cycle(-1.3, -0.4)], 0.0731, 1e-8).unwrap();
    let quant_all = [1.0, 0.1, 0.0731, 0.01234]
        .iter()
        .all(|&h| check_quantization(&beam, &[beam.psi_cycle(0.7, 0.2)], h, 1e-8).unwrap().iter().all(|q| q.passes));
    let action = quant.iter().map(|q| q.action.abs()).fold(0.0, f64::max);
    let pass = through == 2 && constants.iter().all(|&c| c == 0) && ci.value == 0 && spread <= 1e-6 && quant_all && action < 1e-12;
    verdict(
        pass,
        format!(
            "through focus {through}, constant paths {constants:?}, beam psi-cycle {} (eps spread {spread:.1e}), max |action| {action:.1e}, quantization {}",
            ci.value,
            if quant_all { "passes" } else { "fails" }
        ),
    )
}

// 7. invariant suites
fn invariants() -> Verdict {
    let beam = beam_manifold(TANH, 1.0).unwrap();
    let charts: Vec<(Arc<dyn EikonalChart>, Vec<(f64, f64)>)> = vec![
        (Arc::new(RadialManifold), vec![(-2.0, 2.0), (0.1, PI - 0.1), (0.0, 2.0 * PI)]),
        (Arc::new(beam.eikonal_chart(0.0, 1.0).unwrap()), vec![(-2.0, 3.0), (-1.5, 1.5), (0.0, 2.0 * PI)]),
        (Arc::new(beam.eikonal_chart(0.5, 1.0).unwrap()), vec![(-2.0, 3.0), (-1.5, 1.5), (0.0, 2.0 * PI)]),
    ];
    let (mut defect, mut jrel): (f64, f64) = (0.0, 0.0);
    for (chart, bounds) in &charts {
        for a in quasi_random_points(bounds, 100) {
            defect = defect.max(eikonal_defect(chart, &a).unwrap()).max(lagrangian_defect(chart, &a).unwrap());
            let direct = jacobian_eps(chart, &a, 0.0).unwrap().norm();
            let eik = jacobian_eikonal_abs(chart, &a).unwrap();
            if direct > 1e-8 {
                jrel = jrel.max((direct - eik).abs() / direct);
            }
        }
    }
    let mut jmin = f64::INFINITY;
    for (chart, bounds) in &charts {
        let ends = quasi_random_points(bounds, 34);
        for w in ends.windows(2).take(17) {
            for s in 0..=40 {
                let t = s as f64 / 40.0;
                let a: Vec<f64> = (0..3).map(|i| w[0][i] + t * (w[1][i] - w[0][i])).collect();
                jmin = jmin.min(jacobian_eps(chart, &a, 1.0).unwrap().norm());
            }
        }
    }
    let airy = LiftedChart::new(Arc::new(AiryPhase::default()), Arc::new(AiryParametrization), Arc::new(|_: &[f64]| 1.0));
    let mut ext: f64 = 0.0;
    for b in [-2.0, -0.7, -0.1, 0.3, 1.1, 2.4] {
        let f1 = density_factor(&airy, &[b], Extension::Orthogonal).unwrap();
        let f2 = density_factor(&airy, &[b], Extension::Oblique).unwrap();
        ext = ext.max((f1 - f2).abs() / f1.abs());
    }
    let pass = defect <= 1e-10 && jrel <= 1e-8 && jmin > 1e-12 && ext <= 1e-8;
    verdict(
        pass,
        format!("max defect {defect:.1e}, |J| identity {jrel:.1e}, min |J^1| on 51 paths {jmin:.2e}, extension dependence {ext:.1e}"),
    )
}

// 8. evolved beam
fn evolved_beam() -> Verdict {
    let beam = beam_manifold(TANH, 1.0).unwrap();
    let seeds = [(0.4, 0.1), (1.2, -0.3), (0.8, 0.5), (2.0, 0.0), (0.3, -0.8)];
    let (mut resid, mut ident, mut drift): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for &(al, ph) in &seeds {
        let tau0 = beam.eikonal(al, ph);
        for t in (1..=10).map(|i| 0.1 * i as f64) {
            let e = beam.eikonal_chart(t, 1.0).unwrap();
            let st = e.evolve_point(al, ph, 0.0);
            let (a2, p2, tau) = e.evolved_solve(st.radial, st.x3).unwrap();
            let back = e.evolve_point(a2, p2, 0.0);
            resid = resid.max((back.radial - st.radial).abs()).max((back.x3 - st.x3).abs());
            ident = ident.max((a2 - (st.radial - st.r_value().sqrt())).abs());
            drift = drift.max((tau - tau0).abs());
        }
    }
    let qs = QuadratureSpec { rel_tol: 1e-12, ..QuadratureSpec::default() };
    let e0 = beam.eikonal_chart(0.0, 1.0).unwrap();
    let amp0 = beam_amplitude(e0, |al: f64, ph: f64| C64::new((-al * al - ph * ph).exp(), 0.0));
    let initial = beam_new_chart(e0, qs, false).unwrap();
    let (mut field, mut slope): (f64, Vec<f64>) = (0.0, Vec::new());
    for x in [[0.6, 0.2, 0.1], [-0.3, 0.5, -0.4]] {
        let u0 = initial.evaluate_new(&amp0, &x, 0.1).unwrap();
        let gap = |t: f64| {
            let e = beam.eikonal_chart(t, 1.0).unwrap();
            let amp = beam_amplitude(e, |al: f64, ph: f64| C64::new((-al * al - ph * ph).exp(), 0.0));
            (evolved_field(e, &x, 0.1, &amp, qs).unwrap() - u0).norm() / u0.norm()
        };
        field = field.max(gap(0.0));
        // the gap closes linearly: gap(t)/t settles as t shrinks
        slope.extend([1e-4, 1e-6].map(|t| gap(t) / t));
    }
    let settled = slope.chunks(2).all(|s| (s[0] - s[1]).abs() <= 1e-2 * s[1]);
    let positive = [0.0, 0.5, 3.0, 50.0, 1e4].iter().all(|&t| {
        (-20..=20).all(|i| {
            let (al, ph) = (0.3 * i as f64, 0.1 * i as f64);
            caustic_onset(&Profile::Constant(1.3), 0.8, ph, al, t, 1.0) > 0.0 && caustic_onset(&Profile::Constant(2.0), 0.0, ph, al, t, 1.0) > 0.0
        })
    });
    let pass = resid <= 1e-12 && ident <= 1e-10 && drift <= 1e-10 && field <= 1e-8 && settled && positive;
    verdict(
        pass,
        format!(
            "solve residual {resid:.1e}, alpha = q - sqrt(R) {ident:.1e}, tau drift {drift:.1e}, t = 0 field {field:.1e}, gap/t {}, constant-profile onset {}",
            sci(&slope),
            if positive { "positive" } else { "not positive" }
        ),
    )
}

fn sci(v: &[f64]) -> String {
    format!("[{}]", v.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(", "))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("radial exact field", radial_exact_field),
        ("Bessel-beam leading order", beam_leading_order),
        ("new vs standard representation", new_vs_standard),
        ("stationary phase", stationary_phase),
        ("Fourier-integral equivalence", equivalence),
        ("Maslov index", maslov_indices),
        ("invariant suites", invariants),
        ("evolved beam", evolved_beam),
    ];
    let results: Vec<(Verdict, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(_, f)| {
                s.spawn(move || {
                    let t0 = Instant::now();
                    let v = f();
                    (v, t0.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| (verdict(false, "panicked".into()), 0.0))).collect()
    });
    let mut out = std::io::stdout().lock();
    let mut failed = 0;
    for (i, ((name, _), (v, secs))) in criteria.iter().zip(&results).enumerate() {
        failed += !v.pass as usize;
        writeln!(out, "criterion {} {}: {} ({secs:.1} s): {}", i + 1, if v.pass { "PASS" } else { "FAIL" }, name, v.detail).unwrap();
    }
    writeln!(out, "{} of {} criteria pass", criteria.len() - failed, criteria.len()).unwrap();
    if failed > 0 {
        std::process::exit(1);
    }
}
