use magcgo::cgo::{cgo_chart, paired, CgoParams};
use magcgo::geometry::*;
use magcgo::identity::*;
use magcgo::presets::{Coefficients, Profile};
use magcgo::report::observed_orders;
use magcgo::{LabError, C64};
use proptest::prelude::*;

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn chart(n: [usize; 3]) -> CylinderChart {
    CylinderChart::preset("flat-cylinder", n).unwrap()
}

fn test_fields(ch: &CylinderChart) -> (ScalarField, ScalarField) {
    (
        ScalarField::from_fn(ch, |x| C64::new((x[0] + x[1]).cos(), x[2] * x[1])),
        ScalarField::from_fn(ch, |x| C64::new(x[0] * x[1], (x[2] - x[0]).sin())),
    )
}

#[test]
fn green_residual_vanishes_for_zero_fields() {
    let ch = chart([9, 17, 7]);
    let co = Coefficients::preset("smooth").unwrap();
    let (u, _) = test_fields(&ch);
    let z = ScalarField::zeros(&ch);
    assert_eq!(green_residual(&ch, &co.one_form(&ch), &co.potential(&ch), &u, &z).unwrap(), 0.0);
    assert_eq!(green_residual(&ch, &co.one_form(&ch), &co.potential(&ch), &z, &u).unwrap(), 0.0);
}

#[test]
fn green_residual_is_second_order() {
    for (preset, coeffs) in [("flat-cylinder", "smooth"), ("exp-warp", "smooth"), ("log-polar-image", "smooth")] {
        let mut grids = vec![];
        let mut res = vec![];
        for n in [1usize, 2, 4] {
            let ch = CylinderChart::preset(preset, [8 * n + 1, 16 * n + 1, 6 * n + 1]).unwrap();
            let co = Coefficients::preset(coeffs).unwrap();
            let (u, v) = test_fields(&ch);
            grids.push(ch.step(1));
            res.push(green_residual(&ch, &co.one_form(&ch), &co.potential(&ch), &u, &v).unwrap());
        }
        let orders = observed_orders(&grids, &res);
        assert!(orders.iter().all(|o| *o >= 1.8), "{preset}: {res:?} {orders:?}");
    }
}

#[test]
fn classical_green_formula_is_second_order_accurate() {
    let mut first = None;
    for n in [1usize, 2, 4] {
        let ch = chart([8 * n + 1, 16 * n + 1, 6 * n + 1]);
        let (u, v) = test_fields(&ch);
        let z = Coefficients::preset("zero").unwrap();
        let r = green_residual(&ch, &z.one_form(&ch), &z.potential(&ch), &u, &v).unwrap();
        let c = *first.get_or_insert(r / ch.step(1).powi(2));
        assert!(r <= 1.01 * c * ch.step(1).powi(2));
    }
}

#[test]
fn green_sides_separate_for_real_coefficients() {
    // u = v, A and q real: the volume side is 2i Im(Lu, u), purely imaginary
    let ch = chart([33, 65, 13]);
    let co = Coefficients::preset("smooth").unwrap();
    let (u, _) = test_fields(&ch);
    let s = green_sides(&ch, &co.one_form(&ch), &co.potential(&ch), &u, &u).unwrap();
    assert!(s.volume.re.abs() <= 1e-12 * s.volume.norm().max(1.0));
    assert!(s.residual() <= 1e-2 * s.volume.norm().max(1.0));
}

#[test]
fn potential_of_an_exact_form() {
    let ch = chart([9, 11, 7]);
    let delta = OneForm::from_real(&ch, |x| [x[1], x[0], 0.0]);
    let g = gauge_potential(&ch, &delta, 0.1).unwrap();
    let raw = ScalarField::from_real(&ch, |x| x[0] * x[1]);
    let reg = boundary_split(&ch, 1.0, 0.0).unwrap();
    let mean = reg.integrate(&trace(&ch, &raw).unwrap(), Subset::All) / reg.area(Subset::All);
    assert!(g.phi.sub(&raw.map(|v| v - mean)).max_abs() < 1e-13);
    assert!(g.path_gap < 1e-13);

    let z = gauge_potential(&ch, &OneForm::zeros(&ch), 0.1).unwrap();
    assert_eq!(z.phi.max_abs(), 0.0);
    assert_eq!(z.closedness, 0.0);
}

#[test]
fn non_closed_forms_are_rejected() {
    let ch = chart([9, 11, 7]);
    let delta = OneForm::from_real(&ch, |x| [0.0, 0.4 * x[0], 0.0]);
    match gauge_potential(&ch, &delta, 0.1) {
        Err(LabError::Domain(msg)) => assert!(msg.contains("not closed")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn sine_gauge_gradient_matches_differences() {
    let ch = chart([5, 5, 5]);
    let g = SineGauge::new(&ch, 0.3, [2.0, 1.0, 3.0]);
    let x = [0.31, 1.7, 0.1];
    let d = g.gradient(x);
    for a in 0..3 {
        let (mut p, mut m) = (x, x);
        p[a] += 1e-6;
        m[a] -= 1e-6;
        assert!((d[a] - (g.value(p) - g.value(m)) / 2e-6).abs() < 1e-8);
    }
    let boundary: Vec<usize> = (0..ch.len()).filter(|&m| ch.on_boundary(m)).collect();
    let phi = ScalarField::from_real(&ch, |x| g.value(x));
    assert!(phi.max_abs_on(&boundary) < 1e-15);
}

#[test]
fn gauge_potential_recovers_the_sine_gauge() {
    let ch = chart([41, 81, 13]);
    let g = SineGauge::new(&ch, 0.25, [1.0, 2.0, 1.0]);
    let delta = OneForm::from_real(&ch, |x| g.gradient(x));
    let p = gauge_potential(&ch, &delta, 0.1).unwrap();
    let want = ScalarField::from_real(&ch, |x| g.value(x));
    assert!(p.phi.sub(&want).max_abs() < 1e-4);
    assert!(p.boundary_max < 1e-4);
}

#[test]
fn matched_solution_is_a_phase_rotation() {
    let ch = chart([21, 41, 9]);
    let (u, _) = test_fields(&ch);
    assert_eq!(gauge_matched_solution(&ch, &u, &ScalarField::zeros(&ch), 1e-3).unwrap(), u);
    let g = SineGauge::new(&ch, 0.3, [1.0, 1.0, 1.0]);
    let phi = ScalarField::from_real(&ch, |x| g.value(x));
    let w = gauge_matched_solution(&ch, &u, &phi, 1e-3).unwrap();
    for m in (0..ch.len()).step_by(37) {
        assert!((w.data[m] - (-I * phi.data[m]).exp() * u.data[m]).norm() < 1e-15);
    }
    let shifted = phi.map(|v| v + 0.01);
    assert!(matches!(gauge_matched_solution(&ch, &u, &shifted, 1e-3), Err(LabError::Gauge(_))));
}

#[test]
fn gauge_conjugation_holds_to_discretization_error() {
    let ch = chart([41, 81, 21]);
    let co = Coefficients::preset("smooth").unwrap();
    let phi = ScalarField::from_real(&ch, |x| 0.5 * x[0] * x[1]);
    let (u, _) = test_fields(&ch);
    let gap = gauge_conjugation_gap(&ch, &co.one_form(&ch), &co.potential(&ch), &phi, &u).unwrap();
    assert!(gap <= 1e-3, "{gap}");
}

fn cgo_pair(scenario: &str, h: f64) -> (CylinderChart, ScenarioPair, magcgo::cgo::CgoSolution, magcgo::cgo::CgoSolution) {
    let ch = cgo_chart("flat-cylinder", h, 1.0, 9).unwrap();
    let pair = ScenarioPair::preset(scenario, &ch).unwrap();
    let params = CgoParams::new(&ch, h, 1.0);
    let (e1, e2) = pair.extensions(params.tau());
    let (a1, a2) = (pair.first.one_form(&ch), pair.second.one_form(&ch));
    let (q1, q2) = (pair.first.potential(&ch), pair.second.potential(&ch));
    let (u1, u2) = paired(&ch, (&a1, &e1, &q1), (&a2, &e2, &q2), &params).unwrap();
    (ch, pair, u1, u2)
}

#[test]
fn identical_coefficients_give_a_zero_identity() {
    let ch = cgo_chart("flat-cylinder", 0.4, 1.0, 9).unwrap();
    let pair = ScenarioPair::gauge("trivial", Coefficients::preset("smooth").unwrap(), SineGauge::new(&ch, 0.0, [1.0; 3]));
    let params = CgoParams::new(&ch, 0.4, 1.0);
    let (e1, e2) = pair.extensions(params.tau());
    let (a, q) = (pair.first.one_form(&ch), pair.first.potential(&ch));
    let (u1, u2) = paired(&ch, (&a, &e1, &q), (&a, &e2, &q), &params).unwrap();
    let lhs = integral_identity_lhs(&ch, &pair, &u1, &u2).unwrap();
    assert_eq!(lhs.total(), C64::new(0.0, 0.0));
    let reg = boundary_split(&ch, 1.0, 0.3).unwrap();
    let bt = boundary_terms(&ch, &pair, &u1, &u2, &u1.envelope(), &reg).unwrap();
    assert_eq!((bt.j_h, bt.k_h), (C64::new(0.0, 0.0), C64::new(0.0, 0.0)));
}

#[test]
fn envelope_form_matches_explicit_exponentials() {
    // the shifted stencils reproduce the discrete derivative of e^{∓ρ/h}B exactly
    let (ch, pair, u1, u2) = cgo_pair("gauge-smooth", 0.4);
    let env = integral_identity_lhs_shifted(&ch, &pair, &u1, &u2).unwrap();
    let naive = integral_identity_fields(&ch, &pair, &u1.field(&ch), &u2.field(&ch)).unwrap();
    assert!((env.total() - naive.total()).norm() <= 1e-8 * env.l1);
    assert!((env.l1 - naive.l1).abs() <= 1e-8 * env.l1);
}

#[test]
fn continuum_envelope_form_converges_to_the_explicit_one() {
    // with dρ taken exactly the difference is the discretization error of D(e^{ρ/h})
    let mut gaps = vec![];
    for scale in [1.0, 2.0] {
        let ch = cgo_chart("flat-cylinder", 0.4, scale, 9).unwrap();
        let pair = ScenarioPair::preset("gauge-smooth", &ch).unwrap();
        let params = CgoParams::new(&ch, 0.4, 1.0);
        let (e1, e2) = pair.extensions(params.tau());
        let (a1, a2) = (pair.first.one_form(&ch), pair.second.one_form(&ch));
        let (q1, q2) = (pair.first.potential(&ch), pair.second.potential(&ch));
        let (u1, u2) = paired(&ch, (&a1, &e1, &q1), (&a2, &e2, &q2), &params).unwrap();
        let env = integral_identity_lhs(&ch, &pair, &u1, &u2).unwrap();
        let sh = integral_identity_lhs_shifted(&ch, &pair, &u1, &u2).unwrap();
        gaps.push((env.total() - sh.total()).norm() / env.l1);
    }
    assert!(gaps[1] < 0.35 * gaps[0], "{gaps:?}");
}

#[test]
fn identity_and_boundary_side_agree_on_a_gauge_pair() {
    let (ch, pair, u1, u2) = cgo_pair("gauge-bump", 0.2);
    let pot = gauge_potential(&ch, &pair.delta(&ch).scale(C64::new(-1.0, 0.0)), 0.1).unwrap();
    let w2 = gauge_matched_solution(&ch, &u1.envelope(), &pot.phi, 1e-3).unwrap();
    let reg = boundary_split(&ch, 1.0, 0.3).unwrap();
    let lhs = integral_identity_lhs(&ch, &pair, &u1, &u2).unwrap();
    let bt = boundary_terms(&ch, &pair, &u1, &u2, &w2, &reg).unwrap();
    assert!((lhs.total() - bt.rhs).norm() <= 1e-2 * (lhs.l1 + bt.l1));
    assert!(bt.j_h.norm() > 0.0 && bt.k_h.norm() > 0.0);

    // full data: nothing is left unmeasured
    let full = boundary_split(&ch, 1.0, 10.0).unwrap();
    let bt = boundary_terms(&ch, &pair, &u1, &u2, &w2, &full).unwrap();
    assert_eq!((bt.j_h, bt.k_h), (C64::new(0.0, 0.0), C64::new(0.0, 0.0)));
}

#[test]
fn pairing_and_scenario_errors() {
    let (ch, pair, u1, u2) = cgo_pair("gauge-smooth", 0.4);
    assert!(matches!(integral_identity_lhs(&ch, &pair, &u1, &u1), Err(LabError::Pairing(_))));
    assert!(matches!(integral_identity_lhs(&ch, &pair, &u2, &u1), Err(LabError::Pairing(_))));
    let generic = ScenarioPair::preset("generic", &ch).unwrap();
    let reg = boundary_split(&ch, 1.0, 0.3).unwrap();
    assert!(matches!(boundary_terms(&ch, &generic, &u1, &u2, &u1.envelope(), &reg), Err(LabError::Unsupported(_))));
    assert!(matches!(ScenarioPair::preset("nope", &ch), Err(LabError::Config(_))));
}

#[test]
fn gauge_suite_small_ladder() {
    let s = GaugeSetup::new("flat-cylinder", "gauge-smooth");
    let g = gauge_suite(&s, &[0.4, 0.2]).unwrap();
    assert!(g.j_report.verdict && g.k_report.verdict);
    assert_eq!(g.functionals.len(), 24);
    assert!(g.functional_max() <= 1e-2, "{}", g.functional_max());
    assert!(g.identity_gap() <= 2e-2);
}

#[test]
fn magnetic_functional_separates_exact_and_non_exact_forms() {
    let ch = chart([41, 81, 9]);
    let phi = ScalarField::zeros(&ch);
    let b = Profile::default_for(&ch);
    assert_eq!(magnetic_limit_functional(&ch, &OneForm::zeros(&ch), &phi, 1.0, &b).unwrap(), C64::new(0.0, 0.0));

    let generic = ScenarioPair::preset("generic", &ch).unwrap();
    let delta = generic.delta(&ch);
    let phase = combined_phase(&ch, &generic, 0.1, magcgo::dbar::CellRule::Centered).unwrap();
    let best = probe_family(&ch, &[0.0, 1.0, 2.0], 3)
        .iter()
        .map(|(l, b)| {
            let (v, bound) = magnetic_functional_parts(&ch, &delta, &phase, *l, b).unwrap();
            v.norm() / bound
        })
        .fold(0.0, f64::max);
    assert!(best > 0.05, "{best}");
}

#[test]
fn electric_data_oracles() {
    let ch = CylinderChart::preset("exp-warp", [11, 13, 7]).unwrap();
    let b = Profile::default_for(&ch);
    assert_eq!(electric_data(&ch, &ScalarField::zeros(&ch), 1.0, &b).unwrap(), C64::new(0.0, 0.0));

    // a single node carries c · b · flat weight
    let m = ch.idx(4, 6, 3);
    let mut dq = ScalarField::zeros(&ch);
    dq.data[m] = C64::new(2.0, 0.0);
    let want = 2.0 * ch.c()[m] * b.eval(&ch, ch.coords(m)[2]) * ch.flat_weights()[m];
    assert!((electric_data(&ch, &dq, 0.0, &b).unwrap() - want).norm() < 1e-15);

    // odd in x1 about the center with c ≡ 1
    let fl = chart([11, 13, 7]);
    let odd = ScalarField::from_real(&fl, |x| (x[0] - 0.5) * x[1]);
    assert!(electric_data(&fl, &odd, 0.0, &Profile::default_for(&fl)).unwrap().norm() < 1e-15);
}

#[test]
fn advection_reduction_and_certificate() {
    let ch = chart([41, 81, 13]);
    let x = magcgo::presets::vector_field("smooth", &ch).unwrap();
    let (u, _) = test_fields(&ch);
    let same = advection_certificate(&ch, &x, &x, &u, 0.1).unwrap();
    assert!(same.operator_gap <= 1e-3, "{}", same.operator_gap);
    assert_eq!(same.certificate(), 0.0);
    assert_eq!(same.dq.max_abs(), 0.0);

    let g = SineGauge::new(&ch, 0.2, [1.0, 1.0, 1.0]);
    let grad = sharp(&ch, &OneForm::from_real(&ch, |p| g.gradient(p))).unwrap();
    let x2 = VectorField { shape: x.shape, comp: [0, 1, 2].map(|a| x.comp[a].iter().zip(&grad.comp[a]).map(|(p, q)| p + q).collect()) };
    let diff = advection_certificate(&ch, &x, &x2, &u, 0.1).unwrap();
    assert!(diff.phi_max > 0.1);
    assert!(diff.dq.max_abs() > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn path_orderings_agree_on_exact_polynomial_forms(c in prop::collection::vec(-1.0f64..1.0, 8)) {
        let ch = chart([7, 9, 6]);
        // f = c0 x1³ + c1 x1²r + c2 r³ + c3 x1 r θ + c4 θ³ + c5 r θ² + c6 x1 + c7 θ
        let grad = |x: [f64; 3]| {
            let (a, r, t) = (x[0], x[1], x[2]);
            [
                3.0 * c[0] * a * a + 2.0 * c[1] * a * r + c[3] * r * t + c[6],
                c[1] * a * a + 3.0 * c[2] * r * r + c[3] * a * t + c[5] * t * t,
                c[3] * a * r + 3.0 * c[4] * t * t + 2.0 * c[5] * r * t + c[7],
            ]
        };
        let delta = OneForm::from_real(&ch, grad);
        let g = gauge_potential(&ch, &delta, 1.0).unwrap();
        prop_assert!(g.path_gap <= 1e-8);
    }

    #[test]
    fn electric_data_is_linear(s in -3.0f64..3.0, t in -3.0f64..3.0, lambda in -4.0f64..4.0) {
        let ch = CylinderChart::preset("exp-warp", [9, 9, 5]).unwrap();
        let b = Profile::default_for(&ch);
        let f = ScalarField::from_real(&ch, |x| x[0] * x[1]);
        let g = ScalarField::from_fn(&ch, |x| C64::new(x[2].cos(), x[0]));
        let combo = f.scale_re(s).add(&g.scale(C64::new(0.0, t)));
        let lhs = electric_data(&ch, &combo, lambda, &b).unwrap();
        let rhs = electric_data(&ch, &f, lambda, &b).unwrap() * s + electric_data(&ch, &g, lambda, &b).unwrap() * C64::new(0.0, t);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }
}
