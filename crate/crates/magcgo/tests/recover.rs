use magcgo::geometry::*;
use magcgo::identity::{electric_data, ScenarioPair};
use magcgo::presets::{bump_q, Profile};
use magcgo::recover::*;
use magcgo::{LabError, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn chart(n: [usize; 3]) -> CylinderChart {
    CylinderChart::preset("flat-cylinder", n).unwrap()
}

fn random_field(ch: &CylinderChart, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..ch.len()).map(|_| C64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
    ScalarField::from_vec(ch, data).unwrap()
}

fn operator(ch: &CylinderChart, lo: i32, hi: i32, nb: usize) -> DataOperator {
    assemble_data_operator(ch, &lambda_ladder(lo, hi), &Profile::family(ch, nb)).unwrap()
}

#[test]
fn single_row_on_constant_equals_electric_data() {
    let ch = chart([8, 8, 4]);
    let b = Profile::default_for(&ch);
    let op = assemble_data_operator(&ch, &[1.5], &[b]).unwrap();
    let one = ScalarField::constant(&ch, C64::new(1.0, 0.0));
    assert_eq!(op.apply(&one).unwrap()[0], electric_data(&ch, &one, 1.5, &b).unwrap());
}

#[test]
fn operator_matches_electric_data_on_random_fields() {
    for preset in ["flat-cylinder", "exp-warp"] {
        let ch = CylinderChart::preset(preset, [8, 8, 4]).unwrap();
        let op = operator(&ch, -3, 3, 3);
        for seed in 0..5 {
            let dq = random_field(&ch, seed);
            let got = op.apply(&dq).unwrap();
            for ((l, b), g) in op.probes.iter().zip(&got) {
                let want = electric_data(&ch, &dq, *l, b).unwrap();
                assert!((g - want).norm() <= 1e-12 * want.norm().max(1.0), "{preset} λ={l}");
            }
        }
    }
}

#[test]
fn zero_lambda_row_is_real_and_sums_to_weighted_volume() {
    let ch = chart([9, 9, 7]);
    let b = Profile::default_for(&ch);
    let op = assemble_data_operator(&ch, &[0.0], &[b]).unwrap();
    assert!(op.row(0).iter().all(|z| z.im == 0.0));
    let w: Vec<Vec<f64>> = ch.axes.iter().map(|a| a.trapezoid_weights()).collect();
    let mut want = 0.0;
    for m in 0..ch.len() {
        let [i, j, k] = ch.unidx(m);
        let x = ch.coords(m);
        want += w[0][i] * w[1][j] * w[2][k] * ch.c()[m] * b.eval(&ch, x[2]);
    }
    let got: f64 = op.row(0).iter().map(|z| z.re).sum();
    assert!((got - want).abs() <= 1e-13 * want);
}

#[test]
fn empty_probe_family_is_rejected() {
    let ch = chart([8, 8, 4]);
    assert!(matches!(assemble_data_operator(&ch, &[], &Profile::family(&ch, 2)), Err(LabError::Parameter(_))));
    assert!(matches!(assemble_data_operator(&ch, &[1.0], &[]), Err(LabError::Parameter(_))));
}

#[test]
fn duplicated_rows_keep_the_rank() {
    let ch = chart([8, 8, 4]);
    let op = operator(&ch, -2, 2, 2);
    let mut probes = op.probes.clone();
    probes.extend(op.probes.iter().take(4).copied());
    let dup = assemble_from_probes(&ch, probes).unwrap();
    assert_eq!(injectivity_report(&op).unwrap().rank, injectivity_report(&dup).unwrap().rank);
}

#[test]
fn coarse_operator_report() {
    let ch = chart([8, 8, 4]);
    let op = operator(&ch, -8, 7, 4);
    let r = injectivity_report(&op).unwrap();
    assert_eq!((r.rows, r.cols), (128, 256));
    assert!(r.sigma_max > 0.0 && r.sigma_min >= 0.0);
    assert!(r.rank > 0 && r.rank <= r.rows);
    // 128 real rows cannot pin down 256 unknowns.
    assert!(!r.injective());
    assert_eq!(r.singular_values.len(), 128);
    assert!(r.singular_values.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn theta_only_probes_collapse_the_rank() {
    let ch = chart([8, 8, 4]);
    let op = operator(&ch, -4, 4, 4);
    let full = injectivity_report(&op).unwrap();
    let flat = injectivity_report(&theta_only(&op)).unwrap();
    assert!(flat.rank <= 4);
    assert!(flat.rank < full.rank);
}

#[test]
fn zero_truth_recovers_zero() {
    let ch = chart([8, 8, 4]);
    let op = operator(&ch, -3, 3, 3);
    let dq = ScalarField::zeros(&ch);
    let data = op.apply(&dq).unwrap();
    let (est, diag) = recover_q(&ch, &op, &data, Regularizer::Tikhonov { reg: 1e-6 }, Some(&dq)).unwrap();
    assert_eq!(est.max_abs(), 0.0);
    assert_eq!(diag.relative_error, Some(0.0));
}

#[test]
fn negative_regularization_is_rejected() {
    let ch = chart([8, 8, 4]);
    let op = operator(&ch, -1, 1, 2);
    let data = vec![C64::new(0.0, 0.0); op.rows()];
    let err = recover_q(&ch, &op, &data, Regularizer::Tikhonov { reg: -1e-3 }, None);
    assert!(matches!(err, Err(LabError::Parameter(_))));
    let err = recover_q(&ch, &op, &data, Regularizer::Tsvd { rel_cutoff: f64::NAN }, None);
    assert!(matches!(err, Err(LabError::Parameter(_))));
}

// The minimum-L² solution reproduces any truth of the form W⁻¹Aᵀy.
#[test]
fn row_space_truth_is_recovered() {
    let ch = chart([8, 8, 4]);
    let op = operator(&ch, -2, 2, 3);
    let w = ch.volume_weights();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let y: Vec<C64> = (0..op.rows()).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let truth = ScalarField::from_vec(
        &ch,
        (0..ch.len())
            .map(|m| {
                let s: f64 = (0..op.rows()).map(|i| (op.row(i)[m].conj() * y[i]).re / op.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).sum();
                C64::new(s / w[m], 0.0)
            })
            .collect(),
    )
    .unwrap();
    let data = op.apply(&truth).unwrap();
    for reg in [Regularizer::Tikhonov { reg: 1e-8 }, Regularizer::Tsvd { rel_cutoff: 1e-10 }] {
        let (_, diag) = recover_q(&ch, &op, &data, reg, Some(&truth)).unwrap();
        assert!(diag.relative_error.unwrap() <= 1e-6, "{reg:?}: {:?}", diag.relative_error);
    }
}

#[test]
fn error_decreases_with_more_probes() {
    let ch = chart([8, 8, 4]);
    let dq = ScalarField::from_real(&ch, bump_q);
    let mut errs = vec![];
    for k in 1..=4 {
        let op = operator(&ch, -k, k, 3);
        let data = op.apply(&dq).unwrap();
        let (_, d) = recover_q(&ch, &op, &data, Regularizer::Tikhonov { reg: 1e-6 }, Some(&dq)).unwrap();
        errs.push(d.relative_error.unwrap());
    }
    assert!(errs.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)), "{errs:?}");
    assert!(errs[3] < errs[0]);
}

#[test]
fn noisy_sweep_gives_monotone_l_curve() {
    let mut s = RecoverySetup::new("flat-cylinder", [8, 8, 4]);
    s.lambdas = lambda_ladder(-4, 4);
    s.n_profiles = 3;
    let run = synthetic_recovery(&s, bump_q).unwrap();
    assert!(run.noisy_curve.is_monotone());
    assert_eq!(run.noisy_curve.points.len(), s.l_curve_regs.len());
    let mut buf = Vec::new();
    run.noisy_curve.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("reg,residual_norm,solution_norm,relative_error\n"));
    assert_eq!(text.lines().count(), s.l_curve_regs.len() + 1);
    assert!(l_curve(&run.chart, &run.op, &[], &[1.0, 0.5], None).is_err());
}

#[test]
fn noise_has_requested_level_and_is_seeded() {
    let ch = chart([8, 8, 4]);
    let op = operator(&ch, -2, 2, 2);
    let data = op.apply(&ScalarField::from_real(&ch, bump_q)).unwrap();
    let a = add_noise(&op, &data, 0.01, 5);
    assert_eq!(a, add_noise(&op, &data, 0.01, 5));
    assert_ne!(a, add_noise(&op, &data, 0.01, 6));
    let scale: Vec<f64> = (0..op.rows()).map(|i| op.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    let norm = |v: Vec<C64>| v.iter().zip(&scale).map(|(z, s)| (z / s).norm_sqr()).sum::<f64>().sqrt();
    let rel = norm(a.iter().zip(&data).map(|(x, y)| x - y).collect()) / norm(data.clone());
    assert!((rel - 0.01).abs() < 1e-12);
}

#[test]
fn csv_triple_round_trips() {
    let ch = chart([8, 8, 4]);
    let mut probes = probe_grid(&[-1.0, 2.0], &Profile::family(&ch, 2));
    probes.push((0.5, Profile::Trig { k: 2 }));
    let op = assemble_from_probes(&ch, probes).unwrap();
    let dir = std::env::temp_dir().join(format!("magcgo-triple-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let paths = op.write_triple(&dir, "data").unwrap();
    assert!(paths.iter().all(|p| p.exists()));
    let back = DataOperator::read_triple(&dir, "data").unwrap();
    assert_eq!(back.shape, op.shape);
    assert_eq!(back.probes, op.probes);
    assert_eq!(back.entries, op.entries);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn certify_closed_on_zero_and_gauge_forms() {
    let ch = chart([17, 33, 9]);
    let probes = probe_grid(&lambda_ladder(-3, 4), &Profile::family(&ch, 3));
    let zero_phase = ScalarField::zeros(&ch);
    let c = certify_closed(&ch, &OneForm::zeros(&ch), &zero_phase, &probes).unwrap();
    assert_eq!((c.curl_norm, c.functional_max), (0.0, 0.0));

    let pair = ScenarioPair::preset("gauge-smooth", &ch).unwrap();
    let delta = pair.delta(&ch);
    let c = certify_closed(&ch, &delta, &zero_phase, &probes).unwrap();
    let scale = delta.comp.iter().map(|v| l2_norm(&ch, &ScalarField { shape: delta.shape, data: v.clone() })).sum::<f64>();
    assert!(c.curl_norm <= 0.1 * scale, "{} vs {scale}", c.curl_norm);
    assert!(c.functional_max_relative <= 1e-2, "{c:?}");
}

#[test]
fn certify_closed_flags_non_closed_forms() {
    let ch = chart([17, 33, 9]);
    let probes = probe_grid(&lambda_ladder(-3, 4), &Profile::family(&ch, 3));
    let zero_phase = ScalarField::zeros(&ch);
    // f(x₁, r)dθ is not closed, but it is invisible to ⟨·, dρ⟩.
    let theta_form = OneForm::from_real(&ch, |x| [0.0, 0.0, x[0] * x[1]]);
    let c = certify_closed(&ch, &theta_form, &zero_phase, &probes).unwrap();
    assert!(c.curl_norm > 0.1);
    assert!(c.functional_max <= 1e-12);
    let x1_form = OneForm::from_real(&ch, |x| [x[1] * x[1], 0.0, 0.0]);
    let c = certify_closed(&ch, &x1_form, &zero_phase, &probes).unwrap();
    assert!(c.curl_norm > 0.1);
    assert!(c.functional_max_relative > 0.05, "{c:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn operator_is_linear(s1 in 0u64..1000, s2 in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let ch = chart([6, 6, 4]);
        let op = operator(&ch, -2, 2, 2);
        let (x, y) = (random_field(&ch, s1), random_field(&ch, s2));
        let lhs = op.apply(&x.scale_re(a).add(&y.scale_re(b))).unwrap();
        let (fx, fy) = (op.apply(&x).unwrap(), op.apply(&y).unwrap());
        for ((l, p), q) in lhs.iter().zip(&fx).zip(&fy) {
            let want = p * a + q * b;
            prop_assert!((l - want).norm() <= 1e-12 * (p.norm() * a.abs() + q.norm() * b.abs()).max(1e-300));
        }
    }

    #[test]
    fn tikhonov_residual_grows_with_reg(seed in 0u64..1000) {
        let ch = chart([6, 6, 4]);
        let op = operator(&ch, -2, 2, 2);
        let data = op.apply(&random_field(&ch, seed)).unwrap();
        let curve = l_curve(&ch, &op, &data, &log_ladder(1e-6, 1.0, 7), None).unwrap();
        prop_assert!(curve.is_monotone());
    }
}
