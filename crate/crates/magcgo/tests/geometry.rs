use magcgo::geometry::*;
use magcgo::C64;
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_6, PI};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn chart(name: &str, n: usize) -> CylinderChart {
    CylinderChart::preset(name, [n, n, n]).unwrap()
}

fn max_err_on(f: &ScalarField, g: impl Fn([f64; 3]) -> C64, ch: &CylinderChart, nodes: &[usize]) -> f64 {
    nodes.iter().map(|&m| (f.data[m] - g(ch.coords(m))).norm()).fold(0.0, f64::max)
}

#[test]
fn constants_are_harmonic() {
    for name in ["flat-cylinder", "exp-warp"] {
        let ch = chart(name, 9);
        let u = ScalarField::constant(&ch, c(3.5));
        let l = laplace_beltrami(&ch, &u).unwrap();
        assert!(l.max_abs() < 1e-10, "{name}: {}", l.max_abs());
    }
}

#[test]
fn flat_laplacian_of_x1_squared_is_two() {
    let ch = chart("flat-cylinder", 11);
    let u = ScalarField::from_real(&ch, |x| x[0] * x[0]);
    let l = laplace_beltrami(&ch, &u).unwrap();
    let all: Vec<usize> = (0..ch.len()).collect();
    assert!(max_err_on(&l, |_| c(2.0), &ch, &all) < 1e-9);
}

#[test]
fn warped_laplacian_of_x1_matches_hand_formula() {
    // |g|^{-1/2} ∂1(|g|^{1/2} g^{11}) with c = e^{2x1}: c^{-3/2} ∂1 c^{1/2} = e^{-2 x1}
    let mut errs = Vec::new();
    for n in [11, 21, 41] {
        let ch = CylinderChart::preset("exp-warp", [n, 5, 5]).unwrap();
        let u = ScalarField::from_real(&ch, |x| x[0]);
        let l = laplace_beltrami(&ch, &u).unwrap();
        let m = ch.idx((n - 1) / 2, 2, 2);
        let x = ch.coords(m);
        errs.push((l.data[m].re - (-2.0 * x[0]).exp()).abs());
    }
    assert!(errs[2] < 1e-3);
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order > 1.8, "order {order} from {errs:?}");
    }
}

#[test]
fn laplacian_converges_at_second_order_including_faces() {
    // u = sin(x1) r² cos θ on the warped chart; Δ_g by hand:
    // c^{-1}[∂1²u + ∂1(log c^{1/2})∂1 u + r^{-1}∂r(r ∂r u) + r^{-2}∂θ² u]
    let exact = |x: [f64; 3]| {
        let (s, co) = x[0].sin_cos();
        let cw = (2.0 * x[0]).exp();
        let d11 = -s * x[1] * x[1] * x[2].cos();
        let d1 = co * x[1] * x[1] * x[2].cos();
        let rr = 4.0 * s * x[2].cos();
        let tt = -s * x[2].cos();
        c((d11 + d1 + rr + tt) / cw)
    };
    let mut errs = Vec::new();
    for n in [9, 17, 33] {
        let ch = chart("exp-warp", n);
        let u = ScalarField::from_real(&ch, |x| x[0].sin() * x[1] * x[1] * x[2].cos());
        let l = laplace_beltrami(&ch, &u).unwrap();
        let all: Vec<usize> = (0..ch.len()).collect();
        errs.push(max_err_on(&l, exact, &ch, &all));
    }
    assert!((errs[0] / errs[1]).log2() > 1.7, "{errs:?}");
    assert!((errs[1] / errs[2]).log2() > 1.7, "{errs:?}");
}

#[test]
fn codifferential_examples() {
    let ch = chart("flat-cylinder", 9);
    let z = OneForm::zeros(&ch);
    assert_eq!(codifferential(&ch, &z).unwrap().max_abs(), 0.0);
    // α = x1 dx1: d*α = −r^{-1}∂1(r x1) = −1
    let a = OneForm::from_real(&ch, |x| [x[0], 0.0, 0.0]);
    let d = codifferential(&ch, &a).unwrap();
    let all: Vec<usize> = (0..ch.len()).collect();
    assert!(max_err_on(&d, |_| c(-1.0), &ch, &all) < 1e-12);
}

#[test]
fn codifferential_of_differential_is_minus_laplacian() {
    let ch = chart("exp-warp", 17);
    let u = ScalarField::from_real(&ch, |x| (x[0] + 0.3 * x[1]).sin() * (2.0 * x[2]).cos());
    let lap = laplace_beltrami(&ch, &u).unwrap();
    let dd = codifferential(&ch, &differential(&ch, &u).unwrap()).unwrap();
    let inner_nodes = ch.interior_nodes(2);
    let diff = inner_nodes.iter().map(|&m| (dd.data[m] + lap.data[m]).norm()).fold(0.0, f64::max);
    // both are O(grid²) approximations of the same quantity
    assert!(diff < 0.05, "{diff}");
}

#[test]
fn differential_examples() {
    let ch = chart("flat-cylinder", 9);
    let u = ScalarField::constant(&ch, c(2.0));
    assert!(differential(&ch, &u).unwrap().max_abs() < 1e-12);
    let x1 = ScalarField::from_real(&ch, |x| x[0]);
    let d = differential(&ch, &x1).unwrap();
    for m in 0..ch.len() {
        assert!((d.comp[0][m] - c(1.0)).norm() < 1e-12);
        assert!(d.comp[1][m].norm() < 1e-12 && d.comp[2][m].norm() < 1e-12);
    }
    let p = ScalarField::from_real(&ch, |x| x[0] * x[1]);
    let d = differential(&ch, &p).unwrap();
    for m in 0..ch.len() {
        let x = ch.coords(m);
        assert!((d.comp[0][m] - c(x[1])).norm() < 1e-12);
        assert!((d.comp[1][m] - c(x[0])).norm() < 1e-12);
    }
}

#[test]
fn inner_products_of_coordinate_forms() {
    let ch = chart("exp-warp", 7);
    let dx1 = OneForm::from_real(&ch, |_| [1.0, 0.0, 0.0]);
    let dr = OneForm::from_real(&ch, |_| [0.0, 1.0, 0.0]);
    let a = inner(&ch, &dx1, &dx1).unwrap();
    let b = inner(&ch, &dr, &dr).unwrap();
    for m in 0..ch.len() {
        let cv = (2.0 * ch.coords(m)[0]).exp();
        assert!((a.data[m].re - 1.0 / cv).abs() < 1e-14);
        assert!((b.data[m].re - 1.0 / cv).abs() < 1e-14);
    }
}

#[test]
fn eikonal_is_exact_on_all_presets() {
    for name in ["flat-cylinder", "exp-warp", "log-polar-image"] {
        let ch = chart(name, 9);
        let rho = ScalarField::from_fn(&ch, |x| C64::new(x[0], x[1]));
        let d = differential(&ch, &rho).unwrap();
        let e = inner(&ch, &d, &d).unwrap();
        assert!(e.max_abs() <= 1e-12, "{name}: {}", e.max_abs());
    }
}

#[test]
fn flat_of_unit_x1_vector() {
    let ch = chart("flat-cylinder", 5);
    let e1 = VectorField::from_real(&ch, |_| [1.0, 0.0, 0.0]);
    let f = flat(&ch, &e1).unwrap();
    assert!(f.comp[0].iter().all(|v| *v == c(1.0)));
    let ch = chart("exp-warp", 5);
    let f = flat(&ch, &VectorField::from_real(&ch, |_| [1.0, 0.0, 0.0])).unwrap();
    for m in 0..ch.len() {
        let e = (2.0 * ch.coords(m)[0]).exp();
        assert!((f.comp[0][m].re - e).abs() <= 1e-14 * e);
    }
}

#[test]
fn magnetic_apply_examples() {
    let ch = chart("exp-warp", 9);
    let u = ScalarField::from_real(&ch, |x| x[0] * x[1] + x[2]);
    let z = OneForm::zeros(&ch);
    let q0 = ScalarField::zeros(&ch);
    let l = magnetic_apply(&ch, &z, &q0, &u).unwrap();
    let lap = laplace_beltrami(&ch, &u).unwrap();
    for m in 0..ch.len() {
        assert!((l.data[m] + lap.data[m]).norm() < 1e-12);
    }
    // u ≡ 1: i d*A + ⟨A, A⟩ + q
    let a = OneForm::from_real(&ch, |x| [x[1], x[0] * x[0], 0.2]);
    let q = ScalarField::from_real(&ch, |x| x[2]);
    let one = ScalarField::constant(&ch, c(1.0));
    let l = magnetic_apply(&ch, &a, &q, &one).unwrap();
    let ds = codifferential(&ch, &a).unwrap();
    let aa = inner(&ch, &a, &a).unwrap();
    for m in 0..ch.len() {
        let e = C64::i() * ds.data[m] + aa.data[m] + q.data[m];
        assert!((l.data[m] - e).norm() < 1e-10);
    }
}

#[test]
fn magnetic_apply_gauge_plane_wave() {
    // flat chart, A = dx1, u = e^{-i x1}: u − 2u + u = 0
    let mut errs = Vec::new();
    for n in [9, 17, 33] {
        let ch = chart("flat-cylinder", n);
        let a = OneForm::from_real(&ch, |_| [1.0, 0.0, 0.0]);
        let q = ScalarField::zeros(&ch);
        let u = ScalarField::from_fn(&ch, |x| C64::new(0.0, -x[0]).exp());
        let l = magnetic_apply(&ch, &a, &q, &u).unwrap();
        errs.push(l.max_abs_on(&ch.interior_nodes(1)));
    }
    assert!(errs[2] < 1e-3);
    assert!(errs[1] / errs[2] > 3.5, "{errs:?}");
}

#[test]
fn magnetic_apply_imaginary_part_from_first_order_terms() {
    let ch = chart("exp-warp", 9);
    let a = OneForm::from_real(&ch, |x| [x[1].sin(), x[0], 0.3]);
    let q = ScalarField::from_real(&ch, |x| x[0] * x[2]);
    let u = ScalarField::from_real(&ch, |x| (x[0] * x[1]).cos());
    let t = magnetic_terms(&ch, &a, &q, &u).unwrap();
    let real_part = t.neg_laplacian.add(&t.potential);
    assert!(real_part.data.iter().all(|v| v.im.abs() < 1e-12));
    let full = t.total();
    let im = t.codiff.add(&t.transport);
    for m in 0..ch.len() {
        assert!((full.data[m].im - im.data[m].im).abs() < 1e-10);
    }
}

#[test]
fn volume_quadrature() {
    let ch = CylinderChart::new(Axis::new(0.0, 1.0, 5), Axis::new(1.0, 2.0, 5), Axis::new(0.0, 1.0, 5), Warp::Constant(1.0)).unwrap();
    let one = ScalarField::constant(&ch, c(1.0));
    // ∫ r dx1 dr dθ over [0,1]×[1,2]×[0,1] = 3/2, trapezoid exact for linear r
    assert!((integrate_volume(&ch, &one).unwrap().re - 1.5).abs() < 1e-14);
    let mut errs = Vec::new();
    for n in [11, 21, 41] {
        let ch = chart("exp-warp", n);
        let one = ScalarField::constant(&ch, c(1.0));
        let exact = ((3f64).exp() - 1.0) / 3.0 * 4.0 * (PI / 3.0);
        errs.push((integrate_volume(&ch, &one).unwrap().re - exact).abs() / exact);
    }
    assert!(errs[2] < 1e-3 && errs[1] / errs[2] > 3.8, "{errs:?}");
    // odd integrand on a chart symmetric in x1 with even warp
    let ch = CylinderChart::new(Axis::new(-1.0, 1.0, 9), Axis::new(1.0, 3.0, 5), Axis::new(-FRAC_PI_6, FRAC_PI_6, 5), Warp::Constant(2.0)).unwrap();
    let f = ScalarField::from_real(&ch, |x| x[0].powi(3) * x[1]);
    assert!(integrate_volume(&ch, &f).unwrap().norm() < 1e-13);
}

#[test]
fn coarse_grid_is_rejected() {
    let r = CylinderChart::new(Axis::new(0.0, 1.0, 2), Axis::new(1.0, 2.0, 5), Axis::new(0.0, 1.0, 5), Warp::Constant(1.0));
    assert!(matches!(r, Err(magcgo::LabError::Config(_))));
    let r = CylinderChart::new(Axis::new(0.0, 1.0, 5), Axis::new(0.0, 2.0, 5), Axis::new(0.0, 1.0, 5), Warp::Constant(1.0));
    assert!(r.is_err());
}

#[test]
fn log_polar_examples() {
    let p = log_polar_map(&[[0.0, 0.6, 0.8], [0.0, 0.0, std::f64::consts::E]]).unwrap();
    assert!(p[0].y1.abs() < 1e-15);
    assert!((p[1].y1 - 1.0).abs() < 1e-15);
    assert!((p[1].warp - std::f64::consts::E.powi(2)).abs() < 1e-13);
    assert!(log_polar_map(&[[0.0, 0.0, 0.0]]).is_err());
}

#[test]
fn log_polar_laplacians_agree_with_symbolic_chain_rule() {
    use magcgo::geometry::logpolar::*;
    let pts = [[0.3, 0.2, 1.1], [-0.5, 0.4, 0.7], [1.2, -0.3, 0.5], [0.1, 0.1, 2.0], [-0.8, -0.9, 0.3]];
    let mapped = log_polar_map(&pts).unwrap();
    // u = x3 = e^{y1} cos(polar): symbolic Δ_g = 2e^{-y1}cos − 2e^{-y1}cos = 0
    let u = |x: [f64; 3]| x[2];
    let uy = |y: [f64; 3]| y[0].exp() * y[1].cos();
    for y in &mapped {
        let v = laplace_beltrami_at(&warped_sphere_metric, &uy, y.coords(), 1e-3);
        assert!(v.abs() < 1e-6, "{v}");
    }
    assert!(laplacian_discrepancy(&pts, &u).unwrap() < 1e-6);
    // |x|² = e^{2 y1}: Δ_g = e^{-3y1} ∂1(e^{y1} 2 e^{2y1}) = 6
    for y in &mapped {
        let v = laplace_beltrami_at(&warped_sphere_metric, &|p: [f64; 3]| (2.0 * p[0]).exp(), y.coords(), 1e-3);
        assert!((v - 6.0).abs() < 1e-6, "{v}");
    }
    let u2 = |x: [f64; 3]| x[0] * x[0] * x[2] + x[1];
    assert!(laplacian_discrepancy(&pts, &u2).unwrap() < 1e-6);
    for (x, y) in pts.iter().zip(&mapped) {
        let n2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        assert!((y.warp - n2).abs() <= 4.0 * f64::EPSILON * n2);
        assert!(y.warp > 0.0);
    }
}

#[test]
fn advection_examples() {
    let ch = chart("flat-cylinder", 9);
    let (a, q) = advection_to_magnetic(&ch, &VectorField::zeros(&ch)).unwrap();
    assert_eq!(a.max_abs(), 0.0);
    assert_eq!(q.max_abs(), 0.0);
    let (a, q) = advection_to_magnetic(&ch, &VectorField::from_real(&ch, |_| [1.0, 0.0, 0.0])).unwrap();
    for m in 0..ch.len() {
        assert!((a.comp[0][m] - C64::new(0.0, 0.5)).norm() < 1e-15);
        assert!((q.data[m] - c(0.25)).norm() < 1e-12);
    }
    let bad = VectorField::from_fn(&ch, |_| [C64::new(0.0, 1.0), c(0.0), c(0.0)]);
    assert!(advection_to_magnetic(&ch, &bad).is_err());
}

#[test]
fn advection_matches_magnetic_form() {
    let ch = chart("exp-warp", 21);
    let x = VectorField::from_real(&ch, |p| [p[1].sin(), 0.5 * p[0], (p[0] * p[2]).cos()]);
    let (a, q) = advection_to_magnetic(&ch, &x).unwrap();
    let u = ScalarField::from_real(&ch, |p| (p[0] + p[1]).sin() * (3.0 * p[2]).cos());
    let lx = advection_apply(&ch, &x, &u).unwrap();
    let la = magnetic_apply(&ch, &a, &q, &u).unwrap();
    let rel = l2_norm(&ch, &lx.sub(&la)) / l2_norm(&ch, &lx);
    assert!(rel < 1e-3, "{rel}");
}

fn smooth_field(ch: &CylinderChart, k: [f64; 4]) -> ScalarField {
    ScalarField::from_fn(ch, |x| {
        C64::new((k[0] * x[0] + k[1] * x[1]).sin(), (k[2] * x[2] + k[3] * x[0]).cos())
    })
}

fn bump(x: [f64; 3]) -> f64 {
    let s = |t: f64, a: f64, b: f64| {
        let y = (t - a) / (b - a);
        (PI * y).sin().powi(4)
    };
    s(x[0], 0.0, 1.0) * s(x[1], 1.0, 3.0) * s(x[2], -FRAC_PI_6, FRAC_PI_6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn flat_after_sharp_is_identity(k in prop::array::uniform4(-3.0f64..3.0)) {
        let ch = chart("exp-warp", 5);
        let f = smooth_field(&ch, k);
        let alpha = OneForm::from_components([f.clone(), f.scale(C64::new(0.5, 1.0)), f.conj()]);
        let back = flat(&ch, &sharp(&ch, &alpha).unwrap()).unwrap();
        for a in 0..3 {
            for m in 0..ch.len() {
                let v = alpha.comp[a][m];
                prop_assert!((back.comp[a][m] - v).norm() <= 4.0 * f64::EPSILON * v.norm().max(1e-300));
            }
        }
    }

    #[test]
    fn adjointness_of_d_and_codifferential(k in prop::array::uniform4(-2.0f64..2.0)) {
        // compactly supported samples: (du, α) − (u, d*α) shrinks at second order
        let mut gaps = Vec::new();
        for n in [13usize, 25] {
            let ch = chart("exp-warp", n);
            let u = smooth_field(&ch, k).zip(&ScalarField::from_real(&ch, bump), |a, b| a * b);
            let w = ScalarField::from_real(&ch, |x| bump(x) * (1.0 + x[0] * x[1]));
            let alpha = OneForm::from_components([w.clone(), w.scale_re(0.5), w.scale_re(-0.3)]);
            let du = differential(&ch, &u).unwrap();
            let lhs = integrate_volume(&ch, &inner(&ch, &du, &alpha).unwrap()).unwrap();
            let rhs = integrate_volume(&ch, &u.mul(&codifferential(&ch, &alpha).unwrap())).unwrap();
            gaps.push((lhs - rhs).norm());
        }
        prop_assert!(gaps[1] <= gaps[0] / 3.0 + 1e-12, "{:?}", gaps);
    }

    #[test]
    fn product_rule_for_codifferential(k in prop::array::uniform4(-2.0f64..2.0)) {
        // d*(A u) = (d*A) u − ⟨A, du⟩
        let mut errs = Vec::new();
        for n in [9usize, 17] {
            let ch = chart("exp-warp", n);
            let u = smooth_field(&ch, k);
            let a = OneForm::from_real(&ch, |x| [x[1].cos(), x[0] * x[2], 0.4 * x[0]]);
            let lhs = codifferential(&ch, &a.times(&u)).unwrap();
            let rhs = codifferential(&ch, &a).unwrap().mul(&u).sub(&inner(&ch, &a, &differential(&ch, &u).unwrap()).unwrap());
            errs.push(lhs.sub(&rhs).max_abs());
        }
        prop_assert!(errs[1] <= errs[0] / 3.0 + 1e-12, "{:?}", errs);
    }
}
