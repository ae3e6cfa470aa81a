use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use gauss_codazzi::immersion::{
    align_rigid, deformation_test, induced_metric_grid, integrate_frame, integrate_frame_unchecked, ClosedFormImmersion,
    Psi,
};
use gauss_codazzi::metric::{brioschi_fd, gauss_curvature, CustomMetric, MetricFamily, Rect};
use gauss_codazzi::solver::{integrate_reduced, SecondFundamentalFormField};

fn axis(a: f64, b: f64, n: usize) -> Vec<f64> {
    Rect::axis(a, b, n)
}

#[test]
fn flat_plane_is_affine_isometry() {
    let flat = MetricFamily::Custom(CustomMetric {
        e: Arc::new(|_, _| 1.0),
        g: Arc::new(|_, _| 1.0),
        domain: Rect::new(-1.0, 3.0, -1.0, 3.0).unwrap(),
    });
    let (xs, ys) = (axis(0.0, 2.0, 33), axis(0.0, 1.0, 17));
    let count = xs.len() * ys.len();
    let form = SecondFundamentalFormField {
        xs: xs.clone(),
        ys: ys.clone(),
        l: vec![0.0; count],
        m: vec![0.0; count],
        n: vec![0.0; count],
        lt: vec![0.0; count],
        mt: vec![0.0; count],
        nt: vec![0.0; count],
    };
    let grid = integrate_frame_unchecked(&flat, &form, None).unwrap();
    for j in 0..ys.len() {
        for i in 0..xs.len() {
            let p = grid.f[grid.index(i, j)];
            assert!((p.x - xs[i]).abs() < 1e-10 && (p.y - ys[j]).abs() < 1e-10 && p.z.abs() < 1e-10);
        }
    }
    assert!(grid.metric_residual() < 1e-10);
    assert!(grid.path_discrepancy < 1e-10);
}

#[test]
fn standard_catenoid_reconstructs_after_alignment() {
    let family = MetricFamily::GeneralizedCatenoid { c: 1.0, beta: SQRT_2 };
    let (xs, ys) = (axis(0.0, 2.0 * PI, 128), axis(-1.0, 0.0, 128));
    let sech2 = |y: f64| 1.0 / y.cosh().powi(2);
    let form = SecondFundamentalFormField::from_fn(&family, &xs, &ys, |_, y| (sech2(y), 0.0, -sech2(y))).unwrap();
    assert!(form.normalized_gauss_residual() < 1e-12);
    let grid = integrate_frame(&family, &form, None).unwrap();
    assert!(grid.normal_defect() < 1e-8);
    let exact = ClosedFormImmersion::StdCatenoid { c: 1.0 }.sample(&xs, &ys).unwrap();
    let fit = align_rigid(&grid.f, &exact).unwrap();
    assert!(fit.max_distance < 1e-4, "alignment distance {}", fit.max_distance);
    assert!(grid.metric_residual() < 1e-6);
    assert!(grid.path_discrepancy < 1e-4);
}

#[test]
fn hyperbolic_plane_from_reduced_ode() {
    let family = MetricFamily::Hyperbolic;
    let (xs, ys) = (axis(0.0, 1.0, 128), axis(1.0, 2.0, 128));
    // v(y) = 1/√(2y² − 1) solves v' = −v(1 + v²)/y with v(1) = 1.
    let path = integrate_reduced(&family, 0.5, (1.0, 2.0), 127 * 8, (1.0, -1.0)).unwrap();
    let v_at = |j: usize| {
        let (_, w, z) = path[j * 8];
        0.5 * (w - z)
    };
    for j in [0, 40, 127] {
        let y = ys[j];
        assert!((v_at(j) - 1.0 / (2.0 * y * y - 1.0).sqrt()).abs() < 1e-10);
    }
    let form = SecondFundamentalFormField::from_fn(&family, &xs, &ys, |_, y| {
        let j = ((y - 1.0) * 127.0).round() as usize;
        let v = v_at(j);
        (1.0 / v, 0.0, -v)
    })
    .unwrap();
    let grid = integrate_frame(&family, &form, None).unwrap();
    let induced = induced_metric_grid(&grid);
    let mut worst: f64 = 0.0;
    for k in 0..grid.f.len() {
        worst = worst
            .max((induced.e[k] - grid.e[k]).abs())
            .max(induced.f[k].abs())
            .max((induced.g[k] - grid.g[k]).abs());
    }
    assert!(worst < 1e-4, "induced metric residual {worst}");
    assert!(grid.metric_residual() < 1e-8);
    assert!(grid.mixed_partial_defect() < 1e-2);
}

#[test]
fn inconsistent_input_drifts_or_disagrees() {
    // h = diag(1, 1)·√(EG) has the wrong Gauss sign for ℍ².
    let family = MetricFamily::Hyperbolic;
    let (xs, ys) = (axis(0.0, 1.0, 32), axis(1.0, 2.0, 32));
    let form = SecondFundamentalFormField::from_fn(&family, &xs, &ys, |x, _| (3.0 + x, 2.0, 1.0)).unwrap();
    match integrate_frame(&family, &form, None) {
        Err(e) => assert!(e.is_numerical_fault()),
        Ok(grid) => assert!(grid.path_discrepancy > 1e-3),
    }
}

#[test]
fn enneper_metric_at_sample_points() {
    let imm = ClosedFormImmersion::Enneper;
    for k in 0..100 {
        let x = -2.0 + 4.0 * ((k * 37) % 100) as f64 / 99.0;
        let y = -2.0 + 4.0 * ((k * 61) % 100) as f64 / 99.0;
        let (e, f, g) = imm.induced_metric(x, y).unwrap();
        let t = 1.0 + x * x + y * y;
        assert!((e - t * t).abs() < 1e-8 * t * t && f.abs() < 1e-8 && (g - t * t).abs() < 1e-8 * t * t);
    }
}

#[test]
fn pullback_curvature_matches_family() {
    let cases: Vec<(ClosedFormImmersion, MetricFamily, (f64, f64))> = vec![
        (ClosedFormImmersion::Enneper, MetricFamily::Enneper { alpha: 2.0 }, (0.0, 0.0)),
        (ClosedFormImmersion::StdCatenoid { c: 1.0 }, MetricFamily::GeneralizedCatenoid { c: 1.0, beta: SQRT_2 }, (0.0, -0.5)),
        (ClosedFormImmersion::CatenoidBeta { c: 1.0, beta: 2.0 }, MetricFamily::GeneralizedCatenoid { c: 1.0, beta: 2.0 }, (0.0, -0.5)),
    ];
    for (imm, family, (x0, y0)) in cases {
        let e_imm = imm.clone();
        let g_imm = imm.clone();
        let pulled = MetricFamily::Custom(CustomMetric {
            e: Arc::new(move |x, y| e_imm.induced_metric(x, y).unwrap().0),
            g: Arc::new(move |x, y| g_imm.induced_metric(x, y).unwrap().2),
            domain: Rect::new(x0 - 2.0, x0 + 2.0, y0 - 2.0, y0 + 2.0).unwrap(),
        });
        for &(dx, dy) in &[(0.0, 0.0), (0.3, 0.2), (-0.5, 0.4)] {
            let (x, y) = (x0 + dx, y0 + dy);
            let want = gauss_curvature(&family, x, y).unwrap();
            let got = brioschi_fd(&pulled, x, y).unwrap();
            assert!((got - want).abs() < 1e-4 * want.abs(), "{} at ({x},{y}): {got} vs {want}", imm.name());
        }
    }
}

#[test]
fn deformation_only_for_classical_pair() {
    let window = Rect::new(0.0, 2.0 * PI, 0.1, 1.0).unwrap();
    let yes = deformation_test(1.0, 1.0, SQRT_2, &Psi::Linear(1.0), 5, &window, 24, 24).unwrap();
    assert!(yes.is_isometric_deformation && yes.max_metric_variation < 1e-8);
    for (alpha, beta) in [(2.0, SQRT_2), (1.0, 2.0)] {
        let no = deformation_test(1.0, alpha, beta, &Psi::Linear(1.0), 5, &window, 24, 24).unwrap();
        assert!(!no.is_isometric_deformation && no.max_metric_variation >= 1e-2, "{alpha} {beta}: {}", no.max_metric_variation);
    }
    let wrong_psi = deformation_test(1.0, 1.0, SQRT_2, &Psi::Linear(0.5), 5, &window, 24, 24).unwrap();
    assert!(!wrong_psi.is_isometric_deformation);
}
