//! Characteristic-grid kernels against the transfer-matrix route.

use resoline::asymptotics::indicator_width;
use resoline::wavekernel::{
    domain_of_influence_check, kernel_fourier, solve_kernels, KernelPiece, KernelTransform, KernelWindow, WindowKind,
};
use resoline::*;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn test_potentials() -> Vec<Potential> {
    vec![
        square_well(-4.0, -1.0, 1.0).unwrap().into_potential().unwrap(),
        make_piecewise(&[-1.0, -0.3, 0.2, 0.9], &[2.0, -5.0, 1.5]).unwrap(),
        make_piecewise(&[-0.5, 0.0, 1.5], &[-3.0, 1.0]).unwrap(),
    ]
}

fn max_transform_error(v: &Potential, n_grid: usize) -> f64 {
    let f = solve_kernels(v, n_grid).unwrap();
    (0..=80)
        .map(|i| c(-10.0 + 0.25 * i as f64))
        .map(|k| {
            let x = kernel_fourier(&f, KernelPiece::FullX, k).unwrap();
            (x - xhat(v, k)).norm() / (1.0 + k.norm())
        })
        .fold(0.0, f64::max)
}

#[test]
fn full_transform_matches_xhat_at_2048() {
    for v in test_potentials() {
        let e = max_transform_error(&v, 2048);
        assert!(e < 1e-3, "{e}");
    }
}

#[test]
fn transform_error_is_second_order() {
    let v = &test_potentials()[0];
    let errs: Vec<f64> = [256, 512, 1024, 2048].iter().map(|&n| max_transform_error(v, n)).collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let mean = orders.iter().sum::<f64>() / orders.len() as f64;
    assert!(mean >= 1.8, "{errs:?} {orders:?}");
}

#[test]
fn yhat_routes_agree_off_the_axis() {
    let v = &test_potentials()[1];
    let f = solve_kernels(v, 2048).unwrap();
    for k in [Complex64::new(3.0, -0.5), Complex64::new(-2.0, 1.0)] {
        let y = kernel_fourier(&f, KernelPiece::FullY, k).unwrap();
        assert!((y - yhat(v, k)).norm() / (1.0 + k.norm()) < 1e-3);
        let x = kernel_fourier(&f, KernelPiece::FullX, k).unwrap();
        assert!((x - xhat(v, k)).norm() / xhat(v, k).norm() < 1e-3);
    }
}

#[test]
fn grids_cover_exactly_the_supports() {
    for v in test_potentials() {
        let (a, b) = v.hull();
        let f = solve_kernels(&v, 512).unwrap();
        assert_eq!(*f.x_grid.first().unwrap(), -2.0 * (b - a));
        assert_eq!(*f.x_grid.last().unwrap(), 0.0);
        assert!((f.y_grid.first().unwrap() - 2.0 * a).abs() < 1e-12);
        assert!((f.y_grid.last().unwrap() - 2.0 * b).abs() < 1e-12);
        let (xn, yn) = (f.x_norms(), f.y_norms());
        assert!(xn.l1.is_finite() && xn.sup.is_finite() && yn.l1.is_finite() && yn.sup.is_finite());
        assert_eq!(f.delta_coeff, -v.integral() / 2.0);
    }
}

#[test]
fn narrow_x_window_has_width_two_r() {
    let v = &test_potentials()[0];
    let f = solve_kernels(v, 2048).unwrap();
    let r = 0.1;
    let t = KernelTransform { field: &f, piece: KernelPiece::Window(KernelWindow::new(WindowKind::X2, r)) };
    let w = indicator_width(&t, 1280.0).unwrap().width;
    assert!(w <= 2.0 * r * 1.05 && w >= 2.0 * r * 0.95, "{w}");
}

#[test]
fn far_windows_see_the_left_part() {
    let right = square_well(-3.0, 0.0, 1.0).unwrap();
    let v1 = glue(&square_well(-1.0, -1.0, 0.0).unwrap(), &right).unwrap();
    let v2 = glue(&square_well(-2.0, -1.0, 0.0).unwrap(), &right).unwrap();
    let rep = domain_of_influence_check(&v1, &v2, 0.1, 1024).unwrap();
    assert!(rep.difference(WindowKind::X1).max(rep.difference(WindowKind::X3)) > 0.1, "{rep:?}");
    let same = domain_of_influence_check(&v1, &v1.clone(), 0.1, 256).unwrap();
    assert!(same.differences.iter().all(|d| d.1 == 0.0));
}
