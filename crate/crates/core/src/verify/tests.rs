use super::*;
use approx::assert_relative_eq;

fn disk() -> Body {
    BodySpec::unit_ball(2).build().unwrap()
}

fn square() -> Body {
    BodySpec::cube(2).build().unwrap()
}

fn funk_ball() -> Body {
    BodySpec::Translate { inner: Box::new(BodySpec::unit_ball(2)), offset: vec![-0.5, 0.0] }
        .build()
        .unwrap()
}

#[test]
fn constants_reference_values() {
    assert_relative_eq!(c1_basic(2), 2.0 * 2.0_f64.powf(2.0), epsilon = 1e-12);
    assert_relative_eq!(c1_improved(2), 12.0_f64.sqrt() * 2.0, epsilon = 1e-12);
    assert_relative_eq!(c1_improved(2), 6.928203, epsilon = 1e-5);
    assert_relative_eq!(c2(2), 0.5, epsilon = 1e-15);
    assert_relative_eq!(c3(2), 2.0_f64.powf(1.5), epsilon = 1e-15);
    // c = 1 reduces the quasireversible constants to the reversible ones.
    assert_relative_eq!(c2_quasi(2, 1.0), c2(2), epsilon = 1e-15);
    assert_relative_eq!(c3_quasi(2, 1.0), c3(2), epsilon = 1e-15);
    // c = 3, n = 2: lower (1/2)(1/2)^2 = 1/8, upper 2^{3/2}·2^2.
    assert_relative_eq!(c2_quasi(2, 3.0), 0.125, epsilon = 1e-15);
    assert_relative_eq!(c3_quasi(2, 3.0), 2.0_f64.powf(1.5) * 4.0, epsilon = 1e-12);
}

#[test]
fn ratio_scan_disk_is_riemannian_fixed_point() {
    let dirs = scan_directions(2, 0);
    let r = ratio_scan(&disk(), "disk", &dirs, 10_000, 0).unwrap();
    assert!((r.min_ratio - 1.0).abs() <= 1e-9 && (r.max_ratio - 1.0).abs() <= 1e-9);
    assert!(r.pass);
}

#[test]
fn ratio_scan_square_matches_hand_values() {
    let dirs = scan_directions(2, 0);
    let r = ratio_scan(&square(), "square", &dirs, 10_000, 0).unwrap();
    // g_BL = 0.75·I: ratio is sqrt(0.75)·|ξ|/‖ξ‖_∞ ∈ [sqrt(0.75), sqrt(1.5)].
    assert_relative_eq!(r.min_ratio, 0.75_f64.sqrt(), epsilon = 1e-6);
    assert_relative_eq!(r.max_ratio, 1.5_f64.sqrt(), epsilon = 1e-6);
    assert_relative_eq!(r.c, 1.0, epsilon = 1e-12);
    assert!(r.pass && r.pass_symmetric_interval == Some(true));
}

#[test]
fn ratio_scan_funk_ball_respects_quasireversible_interval() {
    let dirs = scan_directions(2, 0);
    let r = ratio_scan(&funk_ball(), "funkball", &dirs, 10_000, 0).unwrap();
    assert_relative_eq!(r.c, 3.0, epsilon = 1e-3);
    assert!(r.max_ratio <= c1_improved(2) + 1e-6);
    assert!(r.pass, "report: {r:?}");
    assert!(r.pass_symmetric_interval.is_none());
}

#[test]
fn john_suite_small_corpus() {
    let dirs = scan_directions(2, 1);
    let mut bodies = corpus::corpus_symmetric(2, 4, 1);
    bodies.extend(corpus::corpus_general(2, 4, 1));
    bodies.push(("square".into(), square()));
    let rows = john_bounds_suite(&bodies, &dirs, tol::JOHN_TOL_POLYTOPE, tol::CONSTANT_SLACK)
        .unwrap();
    assert!(!rows.is_empty());
    for row in &rows {
        assert!(row.pass, "failed: {row:?}");
    }
}

#[test]
fn density_suite_small_corpus() {
    let mut bodies = vec![
        ("disk".to_string(), disk()),
        ("square".to_string(), square()),
        ("ellip".to_string(), corpus::random_ellipsoid(2, 5, 0)),
    ];
    bodies.extend(corpus::corpus_general(2, 3, 5));
    let rows = density_suite(&bodies, tol::JOHN_TOL_POLYTOPE, 50_000, 5).unwrap();
    for row in &rows {
        assert!(row.pass, "failed: {row:?}");
    }
    // The ellipsoid must carry the equality row.
    assert!(rows
        .iter()
        .any(|r| r.check_id == "density_bl_equality" && r.body_id == "ellip" && r.pass));
}

#[test]
fn symmetrize_rows_on_symmetric_body_are_trivial() {
    let dirs = scan_directions(2, 2);
    let rows = symmetrize_and_bound(&square(), "square", &dirs, 50_000, 2).unwrap();
    for row in &rows {
        assert!(row.pass, "failed: {row:?}");
        if row.check_id.starts_with("sym_dir") {
            assert_relative_eq!(row.measured, 1.0, epsilon = 1e-9);
        }
    }
}

#[test]
fn symmetrize_rows_on_funk_ball() {
    let dirs = scan_directions(2, 2);
    let rows = symmetrize_and_bound(&funk_ball(), "funkball", &dirs, 60_000, 2).unwrap();
    for row in &rows {
        assert!(row.pass, "failed: {row:?}");
    }
}

#[test]
fn counterexample_rows_pass() {
    let rows = counterexample_rows(2, 0).unwrap();
    assert!(rows.len() >= 6);
    for row in &rows {
        assert!(row.pass, "failed: {row:?}");
    }
}

#[test]
fn nonsmooth_scan_coarse_grid() {
    // Coarse sanity run; the acceptance suite runs the full pinned grid.
    let grid: Vec<f64> = [1.9_f64, 1.96, 2.0, 2.04, 2.1].iter().map(|p| (p - 1.0).ln()).collect();
    let scan = nonsmooth_scan(2, &grid, 1e-5).unwrap();
    assert!(scan.left_slope > 0.1 && scan.left_slope < 0.25, "left {}", scan.left_slope);
    assert!(scan.right_slope.abs() < 0.03, "right {}", scan.right_slope);
    for row in &scan.rows {
        assert!((row.r_solved - row.r_formula).abs() <= 1e-3, "row {row:?}");
    }
}

#[test]
fn pball_radius_suite_dim2() {
    let rows = suite_pball_radius(2, 0).unwrap();
    assert_eq!(rows.len(), 6);
    for row in &rows {
        assert!(row.pass, "failed: {row:?}");
    }
}

#[test]
fn unknown_suite_is_an_error() {
    assert!(matches!(run_suite("nope", 2, 0), Err(VerifyError::UnknownSuite(_))));
}
