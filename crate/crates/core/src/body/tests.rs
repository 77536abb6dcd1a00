use super::*;
use approx::assert_relative_eq;
use std::f64::consts::PI;

fn dv(v: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(v)
}

fn unit_disk() -> Body {
    BodySpec::unit_ball(2).build().unwrap()
}

fn square() -> Body {
    BodySpec::cube(2).build().unwrap()
}

/// Funk unit ball at |x| = 0.5: the disk seen from (0.5, 0), i.e. Ω - u.
fn funk_ball() -> Body {
    BodySpec::Translate {
        inner: Box::new(BodySpec::unit_ball(2)),
        offset: vec![-0.5, 0.0],
    }
    .build()
    .unwrap()
}

#[test]
fn gauge_euclidean_norm() {
    let g = unit_disk().gauge(&dv(&[3.0, 4.0])).unwrap();
    assert_relative_eq!(g, 5.0, epsilon = 1e-12);
}

#[test]
fn gauge_square_max_norm_oracle() {
    // Oracle: gauge of the cube is the max-abs coordinate.
    let sq = square();
    let g = sq.gauge(&dv(&[0.5, -1.0])).unwrap();
    assert_relative_eq!(g, 1.0, epsilon = 1e-12);
    let g = sq.gauge(&dv(&[0.25, 0.1])).unwrap();
    assert_relative_eq!(g, 0.25, epsilon = 1e-12);
}

#[test]
fn gauge_funk_ball_matches_hand_solution() {
    // Solve ξ/t + u on the unit circle by hand: t = 2 for ξ = (1,0), u = (0.5,0).
    let fb = funk_ball();
    assert_relative_eq!(fb.gauge(&dv(&[1.0, 0.0])).unwrap(), 2.0, epsilon = 1e-12);
    // Opposite direction: distance to the boundary is 1.5.
    assert_relative_eq!(
        fb.gauge(&dv(&[-1.0, 0.0])).unwrap(),
        1.0 / 1.5,
        epsilon = 1e-12
    );
}

#[test]
fn gauge_zero_vector_is_zero() {
    assert_eq!(unit_disk().gauge(&dv(&[0.0, 0.0])).unwrap(), 0.0);
    assert_eq!(funk_ball().gauge(&dv(&[0.0, 0.0])).unwrap(), 0.0);
}

#[test]
fn gauge_requires_interior_origin() {
    // Triangle with the origin at a vertex: valid body, invalid gauge.
    let tri = BodySpec::PolytopeV {
        vertices: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
    }
    .build()
    .unwrap();
    assert!(!tri.origin_interior());
    assert!(matches!(tri.gauge(&dv(&[1.0, 1.0])), Err(BodyError::InvalidBody(_))));
}

#[test]
fn boundary_hits_on_disk_and_square() {
    let disk = unit_disk();
    let t = disk.boundary_hit(&dv(&[0.5, 0.0]), &dv(&[1.0, 0.0])).unwrap();
    assert_relative_eq!(t, 0.5, epsilon = 1e-12);
    // Circle intersection by hand: 0.25 + t^2 = 1.
    let t = disk.boundary_hit(&dv(&[0.5, 0.0]), &dv(&[0.0, 1.0])).unwrap();
    assert_relative_eq!(t, 0.75_f64.sqrt(), epsilon = 1e-12);
    let t = square().boundary_hit(&dv(&[0.0, 0.0]), &dv(&[1.0, 1.0])).unwrap();
    assert_relative_eq!(t, 1.0, epsilon = 1e-12);
}

#[test]
fn boundary_hit_error_paths() {
    let disk = unit_disk();
    assert!(matches!(
        disk.boundary_hit(&dv(&[0.5, 0.0]), &dv(&[0.0, 0.0])),
        Err(BodyError::DegenerateDirection)
    ));
    assert!(matches!(
        disk.boundary_hit(&dv(&[2.0, 0.0]), &dv(&[1.0, 0.0])),
        Err(BodyError::NotInterior)
    ));
}

#[test]
fn exact_volumes() {
    assert_relative_eq!(square().volume(VolumeMethod::Exact, 0, 0).unwrap().0, 4.0, epsilon = 1e-12);
    assert_relative_eq!(unit_disk().volume(VolumeMethod::Exact, 0, 0).unwrap().0, PI, epsilon = 1e-12);
    // Cross-polytope area by hand: 2.
    let l1 = BodySpec::PBall { p: 1.0, dim: 2 }.build().unwrap();
    assert_relative_eq!(l1.volume(VolumeMethod::Exact, 0, 0).unwrap().0, 2.0, epsilon = 1e-12);
}

#[test]
fn monte_carlo_volume_matches_exact_within_4_sigma() {
    for body in [square(), unit_disk(), BodySpec::PBall { p: 1.0, dim: 2 }.build().unwrap()] {
        let (exact, _) = body.volume(VolumeMethod::Exact, 0, 0).unwrap();
        let (mc, se) = body.volume(VolumeMethod::MonteCarlo, 200_000, 42).unwrap();
        assert!(
            (mc - exact).abs() <= tol::MC_SIGMA * se,
            "mc {mc} vs exact {exact} (se {se})"
        );
    }
}

#[test]
fn volume_errors() {
    let disk = unit_disk();
    assert!(matches!(
        disk.volume(VolumeMethod::MonteCarlo, 10, 0),
        Err(BodyError::SampleBudgetTooSmall(10, _))
    ));
    let sym = BodySpec::Symmetrized {
        inner: Box::new(BodySpec::Translate {
            inner: Box::new(BodySpec::PBall { p: 1.5, dim: 2 }),
            offset: vec![0.2, 0.0],
        }),
    }
    .build()
    .unwrap();
    assert!(matches!(
        sym.volume(VolumeMethod::Exact, 0, 0),
        Err(BodyError::MethodUnsupported(_))
    ));
}

#[test]
fn sampling_means_match_symmetry_and_exact_integrals() {
    let n = 100_000;
    let disk = unit_disk();
    let pts = disk.sample_uniform(n, 7).unwrap();
    let mean = pts.iter().fold(DVector::zeros(2), |acc, p| acc + p) / n as f64;
    // Var(x) over the disk is 1/4.
    let se = (0.25 / n as f64).sqrt();
    assert!(mean.amax() <= 3.0 * se, "disk mean {mean:?}");

    let sq = square();
    let pts = sq.sample_uniform(n, 8).unwrap();
    let m2 = pts.iter().map(|p| p[0] * p[0]).sum::<f64>() / n as f64;
    // E[x^2] = 1/3, Var(x^2) = 1/5 - 1/9 = 4/45.
    let se = (4.0 / 45.0 / n as f64).sqrt();
    assert!((m2 - 1.0 / 3.0).abs() <= 3.0 * se, "square second moment {m2}");

    let shifted = BodySpec::Translate {
        inner: Box::new(BodySpec::unit_ball(2)),
        offset: vec![0.3, 0.0],
    }
    .build()
    .unwrap();
    let pts = shifted.sample_uniform(n, 9).unwrap();
    let mean = pts.iter().fold(DVector::zeros(2), |acc, p| acc + p) / n as f64;
    let se = (0.25 / n as f64).sqrt();
    assert!((mean[0] - 0.3).abs() <= 3.0 * se && mean[1].abs() <= 3.0 * se);
}

#[test]
fn sampling_is_deterministic_and_inside() {
    let disk = unit_disk();
    let a = disk.sample_uniform(4096, 3).unwrap();
    let b = disk.sample_uniform(4096, 3).unwrap();
    assert_eq!(a.len(), 4096);
    for (x, y) in a.iter().zip(b.iter()) {
        assert_eq!(x, y);
    }
    for x in &a {
        assert!(disk.gauge(x).unwrap() < 1.0);
    }
}

#[test]
fn quasireversibility_constants() {
    let dirs = DirectionSet::new(2, 1024, 0);
    assert_relative_eq!(square().quasireversibility(&dirs).unwrap(), 1.0, epsilon = 1e-12);
    // (1 + |x|)/(1 - |x|) at |x| = 0.5.
    let c = funk_ball().quasireversibility(&dirs).unwrap();
    assert_relative_eq!(c, 3.0, epsilon = 1e-3);
    let sym = BodySpec::Symmetrized {
        inner: Box::new(BodySpec::Translate {
            inner: Box::new(BodySpec::unit_ball(2)),
            offset: vec![-0.5, 0.0],
        }),
    }
    .build()
    .unwrap();
    assert_relative_eq!(sym.quasireversibility(&dirs).unwrap(), 1.0, epsilon = 1e-12);
}

#[test]
fn linear_image_gauge_contract() {
    let m = vec![vec![2.0, 1.0], vec![0.0, 1.0]];
    let body = BodySpec::LinearImage {
        inner: Box::new(BodySpec::PBall { p: 1.5, dim: 2 }),
        map: m.clone(),
    }
    .build()
    .unwrap();
    let inner = BodySpec::PBall { p: 1.5, dim: 2 }.build().unwrap();
    let minv = DMatrix::from_row_slice(2, 2, &[0.5, -0.5, 0.0, 1.0]);
    for xi in [dv(&[1.0, 0.3]), dv(&[-0.7, 2.0]), dv(&[0.1, -0.1])] {
        let lhs = body.gauge(&xi).unwrap();
        let rhs = inner.gauge(&(&minv * &xi)).unwrap();
        assert_relative_eq!(lhs, rhs, epsilon = 1e-10);
    }
}

#[test]
fn symmetrized_gauge_is_exactly_even() {
    let sym = BodySpec::Symmetrized {
        inner: Box::new(BodySpec::Translate {
            inner: Box::new(BodySpec::PBall { p: 3.0, dim: 2 }),
            offset: vec![0.2, -0.1],
        }),
    }
    .build()
    .unwrap();
    for xi in [dv(&[1.0, 0.4]), dv(&[-0.3, 0.9])] {
        let a = sym.gauge(&xi).unwrap();
        let b = sym.gauge(&(-&xi)).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn pball_below_one_is_flagged_nonconvex() {
    let b = BodySpec::PBall { p: 0.5, dim: 2 }.build().unwrap();
    assert!(!b.is_convex());
    assert!(b.origin_interior());
    // Gauge formula still evaluates.
    assert!(b.gauge(&dv(&[0.5, 0.5])).unwrap() > 1.0);
}

#[test]
fn invalid_bodies_are_rejected() {
    // Unbounded: half-plane strip.
    let r = BodySpec::PolytopeH {
        a: vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0]],
        b: vec![1.0, 1.0, 1.0],
    }
    .build();
    assert!(r.is_err());
    // Singular linear map.
    let r = BodySpec::LinearImage {
        inner: Box::new(BodySpec::unit_ball(2)),
        map: vec![vec![1.0, 1.0], vec![1.0, 1.0]],
    }
    .build();
    assert!(r.is_err());
    // Dimension out of range.
    assert!(BodySpec::PBall { p: 2.0, dim: 9 }.build().is_err());
    assert!(BodySpec::PBall { p: -1.0, dim: 2 }.build().is_err());
    // Symmetrization of a body without interior origin.
    let r = BodySpec::Symmetrized {
        inner: Box::new(BodySpec::PolytopeV {
            vertices: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
        }),
    }
    .build();
    assert!(r.is_err());
}

#[test]
fn translate_can_push_origin_out() {
    let b = BodySpec::Translate {
        inner: Box::new(BodySpec::unit_ball(2)),
        offset: vec![2.0, 0.0],
    }
    .build()
    .unwrap();
    assert!(!b.origin_interior());
    assert!(b.gauge(&dv(&[1.0, 0.0])).is_err());
}

#[test]
fn json_field_names_are_frozen() {
    let spec = BodySpec::PolytopeH { a: vec![vec![1.0, 0.0]], b: vec![1.0] };
    assert_eq!(spec.to_json(), r#"{"type":"polytope_h","a":[[1.0,0.0]],"b":[1.0]}"#);
    let spec = BodySpec::PBall { p: 1.5, dim: 2 };
    assert_eq!(spec.to_json(), r#"{"type":"pball","p":1.5,"dim":2}"#);
    let spec = BodySpec::PolytopeV { vertices: vec![vec![0.0, 1.0]] };
    assert_eq!(spec.to_json(), r#"{"type":"polytope_v","vertices":[[0.0,1.0]]}"#);
    let spec = BodySpec::Ellipsoid { center: vec![0.0], factor: vec![vec![1.0]] };
    assert_eq!(
        spec.to_json(),
        r#"{"type":"ellipsoid","center":[0.0],"factor":[[1.0]]}"#
    );
    let spec = BodySpec::Translate {
        inner: Box::new(BodySpec::PBall { p: 2.0, dim: 2 }),
        offset: vec![0.1, 0.2],
    };
    assert_eq!(
        spec.to_json(),
        r#"{"type":"translate","inner":{"type":"pball","p":2.0,"dim":2},"offset":[0.1,0.2]}"#
    );
    let spec = BodySpec::LinearImage {
        inner: Box::new(BodySpec::PBall { p: 2.0, dim: 2 }),
        map: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
    };
    assert_eq!(
        spec.to_json(),
        r#"{"type":"linear_image","inner":{"type":"pball","p":2.0,"dim":2},"map":[[1.0,0.0],[0.0,1.0]]}"#
    );
    let spec = BodySpec::Symmetrized { inner: Box::new(BodySpec::PBall { p: 2.0, dim: 2 }) };
    assert_eq!(
        spec.to_json(),
        r#"{"type":"symmetrize","inner":{"type":"pball","p":2.0,"dim":2}}"#
    );
    // Round trip.
    let back = BodySpec::from_json(&spec.to_json()).unwrap();
    assert_eq!(back, spec);
}

#[test]
fn symmetry_detection() {
    assert!(square().is_symmetric());
    assert!(unit_disk().is_symmetric());
    assert!(!funk_ball().is_symmetric());
    let tri = BodySpec::PolytopeV {
        vertices: vec![vec![-1.0, -0.5], vec![1.0, -0.5], vec![0.0, 1.0]],
    }
    .build()
    .unwrap();
    assert!(!tri.is_symmetric());
    let sym = BodySpec::Symmetrized { inner: Box::new(tri.spec().clone()) }.build().unwrap();
    assert!(sym.is_symmetric());
}

#[test]
fn ellipsoid_support_and_gauge() {
    let e = Ellipsoid::new(dv(&[0.0, 0.0]), DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]))
        .unwrap();
    assert_relative_eq!(e.support(&dv(&[1.0, 0.0])), 2.0, epsilon = 1e-12);
    assert_relative_eq!(e.gauge(&dv(&[2.0, 0.0])), 1.0, epsilon = 1e-12);
    assert_relative_eq!(e.volume(), PI, epsilon = 1e-12);
    assert!(Ellipsoid::new(dv(&[0.0]), DMatrix::from_row_slice(1, 1, &[-1.0])).is_err());
}

#[test]
fn pball_p2_canonicalizes_to_ball() {
    let b = BodySpec::PBall { p: 2.0, dim: 3 }.build().unwrap();
    assert!(b.geom().try_ellipsoid().is_some());
}

#[test]
fn vpoly_in_dim_four_uses_lp_gauge() {
    // 4-D cross-polytope as vertices; gauge is the l1 norm.
    let mut vs = Vec::new();
    for i in 0..4 {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; 4];
            v[i] = s;
            vs.push(v);
        }
    }
    let b = BodySpec::PolytopeV { vertices: vs }.build().unwrap();
    let xi = dv(&[0.25, -0.25, 0.25, 0.25]);
    assert_relative_eq!(b.gauge(&xi).unwrap(), 1.0, epsilon = 1e-9);
    let t = b.boundary_hit(&dv(&[0.0; 4]), &dv(&[1.0, 0.0, 0.0, 0.0])).unwrap();
    assert_relative_eq!(t, 1.0, epsilon = 1e-9);
}
