use finsler_core::body::BodySpec;
use finsler_core::john;

fn main() {
    let a = vec![
        vec![1.0, 1.0],
        vec![1.0, -1.0],
        vec![-1.0, 1.0],
        vec![-1.0, -1.0],
    ];
    let b = vec![1.0, 1.0, 1.0, 1.0];
    let body = BodySpec::PolytopeH { a, b }.build().unwrap();
    for tol in [1e-6, 1e-8, 1e-9] {
        match john::max_inscribed_ellipsoid(&body, tol) {
            Ok(sol) => eprintln!(
                "tol {tol:.0e}: steps {} gap {:.2e} r {:.8}",
                sol.iterations,
                sol.duality_gap,
                sol.ellipsoid.det_factor().sqrt()
            ),
            Err(e) => eprintln!("tol {tol:.0e}: {e}"),
        }
    }
}
