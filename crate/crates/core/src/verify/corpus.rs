//! Reproducible random-body corpora for the bounds suites.
//!
//! Random polytopes are convex hulls of seeded uniform sphere points
//! (3n..10n of them), symmetric ones take the hull of ± pairs, and general
//! ones may be shifted inside to break symmetry. Generation is deterministic
//! in (dim, seed, index).

use rand::Rng;
use rand_distr::StandardNormal;

use crate::body::{Body, BodySpec};
use crate::rng::block_rng;

fn sphere_point(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

/// Symmetric random polytope: hull of ± sphere-point pairs.
pub fn random_symmetric_polytope(n: usize, seed: u64, index: u64) -> Body {
    for attempt in 0..64u64 {
        let mut rng = block_rng(seed ^ 0x5E11, index * 64 + attempt);
        let pairs = rng.gen_range((3 * n / 2).max(2)..=5 * n);
        let mut verts = Vec::with_capacity(2 * pairs);
        for _ in 0..pairs {
            let v = sphere_point(&mut rng, n);
            verts.push(v.iter().map(|x| -x).collect());
            verts.push(v);
        }
        if let Ok(body) = (BodySpec::PolytopeV { vertices: verts }).build() {
            if body.origin_interior() && body.is_symmetric() {
                return body;
            }
        }
    }
    unreachable!("symmetric polytope generation failed after 64 attempts");
}

/// General random polytope, optionally shifted inside to break symmetry.
/// The origin stays interior with a small margin.
pub fn random_polytope(n: usize, seed: u64, index: u64, shifted: bool) -> Body {
    for attempt in 0..64u64 {
        let mut rng = block_rng(seed ^ 0x6E11, index * 64 + attempt);
        let count = rng.gen_range(3 * n..=10 * n);
        let verts: Vec<Vec<f64>> = (0..count).map(|_| sphere_point(&mut rng, n)).collect();
        let spec = BodySpec::PolytopeV { vertices: verts };
        let Ok(base) = spec.build() else { continue };
        if !base.origin_interior() {
            continue;
        }
        if !shifted {
            return base;
        }
        // Shift by a fraction of the inradius proxy so the origin stays inside.
        let dir = sphere_point(&mut rng, n);
        let mag = 0.05 + 0.15 * rng.gen::<f64>();
        let offset: Vec<f64> = dir.iter().map(|x| x * mag).collect();
        let spec = BodySpec::Translate { inner: Box::new(base.spec().clone()), offset };
        if let Ok(body) = spec.build() {
            if body.origin_interior() {
                return body;
            }
        }
    }
    unreachable!("polytope generation failed after 64 attempts");
}

/// Random ellipsoid body centered at the origin.
pub fn random_ellipsoid(n: usize, seed: u64, index: u64) -> Body {
    for attempt in 0..64u64 {
        let mut rng = block_rng(seed ^ 0x7E11, index * 64 + attempt);
        let mut factor = vec![vec![0.0; n]; n];
        for (i, row) in factor.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate().take(i + 1) {
                *v = if i == j {
                    0.4 + 1.2 * rng.gen::<f64>()
                } else {
                    0.5 * rng.sample::<f64, _>(StandardNormal)
                };
            }
        }
        let spec = BodySpec::Ellipsoid { center: vec![0.0; n], factor };
        if let Ok(body) = spec.build() {
            return body;
        }
    }
    unreachable!("ellipsoid generation failed after 64 attempts");
}

pub fn corpus_symmetric(n: usize, count: usize, seed: u64) -> Vec<(String, Body)> {
    (0..count)
        .map(|i| (format!("sym-n{n}-{i:03}"), random_symmetric_polytope(n, seed, i as u64)))
        .collect()
}

pub fn corpus_general(n: usize, count: usize, seed: u64) -> Vec<(String, Body)> {
    (0..count)
        .map(|i| (format!("gen-n{n}-{i:03}"), random_polytope(n, seed, i as u64, true)))
        .collect()
}

/// Named reference bodies plus a seeded random mix, used by the ratio and
/// density suites.
pub fn standard_corpus(n: usize, seed: u64) -> Vec<(String, Body)> {
    let mut bodies: Vec<(String, Body)> = Vec::new();
    bodies.push((format!("ball-n{n}"), BodySpec::unit_ball(n).build().unwrap()));
    bodies.push((format!("cube-n{n}"), BodySpec::cube(n).build().unwrap()));
    for p in [1.0, 1.5, 3.0] {
        bodies.push((
            format!("pball-{p}-n{n}"),
            BodySpec::PBall { p, dim: n }.build().unwrap(),
        ));
    }
    // Funk unit ball at |x| = 0.5 (quasireversibility constant 3).
    let mut offset = vec![0.0; n];
    offset[0] = -0.5;
    bodies.push((
        format!("funkball-n{n}"),
        BodySpec::Translate { inner: Box::new(BodySpec::unit_ball(n)), offset }
            .build()
            .unwrap(),
    ));
    for i in 0..3 {
        bodies.push((format!("ellip-n{n}-{i}"), random_ellipsoid(n, seed, i)));
    }
    bodies.extend(corpus_symmetric(n, 20, seed));
    bodies.extend(corpus_general(n, 20, seed));
    bodies
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpora_are_deterministic_and_valid() {
        for n in [2usize, 3] {
            let a = corpus_symmetric(n, 5, 7);
            let b = corpus_symmetric(n, 5, 7);
            for ((ida, ba), (idb, bb)) in a.iter().zip(b.iter()) {
                assert_eq!(ida, idb);
                assert_eq!(ba.spec(), bb.spec());
                assert!(ba.is_symmetric() && ba.origin_interior());
            }
            for (_, body) in corpus_general(n, 5, 7) {
                assert!(body.origin_interior());
            }
        }
    }

    #[test]
    fn shifted_polytopes_break_symmetry() {
        let asym = (0..10).filter(|&i| !random_polytope(2, 3, i, true).is_symmetric()).count();
        assert!(asym >= 8, "only {asym}/10 shifted polytopes are asymmetric");
    }
}
