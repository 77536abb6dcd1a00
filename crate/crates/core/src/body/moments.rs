//! Exact volume / first-moment / second-moment engine.
//!
//! Moments are taken about the origin of the ambient space and normalized:
//! `mean = E[x]`, `second = E[x xᵀ]` under the uniform distribution on the
//! body. Polytopes in n ≤ 3 use a signed fan of boundary simplices, so the
//! origin can sit anywhere (inside, on the boundary, or outside).

use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::ln_gamma;

use super::{Ellipsoid, Geom};
use crate::body::hull::Hull;

#[derive(Debug, Clone)]
pub(crate) struct RawMoments {
    pub vol: f64,
    pub mean: DVector<f64>,
    pub second: DMatrix<f64>,
}

/// Volume of the Euclidean unit ball in dimension `n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    let nf = n as f64;
    (0.5 * nf * std::f64::consts::PI.ln() - ln_gamma(0.5 * nf + 1.0)).exp()
}

/// Volume of the unit p-ball in dimension `n`.
pub fn pball_volume(p: f64, n: usize) -> f64 {
    let nf = n as f64;
    (nf * (2.0_f64).ln() + nf * ln_gamma(1.0 + 1.0 / p) - ln_gamma(1.0 + nf / p)).exp()
}

/// `E[x_1^2]` over the unit p-ball in dimension `n` (Dirichlet reduction).
pub fn pball_second_moment(p: f64, n: usize) -> f64 {
    if (p - 2.0).abs() < 1e-12 {
        return 1.0 / (n as f64 + 2.0);
    }
    let nf = n as f64;
    (ln_gamma(3.0 / p) - ln_gamma(1.0 / p) + ln_gamma(1.0 + nf / p)
        - ln_gamma(1.0 + (nf + 2.0) / p))
    .exp()
}

/// Signed moments of the simplex with vertices {0, v_1..v_n} (2-D triangle
/// or 3-D tetrahedron), contributing `w * E[..]` terms with signed weight w.
fn fan_simplex(
    verts: &[&DVector<f64>],
    vol_acc: &mut f64,
    mean_acc: &mut DVector<f64>,
    second_acc: &mut DMatrix<f64>,
) {
    let n = verts[0].len();
    let w = match n {
        2 => {
            let (a, b) = (verts[0], verts[1]);
            0.5 * (a[0] * b[1] - a[1] * b[0])
        }
        3 => {
            let m = DMatrix::from_fn(3, 3, |i, j| verts[j][i]);
            m.determinant() / 6.0
        }
        _ => unreachable!("fan moments only run in n <= 3"),
    };
    // Vertex sums include the implicit origin vertex, which contributes 0.
    let mut s = DVector::zeros(n);
    for v in verts {
        s += *v;
    }
    let nf = n as f64;
    let mean = &s / (nf + 1.0);
    let mut vv = DMatrix::zeros(n, n);
    for v in verts {
        vv += *v * v.transpose();
    }
    let second = (vv + &s * s.transpose()) / ((nf + 1.0) * (nf + 2.0));
    *vol_acc += w;
    *mean_acc += w * mean;
    *second_acc += w * second;
}

fn hull_moments(h: &Hull) -> Option<RawMoments> {
    let n = h.verts.first()?.len();
    let mut vol = 0.0;
    let mut mean = DVector::zeros(n);
    let mut second = DMatrix::zeros(n, n);
    for simplex in &h.boundary {
        let vs: Vec<&DVector<f64>> = simplex.iter().map(|&i| &h.verts[i]).collect();
        fan_simplex(&vs, &mut vol, &mut mean, &mut second);
    }
    if vol <= 1e-14 {
        return None;
    }
    Some(RawMoments { vol, mean: mean / vol, second: second / vol })
}

fn ellipsoid_moments(e: &Ellipsoid) -> RawMoments {
    let n = e.dim();
    let shape = e.shape_matrix();
    let c = e.center().clone();
    let second = &shape / (n as f64 + 2.0) + &c * c.transpose();
    RawMoments { vol: e.volume(), mean: c, second }
}

pub(crate) fn exact_moments(g: &Geom) -> Option<RawMoments> {
    match g {
        Geom::PBall { p, dim } => {
            let m2 = pball_second_moment(*p, *dim);
            Some(RawMoments {
                vol: pball_volume(*p, *dim),
                mean: DVector::zeros(*dim),
                second: DMatrix::identity(*dim, *dim) * m2,
            })
        }
        Geom::Ellip(e) => Some(ellipsoid_moments(e)),
        Geom::PolytopeH { hull: Some(h), .. } | Geom::PolytopeV { hull: Some(h), .. } => {
            hull_moments(h)
        }
        Geom::Translate { inner, offset } => {
            let m = exact_moments(inner)?;
            let mean = &m.mean + offset;
            let second = &m.second
                + offset * m.mean.transpose()
                + &m.mean * offset.transpose()
                + offset * offset.transpose();
            Some(RawMoments { vol: m.vol, mean, second })
        }
        Geom::LinearImage { inner, map, det_abs, .. } => {
            let m = exact_moments(inner)?;
            Some(RawMoments {
                vol: m.vol * det_abs,
                mean: map * &m.mean,
                second: map * &m.second * map.transpose(),
            })
        }
        _ => None,
    }
}

pub(crate) fn exact_volume(g: &Geom) -> Option<f64> {
    match g {
        Geom::PBall { p, dim } => Some(pball_volume(*p, *dim)),
        Geom::Ellip(e) => Some(e.volume()),
        Geom::Translate { inner, .. } => exact_volume(inner),
        Geom::LinearImage { inner, det_abs, .. } => Some(exact_volume(inner)? * det_abs),
        _ => exact_moments(g).map(|m| m.vol),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn unit_ball_volumes() {
        assert_relative_eq!(unit_ball_volume(2), PI, epsilon = 1e-12);
        assert_relative_eq!(unit_ball_volume(3), 4.0 * PI / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn pball_volume_cross_polytope() {
        // ||x||_1 < 1 in the plane: area 2.
        assert_relative_eq!(pball_volume(1.0, 2), 2.0, epsilon = 1e-12);
        // 3-D cross-polytope: 4/3.
        assert_relative_eq!(pball_volume(1.0, 3), 4.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn pball_second_moment_matches_disk_and_l1() {
        assert_relative_eq!(pball_second_moment(2.0, 2), 0.25, epsilon = 1e-14);
        // E[x^2] over ||x||_1 < 1 in 2-D: ∫ x^2 = 1/3, vol = 2 -> 1/6.
        assert_relative_eq!(pball_second_moment(1.0, 2), 1.0 / 6.0, epsilon = 1e-12);
    }
}
