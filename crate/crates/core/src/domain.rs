//! Funk, reverse-Funk, Hilbert and general Zermelo geometry on a convex
//! domain: pointwise norms, exact distance formulas, path lengths, Funk
//! metric balls and the complete-but-BL-bounded radial counterexample field.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::body::{Body, BodyError, BodySpec};
use crate::quadrature;
use crate::tol;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("drift value is not interior to the target body")]
    DriftOutsideTarget,
    #[error("query point lies on or outside the domain boundary")]
    PointOnBoundary,
    #[error("path leaves the domain")]
    PathExitsDomain,
    #[error("operation requires the unit-ball domain")]
    DomainNotUnitBall,
    #[error("direction must be nonzero")]
    DegenerateDirection,
    #[error(transparent)]
    Body(#[from] BodyError),
}

/// Drift family of a Zermelo field; arbitrary expressions are deliberately
/// not supported so that u(x) ∈ Ω can be validated.
#[derive(Debug, Clone)]
pub enum DriftFamily {
    /// u(x) = x: the Funk metric (tautological field).
    Identity,
    /// The reverse Funk metric: the reverse of the Identity field.
    Negation,
    /// u(x) = c: a Minkowski (translation-invariant) metric.
    Constant(DVector<f64>),
    /// Radial field on the unit ball alternating between the Funk and
    /// reverse-Funk bands W_{4k}..W_{4k+1} / W_{4k+2}..W_{4k+3}.
    CounterexampleRadial { k_max: usize },
    /// u(x) = φ(|x|)·x with φ tabulated and linearly interpolated.
    RadialProfile { radii: Vec<f64>, values: Vec<f64> },
}

/// A Zermelo field: domain, target body Ω and drift u. The pointwise unit
/// ball at x is Ω - u(x).
#[derive(Debug, Clone)]
pub struct ZermeloField {
    domain: Body,
    target: Body,
    drift: DriftFamily,
}

/// Radius of the Funk metric ball W_t about the origin of the unit ball.
pub fn funk_ball_radius(domain: &Body, t: f64) -> Result<f64, GeometryError> {
    let is_unit_ball = domain
        .geom()
        .try_ellipsoid()
        .map(|e| {
            e.center().amax() <= 1e-12
                && (e.shape_matrix() - nalgebra::DMatrix::identity(domain.dim(), domain.dim()))
                    .amax()
                    <= 1e-12
        })
        .unwrap_or(false);
    if !is_unit_ball {
        return Err(GeometryError::DomainNotUnitBall);
    }
    Ok(1.0 - (-t).exp())
}

/// C² piecewise-quintic radial profile of the counterexample drift:
/// +1 on the Funk bands [W_{4k}, W_{4k+1}], -1 on the reverse bands
/// [W_{4k+2}, W_{4k+3}], smooth-stepped in between; holds -1 beyond the
/// last reverse band.
pub fn counterexample_profile(r: f64, k_max: usize) -> f64 {
    let shell = |t: f64| 1.0 - (-t).exp();
    let smooth = |tau: f64| {
        let t = tau.clamp(0.0, 1.0);
        t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    };
    for k in 0..=k_max {
        let kf = 4.0 * k as f64;
        let r1 = shell(kf + 1.0);
        let r2 = shell(kf + 2.0);
        let r3 = shell(kf + 3.0);
        let r4 = shell(kf + 4.0);
        if r <= r1 {
            return 1.0;
        }
        if r <= r2 {
            return 1.0 - 2.0 * smooth((r - r1) / (r2 - r1));
        }
        if r <= r3 {
            return -1.0;
        }
        if k < k_max && r <= r4 {
            return -1.0 + 2.0 * smooth((r - r3) / (r4 - r3));
        }
    }
    -1.0
}

/// u(x) for the counterexample field.
pub fn counterexample_drift(x: &DVector<f64>, k_max: usize) -> DVector<f64> {
    let r = x.norm();
    x * counterexample_profile(r, k_max)
}

impl ZermeloField {
    /// Funk metric on `omega` (drift u(x) = x).
    pub fn funk(omega: Body) -> Result<Self, GeometryError> {
        if !omega.origin_interior() {
            return Err(BodyError::InvalidBody("funk domain needs the origin interior".into()).into());
        }
        Ok(Self { domain: omega.clone(), target: omega, drift: DriftFamily::Identity })
    }

    /// Reverse Funk metric on `omega`.
    pub fn reverse_funk(omega: Body) -> Result<Self, GeometryError> {
        if !omega.origin_interior() {
            return Err(BodyError::InvalidBody("funk domain needs the origin interior".into()).into());
        }
        Ok(Self { domain: omega.clone(), target: omega, drift: DriftFamily::Negation })
    }

    /// Translation-invariant field with constant drift c ∈ Ω over `domain`.
    pub fn constant(domain: Body, target: Body, c: DVector<f64>) -> Result<Self, GeometryError> {
        if !target.contains_interior(&c) {
            return Err(GeometryError::DriftOutsideTarget);
        }
        Ok(Self { domain, target, drift: DriftFamily::Constant(c) })
    }

    /// The counterexample field on the unit ball.
    pub fn counterexample(dim: usize, k_max: usize) -> Result<Self, GeometryError> {
        let ball = BodySpec::unit_ball(dim).build()?;
        Ok(Self { domain: ball.clone(), target: ball, drift: DriftFamily::CounterexampleRadial { k_max } })
    }

    /// Radial profile field u(x) = φ(|x|)·x on the unit ball; |φ| <= 1.
    pub fn radial_profile(
        dim: usize,
        radii: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self, GeometryError> {
        if radii.len() != values.len() || radii.len() < 2 {
            return Err(BodyError::InvalidBody("radial profile needs matching tables".into()).into());
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) || radii.iter().any(|r| !(0.0..1.0).contains(r)) {
            return Err(BodyError::InvalidBody("profile radii must increase within [0,1)".into()).into());
        }
        if values.iter().any(|v| v.abs() > 1.0) {
            return Err(GeometryError::DriftOutsideTarget);
        }
        let ball = BodySpec::unit_ball(dim).build()?;
        Ok(Self { domain: ball.clone(), target: ball, drift: DriftFamily::RadialProfile { radii, values } })
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &Body {
        &self.domain
    }

    pub fn target(&self) -> &Body {
        &self.target
    }

    pub fn drift(&self) -> &DriftFamily {
        &self.drift
    }

    /// Drift value u(x).
    pub fn drift_at(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.drift {
            DriftFamily::Identity => x.clone(),
            DriftFamily::Negation => x.clone(), // reversal is applied to ξ
            DriftFamily::Constant(c) => c.clone(),
            DriftFamily::CounterexampleRadial { k_max } => counterexample_drift(x, *k_max),
            DriftFamily::RadialProfile { radii, values } => {
                let r = x.norm();
                x * interp_clamped(radii, values, r)
            }
        }
    }

    /// Pointwise Finsler norm F(x, ξ): the gauge of Ω - u(x) at ξ.
    pub fn norm(&self, x: &DVector<f64>, xi: &DVector<f64>) -> Result<f64, GeometryError> {
        if !self.domain.contains_interior(x) {
            return Err(GeometryError::PointOnBoundary);
        }
        if xi.amax() == 0.0 {
            return Ok(0.0);
        }
        let (base, flip) = match &self.drift {
            DriftFamily::Identity => (x.clone(), false),
            // The reverse field measures ξ with the Funk ball at -ξ.
            DriftFamily::Negation => (x.clone(), true),
            DriftFamily::Constant(c) => (c.clone(), false),
            _ => (self.drift_at(x), false),
        };
        if !self.target.contains_interior(&base) {
            return Err(GeometryError::DriftOutsideTarget);
        }
        let dir = if flip { -xi } else { xi.clone() };
        let t = self.target.boundary_hit(&base, &dir)?;
        Ok(1.0 / t)
    }

    /// Length of a polyline under the field, by adaptive Gauss-Legendre
    /// quadrature per segment.
    pub fn path_length(&self, path: &Polyline) -> Result<f64, GeometryError> {
        path.validate(&self.domain)?;
        let pts = path.points_vec();
        let mut total = 0.0;
        for seg in pts.windows(2) {
            let p = &seg[0];
            let vel = &seg[1] - p;
            let f = |t: f64| -> Result<f64, GeometryError> {
                let x = p + &vel * t;
                self.norm(&x, &vel)
            };
            total += adaptive_segment(&f, 0.0, 1.0, path.order, 0)?;
        }
        Ok(total)
    }
}

fn interp_clamped(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let i = xs.partition_point(|&v| v <= x).min(xs.len() - 1);
    let (x0, x1) = (xs[i - 1], xs[i]);
    let (y0, y1) = (ys[i - 1], ys[i]);
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

fn gl_segment<F: Fn(f64) -> Result<f64, GeometryError>>(
    f: &F,
    a: f64,
    b: f64,
    order: usize,
) -> Result<f64, GeometryError> {
    let rule: std::borrow::Cow<'_, (Vec<f64>, Vec<f64>)> = if order == 16 {
        std::borrow::Cow::Borrowed(quadrature::gauss_legendre_16())
    } else {
        std::borrow::Cow::Owned(quadrature::gauss_legendre(order))
    };
    let (nodes, weights) = rule.as_ref();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut s = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        s += w * f(mid + half * x)?;
    }
    Ok(s * half)
}

fn adaptive_segment<F: Fn(f64) -> Result<f64, GeometryError>>(
    f: &F,
    a: f64,
    b: f64,
    order: usize,
    depth: usize,
) -> Result<f64, GeometryError> {
    let whole = gl_segment(f, a, b, order)?;
    let mid = 0.5 * (a + b);
    let left = gl_segment(f, a, mid, order)?;
    let right = gl_segment(f, mid, b, order)?;
    let refined = left + right;
    if (refined - whole).abs() <= tol::PATH_QUAD_TOL * refined.abs().max(1e-300) || depth >= 24 {
        return Ok(refined);
    }
    Ok(adaptive_segment(f, a, mid, order, depth + 1)?
        + adaptive_segment(f, mid, b, order, depth + 1)?)
}

/// Piecewise-linear path with a quadrature order per segment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<Vec<f64>>,
    #[serde(default = "default_order")]
    pub order: usize,
}

fn default_order() -> usize {
    16
}

impl Polyline {
    pub fn new(points: Vec<DVector<f64>>) -> Self {
        Self { points: points.iter().map(|p| p.iter().copied().collect()).collect(), order: 16 }
    }

    fn validate(&self, domain: &Body) -> Result<(), GeometryError> {
        if self.points.len() < 2 {
            return Err(BodyError::InvalidBody("polyline needs at least two points".into()).into());
        }
        let pts: Vec<DVector<f64>> =
            self.points.iter().map(|p| DVector::from_vec(p.clone())).collect();
        for w in pts.windows(2) {
            if (&w[1] - &w[0]).amax() == 0.0 {
                return Err(
                    BodyError::InvalidBody("consecutive polyline points coincide".into()).into()
                );
            }
        }
        for p in &pts {
            if !domain.contains_interior(p) {
                return Err(GeometryError::PathExitsDomain);
            }
        }
        Ok(())
    }

    fn points_vec(&self) -> Vec<DVector<f64>> {
        self.points.iter().map(|p| DVector::from_vec(p.clone())).collect()
    }
}

/// Funk distance: with a the boundary point hit by the ray from p through q
/// beyond q, d(p, q) = log(|a-p| / |a-q|).
pub fn funk_distance(
    domain: &Body,
    p: &DVector<f64>,
    q: &DVector<f64>,
) -> Result<f64, GeometryError> {
    check_pair(domain, p, q)?;
    let delta = q - p;
    let dist = delta.norm();
    if dist == 0.0 {
        return Ok(0.0);
    }
    let dir = &delta / dist;
    let t = domain.boundary_hit(q, &dir)?;
    Ok(((dist + t) / t).ln())
}

/// Reverse-Funk distance: with b the boundary point hit by the ray from q
/// through p beyond p, d(p, q) = log(|b-q| / |b-p|).
pub fn rfunk_distance(
    domain: &Body,
    p: &DVector<f64>,
    q: &DVector<f64>,
) -> Result<f64, GeometryError> {
    check_pair(domain, p, q)?;
    let delta = p - q;
    let dist = delta.norm();
    if dist == 0.0 {
        return Ok(0.0);
    }
    let dir = &delta / dist;
    let t = domain.boundary_hit(p, &dir)?;
    Ok(((dist + t) / t).ln())
}

/// Hilbert distance: half the log cross-ratio of (a, q, p, b).
pub fn hilbert_distance(
    domain: &Body,
    p: &DVector<f64>,
    q: &DVector<f64>,
) -> Result<f64, GeometryError> {
    Ok(0.5 * (funk_distance(domain, p, q)? + rfunk_distance(domain, p, q)?))
}

/// Hilbert norm: the symmetrized Funk gauge ½(F(x,ξ) + F(x,-ξ)).
pub fn hilbert_norm(
    domain: &Body,
    x: &DVector<f64>,
    xi: &DVector<f64>,
) -> Result<f64, GeometryError> {
    if !domain.contains_interior(x) {
        return Err(GeometryError::PointOnBoundary);
    }
    if xi.amax() == 0.0 {
        return Ok(0.0);
    }
    let tp = domain.boundary_hit(x, xi)?;
    let tm = domain.boundary_hit(x, &(-xi))?;
    Ok(0.5 * (1.0 / tp + 1.0 / tm))
}

fn check_pair(domain: &Body, p: &DVector<f64>, q: &DVector<f64>) -> Result<(), GeometryError> {
    if !domain.contains_interior(p) || !domain.contains_interior(q) {
        return Err(GeometryError::PointOnBoundary);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(v)
    }

    fn disk() -> Body {
        BodySpec::unit_ball(2).build().unwrap()
    }

    fn square() -> Body {
        BodySpec::cube(2).build().unwrap()
    }

    #[test]
    fn funk_norms_on_the_disk() {
        let f = ZermeloField::funk(disk()).unwrap();
        // 1 / (distance to the boundary).
        assert_relative_eq!(f.norm(&dv(&[0.5, 0.0]), &dv(&[1.0, 0.0])).unwrap(), 2.0, epsilon = 1e-12);
        let r = ZermeloField::reverse_funk(disk()).unwrap();
        assert_relative_eq!(
            r.norm(&dv(&[0.5, 0.0]), &dv(&[1.0, 0.0])).unwrap(),
            2.0 / 3.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn constant_drift_is_translation_invariant() {
        let f = ZermeloField::constant(square(), disk(), dv(&[0.3, 0.1])).unwrap();
        let xi = dv(&[1.0, -0.5]);
        let n1 = f.norm(&dv(&[0.0, 0.0]), &xi).unwrap();
        let n2 = f.norm(&dv(&[0.5, -0.7]), &xi).unwrap();
        assert_relative_eq!(n1, n2, epsilon = 1e-12);
    }

    #[test]
    fn drift_outside_target_is_reported() {
        assert!(matches!(
            ZermeloField::constant(square(), disk(), dv(&[1.5, 0.0])),
            Err(GeometryError::DriftOutsideTarget)
        ));
    }

    #[test]
    fn funk_distance_reference_values() {
        let d = disk();
        let o = dv(&[0.0, 0.0]);
        let x = dv(&[0.5, 0.0]);
        // log(1/(1-|x|)) from the origin.
        assert_relative_eq!(funk_distance(&d, &o, &x).unwrap(), 2.0_f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(funk_distance(&d, &x, &o).unwrap(), 1.5_f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(funk_distance(&d, &x, &x).unwrap(), 0.0, epsilon = 0.0);
        // Reverse identity.
        assert_relative_eq!(rfunk_distance(&d, &o, &x).unwrap(), 1.5_f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(rfunk_distance(&d, &x, &o).unwrap(), 2.0_f64.ln(), epsilon = 1e-12);
        assert_eq!(
            rfunk_distance(&d, &o, &x).unwrap(),
            funk_distance(&d, &x, &o).unwrap()
        );
    }

    #[test]
    fn hilbert_distance_reference_values() {
        let o = dv(&[0.0, 0.0]);
        let x = dv(&[0.5, 0.0]);
        let expect = 0.5 * 3.0_f64.ln();
        assert_relative_eq!(hilbert_distance(&disk(), &o, &x).unwrap(), expect, epsilon = 1e-12);
        // Same boundary hits on the x-axis of the square.
        assert_relative_eq!(hilbert_distance(&square(), &o, &x).unwrap(), expect, epsilon = 1e-12);
        assert_eq!(
            hilbert_distance(&disk(), &o, &x).unwrap(),
            hilbert_distance(&disk(), &x, &o).unwrap()
        );
    }

    #[test]
    fn hilbert_norm_reference_values() {
        let d = disk();
        let x = dv(&[0.5, 0.0]);
        assert_relative_eq!(
            hilbert_norm(&d, &x, &dv(&[1.0, 0.0])).unwrap(),
            0.5 * (2.0 + 2.0 / 3.0),
            epsilon = 1e-12
        );
        let o = dv(&[0.0, 0.0]);
        assert_relative_eq!(hilbert_norm(&d, &o, &dv(&[0.0, 1.0])).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(
            hilbert_norm(&d, &x, &dv(&[0.3, 0.7])).unwrap(),
            hilbert_norm(&d, &x, &dv(&[-0.3, -0.7])).unwrap()
        );
    }

    #[test]
    fn boundary_points_are_rejected() {
        let d = disk();
        let r = funk_distance(&d, &dv(&[1.0, 0.0]), &dv(&[0.0, 0.0]));
        assert!(matches!(r, Err(GeometryError::PointOnBoundary)));
    }

    #[test]
    fn straight_segments_realize_funk_distance() {
        let f = ZermeloField::funk(disk()).unwrap();
        let path = Polyline::new(vec![dv(&[0.0, 0.0]), dv(&[0.5, 0.0])]);
        let len = f.path_length(&path).unwrap();
        assert_relative_eq!(len, 2.0_f64.ln(), epsilon = 1e-6);
        let r = ZermeloField::reverse_funk(disk()).unwrap();
        let len = r.path_length(&path).unwrap();
        assert_relative_eq!(len, 1.5_f64.ln(), epsilon = 1e-6);
    }

    #[test]
    fn constant_field_segment_length_is_minkowski() {
        // Segment of Euclidean length s in direction ξ costs s·gauge(Ω-c, ξ).
        let f = ZermeloField::constant(square(), disk(), dv(&[0.5, 0.0])).unwrap();
        let path = Polyline::new(vec![dv(&[-0.5, -0.5]), dv(&[0.0, -0.5])]);
        // Ω - c = disk centered at -c: gauge((1,0)) = 2.
        let len = f.path_length(&path).unwrap();
        assert_relative_eq!(len, 0.5 * 2.0, epsilon = 1e-9);
    }

    #[test]
    fn path_exits_domain_is_reported() {
        let f = ZermeloField::funk(disk()).unwrap();
        let path = Polyline::new(vec![dv(&[0.0, 0.0]), dv(&[1.5, 0.0])]);
        assert!(matches!(f.path_length(&path), Err(GeometryError::PathExitsDomain)));
    }

    #[test]
    fn funk_ball_radii() {
        let d = disk();
        assert_relative_eq!(funk_ball_radius(&d, 0.0).unwrap(), 0.0, epsilon = 0.0);
        assert_relative_eq!(funk_ball_radius(&d, 2.0_f64.ln()).unwrap(), 0.5, epsilon = 1e-15);
        assert!(funk_ball_radius(&d, 30.0).unwrap() < 1.0);
        assert!(matches!(
            funk_ball_radius(&square(), 1.0),
            Err(GeometryError::DomainNotUnitBall)
        ));
    }

    #[test]
    fn counterexample_bands() {
        // |x| = 0.3 < 1 - 1/e: inside the first Funk band.
        assert_eq!(counterexample_profile(0.3, 3), 1.0);
        // Reverse band [1-e^{-2}, 1-e^{-3}].
        let r = 0.5 * ((1.0 - (-2.0_f64).exp()) + (1.0 - (-3.0_f64).exp()));
        assert_eq!(counterexample_profile(r, 3), -1.0);
        // u(0) = 0.
        assert_eq!(counterexample_drift(&dv(&[0.0, 0.0]), 3).amax(), 0.0);
        // |u| <= |x| everywhere.
        for r in [0.1, 0.63, 0.8, 0.95, 0.999] {
            let x = dv(&[r, 0.0]);
            assert!(counterexample_drift(&x, 3).norm() <= x.norm() + 1e-15);
        }
        // The profile is continuous across a blend edge.
        let r1 = 1.0 - (-1.0_f64).exp();
        let eps = 1e-9;
        let a = counterexample_profile(r1 - eps, 3);
        let b = counterexample_profile(r1 + eps, 3);
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn counterexample_field_matches_funk_in_first_band() {
        let field = ZermeloField::counterexample(2, 3).unwrap();
        let funk = ZermeloField::funk(disk()).unwrap();
        let x = dv(&[0.3, 0.1]);
        let xi = dv(&[0.2, -1.0]);
        assert_relative_eq!(
            field.norm(&x, &xi).unwrap(),
            funk.norm(&x, &xi).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn radial_profile_field_interpolates() {
        let f = ZermeloField::radial_profile(2, vec![0.0, 0.5, 0.9], vec![1.0, 0.0, -1.0]).unwrap();
        let u = f.drift_at(&dv(&[0.25, 0.0]));
        assert_relative_eq!(u[0], 0.25 * 0.5, epsilon = 1e-12);
        assert!(ZermeloField::radial_profile(2, vec![0.0, 0.5], vec![1.0, 2.0]).is_err());
    }
}
