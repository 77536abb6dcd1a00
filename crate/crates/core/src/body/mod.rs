//! Bounded convex bodies and their gauge (Minkowski functional) primitives.
//!
//! A [`BodySpec`] is the serializable description; [`Body`] is the validated
//! form exposing gauge, membership, boundary-ray, volume/moment and sampling
//! operations. Wrapper specs (translate, linear image, symmetrize) are
//! canonicalized at construction where an exact closed form exists, so the
//! common gauge paths are allocation-free facet or ellipsoid arithmetic.

pub(crate) mod hull;
pub(crate) mod lp;
pub(crate) mod moments;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;
use crate::rng::{block_rng, DirectionSet};
use crate::tol;
use rand::Rng;

pub use moments::unit_ball_volume;

#[derive(Debug, Error)]
pub enum BodyError {
    #[error("invalid body: {0}")]
    InvalidBody(String),
    #[error("base point is not interior to the body")]
    NotInterior,
    #[error("direction must be nonzero")]
    DegenerateDirection,
    #[error("method unsupported: {0}")]
    MethodUnsupported(String),
    #[error("sample budget too small: {0} < {1}")]
    SampleBudgetTooSmall(usize, usize),
    #[error("rejection sampling stalled: acceptance rate {rate:.2e} after {trials} trials")]
    RejectionStall { rate: f64, trials: u64 },
}

/// Serializable description of a bounded convex body.
///
/// The JSON encoding is tagged by `type` with values `polytope_h`,
/// `polytope_v`, `pball`, `ellipsoid`, `translate`, `linear_image`,
/// `symmetrize`; all numeric arrays are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    PolytopeH {
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    PolytopeV {
        vertices: Vec<Vec<f64>>,
    },
    #[serde(rename = "pball")]
    PBall {
        p: f64,
        dim: usize,
    },
    Ellipsoid {
        center: Vec<f64>,
        factor: Vec<Vec<f64>>,
    },
    Translate {
        inner: Box<BodySpec>,
        offset: Vec<f64>,
    },
    LinearImage {
        inner: Box<BodySpec>,
        map: Vec<Vec<f64>>,
    },
    #[serde(rename = "symmetrize")]
    Symmetrized {
        inner: Box<BodySpec>,
    },
}

impl BodySpec {
    pub fn build(&self) -> Result<Body, BodyError> {
        Body::new(self.clone())
    }

    /// Euclidean unit ball.
    pub fn unit_ball(dim: usize) -> Self {
        BodySpec::PBall { p: 2.0, dim }
    }

    /// The cube [-1, 1]^dim in facet form.
    pub fn cube(dim: usize) -> Self {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for i in 0..dim {
            for s in [1.0, -1.0] {
                let mut row = vec![0.0; dim];
                row[i] = s;
                a.push(row);
                b.push(1.0);
            }
        }
        BodySpec::PolytopeH { a, b }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("body specs always serialize")
    }
}

/// Ellipsoid `{center + L z : |z| <= 1}` with lower-triangular `L`,
/// positive diagonal. Doubles as a convex body and as the John solver output.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    center: DVector<f64>,
    factor: DMatrix<f64>,
}

impl Ellipsoid {
    pub fn new(center: DVector<f64>, factor: DMatrix<f64>) -> Result<Self, BodyError> {
        let n = center.len();
        if factor.nrows() != n || factor.ncols() != n {
            return Err(BodyError::InvalidBody("ellipsoid factor shape mismatch".into()));
        }
        for i in 0..n {
            if !(factor[(i, i)] > 0.0) {
                return Err(BodyError::InvalidBody(
                    "ellipsoid factor needs a positive diagonal".into(),
                ));
            }
            for j in (i + 1)..n {
                if factor[(i, j)].abs() > 1e-12 {
                    return Err(BodyError::InvalidBody(
                        "ellipsoid factor must be lower-triangular".into(),
                    ));
                }
            }
        }
        Ok(Self { center, factor })
    }

    pub fn unit_ball(dim: usize) -> Self {
        Self { center: DVector::zeros(dim), factor: DMatrix::identity(dim, dim) }
    }

    pub fn ball(center: DVector<f64>, radius: f64) -> Self {
        let n = center.len();
        Self { center, factor: DMatrix::identity(n, n) * radius }
    }

    /// Ellipsoid with the given center whose shape matrix (L Lᵀ) is `shape`.
    pub fn from_shape_matrix(center: DVector<f64>, shape: &DMatrix<f64>) -> Option<Self> {
        let l = linalg::cholesky_lower(shape)?;
        Some(Self { center, factor: l })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// L Lᵀ.
    pub fn shape_matrix(&self) -> DMatrix<f64> {
        &self.factor * self.factor.transpose()
    }

    pub fn det_factor(&self) -> f64 {
        (0..self.dim()).map(|i| self.factor[(i, i)]).product()
    }

    pub fn volume(&self) -> f64 {
        unit_ball_volume(self.dim()) * self.det_factor()
    }

    /// Support function `max {d·x : x in E}`.
    pub fn support(&self, d: &DVector<f64>) -> f64 {
        self.center.dot(d) + (self.factor.transpose() * d).norm()
    }

    /// Minkowski gauge about the origin; infinite when the origin is not
    /// interior. Closed form from the quadratic along the ray.
    pub fn gauge(&self, xi: &DVector<f64>) -> f64 {
        let w = self
            .factor
            .solve_lower_triangular(xi)
            .expect("positive diagonal guarantees solvability");
        let d = self
            .factor
            .solve_lower_triangular(&self.center)
            .expect("positive diagonal guarantees solvability");
        let wn = w.norm_squared();
        if wn == 0.0 {
            return 0.0;
        }
        let dd = 1.0 - d.norm_squared();
        if dd <= 0.0 {
            return f64::INFINITY;
        }
        let wd = w.dot(&d);
        (-wd + (wd * wd + dd * wn).sqrt()) / dd
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        let z = self
            .factor
            .solve_lower_triangular(&(x - &self.center))
            .expect("positive diagonal guarantees solvability");
        z.norm() <= 1.0
    }

    /// Exit parameter of the ray base + t·dir, for base inside.
    pub fn ray_exit(&self, base: &DVector<f64>, dir: &DVector<f64>) -> Option<f64> {
        let w = self.factor.solve_lower_triangular(dir)?;
        let z = self.factor.solve_lower_triangular(&(base - &self.center))?;
        let a = w.norm_squared();
        if a == 0.0 {
            return None;
        }
        let b = z.dot(&w);
        let c = z.norm_squared() - 1.0;
        let disc = b * b - a * c;
        if disc < 0.0 {
            return None;
        }
        let t = (-b + disc.sqrt()) / a;
        (t > 0.0).then_some(t)
    }

    pub fn translated(&self, v: &DVector<f64>) -> Self {
        Self { center: &self.center + v, factor: self.factor.clone() }
    }

    /// Image under an invertible linear map.
    pub fn mapped(&self, m: &DMatrix<f64>) -> Option<Self> {
        let ml = m * &self.factor;
        let l = linalg::cholesky_lower(&(&ml * ml.transpose()))?;
        Some(Self { center: m * &self.center, factor: l })
    }

    /// Scaled about the origin by `s > 0`.
    pub fn scaled(&self, s: f64) -> Self {
        Self { center: &self.center * s, factor: &self.factor * s }
    }

    /// Scaled about its own center by `s > 0`.
    pub fn scaled_about_center(&self, s: f64) -> Self {
        Self { center: self.center.clone(), factor: &self.factor * s }
    }
}

/// Canonicalized geometry tree.
#[derive(Debug, Clone)]
pub(crate) enum Geom {
    PolytopeH {
        a: DMatrix<f64>,
        b: DVector<f64>,
        hull: Option<hull::Hull>,
    },
    PolytopeV {
        verts: Vec<DVector<f64>>,
        hull: Option<hull::Hull>,
    },
    PBall {
        p: f64,
        dim: usize,
    },
    Ellip(Ellipsoid),
    Translate {
        inner: Box<Geom>,
        offset: DVector<f64>,
    },
    LinearImage {
        inner: Box<Geom>,
        map: DMatrix<f64>,
        inv: DMatrix<f64>,
        det_abs: f64,
    },
    Symmetrized {
        inner: Box<Geom>,
    },
}

fn norm_p(xi: &DVector<f64>, p: f64) -> f64 {
    if (p - 1.0).abs() < 1e-14 {
        return xi.iter().map(|v| v.abs()).sum();
    }
    let mx = xi.amax();
    if mx == 0.0 {
        return 0.0;
    }
    // Scale out the max to keep powf well-conditioned.
    let s: f64 = xi.iter().map(|v| (v.abs() / mx).powf(p)).sum();
    mx * s.powf(1.0 / p)
}

impl Geom {
    fn dim(&self) -> usize {
        match self {
            Geom::PolytopeH { a, .. } => a.ncols(),
            Geom::PolytopeV { verts, .. } => verts[0].len(),
            Geom::PBall { dim, .. } => *dim,
            Geom::Ellip(e) => e.dim(),
            Geom::Translate { inner, .. } => inner.dim(),
            Geom::LinearImage { inner, .. } => inner.dim(),
            Geom::Symmetrized { inner } => inner.dim(),
        }
    }

    /// Gauge about the origin. Assumes the origin is interior (checked once
    /// at the `Body` level); may return +inf when it is not.
    pub(crate) fn gauge(&self, xi: &DVector<f64>) -> f64 {
        match self {
            Geom::PolytopeH { a, b, .. } => {
                let mut g = 0.0_f64;
                for i in 0..a.nrows() {
                    let mut dot = 0.0;
                    for j in 0..a.ncols() {
                        dot += a[(i, j)] * xi[j];
                    }
                    if dot > 0.0 {
                        if b[i] <= 0.0 {
                            return f64::INFINITY;
                        }
                        g = g.max(dot / b[i]);
                    }
                }
                g
            }
            Geom::PolytopeV { verts, hull } => match hull {
                Some(h) => Geom::PolytopeH {
                    a: h.facets.a.clone(),
                    b: h.facets.b.clone(),
                    hull: None,
                }
                .gauge(xi),
                None => lp::vpoly_gauge(verts, xi).unwrap_or(f64::INFINITY),
            },
            Geom::PBall { p, .. } => norm_p(xi, *p),
            Geom::Ellip(e) => e.gauge(xi),
            Geom::Translate { .. } => match self.ray_exit(&DVector::zeros(xi.len()), xi) {
                Some(t) if t > 0.0 => 1.0 / t,
                _ => {
                    if xi.amax() == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                }
            },
            Geom::LinearImage { inner, inv, .. } => inner.gauge(&(inv * xi)),
            Geom::Symmetrized { inner } => 0.5 * (inner.gauge(xi) + inner.gauge(&(-xi))),
        }
    }

    pub(crate) fn contains(&self, x: &DVector<f64>) -> bool {
        match self {
            Geom::PolytopeH { a, b, .. } => {
                (0..a.nrows()).all(|i| a.row(i).transpose().dot(x) <= b[i])
            }
            Geom::PolytopeV { verts, hull } => match hull {
                Some(h) => {
                    (0..h.facets.a.nrows()).all(|i| {
                        h.facets.a.row(i).transpose().dot(x) <= h.facets.b[i]
                    })
                }
                None => lp::vpoly_contains(verts, x),
            },
            Geom::PBall { p, .. } => norm_p(x, *p) <= 1.0,
            Geom::Ellip(e) => e.contains(x),
            Geom::Translate { inner, offset } => inner.contains(&(x - offset)),
            Geom::LinearImage { inner, inv, .. } => inner.contains(&(inv * x)),
            Geom::Symmetrized { .. } => self.gauge(x) <= 1.0,
        }
    }

    /// Strict interiority with a relative margin.
    fn contains_interior(&self, x: &DVector<f64>, margin: f64) -> bool {
        match self {
            Geom::PolytopeH { a, b, .. } => (0..a.nrows()).all(|i| {
                let row = a.row(i).transpose();
                row.dot(x) <= b[i] - margin * row.norm().max(1e-300)
            }),
            Geom::PolytopeV { verts, hull } => match hull {
                Some(h) => Geom::PolytopeH {
                    a: h.facets.a.clone(),
                    b: h.facets.b.clone(),
                    hull: None,
                }
                .contains_interior(x, margin),
                None => {
                    // LP membership gives no margin; shrink the query instead.
                    lp::vpoly_contains(verts, x)
                        && verts.iter().any(|v| (v - x).norm() > margin)
                }
            },
            Geom::PBall { p, .. } => norm_p(x, *p) < 1.0 - margin,
            Geom::Ellip(e) => {
                let z = e
                    .factor
                    .solve_lower_triangular(&(x - &e.center))
                    .expect("positive diagonal guarantees solvability");
                z.norm() < 1.0 - margin
            }
            Geom::Translate { inner, offset } => inner.contains_interior(&(x - offset), margin),
            Geom::LinearImage { inner, inv, .. } => inner.contains_interior(&(inv * x), margin),
            Geom::Symmetrized { .. } => self.gauge(x) < 1.0 - margin,
        }
    }

    /// Exit parameter t > 0 with base + t·dir on the boundary, base interior.
    pub(crate) fn ray_exit(&self, base: &DVector<f64>, dir: &DVector<f64>) -> Option<f64> {
        match self {
            Geom::PolytopeH { a, b, .. } => {
                let mut t = f64::INFINITY;
                for i in 0..a.nrows() {
                    let row = a.row(i).transpose();
                    let den = row.dot(dir);
                    if den > 1e-300 {
                        let num = b[i] - row.dot(base);
                        let ti = num / den;
                        if ti < t {
                            t = ti;
                        }
                    }
                }
                (t.is_finite() && t > 0.0).then_some(t)
            }
            Geom::PolytopeV { verts, hull } => match hull {
                Some(h) => Geom::PolytopeH {
                    a: h.facets.a.clone(),
                    b: h.facets.b.clone(),
                    hull: None,
                }
                .ray_exit(base, dir),
                None => lp::vpoly_ray_exit(verts, base, dir).filter(|t| *t > 0.0),
            },
            Geom::PBall { p, .. } => {
                let f = |t: f64| {
                    let x = base + dir * t;
                    norm_p(&x, *p) - 1.0
                };
                bisect_root(f)
            }
            Geom::Ellip(e) => e.ray_exit(base, dir),
            Geom::Translate { inner, offset } => inner.ray_exit(&(base - offset), dir),
            Geom::LinearImage { inner, inv, .. } => {
                inner.ray_exit(&(inv * base), &(inv * dir))
            }
            Geom::Symmetrized { .. } => {
                let f = |t: f64| {
                    let x = base + dir * t;
                    self.gauge(&x) - 1.0
                };
                bisect_root(f)
            }
        }
    }

    fn is_symmetric(&self) -> bool {
        match self {
            Geom::PolytopeH { a, b, .. } => {
                let m = a.nrows();
                (0..m).all(|i| {
                    let ri = a.row(i).transpose();
                    let ni = ri.norm();
                    (0..m).any(|j| {
                        let rj = a.row(j).transpose();
                        let nj = rj.norm();
                        (&ri / ni + &rj / nj).amax() <= 1e-9
                            && (b[i] / ni - b[j] / nj).abs() <= 1e-9
                    })
                })
            }
            Geom::PolytopeV { verts, .. } => verts.iter().all(|v| {
                verts.iter().any(|w| (v + w).amax() <= 1e-9)
            }),
            Geom::PBall { .. } => true,
            Geom::Ellip(e) => e.center.amax() <= 1e-12,
            Geom::Translate { inner, offset } => {
                offset.amax() <= 1e-12 && inner.is_symmetric()
            }
            Geom::LinearImage { inner, .. } => inner.is_symmetric(),
            Geom::Symmetrized { .. } => true,
        }
    }

    fn has_nonconvex_pball(&self) -> bool {
        match self {
            Geom::PBall { p, .. } => *p < 1.0,
            Geom::Translate { inner, .. }
            | Geom::LinearImage { inner, .. }
            | Geom::Symmetrized { inner } => inner.has_nonconvex_pball(),
            _ => false,
        }
    }

    fn origin_interior(&self) -> bool {
        match self {
            // Facet offsets must be strictly positive; no recentering.
            Geom::PolytopeH { b, .. } => b.iter().all(|&v| v > 0.0),
            Geom::PolytopeV { verts, hull } => match hull {
                Some(h) => h.facets.b.iter().all(|&v| v > 1e-12),
                None => {
                    let zero = DVector::zeros(verts[0].len());
                    lp::vpoly_contains(verts, &zero)
                        && DirectionSet::new(verts[0].len(), 16 * verts[0].len(), 0xB0B)
                            .iter()
                            .all(|d| lp::vpoly_gauge(verts, d).is_some())
                }
            },
            Geom::PBall { .. } => true,
            Geom::Ellip(e) => {
                let d = e
                    .factor
                    .solve_lower_triangular(&e.center)
                    .expect("positive diagonal guarantees solvability");
                d.norm() < 1.0 - 1e-12
            }
            Geom::Translate { inner, offset } => {
                inner.contains_interior(&(-offset), 1e-12)
            }
            Geom::LinearImage { inner, .. } => inner.origin_interior(),
            Geom::Symmetrized { inner } => inner.origin_interior(),
        }
    }

    pub(crate) fn try_vertices(&self) -> Option<Vec<DVector<f64>>> {
        match self {
            Geom::PolytopeH { hull: Some(h), .. } | Geom::PolytopeV { hull: Some(h), .. } => {
                Some(h.verts.clone())
            }
            Geom::PolytopeV { verts, hull: None } => Some(verts.clone()),
            _ => None,
        }
    }

    pub(crate) fn try_facets(&self) -> Option<(DMatrix<f64>, DVector<f64>)> {
        match self {
            Geom::PolytopeH { a, b, .. } => Some((a.clone(), b.clone())),
            Geom::PolytopeV { hull: Some(h), .. } => {
                Some((h.facets.a.clone(), h.facets.b.clone()))
            }
            _ => None,
        }
    }

    pub(crate) fn try_ellipsoid(&self) -> Option<&Ellipsoid> {
        match self {
            Geom::Ellip(e) => Some(e),
            _ => None,
        }
    }
}

/// Root of an increasing-at-the-root function along t >= 0 with f(0) < 0:
/// bracket by doubling, then bisect to machine-level relative width.
fn bisect_root<F: Fn(f64) -> f64>(f: F) -> Option<f64> {
    if !(f(0.0) < 0.0) {
        return None;
    }
    let mut hi = 1.0_f64;
    let mut guard = 0;
    while f(hi) <= 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return None;
        }
    }
    let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= tol::BISECT_TOL * hi.max(1.0) * 1e-3 {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

fn rows_matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>, BodyError> {
    linalg::rows_to_matrix(rows)
        .ok_or_else(|| BodyError::InvalidBody(format!("{what}: ragged or empty matrix")))
}

fn build_geom(spec: &BodySpec) -> Result<Geom, BodyError> {
    let geom = match spec {
        BodySpec::PolytopeH { a, b } => {
            let a = rows_matrix(a, "polytope_h a")?;
            let b = DVector::from_vec(b.clone());
            let (m, n) = (a.nrows(), a.ncols());
            if b.len() != m {
                return Err(BodyError::InvalidBody("polytope_h: |b| != rows of a".into()));
            }
            check_dim(n)?;
            if m < n + 1 {
                return Err(BodyError::InvalidBody("polytope_h: too few facets to bound".into()));
            }
            for i in 0..m {
                if a.row(i).norm() <= 1e-14 {
                    return Err(BodyError::InvalidBody("polytope_h: zero facet normal".into()));
                }
            }
            let hull = if n <= 3 {
                let verts = hull::enumerate_vertices(&a, &b).ok_or_else(|| {
                    BodyError::InvalidBody("polytope_h: unbounded or degenerate".into())
                })?;
                Some(hull::hull(&verts).ok_or_else(|| {
                    BodyError::InvalidBody("polytope_h: degenerate hull".into())
                })?)
            } else {
                None
            };
            Geom::PolytopeH { a, b, hull }
        }
        BodySpec::PolytopeV { vertices } => {
            let verts: Vec<DVector<f64>> =
                vertices.iter().map(|v| DVector::from_vec(v.clone())).collect();
            let n = verts.first().map(|v| v.len()).unwrap_or(0);
            check_dim(n)?;
            if verts.iter().any(|v| v.len() != n) {
                return Err(BodyError::InvalidBody("polytope_v: mixed dimensions".into()));
            }
            if verts.len() < n + 1 {
                return Err(BodyError::InvalidBody("polytope_v: too few vertices".into()));
            }
            let diffs = DMatrix::from_fn(verts.len() - 1, n, |i, j| verts[i + 1][j] - verts[0][j]);
            if diffs.rank(1e-10) < n {
                return Err(BodyError::InvalidBody("polytope_v: not full-dimensional".into()));
            }
            let hull = if n <= 3 {
                Some(hull::hull(&verts).ok_or_else(|| {
                    BodyError::InvalidBody("polytope_v: degenerate hull".into())
                })?)
            } else {
                None
            };
            match hull {
                Some(h) => Geom::PolytopeV { verts: h.verts.clone(), hull: Some(h) },
                None => Geom::PolytopeV { verts, hull: None },
            }
        }
        BodySpec::PBall { p, dim } => {
            check_dim(*dim)?;
            if !(p.is_finite() && *p > 0.0) {
                return Err(BodyError::InvalidBody("pball: p must be positive".into()));
            }
            if (*p - 2.0).abs() < 1e-12 {
                Geom::Ellip(Ellipsoid::unit_ball(*dim))
            } else {
                Geom::PBall { p: *p, dim: *dim }
            }
        }
        BodySpec::Ellipsoid { center, factor } => {
            let c = DVector::from_vec(center.clone());
            check_dim(c.len())?;
            let l = rows_matrix(factor, "ellipsoid factor")?;
            Geom::Ellip(Ellipsoid::new(c, l)?)
        }
        BodySpec::Translate { inner, offset } => {
            let g = build_geom(inner)?;
            let off = DVector::from_vec(offset.clone());
            if off.len() != g.dim() {
                return Err(BodyError::InvalidBody("translate: offset dimension mismatch".into()));
            }
            canonical_translate(g, off)
        }
        BodySpec::LinearImage { inner, map } => {
            let g = build_geom(inner)?;
            let m = rows_matrix(map, "linear_image map")?;
            if m.nrows() != g.dim() || m.ncols() != g.dim() {
                return Err(BodyError::InvalidBody("linear_image: map shape mismatch".into()));
            }
            let inv = m.clone().try_inverse().ok_or_else(|| {
                BodyError::InvalidBody("linear_image: map is singular".into())
            })?;
            if ((&m * &inv) - DMatrix::identity(m.nrows(), m.ncols())).amax() > 1e-8 {
                return Err(BodyError::InvalidBody("linear_image: map is ill-conditioned".into()));
            }
            let det_abs = m.determinant().abs();
            canonical_linear(g, m, inv, det_abs)?
        }
        BodySpec::Symmetrized { inner } => {
            let g = build_geom(inner)?;
            if !g.origin_interior() {
                return Err(BodyError::InvalidBody(
                    "symmetrize: inner body must have the origin interior".into(),
                ));
            }
            if g.is_symmetric() {
                g
            } else {
                Geom::Symmetrized { inner: Box::new(g) }
            }
        }
    };
    Ok(geom)
}

fn check_dim(n: usize) -> Result<(), BodyError> {
    if !(2..=8).contains(&n) {
        return Err(BodyError::InvalidBody(format!("dimension {n} outside supported range 2..=8")));
    }
    Ok(())
}

/// Fold a translation into polytope/ellipsoid data where that is exact.
fn canonical_translate(g: Geom, off: DVector<f64>) -> Geom {
    if off.amax() == 0.0 {
        return g;
    }
    match g {
        Geom::PolytopeH { a, b, hull } => {
            let b2 = &b + &a * &off;
            let hull = hull.map(|mut h| {
                for v in &mut h.verts {
                    *v += &off;
                }
                h.facets.b = &h.facets.b + &h.facets.a * &off;
                h
            });
            Geom::PolytopeH { a, b: b2, hull }
        }
        Geom::PolytopeV { mut verts, hull } => {
            for v in &mut verts {
                *v += &off;
            }
            let hull = hull.map(|mut h| {
                for v in &mut h.verts {
                    *v += &off;
                }
                h.facets.b = &h.facets.b + &h.facets.a * &off;
                h
            });
            Geom::PolytopeV { verts, hull }
        }
        Geom::Ellip(e) => Geom::Ellip(e.translated(&off)),
        Geom::Translate { inner, offset } => canonical_translate(*inner, offset + off),
        other => Geom::Translate { inner: Box::new(other), offset: off },
    }
}

/// Fold a linear map into polytope/ellipsoid data where that is exact.
fn canonical_linear(
    g: Geom,
    map: DMatrix<f64>,
    inv: DMatrix<f64>,
    det_abs: f64,
) -> Result<Geom, BodyError> {
    let mapped = match g {
        Geom::PolytopeH { a, b, hull } => {
            let a2 = &a * &inv;
            let hull = hull.map(|mut h| {
                for v in &mut h.verts {
                    *v = &map * &*v;
                }
                h.facets.a = &h.facets.a * &inv;
                h
            });
            Geom::PolytopeH { a: a2, b, hull }
        }
        Geom::PolytopeV { mut verts, hull } => {
            for v in &mut verts {
                *v = &map * &*v;
            }
            let hull = hull.map(|mut h| {
                for v in &mut h.verts {
                    *v = &map * &*v;
                }
                h.facets.a = &h.facets.a * &inv;
                h
            });
            Geom::PolytopeV { verts, hull }
        }
        Geom::Ellip(e) => Geom::Ellip(e.mapped(&map).ok_or_else(|| {
            BodyError::InvalidBody("linear_image: mapped ellipsoid lost definiteness".into())
        })?),
        other => Geom::LinearImage { inner: Box::new(other), map, inv, det_abs },
    };
    Ok(mapped)
}

/// A validated convex body.
#[derive(Debug, Clone)]
pub struct Body {
    spec: BodySpec,
    geom: Geom,
    dim: usize,
    origin_interior: bool,
    symmetric: bool,
    convex: bool,
    bbox: Option<(DVector<f64>, DVector<f64>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VolumeMethod {
    Exact,
    MonteCarlo,
}

impl Body {
    pub fn new(spec: BodySpec) -> Result<Self, BodyError> {
        let geom = build_geom(&spec)?;
        let dim = geom.dim();
        let origin_interior = geom.origin_interior();
        let symmetric = geom.is_symmetric();
        let convex = !geom.has_nonconvex_pball();

        // Boundedness: polytopes are bounded by construction (vertex data or
        // vertex enumeration); gauge bodies must have positive gauge on a
        // sampled sphere.
        match &geom {
            Geom::PolytopeH { a, hull: None, .. } => {
                let dirs = DirectionSet::new(dim, 32 * dim, 0xB0B);
                for d in dirs.iter() {
                    let escapes = (0..a.nrows()).all(|i| a.row(i).transpose().dot(d) <= 1e-12);
                    if escapes {
                        return Err(BodyError::InvalidBody(
                            "polytope_h: recession direction found (unbounded)".into(),
                        ));
                    }
                }
            }
            _ => {
                if origin_interior {
                    let dirs = DirectionSet::new(dim, 32 * dim, 0xB0B);
                    for d in dirs.iter() {
                        let g = geom.gauge(d);
                        if !(g > 1e-12) || !g.is_finite() {
                            return Err(BodyError::InvalidBody(
                                "body is unbounded or degenerate along a sampled direction".into(),
                            ));
                        }
                    }
                }
            }
        }

        let bbox = compute_bbox(&geom, origin_interior);
        Ok(Self { spec, geom, dim, origin_interior, symmetric, convex, bbox })
    }

    pub fn spec(&self) -> &BodySpec {
        &self.spec
    }

    pub(crate) fn geom(&self) -> &Geom {
        &self.geom
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn origin_interior(&self) -> bool {
        self.origin_interior
    }

    /// Structural origin-symmetry (gauge(ξ) = gauge(-ξ)).
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    /// Axis-aligned bounding box, when one is derivable.
    pub fn bounding_box(&self) -> Option<(&DVector<f64>, &DVector<f64>)> {
        self.bbox.as_ref().map(|(lo, hi)| (lo, hi))
    }

    /// A length scale of the body (max absolute box coordinate).
    pub fn radial_scale(&self) -> f64 {
        match &self.bbox {
            Some((lo, hi)) => lo.amax().max(hi.amax()).max(1e-6),
            None => 1.0,
        }
    }

    /// Minkowski gauge `inf {t > 0 : xi/t in body}`; 0 at xi = 0.
    pub fn gauge(&self, xi: &DVector<f64>) -> Result<f64, BodyError> {
        if !self.origin_interior {
            return Err(BodyError::InvalidBody("origin is not interior to the body".into()));
        }
        if xi.len() != self.dim {
            return Err(BodyError::InvalidBody("gauge: dimension mismatch".into()));
        }
        Ok(self.geom.gauge(xi))
    }

    /// Membership in the closed body.
    pub fn contains(&self, x: &DVector<f64>) -> bool {
        self.geom.contains(x)
    }

    /// Strict interiority with relative margin `tol::BOUNDARY_MARGIN`.
    pub fn contains_interior(&self, x: &DVector<f64>) -> bool {
        self.geom
            .contains_interior(x, tol::BOUNDARY_MARGIN * self.radial_scale())
    }

    /// t > 0 with `base + t·dir` on the boundary.
    pub fn boundary_hit(
        &self,
        base: &DVector<f64>,
        dir: &DVector<f64>,
    ) -> Result<f64, BodyError> {
        if dir.amax() == 0.0 {
            return Err(BodyError::DegenerateDirection);
        }
        if !self.geom.contains_interior(base, 1e-14 * self.radial_scale()) {
            return Err(BodyError::NotInterior);
        }
        self.geom
            .ray_exit(base, dir)
            .ok_or(BodyError::NotInterior)
    }

    /// Volume with standard error (0 for the exact path).
    pub fn volume(
        &self,
        method: VolumeMethod,
        samples: usize,
        seed: u64,
    ) -> Result<(f64, f64), BodyError> {
        match method {
            VolumeMethod::Exact => {
                let v = moments::exact_volume(&self.geom).ok_or_else(|| {
                    BodyError::MethodUnsupported(
                        "exact volume needs a polytope in n <= 3, a p-ball or an ellipsoid".into(),
                    )
                })?;
                Ok((v, 0.0))
            }
            VolumeMethod::MonteCarlo => {
                if samples < tol::MIN_SAMPLES {
                    return Err(BodyError::SampleBudgetTooSmall(samples, tol::MIN_SAMPLES));
                }
                let (lo, hi) = self.bbox.as_ref().ok_or_else(|| {
                    BodyError::MethodUnsupported("no bounding box available for sampling".into())
                })?;
                let widths = hi - lo;
                let box_vol: f64 = widths.iter().product();
                let nblocks = samples.div_ceil(tol::SAMPLE_BLOCK);
                let hits: u64 = (0..nblocks)
                    .into_par_iter()
                    .map(|k| {
                        let mut rng = block_rng(seed, k as u64);
                        let count = if k + 1 == nblocks {
                            samples - k * tol::SAMPLE_BLOCK
                        } else {
                            tol::SAMPLE_BLOCK
                        };
                        let mut h = 0u64;
                        let mut x = DVector::zeros(self.dim);
                        for _ in 0..count {
                            for j in 0..self.dim {
                                x[j] = lo[j] + rng.gen::<f64>() * widths[j];
                            }
                            if self.geom.contains(&x) {
                                h += 1;
                            }
                        }
                        h
                    })
                    .sum();
                let p = hits as f64 / samples as f64;
                let vol = box_vol * p;
                let se = box_vol * (p * (1.0 - p) / samples as f64).sqrt();
                Ok((vol, se))
            }
        }
    }

    /// Uniform samples in the body; deterministic in (count, seed) and
    /// independent of worker scheduling.
    pub fn sample_uniform(
        &self,
        count: usize,
        seed: u64,
    ) -> Result<Vec<DVector<f64>>, BodyError> {
        if count == 0 {
            return Ok(Vec::new());
        }
        let (lo, hi) = self.bbox.as_ref().ok_or_else(|| {
            BodyError::MethodUnsupported("no bounding box available for sampling".into())
        })?;
        let widths = hi - lo;
        let nblocks = count.div_ceil(tol::SAMPLE_BLOCK);
        let blocks: Result<Vec<Vec<DVector<f64>>>, BodyError> = (0..nblocks)
            .into_par_iter()
            .map(|k| {
                let mut rng = block_rng(seed, k as u64);
                let want = if k + 1 == nblocks {
                    count - k * tol::SAMPLE_BLOCK
                } else {
                    tol::SAMPLE_BLOCK
                };
                let mut out = Vec::with_capacity(want);
                let mut trials = 0u64;
                while out.len() < want {
                    let x = DVector::from_fn(self.dim, |j, _| {
                        lo[j] + rng.gen::<f64>() * widths[j]
                    });
                    trials += 1;
                    if self.geom.contains(&x) {
                        out.push(x);
                    }
                    if trials >= 1_000_000 {
                        let rate = out.len() as f64 / trials as f64;
                        if rate < 1e-4 {
                            return Err(BodyError::RejectionStall { rate, trials });
                        }
                    }
                }
                Ok(out)
            })
            .collect();
        Ok(blocks?.into_iter().flatten().collect())
    }

    /// Smallest c >= 1 with gauge(-ξ) <= c·gauge(ξ) over the sampled sphere.
    pub fn quasireversibility(&self, dirs: &DirectionSet) -> Result<f64, BodyError> {
        let mut c = 1.0_f64;
        for d in dirs.iter() {
            let g1 = self.gauge(d)?;
            let g2 = self.gauge(&(-d))?;
            if g1 > 0.0 && g2 > 0.0 {
                c = c.max(g2 / g1).max(g1 / g2);
            }
        }
        Ok(c)
    }

    pub(crate) fn exact_moments(&self) -> Option<moments::RawMoments> {
        moments::exact_moments(&self.geom)
    }
}

/// Bounding box: exact from vertices / closed forms where available,
/// otherwise the gauge sweep (axis hits plus a 64·n-direction radial sweep,
/// padded because the sweep can miss the extreme directions).
fn compute_bbox(geom: &Geom, origin_interior: bool) -> Option<(DVector<f64>, DVector<f64>)> {
    let n = geom.dim();
    match geom {
        Geom::PolytopeH { hull: Some(h), .. } | Geom::PolytopeV { hull: Some(h), .. } => {
            Some(vertex_box(&h.verts))
        }
        Geom::PolytopeV { verts, hull: None } => Some(vertex_box(verts)),
        Geom::PBall { .. } => Some((
            DVector::from_element(n, -1.0),
            DVector::from_element(n, 1.0),
        )),
        Geom::Ellip(e) => {
            let mut lo = DVector::zeros(n);
            let mut hi = DVector::zeros(n);
            for i in 0..n {
                let r = e.factor().row(i).norm();
                lo[i] = e.center()[i] - r;
                hi[i] = e.center()[i] + r;
            }
            Some((lo, hi))
        }
        Geom::Translate { inner, offset } => {
            let (lo, hi) = compute_bbox(inner, origin_interior)?;
            Some((lo + offset, hi + offset))
        }
        _ => {
            if !origin_interior {
                return None;
            }
            let zero = DVector::zeros(n);
            let mut lo = DVector::zeros(n);
            let mut hi = DVector::zeros(n);
            for i in 0..n {
                let mut e = DVector::zeros(n);
                e[i] = 1.0;
                hi[i] = geom.ray_exit(&zero, &e)?;
                e[i] = -1.0;
                lo[i] = -geom.ray_exit(&zero, &e)?;
            }
            let dirs = DirectionSet::new(n, 64 * n, 0xB0B2);
            for d in dirs.iter() {
                if let Some(t) = geom.ray_exit(&zero, d) {
                    for i in 0..n {
                        let coord = t * d[i];
                        lo[i] = lo[i].min(coord);
                        hi[i] = hi[i].max(coord);
                    }
                }
            }
            Some((lo * 1.25, hi * 1.25))
        }
    }
}

fn vertex_box(verts: &[DVector<f64>]) -> (DVector<f64>, DVector<f64>) {
    let n = verts[0].len();
    let mut lo = DVector::from_element(n, f64::INFINITY);
    let mut hi = DVector::from_element(n, f64::NEG_INFINITY);
    for v in verts {
        for i in 0..n {
            lo[i] = lo[i].min(v[i]);
            hi[i] = hi[i].max(v[i]);
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests;
