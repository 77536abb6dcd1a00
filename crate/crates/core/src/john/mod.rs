//! Maximum-volume inscribed (John) ellipsoids and certified inclusions.
//!
//! H-polytopes (and anything that canonicalizes to one) go through the exact
//! determinant-maximization path; ellipsoid bodies are their own John
//! ellipsoid; every other body is reduced by cutting planes over its gauge
//! oracle.

mod cutting;
mod solver;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::binet_legendre::MetricTensor;
use crate::body::{Body, BodyError, Ellipsoid};
use crate::linalg;
use crate::rng::DirectionSet;
use crate::tol;

#[derive(Debug, Error)]
pub enum JohnError {
    #[error("solver did not converge: {0}")]
    NotConverged(String),
    #[error("non-convexity detected: {0}")]
    NonConvexDetected(String),
    #[error("no common interior point for the inclusion check")]
    NoCommonInteriorPoint,
    #[error(transparent)]
    Body(#[from] BodyError),
}

/// Solved inscribed ellipsoid with solver diagnostics.
#[derive(Debug, Clone)]
pub struct JohnSolution {
    pub ellipsoid: Ellipsoid,
    /// Total Newton steps across all determinant maximizations.
    pub iterations: usize,
    /// Supporting hyperplanes added by the cutting-plane loop (0 on the
    /// exact path).
    pub cuts: usize,
    /// Duality gap of the final determinant maximization, in log-volume.
    pub duality_gap: f64,
    /// Residual containment violation certified by the final boundary scan
    /// (0 on the exact path).
    pub violation: f64,
}

/// Maximum-volume inscribed ellipsoid of a convex body.
pub fn max_inscribed_ellipsoid(body: &Body, tol: f64) -> Result<JohnSolution, JohnError> {
    max_inscribed_ellipsoid_seeded(body, tol, 0)
}

/// Like [`max_inscribed_ellipsoid`] with an explicit seed for the
/// cutting-plane boundary probes.
pub fn max_inscribed_ellipsoid_seeded(
    body: &Body,
    tol: f64,
    seed: u64,
) -> Result<JohnSolution, JohnError> {
    let tol = tol.max(1e-10);
    if let Some(e) = body.geom().try_ellipsoid() {
        // An ellipsoid is its own maximal inscribed ellipsoid.
        return Ok(JohnSolution {
            ellipsoid: e.clone(),
            iterations: 0,
            cuts: 0,
            duality_gap: 0.0,
            violation: 0.0,
        });
    }
    if let Some((a, b)) = body.geom().try_facets() {
        let start = if b.iter().all(|&v| v > 0.0) {
            None
        } else {
            // The origin sits on or outside a facet; start from the vertex
            // centroid instead.
            let verts = body
                .geom()
                .try_vertices()
                .ok_or_else(|| JohnError::NotConverged("no interior start available".into()))?;
            let n = body.dim();
            let c = verts.iter().fold(DVector::zeros(n), |acc, v| acc + v) / verts.len() as f64;
            Some(c)
        };
        let res = solver::solve_hpoly(&a, &b, start, tol, tol::NEWTON_CAP)?;
        let shape = &res.b * &res.b;
        let l = linalg::cholesky_lower(&shape)
            .ok_or_else(|| JohnError::NotConverged("solved shape lost definiteness".into()))?;
        let ell = Ellipsoid::new(res.d, l)?;
        return Ok(JohnSolution {
            ellipsoid: ell,
            iterations: res.newton_steps,
            cuts: 0,
            duality_gap: res.gap,
            violation: 0.0,
        });
    }
    cutting::solve_cutting(body, tol, seed)
}

/// Centered John ellipsoid J0 = J - Q and the John point Q.
pub fn centered_john(body: &Body, tol: f64) -> Result<(Ellipsoid, DVector<f64>), JohnError> {
    let sol = max_inscribed_ellipsoid(body, tol)?;
    let q = sol.ellipsoid.center().clone();
    let j0 = Ellipsoid::new(DVector::zeros(q.len()), sol.ellipsoid.factor().clone())?;
    Ok((j0, q))
}

/// The John metric tensor: the quadratic form whose unit ball is the
/// centered John ellipsoid, g = (L Lᵀ)^{-1}.
pub fn john_metric(body: &Body, tol: f64) -> Result<MetricTensor, JohnError> {
    let (j0, _) = centered_john(body, tol)?;
    let shape = j0.shape_matrix();
    let (inv, cond) = linalg::sym_inv_with_cond(&shape)
        .ok_or_else(|| JohnError::NotConverged("John shape matrix is singular".into()))?;
    Ok(MetricTensor::exact(inv).with_condition(cond))
}

/// Inscribed-ball radius of the unit p-ball, `min(1, n^{1/2 - 1/p})`;
/// reference value for cross-checking the solver.
pub fn pball_john_radius(p: f64, n: usize) -> f64 {
    let nf = n as f64;
    nf.powf(0.5 - 1.0 / p).min(1.0)
}

/// One side of an inclusion check.
#[derive(Debug, Clone, Copy)]
pub enum InclusionSide<'a> {
    Ellipsoid(&'a Ellipsoid),
    Body(&'a Body),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InclusionMode {
    #[serde(rename = "exact-facet")]
    ExactFacet,
    #[serde(rename = "vertex")]
    Vertex,
    #[serde(rename = "radial-sample")]
    RadialSample,
}

/// Certified result of an inclusion check `inner ⊆ s · outer`.
///
/// `max_violation` is geometric (per-facet distance) in facet mode and a
/// relative radial excess in vertex/radial modes; `pass` compares it against
/// the tolerance handed to [`check_inclusion`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InclusionCertificate {
    pub factor: f64,
    pub mode: InclusionMode,
    pub max_violation: f64,
    pub pass: bool,
}

/// Check `inner ⊆ s·outer` (scaling about the origin), using an exact mode
/// when the pair allows one and a radial-sample comparison otherwise.
pub fn check_inclusion(
    inner: InclusionSide,
    outer: InclusionSide,
    s: f64,
    dirs: &DirectionSet,
    tol: f64,
) -> Result<InclusionCertificate, JohnError> {
    // Exact facet mode: ellipsoid inside a facet polytope.
    if let (InclusionSide::Ellipsoid(e), InclusionSide::Body(o)) = (&inner, &outer) {
        if let Some((a, b)) = o.geom().try_facets() {
            let mut worst = f64::NEG_INFINITY;
            for i in 0..a.nrows() {
                let row = a.row(i).transpose();
                let margin = e.support(&row) - s * b[i];
                worst = worst.max(margin / row.norm());
            }
            return Ok(InclusionCertificate {
                factor: s,
                mode: InclusionMode::ExactFacet,
                max_violation: worst,
                pass: worst <= tol,
            });
        }
    }
    // Exact vertex mode: vertex polytope inside an ellipsoid.
    if let (InclusionSide::Body(b), InclusionSide::Ellipsoid(e)) = (&inner, &outer) {
        if let Some(verts) = b.geom().try_vertices() {
            let mut worst = f64::NEG_INFINITY;
            for v in &verts {
                let g = e.gauge(&(v / s));
                worst = worst.max(g - 1.0);
            }
            return Ok(InclusionCertificate {
                factor: s,
                mode: InclusionMode::Vertex,
                max_violation: worst,
                pass: worst <= tol,
            });
        }
    }
    // Radial comparison about the shared interior origin.
    let origin_ok = |side: &InclusionSide| match side {
        InclusionSide::Ellipsoid(e) => e.gauge_is_finite_everywhere(),
        InclusionSide::Body(b) => b.origin_interior(),
    };
    if !origin_ok(&inner) || !origin_ok(&outer) {
        return Err(JohnError::NoCommonInteriorPoint);
    }
    let gauge_of = |side: &InclusionSide, d: &DVector<f64>| -> f64 {
        match side {
            InclusionSide::Ellipsoid(e) => e.gauge(d),
            InclusionSide::Body(b) => b.geom().gauge(d),
        }
    };
    let mut worst = f64::NEG_INFINITY;
    for d in dirs.iter() {
        let gi = gauge_of(&inner, d);
        let go = gauge_of(&outer, d);
        if gi <= 0.0 || go <= 0.0 {
            continue;
        }
        // ρ_in/(s ρ_out) - 1 = go/(s gi) - 1.
        worst = worst.max(go / (s * gi) - 1.0);
    }
    Ok(InclusionCertificate {
        factor: s,
        mode: InclusionMode::RadialSample,
        max_violation: worst,
        pass: worst <= tol,
    })
}

impl Ellipsoid {
    /// Strict origin-interiority, the condition for a finite gauge.
    fn gauge_is_finite_everywhere(&self) -> bool {
        self.factor()
            .solve_lower_triangular(self.center())
            .map(|z| z.norm() < 1.0)
            .unwrap_or(false)
    }
}
