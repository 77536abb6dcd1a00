//! Second moments of convex bodies, the Binet-Legendre dual/primal metric
//! tensors, the closed-form metric of Zermelo fields, and Busemann densities.
//!
//! The dual metric is the scaled L² pairing of linear functionals over the
//! unit body: g*(θ, φ) = (n+2)/vol(Ω) ∫_Ω θ(η) φ(η) dη, i.e. the matrix
//! (n+2)·M with M the second moment about the origin. Covectors are row
//! tuples against the same basis as vectors, so the dual metric is literally
//! that matrix and the primal metric is its inverse.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::body::{unit_ball_volume, Body, BodyError, VolumeMethod};
use crate::john::{self, JohnError};
use crate::linalg;
use crate::tol;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("dual metric is numerically singular (min eigenvalue {min_eig:.3e} vs max {max_eig:.3e})")]
    SingularDual { min_eig: f64, max_eig: f64 },
    #[error(transparent)]
    Body(#[from] BodyError),
    #[error(transparent)]
    John(#[from] JohnError),
}

/// Where a tensor's entries came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Exact,
    #[serde(rename = "montecarlo")]
    MonteCarlo { samples: usize, seed: u64 },
}

/// Symmetric positive-definite tensor with provenance.
#[derive(Debug, Clone)]
pub struct MetricTensor {
    matrix: DMatrix<f64>,
    provenance: Provenance,
    stderr: Option<DMatrix<f64>>,
    condition: Option<f64>,
}

impl MetricTensor {
    pub fn exact(matrix: DMatrix<f64>) -> Self {
        let sym = (&matrix + matrix.transpose()) * 0.5;
        Self { matrix: sym, provenance: Provenance::Exact, stderr: None, condition: None }
    }

    pub fn monte_carlo(
        matrix: DMatrix<f64>,
        samples: usize,
        seed: u64,
        stderr: DMatrix<f64>,
    ) -> Self {
        let sym = (&matrix + matrix.transpose()) * 0.5;
        Self {
            matrix: sym,
            provenance: Provenance::MonteCarlo { samples, seed },
            stderr: Some(stderr),
            condition: None,
        }
    }

    pub fn with_condition(mut self, cond: f64) -> Self {
        self.condition = Some(cond);
        self
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn stderr(&self) -> Option<&DMatrix<f64>> {
        self.stderr.as_ref()
    }

    pub fn condition(&self) -> Option<f64> {
        self.condition
    }

    /// Quadratic form ξᵀ g ξ.
    pub fn quad(&self, xi: &DVector<f64>) -> f64 {
        linalg::quad_form(&self.matrix, xi)
    }

    /// √(ξᵀ g ξ) — the Riemannian length of ξ.
    pub fn length(&self, xi: &DVector<f64>) -> f64 {
        self.quad(xi).max(0.0).sqrt()
    }

    pub fn det(&self) -> f64 {
        self.matrix.determinant()
    }

    /// Riemannian density √det g.
    pub fn sqrt_det(&self) -> f64 {
        self.det().max(0.0).sqrt()
    }

    /// JSON per the fixed schema {matrix, provenance, stderr?}.
    pub fn to_json_value(&self) -> serde_json::Value {
        let mut obj = serde_json::json!({
            "matrix": linalg::matrix_to_rows(&self.matrix),
            "provenance": self.provenance,
        });
        if let Some(se) = &self.stderr {
            obj["stderr"] = serde_json::json!(linalg::matrix_to_rows(se));
        }
        obj
    }
}

/// Second moment about the origin, M_ij = (1/vol Ω) ∫_Ω η_i η_j dη, with the
/// per-entry standard-error matrix on the Monte-Carlo path.
pub fn second_moment(
    body: &Body,
    method: VolumeMethod,
    samples: usize,
    seed: u64,
) -> Result<(DMatrix<f64>, Option<DMatrix<f64>>), MetricError> {
    match method {
        VolumeMethod::Exact => {
            let m = body.exact_moments().ok_or_else(|| {
                BodyError::MethodUnsupported(
                    "exact moments need a polytope in n <= 3, a p-ball or an ellipsoid".into(),
                )
            })?;
            Ok((m.second, None))
        }
        VolumeMethod::MonteCarlo => {
            if samples < tol::MIN_SAMPLES {
                return Err(BodyError::SampleBudgetTooSmall(samples, tol::MIN_SAMPLES).into());
            }
            let pts = body.sample_uniform(samples, seed)?;
            let n = body.dim();
            let mut sum: DMatrix<f64> = DMatrix::zeros(n, n);
            let mut sumsq: DMatrix<f64> = DMatrix::zeros(n, n);
            for p in &pts {
                for i in 0..n {
                    for j in 0..n {
                        let v = p[i] * p[j];
                        sum[(i, j)] += v;
                        sumsq[(i, j)] += v * v;
                    }
                }
            }
            let count = pts.len() as f64;
            let mean = &sum / count;
            let se = DMatrix::from_fn(n, n, |i, j| {
                let var = (sumsq[(i, j)] / count - mean[(i, j)] * mean[(i, j)]).max(0.0);
                (var / count).sqrt()
            });
            Ok((mean, Some(se)))
        }
    }
}

/// Dual Binet-Legendre scalar product g* = (n+2)·M on covectors.
pub fn bl_dual_metric(
    body: &Body,
    method: VolumeMethod,
    samples: usize,
    seed: u64,
) -> Result<MetricTensor, MetricError> {
    let (m, se) = second_moment(body, method, samples, seed)?;
    let scale = body.dim() as f64 + 2.0;
    let g = m * scale;
    Ok(match se {
        None => MetricTensor::exact(g),
        Some(se) => MetricTensor::monte_carlo(g, samples, seed, se * scale),
    })
}

/// Primal Binet-Legendre metric: inverse of the dual scalar product.
pub fn bl_metric(
    body: &Body,
    method: VolumeMethod,
    samples: usize,
    seed: u64,
) -> Result<MetricTensor, MetricError> {
    let dual = bl_dual_metric(body, method, samples, seed)?;
    invert_dual(&dual)
}

/// Exact path when available, Monte-Carlo otherwise.
pub fn bl_metric_auto(body: &Body, samples: usize, seed: u64) -> Result<MetricTensor, MetricError> {
    if body.exact_moments().is_some() {
        bl_metric(body, VolumeMethod::Exact, samples, seed)
    } else {
        bl_metric(body, VolumeMethod::MonteCarlo, samples, seed)
    }
}

fn invert_dual(dual: &MetricTensor) -> Result<MetricTensor, MetricError> {
    let (vals, _) = linalg::sym_eigen(dual.matrix());
    let max_eig = vals.max();
    let min_eig = vals.min();
    if !(min_eig > tol::SINGULAR_REL * max_eig) {
        return Err(MetricError::SingularDual { min_eig, max_eig });
    }
    let (inv, cond) = linalg::sym_inv_with_cond(dual.matrix())
        .ok_or(MetricError::SingularDual { min_eig, max_eig })?;
    let tensor = match dual.provenance() {
        Provenance::Exact => MetricTensor::exact(inv),
        Provenance::MonteCarlo { samples, seed } => {
            // First-order propagation: δg = -g δg* g, bounded entrywise.
            let se_dual = dual.stderr().expect("montecarlo tensors carry stderr");
            let abs_inv = inv.map(f64::abs);
            let se = &abs_inv * se_dual * &abs_inv;
            MetricTensor::monte_carlo(inv, *samples, *seed, se)
        }
    };
    Ok(tensor.with_condition(cond))
}

/// Normalization data and closed-form Binet-Legendre metric of a Zermelo
/// field with target `omega` at drift value `u`.
///
/// In normalized coordinates x' = T (x - β) — with β the barycenter of Ω and
/// T = ((n+2)·C)^{-1/2} for the centered second moment C — the metric of the
/// field with unit ball Ω - u is
/// g' = I - γ u'u'ᵀ / (1 + γ|u'|²), γ = n+2, u' = T(u - β).
#[derive(Debug, Clone)]
pub struct ZermeloClosedForm {
    pub gamma: f64,
    pub beta: DVector<f64>,
    /// Normalizing map T (symmetric positive definite).
    pub map: DMatrix<f64>,
    /// T^{-1} = ((n+2)·C)^{1/2}.
    pub map_inv: DMatrix<f64>,
    pub drift_normalized: DVector<f64>,
    /// g' in normalized coordinates.
    pub metric_normalized: DMatrix<f64>,
}

impl ZermeloClosedForm {
    /// The metric in the original coordinates: Tᵀ g' T.
    pub fn pull_back(&self) -> DMatrix<f64> {
        self.map.transpose() * &self.metric_normalized * &self.map
    }

    /// Express a metric given in original coordinates in the normalized
    /// ones: T^{-ᵀ} g T^{-1}.
    pub fn normalize_metric(&self, g: &DMatrix<f64>) -> DMatrix<f64> {
        self.map_inv.transpose() * g * &self.map_inv
    }
}

pub fn zermelo_bl_closed_form(
    omega: &Body,
    u_value: &DVector<f64>,
) -> Result<ZermeloClosedForm, MetricError> {
    zermelo_bl_closed_form_with(omega, u_value, VolumeMethod::Exact, 200_000, 0)
        .or_else(|e| match e {
            MetricError::Body(BodyError::MethodUnsupported(_)) => {
                zermelo_bl_closed_form_with(omega, u_value, VolumeMethod::MonteCarlo, 200_000, 0)
            }
            other => Err(other),
        })
}

pub fn zermelo_bl_closed_form_with(
    omega: &Body,
    u_value: &DVector<f64>,
    method: VolumeMethod,
    samples: usize,
    seed: u64,
) -> Result<ZermeloClosedForm, MetricError> {
    if !omega.contains(u_value) {
        return Err(BodyError::InvalidBody("drift value lies outside the target body".into()).into());
    }
    let n = omega.dim();
    let gamma = n as f64 + 2.0;
    let (beta, centered) = match method {
        VolumeMethod::Exact => {
            let m = omega.exact_moments().ok_or_else(|| {
                BodyError::MethodUnsupported("exact moments unavailable for this body".into())
            })?;
            let c = &m.second - &m.mean * m.mean.transpose();
            (m.mean, c)
        }
        VolumeMethod::MonteCarlo => {
            let pts = omega.sample_uniform(samples, seed)?;
            let count = pts.len() as f64;
            let mean = pts.iter().fold(DVector::zeros(n), |acc, p| acc + p) / count;
            let mut c = DMatrix::zeros(n, n);
            for p in &pts {
                let d = p - &mean;
                c += &d * d.transpose();
            }
            (mean, c / count)
        }
    };
    let scaled = &centered * gamma;
    let (vals, _) = linalg::sym_eigen(&scaled);
    if !(vals.min() > tol::SINGULAR_REL * vals.max().max(1e-300)) {
        return Err(MetricError::SingularDual { min_eig: vals.min(), max_eig: vals.max() });
    }
    let map = linalg::sym_inv_sqrt(&scaled);
    let map_inv = linalg::sym_sqrt(&scaled);
    let u_prime = &map * (u_value - &beta);
    let denom = 1.0 + gamma * u_prime.norm_squared();
    let metric =
        DMatrix::identity(n, n) - &u_prime * u_prime.transpose() * (gamma / denom);
    Ok(ZermeloClosedForm {
        gamma,
        beta,
        map,
        map_inv,
        drift_normalized: u_prime,
        metric_normalized: metric,
    })
}

/// Lebesgue-relative densities of the three canonical volume normalizations.
#[derive(Debug, Clone, Serialize)]
pub struct DensityReport {
    pub n: usize,
    pub symmetric: bool,
    pub is_ellipsoid: bool,
    /// ω_n / vol(Ω): density normalizing the body to the unit-ball volume.
    pub busemann_density: f64,
    /// √det g_John.
    pub john_density: f64,
    /// √det g_BL.
    pub bl_density: f64,
    pub john_ratio: f64,
    pub bl_ratio: f64,
    /// 1 <= μ_John/μ_F <= n^n (n^{n/2} for symmetric bodies).
    pub john_bounds_ok: bool,
    /// μ_BL <= μ_F.
    pub bl_upper_ok: bool,
    /// Equality μ_BL = μ_F to 1e-9 (expected exactly for ellipsoids).
    pub bl_equality: bool,
}

/// Busemann, John and Binet-Legendre densities with bound flags.
pub fn busemann_densities(
    body: &Body,
    john_tol: f64,
    samples: usize,
    seed: u64,
) -> Result<DensityReport, MetricError> {
    let n = body.dim();
    let vol = match body.volume(VolumeMethod::Exact, samples, seed) {
        Ok((v, _)) => v,
        Err(BodyError::MethodUnsupported(_)) => {
            body.volume(VolumeMethod::MonteCarlo, samples, seed)?.0
        }
        Err(e) => return Err(e.into()),
    };
    let mu_f = unit_ball_volume(n) / vol;
    let g_john = john::john_metric(body, john_tol)?;
    let g_bl = bl_metric_auto(body, samples, seed)?;
    let mu_john = g_john.sqrt_det();
    let mu_bl = g_bl.sqrt_det();
    let john_ratio = mu_john / mu_f;
    let bl_ratio = mu_bl / mu_f;
    let nf = n as f64;
    let upper = if body.is_symmetric() { nf.powf(nf / 2.0) } else { nf.powf(nf) };
    let slack = tol::CONSTANT_SLACK;
    let is_ellipsoid = body.geom().try_ellipsoid().is_some();
    Ok(DensityReport {
        n,
        symmetric: body.is_symmetric(),
        is_ellipsoid,
        busemann_density: mu_f,
        john_density: mu_john,
        bl_density: mu_bl,
        john_ratio,
        bl_ratio,
        john_bounds_ok: john_ratio >= 1.0 - slack && john_ratio <= upper * (1.0 + slack),
        bl_upper_ok: bl_ratio <= 1.0 + slack,
        bl_equality: (bl_ratio - 1.0).abs() <= tol::EXACT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::BodySpec;
    use approx::assert_relative_eq;

    fn disk() -> Body {
        BodySpec::unit_ball(2).build().unwrap()
    }

    fn square() -> Body {
        BodySpec::cube(2).build().unwrap()
    }

    fn corner_triangle() -> Body {
        BodySpec::PolytopeV {
            vertices: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
        }
        .build()
        .unwrap()
    }

    #[test]
    fn second_moments_exact_values() {
        // Disk: polar integral gives I/4; square: 1-D integral gives I/3.
        let (m, _) = second_moment(&disk(), VolumeMethod::Exact, 0, 0).unwrap();
        assert_relative_eq!(m, DMatrix::identity(2, 2) * 0.25, epsilon = 1e-12);
        let (m, _) = second_moment(&square(), VolumeMethod::Exact, 0, 0).unwrap();
        assert_relative_eq!(m, DMatrix::identity(2, 2) / 3.0, epsilon = 1e-12);
        // Corner triangle: ∫x² = 1/12, ∫xy = 1/24, vol = 1/2.
        let (m, _) = second_moment(&corner_triangle(), VolumeMethod::Exact, 0, 0).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[1.0 / 6.0, 1.0 / 12.0, 1.0 / 12.0, 1.0 / 6.0]);
        assert_relative_eq!(m, expect, epsilon = 1e-12);
    }

    #[test]
    fn dual_and_primal_metrics_on_reference_bodies() {
        let g = bl_dual_metric(&disk(), VolumeMethod::Exact, 0, 0).unwrap();
        assert_relative_eq!(g.matrix(), &DMatrix::identity(2, 2), epsilon = 1e-12);
        let g = bl_dual_metric(&square(), VolumeMethod::Exact, 0, 0).unwrap();
        assert_relative_eq!(g.matrix(), &(DMatrix::identity(2, 2) * (4.0 / 3.0)), epsilon = 1e-12);
        let g = bl_dual_metric(&corner_triangle(), VolumeMethod::Exact, 0, 0).unwrap();
        let expect =
            DMatrix::from_row_slice(2, 2, &[2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0]);
        assert_relative_eq!(g.matrix(), &expect, epsilon = 1e-12);

        let g = bl_metric(&disk(), VolumeMethod::Exact, 0, 0).unwrap();
        assert_relative_eq!(g.matrix(), &DMatrix::identity(2, 2), epsilon = 1e-12);
        let g = bl_metric(&square(), VolumeMethod::Exact, 0, 0).unwrap();
        assert_relative_eq!(g.matrix(), &(DMatrix::identity(2, 2) * 0.75), epsilon = 1e-12);
        let g = bl_metric(&corner_triangle(), VolumeMethod::Exact, 0, 0).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        assert_relative_eq!(g.matrix(), &expect, epsilon = 1e-9);
    }

    #[test]
    fn monte_carlo_agrees_with_exact_within_4_sigma() {
        for body in [disk(), square(), corner_triangle()] {
            let (me, _) = second_moment(&body, VolumeMethod::Exact, 0, 0).unwrap();
            let (mc, se) = second_moment(&body, VolumeMethod::MonteCarlo, 200_000, 11).unwrap();
            let se = se.unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let d = (mc[(i, j)] - me[(i, j)]).abs();
                    assert!(
                        d <= tol::MC_SIGMA * se[(i, j)].max(1e-12),
                        "entry ({i},{j}): diff {d:.3e} vs se {:.3e}",
                        se[(i, j)]
                    );
                }
            }
        }
    }

    #[test]
    fn zermelo_closed_form_disk_case() {
        let d = disk();
        let z = zermelo_bl_closed_form(&d, &DVector::from_row_slice(&[0.0, 0.0])).unwrap();
        assert_relative_eq!(z.metric_normalized, DMatrix::identity(2, 2), epsilon = 1e-12);
        assert_relative_eq!(z.map, DMatrix::identity(2, 2), epsilon = 1e-12);

        let z = zermelo_bl_closed_form(&d, &DVector::from_row_slice(&[0.5, 0.0])).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 1.0]);
        assert_relative_eq!(z.metric_normalized, expect, epsilon = 1e-12);
    }

    #[test]
    fn zermelo_eigenvalue_floor() {
        // Any drift in the disk keeps the smallest eigenvalue of g' at
        // 1/(1 + γ|u'|²) >= 1/(1+γ).
        let d = disk();
        let gamma = 4.0;
        for u in [[0.3, 0.2], [0.0, 0.9], [-0.7, 0.1]] {
            let z = zermelo_bl_closed_form(&d, &DVector::from_row_slice(&u)).unwrap();
            let (vals, _) = linalg::sym_eigen(&z.metric_normalized);
            assert!(vals.min() >= 1.0 / (1.0 + gamma) - 1e-12);
            assert!(vals.max() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn zermelo_rejects_outside_drift() {
        let d = disk();
        assert!(zermelo_bl_closed_form(&d, &DVector::from_row_slice(&[1.5, 0.0])).is_err());
    }

    #[test]
    fn closed_form_matches_direct_translate_bl() {
        // BL of Ω - u in normalized coordinates equals the closed form.
        let u = DVector::from_row_slice(&[0.4, -0.2]);
        for omega in [disk(), square()] {
            let z = zermelo_bl_closed_form(&omega, &u).unwrap();
            let shifted = BodySpec::Translate {
                inner: Box::new(omega.spec().clone()),
                offset: vec![-u[0], -u[1]],
            }
            .build()
            .unwrap();
            let g = bl_metric(&shifted, VolumeMethod::Exact, 0, 0).unwrap();
            let g_norm = z.normalize_metric(g.matrix());
            assert_relative_eq!(g_norm, z.metric_normalized, epsilon = 1e-8);
        }
    }

    #[test]
    fn densities_on_square_and_disk() {
        let r = busemann_densities(&square(), 1e-8, 100_000, 0).unwrap();
        // μ_F = π/4, μ_John = 1, μ_BL = 0.75.
        assert_relative_eq!(r.busemann_density, std::f64::consts::FRAC_PI_4, epsilon = 1e-9);
        assert_relative_eq!(r.john_density, 1.0, epsilon = 1e-5);
        assert_relative_eq!(r.bl_density, 0.75, epsilon = 1e-9);
        assert!(r.john_bounds_ok && r.bl_upper_ok && !r.bl_equality);
        assert_relative_eq!(r.john_ratio, 4.0 / std::f64::consts::PI, epsilon = 1e-5);

        let r = busemann_densities(&disk(), 1e-8, 100_000, 0).unwrap();
        assert_relative_eq!(r.busemann_density, 1.0, epsilon = 1e-12);
        assert_relative_eq!(r.john_density, 1.0, epsilon = 1e-9);
        assert_relative_eq!(r.bl_density, 1.0, epsilon = 1e-12);
        assert!(r.bl_equality && r.is_ellipsoid);
    }

    #[test]
    fn singular_dual_is_reported() {
        // A needle of aspect 1e8 pushes the dual spectrum past the floor.
        let needle = BodySpec::Ellipsoid {
            center: vec![0.0, 0.0],
            factor: vec![vec![1.0, 0.0], vec![0.0, 1e-8]],
        }
        .build()
        .unwrap();
        let r = bl_metric(&needle, VolumeMethod::Exact, 0, 0);
        assert!(matches!(r, Err(MetricError::SingularDual { .. })));
    }
}
