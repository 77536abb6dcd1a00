//! Cutting-plane reduction: inscribed ellipsoid of a gauge-oracle body.
//!
//! Maintains an outer polytope P ⊇ body, solves the exact determinant
//! maximization on P, then searches the ellipsoid boundary for points outside
//! the body. Each violating local maximum contributes the supporting
//! hyperplane of the body at the radial projection of that point. The loop
//! ends when no boundary point exceeds gauge 1 + tol; the ellipsoid is then
//! shrunk toward its center onto the body, so the returned ellipsoid is
//! genuinely inscribed.

use nalgebra::{DMatrix, DVector};

use super::solver::solve_hpoly;
use super::{JohnError, JohnSolution};
use crate::body::{Body, BodyError, Ellipsoid};
use crate::linalg;
use crate::rng::DirectionSet;
use crate::tol;

struct Candidate {
    /// Point on the ellipsoid boundary, ambient coordinates.
    x: DVector<f64>,
    /// Body gauge there; > 1 means the ellipsoid pokes outside.
    value: f64,
}

/// Central finite-difference gradient of the gauge.
fn gauge_gradient(body: &Body, x: &DVector<f64>, step: f64) -> DVector<f64> {
    let n = x.len();
    DVector::from_fn(n, |j, _| {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += step;
        xm[j] -= step;
        (body.geom().gauge(&xp) - body.geom().gauge(&xm)) / (2.0 * step)
    })
}

/// Projected-gradient ascent of z ↦ gauge(q + B z) on the unit sphere.
fn ascend(
    body: &Body,
    q: &DVector<f64>,
    bmat: &DMatrix<f64>,
    mut z: DVector<f64>,
    fd_step: f64,
) -> Candidate {
    let eval = |z: &DVector<f64>| body.geom().gauge(&(q + bmat * z));
    let mut val = eval(&z);
    for _ in 0..60 {
        let x = q + bmat * &z;
        let grad_z = bmat.transpose() * gauge_gradient(body, &x, fd_step);
        let radial = grad_z.dot(&z);
        let tangent = &grad_z - &z * radial;
        let tnorm = tangent.norm();
        if tnorm <= 1e-14 {
            break;
        }
        let mut step = 0.5 / tnorm.max(1.0);
        let mut improved = false;
        for _ in 0..25 {
            let mut zn = &z + &tangent * step;
            let norm = zn.norm();
            if norm > 0.0 {
                zn /= norm;
                let vn = eval(&zn);
                if vn > val + 1e-15 {
                    z = zn;
                    val = vn;
                    improved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Candidate { x: q + bmat * &z, value: val }
}

/// Probe the boundary sphere, then polish the best starts.
fn violation_search(
    body: &Body,
    q: &DVector<f64>,
    bmat: &DMatrix<f64>,
    probes: &DirectionSet,
    starts: usize,
    fd_step: f64,
) -> Vec<Candidate> {
    let mut scored: Vec<(f64, &DVector<f64>)> = probes
        .iter()
        .map(|z| (body.geom().gauge(&(q + bmat * z)), z))
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    scored
        .iter()
        .take(starts)
        .map(|(_, z)| ascend(body, q, bmat, (*z).clone(), fd_step))
        .collect()
}

struct CutPool {
    rows: Vec<DVector<f64>>,
    offs: Vec<f64>,
}

impl CutPool {
    /// Supporting hyperplane of the body at the radial projection of `x`.
    /// Returns false when the plane is a duplicate or non-violating.
    fn add_cut(
        &mut self,
        body: &Body,
        cand: &Candidate,
        center: &DVector<f64>,
        tol: f64,
        fd_step: f64,
        scale: f64,
    ) -> Result<bool, JohnError> {
        if cand.value <= 1.0 + 0.25 * tol {
            return Ok(false);
        }
        let y = &cand.x / cand.value; // gauge(y) = 1
        let mut w = gauge_gradient(body, &y, fd_step);
        let wn = w.norm();
        if wn <= 1e-12 {
            return Ok(false);
        }
        w /= wn;
        // Tiny relaxation absorbs the finite-difference error in the normal.
        let off = w.dot(&y) + 1e-11 * scale;
        if off <= 0.0 {
            return Ok(false);
        }
        if w.dot(center) > off + 10.0 * tol * scale {
            return Err(JohnError::NonConvexDetected(format!(
                "supporting plane at a boundary point excludes the inscribed center by {:.3e}",
                w.dot(center) - off
            )));
        }
        let dup = self
            .rows
            .iter()
            .zip(&self.offs)
            .any(|(r, o)| (r - &w).amax() <= 1e-9 && (o - off).abs() <= 1e-9 * scale);
        if dup {
            return Ok(false);
        }
        self.rows.push(w);
        self.offs.push(off);
        Ok(true)
    }
}

pub(crate) fn solve_cutting(body: &Body, tol: f64, seed: u64) -> Result<JohnSolution, JohnError> {
    let n = body.dim();
    if !body.origin_interior() {
        return Err(JohnError::Body(BodyError::InvalidBody(
            "cutting-plane solve needs the origin interior".into(),
        )));
    }
    let scale = body.radial_scale();
    let fd_step = tol::FD_STEP_REL * scale;

    // Outer polytope seeded with the bounding box.
    let (lo, hi) = body
        .bounding_box()
        .ok_or_else(|| JohnError::NotConverged("no bounding box for the outer polytope".into()))?;
    let mut pool = CutPool { rows: Vec::new(), offs: Vec::new() };
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        pool.rows.push(e.clone());
        pool.offs.push(hi[i]);
        let mut e = DVector::zeros(n);
        e[i] = -1.0;
        pool.rows.push(e);
        pool.offs.push(-lo[i]);
    }

    let probes = DirectionSet::new(n, 64 * n, seed ^ 0x00C0_FFEE);
    let final_probes = DirectionSet::new(n, 512 * n, seed ^ 0x00FA_CADE);
    let starts = 8 * n;

    let mut newton_total = 0usize;
    let mut cuts_added = 0usize;
    let mut last_gap;

    for _round in 0..tol::CUT_ROUND_CAP {
        let a = DMatrix::from_fn(pool.rows.len(), n, |i, j| pool.rows[i][j]);
        let b = DVector::from_vec(pool.offs.clone());
        let res = solve_hpoly(&a, &b, None, 1e-9, tol::NEWTON_CAP)?;
        newton_total += res.newton_steps;
        last_gap = res.gap;

        let candidates = violation_search(body, &res.d, &res.b, &probes, starts, fd_step);
        let worst = candidates.iter().map(|c| c.value).fold(f64::NEG_INFINITY, f64::max);

        let finals;
        let active: &[Candidate] = if worst <= 1.0 + tol {
            // Certify against a denser scan before accepting.
            finals = violation_search(body, &res.d, &res.b, &final_probes, starts, fd_step);
            let worst_final = finals.iter().map(|c| c.value).fold(worst, f64::max);
            if worst_final <= 1.0 + tol {
                return finish(body, &res.b, &res.d, worst_final, newton_total, cuts_added, last_gap);
            }
            &finals
        } else {
            &candidates
        };

        for cand in active {
            if pool.add_cut(body, cand, &res.d, tol, fd_step, scale)? {
                cuts_added += 1;
                if cuts_added >= tol::CUT_PLANE_CAP {
                    return Err(JohnError::NotConverged(format!(
                        "cutting-plane budget exhausted ({cuts_added} planes)"
                    )));
                }
            }
        }
    }
    Err(JohnError::NotConverged(format!(
        "cutting-plane round budget exhausted ({} rounds)",
        tol::CUT_ROUND_CAP
    )))
}

fn finish(
    body: &Body,
    bmat: &DMatrix<f64>,
    q: &DVector<f64>,
    worst_gauge: f64,
    newton_total: usize,
    cuts: usize,
    gap: f64,
) -> Result<JohnSolution, JohnError> {
    let shape = bmat * bmat;
    let l = linalg::cholesky_lower(&shape)
        .ok_or_else(|| JohnError::NotConverged("solved shape lost definiteness".into()))?;
    let gq = body.geom().gauge(q);
    if gq >= 1.0 {
        return Err(JohnError::NotConverged(
            "solved center left the body; cannot certify feasibility".into(),
        ));
    }
    let viol = (worst_gauge - 1.0).max(0.0);
    // Shrink toward the center until the ellipsoid is certifiably inside:
    // points move to (1-λ)·q + λ·x, and gauge((1-λ)q + λx) <= (1-λ)gq + λ(1+viol).
    let lambda = if viol > 0.0 { (1.0 - gq) / (1.0 + viol - gq) } else { 1.0 };
    let ell = Ellipsoid::new(q.clone(), l * lambda).map_err(JohnError::Body)?;
    Ok(JohnSolution {
        ellipsoid: ell,
        iterations: newton_total,
        cuts,
        duality_gap: gap,
        violation: viol,
    })
}
