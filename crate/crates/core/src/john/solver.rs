//! Determinant maximization for the inscribed ellipsoid of an H-polytope.
//!
//! Maximizes `log det B` over symmetric positive-definite `B` and center `d`
//! subject to `‖B a_i‖ + a_i·d <= b_i` for every facet, via a short-step
//! barrier path with damped Newton inner iterations. The second-order-cone
//! barrier `-log((b_i - a_i·d)^2 - ‖B a_i‖^2)` has parameter 2 per facet,
//! giving the duality gap `2 m / t` on the log-volume objective.

use nalgebra::{DMatrix, DVector};

use super::JohnError;
use crate::linalg;

pub(crate) struct DetMaxResult {
    /// Symmetric positive-definite shape factor: E = {d + B z : |z| <= 1}.
    pub b: DMatrix<f64>,
    pub d: DVector<f64>,
    pub newton_steps: usize,
    pub gap: f64,
}

struct SymBasis {
    /// Entries of each basis matrix: diagonal units then off-diagonal pairs.
    entries: Vec<Vec<(usize, usize)>>,
}

impl SymBasis {
    fn new(n: usize) -> Self {
        let mut entries: Vec<Vec<(usize, usize)>> = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            entries.push(vec![(i, i)]);
        }
        for i in 0..n {
            for j in 0..i {
                entries.push(vec![(i, j), (j, i)]);
            }
        }
        Self { entries }
    }

    fn len(&self) -> usize {
        self.entries.len()
    }

    /// <G, E_k> for symmetric G.
    fn inner(&self, g: &DMatrix<f64>, k: usize) -> f64 {
        self.entries[k].iter().map(|&(i, j)| g[(i, j)]).sum()
    }

    fn add_scaled(&self, m: &mut DMatrix<f64>, k: usize, w: f64) {
        for &(i, j) in &self.entries[k] {
            m[(i, j)] += w;
        }
    }
}

struct Constraint {
    a: DVector<f64>,
    b: f64,
    /// Columns are E_k a (n × nb).
    v: DMatrix<f64>,
    /// Gram matrix VᵀV (nb × nb).
    gram: DMatrix<f64>,
    /// a aᵀ.
    aat: DMatrix<f64>,
}

fn log_det_spd(m: &DMatrix<f64>) -> Option<f64> {
    linalg::cholesky_lower(m).map(|l| (0..m.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>() * 2.0)
}

/// Slacks (s_i, q_i) of every constraint; None when any is infeasible.
fn slacks(cons: &[Constraint], b: &DMatrix<f64>, d: &DVector<f64>) -> Option<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(cons.len());
    for c in cons {
        let s = c.b - c.a.dot(d);
        if s <= 0.0 {
            return None;
        }
        let u = b * &c.a;
        let q = s * s - u.norm_squared();
        if q <= 0.0 {
            return None;
        }
        out.push((s, q));
    }
    Some(out)
}

fn barrier_value(cons: &[Constraint], b: &DMatrix<f64>, d: &DVector<f64>, t: f64) -> Option<f64> {
    let ld = log_det_spd(b)?;
    let sl = slacks(cons, b, d)?;
    let mut f = -t * ld;
    for (_, q) in sl {
        f -= q.ln();
    }
    Some(f)
}

pub(crate) fn solve_hpoly(
    a: &DMatrix<f64>,
    bvec: &DVector<f64>,
    start: Option<DVector<f64>>,
    gap_tol: f64,
    newton_cap: usize,
) -> Result<DetMaxResult, JohnError> {
    let m = a.nrows();
    let n = a.ncols();
    let basis = SymBasis::new(n);
    let nb = basis.len();
    let dim = nb + n;

    let cons: Vec<Constraint> = (0..m)
        .map(|i| {
            let ai = a.row(i).transpose();
            let mut v = DMatrix::zeros(n, nb);
            for k in 0..nb {
                for &(r, c) in &basis.entries[k] {
                    v[(r, k)] += ai[c];
                }
            }
            let gram = v.transpose() * &v;
            let aat = &ai * ai.transpose();
            Constraint { a: ai, b: bvec[i], v, gram, aat }
        })
        .collect();

    // Strictly feasible start: a ball about `start` (origin by default).
    let d0 = start.unwrap_or_else(|| DVector::zeros(n));
    let mut alpha = f64::INFINITY;
    for c in &cons {
        let slack = c.b - c.a.dot(&d0);
        if slack <= 0.0 {
            return Err(JohnError::NotConverged(
                "initial center is not strictly feasible".into(),
            ));
        }
        alpha = alpha.min(slack / c.a.norm());
    }
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(JohnError::NotConverged("could not seed a feasible ball".into()));
    }
    let mut bmat = DMatrix::identity(n, n) * (0.9 * alpha);
    let mut d = d0;

    let nu = 2.0 * m as f64; // total barrier parameter
    let mut t = 1.0_f64;
    let mut steps = 0usize;

    loop {
        // Is this the last barrier stage? Loose centering suffices earlier.
        let ld_now = log_det_spd(&bmat)
            .ok_or_else(|| JohnError::NotConverged("shape matrix became singular".into()))?;
        let final_stage = nu / t <= gap_tol * ld_now.abs().max(1.0);
        let center_tol = if final_stage { 1e-11 } else { 5e-3 };

        // Center at the current t.
        loop {
            if steps >= newton_cap {
                return Err(JohnError::NotConverged(format!(
                    "newton budget {newton_cap} exhausted (gap {:.3e})",
                    nu / t
                )));
            }
            let sl = slacks(&cons, &bmat, &d)
                .ok_or_else(|| JohnError::NotConverged("lost feasibility".into()))?;
            let binv = bmat
                .clone()
                .try_inverse()
                .ok_or_else(|| JohnError::NotConverged("shape matrix became singular".into()))?;

            // Gradient and Hessian in (vech B, d) coordinates.
            let mut grad: DVector<f64> = DVector::zeros(dim);
            let mut hess: DMatrix<f64> = DMatrix::zeros(dim, dim);

            // -t log det B part.
            for k in 0..nb {
                grad[k] -= t * basis.inner(&binv, k);
            }
            for k in 0..nb {
                for l in k..nb {
                    let mut v = 0.0;
                    for &(p, q) in &basis.entries[k] {
                        for &(r, s) in &basis.entries[l] {
                            v += binv[(q, r)] * binv[(s, p)];
                        }
                    }
                    hess[(k, l)] += t * v;
                    if l != k {
                        hess[(l, k)] += t * v;
                    }
                }
            }

            // Cone barrier parts.
            let mut gamma = DVector::zeros(dim);
            for (ci, c) in cons.iter().enumerate() {
                let (s, q) = sl[ci];
                let u = &bmat * &c.a;
                // ∂q/∂B_k = -2 u·v_k ; ∂q/∂d = -2 s a.
                let gb = c.v.transpose() * &u * (-2.0);
                for k in 0..nb {
                    gamma[k] = gb[k];
                }
                for j in 0..n {
                    gamma[nb + j] = -2.0 * s * c.a[j];
                }
                // grad φ = -(1/q) ∇q.
                for k in 0..dim {
                    grad[k] -= gamma[k] / q;
                }
                // Hess φ = (1/q²) ∇q∇qᵀ - (1/q) ∇²q.
                let w1 = 1.0 / (q * q);
                for k in 0..dim {
                    let gk = gamma[k] * w1;
                    if gk != 0.0 {
                        for l in 0..dim {
                            hess[(k, l)] += gk * gamma[l];
                        }
                    }
                }
                let w2 = 2.0 / q;
                for k in 0..nb {
                    for l in 0..nb {
                        hess[(k, l)] += w2 * c.gram[(k, l)];
                    }
                }
                for r in 0..n {
                    for s2 in 0..n {
                        hess[(nb + r, nb + s2)] -= w2 * c.aat[(r, s2)];
                    }
                }
            }

            // Newton direction with a ridge fallback.
            let mut ridge = 0.0_f64;
            let delta = loop {
                let mut h = hess.clone();
                if ridge > 0.0 {
                    for k in 0..dim {
                        h[(k, k)] += ridge;
                    }
                }
                match h.cholesky() {
                    Some(ch) => break ch.solve(&(-&grad)),
                    None => {
                        ridge = if ridge == 0.0 {
                            1e-12 * hess.trace().abs().max(1.0)
                        } else {
                            ridge * 100.0
                        };
                        if ridge > 1e6 {
                            return Err(JohnError::NotConverged(
                                "newton system is numerically singular".into(),
                            ));
                        }
                    }
                }
            };
            let lambda2 = -grad.dot(&delta);
            steps += 1;

            if lambda2 * 0.5 < center_tol {
                break; // centered enough for this t
            }

            // Backtracking line search on the barrier value.
            let mut db = DMatrix::zeros(n, n);
            for k in 0..nb {
                basis.add_scaled(&mut db, k, delta[k]);
            }
            let dd = DVector::from_fn(n, |j, _| delta[nb + j]);
            let f0 = barrier_value(&cons, &bmat, &d, t)
                .ok_or_else(|| JohnError::NotConverged("lost feasibility".into()))?;
            let mut step = 1.0_f64;
            let mut accepted = false;
            for _ in 0..60 {
                let bn = &bmat + &db * step;
                let dn = &d + &dd * step;
                if let Some(fn_) = barrier_value(&cons, &bn, &dn, t) {
                    if fn_ <= f0 - 0.25 * step * lambda2 {
                        bmat = bn;
                        d = dn;
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                // Cannot make progress; treat as centered.
                break;
            }
        }

        if final_stage {
            let gap = nu / t;
            return Ok(DetMaxResult { b: bmat, d, newton_steps: steps, gap });
        }
        t *= 8.0;
    }
}
