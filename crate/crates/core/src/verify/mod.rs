//! The bounds harness: empirical bilipschitz ratios between the
//! Binet-Legendre length and the Finsler gauge, certified John inclusions,
//! density comparisons, the p-ball radius/nonsmoothness scans and the
//! counterexample-field checks — each against its closed-form constant.

pub mod corpus;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::binet_legendre::{
    self as bl, busemann_densities, zermelo_bl_closed_form, MetricError,
};
use crate::body::{Body, BodyError, BodySpec};
use crate::domain::{GeometryError, Polyline, ZermeloField};
use crate::john::{self, pball_john_radius, InclusionSide, JohnError};
use crate::linalg;
use crate::rng::DirectionSet;
use crate::tol;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Body(#[from] BodyError),
    #[error(transparent)]
    John(#[from] JohnError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("unknown suite: {0}")]
    UnknownSuite(String),
}

/// One CSV report row; the column set is fixed for CI diffing.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub suite: String,
    pub check_id: String,
    pub body_id: String,
    pub n: usize,
    pub measured: f64,
    pub bound: f64,
    pub bound_source: String,
    pub pass: bool,
}

impl CheckRow {
    /// measured <= bound (+ slack).
    pub fn upper(
        suite: &str,
        check: &str,
        body: &str,
        n: usize,
        measured: f64,
        bound: f64,
        source: &str,
    ) -> Self {
        Self {
            suite: suite.into(),
            check_id: check.into(),
            body_id: body.into(),
            n,
            measured,
            bound,
            bound_source: source.into(),
            pass: measured <= bound + tol::CONSTANT_SLACK,
        }
    }

    /// measured >= bound (- slack).
    pub fn lower(
        suite: &str,
        check: &str,
        body: &str,
        n: usize,
        measured: f64,
        bound: f64,
        source: &str,
    ) -> Self {
        Self {
            suite: suite.into(),
            check_id: check.into(),
            body_id: body.into(),
            n,
            measured,
            bound,
            bound_source: source.into(),
            pass: measured >= bound - tol::CONSTANT_SLACK,
        }
    }

    /// |measured| <= bound, no extra slack.
    pub fn abs_err(
        suite: &str,
        check: &str,
        body: &str,
        n: usize,
        measured: f64,
        bound: f64,
        source: &str,
    ) -> Self {
        Self {
            suite: suite.into(),
            check_id: check.into(),
            body_id: body.into(),
            n,
            measured,
            bound,
            bound_source: source.into(),
            pass: measured.abs() <= bound,
        }
    }
}

// ---------------------------------------------------------------------------
// Closed-form constants.

/// Upper constant 2·n^{1 + n/2} for √g_BL <= C·F on arbitrary bodies.
pub fn c1_basic(n: usize) -> f64 {
    let nf = n as f64;
    2.0 * nf.powf(1.0 + nf / 2.0)
}

/// Improved upper constant √(2n(n+1))·n^{n/2}.
pub fn c1_improved(n: usize) -> f64 {
    let nf = n as f64;
    (2.0 * nf * (nf + 1.0)).sqrt() * nf.powf(nf / 2.0)
}

/// Reversible lower constant n^{-n/2}.
pub fn c2(n: usize) -> f64 {
    (n as f64).powf(-(n as f64) / 2.0)
}

/// Reversible upper constant n^{(n+1)/2}.
pub fn c3(n: usize) -> f64 {
    (n as f64).powf((n as f64 + 1.0) / 2.0)
}

/// Quasireversible lower constant n^{-n/2}·(2/(1+c))^{1+n/2}.
pub fn c2_quasi(n: usize, c: f64) -> f64 {
    let nf = n as f64;
    c2(n) * (2.0 / (1.0 + c)).powf(1.0 + nf / 2.0)
}

/// Quasireversible upper constant n^{(n+1)/2}·((1+c)/2)^{1+n/2}.
pub fn c3_quasi(n: usize, c: f64) -> f64 {
    let nf = n as f64;
    c3(n) * ((1.0 + c) / 2.0).powf(1.0 + nf / 2.0)
}

/// Direction sampling density per the harness defaults: 2^10 directions in
/// the plane, 2^12 in dimension 3 and above.
pub fn scan_directions(dim: usize, seed: u64) -> DirectionSet {
    let count = if dim == 2 { 1 << 10 } else { 1 << 12 };
    DirectionSet::new(dim, count, seed)
}

// ---------------------------------------------------------------------------
// Ratio scan.

/// Measured vs. theoretical bilipschitz constants for one body.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub body_id: String,
    pub n: usize,
    pub symmetric: bool,
    /// Measured quasireversibility constant.
    pub c: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub c1_basic: f64,
    pub c1_improved: f64,
    pub c2: f64,
    pub c3: f64,
    pub c2_quasi: f64,
    pub c3_quasi: f64,
    /// max_ratio <= c1_improved.
    pub pass_upper: bool,
    /// [min, max] ⊆ [c2_quasi, c3_quasi].
    pub pass_quasi_interval: bool,
    /// For symmetric bodies: [min, max] ⊆ [c2, c3].
    pub pass_symmetric_interval: Option<bool>,
    /// Overall verdict.
    pub pass: bool,
}

/// Polish an extremum of f over the unit sphere by projected
/// finite-difference gradient steps from `start`.
fn sphere_polish<F: Fn(&DVector<f64>) -> f64>(
    f: &F,
    start: &DVector<f64>,
    maximize: bool,
) -> f64 {
    let n = start.len();
    let sign = if maximize { 1.0 } else { -1.0 };
    let mut z = start.clone();
    let mut val = f(&z);
    let step_fd = 1e-7;
    for _ in 0..60 {
        let grad = DVector::from_fn(n, |j, _| {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[j] += step_fd;
            zm[j] -= step_fd;
            zp /= zp.norm();
            zm /= zm.norm();
            sign * (f(&zp) - f(&zm)) / (2.0 * step_fd)
        });
        let radial = grad.dot(&z);
        let tangent = &grad - &z * radial;
        let tn = tangent.norm();
        if tn <= 1e-12 {
            break;
        }
        let mut step = 0.1 / tn.max(1.0);
        let mut improved = false;
        for _ in 0..30 {
            let mut zn = &z + &tangent * step;
            zn /= zn.norm();
            let vn = f(&zn);
            if sign * vn > sign * val + 1e-16 {
                z = zn;
                val = vn;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    val
}

/// Scan √(g_BL(ξ,ξ)) / F(ξ) over sampled directions (extremes polished by
/// local ascent) and compare against the closed-form constants.
pub fn ratio_scan(
    body: &Body,
    body_id: &str,
    dirs: &DirectionSet,
    samples: usize,
    seed: u64,
) -> Result<BoundsReport, VerifyError> {
    let n = body.dim();
    let g = bl::bl_metric_auto(body, samples, seed)?;
    let ratio = |d: &DVector<f64>| -> f64 {
        let f = body.geom().gauge(d);
        if f <= 0.0 || !f.is_finite() {
            return f64::NAN;
        }
        g.length(d) / f
    };
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = f64::NEG_INFINITY;
    let mut arg_min = dirs.points()[0].clone();
    let mut arg_max = dirs.points()[0].clone();
    for d in dirs.iter() {
        let r = ratio(d);
        if !r.is_finite() {
            continue;
        }
        if r < min_ratio {
            min_ratio = r;
            arg_min = d.clone();
        }
        if r > max_ratio {
            max_ratio = r;
            arg_max = d.clone();
        }
    }
    min_ratio = sphere_polish(&ratio, &arg_min, false).min(min_ratio);
    max_ratio = sphere_polish(&ratio, &arg_max, true).max(max_ratio);

    let c = body.quasireversibility(dirs)?;
    let slack = tol::CONSTANT_SLACK;
    let pass_upper = max_ratio <= c1_improved(n) + slack;
    let pass_quasi =
        min_ratio >= c2_quasi(n, c) - slack && max_ratio <= c3_quasi(n, c) + slack;
    let pass_sym = body.is_symmetric().then(|| {
        min_ratio >= c2(n) - slack && max_ratio <= c3(n) + slack
    });
    Ok(BoundsReport {
        body_id: body_id.to_string(),
        n,
        symmetric: body.is_symmetric(),
        c,
        min_ratio,
        max_ratio,
        c1_basic: c1_basic(n),
        c1_improved: c1_improved(n),
        c2: c2(n),
        c3: c3(n),
        c2_quasi: c2_quasi(n, c),
        c3_quasi: c3_quasi(n, c),
        pass_upper,
        pass_quasi_interval: pass_quasi,
        pass_symmetric_interval: pass_sym,
        pass: pass_upper && pass_quasi && pass_sym.unwrap_or(true),
    })
}

pub fn ratio_report_rows(r: &BoundsReport) -> Vec<CheckRow> {
    let suite = "bl-bounds";
    let mut rows = vec![
        CheckRow::upper(
            suite,
            "bl_ratio_upper",
            &r.body_id,
            r.n,
            r.max_ratio,
            r.c1_improved,
            "sqrt(2n(n+1))*n^(n/2)",
        ),
        CheckRow::upper(
            suite,
            "bl_ratio_quasi_upper",
            &r.body_id,
            r.n,
            r.max_ratio,
            r.c3_quasi,
            "n^((n+1)/2)*((1+c)/2)^(1+n/2)",
        ),
        CheckRow::lower(
            suite,
            "bl_ratio_quasi_lower",
            &r.body_id,
            r.n,
            r.min_ratio,
            r.c2_quasi,
            "n^(-n/2)*(2/(1+c))^(1+n/2)",
        ),
    ];
    if r.symmetric {
        rows.push(CheckRow::upper(
            suite,
            "bl_ratio_sym_upper",
            &r.body_id,
            r.n,
            r.max_ratio,
            r.c3,
            "n^((n+1)/2)",
        ));
        rows.push(CheckRow::lower(
            suite,
            "bl_ratio_sym_lower",
            &r.body_id,
            r.n,
            r.min_ratio,
            r.c2,
            "n^(-n/2)",
        ));
    }
    rows
}

// ---------------------------------------------------------------------------
// John bounds suite.

/// Inclusion certificates and John-metric sandwich for one body.
fn john_rows_for_body(
    body_id: &str,
    body: &Body,
    dirs: &DirectionSet,
    john_tol: f64,
    incl_tol: f64,
) -> Result<Vec<CheckRow>, VerifyError> {
    let suite = "john-bounds";
    let n = body.dim();
    let nf = n as f64;
    let sol = john::max_inscribed_ellipsoid(body, john_tol)?;
    let q = sol.ellipsoid.center().clone();
    let j0 = crate::body::Ellipsoid::new(DVector::zeros(n), sol.ellipsoid.factor().clone())
        .map_err(JohnError::Body)?;
    let mut rows = Vec::new();

    // J ⊆ Ω, factor 1.
    let cert = john::check_inclusion(
        InclusionSide::Ellipsoid(&sol.ellipsoid),
        InclusionSide::Body(body),
        1.0,
        dirs,
        incl_tol,
    )?;
    rows.push(CheckRow {
        suite: suite.into(),
        check_id: "john_inner".into(),
        body_id: body_id.into(),
        n,
        measured: cert.max_violation,
        bound: incl_tol,
        bound_source: "J ⊆ K".into(),
        pass: cert.pass,
    });

    if body.is_symmetric() {
        // Ω ⊆ √n·J (John ellipsoid already centered).
        let cert = john::check_inclusion(
            InclusionSide::Body(body),
            InclusionSide::Ellipsoid(&j0),
            nf.sqrt(),
            dirs,
            incl_tol,
        )?;
        rows.push(CheckRow {
            suite: suite.into(),
            check_id: "john_sym_sqrt_n".into(),
            body_id: body_id.into(),
            n,
            measured: cert.max_violation,
            bound: incl_tol,
            bound_source: "K ⊆ sqrt(n)·J".into(),
            pass: cert.pass,
        });
    } else {
        // Ω - Q ⊆ n·J0.
        let shifted = BodySpec::Translate {
            inner: Box::new(body.spec().clone()),
            offset: (-&q).iter().copied().collect(),
        }
        .build()?;
        let cert = john::check_inclusion(
            InclusionSide::Body(&shifted),
            InclusionSide::Ellipsoid(&j0),
            nf,
            dirs,
            incl_tol,
        )?;
        rows.push(CheckRow {
            suite: suite.into(),
            check_id: "john_centered_n".into(),
            body_id: body_id.into(),
            n,
            measured: cert.max_violation,
            bound: incl_tol,
            bound_source: "K - Q ⊆ n·J0".into(),
            pass: cert.pass,
        });
        // Ω ⊆ 2n·J0 and the improved √(2n(n+1)) factor.
        for (check, factor, source) in [
            ("john_2n", 2.0 * nf, "K ⊆ 2n·J0"),
            ("john_sqrt_2nn1", (2.0 * nf * (nf + 1.0)).sqrt(), "K ⊆ sqrt(2n(n+1))·J0"),
        ] {
            let cert = john::check_inclusion(
                InclusionSide::Body(body),
                InclusionSide::Ellipsoid(&j0),
                factor,
                dirs,
                incl_tol,
            )?;
            rows.push(CheckRow {
                suite: suite.into(),
                check_id: check.into(),
                body_id: body_id.into(),
                n,
                measured: cert.max_violation,
                bound: incl_tol,
                bound_source: source.into(),
                pass: cert.pass,
            });
        }
    }

    // John metric sandwich along sampled directions (gauge bodies only).
    if body.origin_interior() {
        let g = john::john_metric(body, john_tol)?;
        let mut max_l_over_f = f64::NEG_INFINITY;
        let mut max_f_over_l = f64::NEG_INFINITY;
        for d in dirs.iter() {
            let f = body.geom().gauge(d);
            let l = g.length(d);
            if f > 0.0 && l > 0.0 {
                max_l_over_f = max_l_over_f.max(l / f);
                max_f_over_l = max_f_over_l.max(f / l);
            }
        }
        rows.push(CheckRow::upper(
            suite,
            "john_metric_lower_2n",
            body_id,
            n,
            max_l_over_f,
            2.0 * nf,
            "(1/(2n))·sqrt(g_John) <= F",
        ));
        if body.is_symmetric() {
            rows.push(CheckRow::upper(
                suite,
                "john_metric_sym_lower_sqrt_n",
                body_id,
                n,
                max_l_over_f,
                nf.sqrt(),
                "(1/sqrt(n))·sqrt(g_John) <= F",
            ));
            rows.push(CheckRow::upper(
                suite,
                "john_metric_sym_upper",
                body_id,
                n,
                max_f_over_l,
                1.0,
                "F <= sqrt(g_John)",
            ));
        }
    }
    Ok(rows)
}

/// Run the inclusion certificates over a corpus, in parallel with a
/// deterministic merge order.
pub fn john_bounds_suite(
    bodies: &[(String, Body)],
    dirs: &DirectionSet,
    john_tol: f64,
    incl_tol: f64,
) -> Result<Vec<CheckRow>, VerifyError> {
    let results: Result<Vec<Vec<CheckRow>>, VerifyError> = bodies
        .par_iter()
        .map(|(id, body)| john_rows_for_body(id, body, dirs, john_tol, incl_tol))
        .collect();
    Ok(results?.into_iter().flatten().collect())
}

// ---------------------------------------------------------------------------
// Density suite.

pub fn density_suite(
    bodies: &[(String, Body)],
    john_tol: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<CheckRow>, VerifyError> {
    let suite = "density";
    let results: Result<Vec<Vec<CheckRow>>, VerifyError> = bodies
        .par_iter()
        .map(|(id, body)| {
            let n = body.dim();
            let nf = n as f64;
            let r = busemann_densities(body, john_tol, samples, seed)?;
            let upper = if r.symmetric { nf.powf(nf / 2.0) } else { nf.powf(nf) };
            let upper_src = if r.symmetric { "mu_John/mu_F <= n^(n/2)" } else { "mu_John/mu_F <= n^n" };
            let mut rows = vec![
                CheckRow::lower(suite, "density_john_lower", id, n, r.john_ratio, 1.0, "mu_F <= mu_John"),
                CheckRow::upper(suite, "density_john_upper", id, n, r.john_ratio, upper, upper_src),
                CheckRow::upper(suite, "density_bl_upper", id, n, r.bl_ratio, 1.0, "mu_BL <= mu_F"),
            ];
            if r.is_ellipsoid {
                rows.push(CheckRow::abs_err(
                    suite,
                    "density_bl_equality",
                    id,
                    n,
                    r.bl_ratio - 1.0,
                    tol::EXACT,
                    "mu_BL = mu_F on ellipsoids",
                ));
            }
            Ok(rows)
        })
        .collect();
    Ok(results?.into_iter().flatten().collect())
}

// ---------------------------------------------------------------------------
// Nonsmoothness scan.

#[derive(Debug, Clone, Serialize)]
pub struct NonsmoothRow {
    pub x1: f64,
    pub p: f64,
    pub r_solved: f64,
    pub r_formula: f64,
}

/// Radius scan of the p-ball John ellipsoid across the p = 2 kink.
#[derive(Debug, Clone, Serialize)]
pub struct NonsmoothScan {
    pub n: usize,
    pub rows: Vec<NonsmoothRow>,
    /// Least-squares slope dr/dp over the grid points just below p = 2.
    pub left_slope: f64,
    /// Slope just above p = 2.
    pub right_slope: f64,
    /// (ln n)/4: the left-limit slope of n^{1/2 - 1/p} at p = 2.
    pub expected_left_slope: f64,
    /// The scan is keyed on the p = 2 locus, reached at x1 = 0 under
    /// p(x1) = 1 + exp(x1).
    pub kink_x1: f64,
}

/// Default grid: p ∈ {1.90, 1.92, …, 2.10} expressed as x1 = ln(p - 1).
pub fn default_x1_grid() -> Vec<f64> {
    (0..=10).map(|i| (0.90_f64 + 0.02 * i as f64).ln()).collect()
}

fn lsq_slope(points: &[(f64, f64)]) -> f64 {
    let m = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (m * sxy - sx * sy) / (m * sxx - sx * sx)
}

pub fn nonsmooth_scan(
    n: usize,
    x1_grid: &[f64],
    solver_tol: f64,
) -> Result<NonsmoothScan, VerifyError> {
    let results: Result<Vec<NonsmoothRow>, VerifyError> = x1_grid
        .par_iter()
        .map(|&x1| {
            let p = 1.0 + x1.exp();
            let body = BodySpec::PBall { p, dim: n }.build()?;
            let sol = john::max_inscribed_ellipsoid(&body, solver_tol)?;
            // Volume-equivalent radius is robust to residual asphericity.
            let r_solved = sol.ellipsoid.det_factor().powf(1.0 / n as f64);
            Ok(NonsmoothRow { x1, p, r_solved, r_formula: pball_john_radius(p, n) })
        })
        .collect();
    let rows = results?;
    let eps = 1e-9;
    let left: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.p <= 2.0 + eps)
        .map(|r| (r.p, r.r_solved))
        .collect();
    let right: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.p >= 2.0 - eps)
        .map(|r| (r.p, r.r_solved))
        .collect();
    // Use the three grid points nearest the kink on each side.
    let take_near = |mut v: Vec<(f64, f64)>, from_end: bool| -> Vec<(f64, f64)> {
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if from_end {
            v.into_iter().rev().take(3).collect()
        } else {
            v.into_iter().take(3).collect()
        }
    };
    let left_slope = lsq_slope(&take_near(left, true));
    let right_slope = lsq_slope(&take_near(right, false));
    Ok(NonsmoothScan {
        n,
        rows,
        left_slope,
        right_slope,
        expected_left_slope: (n as f64).ln() / 4.0,
        kink_x1: 0.0,
    })
}

// ---------------------------------------------------------------------------
// Symmetrization bounds.

/// Build F' = ½(F(ξ) + F(-ξ)), measure the directional sandwich
/// (2/(1+c))·F' <= F <= ((1+c)/2)·F', and the Binet-Legendre quadratic-form
/// sandwich with factor ((1+c)/2)^n.
pub fn symmetrize_and_bound(
    body: &Body,
    body_id: &str,
    dirs: &DirectionSet,
    samples: usize,
    seed: u64,
) -> Result<Vec<CheckRow>, VerifyError> {
    let suite = "symmetrize";
    let n = body.dim();
    let nf = n as f64;
    let sym = BodySpec::Symmetrized { inner: Box::new(body.spec().clone()) }.build()?;
    let c = body.quasireversibility(dirs)?;

    let mut min_dir = f64::INFINITY;
    let mut max_dir = f64::NEG_INFINITY;
    for d in dirs.iter() {
        let f = body.geom().gauge(d);
        let fp = sym.geom().gauge(d);
        if f > 0.0 && fp > 0.0 {
            let r = f / fp;
            min_dir = min_dir.min(r);
            max_dir = max_dir.max(r);
        }
    }
    let mut rows = vec![
        CheckRow::lower(suite, "sym_dir_lower", body_id, n, min_dir, 2.0 / (1.0 + c), "2/(1+c)·F' <= F"),
        CheckRow::upper(suite, "sym_dir_upper", body_id, n, max_dir, (1.0 + c) / 2.0, "F <= (1+c)/2·F'"),
    ];

    let g = bl::bl_metric_auto(body, samples, seed)?;
    let gp = bl::bl_metric_auto(&sym, samples, seed)?;
    let mut min_q = f64::INFINITY;
    let mut max_q = f64::NEG_INFINITY;
    for d in dirs.iter() {
        let q = g.quad(d) / gp.quad(d);
        min_q = min_q.min(q);
        max_q = max_q.max(q);
    }
    let factor = ((1.0 + c) / 2.0).powf(nf);
    // Monte-Carlo error in either tensor loosens the quadratic-form sandwich.
    let mc_slack = 1.0 + mc_relative_slack(&g, dirs) + mc_relative_slack(&gp, dirs);
    rows.push(CheckRow::lower(
        suite,
        "sym_bl_lower",
        body_id,
        n,
        min_q,
        (2.0 / (1.0 + c)).powf(nf) / mc_slack,
        "(2/(1+c))^n·g'_BL <= g_BL",
    ));
    rows.push(CheckRow::upper(
        suite,
        "sym_bl_upper",
        body_id,
        n,
        max_q,
        factor * mc_slack,
        "g_BL <= ((1+c)/2)^n·g'_BL",
    ));
    Ok(rows)
}

/// Worst-case relative 4σ slack of a Monte-Carlo tensor over directions.
fn mc_relative_slack(t: &bl::MetricTensor, dirs: &DirectionSet) -> f64 {
    let Some(se) = t.stderr() else { return 0.0 };
    let mut worst: f64 = 0.0;
    for d in dirs.iter() {
        let q = t.quad(d);
        let dq = linalg::quad_form(&se.map(f64::abs), &d.map(f64::abs));
        if q > 0.0 {
            worst = worst.max(tol::MC_SIGMA * dq / q);
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// Counterexample field checks.

/// Shell-crossing costs and the closed-form BL eigenvalue window for the
/// counterexample field on the unit ball.
pub fn counterexample_rows(dim: usize, _seed: u64) -> Result<Vec<CheckRow>, VerifyError> {
    let suite = "counterexample";
    let field = ZermeloField::counterexample(dim, 3)?;
    let shell = |t: f64| 1.0 - (-t).exp();
    let mut rows = Vec::new();

    for k in 0..=1u32 {
        let kf = 4.0 * k as f64;
        // Outward crossing of the Funk band [W_{4k}, W_{4k+1}].
        let (r0, r1) = (shell(kf), shell(kf + 1.0));
        let mut a = vec![0.0; dim];
        let mut b = vec![0.0; dim];
        a[0] = r0.max(1e-12);
        b[0] = r1;
        let len = field.path_length(&Polyline { points: vec![a, b], order: 16 })?;
        rows.push(CheckRow::abs_err(
            suite,
            &format!("shell_cost_funk_k{k}"),
            "counterexample",
            dim,
            len - 1.0,
            0.05,
            "radial Funk band costs 1",
        ));
        // Inward crossing of the reverse band [W_{4k+2}, W_{4k+3}].
        let (r2, r3) = (shell(kf + 2.0), shell(kf + 3.0));
        let mut a = vec![0.0; dim];
        let mut b = vec![0.0; dim];
        a[0] = r3;
        b[0] = r2;
        let len = field.path_length(&Polyline { points: vec![a, b], order: 16 })?;
        rows.push(CheckRow::abs_err(
            suite,
            &format!("shell_cost_rfunk_k{k}"),
            "counterexample",
            dim,
            len - 1.0,
            0.05,
            "inward reverse band costs 1",
        ));
    }

    // Closed-form BL eigenvalues stay in [1/(1+γ), 1] for every sampled x.
    let ball = BodySpec::unit_ball(dim).build()?;
    let gamma = dim as f64 + 2.0;
    let mut min_eig = f64::INFINITY;
    let mut max_eig = f64::NEG_INFINITY;
    let dirs = DirectionSet::new(dim, 16, 5);
    for radius in (0..40).map(|i| 0.0245 * i as f64) {
        for d in dirs.iter() {
            let x = d * radius;
            let u = crate::domain::counterexample_drift(&x, 3);
            let z = zermelo_bl_closed_form(&ball, &u)?;
            let (vals, _) = linalg::sym_eigen(&z.metric_normalized);
            min_eig = min_eig.min(vals.min());
            max_eig = max_eig.max(vals.max());
        }
    }
    rows.push(CheckRow::lower(
        suite,
        "bl_eigen_floor",
        "counterexample",
        dim,
        min_eig,
        1.0 / (1.0 + gamma),
        "min eig g' = 1/(1+γ|u'|²) >= 1/(1+γ)",
    ));
    rows.push(CheckRow::upper(
        suite,
        "bl_eigen_ceiling",
        "counterexample",
        dim,
        max_eig,
        1.0,
        "eigenvalues of g' at most 1",
    ));
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Suite entry points (the CLI surface).

fn corpus_count(dim: usize) -> usize {
    if dim == 2 {
        100
    } else {
        50
    }
}

pub fn suite_john_bounds(dim: usize, seed: u64) -> Result<Vec<CheckRow>, VerifyError> {
    let dirs = scan_directions(dim, seed);
    let count = corpus_count(dim);
    let mut bodies = corpus::corpus_symmetric(dim, count, seed);
    bodies.extend(corpus::corpus_general(dim, count, seed));
    john_bounds_suite(&bodies, &dirs, tol::JOHN_TOL_POLYTOPE, tol::CONSTANT_SLACK)
}

pub fn suite_bl_bounds(dim: usize, seed: u64) -> Result<Vec<CheckRow>, VerifyError> {
    let dirs = scan_directions(dim, seed);
    let bodies = corpus::standard_corpus(dim, seed);
    let reports: Result<Vec<BoundsReport>, VerifyError> = bodies
        .par_iter()
        .map(|(id, body)| ratio_scan(body, id, &dirs, 200_000, seed))
        .collect();
    Ok(reports?.iter().flat_map(ratio_report_rows).collect())
}

pub fn suite_density(dim: usize, seed: u64) -> Result<Vec<CheckRow>, VerifyError> {
    let mut bodies = corpus::standard_corpus(dim, seed);
    // Keep the density corpus at the documented polytope count.
    let half = corpus_count(dim) / 2;
    bodies.extend(corpus::corpus_symmetric(dim, half, seed ^ 0xD1));
    bodies.extend(corpus::corpus_general(dim, half, seed ^ 0xD2));
    density_suite(&bodies, tol::JOHN_TOL_POLYTOPE, 200_000, seed)
}

pub fn suite_zermelo(dim: usize, seed: u64) -> Result<Vec<CheckRow>, VerifyError> {
    let suite = "zermelo-closed-form";
    let mut omegas: Vec<(String, Body)> = vec![
        (format!("ball-n{dim}"), BodySpec::unit_ball(dim).build()?),
        (format!("cube-n{dim}"), BodySpec::cube(dim).build()?),
        (format!("poly-n{dim}"), corpus::random_polytope(dim, seed ^ 0x2E, 0, true)),
    ];
    let mut rows = Vec::new();
    for (id, omega) in omegas.drain(..) {
        // 20 seeded drifts strictly inside Ω.
        let candidates = omega.sample_uniform(4096, seed ^ 0xD81F7)?;
        let drifts: Vec<DVector<f64>> = candidates
            .into_iter()
            .filter(|u| omega.geom().gauge(u) <= 0.85)
            .take(20)
            .collect();
        for (k, u) in drifts.iter().enumerate() {
            let z = zermelo_bl_closed_form(&omega, u)?;
            let shifted = BodySpec::Translate {
                inner: Box::new(omega.spec().clone()),
                offset: (-u).iter().copied().collect(),
            }
            .build()?;
            let g = bl::bl_metric_auto(&shifted, 200_000, seed)?;
            let g_norm = z.normalize_metric(g.matrix());
            let diff = (&g_norm - &z.metric_normalized).amax();
            let bound = match g.stderr() {
                None => 1e-8,
                Some(se) => {
                    let se_norm = z.normalize_metric(&se.map(f64::abs)).amax();
                    (tol::MC_SIGMA * se_norm).max(1e-8)
                }
            };
            rows.push(CheckRow::abs_err(
                suite,
                &format!("zermelo_match_{k:02}"),
                &id,
                dim,
                diff,
                bound,
                "g' = I - γu'u'ᵀ/(1+γ|u'|²), γ = n+2",
            ));
        }
    }
    // The fixed disk case u = (0.5, 0, …): g' = diag(1/2, 1, …).
    let ball = BodySpec::unit_ball(dim).build()?;
    let mut u = DVector::zeros(dim);
    u[0] = 0.5;
    let z = zermelo_bl_closed_form(&ball, &u)?;
    let mut expect = DMatrix::identity(dim, dim);
    expect[(0, 0)] = 0.5;
    rows.push(CheckRow::abs_err(
        suite,
        "zermelo_ball_half_drift",
        &format!("ball-n{dim}"),
        dim,
        (&z.metric_normalized - expect).amax(),
        1e-8,
        "diag(1/2, 1, …) at u = e1/2",
    ));
    Ok(rows)
}

pub fn suite_pball_radius(dim: usize, seed: u64) -> Result<Vec<CheckRow>, VerifyError> {
    let suite = "pball-radius";
    let solver_tol = if dim == 2 { 1e-5 } else { 1e-4 };
    let ps = [1.0, 1.2, 1.5, 2.0, 3.0, 6.0];
    let rows: Result<Vec<CheckRow>, VerifyError> = ps
        .par_iter()
        .map(|&p| {
            let body = BodySpec::PBall { p, dim }.build()?;
            let sol = john::max_inscribed_ellipsoid_seeded(&body, solver_tol, seed)?;
            let r_solved = sol.ellipsoid.det_factor().powf(1.0 / dim as f64);
            let r_formula = pball_john_radius(p, dim);
            Ok(CheckRow::abs_err(
                suite,
                &format!("pball_radius_p{p}"),
                &format!("pball-{p}-n{dim}"),
                dim,
                r_solved - r_formula,
                1e-3,
                "r = min(1, n^(1/2-1/p))",
            ))
        })
        .collect();
    rows
}

pub fn suite_nonsmooth(dim: usize, _seed: u64) -> Result<Vec<CheckRow>, VerifyError> {
    let suite = "nonsmooth-scan";
    let scan = nonsmooth_scan(dim, &default_x1_grid(), tol::JOHN_TOL_CUTTING)?;
    let mut rows = Vec::new();
    for r in &scan.rows {
        rows.push(CheckRow::abs_err(
            suite,
            &format!("r_err_p{:.2}", r.p),
            &format!("pball-n{dim}"),
            dim,
            r.r_solved - r.r_formula,
            1e-3,
            "r = min(1, n^(1/2-1/p))",
        ));
    }
    rows.push(CheckRow::abs_err(
        suite,
        "slope_left",
        &format!("pball-n{dim}"),
        dim,
        scan.left_slope - scan.expected_left_slope,
        0.02,
        "dr/dp -> (ln n)/4 as p -> 2-",
    ));
    rows.push(CheckRow::abs_err(
        suite,
        "slope_right",
        &format!("pball-n{dim}"),
        dim,
        scan.right_slope,
        0.02,
        "dr/dp = 0 for p > 2",
    ));
    // The kink sits at p = 2, i.e. x1 = 0 under p(x1) = 1 + exp(x1).
    rows.push(CheckRow::abs_err(
        suite,
        "kink_locus_x1",
        &format!("pball-n{dim}"),
        dim,
        scan.kink_x1,
        tol::TIGHT,
        "p(x1) = 1 + exp(x1) reaches 2 at x1 = 0",
    ));
    Ok(rows)
}

pub fn suite_counterexample(dim: usize, seed: u64) -> Result<Vec<CheckRow>, VerifyError> {
    counterexample_rows(dim, seed)
}

/// Symmetrization checks on the named quasireversible body.
pub fn suite_symmetrize(dim: usize, seed: u64) -> Result<Vec<CheckRow>, VerifyError> {
    let dirs = scan_directions(dim, seed);
    let mut offset = vec![0.0; dim];
    offset[0] = -0.5;
    let funk_ball = BodySpec::Translate { inner: Box::new(BodySpec::unit_ball(dim)), offset }
        .build()?;
    let mut rows = symmetrize_and_bound(&funk_ball, &format!("funkball-n{dim}"), &dirs, 200_000, seed)?;
    let cube = BodySpec::cube(dim).build()?;
    rows.extend(symmetrize_and_bound(&cube, &format!("cube-n{dim}"), &dirs, 200_000, seed)?);
    Ok(rows)
}

/// Dispatch by suite name (the `verify` CLI surface).
pub fn run_suite(name: &str, dim: usize, seed: u64) -> Result<Vec<CheckRow>, VerifyError> {
    match name {
        "john-bounds" => suite_john_bounds(dim, seed),
        "bl-bounds" => suite_bl_bounds(dim, seed),
        "density" => suite_density(dim, seed),
        "zermelo-closed-form" => suite_zermelo(dim, seed),
        "pball-radius" => suite_pball_radius(dim, seed),
        "nonsmooth-scan" => suite_nonsmooth(dim, seed),
        "counterexample" => suite_counterexample(dim, seed),
        "symmetrize" => suite_symmetrize(dim, seed),
        other => Err(VerifyError::UnknownSuite(other.to_string())),
    }
}

#[cfg(test)]
mod tests;
