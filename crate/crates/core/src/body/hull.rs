//! Convex hulls and H↔V conversion at desk scale (n ≤ 3).
//!
//! Vertex counts here are a few dozen at most, so the 3-D hull uses the
//! brute-force supporting-plane enumeration over vertex triples rather than
//! an incremental structure.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

const GEOM_TOL: f64 = 1e-9;

/// Facet description `{x : A x <= b}` with unit-norm rows.
#[derive(Debug, Clone)]
pub struct Facets {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

/// Oriented triangulation of the boundary, each triangle indexing `verts`.
#[derive(Debug, Clone)]
pub struct Hull {
    pub verts: Vec<DVector<f64>>,
    /// Boundary simplices with outward orientation: segments in 2-D,
    /// triangles in 3-D.
    pub boundary: Vec<Vec<usize>>,
    pub facets: Facets,
}

fn scale_of(points: &[DVector<f64>]) -> f64 {
    points
        .iter()
        .map(|p| p.amax())
        .fold(0.0_f64, f64::max)
        .max(1.0)
}

fn dedupe(points: &[DVector<f64>], tol: f64) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for p in points {
        if !out.iter().any(|q| (p - q).amax() <= tol) {
            out.push(p.clone());
        }
    }
    out
}

/// Convex hull in the plane (monotone chain), counter-clockwise order.
pub fn hull_2d(points: &[DVector<f64>]) -> Option<Hull> {
    let scale = scale_of(points);
    let pts = dedupe(points, GEOM_TOL * scale);
    if pts.len() < 3 {
        return None;
    }
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&i, &j| {
        (pts[i][0], pts[i][1])
            .partial_cmp(&(pts[j][0], pts[j][1]))
            .unwrap()
    });
    let cross = |o: usize, a: usize, b: usize| -> f64 {
        (pts[a][0] - pts[o][0]) * (pts[b][1] - pts[o][1])
            - (pts[a][1] - pts[o][1]) * (pts[b][0] - pts[o][0])
    };
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2
            && cross(lower[lower.len() - 2], lower[lower.len() - 1], i) <= GEOM_TOL * scale * scale
        {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2
            && cross(upper[upper.len() - 2], upper[upper.len() - 1], i) <= GEOM_TOL * scale * scale
        {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        return None;
    }
    let verts: Vec<DVector<f64>> = lower.iter().map(|&i| pts[i].clone()).collect();
    let k = verts.len();
    let mut rows = Vec::with_capacity(k);
    let mut offs = Vec::with_capacity(k);
    let mut boundary = Vec::with_capacity(k);
    for i in 0..k {
        let p = &verts[i];
        let q = &verts[(i + 1) % k];
        let e = q - p;
        // CCW boundary: outward normal is the edge rotated clockwise.
        let mut nrm = DVector::from_vec(vec![e[1], -e[0]]);
        let len = nrm.norm();
        if len <= GEOM_TOL * scale {
            continue;
        }
        nrm /= len;
        rows.push(nrm.clone());
        offs.push(nrm.dot(p));
        boundary.push(vec![i, (i + 1) % k]);
    }
    let a = DMatrix::from_fn(rows.len(), 2, |i, j| rows[i][j]);
    let b = DVector::from_vec(offs);
    Some(Hull { verts, boundary, facets: Facets { a, b } })
}

/// Convex hull in 3-space via supporting-plane enumeration.
pub fn hull_3d(points: &[DVector<f64>]) -> Option<Hull> {
    let scale = scale_of(points);
    let pts = dedupe(points, GEOM_TOL * scale);
    let k = pts.len();
    if k < 4 {
        return None;
    }
    let v3 = |p: &DVector<f64>| Vector3::new(p[0], p[1], p[2]);

    // Collect distinct supporting planes (n, b): n·x <= b for all points.
    let mut planes: Vec<(Vector3<f64>, f64)> = Vec::new();
    let plane_tol = GEOM_TOL * scale;
    for i in 0..k {
        for j in (i + 1)..k {
            for l in (j + 1)..k {
                let a = v3(&pts[i]);
                let b = v3(&pts[j]);
                let c = v3(&pts[l]);
                let n = (b - a).cross(&(c - a));
                let nn = n.norm();
                if nn <= GEOM_TOL * scale * scale {
                    continue;
                }
                let n = n / nn;
                let off = n.dot(&a);
                let mut above = false;
                let mut below = false;
                for p in &pts {
                    let d = n.dot(&v3(p)) - off;
                    if d > plane_tol {
                        above = true;
                    }
                    if d < -plane_tol {
                        below = true;
                    }
                    if above && below {
                        break;
                    }
                }
                let cand = if !above {
                    Some((n, off))
                } else if !below {
                    Some((-n, -off))
                } else {
                    None
                };
                if let Some((n, off)) = cand {
                    let dup = planes.iter().any(|(m, o)| {
                        (m - n).norm() <= 1e-7 && (o - off).abs() <= 1e-7 * scale.max(1.0)
                    });
                    if !dup {
                        planes.push((n, off));
                    }
                }
            }
        }
    }
    if planes.len() < 4 {
        return None;
    }

    // Hull vertices: points lying on at least three planes.
    let on_plane = |p: &DVector<f64>, pl: &(Vector3<f64>, f64)| -> bool {
        (pl.0.dot(&v3(p)) - pl.1).abs() <= plane_tol * 10.0
    };
    let mut vert_idx: Vec<usize> = Vec::new();
    for (pi, p) in pts.iter().enumerate() {
        let cnt = planes.iter().filter(|pl| on_plane(p, pl)).count();
        if cnt >= 3 {
            vert_idx.push(pi);
        }
    }
    let verts: Vec<DVector<f64>> = vert_idx.iter().map(|&i| pts[i].clone()).collect();
    if verts.len() < 4 {
        return None;
    }

    // Triangulate each facet: project its vertices in-plane, 2-D hull, fan.
    let mut boundary: Vec<Vec<usize>> = Vec::new();
    for (n, off) in &planes {
        let members: Vec<usize> = (0..verts.len())
            .filter(|&i| (n.dot(&v3(&verts[i])) - off).abs() <= plane_tol * 10.0)
            .collect();
        if members.len() < 3 {
            continue;
        }
        // In-plane orthonormal frame.
        let axis = if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        let u = n.cross(&axis).normalize();
        let w = n.cross(&u);
        let projected: Vec<DVector<f64>> = members
            .iter()
            .map(|&i| {
                let p = v3(&verts[i]);
                DVector::from_vec(vec![u.dot(&p), w.dot(&p)])
            })
            .collect();
        let ring: Vec<usize> = match hull_2d(&projected) {
            Some(h2) => h2
                .verts
                .iter()
                .map(|pv| {
                    let j = projected
                        .iter()
                        .position(|q| (q - pv).amax() <= GEOM_TOL * scale * 10.0)
                        .expect("projected hull vertex must come from the member set");
                    members[j]
                })
                .collect(),
            None => continue,
        };
        for t in 1..ring.len() - 1 {
            let (ia, ib, ic) = (ring[0], ring[t], ring[t + 1]);
            let a = v3(&verts[ia]);
            let b = v3(&verts[ib]);
            let c = v3(&verts[ic]);
            let tri_n = (b - a).cross(&(c - a));
            if tri_n.dot(n) >= 0.0 {
                boundary.push(vec![ia, ib, ic]);
            } else {
                boundary.push(vec![ia, ic, ib]);
            }
        }
    }
    if boundary.is_empty() {
        return None;
    }
    let a = DMatrix::from_fn(planes.len(), 3, |i, j| planes[i].0[j]);
    let b = DVector::from_iterator(planes.len(), planes.iter().map(|p| p.1));
    Some(Hull { verts, boundary, facets: Facets { a, b } })
}

pub fn hull(points: &[DVector<f64>]) -> Option<Hull> {
    match points.first().map(|p| p.len()) {
        Some(2) => hull_2d(points),
        Some(3) => hull_3d(points),
        _ => None,
    }
}

/// Vertex enumeration of a bounded H-polytope, n ≤ 3: intersect every
/// n-subset of facet planes and keep feasible, distinct solutions.
pub fn enumerate_vertices(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<Vec<DVector<f64>>> {
    let m = a.nrows();
    let n = a.ncols();
    if !(2..=3).contains(&n) || m < n + 1 {
        return None;
    }
    let scale = b.amax().max(1.0);
    let mut verts: Vec<DVector<f64>> = Vec::new();
    let mut subset = vec![0usize; n];
    let mut stack: Vec<Vec<usize>> = vec![vec![]];
    while let Some(cur) = stack.pop() {
        if cur.len() == n {
            subset.copy_from_slice(&cur);
            let sys = DMatrix::from_fn(n, n, |i, j| a[(subset[i], j)]);
            let rhs = DVector::from_fn(n, |i, _| b[subset[i]]);
            if n == 3 {
                let m3 = Matrix3::from_fn(|i, j| sys[(i, j)]);
                if m3.determinant().abs() <= 1e-12 {
                    continue;
                }
            } else if sys.clone().determinant().abs() <= 1e-12 {
                continue;
            }
            if let Some(x) = sys.lu().solve(&rhs) {
                let feasible = (0..m).all(|i| a.row(i).transpose().dot(&x) <= b[i] + 1e-8 * scale);
                if feasible && !verts.iter().any(|v| (v - &x).amax() <= 1e-8 * scale) {
                    verts.push(x);
                }
            }
            continue;
        }
        let start = cur.last().map_or(0, |&l| l + 1);
        for i in start..m {
            let mut next = cur.clone();
            next.push(i);
            stack.push(next);
        }
    }
    if verts.len() < n + 1 {
        return None;
    }
    Some(verts)
}
