//! Dense two-phase simplex for the tiny LPs behind V-polytope gauges.
//!
//! Problems have at most a handful of equality rows (the ambient dimension
//! plus one) and a few dozen columns (the vertices), so a dense tableau with
//! Bland's rule is entirely adequate and fully deterministic.

use nalgebra::{DMatrix, DVector};

const LP_TOL: f64 = 1e-10;
const ITER_CAP: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: f64, x: DVector<f64> },
    Infeasible,
    Unbounded,
}

/// Solve `min c^T x  s.t.  A x = b, x >= 0`.
pub fn solve_standard(c: &DVector<f64>, a: &DMatrix<f64>, b: &DVector<f64>) -> LpOutcome {
    let m = a.nrows();
    let n = a.ncols();
    assert_eq!(c.len(), n);
    assert_eq!(b.len(), m);

    // Tableau over structural + artificial columns; rhs kept nonnegative.
    let total = n + m;
    let mut t = DMatrix::zeros(m, total + 1);
    for i in 0..m {
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[(i, j)] = flip * a[(i, j)];
        }
        t[(i, n + i)] = 1.0;
        t[(i, total)] = flip * b[i];
    }
    let mut basis: Vec<usize> = (n..total).collect();

    // Phase 1: minimize the sum of artificials.
    let mut cost1 = DVector::zeros(total);
    for j in n..total {
        cost1[j] = 1.0;
    }
    if !simplex_loop(&mut t, &mut basis, &cost1, n) {
        return LpOutcome::Infeasible; // iteration cap; treat as failure
    }
    let phase1 = objective(&t, &basis, &cost1);
    if phase1 > LP_TOL {
        return LpOutcome::Infeasible;
    }
    // Pivot remaining artificials out of the basis where possible.
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t[(i, j)].abs() > LP_TOL) {
                pivot(&mut t, &mut basis, i, j);
            }
        }
    }

    // Phase 2 on the structural columns.
    let mut cost2 = DVector::zeros(total);
    for j in 0..n {
        cost2[j] = c[j];
    }
    match simplex_phase2(&mut t, &mut basis, &cost2, n) {
        Phase2::Optimal => {}
        Phase2::Unbounded => return LpOutcome::Unbounded,
        Phase2::IterCap => return LpOutcome::Infeasible,
    }

    let mut x = DVector::zeros(n);
    for (i, &bj) in basis.iter().enumerate() {
        if bj < n {
            x[bj] = t[(i, t.ncols() - 1)];
        }
    }
    LpOutcome::Optimal { value: c.dot(&x), x }
}

fn objective(t: &DMatrix<f64>, basis: &[usize], cost: &DVector<f64>) -> f64 {
    let rhs = t.ncols() - 1;
    basis
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[j] * t[(i, rhs)])
        .sum()
}

enum Phase2 {
    Optimal,
    Unbounded,
    IterCap,
}

fn reduced_cost(t: &DMatrix<f64>, basis: &[usize], cost: &DVector<f64>, j: usize) -> f64 {
    let mut r = cost[j];
    for (i, &bj) in basis.iter().enumerate() {
        r -= cost[bj] * t[(i, j)];
    }
    r
}

/// Bland's rule simplex; `block_artificial_from` excludes artificial columns
/// from entering once phase 1 ends. Returns false on iteration cap.
fn simplex_loop(
    t: &mut DMatrix<f64>,
    basis: &mut [usize],
    cost: &DVector<f64>,
    _n_structural: usize,
) -> bool {
    for _ in 0..ITER_CAP {
        let ncols = t.ncols() - 1;
        let entering = (0..ncols).find(|&j| {
            !basis.contains(&j) && reduced_cost(t, basis, cost, j) < -LP_TOL
        });
        let Some(j) = entering else { return true };
        let Some(i) = ratio_test(t, j) else {
            // Phase 1 objective is bounded below by zero, so an unbounded ray
            // cannot occur here; bail out defensively.
            return false;
        };
        pivot(t, basis, i, j);
    }
    false
}

fn simplex_phase2(
    t: &mut DMatrix<f64>,
    basis: &mut [usize],
    cost: &DVector<f64>,
    n_structural: usize,
) -> Phase2 {
    for _ in 0..ITER_CAP {
        let entering = (0..n_structural).find(|&j| {
            !basis.contains(&j) && reduced_cost(t, basis, cost, j) < -LP_TOL
        });
        let Some(j) = entering else { return Phase2::Optimal };
        let Some(i) = ratio_test(t, j) else { return Phase2::Unbounded };
        pivot(t, basis, i, j);
    }
    Phase2::IterCap
}

fn ratio_test(t: &DMatrix<f64>, j: usize) -> Option<usize> {
    let rhs = t.ncols() - 1;
    let mut best: Option<(f64, usize)> = None;
    for i in 0..t.nrows() {
        let aij = t[(i, j)];
        if aij > LP_TOL {
            let ratio = t[(i, rhs)] / aij;
            match best {
                None => best = Some((ratio, i)),
                Some((r, _)) if ratio < r - LP_TOL => best = Some((ratio, i)),
                _ => {}
            }
        }
    }
    best.map(|(_, i)| i)
}

fn pivot(t: &mut DMatrix<f64>, basis: &mut [usize], row: usize, col: usize) {
    let rhs = t.ncols();
    let pv = t[(row, col)];
    for j in 0..rhs {
        t[(row, j)] /= pv;
    }
    for i in 0..t.nrows() {
        if i != row {
            let f = t[(i, col)];
            if f != 0.0 {
                for j in 0..rhs {
                    t[(i, j)] -= f * t[(row, j)];
                }
            }
        }
    }
    basis[row] = col;
}

/// Gauge of the convex hull of `verts` at `xi`:
/// `min Σ μ_j  s.t.  Σ μ_j v_j = xi, μ >= 0`.
/// `None` when the hull does not absorb `xi` (origin not interior).
pub fn vpoly_gauge(verts: &[DVector<f64>], xi: &DVector<f64>) -> Option<f64> {
    let n = xi.len();
    let k = verts.len();
    if xi.norm() == 0.0 {
        return Some(0.0);
    }
    let a = DMatrix::from_fn(n, k, |i, j| verts[j][i]);
    let c = DVector::from_element(k, 1.0);
    match solve_standard(&c, &a, xi) {
        LpOutcome::Optimal { value, .. } => Some(value),
        _ => None,
    }
}

/// Largest `t >= 0` with `base + t·dir` in the hull of `verts`.
pub fn vpoly_ray_exit(
    verts: &[DVector<f64>],
    base: &DVector<f64>,
    dir: &DVector<f64>,
) -> Option<f64> {
    let n = base.len();
    let k = verts.len();
    // Variables: (λ_1..λ_k, t); rows: V λ - t d = base and Σ λ = 1.
    let mut a = DMatrix::zeros(n + 1, k + 1);
    for j in 0..k {
        for i in 0..n {
            a[(i, j)] = verts[j][i];
        }
        a[(n, j)] = 1.0;
    }
    for i in 0..n {
        a[(i, k)] = -dir[i];
    }
    let mut b = DVector::zeros(n + 1);
    for i in 0..n {
        b[i] = base[i];
    }
    b[n] = 1.0;
    let mut c = DVector::zeros(k + 1);
    c[k] = -1.0;
    match solve_standard(&c, &a, &b) {
        LpOutcome::Optimal { value, .. } => Some(-value),
        _ => None,
    }
}

/// Whether `x` lies in the convex hull of `verts` (closure).
pub fn vpoly_contains(verts: &[DVector<f64>], x: &DVector<f64>) -> bool {
    let n = x.len();
    let k = verts.len();
    let mut a = DMatrix::zeros(n + 1, k);
    for j in 0..k {
        for i in 0..n {
            a[(i, j)] = verts[j][i];
        }
        a[(n, j)] = 1.0;
    }
    let mut b = DVector::zeros(n + 1);
    for i in 0..n {
        b[i] = x[i];
    }
    b[n] = 1.0;
    matches!(
        solve_standard(&DVector::zeros(k), &a, &b),
        LpOutcome::Optimal { .. }
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn square_verts() -> Vec<DVector<f64>> {
        [[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]]
            .iter()
            .map(|v| DVector::from_row_slice(v))
            .collect()
    }

    #[test]
    fn gauge_of_square_is_max_norm() {
        let v = square_verts();
        let g = vpoly_gauge(&v, &DVector::from_row_slice(&[0.5, -1.0])).unwrap();
        assert_relative_eq!(g, 1.0, epsilon = 1e-9);
        let g = vpoly_gauge(&v, &DVector::from_row_slice(&[3.0, 4.0])).unwrap();
        assert_relative_eq!(g, 4.0, epsilon = 1e-9);
    }

    #[test]
    fn ray_exit_square_diagonal() {
        let v = square_verts();
        let t = vpoly_ray_exit(
            &v,
            &DVector::from_row_slice(&[0.0, 0.0]),
            &DVector::from_row_slice(&[1.0, 1.0]),
        )
        .unwrap();
        assert_relative_eq!(t, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn membership() {
        let v = square_verts();
        assert!(vpoly_contains(&v, &DVector::from_row_slice(&[0.9, -0.9])));
        assert!(!vpoly_contains(&v, &DVector::from_row_slice(&[1.1, 0.0])));
    }

    #[test]
    fn infeasible_when_target_outside_cone() {
        // Hull of points in the right half plane cannot absorb (-1, 0).
        let v = vec![
            DVector::from_row_slice(&[1.0, 0.2]),
            DVector::from_row_slice(&[1.0, -0.2]),
            DVector::from_row_slice(&[2.0, 0.0]),
        ];
        assert_eq!(vpoly_gauge(&v, &DVector::from_row_slice(&[-1.0, 0.0])), None);
    }

    #[test]
    fn four_dim_cross_polytope_gauge_is_l1() {
        let mut v = Vec::new();
        for i in 0..4 {
            for s in [1.0, -1.0] {
                let mut e = DVector::zeros(4);
                e[i] = s;
                v.push(e);
            }
        }
        let xi = DVector::from_row_slice(&[0.3, -0.2, 0.1, 0.4]);
        let g = vpoly_gauge(&v, &xi).unwrap();
        assert_relative_eq!(g, xi.abs().sum(), epsilon = 1e-9);
    }
}
