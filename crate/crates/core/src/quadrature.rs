//! Gauss-Legendre quadrature nodes on [-1, 1].

use std::sync::OnceLock;

/// Nodes and weights of the `order`-point Gauss-Legendre rule, computed by
/// Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order {
        // Tricomi initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n and P'_n by recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Cached order-16 rule (the default path-length order).
pub fn gauss_legendre_16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_two() {
        for order in [2, 4, 8, 16, 32] {
            let (_, w) = gauss_legendre(order);
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn integrates_polynomials_exactly() {
        // Order m integrates degree 2m-1 exactly: x^6 on [-1,1] -> 2/7.
        let (x, w) = gauss_legendre(4);
        let s: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(6)).sum();
        assert_relative_eq!(s, 2.0 / 7.0, epsilon = 1e-13);
    }

    #[test]
    fn integrates_smooth_function() {
        let (x, w) = gauss_legendre_16().clone();
        let s: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.cos()).sum();
        assert_relative_eq!(s, 2.0 * 1.0_f64.sin(), epsilon = 1e-14);
    }
}
