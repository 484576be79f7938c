//! Tensor-product Gauss-Legendre quadrature on the reference cell `[-1,1]^2`
//! and on the reference edge `[-1,1]`.

use crate::scalar::Real;

/// Quadrature rule: points in reference coordinates with positive weights.
#[derive(Debug, Clone)]
pub struct QuadratureRule<T> {
    /// Reference coordinates, one `(xi, eta)` pair per point.
    pub points: Vec<[T; 2]>,
    /// Weights; they sum to the reference-cell area 4.
    pub weights: Vec<T>,
}

/// 1D Gauss-Legendre nodes/weights on `[-1,1]`, orders 1..=5.
///
/// An order-`n` rule integrates polynomials of degree `2n-1` exactly.
pub fn gauss_points_1d<T: Real>(order: usize) -> (Vec<T>, Vec<T>) {
    assert!((1..=5).contains(&order), "gauss order must be in 1..=5");
    // Nodes/weights to 20 digits; see Abramowitz & Stegun, Table 25.4.
    let (xs, ws): (&[f64], &[f64]) = match order {
        1 => (&[0.0], &[2.0]),
        2 => (
            &[-0.57735026918962576451, 0.57735026918962576451],
            &[1.0, 1.0],
        ),
        3 => (
            &[-0.77459666924148337704, 0.0, 0.77459666924148337704],
            &[
                0.55555555555555555556,
                0.88888888888888888889,
                0.55555555555555555556,
            ],
        ),
        4 => (
            &[
                -0.86113631159405257522,
                -0.33998104358485626480,
                0.33998104358485626480,
                0.86113631159405257522,
            ],
            &[
                0.34785484513745385737,
                0.65214515486254614263,
                0.65214515486254614263,
                0.34785484513745385737,
            ],
        ),
        5 => (
            &[
                -0.90617984593866399280,
                -0.53846931010568309104,
                0.0,
                0.53846931010568309104,
                0.90617984593866399280,
            ],
            &[
                0.23692688505618908751,
                0.47862867049936646804,
                0.56888888888888888889,
                0.47862867049936646804,
                0.23692688505618908751,
            ],
        ),
        _ => unreachable!(),
    };
    (
        xs.iter().map(|&x| T::lit(x)).collect(),
        ws.iter().map(|&w| T::lit(w)).collect(),
    )
}

/// 1D rule on the reference edge `[-1,1]`.
pub fn gauss_rule_1d<T: Real>(order: usize) -> (Vec<T>, Vec<T>) {
    gauss_points_1d(order)
}

/// Tensor-product Gauss-Legendre rule on `[-1,1]^2`.
pub fn gauss_rule<T: Real>(order: usize) -> QuadratureRule<T> {
    let (xs, ws) = gauss_points_1d::<T>(order);
    let mut points = Vec::with_capacity(order * order);
    let mut weights = Vec::with_capacity(order * order);
    for (j, &eta) in xs.iter().enumerate() {
        for (i, &xi) in xs.iter().enumerate() {
            points.push([xi, eta]);
            weights.push(ws[i] * ws[j]);
        }
    }
    QuadratureRule { points, weights }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn integrate(order: usize, f: impl Fn(f64, f64) -> f64) -> f64 {
        let rule = gauss_rule::<f64>(order);
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| w * f(p[0], p[1]))
            .sum()
    }

    #[test]
    fn weights_sum_to_reference_area() {
        for order in 1..=5 {
            let rule = gauss_rule::<f64>(order);
            let total: f64 = rule.weights.iter().sum();
            assert_relative_eq!(total, 4.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn order2_integrates_cubics_exactly() {
        // x^3 y^3 is odd in each axis.
        assert_relative_eq!(integrate(2, |x, y| x.powi(3) * y.powi(3)), 0.0, epsilon = 1e-15);
        // ∫ x^2 dx ∫ y^2 dy = (2/3)^2 = 4/9.
        assert_relative_eq!(integrate(2, |x, y| x * x * y * y), 4.0 / 9.0, epsilon = 1e-14);
    }

    #[test]
    fn exactness_matches_rule_order() {
        // Order n integrates degree 2n-1 per axis exactly: check x^(2n-1) -> 0
        // and x^(2n-2) against the analytic value 2/(2n-1).
        for order in 1..=5usize {
            let d = 2 * order - 2;
            let analytic = 2.0 / (d as f64 + 1.0) * 2.0;
            assert_relative_eq!(
                integrate(order, |x, _| x.powi(d as i32)),
                analytic,
                max_relative = 1e-13
            );
            assert_relative_eq!(
                integrate(order, |x, _| x.powi(d as i32 + 1)),
                0.0,
                epsilon = 1e-13
            );
        }
    }

    #[test]
    #[should_panic(expected = "gauss order")]
    fn rejects_order_zero() {
        gauss_rule::<f64>(0);
    }
}
