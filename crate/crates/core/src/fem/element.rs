//! Reference elements on `[-1,1]^2`: bilinear `Q1`, biquadratic `Q2` and the
//! cell-wise biorthogonal dual of `Q1` (`Q1*`) used for the Lagrange
//! multiplier.
//!
//! `Q1*` is realized as the basis that is biorthogonal to `Q1` under the cell
//! L2 pairing, so the pairing matrix is diagonal and multiplier conditions
//! decouple per node. Because every cell in a structured mesh is an
//! axis-aligned rectangle, the biorthogonal coefficients computed on the
//! reference cell are exact on every physical cell.

use crate::scalar::Real;

/// Element family on the reference quadrilateral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementKind {
    /// Bilinear, 4 nodes (cell corners).
    Q1,
    /// Biquadratic, 9 nodes (corners, edge midpoints, center).
    Q2,
    /// Dual (biorthogonal) counterpart of `Q1`, 4 nodes.
    Q1Dual,
}

impl ElementKind {
    pub fn nodes_per_cell(self) -> usize {
        match self {
            ElementKind::Q1 | ElementKind::Q1Dual => 4,
            ElementKind::Q2 => 9,
        }
    }
}

/// Coefficients of the `Q1` biorthogonal basis in terms of `Q1` shapes:
/// `psi*_i = sum_j COEF[i][j] N_j`. This is the inverse of the reference
/// bilinear mass matrix scaled by `diag(int N_i) = I`.
const Q1_DUAL_COEF: [[f64; 4]; 4] = [
    [4.0, -2.0, 1.0, -2.0],
    [-2.0, 4.0, -2.0, 1.0],
    [1.0, -2.0, 4.0, -2.0],
    [-2.0, 1.0, -2.0, 4.0],
];

/// Reference coordinates of the `Q1`/`Q1*` nodes, counter-clockwise.
pub const Q1_NODES: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

/// Reference coordinates of the `Q2` nodes: corners, then edge midpoints
/// (bottom, right, top, left), then center.
pub const Q2_NODES: [[f64; 2]; 9] = [
    [-1.0, -1.0],
    [1.0, -1.0],
    [1.0, 1.0],
    [-1.0, 1.0],
    [0.0, -1.0],
    [1.0, 0.0],
    [0.0, 1.0],
    [-1.0, 0.0],
    [0.0, 0.0],
];

/// A reference element: shape values and reference-coordinate gradients.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceElement {
    pub kind: ElementKind,
}

impl ReferenceElement {
    pub fn new(kind: ElementKind) -> Self {
        Self { kind }
    }

    pub fn nodes_per_cell(&self) -> usize {
        self.kind.nodes_per_cell()
    }

    /// Node coordinates on the reference cell.
    pub fn node_coords<T: Real>(&self) -> Vec<[T; 2]> {
        let raw: &[[f64; 2]] = match self.kind {
            ElementKind::Q1 | ElementKind::Q1Dual => &Q1_NODES,
            ElementKind::Q2 => &Q2_NODES,
        };
        raw.iter().map(|p| [T::lit(p[0]), T::lit(p[1])]).collect()
    }

    /// Shape values and reference gradients at `point` in `[-1,1]^2`.
    ///
    /// Returns `(values, gradients)` with one entry per node; gradients are
    /// `[d/dxi, d/deta]` in reference coordinates.
    pub fn eval<T: Real>(&self, point: [T; 2]) -> (Vec<T>, Vec<[T; 2]>) {
        match self.kind {
            ElementKind::Q1 => eval_q1(point),
            ElementKind::Q2 => eval_q2(point),
            ElementKind::Q1Dual => {
                let (n, g) = eval_q1(point);
                let mut values = vec![T::zero(); 4];
                let mut grads = vec![[T::zero(); 2]; 4];
                for i in 0..4 {
                    for j in 0..4 {
                        let c = T::lit(Q1_DUAL_COEF[i][j]);
                        values[i] += c * n[j];
                        grads[i][0] += c * g[j][0];
                        grads[i][1] += c * g[j][1];
                    }
                }
                (values, grads)
            }
        }
    }
}

fn eval_q1<T: Real>(p: [T; 2]) -> (Vec<T>, Vec<[T; 2]>) {
    let one = T::one();
    let quarter = T::lit(0.25);
    let [x, y] = p;
    let values = vec![
        quarter * (one - x) * (one - y),
        quarter * (one + x) * (one - y),
        quarter * (one + x) * (one + y),
        quarter * (one - x) * (one + y),
    ];
    let grads = vec![
        [-quarter * (one - y), -quarter * (one - x)],
        [quarter * (one - y), -quarter * (one + x)],
        [quarter * (one + y), quarter * (one + x)],
        [-quarter * (one + y), quarter * (one - x)],
    ];
    (values, grads)
}

/// 1D quadratic Lagrange basis on nodes {-1, 0, 1} and its derivative.
fn lag3<T: Real>(a: i32, x: T) -> (T, T) {
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    match a {
        -1 => ((x * (x - T::one())) * half, x - half),
        0 => (T::one() - x * x, -two * x),
        1 => ((x * (x + T::one())) * half, x + half),
        _ => unreachable!(),
    }
}

fn eval_q2<T: Real>(p: [T; 2]) -> (Vec<T>, Vec<[T; 2]>) {
    let [x, y] = p;
    let mut values = Vec::with_capacity(9);
    let mut grads = Vec::with_capacity(9);
    for node in &Q2_NODES {
        let a = node[0] as i32;
        let b = node[1] as i32;
        let (lx, dlx) = lag3(a, x);
        let (ly, dly) = lag3(b, y);
        values.push(lx * ly);
        grads.push([dlx * ly, lx * dly]);
    }
    (values, grads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::quadrature::gauss_rule;
    use approx::assert_relative_eq;

    #[test]
    fn q1_center_values_are_quarter() {
        let elem = ReferenceElement::new(ElementKind::Q1);
        let (values, _) = elem.eval([0.0f64, 0.0]);
        for v in values {
            assert_relative_eq!(v, 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn q2_partition_of_unity() {
        let elem = ReferenceElement::new(ElementKind::Q2);
        for &p in &[[0.3f64, -0.7], [0.0, 0.0], [-1.0, 1.0], [0.9, 0.9]] {
            let (values, grads) = elem.eval(p);
            let sum: f64 = values.iter().sum();
            assert_relative_eq!(sum, 1.0, epsilon = 1e-14);
            let gx: f64 = grads.iter().map(|g| g[0]).sum();
            let gy: f64 = grads.iter().map(|g| g[1]).sum();
            assert_relative_eq!(gx, 0.0, epsilon = 1e-14);
            assert_relative_eq!(gy, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn q2_lagrange_delta_property() {
        let elem = ReferenceElement::new(ElementKind::Q2);
        let nodes = elem.node_coords::<f64>();
        for (j, &nj) in nodes.iter().enumerate() {
            let (values, _) = elem.eval(nj);
            for (i, &v) in values.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(v, expected, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn q1_gradients_match_finite_differences() {
        let elem = ReferenceElement::new(ElementKind::Q1);
        let p = [0.37f64, -0.21];
        let h = 1e-7;
        let (_, grads) = elem.eval(p);
        for d in 0..2 {
            let mut pp = p;
            let mut pm = p;
            pp[d] += h;
            pm[d] -= h;
            let (vp, _) = elem.eval(pp);
            let (vm, _) = elem.eval(pm);
            for i in 0..4 {
                let fd = (vp[i] - vm[i]) / (2.0 * h);
                assert_relative_eq!(grads[i][d], fd, epsilon = 1e-8);
            }
        }
    }

    /// Biorthogonality on the reference cell: the pairing matrix
    /// `(psi*_i, N_j)` must be the identity (diagonal entries `int N_i = 1`).
    #[test]
    fn q1_dual_biorthogonal_to_q1() {
        let q1 = ReferenceElement::new(ElementKind::Q1);
        let dual = ReferenceElement::new(ElementKind::Q1Dual);
        let rule = gauss_rule::<f64>(3);
        let mut pairing = [[0.0f64; 4]; 4];
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let (n, _) = q1.eval(*p);
            let (psi, _) = dual.eval(*p);
            for i in 0..4 {
                for j in 0..4 {
                    pairing[i][j] += w * psi[i] * n[j];
                }
            }
        }
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(pairing[i][j], expected, epsilon = 1e-13);
            }
        }
    }
}
