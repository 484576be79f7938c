//! Manufactured solutions on the unit square with analytic gradients and
//! the matching body force of the primal operator
//! `-mu Lap(u) - (mu + lambda) grad(div u) = f` (intact material, `g = 1`).

use crate::scalar::Real;

/// A manufactured displacement field: value, gradient, divergence and the
/// body force for given Lamé parameters.
#[derive(Clone, Copy)]
pub enum Manufactured {
    /// `u = (sin(pi x) sin(pi y), x(1-x) y(1-y))`; nonzero divergence, so
    /// the body force carries a `lambda` term.
    Sinusoidal,
    /// Divergence-free curl of the potential `x^2 (1-x)^2 y^2 (1-y)^2`;
    /// `lambda` drops out of the body force entirely, which makes the
    /// incompressible limit well posed for the locking study.
    DivergenceFree,
}

impl Manufactured {
    pub fn value<T: Real>(&self, p: [T; 2]) -> [T; 2] {
        let [x, y] = p;
        match self {
            Manufactured::Sinusoidal => {
                let pi = T::lit(std::f64::consts::PI);
                [
                    (pi * x).sin() * (pi * y).sin(),
                    x * (T::one() - x) * y * (T::one() - y),
                ]
            }
            Manufactured::DivergenceFree => [pq(x) * dq(y), -dq(x) * pq(y)],
        }
    }

    /// `grad[i][j] = d u_i / d x_j`.
    pub fn gradient<T: Real>(&self, p: [T; 2]) -> [[T; 2]; 2] {
        let [x, y] = p;
        match self {
            Manufactured::Sinusoidal => {
                let pi = T::lit(std::f64::consts::PI);
                [
                    [
                        pi * (pi * x).cos() * (pi * y).sin(),
                        pi * (pi * x).sin() * (pi * y).cos(),
                    ],
                    [
                        (T::one() - T::lit(2.0) * x) * y * (T::one() - y),
                        x * (T::one() - x) * (T::one() - T::lit(2.0) * y),
                    ],
                ]
            }
            Manufactured::DivergenceFree => [
                [dq(x) * dq(y), pq(x) * ddq(y)],
                [-ddq(x) * pq(y), -dq(x) * dq(y)],
            ],
        }
    }

    pub fn divergence<T: Real>(&self, p: [T; 2]) -> T {
        let g = self.gradient(p);
        g[0][0] + g[1][1]
    }

    /// Body force of the primal operator with `g = 1`.
    pub fn body_force<T: Real>(&self, p: [T; 2], lambda: T, mu: T) -> [T; 2] {
        let [x, y] = p;
        match self {
            Manufactured::Sinusoidal => {
                let pi = T::lit(std::f64::consts::PI);
                let pi2 = pi * pi;
                let sx = (pi * x).sin();
                let sy = (pi * y).sin();
                let cx = (pi * x).cos();
                let cy = (pi * y).cos();
                let two = T::lit(2.0);
                // Laplacians.
                let lap1 = -two * pi2 * sx * sy;
                let lap2 = -two * (y * (T::one() - y) + x * (T::one() - x));
                // Gradient of the divergence.
                let ddiv_x = -pi2 * sx * sy + (T::one() - two * x) * (T::one() - two * y);
                let ddiv_y = pi2 * cx * cy - two * x * (T::one() - x);
                [
                    -mu * lap1 - (mu + lambda) * ddiv_x,
                    -mu * lap2 - (mu + lambda) * ddiv_y,
                ]
            }
            Manufactured::DivergenceFree => {
                // f = -mu Lap(u); the grad(div) term vanishes identically.
                let lap1 = ddq(x) * dq(y) + pq(x) * dddq(y);
                let lap2 = -(dddq(x) * pq(y) + dq(x) * ddq(y));
                [-mu * lap1, -mu * lap2]
            }
        }
    }
}

// Quartic bubble q(t) = t^2 (1-t)^2 and derivatives.
fn pq<T: Real>(t: T) -> T {
    let one = T::one();
    t * t * (one - t) * (one - t)
}
fn dq<T: Real>(t: T) -> T {
    let two = T::lit(2.0);
    let six = T::lit(6.0);
    let four = T::lit(4.0);
    two * t - six * t * t + four * t * t * t
}
fn ddq<T: Real>(t: T) -> T {
    T::lit(2.0) - T::lit(12.0) * t + T::lit(12.0) * t * t
}
fn dddq<T: Real>(t: T) -> T {
    T::lit(24.0) * t - T::lit(12.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Finite-difference oracle validating the hand-derived gradients and
    /// body forces.
    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let h = 1e-6;
        let (lambda, mu) = (3.7, 1.3);
        for m in [Manufactured::Sinusoidal, Manufactured::DivergenceFree] {
            for &p in &[[0.21, 0.37], [0.5, 0.5], [0.83, 0.11]] {
                let g = m.gradient(p);
                for j in 0..2 {
                    let mut pp = p;
                    let mut pm = p;
                    pp[j] += h;
                    pm[j] -= h;
                    let vp = m.value(pp);
                    let vm = m.value(pm);
                    for i in 0..2 {
                        let fd = (vp[i] - vm[i]) / (2.0 * h);
                        assert_relative_eq!(g[i][j], fd, epsilon = 1e-8, max_relative = 1e-6);
                    }
                }
                // Body force via second differences of the stress operator:
                // f = -mu Lap u - (mu + lambda) grad div u.
                let f = m.body_force(p, lambda, mu);
                let lap = |i: usize| -> f64 {
                    let mut acc = 0.0;
                    for j in 0..2 {
                        let mut pp = p;
                        let mut pm = p;
                        pp[j] += h;
                        pm[j] -= h;
                        acc += (m.value(pp)[i] - 2.0 * m.value(p)[i] + m.value(pm)[i]) / (h * h);
                    }
                    acc
                };
                let ddiv = |j: usize| -> f64 {
                    let mut pp = p;
                    let mut pm = p;
                    pp[j] += h;
                    pm[j] -= h;
                    (m.divergence(pp) - m.divergence(pm)) / (2.0 * h)
                };
                for i in 0..2 {
                    let fd = -mu * lap(i) - (mu + lambda) * ddiv(i);
                    assert_relative_eq!(f[i], fd, epsilon = 1e-3, max_relative = 1e-3);
                }
            }
        }
    }

    #[test]
    fn divergence_free_field_has_zero_divergence_and_boundary_trace() {
        let m = Manufactured::DivergenceFree;
        for &p in &[[0.2, 0.9], [0.31, 0.42], [0.77, 0.13]] {
            assert_relative_eq!(m.divergence(p), 0.0, epsilon = 1e-14);
        }
        for &p in &[[0.0, 0.5], [1.0, 0.3], [0.4, 0.0], [0.6, 1.0]] {
            let v = m.value(p);
            assert_relative_eq!(v[0], 0.0, epsilon = 1e-15);
            assert_relative_eq!(v[1], 0.0, epsilon = 1e-15);
        }
    }
}
