//! Constitutive layer: Lamé conversion, linearized strain, degradation,
//! spectral strain split and the tensile/compressive stress composition with
//! the pressure variable.
//!
//! Units: stresses and Lamé parameters in kN/mm², energy release rate in
//! kN/mm, lengths in mm.

use crate::scalar::Real;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MaterialError {
    #[error("Poisson ratio must satisfy 0 <= nu < 0.5, got {0} (lambda blows up at 0.5)")]
    PoissonOutOfRange(f64),
    #[error("shear modulus must be positive, got {0}")]
    NonPositiveShearModulus(f64),
}

/// Full constitutive parameter set.
#[derive(Debug, Clone, Copy)]
pub struct MaterialParams<T> {
    /// First Lamé parameter, kN/mm².
    pub lambda: T,
    /// Shear modulus, kN/mm².
    pub mu: T,
    /// Poisson ratio.
    pub nu: T,
    /// Critical energy release rate, kN/mm.
    pub g_c: T,
    /// Degradation regularization; keeps the broken material barely stiff.
    pub kappa: T,
    /// Phase-field transition bandwidth, mm.
    pub epsilon: T,
}

impl<T: Real> MaterialParams<T> {
    /// Build from `(nu, mu)` with `lambda` from the standard conversion.
    pub fn from_poisson(nu: T, mu: T, g_c: T, kappa: T, epsilon: T) -> Result<Self, MaterialError> {
        let lambda = lame_from_poisson(nu, mu)?;
        Ok(Self {
            lambda,
            mu,
            nu,
            g_c,
            kappa,
            epsilon,
        })
    }

    /// Same parameters with a different Poisson ratio (`mu` held fixed).
    pub fn with_nu(&self, nu: T) -> Result<Self, MaterialError> {
        Self::from_poisson(nu, self.mu, self.g_c, self.kappa, self.epsilon)
    }
}

/// First Lamé parameter from `(nu, mu)`: `lambda = 2 nu mu / (1 - 2 nu)`.
pub fn lame_from_poisson<T: Real>(nu: T, mu: T) -> Result<T, MaterialError> {
    if !(nu >= T::zero() && nu < T::lit(0.5)) {
        return Err(MaterialError::PoissonOutOfRange(nu.to_f64_lossy()));
    }
    if mu <= T::zero() {
        return Err(MaterialError::NonPositiveShearModulus(mu.to_f64_lossy()));
    }
    let two = T::lit(2.0);
    Ok(two * nu * mu / (T::one() - two * nu))
}

/// Symmetric 2x2 strain tensor `(e_xx, e_yy, e_xy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Strain2<T> {
    pub xx: T,
    pub yy: T,
    pub xy: T,
}

impl<T: Real> Strain2<T> {
    pub fn zero() -> Self {
        Self {
            xx: T::zero(),
            yy: T::zero(),
            xy: T::zero(),
        }
    }

    pub fn trace(&self) -> T {
        self.xx + self.yy
    }

    /// Frobenius inner product `A : B` (off-diagonal counted twice).
    pub fn ddot(&self, other: &Self) -> T {
        self.xx * other.xx + self.yy * other.yy + T::lit(2.0) * self.xy * other.xy
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            xx: self.xx + other.xx,
            yy: self.yy + other.yy,
            xy: self.xy + other.xy,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            xx: self.xx - other.xx,
            yy: self.yy - other.yy,
            xy: self.xy - other.xy,
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            xx: self.xx * s,
            yy: self.yy * s,
            xy: self.xy * s,
        }
    }
}

/// Linearized strain: symmetric part of the displacement gradient.
pub fn strain<T: Real>(grad_u: [[T; 2]; 2]) -> Strain2<T> {
    Strain2 {
        xx: grad_u[0][0],
        yy: grad_u[1][1],
        xy: T::lit(0.5) * (grad_u[0][1] + grad_u[1][0]),
    }
}

/// Degradation function `g(phi) = (1 - kappa) phi^2 + kappa`.
#[inline]
pub fn degradation<T: Real>(phi: T, kappa: T) -> T {
    (T::one() - kappa) * phi * phi + kappa
}

/// Derivative `g'(phi) = 2 (1 - kappa) phi`.
#[inline]
pub fn degradation_derivative<T: Real>(phi: T, kappa: T) -> T {
    T::lit(2.0) * (T::one() - kappa) * phi
}

/// Relative gap under which the eigenvalues count as degenerate and the
/// eigenbasis is taken as the Cartesian one (the projected tensors are
/// basis-independent there).
const DEGENERATE_GAP: f64 = 1e-12;

/// Spectral decomposition of a 2x2 symmetric strain with the tensile
/// projection `E+ = P max(Lambda, 0) P^T`.
#[derive(Debug, Clone, Copy)]
pub struct SpectralSplit<T> {
    /// Eigenvalues, `lambda1 >= lambda2`.
    pub eigenvalues: [T; 2],
    /// Orthonormal eigenvectors (columns of `P`).
    pub eigenvectors: [[T; 2]; 2],
    pub tensile: Strain2<T>,
    pub compressive: Strain2<T>,
}

/// Closed-form 2x2 eigendecomposition and tensile/compressive split.
pub fn spectral_split<T: Real>(e: Strain2<T>) -> SpectralSplit<T> {
    let half = T::lit(0.5);
    let mean = (e.xx + e.yy) * half;
    let diff = (e.xx - e.yy) * half;
    let radius = (diff * diff + e.xy * e.xy).sqrt();
    let l1 = mean + radius;
    let l2 = mean - radius;

    let gap_tol = T::lit(DEGENERATE_GAP) * (l1.abs() + l2.abs() + T::lit(1e-30));
    let (v1, v2) = if l1 - l2 < gap_tol {
        // Degenerate: any orthonormal basis is an eigenbasis.
        ([T::one(), T::zero()], [T::zero(), T::one()])
    } else if diff >= T::zero() {
        let n = [diff + radius, e.xy];
        let v1 = normalize(n);
        (v1, [-v1[1], v1[0]])
    } else {
        // Pick the numerically stable column of (E - l2 I).
        let n = [e.xy, radius - diff];
        let v1 = normalize(n);
        (v1, [-v1[1], v1[0]])
    };

    let l1p = l1.max(T::zero());
    let l2p = l2.max(T::zero());
    let tensile = Strain2 {
        xx: l1p * v1[0] * v1[0] + l2p * v2[0] * v2[0],
        yy: l1p * v1[1] * v1[1] + l2p * v2[1] * v2[1],
        xy: l1p * v1[0] * v1[1] + l2p * v2[0] * v2[1],
    };
    let compressive = e.sub(&tensile);
    SpectralSplit {
        eigenvalues: [l1, l2],
        eigenvectors: [v1, v2],
        tensile,
        compressive,
    }
}

fn normalize<T: Real>(v: [T; 2]) -> [T; 2] {
    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
    [v[0] / n, v[1] / n]
}

/// Derivative of the tensile projection as a 3x3 matrix acting on strain
/// components `(e_xx, e_yy, e_xy)`.
///
/// In the eigenbasis the map is `diag(H(l1), H(l2), s)` with the secant slope
/// `s = (l1+ - l2+)/(l1 - l2)`; at the degenerate manifold and at eigenvalue
/// kinks the inactive branch (`H(0) = 0`) is used, matching the subgradient
/// convention of the residual.
pub fn tensile_projection_derivative<T: Real>(e: Strain2<T>) -> [[T; 3]; 3] {
    let split = spectral_split(e);
    let [l1, l2] = split.eigenvalues;
    let h1 = heaviside_inactive_at_zero(l1);
    let h2 = heaviside_inactive_at_zero(l2);
    let gap_tol = T::lit(DEGENERATE_GAP) * (l1.abs() + l2.abs() + T::lit(1e-30));
    let s = if l1 - l2 < gap_tol {
        h1
    } else {
        (l1.max(T::zero()) - l2.max(T::zero())) / (l1 - l2)
    };

    // Rotation of symmetric tensors into the eigenbasis, acting on
    // (e_xx, e_yy, e_xy): E' = Q^T E Q with Q = [v1 v2].
    let c = split.eigenvectors[0][0];
    let sn = split.eigenvectors[0][1];
    let two = T::lit(2.0);
    let r = [
        [c * c, sn * sn, two * c * sn],
        [sn * sn, c * c, -two * c * sn],
        [-c * sn, c * sn, c * c - sn * sn],
    ];
    // D' = diag(h1, h2, s) in the eigenbasis; transform back: R^{-1} D' R,
    // where R^{-1} is R with sn -> -sn.
    let rinv = [
        [c * c, sn * sn, -two * c * sn],
        [sn * sn, c * c, two * c * sn],
        [c * sn, -c * sn, c * c - sn * sn],
    ];
    let d = [h1, h2, s];
    let mut out = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = T::zero();
            for k in 0..3 {
                acc += rinv[i][k] * d[k] * r[k][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

/// `d max(x, 0) / dx` with the kink resolved to the inactive branch.
#[inline]
pub fn heaviside_inactive_at_zero<T: Real>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else {
        T::zero()
    }
}

/// Tensile/compressive stress pair with positive pressure part.
#[derive(Debug, Clone, Copy)]
pub struct StressState<T> {
    pub sigma_plus: Strain2<T>,
    pub sigma_minus: Strain2<T>,
    pub p_plus: T,
}

/// Stress split `sigma+ = 2 mu E+ + p+ I`, `sigma- = 2 mu (E - E+) + (p - p+) I`
/// with `p+ = max(p, 0)`.
pub fn stress_plus_minus<T: Real>(e: Strain2<T>, p: T, mu: T) -> StressState<T> {
    let split = spectral_split(e);
    let p_plus = p.max(T::zero());
    let two_mu = T::lit(2.0) * mu;
    let sigma_plus = Strain2 {
        xx: two_mu * split.tensile.xx + p_plus,
        yy: two_mu * split.tensile.yy + p_plus,
        xy: two_mu * split.tensile.xy,
    };
    let p_minus = p - p_plus;
    let sigma_minus = Strain2 {
        xx: two_mu * split.compressive.xx + p_minus,
        yy: two_mu * split.compressive.yy + p_minus,
        xy: two_mu * split.compressive.xy,
    };
    StressState {
        sigma_plus,
        sigma_minus,
        p_plus,
    }
}

/// Undegraded full stress `sigma(u) = 2 mu E + lambda tr(E) I`.
pub fn full_stress<T: Real>(e: Strain2<T>, lambda: T, mu: T) -> Strain2<T> {
    let two_mu = T::lit(2.0) * mu;
    let vol = lambda * e.trace();
    Strain2 {
        xx: two_mu * e.xx + vol,
        yy: two_mu * e.yy + vol,
        xy: two_mu * e.xy,
    }
}
