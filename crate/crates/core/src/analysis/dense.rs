//! Small dense linear algebra for the stability analysis: Cholesky,
//! cyclic Jacobi eigenvalues and Householder deflation. Sizes stay in the
//! low hundreds (tiny meshes only).

use crate::scalar::Real;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DenseError {
    #[error("matrix not positive definite at pivot {0}")]
    NotPositiveDefinite(usize),
    #[error("Jacobi eigensolver did not converge within {0} sweeps")]
    JacobiNoConvergence(usize),
}

/// Row-major dense matrix helpers operate on `Vec<Vec<T>>`.
pub type DenseMatrix<T> = Vec<Vec<T>>;

pub fn zeros<T: Real>(n: usize, m: usize) -> DenseMatrix<T> {
    vec![vec![T::zero(); m]; n]
}

/// In-place Cholesky factorization `A = L L^T`; returns the lower factor.
pub fn cholesky<T: Real>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>, DenseError> {
    let n = a.len();
    let mut l = zeros::<T>(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= T::zero() {
                    return Err(DenseError::NotPositiveDefinite(i));
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Solve `L y = b` (forward).
pub fn forward_solve<T: Real>(l: &DenseMatrix<T>, b: &[T]) -> Vec<T> {
    let n = b.len();
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i][k] * y[k];
        }
        y[i] = sum / l[i][i];
    }
    y
}

/// Solve `L^T x = y` (backward with the lower factor).
pub fn backward_solve_t<T: Real>(l: &DenseMatrix<T>, y: &[T]) -> Vec<T> {
    let n = y.len();
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= l[k][i] * x[k];
        }
        x[i] = sum / l[i][i];
    }
    x
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues<T: Real>(a: &DenseMatrix<T>) -> Result<Vec<T>, DenseError> {
    let n = a.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut m: DenseMatrix<T> = a.clone();
    let max_sweeps = 64;
    for _sweep in 0..max_sweeps {
        let mut off = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i][j] * m[i][j];
            }
        }
        let scale = (0..n)
            .map(|i| m[i][i].abs())
            .fold(T::zero(), |a, b| a.max(b))
            + T::lit(1e-300);
        if off.sqrt() <= T::lit(1e-14) * scale * T::of_usize(n) {
            return Ok((0..n).map(|i| m[i][i]).collect());
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p][q];
                if apq == T::zero() {
                    continue;
                }
                let app = m[p][p];
                let aqq = m[q][q];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = {
                    let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                    sign / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    Err(DenseError::JacobiNoConvergence(max_sweeps))
}

/// Orthonormal basis of the complement of `z` via a Householder reflector:
/// columns `1..n` of `H = I - 2 v v^T` with `H e_1 = z / |z|`.
pub fn householder_complement<T: Real>(z: &[T]) -> DenseMatrix<T> {
    let n = z.len();
    let norm = z.iter().map(|&v| v * v).sum::<T>().sqrt();
    let mut zh: Vec<T> = z.iter().map(|&v| v / norm).collect();
    // v = (zh - e1) normalized; flip sign for stability.
    if zh[0] > T::zero() {
        for v in &mut zh {
            *v = -*v;
        }
    }
    zh[0] -= T::one();
    let vnorm = zh.iter().map(|&v| v * v).sum::<T>().sqrt();
    let v: Vec<T> = zh.iter().map(|&x| x / vnorm).collect();
    // Basis = columns 1..n of H.
    let mut basis = zeros::<T>(n, n - 1);
    for col in 1..n {
        for row in 0..n {
            let e = if row == col { T::one() } else { T::zero() };
            basis[row][col - 1] = e - T::lit(2.0) * v[row] * v[col];
        }
    }
    basis
}

/// `B^T A B` for dense `A` (n x n) and `B` (n x m).
pub fn congruence<T: Real>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> DenseMatrix<T> {
    let n = a.len();
    let m = b[0].len();
    let mut ab = zeros::<T>(n, m);
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik != T::zero() {
                for j in 0..m {
                    ab[i][j] += aik * b[k][j];
                }
            }
        }
    }
    let mut out = zeros::<T>(m, m);
    for i in 0..m {
        for k in 0..n {
            let bki = b[k][i];
            if bki != T::zero() {
                for j in 0..m {
                    out[i][j] += bki * ab[k][j];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cholesky_solves_spd_system() {
        let a = vec![
            vec![4.0, 2.0, 0.4],
            vec![2.0, 5.0, 1.0],
            vec![0.4, 1.0, 3.0],
        ];
        let l = cholesky(&a).unwrap();
        let b = vec![1.0, -2.0, 0.5];
        let x = backward_solve_t(&l, &forward_solve(&l, &b));
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[i][j] * x[j]).sum();
            assert_relative_eq!(r, b[i], epsilon = 1e-12);
        }
        assert!(cholesky(&vec![vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
    }

    #[test]
    fn jacobi_finds_known_spectrum() {
        // Eigenvalues of [[2,1],[1,2]] are 1 and 3.
        let mut eig = jacobi_eigenvalues(&vec![vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(eig[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(eig[1], 3.0, epsilon = 1e-12);

        // Trace/determinant consistency on a random-ish symmetric matrix.
        let a = vec![
            vec![3.0, -1.0, 0.5, 0.0],
            vec![-1.0, 2.0, 0.7, 0.2],
            vec![0.5, 0.7, 4.0, -0.3],
            vec![0.0, 0.2, -0.3, 1.0],
        ];
        let eig = jacobi_eigenvalues(&a).unwrap();
        let trace: f64 = eig.iter().sum();
        assert_relative_eq!(trace, 10.0, epsilon = 1e-10);
    }

    #[test]
    fn householder_basis_is_orthonormal_complement() {
        let z = vec![0.3, -0.8, 0.5, 0.1];
        let basis = householder_complement(&z);
        let n = z.len();
        for c1 in 0..n - 1 {
            // Orthogonal to z.
            let dot: f64 = (0..n).map(|r| basis[r][c1] * z[r]).sum();
            assert_relative_eq!(dot, 0.0, epsilon = 1e-12);
            for c2 in 0..n - 1 {
                let dot: f64 = (0..n).map(|r| basis[r][c1] * basis[r][c2]).sum();
                let expect = if c1 == c2 { 1.0 } else { 0.0 };
                assert_relative_eq!(dot, expect, epsilon = 1e-12);
            }
        }
    }
}
