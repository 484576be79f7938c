//! Discrete inf-sup (LBB) constants by a dense generalized eigenproblem.
//!
//! `beta_h^2` is the smallest eigenvalue of `B K^{-1} B^T q = theta M_p q`
//! on the complement of the constant pressure mode, where `K` is the vector
//! H1-seminorm matrix on the boundary-constrained displacement space and
//! `B` the weighted divergence coupling `(q, g(phi) div w)`.

use crate::analysis::dense::{
    backward_solve_t, cholesky, congruence, forward_solve, householder_complement,
    jacobi_eigenvalues, DenseError,
};
use crate::fem::assembly::{CellGeometry, ElementTables};
use crate::fem::dofmap::{DofMap, ElementPairing};
use crate::fem::element::ElementKind;
use crate::fem::quadrature::gauss_rule;
use crate::fem::sparse::Triplets;
use crate::mesh::Mesh;
use crate::scalar::Real;
use crate::solver::linear::{LinearSolveError, SparseLu};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InfSupError {
    #[error(transparent)]
    Dense(#[from] DenseError),
    #[error(transparent)]
    Linear(#[from] LinearSolveError),
    #[error("generalized eigenproblem returned a significantly negative eigenvalue {0}")]
    NegativeEigenvalue(f64),
    #[error("problem too small: no interior displacement dofs")]
    NoInteriorDofs,
}

/// Result of one inf-sup computation.
#[derive(Debug, Clone)]
pub struct InfSupReport<T> {
    pub pairing: ElementPairing,
    pub h: T,
    pub beta: T,
    pub n_pressure: usize,
    pub n_free_displacement: usize,
    /// Human-readable description of the `g(phi)` coefficient.
    pub coefficient: String,
}

/// Compute the discrete inf-sup constant for the given pairing and phase
/// coefficient on a (small) mesh.
pub fn discrete_infsup<T: Real>(
    mesh: &Mesh<T>,
    pairing: ElementPairing,
    kappa: T,
    phi: &dyn Fn([T; 2]) -> T,
    coefficient_desc: &str,
) -> Result<InfSupReport<T>, InfSupError> {
    let dm = DofMap::build(mesh, pairing, false);
    let n_u = 2 * dm.n_u_scalar();
    let n_p = mesh.n_nodes();

    // Interior (free) displacement dofs: everything off the boundary.
    let mut constrained = vec![false; n_u];
    for facet in mesh.facets() {
        for s in dm.facet_u_scalars(facet) {
            constrained[dm.u_global(s, 0)] = true;
            constrained[dm.u_global(s, 1)] = true;
        }
    }
    let free: Vec<usize> = (0..n_u).filter(|&i| !constrained[i]).collect();
    if free.is_empty() {
        return Err(InfSupError::NoInteriorDofs);
    }
    let mut free_index = vec![usize::MAX; n_u];
    for (k, &i) in free.iter().enumerate() {
        free_index[i] = k;
    }
    let nf = free.len();

    let rule = gauss_rule::<T>(3);
    let u_tab = ElementTables::tabulate(pairing.u_kind(), &rule);
    let q1_tab = ElementTables::tabulate(ElementKind::Q1, &rule);
    let npc = dm.u_nodes_per_cell();

    // K (vector Laplacian on free dofs), B (n_p x nf), M_p (dense).
    let mut k_trips = Triplets::new(nf, nf);
    let mut b_trips = Triplets::new(n_p, nf);
    let mut m_p = crate::analysis::dense::zeros::<T>(n_p, n_p);
    for c in 0..mesh.n_cells() {
        let geo = CellGeometry::of(mesh, c);
        let scalars = dm.cell_u_scalars(c);
        let nodes = mesh.cells()[c].nodes;
        for (q, &w) in rule.weights.iter().enumerate() {
            let jw = w * geo.det_j;
            let x = geo.point(mesh, rule.points[q]);
            let g = crate::material::degradation(phi(x), kappa);
            for i in 0..npc {
                let gi = geo.grad(u_tab.ref_grads[q][i]);
                for comp in 0..2 {
                    let row = free_index[dm.u_global(scalars[i], comp)];
                    if row == usize::MAX {
                        continue;
                    }
                    // Vector Laplacian: gradients couple within components.
                    for j in 0..npc {
                        let gj = geo.grad(u_tab.ref_grads[q][j]);
                        let col = free_index[dm.u_global(scalars[j], comp)];
                        if col != usize::MAX {
                            k_trips.push(row, col, jw * (gi[0] * gj[0] + gi[1] * gj[1]));
                        }
                    }
                    // Divergence of the (i, comp) shape.
                    let div = gi[comp];
                    for jn in 0..4 {
                        b_trips.push(nodes[jn], row, jw * g * q1_tab.values[q][jn] * div);
                    }
                }
            }
            for iq in 0..4 {
                for jq in 0..4 {
                    m_p[nodes[iq]][nodes[jq]] +=
                        jw * q1_tab.values[q][iq] * q1_tab.values[q][jq];
                }
            }
        }
    }

    // S = B K^{-1} B^T, column by column.
    let k_mat = k_trips.to_csr();
    let b_mat = b_trips.to_csr();
    let lu = SparseLu::factor(&k_mat)?;
    let mut s = crate::analysis::dense::zeros::<T>(n_p, n_p);
    for q_col in 0..n_p {
        // B^T e_q is row q of B, scattered into a dense vector.
        let mut col = vec![T::zero(); nf];
        for (j, v) in b_mat.row(q_col) {
            col[j] = v;
        }
        let x = lu.solve(&col);
        let sx = b_mat.matvec(&x);
        for i in 0..n_p {
            s[i][q_col] = sx[i];
        }
    }
    // Symmetrize against roundoff.
    for i in 0..n_p {
        for j in (i + 1)..n_p {
            let avg = (s[i][j] + s[j][i]) * T::lit(0.5);
            s[i][j] = avg;
            s[j][i] = avg;
        }
    }

    // Generalized problem on the complement of constants: with M_p = L L^T,
    // C = L^{-1} S L^{-T}, and the constant mode maps to z = L^T 1.
    let l = cholesky(&m_p)?;
    let n = n_p;
    let mut c_mat = crate::analysis::dense::zeros::<T>(n, n);
    // C = L^{-1} S L^{-T}: solve column-wise, then row-wise.
    let mut tmp = crate::analysis::dense::zeros::<T>(n, n);
    for j in 0..n {
        let col: Vec<T> = (0..n).map(|i| s[i][j]).collect();
        let y = forward_solve(&l, &col);
        for i in 0..n {
            tmp[i][j] = y[i];
        }
    }
    for i in 0..n {
        let row: Vec<T> = (0..n).map(|j| tmp[i][j]).collect();
        let y = forward_solve(&l, &row);
        for j in 0..n {
            c_mat[i][j] = y[j];
        }
    }
    let _ = backward_solve_t::<T>; // L^{-T} applied via the row pass above

    let z: Vec<T> = {
        // z = L^T * ones.
        let ones = vec![T::one(); n];
        let mut out = vec![T::zero(); n];
        for i in 0..n {
            for j in 0..=i {
                out[j] += l[i][j] * ones[i];
            }
        }
        out
    };
    let basis = householder_complement(&z);
    let deflated = congruence(&c_mat, &basis);
    let eigs = jacobi_eigenvalues(&deflated)?;
    let scale = eigs
        .iter()
        .fold(T::zero(), |a, &b| a.max(b.abs()))
        .max(T::lit(1e-300));
    let min = eigs.iter().cloned().fold(T::infinity(), T::min);
    if min < -T::lit(1e-9) * scale {
        return Err(InfSupError::NegativeEigenvalue(min.to_f64_lossy()));
    }
    let beta = min.max(T::zero()).sqrt();
    Ok(InfSupReport {
        pairing,
        h: mesh.h(),
        beta,
        n_pressure: n_p,
        n_free_displacement: nf,
        coefficient: coefficient_desc.to_string(),
    })
}

/// Documentation-only variant: inf-sup constant of the full penalized form
/// over (the quadratic-form equivalent of) the triple norm
/// `|||w, q||| = ||w||_1 + ||q|| + (1/lambda)|q|_c`, computed as the
/// smallest singular value of the norm-scaled saddle matrix.
pub fn triple_norm_infsup<T: Real>(
    mesh: &Mesh<T>,
    pairing: ElementPairing,
    lambda: T,
    mu: T,
    kappa: T,
    phi: &dyn Fn([T; 2]) -> T,
) -> Result<T, InfSupError> {
    let dm = DofMap::build(mesh, pairing, false);
    let n_u = 2 * dm.n_u_scalar();
    let n_p = mesh.n_nodes();
    let mut constrained = vec![false; n_u];
    for facet in mesh.facets() {
        for s in dm.facet_u_scalars(facet) {
            constrained[dm.u_global(s, 0)] = true;
            constrained[dm.u_global(s, 1)] = true;
        }
    }
    let free: Vec<usize> = (0..n_u).filter(|&i| !constrained[i]).collect();
    if free.is_empty() {
        return Err(InfSupError::NoInteriorDofs);
    }
    let mut free_index = vec![usize::MAX; n_u];
    for (k, &i) in free.iter().enumerate() {
        free_index[i] = k;
    }
    let nf = free.len();
    let n = nf + n_p;

    let rule = gauss_rule::<T>(3);
    let u_tab = ElementTables::tabulate(pairing.u_kind(), &rule);
    let q1_tab = ElementTables::tabulate(ElementKind::Q1, &rule);
    let npc = dm.u_nodes_per_cell();
    let two_mu = T::lit(2.0) * mu;

    let mut a_mat = crate::analysis::dense::zeros::<T>(n, n);
    let mut n_mat = crate::analysis::dense::zeros::<T>(n, n);
    for c in 0..mesh.n_cells() {
        let geo = CellGeometry::of(mesh, c);
        let scalars = dm.cell_u_scalars(c);
        let nodes = mesh.cells()[c].nodes;
        for (q, &w) in rule.weights.iter().enumerate() {
            let jw = w * geo.det_j;
            let x = geo.point(mesh, rule.points[q]);
            let g = crate::material::degradation(phi(x), kappa);
            for i in 0..npc {
                let gi = geo.grad(u_tab.ref_grads[q][i]);
                let ni = u_tab.values[q][i];
                for ci in 0..2 {
                    let row = free_index[dm.u_global(scalars[i], ci)];
                    if row == usize::MAX {
                        continue;
                    }
                    let eps_i = shape_strain(gi, ci);
                    for j in 0..npc {
                        let gj = geo.grad(u_tab.ref_grads[q][j]);
                        let nj = u_tab.values[q][j];
                        for cj in 0..2 {
                            let col = free_index[dm.u_global(scalars[j], cj)];
                            if col == usize::MAX {
                                continue;
                            }
                            let eps_j = shape_strain(gj, cj);
                            let dd = eps_i[0] * eps_j[0]
                                + eps_i[1] * eps_j[1]
                                + T::lit(2.0) * eps_i[2] * eps_j[2];
                            a_mat[row][col] += jw * g * two_mu * dd;
                            // H1 norm: seminorm + L2 mass per component.
                            if ci == cj {
                                n_mat[row][col] += jw
                                    * (gi[0] * gj[0] + gi[1] * gj[1]
                                        + ni * nj);
                            }
                        }
                    }
                    let div = gi[ci];
                    for jn in 0..4 {
                        let b = jw * g * q1_tab.values[q][jn] * div;
                        a_mat[row][nf + nodes[jn]] += b;
                        a_mat[nf + nodes[jn]][row] += b;
                    }
                }
            }
            for iq in 0..4 {
                for jq in 0..4 {
                    let mass = jw * q1_tab.values[q][iq] * q1_tab.values[q][jq];
                    a_mat[nf + nodes[iq]][nf + nodes[jq]] -= mass * g / lambda;
                    n_mat[nf + nodes[iq]][nf + nodes[jq]] +=
                        mass * (T::one() + g / (lambda * lambda));
                }
            }
        }
    }

    let l = cholesky(&n_mat)?;
    // C = L^{-1} A L^{-T} via two solve passes.
    let mut tmp = crate::analysis::dense::zeros::<T>(n, n);
    for j in 0..n {
        let col: Vec<T> = (0..n).map(|i| a_mat[i][j]).collect();
        let y = forward_solve(&l, &col);
        for i in 0..n {
            tmp[i][j] = y[i];
        }
    }
    let mut c_mat = crate::analysis::dense::zeros::<T>(n, n);
    for i in 0..n {
        let row: Vec<T> = (0..n).map(|j| tmp[i][j]).collect();
        let y = forward_solve(&l, &row);
        for j in 0..n {
            c_mat[i][j] = y[j];
        }
    }
    let eigs = jacobi_eigenvalues(&c_mat)?;
    Ok(eigs
        .iter()
        .map(|e| e.abs())
        .fold(T::infinity(), T::min))
}

#[inline]
fn shape_strain<T: Real>(g: [T; 2], comp: usize) -> [T; 3] {
    let half = T::lit(0.5);
    if comp == 0 {
        [g[0], T::zero(), half * g[1]]
    } else {
        [T::zero(), g[1], half * g[0]]
    }
}
