//! Decoupled elasticity solvers with the phase field as a fixed coefficient:
//! the primal equation and the saddle-point system with penalty.

use crate::fem::assembly::{
    apply_dirichlet_increment, CellGeometry, ConstraintSet, ElementTables,
};
use crate::fem::dofmap::{DofMap, ElementPairing};
use crate::fem::quadrature::gauss_rule;
use crate::fem::sparse::Triplets;
use crate::mesh::Mesh;
use crate::scalar::Real;
use crate::solver::linear::{LinearSolveError, SparseLu};

/// Displacement solution of the primal equation
/// `2 mu (g E(u), E(w)) + lambda (g div u, div w) = (f, w)`
/// with Dirichlet data on the whole boundary.
#[allow(clippy::too_many_arguments)]
pub fn solve_decoupled_primal<T: Real>(
    mesh: &Mesh<T>,
    lambda: T,
    mu: T,
    kappa: T,
    pairing: ElementPairing,
    phi: &dyn Fn([T; 2]) -> T,
    body_force: &dyn Fn([T; 2]) -> [T; 2],
    boundary_value: &dyn Fn([T; 2]) -> [T; 2],
) -> Result<Vec<T>, LinearSolveError> {
    let dm = DofMap::build(mesh, pairing, false);
    let nu_dofs = 2 * dm.n_u_scalar();
    let rule = gauss_rule::<T>(4);
    let tables = ElementTables::tabulate(pairing.u_kind(), &rule);
    let npc = dm.u_nodes_per_cell();

    let mut trips = Triplets::with_capacity(nu_dofs, nu_dofs, mesh.n_cells() * 4 * npc * npc);
    let mut rhs = vec![T::zero(); nu_dofs];
    let two_mu = T::lit(2.0) * mu;
    for c in 0..mesh.n_cells() {
        let geo = CellGeometry::of(mesh, c);
        let scalars = dm.cell_u_scalars(c);
        for (q, &w) in rule.weights.iter().enumerate() {
            let jw = w * geo.det_j;
            let x = geo.point(mesh, rule.points[q]);
            let g = crate::material::degradation(phi(x), kappa);
            let f = body_force(x);
            // Shape strains per (node, component).
            let mut eps = vec![[T::zero(); 3]; 2 * npc];
            let mut tr = vec![T::zero(); 2 * npc];
            for i in 0..npc {
                let gr = geo.grad(tables.ref_grads[q][i]);
                eps[2 * i] = [gr[0], T::zero(), T::lit(0.5) * gr[1]];
                eps[2 * i + 1] = [T::zero(), gr[1], T::lit(0.5) * gr[0]];
                tr[2 * i] = gr[0];
                tr[2 * i + 1] = gr[1];
                for comp in 0..2 {
                    rhs[dm.u_global(scalars[i], comp)] += jw * tables.values[q][i] * f[comp];
                }
            }
            for it in 0..2 * npc {
                let gi = dm.u_global(scalars[it / 2], it % 2);
                for jt in 0..2 * npc {
                    let gj = dm.u_global(scalars[jt / 2], jt % 2);
                    let dd = eps[it][0] * eps[jt][0]
                        + eps[it][1] * eps[jt][1]
                        + T::lit(2.0) * eps[it][2] * eps[jt][2];
                    trips.push(gi, gj, jw * g * (two_mu * dd + lambda * tr[it] * tr[jt]));
                }
            }
        }
    }
    let mut matrix = trips.to_csr();

    let constraints = boundary_u_constraints(mesh, &dm, boundary_value);
    let zero_state = vec![T::zero(); nu_dofs];
    apply_dirichlet_increment(&mut matrix, &mut rhs, &constraints, &zero_state);
    let lu = SparseLu::factor(&matrix)?;
    Ok(lu.solve(&rhs))
}

/// Mixed solution `(u, p)` of the saddle-point system with penalty
/// `2 mu a(u,w) + b(w,p) = (f,w)`, `b(u,q) - (1/lambda) c(p,q) = 0`,
/// all forms weighted by `g(phi)`.
///
/// Returns the interleaved displacement block followed by nodal pressures.
#[allow(clippy::too_many_arguments)]
pub fn solve_decoupled_mixed<T: Real>(
    mesh: &Mesh<T>,
    lambda: T,
    mu: T,
    kappa: T,
    pairing: ElementPairing,
    phi: &dyn Fn([T; 2]) -> T,
    body_force: &dyn Fn([T; 2]) -> [T; 2],
    boundary_value: &dyn Fn([T; 2]) -> [T; 2],
) -> Result<(Vec<T>, Vec<T>), LinearSolveError> {
    let dm = DofMap::build(mesh, pairing, false);
    let nu_dofs = 2 * dm.n_u_scalar();
    let n = nu_dofs + mesh.n_nodes();
    let p_of = |node: usize| nu_dofs + node;
    let rule = gauss_rule::<T>(4);
    let tables = ElementTables::tabulate(pairing.u_kind(), &rule);
    let q1 = ElementTables::tabulate(crate::fem::element::ElementKind::Q1, &rule);
    let npc = dm.u_nodes_per_cell();

    let mut trips = Triplets::with_capacity(n, n, mesh.n_cells() * 4 * (npc + 2) * (npc + 2));
    let mut rhs = vec![T::zero(); n];
    let two_mu = T::lit(2.0) * mu;
    for c in 0..mesh.n_cells() {
        let geo = CellGeometry::of(mesh, c);
        let scalars = dm.cell_u_scalars(c);
        let nodes = mesh.cells()[c].nodes;
        for (q, &w) in rule.weights.iter().enumerate() {
            let jw = w * geo.det_j;
            let x = geo.point(mesh, rule.points[q]);
            let g = crate::material::degradation(phi(x), kappa);
            let f = body_force(x);
            let mut eps = vec![[T::zero(); 3]; 2 * npc];
            let mut tr = vec![T::zero(); 2 * npc];
            for i in 0..npc {
                let gr = geo.grad(tables.ref_grads[q][i]);
                eps[2 * i] = [gr[0], T::zero(), T::lit(0.5) * gr[1]];
                eps[2 * i + 1] = [T::zero(), gr[1], T::lit(0.5) * gr[0]];
                tr[2 * i] = gr[0];
                tr[2 * i + 1] = gr[1];
                for comp in 0..2 {
                    rhs[dm.u_global(scalars[i], comp)] += jw * tables.values[q][i] * f[comp];
                }
            }
            for it in 0..2 * npc {
                let gi = dm.u_global(scalars[it / 2], it % 2);
                for jt in 0..2 * npc {
                    let gj = dm.u_global(scalars[jt / 2], jt % 2);
                    let dd = eps[it][0] * eps[jt][0]
                        + eps[it][1] * eps[jt][1]
                        + T::lit(2.0) * eps[it][2] * eps[jt][2];
                    trips.push(gi, gj, jw * g * two_mu * dd);
                }
                // b(w, p) and b(u, q).
                for jn in 0..4 {
                    let nj = q1.values[q][jn];
                    trips.push(gi, p_of(nodes[jn]), jw * g * tr[it] * nj);
                    trips.push(p_of(nodes[jn]), gi, jw * g * tr[it] * nj);
                }
            }
            // -(1/lambda) c(p, q).
            for iq in 0..4 {
                for jq in 0..4 {
                    trips.push(
                        p_of(nodes[iq]),
                        p_of(nodes[jq]),
                        -jw * g / lambda * q1.values[q][iq] * q1.values[q][jq],
                    );
                }
            }
        }
    }
    let mut matrix = trips.to_csr();
    let constraints = boundary_u_constraints(mesh, &dm, boundary_value);
    let zero_state = vec![T::zero(); n];
    apply_dirichlet_increment(&mut matrix, &mut rhs, &constraints, &zero_state);
    let lu = SparseLu::factor(&matrix)?;
    let solution = lu.solve(&rhs);
    let (u, p) = solution.split_at(nu_dofs);
    Ok((u.to_vec(), p.to_vec()))
}

/// Dirichlet data on every boundary displacement dof.
fn boundary_u_constraints<T: Real>(
    mesh: &Mesh<T>,
    dm: &DofMap,
    value: &dyn Fn([T; 2]) -> [T; 2],
) -> ConstraintSet<T> {
    let coords = dm.u_scalar_coords(mesh);
    let mut entries = Vec::new();
    for facet in mesh.facets() {
        for s in dm.facet_u_scalars(facet) {
            let v = value(coords[s]);
            entries.push((dm.u_global(s, 0), v[0]));
            entries.push((dm.u_global(s, 1), v[1]));
        }
    }
    ConstraintSet::new(entries)
}

/// Weighted pressure projection residual `||M_g p - lambda B_g u||_2` of a
/// mixed solution (the discrete identity `p = lambda P_g(div u)`).
pub fn pressure_projection_residual<T: Real>(
    mesh: &Mesh<T>,
    pairing: ElementPairing,
    kappa: T,
    phi: &dyn Fn([T; 2]) -> T,
    lambda: T,
    u: &[T],
    p: &[T],
) -> T {
    let dm = DofMap::build(mesh, pairing, false);
    let rule = gauss_rule::<T>(4);
    let tables = ElementTables::tabulate(pairing.u_kind(), &rule);
    let q1 = ElementTables::tabulate(crate::fem::element::ElementKind::Q1, &rule);
    let mut residual = vec![T::zero(); mesh.n_nodes()];
    for c in 0..mesh.n_cells() {
        let geo = CellGeometry::of(mesh, c);
        let scalars = dm.cell_u_scalars(c);
        let nodes = mesh.cells()[c].nodes;
        for (q, &w) in rule.weights.iter().enumerate() {
            let jw = w * geo.det_j;
            let x = geo.point(mesh, rule.points[q]);
            let g = crate::material::degradation(phi(x), kappa);
            let mut div = T::zero();
            for (i, &s) in scalars.iter().enumerate() {
                let gr = geo.grad(tables.ref_grads[q][i]);
                div += gr[0] * u[2 * s] + gr[1] * u[2 * s + 1];
            }
            let mut p_val = T::zero();
            for i in 0..4 {
                p_val += q1.values[q][i] * p[nodes[i]];
            }
            for i in 0..4 {
                residual[nodes[i]] += jw * g * (p_val - lambda * div) * q1.values[q][i];
            }
        }
    }
    crate::fem::sparse::norm2(&residual)
}
