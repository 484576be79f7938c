//! Field norms, error norms against analytic solutions, and boundary
//! integration over tagged facets.

use crate::fem::assembly::{CellGeometry, ElementTables};
use crate::fem::dofmap::{DofMap, Field};
use crate::fem::element::ElementKind;
use crate::fem::quadrature::{gauss_rule, gauss_rule_1d};
use crate::mesh::{BoundaryTag, Facet, Mesh};
use crate::scalar::Real;
use thiserror::Error;

#[derive(Debug, Error)]
#[error("mesh carries no facet with tag {0:?}")]
pub struct UnknownTag(pub BoundaryTag);

/// L2 norm of a solution field taken from the full coefficient vector.
pub fn l2_norm<T: Real>(mesh: &Mesh<T>, dm: &DofMap, field: Field, state: &[T]) -> T {
    match field {
        Field::U => {
            let u = &state[dm.block(Field::U)];
            integrate_u(mesh, dm, u, |val, _| val[0] * val[0] + val[1] * val[1]).sqrt()
        }
        _ => {
            let block = &state[dm.block(field)];
            integrate_scalar(mesh, block, |v, _| v * v).sqrt()
        }
    }
}

/// H1 seminorm (L2 norm of the gradient) of a solution field.
pub fn h1_seminorm<T: Real>(mesh: &Mesh<T>, dm: &DofMap, field: Field, state: &[T]) -> T {
    match field {
        Field::U => {
            let u = &state[dm.block(Field::U)];
            integrate_u(mesh, dm, u, |_, grad| {
                grad[0][0] * grad[0][0]
                    + grad[0][1] * grad[0][1]
                    + grad[1][0] * grad[1][0]
                    + grad[1][1] * grad[1][1]
            })
            .sqrt()
        }
        _ => {
            let block = &state[dm.block(field)];
            integrate_scalar_grad(mesh, block).sqrt()
        }
    }
}

fn integrate_scalar<T: Real>(mesh: &Mesh<T>, nodal: &[T], f: impl Fn(T, [T; 2]) -> T) -> T {
    let rule = gauss_rule::<T>(3);
    let tables = ElementTables::tabulate(ElementKind::Q1, &rule);
    let mut acc = T::zero();
    for c in 0..mesh.n_cells() {
        let geo = CellGeometry::of(mesh, c);
        let nodes = mesh.cells()[c].nodes;
        for (q, &w) in rule.weights.iter().enumerate() {
            let mut v = T::zero();
            for i in 0..4 {
                v += tables.values[q][i] * nodal[nodes[i]];
            }
            let x = geo.point(mesh, rule.points[q]);
            acc += w * geo.det_j * f(v, x);
        }
    }
    acc
}

fn integrate_scalar_grad<T: Real>(mesh: &Mesh<T>, nodal: &[T]) -> T {
    let rule = gauss_rule::<T>(3);
    let tables = ElementTables::tabulate(ElementKind::Q1, &rule);
    let mut acc = T::zero();
    for c in 0..mesh.n_cells() {
        let geo = CellGeometry::of(mesh, c);
        let nodes = mesh.cells()[c].nodes;
        for (q, &w) in rule.weights.iter().enumerate() {
            let mut g = [T::zero(); 2];
            for i in 0..4 {
                let pg = geo.grad(tables.ref_grads[q][i]);
                g[0] += pg[0] * nodal[nodes[i]];
                g[1] += pg[1] * nodal[nodes[i]];
            }
            acc += w * geo.det_j * (g[0] * g[0] + g[1] * g[1]);
        }
    }
    acc
}

fn integrate_u<T: Real>(
    mesh: &Mesh<T>,
    dm: &DofMap,
    u: &[T],
    f: impl Fn([T; 2], [[T; 2]; 2]) -> T,
) -> T {
    let rule = gauss_rule::<T>(3);
    let tables = ElementTables::tabulate(dm.pairing().u_kind(), &rule);
    let mut acc = T::zero();
    for c in 0..mesh.n_cells() {
        let geo = CellGeometry::of(mesh, c);
        let scalars = dm.cell_u_scalars(c);
        for (q, &w) in rule.weights.iter().enumerate() {
            let mut val = [T::zero(); 2];
            let mut grad = [[T::zero(); 2]; 2];
            for (i, &s) in scalars.iter().enumerate() {
                let n = tables.values[q][i];
                let g = geo.grad(tables.ref_grads[q][i]);
                for comp in 0..2 {
                    let coeff = u[2 * s + comp];
                    val[comp] += n * coeff;
                    grad[comp][0] += g[0] * coeff;
                    grad[comp][1] += g[1] * coeff;
                }
            }
            acc += w * geo.det_j * f(val, grad);
        }
    }
    acc
}

/// L2 error of the displacement field against an analytic solution,
/// integrated with a high-order rule.
pub fn l2_error_u<T: Real>(
    mesh: &Mesh<T>,
    dm: &DofMap,
    u: &[T],
    exact: impl Fn([T; 2]) -> [T; 2],
) -> T {
    let rule = gauss_rule::<T>(5);
    let tables = ElementTables::tabulate(dm.pairing().u_kind(), &rule);
    let mut acc = T::zero();
    for c in 0..mesh.n_cells() {
        let geo = CellGeometry::of(mesh, c);
        let scalars = dm.cell_u_scalars(c);
        for (q, &w) in rule.weights.iter().enumerate() {
            let mut val = [T::zero(); 2];
            for (i, &s) in scalars.iter().enumerate() {
                let n = tables.values[q][i];
                val[0] += n * u[2 * s];
                val[1] += n * u[2 * s + 1];
            }
            let x = geo.point(mesh, rule.points[q]);
            let ex = exact(x);
            let dx = val[0] - ex[0];
            let dy = val[1] - ex[1];
            acc += w * geo.det_j * (dx * dx + dy * dy);
        }
    }
    acc.sqrt()
}

/// H1-seminorm error of the displacement field against an analytic gradient
/// (`exact_grad(x)[i][j] = d u_i / d x_j`).
pub fn h1_error_u<T: Real>(
    mesh: &Mesh<T>,
    dm: &DofMap,
    u: &[T],
    exact_grad: impl Fn([T; 2]) -> [[T; 2]; 2],
) -> T {
    let rule = gauss_rule::<T>(5);
    let tables = ElementTables::tabulate(dm.pairing().u_kind(), &rule);
    let mut acc = T::zero();
    for c in 0..mesh.n_cells() {
        let geo = CellGeometry::of(mesh, c);
        let scalars = dm.cell_u_scalars(c);
        for (q, &w) in rule.weights.iter().enumerate() {
            let mut grad = [[T::zero(); 2]; 2];
            for (i, &s) in scalars.iter().enumerate() {
                let g = geo.grad(tables.ref_grads[q][i]);
                for comp in 0..2 {
                    let coeff = u[2 * s + comp];
                    grad[comp][0] += g[0] * coeff;
                    grad[comp][1] += g[1] * coeff;
                }
            }
            let x = geo.point(mesh, rule.points[q]);
            let eg = exact_grad(x);
            let mut err = T::zero();
            for i in 0..2 {
                for j in 0..2 {
                    let d = grad[i][j] - eg[i][j];
                    err += d * d;
                }
            }
            acc += w * geo.det_j * err;
        }
    }
    acc.sqrt()
}

/// A quadrature point on a boundary facet.
#[derive(Debug, Clone, Copy)]
pub struct FacetPoint<T> {
    /// Physical coordinates.
    pub x: [T; 2],
    /// Outward unit normal of the owning cell.
    pub normal: [T; 2],
    /// Reference coordinates within the owning cell.
    pub cell_ref: [T; 2],
    /// Arc-length weight (1D Gauss weight times half the facet length).
    pub ds: T,
}

/// Integrate a vector-valued integrand over all facets with the given tag
/// using a 1D Gauss rule per facet. The integrand receives the owning facet
/// and a [`FacetPoint`] and returns the integrand value.
pub fn boundary_integral<T: Real>(
    mesh: &Mesh<T>,
    tag: BoundaryTag,
    order: usize,
    mut integrand: impl FnMut(&Facet, FacetPoint<T>) -> [T; 2],
) -> Result<[T; 2], UnknownTag> {
    if !mesh.has_tag(tag) {
        return Err(UnknownTag(tag));
    }
    let (points, weights) = gauss_rule_1d::<T>(order);
    let half = T::lit(0.5);
    let mut acc = [T::zero(); 2];
    for facet in mesh.facets_with_tag(tag) {
        let a = mesh.node(facet.nodes[0]);
        let b = mesh.node(facet.nodes[1]);
        let dx = b[0] - a[0];
        let dy = b[1] - a[1];
        let len = (dx * dx + dy * dy).sqrt();
        // Outward normal for counter-clockwise cells.
        let normal = [dy / len, -dx / len];
        // Reference segment endpoints on the owning cell.
        let e = facet.local_edge as usize;
        let r0 = ref_corner::<T>(e);
        let r1 = ref_corner::<T>((e + 1) % 4);
        for (q, &s) in points.iter().enumerate() {
            let lam = (s + T::one()) * half;
            let cell_ref = [
                r0[0] + (r1[0] - r0[0]) * lam,
                r0[1] + (r1[1] - r0[1]) * lam,
            ];
            let x = [a[0] + dx * lam, a[1] + dy * lam];
            let ds = weights[q] * len * half;
            let v = integrand(
                facet,
                FacetPoint {
                    x,
                    normal,
                    cell_ref,
                    ds,
                },
            );
            acc[0] += v[0] * ds;
            acc[1] += v[1] * ds;
        }
    }
    Ok(acc)
}

fn ref_corner<T: Real>(local: usize) -> [T; 2] {
    let c = crate::fem::element::Q1_NODES[local];
    [T::lit(c[0]), T::lit(c[1])]
}
