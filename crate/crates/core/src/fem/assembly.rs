//! Cell-local evaluation tables, global sparsity patterns, scatter-add
//! assembly and Dirichlet handling.
//!
//! Cells are axis-aligned rectangles, so the reference-to-physical Jacobian
//! is diagonal and constant per cell.

use crate::fem::dofmap::{DofMap, Field};
use crate::fem::element::{ElementKind, ReferenceElement};
use crate::fem::quadrature::QuadratureRule;
use crate::fem::sparse::CsrMatrix;
use crate::mesh::Mesh;
use crate::scalar::Real;

/// Shape values and reference gradients of one element family, tabulated at
/// the points of a quadrature rule.
#[derive(Debug, Clone)]
pub struct ElementTables<T> {
    pub kind: ElementKind,
    /// `values[q][i]`: shape `i` at quadrature point `q`.
    pub values: Vec<Vec<T>>,
    /// `ref_grads[q][i]`: reference gradient of shape `i` at point `q`.
    pub ref_grads: Vec<Vec<[T; 2]>>,
}

impl<T: Real> ElementTables<T> {
    pub fn tabulate(kind: ElementKind, rule: &QuadratureRule<T>) -> Self {
        let elem = ReferenceElement::new(kind);
        let mut values = Vec::with_capacity(rule.points.len());
        let mut ref_grads = Vec::with_capacity(rule.points.len());
        for &p in &rule.points {
            let (v, g) = elem.eval(p);
            values.push(v);
            ref_grads.push(g);
        }
        Self {
            kind,
            values,
            ref_grads,
        }
    }
}

/// Constant per-cell geometry of the bilinear map on a rectangle.
#[derive(Debug, Clone, Copy)]
pub struct CellGeometry<T> {
    pub cell: usize,
    /// Jacobian determinant (`dx*dy/4`).
    pub det_j: T,
    /// `d(xi)/dx = 2/dx` and `d(eta)/dy = 2/dy`.
    pub inv_jx: T,
    pub inv_jy: T,
}

impl<T: Real> CellGeometry<T> {
    pub fn of(mesh: &Mesh<T>, cell: usize) -> Self {
        let (dx, dy) = mesh.cell_extents(cell);
        let det_j = dx * dy * T::lit(0.25);
        assert!(
            det_j > T::zero(),
            "singular cell Jacobian in cell {cell} (degenerate or inverted cell)"
        );
        Self {
            cell,
            det_j,
            inv_jx: T::lit(2.0) / dx,
            inv_jy: T::lit(2.0) / dy,
        }
    }

    /// Physical gradient from a reference gradient.
    #[inline]
    pub fn grad(&self, g: [T; 2]) -> [T; 2] {
        [g[0] * self.inv_jx, g[1] * self.inv_jy]
    }

    /// Physical coordinates of a reference point within the cell.
    pub fn point(&self, mesh: &Mesh<T>, r: [T; 2]) -> [T; 2] {
        let cell = &mesh.cells()[self.cell];
        let a = mesh.node(cell.nodes[0]);
        let c = mesh.node(cell.nodes[2]);
        let half = T::lit(0.5);
        [
            a[0] + (r[0] + T::one()) * half * (c[0] - a[0]),
            a[1] + (r[1] + T::one()) * half * (c[1] - a[1]),
        ]
    }
}

/// All global dofs coupled within one cell, used to build sparsity patterns
/// and to scatter dense cell blocks.
pub fn cell_global_dofs(dm: &DofMap, mesh_cell_nodes: &[usize; 4], cell: usize) -> Vec<usize> {
    let mut dofs = Vec::with_capacity(2 * dm.u_nodes_per_cell() + 12);
    for &s in dm.cell_u_scalars(cell) {
        dofs.push(dm.u_global(s, 0));
        dofs.push(dm.u_global(s, 1));
    }
    if !dm.block(Field::P).is_empty() {
        for &n in mesh_cell_nodes {
            dofs.push(dm.scalar_global(Field::P, n));
        }
    }
    for &n in mesh_cell_nodes {
        dofs.push(dm.scalar_global(Field::Phi, n));
    }
    if !dm.block(Field::Tau).is_empty() {
        for &n in mesh_cell_nodes {
            dofs.push(dm.scalar_global(Field::Tau, n));
        }
    }
    dofs
}

/// Union sparsity pattern of all-to-all couplings within each cell plus a
/// full diagonal (constraint and multiplier rows stay structurally present).
pub fn build_pattern<T: Real>(mesh: &Mesh<T>, dm: &DofMap) -> CsrMatrix<T> {
    let n = dm.n_total();
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (c, cell) in mesh.cells().iter().enumerate() {
        let dofs = cell_global_dofs(dm, &cell.nodes, c);
        for &i in &dofs {
            rows[i].extend_from_slice(&dofs);
        }
    }
    for (i, row) in rows.iter_mut().enumerate() {
        row.push(i);
        row.sort_unstable();
        row.dedup();
    }
    CsrMatrix::from_pattern(n, n, &rows)
}

/// Scatter a dense cell block into the global matrix.
pub fn scatter_block<T: Real>(
    matrix: &mut CsrMatrix<T>,
    dofs: &[usize],
    block: &[T], // row-major dofs.len() x dofs.len()
) {
    let k = dofs.len();
    debug_assert_eq!(block.len(), k * k);
    for (r, &gi) in dofs.iter().enumerate() {
        for (c, &gj) in dofs.iter().enumerate() {
            let v = block[r * k + c];
            if v != T::zero() {
                matrix.add_at(gi, gj, v);
            }
        }
    }
}

/// Assemble a matrix from a per-cell dense kernel. The kernel receives the
/// cell geometry and must return `(global_dofs, dense_block)`.
pub fn assemble_matrix<T: Real, K>(mesh: &Mesh<T>, dm: &DofMap, mut kernel: K) -> CsrMatrix<T>
where
    K: FnMut(CellGeometry<T>) -> (Vec<usize>, Vec<T>),
{
    let mut matrix = build_pattern(mesh, dm);
    for c in 0..mesh.n_cells() {
        let geo = CellGeometry::of(mesh, c);
        let (dofs, block) = kernel(geo);
        scatter_block(&mut matrix, &dofs, &block);
    }
    matrix
}

/// Assemble a vector from a per-cell dense kernel.
pub fn assemble_vector<T: Real, K>(mesh: &Mesh<T>, dm: &DofMap, mut kernel: K) -> Vec<T>
where
    K: FnMut(CellGeometry<T>) -> (Vec<usize>, Vec<T>),
{
    let mut vector = vec![T::zero(); dm.n_total()];
    for c in 0..mesh.n_cells() {
        let geo = CellGeometry::of(mesh, c);
        let (dofs, local) = kernel(geo);
        debug_assert_eq!(dofs.len(), local.len());
        for (&g, &v) in dofs.iter().zip(&local) {
            vector[g] += v;
        }
    }
    vector
}

/// Geometric nested-dissection ordering of all dofs: recursively bisect the
/// cell set at the median cell center (wider axis first); dofs shared by
/// both halves form the separator and are numbered last. Separators on
/// structured meshes are single mesh lines, which keeps direct-solver
/// fill-in near the 2D optimum.
pub fn geometric_nd_order<T: Real>(mesh: &Mesh<T>, dm: &DofMap) -> Vec<usize> {
    let n_cells = mesh.n_cells();
    let mut cell_dofs: Vec<Vec<usize>> = Vec::with_capacity(n_cells);
    let mut centers: Vec<[f64; 2]> = Vec::with_capacity(n_cells);
    for (c, cell) in mesh.cells().iter().enumerate() {
        cell_dofs.push(cell_global_dofs(dm, &cell.nodes, c));
        let a = mesh.node(cell.nodes[0]);
        let b = mesh.node(cell.nodes[2]);
        centers.push([
            0.5 * (a[0] + b[0]).to_f64_lossy(),
            0.5 * (a[1] + b[1]).to_f64_lossy(),
        ]);
    }
    let all_cells: Vec<usize> = (0..n_cells).collect();
    let mut all_dofs: Vec<usize> = Vec::with_capacity(dm.n_total());
    {
        let mut seen = vec![false; dm.n_total()];
        for dofs in &cell_dofs {
            for &d in dofs {
                if !seen[d] {
                    seen[d] = true;
                    all_dofs.push(d);
                }
            }
        }
        // Dofs not referenced by any cell (cannot happen with the current
        // dof maps) would be appended first.
        let mut order = Vec::with_capacity(dm.n_total());
        for d in 0..dm.n_total() {
            if !seen[d] {
                order.push(d);
            }
        }
        all_dofs.sort_unstable();
        let mut side = vec![0u8; dm.n_total()];
        nd_cells_recurse(
            &all_cells,
            &all_dofs,
            &cell_dofs,
            &centers,
            &mut side,
            &mut order,
        );
        return order;
    }
}

const ND_CELL_LEAF: usize = 4;

fn nd_cells_recurse(
    cells: &[usize],
    dofs: &[usize],
    cell_dofs: &[Vec<usize>],
    centers: &[[f64; 2]],
    side: &mut [u8],
    order: &mut Vec<usize>,
) {
    if cells.len() <= ND_CELL_LEAF || dofs.len() <= 24 {
        order.extend_from_slice(dofs);
        return;
    }
    // Split along the wider axis of the cell-center bounding box.
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for &c in cells {
        for a in 0..2 {
            lo[a] = lo[a].min(centers[c][a]);
            hi[a] = hi[a].max(centers[c][a]);
        }
    }
    let axis = if hi[0] - lo[0] >= hi[1] - lo[1] { 0 } else { 1 };
    let mut sorted: Vec<usize> = cells.to_vec();
    sorted.sort_unstable_by(|&a, &b| {
        centers[a][axis]
            .partial_cmp(&centers[b][axis])
            .unwrap()
            .then(a.cmp(&b))
    });
    let split = sorted.len() / 2;
    let (c1, c2) = sorted.split_at(split);

    for &c in c1 {
        for &d in &cell_dofs[c] {
            side[d] |= 1;
        }
    }
    for &c in c2 {
        for &d in &cell_dofs[c] {
            side[d] |= 2;
        }
    }
    let mut d1 = Vec::new();
    let mut d2 = Vec::new();
    let mut sep = Vec::new();
    for &d in dofs {
        match side[d] {
            1 => d1.push(d),
            2 => d2.push(d),
            3 => sep.push(d),
            // A region dof always belongs to a region cell.
            _ => sep.push(d),
        }
    }
    for &c in c1.iter().chain(c2.iter()) {
        for &d in &cell_dofs[c] {
            side[d] = 0;
        }
    }

    if d1.is_empty() || d2.is_empty() {
        order.extend_from_slice(dofs);
        return;
    }
    let c1v = c1.to_vec();
    let c2v = c2.to_vec();
    nd_cells_recurse(&c1v, &d1, cell_dofs, centers, side, order);
    nd_cells_recurse(&c2v, &d2, cell_dofs, centers, side, order);
    order.extend_from_slice(&sep);
}

/// Dirichlet constraints: sorted `(dof, prescribed_value)` pairs.
#[derive(Debug, Clone, Default)]
pub struct ConstraintSet<T> {
    entries: Vec<(usize, T)>,
}

impl<T: Real> ConstraintSet<T> {
    /// Earlier entries win on duplicate dofs (stable sort + dedup).
    pub fn new(mut entries: Vec<(usize, T)>) -> Self {
        entries.sort_by_key(|&(d, _)| d);
        entries.dedup_by_key(|&mut (d, _)| d);
        Self { entries }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.entries.iter().copied()
    }

    pub fn contains(&self, dof: usize) -> bool {
        self.entries.binary_search_by_key(&dof, |&(d, _)| d).is_ok()
    }

    pub fn value(&self, dof: usize) -> Option<T> {
        self.entries
            .binary_search_by_key(&dof, |&(d, _)| d)
            .ok()
            .map(|k| self.entries[k].1)
    }

    /// Set constrained entries of a state vector to their prescribed values.
    pub fn enforce(&self, state: &mut [T]) {
        for &(dof, v) in &self.entries {
            state[dof] = v;
        }
    }
}

/// Impose Dirichlet conditions on an incremental Newton system
/// `J * delta = -residual`.
///
/// Constrained rows are replaced by the identity with right-hand side
/// `value - state` (so the post-update state satisfies the condition
/// exactly), and the corresponding columns are eliminated into the
/// right-hand side to keep the remaining block's symmetry structure.
pub fn apply_dirichlet_increment<T: Real>(
    matrix: &mut CsrMatrix<T>,
    rhs: &mut [T],
    constraints: &ConstraintSet<T>,
    state: &[T],
) {
    if constraints.is_empty() {
        return;
    }
    let n = matrix.nrows();
    let mut delta = vec![T::zero(); n];
    let mut is_constrained = vec![false; n];
    for (dof, value) in constraints.iter() {
        delta[dof] = value - state[dof];
        is_constrained[dof] = true;
    }
    // Column elimination: rhs_i -= J[i][c] * delta_c, then zero the column.
    for i in 0..n {
        if is_constrained[i] {
            continue;
        }
        let row_range = matrix.row_ptr()[i]..matrix.row_ptr()[i + 1];
        let mut adjust = T::zero();
        for k in row_range.clone() {
            let j = matrix.col_idx()[k];
            if is_constrained[j] {
                adjust += matrix.values()[k] * delta[j];
                matrix.values_mut()[k] = T::zero();
            }
        }
        rhs[i] -= adjust;
    }
    for (dof, _) in constraints.iter() {
        matrix.set_row_to_identity(dof);
        rhs[dof] = delta[dof];
    }
}

/// Pointwise evaluation of a scalar `Q1` nodal field inside a cell.
pub fn eval_scalar_q1<T: Real>(mesh: &Mesh<T>, cell: usize, r: [T; 2], nodal: &[T]) -> T {
    let elem = ReferenceElement::new(ElementKind::Q1);
    let (values, _) = elem.eval(r);
    let nodes = mesh.cells()[cell].nodes;
    let mut out = T::zero();
    for i in 0..4 {
        out += values[i] * nodal[nodes[i]];
    }
    out
}

/// Pointwise displacement value within a cell from the interleaved `u` block.
pub fn eval_u<T: Real>(
    _mesh: &Mesh<T>,
    dm: &DofMap,
    cell: usize,
    r: [T; 2],
    u_block: &[T],
) -> [T; 2] {
    let elem = ReferenceElement::new(dm.pairing().u_kind());
    let (values, _) = elem.eval(r);
    let scalars = dm.cell_u_scalars(cell);
    let mut out = [T::zero(); 2];
    for (i, &s) in scalars.iter().enumerate() {
        out[0] += values[i] * u_block[2 * s];
        out[1] += values[i] * u_block[2 * s + 1];
    }
    out
}

/// Pointwise displacement gradient `[du_i/dx_j]` within a cell.
pub fn eval_grad_u<T: Real>(
    mesh: &Mesh<T>,
    dm: &DofMap,
    cell: usize,
    r: [T; 2],
    u_block: &[T],
) -> [[T; 2]; 2] {
    let elem = ReferenceElement::new(dm.pairing().u_kind());
    let (_, ref_grads) = elem.eval(r);
    let geo = CellGeometry::of(mesh, cell);
    let scalars = dm.cell_u_scalars(cell);
    let mut out = [[T::zero(); 2]; 2];
    for (i, &s) in scalars.iter().enumerate() {
        let g = geo.grad(ref_grads[i]);
        for comp in 0..2 {
            let coeff = u_block[2 * s + comp];
            out[comp][0] += coeff * g[0];
            out[comp][1] += coeff * g[1];
        }
    }
    out
}
