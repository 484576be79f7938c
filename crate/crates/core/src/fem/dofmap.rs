//! Degree-of-freedom management for the block system `(u | p | phi | tau)`.
//!
//! Scalar `Q1` fields (`p`, `phi`, `tau`) use mesh node ids directly, so slit
//! doubling carries over to every field. `Q2` displacement dofs live on mesh
//! nodes, edge midpoints and cell centers; edges are keyed by node-id pairs,
//! which doubles edge dofs along the slit automatically. Displacement
//! components are interleaved (`2*scalar + component`).

use crate::fem::element::ElementKind;
use crate::mesh::{Facet, Mesh};
use crate::scalar::Real;
use std::collections::HashMap;
use std::ops::Range;

/// Element pairing for the fields `(u, p, phi, tau)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementPairing {
    /// Classical formulation, `u: Q1`, `phi: Q1` (reference configuration).
    Q1Q1,
    /// Classical formulation with biquadratic displacements.
    Q2Q1,
    /// Mixed formulation `Q2 Q1 Q1 Q1*`: adds the pressure block.
    MixedQ2Q1Q1Q1Star,
}

impl ElementPairing {
    pub fn u_kind(self) -> ElementKind {
        match self {
            ElementPairing::Q1Q1 => ElementKind::Q1,
            ElementPairing::Q2Q1 | ElementPairing::MixedQ2Q1Q1Q1Star => ElementKind::Q2,
        }
    }

    pub fn has_pressure(self) -> bool {
        matches!(self, ElementPairing::MixedQ2Q1Q1Q1Star)
    }
}

/// Solution fields of the block system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    U,
    P,
    Phi,
    Tau,
}

/// Block layout and cell-to-global index tables.
#[derive(Debug, Clone)]
pub struct DofMap {
    pairing: ElementPairing,
    with_multiplier: bool,
    #[allow(dead_code)]
    n_cells: usize,
    n_nodes: usize,
    /// Scalar displacement dofs (per component).
    n_u_scalar: usize,
    /// Per cell: scalar displacement indices, `u_nodes_per_cell` each.
    cell_u_scalar: Vec<usize>,
    u_nodes_per_cell: usize,
    /// Edge-midpoint scalar index per (sorted) node pair, `Q2` only.
    edge_scalar: HashMap<(usize, usize), usize>,
    /// For every scalar u dof: the pair of mesh nodes defining it.
    /// Corners reference `(n, n)`, edge midpoints `(a, b)`, centers `(c0, c2)`
    /// (diagonal corners); used to synthesize dof coordinates.
    u_scalar_nodes: Vec<(usize, usize)>,
    p_offset: usize,
    phi_offset: usize,
    tau_offset: usize,
    total: usize,
}

impl DofMap {
    /// Build the dof map.
    ///
    /// The multiplier block `tau` is allocated when `with_multiplier` holds
    /// (Lagrange-multiplier irreversibility); penalty runs leave it empty.
    pub fn build<T: Real>(mesh: &Mesh<T>, pairing: ElementPairing, with_multiplier: bool) -> Self {
        let n_nodes = mesh.n_nodes();
        let n_cells = mesh.n_cells();
        let u_kind = pairing.u_kind();

        let mut edge_scalar: HashMap<(usize, usize), usize> = HashMap::new();
        let mut u_scalar_nodes: Vec<(usize, usize)> = (0..n_nodes).map(|n| (n, n)).collect();
        let mut cell_u_scalar;
        let u_nodes_per_cell;
        match u_kind {
            ElementKind::Q1 => {
                u_nodes_per_cell = 4;
                cell_u_scalar = Vec::with_capacity(4 * n_cells);
                for cell in mesh.cells() {
                    cell_u_scalar.extend_from_slice(&cell.nodes);
                }
            }
            ElementKind::Q2 => {
                u_nodes_per_cell = 9;
                cell_u_scalar = Vec::with_capacity(9 * n_cells);
                for cell in mesh.cells() {
                    let [a, b, c, d] = cell.nodes;
                    let mut edge = |p: usize, q: usize| -> usize {
                        let key = (p.min(q), p.max(q));
                        *edge_scalar.entry(key).or_insert_with(|| {
                            u_scalar_nodes.push((p, q));
                            u_scalar_nodes.len() - 1
                        })
                    };
                    // Order matches `element::Q2_NODES`: corners, edge
                    // midpoints (bottom, right, top, left), center.
                    let e_bottom = edge(a, b);
                    let e_right = edge(b, c);
                    let e_top = edge(c, d);
                    let e_left = edge(d, a);
                    u_scalar_nodes.push((a, c));
                    let center = u_scalar_nodes.len() - 1;
                    cell_u_scalar.extend_from_slice(&[
                        a, b, c, d, e_bottom, e_right, e_top, e_left, center,
                    ]);
                }
            }
            ElementKind::Q1Dual => unreachable!("u is never discretized in the dual basis"),
        }
        let n_u_scalar = u_scalar_nodes.len();

        let u_size = 2 * n_u_scalar;
        let p_size = if pairing.has_pressure() { n_nodes } else { 0 };
        let phi_size = n_nodes;
        let tau_size = if with_multiplier { n_nodes } else { 0 };
        let p_offset = u_size;
        let phi_offset = p_offset + p_size;
        let tau_offset = phi_offset + phi_size;
        let total = tau_offset + tau_size;

        Self {
            pairing,
            with_multiplier,
            n_cells,
            n_nodes,
            n_u_scalar,
            cell_u_scalar,
            u_nodes_per_cell,
            edge_scalar,
            u_scalar_nodes,
            p_offset,
            phi_offset,
            tau_offset,
            total,
        }
    }

    pub fn pairing(&self) -> ElementPairing {
        self.pairing
    }

    pub fn with_multiplier(&self) -> bool {
        self.with_multiplier
    }

    pub fn n_total(&self) -> usize {
        self.total
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_u_scalar(&self) -> usize {
        self.n_u_scalar
    }

    pub fn u_nodes_per_cell(&self) -> usize {
        self.u_nodes_per_cell
    }

    /// Global index range of a field block (empty for absent fields).
    pub fn block(&self, field: Field) -> Range<usize> {
        match field {
            Field::U => 0..self.p_offset,
            Field::P => self.p_offset..self.phi_offset,
            Field::Phi => self.phi_offset..self.tau_offset,
            Field::Tau => self.tau_offset..self.total,
        }
    }

    /// Global displacement dof for scalar index `s` and component `c`.
    #[inline]
    pub fn u_global(&self, s: usize, c: usize) -> usize {
        2 * s + c
    }

    /// Scalar displacement indices of a cell (length `u_nodes_per_cell`).
    #[inline]
    pub fn cell_u_scalars(&self, cell: usize) -> &[usize] {
        let k = self.u_nodes_per_cell;
        &self.cell_u_scalar[cell * k..(cell + 1) * k]
    }

    /// Global index of a scalar nodal field dof (`P`, `Phi`, `Tau`).
    #[inline]
    pub fn scalar_global(&self, field: Field, node: usize) -> usize {
        debug_assert!(node < self.n_nodes);
        match field {
            Field::P => {
                debug_assert!(self.pairing.has_pressure());
                self.p_offset + node
            }
            Field::Phi => self.phi_offset + node,
            Field::Tau => {
                debug_assert!(self.with_multiplier);
                self.tau_offset + node
            }
            Field::U => panic!("u is vector-valued; use u_global"),
        }
    }

    /// Coordinates of every scalar displacement dof.
    pub fn u_scalar_coords<T: Real>(&self, mesh: &Mesh<T>) -> Vec<[T; 2]> {
        let half = T::lit(0.5);
        self.u_scalar_nodes
            .iter()
            .map(|&(a, b)| {
                let pa = mesh.node(a);
                let pb = mesh.node(b);
                [(pa[0] + pb[0]) * half, (pa[1] + pb[1]) * half]
            })
            .collect()
    }

    /// Scalar displacement dofs lying on a boundary facet: the two end nodes
    /// plus, for `Q2`, the edge midpoint.
    pub fn facet_u_scalars(&self, facet: &Facet) -> Vec<usize> {
        let [p, q] = facet.nodes;
        let mut out = vec![p, q];
        if self.pairing.u_kind() == ElementKind::Q2 {
            let key = (p.min(q), p.max(q));
            out.push(*self.edge_scalar.get(&key).expect("boundary edge dof"));
        }
        out
    }

    /// Field and node/scalar index of a global dof (diagnostics).
    pub fn classify(&self, dof: usize) -> (Field, usize) {
        if dof < self.p_offset {
            (Field::U, dof / 2)
        } else if dof < self.phi_offset {
            (Field::P, dof - self.p_offset)
        } else if dof < self.tau_offset {
            (Field::Phi, dof - self.phi_offset)
        } else {
            (Field::Tau, dof - self.tau_offset)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_shear_mesh, build_unit_square_mesh};

    #[test]
    fn q2_scalar_count_matches_closed_form() {
        for n in [1usize, 2, 3, 5] {
            let mesh = build_unit_square_mesh::<f64>(n);
            let dm = DofMap::build(&mesh, ElementPairing::Q2Q1, false);
            assert_eq!(dm.n_u_scalar(), (2 * n + 1) * (2 * n + 1));
            assert_eq!(dm.block(Field::U).len(), 2 * (2 * n + 1) * (2 * n + 1));
            assert_eq!(dm.block(Field::Phi).len(), (n + 1) * (n + 1));
            assert!(dm.block(Field::P).is_empty());
            assert!(dm.block(Field::Tau).is_empty());
        }
    }

    #[test]
    fn mixed_pairing_total_on_2x2_grid() {
        let mesh = build_unit_square_mesh::<f64>(2);
        let dm = DofMap::build(&mesh, ElementPairing::MixedQ2Q1Q1Q1Star, true);
        // 2*25 + 9 + 9 + 9
        assert_eq!(dm.n_total(), 77);
        let blocks = [Field::U, Field::P, Field::Phi, Field::Tau];
        let mut covered = 0;
        for f in blocks {
            covered += dm.block(f).len();
        }
        assert_eq!(covered, dm.n_total());
    }

    #[test]
    fn every_dof_is_referenced_by_a_cell() {
        let mesh = build_shear_mesh::<f64>(4, 1).unwrap();
        let dm = DofMap::build(&mesh, ElementPairing::MixedQ2Q1Q1Q1Star, true);
        let mut seen = vec![false; dm.n_total()];
        for cell in 0..mesh.n_cells() {
            for &s in dm.cell_u_scalars(cell) {
                seen[dm.u_global(s, 0)] = true;
                seen[dm.u_global(s, 1)] = true;
            }
            for &node in &mesh.cells()[cell].nodes {
                seen[dm.scalar_global(Field::P, node)] = true;
                seen[dm.scalar_global(Field::Phi, node)] = true;
                seen[dm.scalar_global(Field::Tau, node)] = true;
            }
        }
        assert!(seen.iter().all(|&s| s), "unreferenced dof found");
    }

    #[test]
    fn slit_edges_carry_doubled_q2_dofs() {
        let mesh = build_shear_mesh::<f64>(2, 1).unwrap();
        let dm = DofMap::build(&mesh, ElementPairing::Q2Q1, false);
        let coords = dm.u_scalar_coords(&mesh);
        // Midpoints of the slit edges exist twice (upper/lower rims).
        let doubled = coords
            .iter()
            .filter(|p| (p[1] - 5.0).abs() < 1e-12 && p[0] > 5.0 + 1e-12)
            .count();
        // Grid nodes on the slit: x in {7.5, 10} doubled -> 4 scalar dofs;
        // edge midpoints x in {6.25, 8.75} doubled -> 4 scalar dofs.
        assert_eq!(doubled, 8);
    }

    #[test]
    fn facet_u_scalars_include_edge_midpoint_for_q2() {
        let mesh = build_unit_square_mesh::<f64>(2);
        let dm = DofMap::build(&mesh, ElementPairing::Q2Q1, false);
        let facet = mesh.facets()[0];
        let dofs = dm.facet_u_scalars(&facet);
        assert_eq!(dofs.len(), 3);
        let coords = dm.u_scalar_coords(&mesh);
        let mid = coords[dofs[2]];
        let a = mesh.node(facet.nodes[0]);
        let b = mesh.node(facet.nodes[1]);
        assert!((mid[0] - 0.5 * (a[0] + b[0])).abs() < 1e-14);
        assert!((mid[1] - 0.5 * (a[1] + b[1])).abs() < 1e-14);
    }
}
