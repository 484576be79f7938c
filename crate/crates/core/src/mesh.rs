//! Structured quadrilateral meshes for the two benchmark geometries, with
//! boundary tagging and a geometric (doubled-node) representation of the
//! initial slit of the shear test.
//!
//! All cells are axis-aligned rectangles. Meshes are immutable after
//! construction; uniform refinement returns a new mesh.

use crate::scalar::Real;
use std::collections::HashMap;
use thiserror::Error;

/// Side length of the shear-test square in mm.
pub const SHEAR_EDGE: f64 = 10.0;
/// Height of the shear-test slit in mm.
pub const SLIT_Y: f64 = 5.0;
/// x-coordinate of the slit tip in mm.
pub const SLIT_TIP_X: f64 = 5.0;
/// Side length of the L-panel bounding square in mm.
pub const LPANEL_EDGE: f64 = 500.0;
/// Length of the loaded boundary strip of the L-panel in mm.
pub const GAMMA_UY_LENGTH: f64 = 30.0;
/// Left end of the nominal loaded strip, `[470, 500] x {250}`.
pub const GAMMA_UY_X_START: f64 = 470.0;

/// Geometric tolerance for coordinate comparisons, in mm.
const COORD_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("shear mesh needs an even base subdivision count >= 2 so the slit is mesh-conforming, got {0}")]
    OddShearSubdivision(usize),
    #[error("base subdivisions must be >= {min}, got {got}")]
    TooCoarse { min: usize, got: usize },
    #[error(
        "no facet subset approximates the 30 mm loading strip within one facet length \
         (facet length {facet_len} mm); at least {required_refinements} refinements are required"
    )]
    GammaUyUnresolvable {
        facet_len: f64,
        required_refinements: usize,
    },
}

/// Tags carried by boundary facets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Bottom,
    Top,
    Left,
    Right,
    /// Loaded strip on the L-panel ledge, nominally `[470, 500] x {250}`.
    GammaUy,
    /// Facets bordering the shear slit from above.
    SlitUpper,
    /// Facets bordering the shear slit from below.
    SlitLower,
    /// Re-entrant edges of the L-panel outside the loaded strip.
    ReentrantFaces,
}

/// Quadrilateral cell: corner node ids in counter-clockwise order
/// (bottom-left, bottom-right, top-right, top-left) plus refinement level.
#[derive(Debug, Clone, Copy)]
pub struct QuadCell {
    pub nodes: [usize; 4],
    pub level: u32,
}

/// Boundary facet: owning cell, local edge (0 bottom, 1 right, 2 top,
/// 3 left), end node ids in counter-clockwise cell order, and tag.
#[derive(Debug, Clone, Copy)]
pub struct Facet {
    pub cell: usize,
    pub local_edge: u8,
    pub nodes: [usize; 2],
    pub tag: BoundaryTag,
}

/// Structured quadrilateral mesh.
#[derive(Debug, Clone)]
pub struct Mesh<T> {
    coords: Vec<[T; 2]>,
    cells: Vec<QuadCell>,
    facets: Vec<Facet>,
    h: T,
    refinement_level: u32,
    /// Pairs `(upper, lower)` of doubled node ids along the slit.
    slit_pairs: Vec<(usize, usize)>,
    /// Node id of the slit tip, if the mesh has a slit.
    slit_tip: Option<usize>,
    /// Realized loaded strip `(x_start, length)` of the L-panel, if any.
    gamma_uy_realized: Option<(T, T)>,
}

impl<T: Real> Mesh<T> {
    pub fn n_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn coords(&self) -> &[[T; 2]] {
        &self.coords
    }

    pub fn node(&self, i: usize) -> [T; 2] {
        self.coords[i]
    }

    pub fn cells(&self) -> &[QuadCell] {
        &self.cells
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn facets_with_tag(&self, tag: BoundaryTag) -> impl Iterator<Item = &Facet> {
        self.facets.iter().filter(move |f| f.tag == tag)
    }

    pub fn has_tag(&self, tag: BoundaryTag) -> bool {
        self.facets.iter().any(|f| f.tag == tag)
    }

    /// Maximum cell diameter (diagonal length) in mm.
    pub fn h(&self) -> T {
        self.h
    }

    pub fn refinement_level(&self) -> u32 {
        self.refinement_level
    }

    pub fn slit_pairs(&self) -> &[(usize, usize)] {
        &self.slit_pairs
    }

    pub fn slit_tip(&self) -> Option<usize> {
        self.slit_tip
    }

    pub fn gamma_uy_realized(&self) -> Option<(T, T)> {
        self.gamma_uy_realized
    }

    /// Sum of cell areas (shoelace formula; exact for rectangles).
    pub fn area(&self) -> T {
        let mut total = T::zero();
        for cell in &self.cells {
            let mut a = T::zero();
            for k in 0..4 {
                let p = self.coords[cell.nodes[k]];
                let q = self.coords[cell.nodes[(k + 1) % 4]];
                a += p[0] * q[1] - q[0] * p[1];
            }
            total += a * T::lit(0.5);
        }
        total
    }

    /// Axis-aligned extents `(dx, dy)` of a cell.
    pub fn cell_extents(&self, cell: usize) -> (T, T) {
        let c = &self.cells[cell];
        let a = self.coords[c.nodes[0]];
        let b = self.coords[c.nodes[1]];
        let d = self.coords[c.nodes[3]];
        ((b[0] - a[0]).abs(), (d[1] - a[1]).abs())
    }

    fn compute_h(coords: &[[T; 2]], cells: &[QuadCell]) -> T {
        let mut h = T::zero();
        for cell in cells {
            let a = coords[cell.nodes[0]];
            let c = coords[cell.nodes[2]];
            let dx = c[0] - a[0];
            let dy = c[1] - a[1];
            let diag = (dx * dx + dy * dy).sqrt();
            if diag > h {
                h = diag;
            }
        }
        h
    }

    /// Node-to-node adjacency through cells (used for crack-path region
    /// growth and dof-graph construction).
    pub fn node_neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_nodes()];
        for cell in &self.cells {
            for i in 0..4 {
                for j in 0..4 {
                    if i != j {
                        adj[cell.nodes[i]].push(cell.nodes[j]);
                    }
                }
            }
        }
        for l in &mut adj {
            l.sort_unstable();
            l.dedup();
        }
        adj
    }

    /// Split every quad into four; slit doubling and facet tags are
    /// inherited, `h` is halved.
    pub fn refine_uniform(&self) -> Mesh<T> {
        let half = T::lit(0.5);
        let mut coords = self.coords.clone();
        let mut edge_mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, coords: &mut Vec<[T; 2]>| -> usize {
            let key = (a.min(b), a.max(b));
            *edge_mid.entry(key).or_insert_with(|| {
                let pa = coords[a];
                let pb = coords[b];
                coords.push([(pa[0] + pb[0]) * half, (pa[1] + pb[1]) * half]);
                coords.len() - 1
            })
        };

        let mut cells = Vec::with_capacity(self.cells.len() * 4);
        for cell in &self.cells {
            let [a, b, c, d] = cell.nodes;
            let mab = midpoint(a, b, &mut coords);
            let mbc = midpoint(b, c, &mut coords);
            let mcd = midpoint(c, d, &mut coords);
            let mda = midpoint(d, a, &mut coords);
            let pa = coords[a];
            let pc = coords[c];
            coords.push([(pa[0] + pc[0]) * half, (pa[1] + pc[1]) * half]);
            let o = coords.len() - 1;
            let level = cell.level + 1;
            cells.push(QuadCell { nodes: [a, mab, o, mda], level });
            cells.push(QuadCell { nodes: [mab, b, mbc, o], level });
            cells.push(QuadCell { nodes: [o, mbc, c, mcd], level });
            cells.push(QuadCell { nodes: [mda, o, mcd, d], level });
        }

        // Children sharing each parent edge, in edge direction:
        // (first child, its edge), (second child, its edge).
        const EDGE_CHILDREN: [[(usize, u8); 2]; 4] = [
            [(0, 0), (1, 0)],
            [(1, 1), (2, 1)],
            [(2, 2), (3, 2)],
            [(3, 3), (0, 3)],
        ];
        let mut facets = Vec::with_capacity(self.facets.len() * 2);
        for facet in &self.facets {
            let e = facet.local_edge as usize;
            let parent = &self.cells[facet.cell];
            let p = parent.nodes[e];
            let q = parent.nodes[(e + 1) % 4];
            let m = *edge_mid.get(&(p.min(q), p.max(q))).expect("edge midpoint");
            for (half_idx, &(child, child_edge)) in EDGE_CHILDREN[e].iter().enumerate() {
                let nodes = if half_idx == 0 { [p, m] } else { [m, q] };
                facets.push(Facet {
                    cell: facet.cell * 4 + child,
                    local_edge: child_edge,
                    nodes,
                    tag: facet.tag,
                });
            }
        }

        // Doubled slit nodes: every refined edge along the slit produced a
        // doubled midpoint pair because upper and lower edges have distinct
        // node ids. Recover pairs by matching coordinates of old pairs' edges.
        let mut slit_pairs = self.slit_pairs.clone();
        if !self.slit_pairs.is_empty() {
            let mut by_coord: HashMap<(u64, u64), Vec<usize>> = HashMap::new();
            for id in self.coords.len()..coords.len() {
                let key = coord_key(coords[id]);
                by_coord.entry(key).or_default().push(id);
            }
            for ids in by_coord.values() {
                if ids.len() == 2 {
                    // Orientation (which copy is upper) is resolved by cell use;
                    // for bookkeeping the pair itself suffices.
                    slit_pairs.push((ids[0], ids[1]));
                }
            }
            slit_pairs.sort_unstable();
        }

        let h = Self::compute_h(&coords, &cells);
        Mesh {
            coords,
            cells,
            facets,
            h,
            refinement_level: self.refinement_level + 1,
            slit_pairs,
            slit_tip: self.slit_tip,
            gamma_uy_realized: self.gamma_uy_realized,
        }
    }

    /// Positivity of the bilinear map's Jacobian on every cell (sanity check;
    /// cells are constructed counter-clockwise so this guards against bugs).
    pub fn validate_cell_orientation(&self) -> bool {
        self.cells.iter().all(|cell| {
            let a = self.coords[cell.nodes[0]];
            let b = self.coords[cell.nodes[1]];
            let d = self.coords[cell.nodes[3]];
            (b[0] - a[0]) * (d[1] - a[1]) - (b[1] - a[1]) * (d[0] - a[0]) > T::zero()
        })
    }
}

fn coord_key<T: Real>(p: [T; 2]) -> (u64, u64) {
    // Quantized coordinates for exact-grid matching (structured meshes only).
    let scale = 1.0 / COORD_TOL;
    let x = (p[0].to_f64_lossy() * scale).round() as i64;
    let y = (p[1].to_f64_lossy() * scale).round() as i64;
    (x as u64, y as u64)
}

/// Single-edge notched shear test: 10 mm square, slit `{(x, 5) : 5 < x <= 10}`
/// realized by doubled nodes, tip at `(5, 5)` left intact.
pub fn build_shear_mesh<T: Real>(
    base_subdivisions: usize,
    refinements: usize,
) -> Result<Mesh<T>, MeshError> {
    build_shear_mesh_opts(base_subdivisions, refinements, false)
}

/// Shear mesh with optional mirroring of the slit onto the left half
/// (`{(x, 5) : 0 <= x < 5}`).
pub fn build_shear_mesh_opts<T: Real>(
    base_subdivisions: usize,
    refinements: usize,
    mirror_slit: bool,
) -> Result<Mesh<T>, MeshError> {
    let n = base_subdivisions;
    if n < 2 {
        return Err(MeshError::TooCoarse { min: 2, got: n });
    }
    if n % 2 != 0 {
        return Err(MeshError::OddShearSubdivision(n));
    }

    let pitch = SHEAR_EDGE / n as f64;
    let nn = n + 1;
    let mut coords: Vec<[T; 2]> = Vec::with_capacity(nn * nn);
    for j in 0..nn {
        for i in 0..nn {
            coords.push([T::lit(i as f64 * pitch), T::lit(j as f64 * pitch)]);
        }
    }
    let grid = |i: usize, j: usize| j * nn + i;

    // Doubled nodes along the slit; the tip column is excluded, the outer
    // boundary endpoint is included.
    let j_slit = n / 2;
    let i_tip = n / 2;
    let slit_cols: Vec<usize> = if mirror_slit {
        (0..i_tip).collect()
    } else {
        ((i_tip + 1)..=n).collect()
    };
    let mut lower_copy: HashMap<usize, usize> = HashMap::new();
    let mut slit_pairs = Vec::new();
    for &i in &slit_cols {
        let orig = grid(i, j_slit);
        coords.push(coords[orig]);
        let dup = coords.len() - 1;
        lower_copy.insert(orig, dup);
        slit_pairs.push((orig, dup));
    }

    // Cells below the slit reference the duplicated copies.
    let mut cells = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let mut nodes = [
                grid(i, j),
                grid(i + 1, j),
                grid(i + 1, j + 1),
                grid(i, j + 1),
            ];
            if j + 1 == j_slit + 0 {
                // Row directly below the slit line: top corners may be doubled.
                for k in [2usize, 3] {
                    if let Some(&dup) = lower_copy.get(&nodes[k]) {
                        nodes[k] = dup;
                    }
                }
            }
            cells.push(QuadCell { nodes, level: 0 });
        }
    }

    let cell_at = |i: usize, j: usize| j * n + i;
    let mut facets = Vec::new();
    for i in 0..n {
        let c = cell_at(i, 0);
        facets.push(Facet {
            cell: c,
            local_edge: 0,
            nodes: [cells[c].nodes[0], cells[c].nodes[1]],
            tag: BoundaryTag::Bottom,
        });
        let c = cell_at(i, n - 1);
        facets.push(Facet {
            cell: c,
            local_edge: 2,
            nodes: [cells[c].nodes[2], cells[c].nodes[3]],
            tag: BoundaryTag::Top,
        });
    }
    for j in 0..n {
        let c = cell_at(0, j);
        facets.push(Facet {
            cell: c,
            local_edge: 3,
            nodes: [cells[c].nodes[3], cells[c].nodes[0]],
            tag: BoundaryTag::Left,
        });
        let c = cell_at(n - 1, j);
        facets.push(Facet {
            cell: c,
            local_edge: 1,
            nodes: [cells[c].nodes[1], cells[c].nodes[2]],
            tag: BoundaryTag::Right,
        });
    }
    // Slit facets: bottom edges of the cells above, top edges of the cells
    // below, over the slit columns.
    let slit_cell_cols: Vec<usize> = if mirror_slit {
        (0..i_tip).collect()
    } else {
        (i_tip..n).collect()
    };
    for &i in &slit_cell_cols {
        let above = cell_at(i, j_slit);
        facets.push(Facet {
            cell: above,
            local_edge: 0,
            nodes: [cells[above].nodes[0], cells[above].nodes[1]],
            tag: BoundaryTag::SlitUpper,
        });
        let below = cell_at(i, j_slit - 1);
        facets.push(Facet {
            cell: below,
            local_edge: 2,
            nodes: [cells[below].nodes[2], cells[below].nodes[3]],
            tag: BoundaryTag::SlitLower,
        });
    }

    let h = Mesh::compute_h(&coords, &cells);
    let tip = grid(i_tip, j_slit);
    let mut mesh = Mesh {
        coords,
        cells,
        facets,
        h,
        refinement_level: 0,
        slit_pairs,
        slit_tip: Some(tip),
        gamma_uy_realized: None,
    };
    for _ in 0..refinements {
        mesh = mesh.refine_uniform();
    }
    // Report the overall refinement depth relative to the base grid.
    mesh.refinement_level = refinements as u32;
    Ok(mesh)
}

/// L-shaped panel: `[0,500]^2` minus the lower-right `250x250` quadrant,
/// built from three congruent squares. The loaded strip `GammaUy` is snapped
/// to whole facets at the final resolution.
pub fn build_lshape_mesh<T: Real>(
    base_subdivisions: usize,
    refinements: usize,
) -> Result<Mesh<T>, MeshError> {
    let b = base_subdivisions;
    if b < 1 {
        return Err(MeshError::TooCoarse { min: 1, got: b });
    }
    // Build directly at final pitch; levels record the refinement depth.
    let n = 2 * b * (1usize << refinements); // subdivisions across the full 500 mm
    let pitch = LPANEL_EDGE / n as f64;
    let nn = n + 1;
    let half = n / 2;

    let in_domain_cell = |i: usize, j: usize| !(i >= half && j < half);
    let mut node_id = vec![usize::MAX; nn * nn];
    let mut coords = Vec::new();
    for j in 0..nn {
        for i in 0..nn {
            // Keep a node iff it is a corner of at least one in-domain cell.
            let mut used = false;
            for (ci, cj) in [
                (i.wrapping_sub(1), j.wrapping_sub(1)),
                (i, j.wrapping_sub(1)),
                (i.wrapping_sub(1), j),
                (i, j),
            ] {
                if ci < n && cj < n && in_domain_cell(ci, cj) {
                    used = true;
                    break;
                }
            }
            if used {
                node_id[j * nn + i] = coords.len();
                coords.push([T::lit(i as f64 * pitch), T::lit(j as f64 * pitch)]);
            }
        }
    }

    let mut cells = Vec::new();
    let mut cell_index = vec![usize::MAX; n * n];
    for j in 0..n {
        for i in 0..n {
            if in_domain_cell(i, j) {
                cell_index[j * n + i] = cells.len();
                cells.push(QuadCell {
                    nodes: [
                        node_id[j * nn + i],
                        node_id[j * nn + i + 1],
                        node_id[(j + 1) * nn + i + 1],
                        node_id[(j + 1) * nn + i],
                    ],
                    level: refinements as u32,
                });
            }
        }
    }

    let mut facets = Vec::new();
    let mut push_facet = |cells: &[QuadCell], c: usize, edge: u8, tag: BoundaryTag| {
        let e = edge as usize;
        facets.push(Facet {
            cell: c,
            local_edge: edge,
            nodes: [cells[c].nodes[e], cells[c].nodes[(e + 1) % 4]],
            tag,
        });
    };

    // The loaded strip is snapped to whole facets ending at x = 500.
    let k_strip = ((GAMMA_UY_LENGTH / pitch).round() as usize).max(1).min(half);
    let realized_len = k_strip as f64 * pitch;
    if (realized_len - GAMMA_UY_LENGTH).abs() > pitch + COORD_TOL {
        // Unreachable with the max(1) snap above for all practical meshes,
        // but kept as the contract check for the strip approximation.
        let required = required_refinements_for_strip(b);
        return Err(MeshError::GammaUyUnresolvable {
            facet_len: pitch,
            required_refinements: required,
        });
    }

    for i in 0..n {
        if in_domain_cell(i, 0) {
            push_facet(&cells, cell_index[i], 0, BoundaryTag::Bottom);
        }
        let top_cell = cell_index[(n - 1) * n + i];
        push_facet(&cells, top_cell, 2, BoundaryTag::Top);
    }
    for j in 0..n {
        push_facet(&cells, cell_index[j * n], 3, BoundaryTag::Left);
        if in_domain_cell(n - 1, j) {
            push_facet(&cells, cell_index[j * n + n - 1], 1, BoundaryTag::Right);
        }
    }
    // Re-entrant vertical edge x = 250, y in [0, 250].
    for j in 0..half {
        let c = cell_index[j * n + half - 1];
        push_facet(&cells, c, 1, BoundaryTag::ReentrantFaces);
    }
    // Ledge y = 250, x in [250, 500]: loaded strip on the right end,
    // re-entrant faces elsewhere.
    for i in half..n {
        let c = cell_index[half * n + i];
        let tag = if i >= n - k_strip {
            BoundaryTag::GammaUy
        } else {
            BoundaryTag::ReentrantFaces
        };
        push_facet(&cells, c, 0, tag);
    }

    let h = Mesh::compute_h(&coords, &cells);
    Ok(Mesh {
        coords,
        cells,
        facets,
        h,
        refinement_level: refinements as u32,
        slit_pairs: Vec::new(),
        slit_tip: None,
        gamma_uy_realized: Some((
            T::lit(LPANEL_EDGE - realized_len),
            T::lit(realized_len),
        )),
    })
}

fn required_refinements_for_strip(base: usize) -> usize {
    // Pitch after r refinements is 250/(base * 2^r); one facet must not be
    // longer than twice the strip.
    let mut r = 0usize;
    while 250.0 / (base as f64 * (1u64 << r) as f64) > 2.0 * GAMMA_UY_LENGTH {
        r += 1;
    }
    r
}

/// Plain unit-square mesh (no slit, no special tags beyond the four sides);
/// used by the analysis studies and tests.
pub fn build_unit_square_mesh<T: Real>(subdivisions: usize) -> Mesh<T> {
    build_square_mesh(subdivisions, T::one())
}

/// Plain square mesh with the given side length.
pub fn build_square_mesh<T: Real>(subdivisions: usize, side: T) -> Mesh<T> {
    let n = subdivisions.max(1);
    let pitch = side.to_f64_lossy() / n as f64;
    let nn = n + 1;
    let mut coords = Vec::with_capacity(nn * nn);
    for j in 0..nn {
        for i in 0..nn {
            coords.push([T::lit(i as f64 * pitch), T::lit(j as f64 * pitch)]);
        }
    }
    let grid = |i: usize, j: usize| j * nn + i;
    let mut cells = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            cells.push(QuadCell {
                nodes: [grid(i, j), grid(i + 1, j), grid(i + 1, j + 1), grid(i, j + 1)],
                level: 0,
            });
        }
    }
    let cell_at = |i: usize, j: usize| j * n + i;
    let mut facets = Vec::new();
    for i in 0..n {
        facets.push(Facet {
            cell: cell_at(i, 0),
            local_edge: 0,
            nodes: [grid(i, 0), grid(i + 1, 0)],
            tag: BoundaryTag::Bottom,
        });
        facets.push(Facet {
            cell: cell_at(i, n - 1),
            local_edge: 2,
            nodes: [grid(i + 1, n), grid(i, n)],
            tag: BoundaryTag::Top,
        });
    }
    for j in 0..n {
        facets.push(Facet {
            cell: cell_at(0, j),
            local_edge: 3,
            nodes: [grid(0, j + 1), grid(0, j)],
            tag: BoundaryTag::Left,
        });
        facets.push(Facet {
            cell: cell_at(n - 1, j),
            local_edge: 1,
            nodes: [grid(n, j), grid(n, j + 1)],
            tag: BoundaryTag::Right,
        });
    }
    let h = Mesh::compute_h(&coords, &cells);
    Mesh {
        coords,
        cells,
        facets,
        h,
        refinement_level: 0,
        slit_pairs: Vec::new(),
        slit_tip: None,
        gamma_uy_realized: None,
    }
}

/// Translate every node by `(dx, dy)` (analysis invariance checks).
pub fn translate_mesh<T: Real>(mesh: &Mesh<T>, dx: T, dy: T) -> Mesh<T> {
    let mut out = mesh.clone();
    for p in &mut out.coords {
        p[0] += dx;
        p[1] += dy;
    }
    out
}

impl<T: Real> Mesh<T> {
    /// Renumber nodes: new id `k` holds old node `perm[k]`. Used by the
    /// relabeling-invariance checks of the analysis module.
    pub fn permute_nodes(&self, perm: &[usize]) -> Mesh<T> {
        assert_eq!(perm.len(), self.n_nodes());
        let mut inverse = vec![usize::MAX; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let coords: Vec<[T; 2]> = perm.iter().map(|&old| self.coords[old]).collect();
        let cells: Vec<QuadCell> = self
            .cells
            .iter()
            .map(|c| QuadCell {
                nodes: [
                    inverse[c.nodes[0]],
                    inverse[c.nodes[1]],
                    inverse[c.nodes[2]],
                    inverse[c.nodes[3]],
                ],
                level: c.level,
            })
            .collect();
        let facets: Vec<Facet> = self
            .facets
            .iter()
            .map(|f| Facet {
                cell: f.cell,
                local_edge: f.local_edge,
                nodes: [inverse[f.nodes[0]], inverse[f.nodes[1]]],
                tag: f.tag,
            })
            .collect();
        Mesh {
            coords,
            cells,
            facets,
            h: self.h,
            refinement_level: self.refinement_level,
            slit_pairs: self
                .slit_pairs
                .iter()
                .map(|&(a, b)| (inverse[a], inverse[b]))
                .collect(),
            slit_tip: self.slit_tip.map(|t| inverse[t]),
            gamma_uy_realized: self.gamma_uy_realized,
        }
    }
}
