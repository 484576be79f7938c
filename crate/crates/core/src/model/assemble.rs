//! Residual and Jacobian assembly for the classical and mixed phase-field
//! fracture systems.
//!
//! Local block layout per cell: interleaved displacements, then pressure,
//! phase field and multiplier nodes; [`cell_global_dofs`] produces global
//! indices in the same order.

use crate::fem::assembly::{
    build_pattern, cell_global_dofs, geometric_nd_order, CellGeometry, ElementTables,
};
use crate::fem::dofmap::{DofMap, Field};
use crate::fem::element::ElementKind;
use crate::fem::quadrature::{gauss_rule, QuadratureRule};
use crate::fem::sparse::CsrMatrix;
use crate::material::{
    degradation, degradation_derivative, full_stress, heaviside_inactive_at_zero, spectral_split,
    stress_plus_minus, strain, tensile_projection_derivative, MaterialParams, Strain2,
};
use crate::mesh::Mesh;
use crate::model::{
    complementarity_active, complementarity_residual, ComplementarityParams, FormulationKind,
    FormulationMode, IrreversibilityMode, SystemState,
};
use crate::scalar::Real;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("the mixed formulation divides by lambda; got lambda = {0} (nu = 0?)")]
    MixedNeedsPositiveLambda(f64),
}

/// Assembled fracture model bound to one mesh, one dof map and one parameter
/// set. States are immutable inputs; assembly is single-threaded and
/// iteration-order deterministic.
pub struct FractureModel<'m, T> {
    mesh: &'m Mesh<T>,
    dm: DofMap,
    pub material: MaterialParams<T>,
    pub mode: FormulationMode,
    pub comp: ComplementarityParams<T>,
    rule: QuadratureRule<T>,
    u_tables: ElementTables<T>,
    q1_tables: ElementTables<T>,
    /// Lumped biorthogonal pairing weight per node, `W_j = sum_cells |cell|/4`.
    pairing_weights: Vec<T>,
    pattern: CsrMatrix<T>,
    /// Nested-dissection column order for the direct solver.
    column_order: Vec<usize>,
}

impl<'m, T: Real> FractureModel<'m, T> {
    pub fn new(
        mesh: &'m Mesh<T>,
        material: MaterialParams<T>,
        mode: FormulationMode,
        comp: ComplementarityParams<T>,
    ) -> Result<Self, ModelError> {
        if mode.kind.is_mixed() && material.lambda <= T::zero() {
            return Err(ModelError::MixedNeedsPositiveLambda(
                material.lambda.to_f64_lossy(),
            ));
        }
        let dm = DofMap::build(mesh, mode.kind.pairing(), comp.with_multiplier_block());
        // 3x3 Gauss for Q2-dominant forms, 2x2 for the Q1-only pairing.
        let order = match mode.kind {
            FormulationKind::StandardQ1Q1 => 2,
            _ => 3,
        };
        let rule = gauss_rule::<T>(order);
        let u_tables = ElementTables::tabulate(dm.pairing().u_kind(), &rule);
        let q1_tables = ElementTables::tabulate(ElementKind::Q1, &rule);

        let mut pairing_weights = vec![T::zero(); mesh.n_nodes()];
        for c in 0..mesh.n_cells() {
            let geo = CellGeometry::of(mesh, c);
            for &n in &mesh.cells()[c].nodes {
                pairing_weights[n] += geo.det_j;
            }
        }
        let pattern = build_pattern(mesh, &dm);
        let column_order = geometric_nd_order(mesh, &dm);
        Ok(Self {
            mesh,
            dm,
            material,
            mode,
            comp,
            rule,
            u_tables,
            q1_tables,
            pairing_weights,
            pattern,
            column_order,
        })
    }

    pub fn dofmap(&self) -> &DofMap {
        &self.dm
    }

    pub fn mesh(&self) -> &Mesh<T> {
        self.mesh
    }

    /// Fill-reducing column order for factorizing the Jacobian.
    pub fn column_order(&self) -> &[usize] {
        &self.column_order
    }

    /// Lumped biorthogonal weights `W_j` (positive, sum to the mesh area).
    pub fn pairing_weights(&self) -> &[T] {
        &self.pairing_weights
    }

    /// Nodal complementarity residuals `C_j`.
    pub fn complementarity_residuals(&self, state: &SystemState<T>) -> Vec<T> {
        let phi = state.block(&self.dm, Field::Phi);
        let tau = state.block(&self.dm, Field::Tau);
        (0..self.mesh.n_nodes())
            .map(|j| complementarity_residual(tau[j], phi[j], state.phi_prev[j], self.comp.c))
            .collect()
    }

    /// Active-set membership per node under the current state.
    pub fn active_set(&self, state: &SystemState<T>) -> Vec<bool> {
        let phi = state.block(&self.dm, Field::Phi);
        let tau = state.block(&self.dm, Field::Tau);
        (0..self.mesh.n_nodes())
            .map(|j| complementarity_active(tau[j], phi[j], state.phi_prev[j], self.comp.c))
            .collect()
    }

    /// Full nonlinear residual (no boundary handling).
    pub fn residual(&self, state: &SystemState<T>) -> Vec<T> {
        let mut r = vec![T::zero(); self.dm.n_total()];
        let nl = self.local_size();
        let mut local = vec![T::zero(); nl];
        for c in 0..self.mesh.n_cells() {
            for v in &mut local {
                *v = T::zero();
            }
            self.cell_residual(c, state, &mut local);
            let dofs = cell_global_dofs(&self.dm, &self.mesh.cells()[c].nodes, c);
            for (&g, &v) in dofs.iter().zip(&local) {
                r[g] += v;
            }
        }
        if self.comp.mode == IrreversibilityMode::Multiplier {
            let phi = state.block(&self.dm, Field::Phi);
            let tau = state.block(&self.dm, Field::Tau);
            for j in 0..self.mesh.n_nodes() {
                let row = self.dm.scalar_global(Field::Tau, j);
                r[row] = complementarity_residual(tau[j], phi[j], state.phi_prev[j], self.comp.c);
            }
        }
        r
    }

    /// Analytic Jacobian (no boundary handling).
    pub fn jacobian(&self, state: &SystemState<T>) -> CsrMatrix<T> {
        self.jacobian_scaled_coupling(state, T::one())
    }

    /// Jacobian with the displacement/pressure <-> phase-field coupling
    /// blocks scaled by `omega`. `omega = 1` is the exact Jacobian;
    /// smaller values trade quadratic convergence for robustness near
    /// brutal crack growth (modified Newton). The residual is untouched.
    pub fn jacobian_scaled_coupling(&self, state: &SystemState<T>, omega: T) -> CsrMatrix<T> {
        let mut matrix = self.pattern.clone();
        let nl = self.local_size();
        let mut local = vec![T::zero(); nl * nl];
        for c in 0..self.mesh.n_cells() {
            for v in &mut local {
                *v = T::zero();
            }
            self.cell_jacobian(c, state, omega, &mut local);
            let dofs = cell_global_dofs(&self.dm, &self.mesh.cells()[c].nodes, c);
            crate::fem::assembly::scatter_block(&mut matrix, &dofs, &local);
        }
        if self.comp.mode == IrreversibilityMode::Multiplier {
            let phi = state.block(&self.dm, Field::Phi);
            let tau = state.block(&self.dm, Field::Tau);
            for j in 0..self.mesh.n_nodes() {
                let row = self.dm.scalar_global(Field::Tau, j);
                if complementarity_active(tau[j], phi[j], state.phi_prev[j], self.comp.c) {
                    matrix.add_at(row, self.dm.scalar_global(Field::Phi, j), -self.comp.c);
                } else {
                    matrix.add_at(row, row, T::one());
                }
            }
        }
        matrix
    }

    fn local_size(&self) -> usize {
        let nu = self.dm.u_nodes_per_cell();
        let mixed = self.mode.kind.is_mixed();
        let multiplier = self.comp.with_multiplier_block();
        2 * nu + if mixed { 4 } else { 0 } + 4 + if multiplier { 4 } else { 0 }
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let nu = self.dm.u_nodes_per_cell();
        let p_off = 2 * nu;
        let phi_off = p_off + if self.mode.kind.is_mixed() { 4 } else { 0 };
        let tau_off = phi_off + 4;
        (p_off, phi_off, tau_off)
    }

    /// Point values needed by both kernels at one quadrature point.
    #[allow(clippy::type_complexity)]
    fn point_state(
        &self,
        cell: usize,
        q: usize,
        geo: &CellGeometry<T>,
        state: &SystemState<T>,
    ) -> PointState<T> {
        let nodes = self.mesh.cells()[cell].nodes;
        let scalars = self.dm.cell_u_scalars(cell);
        let u = state.block(&self.dm, Field::U);
        let mut grad_u = [[T::zero(); 2]; 2];
        for (i, &s) in scalars.iter().enumerate() {
            let g = geo.grad(self.u_tables.ref_grads[q][i]);
            for comp in 0..2 {
                let coeff = u[2 * s + comp];
                grad_u[comp][0] += coeff * g[0];
                grad_u[comp][1] += coeff * g[1];
            }
        }
        let phi_block = state.block(&self.dm, Field::Phi);
        let mut phi = T::zero();
        let mut grad_phi = [T::zero(); 2];
        let mut phi_prev = T::zero();
        let mut p = T::zero();
        for i in 0..4 {
            let n = self.q1_tables.values[q][i];
            let g = geo.grad(self.q1_tables.ref_grads[q][i]);
            let node = nodes[i];
            phi += n * phi_block[node];
            grad_phi[0] += g[0] * phi_block[node];
            grad_phi[1] += g[1] * phi_block[node];
            phi_prev += n * state.phi_prev[node];
        }
        if self.mode.kind.is_mixed() {
            let p_block = state.block(&self.dm, Field::P);
            for i in 0..4 {
                p += self.q1_tables.values[q][i] * p_block[nodes[i]];
            }
        }
        PointState {
            e: strain(grad_u),
            phi,
            grad_phi,
            phi_prev,
            p,
        }
    }

    /// Voigt strain `(e_xx, e_yy, e_xy)` of the test/trial displacement shape
    /// `i`, component `comp`, from its physical gradient.
    #[inline]
    fn shape_strain(g: [T; 2], comp: usize) -> [T; 3] {
        let half = T::lit(0.5);
        if comp == 0 {
            [g[0], T::zero(), half * g[1]]
        } else {
            [T::zero(), g[1], half * g[0]]
        }
    }

    #[inline]
    fn contract(sigma: &Strain2<T>, eps: &[T; 3]) -> T {
        sigma.xx * eps[0] + sigma.yy * eps[1] + T::lit(2.0) * sigma.xy * eps[2]
    }

    fn cell_residual(&self, cell: usize, state: &SystemState<T>, local: &mut [T]) {
        let geo = CellGeometry::of(self.mesh, cell);
        let (p_off, phi_off, tau_off) = self.offsets();
        let nu = self.dm.u_nodes_per_cell();
        let mat = &self.material;
        let kappa = mat.kappa;
        let mu_drive = if self.mode.use_mu_in_driving_force {
            mat.mu
        } else {
            T::one()
        };
        let mixed = self.mode.kind.is_mixed();

        for (q, &w) in self.rule.weights.iter().enumerate() {
            let jw = w * geo.det_j;
            let ps = self.point_state(cell, q, &geo, state);
            let g_deg = degradation(ps.phi, kappa);

            // Stress pair and crack driving force.
            let (sigma_eff, drive) = if mixed {
                let stress = stress_plus_minus(ps.e, ps.p, mat.mu);
                let split = spectral_split(ps.e);
                // Effective stress tested against E(w): g sigma+ + sigma-.
                let eff = Strain2 {
                    xx: g_deg * stress.sigma_plus.xx + stress.sigma_minus.xx,
                    yy: g_deg * stress.sigma_plus.yy + stress.sigma_minus.yy,
                    xy: g_deg * stress.sigma_plus.xy + stress.sigma_minus.xy,
                };
                let drive = T::lit(2.0) * mu_drive * split.tensile.ddot(&ps.e)
                    + stress.p_plus * ps.e.trace();
                (eff, drive)
            } else {
                let sigma = full_stress(ps.e, mat.lambda, mat.mu);
                let eff = sigma.scale(g_deg);
                let tr = ps.e.trace();
                let drive = T::lit(2.0) * mu_drive * ps.e.ddot(&ps.e) + mat.lambda * tr * tr;
                (eff, drive)
            };

            // Momentum block.
            for i in 0..nu {
                let g = geo.grad(self.u_tables.ref_grads[q][i]);
                for comp in 0..2 {
                    let eps = Self::shape_strain(g, comp);
                    local[2 * i + comp] += jw * Self::contract(&sigma_eff, &eps);
                }
            }

            // Pressure block.
            if mixed {
                let gf = if self.mode.degrade_pressure_mass {
                    g_deg
                } else {
                    T::one()
                };
                let val = gf * (ps.e.trace() - ps.p / mat.lambda);
                for i in 0..4 {
                    local[p_off + i] += jw * val * self.q1_tables.values[q][i];
                }
            }

            // Phase-field block.
            let bulk = (T::one() - kappa) * ps.phi * drive
                - mat.g_c / mat.epsilon * (T::one() - ps.phi);
            let pen = if self.comp.mode == IrreversibilityMode::SimplePenalty {
                self.comp.gamma_pen * (ps.phi - ps.phi_prev).max(T::zero())
            } else {
                T::zero()
            };
            for i in 0..4 {
                let n = self.q1_tables.values[q][i];
                let gq = geo.grad(self.q1_tables.ref_grads[q][i]);
                local[phi_off + i] += jw
                    * ((bulk + pen) * n
                        + mat.g_c
                            * mat.epsilon
                            * (ps.grad_phi[0] * gq[0] + ps.grad_phi[1] * gq[1]));
            }
        }

        // Multiplier coupling (tau, psi): diagonal in the biorthogonal basis,
        // cell weight = |cell|/4 = det_j for each corner node.
        if self.comp.with_multiplier_block() {
            let tau = state.block(&self.dm, Field::Tau);
            let nodes = self.mesh.cells()[cell].nodes;
            for i in 0..4 {
                local[phi_off + i] += geo.det_j * tau[nodes[i]];
            }
            let _ = tau_off;
        }
    }

    fn cell_jacobian(&self, cell: usize, state: &SystemState<T>, omega: T, local: &mut [T]) {
        let geo = CellGeometry::of(self.mesh, cell);
        let (p_off, phi_off, tau_off) = self.offsets();
        let nu = self.dm.u_nodes_per_cell();
        let nl = self.local_size();
        let mat = &self.material;
        let kappa = mat.kappa;
        let one_minus_kappa = T::one() - kappa;
        let two = T::lit(2.0);
        let mu_drive = if self.mode.use_mu_in_driving_force {
            mat.mu
        } else {
            T::one()
        };
        let mixed = self.mode.kind.is_mixed();
        let mut eps_table = vec![[T::zero(); 3]; 2 * nu];
        let mut tr_table = vec![T::zero(); 2 * nu];

        for (q, &w) in self.rule.weights.iter().enumerate() {
            let jw = w * geo.det_j;
            let ps = self.point_state(cell, q, &geo, state);
            let g_deg = degradation(ps.phi, kappa);
            let dg = degradation_derivative(ps.phi, kappa);

            for i in 0..nu {
                let g = geo.grad(self.u_tables.ref_grads[q][i]);
                for comp in 0..2 {
                    let eps = Self::shape_strain(g, comp);
                    eps_table[2 * i + comp] = eps;
                    tr_table[2 * i + comp] = eps[0] + eps[1];
                }
            }

            if mixed {
                let dproj = tensile_projection_derivative(ps.e);
                let split = spectral_split(ps.e);
                let stress = stress_plus_minus(ps.e, ps.p, mat.mu);
                let h_p = heaviside_inactive_at_zero(ps.p);
                let gf = if self.mode.degrade_pressure_mass {
                    g_deg
                } else {
                    T::one()
                };
                let drive = two * mu_drive * split.tensile.ddot(&ps.e)
                    + stress.p_plus * ps.e.trace();

                // (u, u) and (u, p), (u, phi).
                for jt in 0..2 * nu {
                    let eps_j = eps_table[jt];
                    // dE+ in direction eps_j.
                    let dep = apply3(&dproj, &eps_j);
                    // d sigma_eff = 2 mu [g dE+ + (eps_j - dE+)].
                    let dsig = [
                        two * mat.mu * (g_deg * dep[0] + eps_j[0] - dep[0]),
                        two * mat.mu * (g_deg * dep[1] + eps_j[1] - dep[1]),
                        two * mat.mu * (g_deg * dep[2] + eps_j[2] - dep[2]),
                    ];
                    for it in 0..2 * nu {
                        let eps_i = eps_table[it];
                        local[it * nl + jt] += jw
                            * (dsig[0] * eps_i[0]
                                + dsig[1] * eps_i[1]
                                + two * dsig[2] * eps_i[2]);
                    }
                    // (phi, u): derivative of the driving force.
                    let d_drive = two
                        * mu_drive
                        * (contract3(&dep, &ps.e) + Self::contract(&split.tensile, &eps_j))
                        + stress.p_plus * (eps_j[0] + eps_j[1]);
                    for i in 0..4 {
                        local[(phi_off + i) * nl + jt] += jw
                            * omega
                            * one_minus_kappa
                            * ps.phi
                            * d_drive
                            * self.q1_tables.values[q][i];
                    }
                    // (p, u).
                    for i in 0..4 {
                        local[(p_off + i) * nl + jt] +=
                            jw * gf * tr_table[jt] * self.q1_tables.values[q][i];
                    }
                }

                let coeff_up = g_deg * h_p + T::one() - h_p;
                for jp in 0..4 {
                    let nj = self.q1_tables.values[q][jp];
                    for it in 0..2 * nu {
                        local[it * nl + (p_off + jp)] += jw * coeff_up * nj * tr_table[it];
                    }
                    // (p, p).
                    for i in 0..4 {
                        local[(p_off + i) * nl + (p_off + jp)] -=
                            jw * gf / mat.lambda * nj * self.q1_tables.values[q][i];
                    }
                    // (phi, p).
                    for i in 0..4 {
                        local[(phi_off + i) * nl + (p_off + jp)] += jw
                            * omega
                            * one_minus_kappa
                            * ps.phi
                            * h_p
                            * ps.e.trace()
                            * nj
                            * self.q1_tables.values[q][i];
                    }
                }

                for jf in 0..4 {
                    let nj = self.q1_tables.values[q][jf];
                    // (u, phi).
                    for it in 0..2 * nu {
                        local[it * nl + (phi_off + jf)] += jw
                            * omega
                            * dg
                            * nj
                            * Self::contract(&stress.sigma_plus, &eps_table[it]);
                    }
                    // (p, phi): only present when the pressure equation is
                    // degraded.
                    if self.mode.degrade_pressure_mass {
                        let dval = dg * nj * (ps.e.trace() - ps.p / mat.lambda);
                        for i in 0..4 {
                            local[(p_off + i) * nl + (phi_off + jf)] +=
                                jw * omega * dval * self.q1_tables.values[q][i];
                        }
                    }
                }

                self.phi_phi_block(q, jw, drive, &ps, &geo, local, phi_off, nl);
            } else {
                let sigma = full_stress(ps.e, mat.lambda, mat.mu);
                let tr_e = ps.e.trace();
                let drive = two * mu_drive * ps.e.ddot(&ps.e) + mat.lambda * tr_e * tr_e;

                for jt in 0..2 * nu {
                    let eps_j = eps_table[jt];
                    let tr_j = tr_table[jt];
                    // (u, u): g [2 mu eps_j : eps_i + lambda tr_j tr_i].
                    for it in 0..2 * nu {
                        let eps_i = eps_table[it];
                        let dd = eps_j[0] * eps_i[0]
                            + eps_j[1] * eps_i[1]
                            + two * eps_j[2] * eps_i[2];
                        local[it * nl + jt] +=
                            jw * g_deg * (two * mat.mu * dd + mat.lambda * tr_j * tr_table[it]);
                    }
                    // (phi, u).
                    let d_drive = two * mu_drive * two * Self::contract(&ps.e, &eps_j)
                        + two * mat.lambda * tr_e * tr_j;
                    for i in 0..4 {
                        local[(phi_off + i) * nl + jt] += jw
                            * omega
                            * one_minus_kappa
                            * ps.phi
                            * d_drive
                            * self.q1_tables.values[q][i];
                    }
                }
                for jf in 0..4 {
                    let nj = self.q1_tables.values[q][jf];
                    for it in 0..2 * nu {
                        local[it * nl + (phi_off + jf)] +=
                            jw * omega * dg * nj * Self::contract(&sigma, &eps_table[it]);
                    }
                }
                self.phi_phi_block(q, jw, drive, &ps, &geo, local, phi_off, nl);
            }
        }

        // (phi, tau) coupling: diagonal with the cell pairing weight.
        if self.comp.with_multiplier_block() {
            for i in 0..4 {
                local[(phi_off + i) * nl + (tau_off + i)] += geo.det_j;
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn phi_phi_block(
        &self,
        q: usize,
        jw: T,
        drive: T,
        ps: &PointState<T>,
        geo: &CellGeometry<T>,
        local: &mut [T],
        phi_off: usize,
        nl: usize,
    ) {
        let mat = &self.material;
        let one_minus_kappa = T::one() - mat.kappa;
        let pen_h = if self.comp.mode == IrreversibilityMode::SimplePenalty {
            self.comp.gamma_pen * heaviside_inactive_at_zero(ps.phi - ps.phi_prev)
        } else {
            T::zero()
        };
        let mass_coeff = one_minus_kappa * drive + mat.g_c / mat.epsilon + pen_h;
        for jf in 0..4 {
            let nj = self.q1_tables.values[q][jf];
            let gj = geo.grad(self.q1_tables.ref_grads[q][jf]);
            for i in 0..4 {
                let ni = self.q1_tables.values[q][i];
                let gi = geo.grad(self.q1_tables.ref_grads[q][i]);
                local[(phi_off + i) * nl + (phi_off + jf)] += jw
                    * (mass_coeff * nj * ni
                        + mat.g_c * mat.epsilon * (gi[0] * gj[0] + gi[1] * gj[1]));
            }
        }
    }
}

/// Point values shared between residual and Jacobian kernels.
struct PointState<T> {
    e: Strain2<T>,
    phi: T,
    grad_phi: [T; 2],
    phi_prev: T,
    p: T,
}

#[inline]
fn apply3<T: Real>(m: &[[T; 3]; 3], v: &[T; 3]) -> [T; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

#[inline]
fn contract3<T: Real>(a: &[T; 3], e: &Strain2<T>) -> T {
    a[0] * e.xx + a[1] * e.yy + T::lit(2.0) * a[2] * e.xy
}
