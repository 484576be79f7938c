//! Weak-form residuals and Jacobians for the classical and the mixed
//! phase-field fracture systems, Dirichlet handling, and the semi-smooth
//! complementarity treatment of crack irreversibility.

mod assemble;
#[cfg(test)]
mod tests;

pub use assemble::{FractureModel, ModelError};

use crate::fem::assembly::ConstraintSet;
use crate::fem::dofmap::{DofMap, ElementPairing, Field};
use crate::mesh::{BoundaryTag, Mesh};
use crate::scalar::Real;

/// Which discrete system is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormulationKind {
    /// Classical displacement/phase-field system with `Q1` displacements.
    StandardQ1Q1,
    /// Classical system with biquadratic displacements.
    StandardQ2Q1,
    /// Mixed displacement/pressure system, `Q2 Q1 Q1 Q1*`.
    MixedQ2Q1Q1Q1Star,
}

impl FormulationKind {
    pub fn pairing(self) -> ElementPairing {
        match self {
            FormulationKind::StandardQ1Q1 => ElementPairing::Q1Q1,
            FormulationKind::StandardQ2Q1 => ElementPairing::Q2Q1,
            FormulationKind::MixedQ2Q1Q1Q1Star => ElementPairing::MixedQ2Q1Q1Q1Star,
        }
    }

    pub fn is_mixed(self) -> bool {
        matches!(self, FormulationKind::MixedQ2Q1Q1Q1Star)
    }
}

/// Formulation switches.
///
/// The printed variants of the mixed system differ in whether the pressure
/// equation carries `g(phi)` and whether the crack driving force carries the
/// shear modulus; the defaults follow the discrete formulation (both on).
#[derive(Debug, Clone, Copy)]
pub struct FormulationMode {
    pub kind: FormulationKind,
    /// `g(phi)` inside the pressure equation.
    pub degrade_pressure_mass: bool,
    /// `2 mu` (instead of bare `2`) in the crack driving force.
    pub use_mu_in_driving_force: bool,
}

impl FormulationMode {
    pub fn standard_q1q1() -> Self {
        Self {
            kind: FormulationKind::StandardQ1Q1,
            degrade_pressure_mass: true,
            use_mu_in_driving_force: true,
        }
    }

    pub fn standard_q2q1() -> Self {
        Self {
            kind: FormulationKind::StandardQ2Q1,
            degrade_pressure_mass: true,
            use_mu_in_driving_force: true,
        }
    }

    pub fn mixed() -> Self {
        Self {
            kind: FormulationKind::MixedQ2Q1Q1Q1Star,
            degrade_pressure_mass: true,
            use_mu_in_driving_force: true,
        }
    }
}

/// How the irreversibility constraint `phi^n <= phi^{n-1}` is imposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IrreversibilityMode {
    /// Lagrange multiplier with nodal complementarity rows.
    Multiplier,
    /// Simple penalization `gamma_pen ([phi - phi_prev]+, psi)`.
    SimplePenalty,
}

/// Parameters of the semi-smooth complementarity treatment.
#[derive(Debug, Clone, Copy)]
pub struct ComplementarityParams<T> {
    pub mode: IrreversibilityMode,
    /// Scaling of the nonlinear complementarity function; `100 G_c / eps`
    /// by default.
    pub c: T,
    /// Penalty weight for [`IrreversibilityMode::SimplePenalty`];
    /// `1e5 G_c / eps` by default.
    pub gamma_pen: T,
}

impl<T: Real> ComplementarityParams<T> {
    pub fn multiplier_default(g_c: T, epsilon: T) -> Self {
        Self {
            mode: IrreversibilityMode::Multiplier,
            c: T::lit(100.0) * g_c / epsilon,
            gamma_pen: T::lit(1e5) * g_c / epsilon,
        }
    }

    pub fn penalty_default(g_c: T, epsilon: T) -> Self {
        Self {
            mode: IrreversibilityMode::SimplePenalty,
            ..Self::multiplier_default(g_c, epsilon)
        }
    }

    pub fn with_multiplier_block(&self) -> bool {
        self.mode == IrreversibilityMode::Multiplier
    }
}

/// Nonlinear complementarity function for one constrained dof:
/// `C = tau - max(0, tau + c (phi - phi_prev))`.
///
/// `C = 0` holds exactly when `tau >= 0`, `phi <= phi_prev` and
/// `tau (phi - phi_prev) = 0`.
#[inline]
pub fn complementarity_residual<T: Real>(tau: T, phi: T, phi_prev: T, c: T) -> T {
    tau - (tau + c * (phi - phi_prev)).max(T::zero())
}

/// Active-set predicate matching [`complementarity_residual`]; the kink is
/// resolved to the inactive branch.
#[inline]
pub fn complementarity_active<T: Real>(tau: T, phi: T, phi_prev: T, c: T) -> bool {
    tau + c * (phi - phi_prev) > T::zero()
}

/// Coefficient vectors for `(u, p, phi, tau)` at a load step plus the
/// previous-step phase field.
#[derive(Debug, Clone)]
pub struct SystemState<T> {
    /// Full coefficient vector, laid out per the dof map blocks.
    pub dofs: Vec<T>,
    /// Previous-step phase field, one value per mesh node; immutable within
    /// a step.
    pub phi_prev: Vec<T>,
    /// Load step index.
    pub step: usize,
    /// Time of this step, s.
    pub time: T,
}

impl<T: Real> SystemState<T> {
    /// Intact unloaded state: `u = 0`, `p = 0`, `phi = 1`, `tau = 0`.
    pub fn intact(dm: &DofMap) -> Self {
        let mut dofs = vec![T::zero(); dm.n_total()];
        for i in dm.block(Field::Phi) {
            dofs[i] = T::one();
        }
        Self {
            dofs,
            phi_prev: vec![T::one(); dm.n_nodes()],
            step: 0,
            time: T::zero(),
        }
    }

    pub fn block<'a>(&'a self, dm: &DofMap, field: Field) -> &'a [T] {
        &self.dofs[dm.block(field)]
    }

    pub fn phi<'a>(&'a self, dm: &DofMap) -> &'a [T] {
        self.block(dm, Field::Phi)
    }

    /// Copy the current phase field into `phi_prev` (start of a new step).
    pub fn commit_phase_field(&mut self, dm: &DofMap) {
        let range = dm.block(Field::Phi);
        self.phi_prev.clear();
        self.phi_prev.extend_from_slice(&self.dofs[range]);
    }
}

/// Component-wise Dirichlet data on one boundary tag; `None` leaves the
/// component unconstrained.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryDisplacement<T> {
    pub tag: BoundaryTag,
    pub ux: Option<T>,
    pub uy: Option<T>,
}

/// Build displacement constraints from per-tag component values. Every
/// displacement dof on a tagged facet (corner and, for `Q2`, edge-midpoint
/// dofs) is constrained; `phi` and `tau` never carry boundary conditions.
pub fn build_displacement_constraints<T: Real>(
    mesh: &Mesh<T>,
    dm: &DofMap,
    specs: &[BoundaryDisplacement<T>],
) -> Result<ConstraintSet<T>, crate::fem::norms::UnknownTag> {
    let mut entries: Vec<(usize, T)> = Vec::new();
    for spec in specs {
        if !mesh.has_tag(spec.tag) {
            return Err(crate::fem::norms::UnknownTag(spec.tag));
        }
        for facet in mesh.facets_with_tag(spec.tag) {
            for s in dm.facet_u_scalars(facet) {
                if let Some(v) = spec.ux {
                    entries.push((dm.u_global(s, 0), v));
                }
                if let Some(v) = spec.uy {
                    entries.push((dm.u_global(s, 1), v));
                }
            }
        }
    }
    // Later entries win on conflicts only if values differ; `ConstraintSet`
    // dedups by dof. Corner dofs shared by two tags receive both pushes; the
    // scenario definitions keep them consistent (fixed corners are zero on
    // both sides).
    Ok(ConstraintSet::new(entries))
}

/// Euclidean norms of the four residual blocks `(u, p, phi, tau)`.
pub fn block_norms<T: Real>(dm: &DofMap, r: &[T]) -> [T; 4] {
    let norm_of = |field: Field| -> T {
        let range = dm.block(field);
        r[range].iter().map(|&v| v * v).sum::<T>().sqrt()
    };
    [
        norm_of(Field::U),
        norm_of(Field::P),
        norm_of(Field::Phi),
        norm_of(Field::Tau),
    ]
}

