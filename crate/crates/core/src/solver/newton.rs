//! Monolithic semi-smooth Newton iteration with backtracking line search on
//! the residual norm and a direct sparse solve per iteration.

use crate::fem::assembly::{apply_dirichlet_increment, ConstraintSet};
use crate::fem::sparse::norm2;
use crate::model::{FractureModel, SystemState};
use crate::scalar::Real;
use crate::solver::linear::{LinearSolveError, SparseLu};
use thiserror::Error;

/// Newton tolerances and line-search controls.
#[derive(Debug, Clone, Copy)]
pub struct NewtonSettings<T> {
    /// Absolute tolerance, scaled by `1 + ||r0||` of the step.
    pub tol_abs: T,
    /// Relative tolerance against the initial residual of the step.
    pub tol_rel: T,
    pub max_iter: usize,
    /// Backtracking factor.
    pub ls_backtrack: T,
    pub ls_max_cuts: usize,
    /// Sufficient-decrease constant: accept when
    /// `||r(x + a d)|| <= (1 - c a) ||r(x)||`.
    pub ls_sufficient_decrease: T,
    /// Largest phase-field increment per accepted iterate. During brutal
    /// crack growth undamped steps overshoot `phi` far below zero, where the
    /// quadratic degradation stiffens again and the iteration derails; the
    /// cap bounds the trial step instead (0 disables).
    pub phase_step_cap: T,
}

impl<T: Real> Default for NewtonSettings<T> {
    fn default() -> Self {
        Self {
            tol_abs: T::lit(1e-10),
            tol_rel: T::lit(1e-8),
            max_iter: 50,
            ls_backtrack: T::lit(0.5),
            ls_max_cuts: 10,
            ls_sufficient_decrease: T::lit(1e-4),
            phase_step_cap: T::lit(0.2),
        }
    }
}

/// Convergence record of one Newton solve.
#[derive(Debug, Clone)]
pub struct NewtonStats<T> {
    pub iterations: usize,
    /// Residual norms, including the initial one.
    pub residual_norms: Vec<T>,
    /// Line-search cuts per iteration.
    pub line_search_cuts: Vec<usize>,
    /// Active-set size per iteration (after the update).
    pub active_set_sizes: Vec<usize>,
    /// Whether the final two iterations saw identical active sets.
    pub active_set_stable: bool,
    /// Freshly assembled residual norm of the accepted state.
    pub final_residual: T,
}

#[derive(Debug, Error)]
pub enum NewtonError<T: Real> {
    #[error("Newton did not converge within {max_iter} iterations (residual {final_norm:e})")]
    NonConvergence { max_iter: usize, final_norm: T },
    #[error(transparent)]
    Linear(#[from] LinearSolveError),
}

/// Residual with Dirichlet rows replaced by the constraint violation
/// `state - value` (zero once the boundary data is enforced).
pub fn residual_with_bc<T: Real>(
    model: &FractureModel<'_, T>,
    state: &SystemState<T>,
    constraints: &ConstraintSet<T>,
) -> Vec<T> {
    let mut r = model.residual(state);
    for (dof, value) in constraints.iter() {
        r[dof] = state.dofs[dof] - value;
    }
    r
}

/// Semi-smooth Newton with active-set update in every iteration.
///
/// On line-search failure the full step is taken anyway; semi-smooth systems
/// may require crossing a ridge of the residual norm when the active set
/// changes, and the outer `max_iter` bound still guards the iteration.
pub fn newton_solve<T: Real>(
    model: &FractureModel<'_, T>,
    state: &mut SystemState<T>,
    constraints: &ConstraintSet<T>,
    settings: &NewtonSettings<T>,
) -> Result<NewtonStats<T>, NewtonError<T>> {
    let mut r = residual_with_bc(model, state, constraints);
    let norm0 = norm2(&r);
    let tol = (settings.tol_abs * (T::one() + norm0)).max(settings.tol_rel * norm0);

    let mut stats = NewtonStats {
        iterations: 0,
        residual_norms: vec![norm0],
        line_search_cuts: Vec::new(),
        active_set_sizes: Vec::new(),
        active_set_stable: false,
        final_residual: norm0,
    };
    let mut prev_active = model.active_set(state);

    // Coupling scale of the modified Newton: halved whenever the line search
    // fails outright, restored geometrically on clean steps. At omega = 0
    // the iteration is a robust block-decoupled solve on the exact residual.
    let mut omega = T::one();
    let omega_floor = T::lit(1e-3);

    let mut norm = norm0;
    while norm > tol {
        if stats.iterations >= settings.max_iter {
            return Err(NewtonError::NonConvergence {
                max_iter: settings.max_iter,
                final_norm: norm,
            });
        }
        let mut jac = model.jacobian_scaled_coupling(state, omega);
        let mut rhs: Vec<T> = r.iter().map(|&v| -v).collect();
        apply_dirichlet_increment(&mut jac, &mut rhs, constraints, &state.dofs);
        let lu = SparseLu::factor_with_order(&jac, model.column_order().to_vec())?;
        let delta = lu.solve(&rhs);

        // Trial step bounded by the phase-increment cap.
        let mut alpha_max = T::one();
        if settings.phase_step_cap > T::zero() {
            let mut dphi_max = T::zero();
            for i in model.dofmap().block(crate::fem::dofmap::Field::Phi) {
                dphi_max = dphi_max.max(delta[i].abs());
            }
            if dphi_max > settings.phase_step_cap {
                alpha_max = settings.phase_step_cap / dphi_max;
            }
        }

        // Backtracking line search on the residual norm; the (capped) full
        // step is tried first.
        let mut alpha = alpha_max;
        let mut cuts = 0usize;
        let mut accepted: Option<(SystemState<T>, Vec<T>, T)> = None;
        loop {
            let mut candidate = state.clone();
            for (x, &d) in candidate.dofs.iter_mut().zip(&delta) {
                *x += alpha * d;
            }
            let r_new = residual_with_bc(model, &candidate, constraints);
            let norm_new = norm2(&r_new);
            if norm_new <= (T::one() - settings.ls_sufficient_decrease * alpha) * norm {
                accepted = Some((candidate, r_new, norm_new));
                break;
            }
            if cuts >= settings.ls_max_cuts {
                break;
            }
            alpha *= settings.ls_backtrack;
            cuts += 1;
        }
        // Secondary acceptance when the residual search stalls: the natural
        // (affine-covariant) monotonicity test accepts a step whose
        // simplified Newton increment contracts, which carries the iteration
        // across the residual ridges of brutal crack growth. The
        // factorization of this iteration is reused.
        if accepted.is_none() {
            let delta_norm = norm2(&delta);
            let mut alpha = alpha_max;
            for _ in 0..=settings.ls_max_cuts {
                let mut candidate = state.clone();
                for (x, &d) in candidate.dofs.iter_mut().zip(&delta) {
                    *x += alpha * d;
                }
                let r_new = residual_with_bc(model, &candidate, constraints);
                let rhs_new: Vec<T> = r_new.iter().map(|&v| -v).collect();
                let simplified = lu.solve(&rhs_new);
                if norm2(&simplified) <= (T::one() - T::lit(0.5) * alpha) * delta_norm {
                    let n = norm2(&r_new);
                    accepted = Some((candidate, r_new, n));
                    break;
                }
                alpha *= settings.ls_backtrack;
            }
        }
        let (next, r_new, norm_new) = match accepted {
            Some(t) => {
                if cuts == 0 && omega < T::one() {
                    omega = (omega * T::lit(4.0)).min(T::one());
                }
                t
            }
            None => {
                if omega > omega_floor {
                    // Modified Newton: damp the cross coupling and redo the
                    // iteration from the same state.
                    omega = omega * T::lit(0.25);
                    if omega < omega_floor {
                        omega = T::zero();
                    }
                    stats.iterations += 1;
                    stats.residual_norms.push(norm);
                    stats.line_search_cuts.push(cuts);
                    stats
                        .active_set_sizes
                        .push(prev_active.iter().filter(|&&a| a).count());
                    continue;
                }
                // Non-monotone fallback: accept the capped trial step;
                // `max_iter` still bounds the iteration.
                cuts = settings.ls_max_cuts;
                let mut candidate = state.clone();
                for (x, &d) in candidate.dofs.iter_mut().zip(&delta) {
                    *x += alpha_max * d;
                }
                let r_new = residual_with_bc(model, &candidate, constraints);
                let n = norm2(&r_new);
                (candidate, r_new, n)
            }
        };
        *state = next;
        r = r_new;
        norm = norm_new;

        let active = model.active_set(state);
        stats.iterations += 1;
        stats.residual_norms.push(norm);
        stats.line_search_cuts.push(cuts);
        stats
            .active_set_sizes
            .push(active.iter().filter(|&&a| a).count());
        stats.active_set_stable = active == prev_active;
        prev_active = active;
    }

    // Residual certificate: a fresh assembly of the accepted state.
    let fresh = residual_with_bc(model, state, constraints);
    stats.final_residual = norm2(&fresh);
    Ok(stats)
}

/// Monolithic Newton with a staggered fallback.
///
/// The monolithic solve is attempted first. If it does not converge (brutal
/// crack growth makes the coupled residual landscape fold), the state is
/// restored and a few alternating sub-solves — elasticity with the phase
/// frozen, then phase/multiplier with the displacements frozen — produce a
/// warm start near the coupled root, after which the monolithic iteration is
/// run again. The accepted state always satisfies the full monolithic
/// tolerance.
pub fn newton_solve_robust<T: Real>(
    model: &FractureModel<'_, T>,
    state: &mut SystemState<T>,
    constraints: &ConstraintSet<T>,
    settings: &NewtonSettings<T>,
) -> Result<NewtonStats<T>, NewtonError<T>> {
    let checkpoint = state.clone();
    match newton_solve(model, state, constraints, settings) {
        Ok(stats) => Ok(stats),
        Err(NewtonError::Linear(e)) => Err(NewtonError::Linear(e)),
        Err(NewtonError::NonConvergence { .. }) => {
            *state = checkpoint;
            staggered_warmup(model, state, constraints, settings, 6)?;
            newton_solve(model, state, constraints, settings)
        }
    }
}

/// Alternating frozen-block sub-solves used as a warm start.
fn staggered_warmup<T: Real>(
    model: &FractureModel<'_, T>,
    state: &mut SystemState<T>,
    constraints: &ConstraintSet<T>,
    settings: &NewtonSettings<T>,
    sweeps: usize,
) -> Result<(), NewtonError<T>> {
    use crate::fem::dofmap::Field;
    let dm = model.dofmap();
    let sub_settings = NewtonSettings {
        tol_rel: T::lit(1e-6),
        max_iter: 30,
        ..*settings
    };
    for _ in 0..sweeps {
        // Elastic sweep: freeze phi and tau at their current values.
        let mut frozen: Vec<(usize, T)> = constraints.iter().collect();
        for i in dm.block(Field::Phi).chain(dm.block(Field::Tau)) {
            frozen.push((i, state.dofs[i]));
        }
        newton_solve(model, state, &ConstraintSet::new(frozen), &sub_settings)?;

        // Phase sweep: freeze the displacements and the pressure.
        let mut frozen: Vec<(usize, T)> = constraints.iter().collect();
        for i in dm.block(Field::U).chain(dm.block(Field::P)) {
            frozen.push((i, state.dofs[i]));
        }
        newton_solve(model, state, &ConstraintSet::new(frozen), &sub_settings)?;
    }
    Ok(())
}
