//! Incremental loading loop: update Dirichlet data, carry the previous phase
//! field, solve, and report per-step convergence.

use crate::fem::assembly::ConstraintSet;
use crate::fem::dofmap::Field;
use crate::model::{FractureModel, SystemState};
use crate::scalar::Real;
use crate::solver::newton::{newton_solve_robust, NewtonError, NewtonSettings, NewtonStats};
use thiserror::Error;

/// Loading increments `dt` up to the end time `t_end = N dt`.
#[derive(Debug, Clone, Copy)]
pub struct TimeLoopConfig<T> {
    pub dt: T,
    pub t_end: T,
    pub steps: usize,
}

#[derive(Debug, Error)]
pub enum TimeLoopError<T: Real> {
    #[error("dt = {dt} must be positive and divide the end time {t_end}")]
    BadIncrement { dt: T, t_end: T },
    #[error("step {step} (t = {time}) failed even after halving the increment: {source}")]
    StepFailed {
        step: usize,
        time: T,
        source: NewtonError<T>,
    },
}

impl<T: Real> TimeLoopConfig<T> {
    pub fn new(dt: T, t_end: T) -> Result<Self, TimeLoopError<T>> {
        if !(dt > T::zero()) || t_end < dt {
            return Err(TimeLoopError::BadIncrement { dt, t_end });
        }
        let steps_real = t_end / dt;
        let steps = steps_real.round().to_f64_lossy() as usize;
        let recon = T::of_usize(steps) * dt;
        if (recon - t_end).abs() > T::lit(1e-12) * t_end.max(T::one()) {
            return Err(TimeLoopError::BadIncrement { dt, t_end });
        }
        Ok(Self { dt, t_end, steps })
    }
}

/// Per-step convergence record.
#[derive(Debug, Clone)]
pub struct StepLog<T> {
    pub step: usize,
    pub time: T,
    pub iterations: usize,
    pub final_residual: T,
    pub line_search_cuts: usize,
    pub active_set_size: usize,
    pub active_set_stable: bool,
    pub substepped: bool,
}

/// Whole-run convergence history plus bound monitoring.
#[derive(Debug, Clone, Default)]
pub struct ConvergenceLog<T> {
    pub steps: Vec<StepLog<T>>,
    /// Largest nodal violation of `phi^n <= phi^{n-1}` seen across the run.
    pub max_irreversibility_violation: T,
    /// Warnings, e.g. phase-field bound violations beyond 1e-6.
    pub warnings: Vec<String>,
}

/// Final state plus history.
pub struct RunOutput<T> {
    pub state: SystemState<T>,
    pub log: ConvergenceLog<T>,
}

/// Run the incremental loading loop from the intact unloaded state.
pub fn run_time_loop<T: Real, D, S>(
    model: &FractureModel<'_, T>,
    config: &TimeLoopConfig<T>,
    settings: &NewtonSettings<T>,
    dirichlet_at: D,
    on_step: S,
) -> Result<RunOutput<T>, TimeLoopError<T>>
where
    D: FnMut(T) -> ConstraintSet<T>,
    S: FnMut(&SystemState<T>, &StepLog<T>),
{
    let initial = SystemState::intact(model.dofmap());
    run_time_loop_from(model, config, settings, initial, dirichlet_at, on_step)
}

/// Run the incremental loading loop from a given initial state.
///
/// `dirichlet_at(t)` supplies the constraint set of a loading time;
/// `on_step(state, log)` runs after every accepted step (load evaluation,
/// output). On non-convergence the step is retried once from the previous
/// converged state as two half increments, then the loop aborts.
pub fn run_time_loop_from<T: Real, D, S>(
    model: &FractureModel<'_, T>,
    config: &TimeLoopConfig<T>,
    settings: &NewtonSettings<T>,
    initial: SystemState<T>,
    mut dirichlet_at: D,
    mut on_step: S,
) -> Result<RunOutput<T>, TimeLoopError<T>>
where
    D: FnMut(T) -> ConstraintSet<T>,
    S: FnMut(&SystemState<T>, &StepLog<T>),
{
    let dm = model.dofmap();
    let mut state = initial;
    let mut log = ConvergenceLog {
        steps: Vec::with_capacity(config.steps),
        max_irreversibility_violation: T::zero(),
        warnings: Vec::new(),
    };

    for n in 1..=config.steps {
        let t_n = T::of_usize(n) * config.dt;
        state.commit_phase_field(dm);
        state.step = n;
        state.time = t_n;
        let checkpoint = state.clone();

        let constraints = dirichlet_at(t_n);
        let attempt = newton_solve_robust(model, &mut state, &constraints, settings);
        let (stats, substepped): (NewtonStats<T>, bool) = match attempt {
            Ok(stats) => (stats, false),
            Err(first_err) => {
                // Retry once with dt/2 sub-stepping from the previous state.
                log.warnings.push(format!(
                    "step {n}: retrying with halved increment after: {first_err}"
                ));
                state = checkpoint;
                let t_half = t_n - config.dt * T::lit(0.5);
                let c_half = dirichlet_at(t_half);
                newton_solve_robust(model, &mut state, &c_half, settings).map_err(|e| {
                    TimeLoopError::StepFailed {
                        step: n,
                        time: t_half,
                        source: e,
                    }
                })?;
                state.commit_phase_field(dm);
                let stats = newton_solve_robust(model, &mut state, &constraints, settings)
                    .map_err(|e| TimeLoopError::StepFailed {
                        step: n,
                        time: t_n,
                        source: e,
                    })?;
                (stats, true)
            }
        };

        monitor_bounds(dm, &state, n, &mut log);

        let step_log = StepLog {
            step: n,
            time: t_n,
            iterations: stats.iterations,
            final_residual: stats.final_residual,
            line_search_cuts: stats.line_search_cuts.iter().sum(),
            active_set_size: stats.active_set_sizes.last().copied().unwrap_or(0),
            active_set_stable: stats.active_set_stable,
            substepped,
        };
        on_step(&state, &step_log);
        log.steps.push(step_log);
    }

    Ok(RunOutput { state, log })
}

fn monitor_bounds<T: Real>(
    dm: &crate::fem::dofmap::DofMap,
    state: &SystemState<T>,
    step: usize,
    log: &mut ConvergenceLog<T>,
) {
    let phi = state.block(dm, Field::Phi);
    let mut max_violation = T::zero();
    let mut out_of_bounds = T::zero();
    for (j, &v) in phi.iter().enumerate() {
        let viol = v - state.phi_prev[j];
        if viol > max_violation {
            max_violation = viol;
        }
        let oob = (-v).max(v - T::one()).max(T::zero());
        if oob > out_of_bounds {
            out_of_bounds = oob;
        }
    }
    if max_violation > log.max_irreversibility_violation {
        log.max_irreversibility_violation = max_violation;
    }
    if out_of_bounds > T::lit(1e-6) {
        log.warnings.push(format!(
            "step {step}: phase field leaves [0,1] by {out_of_bounds:e}"
        ));
    }
}
