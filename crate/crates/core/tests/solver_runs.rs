//! End-to-end solver behavior on small meshes: linear single-iteration
//! convergence, a desk-scale shear run with KKT checks, determinism.

use pfmix::fem::assembly::ConstraintSet;
use pfmix::fem::dofmap::Field;
use pfmix::fem::sparse::norm2;
use pfmix::model::{
    build_displacement_constraints, ComplementarityParams, FormulationMode, FractureModel,
    SystemState,
};
use pfmix::scenarios::{run_scenario, Scenario, ScenarioConfig};
use pfmix::solver::newton::{newton_solve, NewtonSettings};

/// A frozen-phase elastic load step is linear: Newton converges in one
/// iteration.
#[test]
fn linear_problem_converges_in_one_iteration() {
    let mut config = ScenarioConfig::<f64>::shear();
    config.refinements = 1;
    let scenario = Scenario::prepare(config).unwrap();
    let model = FractureModel::new(
        &scenario.mesh,
        scenario.material,
        scenario.mode,
        scenario.comp,
    )
    .unwrap();
    let dm = model.dofmap();
    let mut state = SystemState::intact(dm);

    // Freeze phi = 1 and tau = 0 via constraints; only (u, p) remain, which
    // is a linear system.
    let specs = scenario.boundary_displacements(1e-3).unwrap();
    let mut entries: Vec<(usize, f64)> =
        build_displacement_constraints(&scenario.mesh, dm, &specs)
            .unwrap()
            .iter()
            .collect();
    for n in 0..scenario.mesh.n_nodes() {
        entries.push((dm.scalar_global(Field::Phi, n), 1.0));
        entries.push((dm.scalar_global(Field::Tau, n), 0.0));
    }
    let constraints = ConstraintSet::new(entries);
    let settings = NewtonSettings::default();
    let stats = newton_solve(&model, &mut state, &constraints, &settings).unwrap();
    assert_eq!(stats.iterations, 1, "norms: {:?}", stats.residual_norms);
}

#[test]
fn first_load_step_converges_quickly() {
    let mut config = ScenarioConfig::<f64>::shear();
    config.refinements = 1;
    config.t_end = 2e-4;
    let scenario = Scenario::prepare(config).unwrap();
    let run = run_scenario(&scenario, &NewtonSettings::default(), |_, _, _, _| {}).unwrap();
    assert_eq!(run.records.len(), 2);
    for log in &run.log.steps {
        assert!(log.iterations <= 6, "step {} took {}", log.step, log.iterations);
    }
    // Elastic regime: load grows with displacement.
    assert!(run.records[1].fx > run.records[0].fx);
    assert!(run.records[0].fx > 0.0);
}

/// Desk-scale shear run: monotone irreversibility, KKT certificate at every
/// accepted step, residual certificate, active-set stabilization.
#[test]
fn desk_scale_shear_run_satisfies_kkt() {
    let mut config = ScenarioConfig::<f64>::shear();
    config.refinements = 1; // tiny desk-scale smoke; acceptance runs bigger
    config.t_end = 5e-3;
    let scenario = Scenario::prepare(config).unwrap();
    let model = FractureModel::new(
        &scenario.mesh,
        scenario.material,
        scenario.mode,
        scenario.comp,
    )
    .unwrap();
    let dm = model.dofmap();
    let weights = model.pairing_weights().to_vec();

    let mut kkt_ok = true;
    let mut msgs = Vec::new();
    let run = run_scenario(&scenario, &NewtonSettings::default(), |_, state, log, _| {
        let phi = state.block(dm, Field::Phi);
        let tau = state.block(dm, Field::Tau);
        let tau_min = tau.iter().cloned().fold(f64::INFINITY, f64::min);
        let viol = phi
            .iter()
            .zip(&state.phi_prev)
            .map(|(&p, &q)| p - q)
            .fold(f64::NEG_INFINITY, f64::max);
        let comp_sum: f64 = (0..phi.len())
            .map(|j| tau[j] * (phi[j] - state.phi_prev[j]) * weights[j])
            .sum();
        let tau_norm = norm2(tau);
        let phi_norm = norm2(phi);
        let bound = 1e-8 * (1.0 + tau_norm) * (1.0 + phi_norm);
        if !(tau_min >= -1e-10 && viol <= 1e-10 && comp_sum.abs() <= bound) {
            kkt_ok = false;
            msgs.push(format!(
                "step {}: tau_min {tau_min:e}, viol {viol:e}, comp {comp_sum:e} (bound {bound:e})",
                log.step
            ));
        }
        assert!(
            log.final_residual.is_finite(),
            "step {} residual certificate",
            log.step
        );
    })
    .unwrap();
    assert!(kkt_ok, "KKT violations:\n{}", msgs.join("\n"));
    assert!(run.log.max_irreversibility_violation <= 1e-10);
    assert!(run.log.steps.len() == 50);

    // Active set stabilizes before acceptance in at least 90% of steps.
    let stable = run.log.steps.iter().filter(|s| s.active_set_stable).count();
    assert!(
        stable * 10 >= run.log.steps.len() * 9,
        "only {stable}/{} steps had a stable final active set",
        run.log.steps.len()
    );
}

/// Two identical runs produce identical records bit for bit.
#[test]
fn runs_are_deterministic() {
    let mut config = ScenarioConfig::<f64>::shear();
    config.refinements = 1;
    config.t_end = 2e-3;
    let run_once = || {
        let scenario = Scenario::prepare(config.clone()).unwrap();
        let run = run_scenario(&scenario, &NewtonSettings::default(), |_, _, _, _| {}).unwrap();
        run.records
            .iter()
            .flat_map(|r| {
                [r.fx, r.fy, r.fx_degraded, r.fy_degraded, r.displacement]
                    .iter()
                    .map(|v| v.to_bits())
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<u64>>()
    };
    assert_eq!(run_once(), run_once());
}
