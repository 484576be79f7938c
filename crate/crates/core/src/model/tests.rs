//! Residual oracles and the finite-difference Jacobian check.

use super::*;
use crate::fem::dofmap::Field;
use crate::fem::sparse::norm2;
use crate::material::MaterialParams;
use crate::mesh::{build_shear_mesh, build_unit_square_mesh, Mesh};
use crate::model::assemble::FractureModel;
use approx::assert_relative_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn shear_material() -> MaterialParams<f64> {
    MaterialParams::from_poisson(0.29999, 80.77, 2.7e-3, 1e-10, 1.0).unwrap()
}

#[test]
fn complementarity_function_cases() {
    // Feasible inactive: tau = 0, phi below phi_prev.
    assert_eq!(complementarity_residual(0.0, 0.9, 1.0, 10.0), 0.0);
    // Active and consistent: tau > 0 at phi = phi_prev.
    assert_eq!(complementarity_residual(1.0, 1.0, 1.0, 5.0), 0.0);
    // Violated complementarity: positive tau with phi strictly below flags
    // the full tau as the KKT violation.
    let c: f64 = complementarity_residual(1.0, 0.9, 1.0, 10.0);
    assert!((c - 1.0).abs() < 1e-14, "got {c}");
    // Infeasible phi > phi_prev flags a nonzero residual.
    assert!(complementarity_residual(0.0, 1.1, 1.0, 10.0) != 0.0);
}

#[test]
fn active_set_predicate_matches_kink_convention() {
    // At the kink (argument exactly zero) the inactive branch is taken.
    assert!(!complementarity_active(0.0, 1.0, 1.0, 10.0));
    assert!(complementarity_active(1e-30, 1.0, 1.0, 10.0));
    assert!(!complementarity_active(1.0, 0.8, 1.0, 10.0));
}

fn model_on<'m>(
    mesh: &'m Mesh<f64>,
    mode: FormulationMode,
    comp: ComplementarityParams<f64>,
) -> FractureModel<'m, f64> {
    FractureModel::new(mesh, shear_material(), mode, comp).unwrap()
}

/// Interpolate closures into a state: `u(x)`, `p(x)`, `phi(x)`, `tau(x)`.
fn interpolate_state(
    mesh: &Mesh<f64>,
    model: &FractureModel<'_, f64>,
    u_fn: impl Fn([f64; 2]) -> [f64; 2],
    p_fn: impl Fn([f64; 2]) -> f64,
    phi_fn: impl Fn([f64; 2]) -> f64,
    tau_fn: impl Fn([f64; 2]) -> f64,
) -> SystemState<f64> {
    let dm = model.dofmap();
    let mut state = SystemState::intact(dm);
    for (s, x) in dm.u_scalar_coords(mesh).iter().enumerate() {
        let v = u_fn(*x);
        state.dofs[dm.u_global(s, 0)] = v[0];
        state.dofs[dm.u_global(s, 1)] = v[1];
    }
    for n in 0..mesh.n_nodes() {
        let x = mesh.node(n);
        state.dofs[dm.scalar_global(Field::Phi, n)] = phi_fn(x);
        if !dm.block(Field::P).is_empty() {
            state.dofs[dm.scalar_global(Field::P, n)] = p_fn(x);
        }
        if !dm.block(Field::Tau).is_empty() {
            state.dofs[dm.scalar_global(Field::Tau, n)] = tau_fn(x);
        }
    }
    state
}

#[test]
fn mixed_residual_vanishes_at_intact_unloaded_state() {
    let mesh = build_shear_mesh::<f64>(2, 1).unwrap();
    let comp = ComplementarityParams::multiplier_default(2.7e-3, 1.0);
    let model = model_on(&mesh, FormulationMode::mixed(), comp);
    let state = SystemState::intact(model.dofmap());
    let r = model.residual(&state);
    assert_relative_eq!(norm2(&r), 0.0, epsilon = 1e-13);
}

#[test]
fn standard_residual_vanishes_at_intact_unloaded_state() {
    let mesh = build_shear_mesh::<f64>(2, 1).unwrap();
    let comp = ComplementarityParams {
        gamma_pen: 0.0,
        ..ComplementarityParams::penalty_default(2.7e-3, 1.0)
    };
    let model = model_on(&mesh, FormulationMode::standard_q1q1(), comp);
    let state = SystemState::intact(model.dofmap());
    let r = model.residual(&state);
    assert_relative_eq!(norm2(&r), 0.0, epsilon = 1e-13);
}

#[test]
fn mixed_rejects_zero_lambda() {
    let mesh = build_unit_square_mesh::<f64>(2);
    let material = MaterialParams::from_poisson(0.0, 1.0, 1.0, 1e-10, 0.5).unwrap();
    let comp = ComplementarityParams::multiplier_default(1.0, 0.5);
    assert!(FractureModel::new(&mesh, material, FormulationMode::mixed(), comp).is_err());
}

#[test]
fn pressure_equation_root_is_lambda_for_unit_divergence() {
    // u = (x, 0), phi = 1: the pressure block vanishes exactly at p = lambda.
    let mesh = build_unit_square_mesh::<f64>(1);
    let comp = ComplementarityParams::multiplier_default(2.7e-3, 1.0);
    let model = model_on(&mesh, FormulationMode::mixed(), comp);
    let lambda = model.material.lambda;
    let state = interpolate_state(
        &mesh,
        &model,
        |x| [x[0], 0.0],
        |_| lambda,
        |_| 1.0,
        |_| 0.0,
    );
    let r = model.residual(&state);
    let dm = model.dofmap();
    let p_norm: f64 = dm.block(Field::P).map(|i| r[i] * r[i]).sum::<f64>().sqrt();
    assert_relative_eq!(p_norm, 0.0, epsilon = 1e-12);
}

#[test]
fn compressive_state_keeps_intact_phase_field() {
    // Uniform biaxial compression: E+ = 0 and p+ = 0, so phi = 1 stays a
    // root of the phase-field block with tau = 0.
    let mesh = build_unit_square_mesh::<f64>(2);
    let comp = ComplementarityParams::multiplier_default(2.7e-3, 1.0);
    let model = model_on(&mesh, FormulationMode::mixed(), comp);
    let lambda = model.material.lambda;
    let state = interpolate_state(
        &mesh,
        &model,
        |x| [-0.01 * x[0], -0.02 * x[1]],
        |_| lambda * (-0.03),
        |_| 1.0,
        |_| 0.0,
    );
    let r = model.residual(&state);
    let dm = model.dofmap();
    let phi_norm: f64 = dm
        .block(Field::Phi)
        .map(|i| r[i] * r[i])
        .sum::<f64>()
        .sqrt();
    assert_relative_eq!(phi_norm, 0.0, epsilon = 1e-12);
}

#[test]
fn standard_single_cell_constant_strain_matches_hand_integral() {
    // Unit cell, u = (a x, b y), phi = 1: the momentum residual reduces to
    // sigma_xx int dN_i/dx (x-rows) and sigma_yy int dN_i/dy (y-rows) with
    // integrals (+-1/2) per corner.
    let mesh = build_unit_square_mesh::<f64>(1);
    let comp = ComplementarityParams {
        gamma_pen: 0.0,
        ..ComplementarityParams::penalty_default(2.7e-3, 1.0)
    };
    let model = model_on(&mesh, FormulationMode::standard_q1q1(), comp);
    let (a, b) = (0.003, -0.001);
    let state = interpolate_state(
        &mesh,
        &model,
        |x| [a * x[0], b * x[1]],
        |_| 0.0,
        |_| 1.0,
        |_| 0.0,
    );
    let r = model.residual(&state);
    let (lambda, mu) = (model.material.lambda, model.material.mu);
    let sxx = 2.0 * mu * a + lambda * (a + b);
    let syy = 2.0 * mu * b + lambda * (a + b);
    // Hand integrals per counter-clockwise cell corner.
    let ix = [-0.5, 0.5, 0.5, -0.5];
    let iy = [-0.5, -0.5, 0.5, 0.5];
    let dm = model.dofmap();
    let corners = mesh.cells()[0].nodes;
    for (local, &node) in corners.iter().enumerate() {
        assert_relative_eq!(r[dm.u_global(node, 0)], sxx * ix[local], max_relative = 1e-12);
        assert_relative_eq!(r[dm.u_global(node, 1)], syy * iy[local], max_relative = 1e-12);
    }
}

#[test]
fn inactive_constraint_rows_are_identity_on_tau() {
    let mesh = build_unit_square_mesh::<f64>(2);
    let comp = ComplementarityParams::multiplier_default(2.7e-3, 1.0);
    let model = model_on(&mesh, FormulationMode::mixed(), comp);
    let state = SystemState::intact(model.dofmap());
    let jac = model.jacobian(&state);
    let dm = model.dofmap();
    for node in 0..mesh.n_nodes() {
        let row = dm.scalar_global(Field::Tau, node);
        let entries: Vec<(usize, f64)> = jac.row(row).filter(|&(_, v)| v != 0.0).collect();
        assert_eq!(entries, vec![(row, 1.0)]);
    }
}

#[test]
fn uu_block_is_symmetric_at_intact_state() {
    let mesh = build_shear_mesh::<f64>(2, 1).unwrap();
    let comp = ComplementarityParams::multiplier_default(2.7e-3, 1.0);
    let model = model_on(&mesh, FormulationMode::mixed(), comp);
    let state = SystemState::intact(model.dofmap());
    let jac = model.jacobian(&state);
    let dm = model.dofmap();
    let u_range = dm.block(Field::U);
    for i in u_range.clone() {
        for (j, v) in jac.row(i) {
            if u_range.contains(&j) {
                let vt = jac.get(j, i);
                assert_relative_eq!(v, vt, max_relative = 1e-12, epsilon = 1e-12);
            }
        }
    }
}

/// Construct a smooth state with margins away from every kink: distinct
/// nonzero strain eigenvalues, pressure bounded away from zero, and
/// complementarity arguments bounded away from the active-set boundary.
fn kink_clear_state(
    mesh: &Mesh<f64>,
    model: &FractureModel<'_, f64>,
    pressure_sign: f64,
) -> SystemState<f64> {
    let c = model.comp.c;
    let lambda = model.material.lambda;
    let mut state = interpolate_state(
        mesh,
        model,
        |x| {
            [
                0.004 * x[0] + 0.0021 * x[1] + 0.0013 * x[0] * x[1] / 10.0,
                -0.0017 * x[1] + 0.0009 * x[0] + 0.0004 * x[0] * x[0] / 10.0,
            ]
        },
        |x| pressure_sign * lambda * 1e-3 * (1.5 + 0.3 * (x[0] / 10.0)),
        |x| 0.85 + 0.1 * (x[0] / 10.0) - 0.05 * (x[1] / 10.0),
        |_| 0.0,
    );
    // Split nodes between strictly active (tau > 0, phi = phi_prev) and
    // strictly inactive (tau = 0, phi < phi_prev).
    let dm = model.dofmap();
    for n in 0..mesh.n_nodes() {
        let phi = state.dofs[dm.scalar_global(Field::Phi, n)];
        if n % 3 == 0 {
            state.dofs[dm.scalar_global(Field::Tau, n)] = 2.0 * c * 0.05;
            state.phi_prev[n] = phi;
        } else {
            state.dofs[dm.scalar_global(Field::Tau, n)] = 0.0;
            state.phi_prev[n] = phi + 0.1;
        }
    }
    state
}

/// Verify the margins the FD check relies on; panics if the constructed
/// state is kink-adjacent anywhere.
fn assert_kink_margins(mesh: &Mesh<f64>, model: &FractureModel<'_, f64>, state: &SystemState<f64>) {
    use crate::fem::assembly::{eval_grad_u, eval_scalar_q1, CellGeometry};
    use crate::material::{spectral_split, strain};
    let dm = model.dofmap();
    let rule = crate::fem::quadrature::gauss_rule::<f64>(3);
    let u = state.block(dm, Field::U);
    let p_block: Vec<f64> = (0..mesh.n_nodes())
        .map(|n| state.dofs[dm.scalar_global(Field::P, n)])
        .collect();
    for cell in 0..mesh.n_cells() {
        let geo = CellGeometry::of(mesh, cell);
        let _ = geo;
        for &r in &rule.points {
            let e = strain(eval_grad_u(mesh, dm, cell, r, u));
            let s = spectral_split(e);
            let gap = s.eigenvalues[0] - s.eigenvalues[1];
            assert!(gap > 1e-5, "eigen gap too small: {gap}");
            assert!(
                s.eigenvalues[0].abs() > 1e-6 && s.eigenvalues[1].abs() > 1e-6,
                "eigenvalue near the tensile kink: {:?}",
                s.eigenvalues
            );
            let p = eval_scalar_q1(mesh, cell, r, &p_block);
            assert!(p.abs() > 1e-4, "pressure near the max kink: {p}");
        }
    }
    let phi = state.block(dm, Field::Phi);
    let tau = state.block(dm, Field::Tau);
    for n in 0..mesh.n_nodes() {
        let arg = tau[n] + model.comp.c * (phi[n] - state.phi_prev[n]);
        assert!(
            arg.abs() > 1e-8 * (1.0 + model.comp.c),
            "complementarity argument near the kink at node {n}: {arg}"
        );
    }
}

#[test]
fn jacobian_matches_central_finite_differences() {
    let mesh = build_shear_mesh::<f64>(2, 2).unwrap();
    for pressure_sign in [1.0, -1.0] {
        let comp = ComplementarityParams::multiplier_default(2.7e-3, 1.0);
        let model = model_on(&mesh, FormulationMode::mixed(), comp);
        let dm = model.dofmap();
        let state = kink_clear_state(&mesh, &model, pressure_sign);
        assert_kink_margins(&mesh, &model, &state);

        let jac = model.jacobian(&state);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        // Block-scaled perturbation magnitudes.
        let scales = {
            let mut s = vec![0.0; dm.n_total()];
            for (field, scale) in [
                (Field::U, 1e-2),
                (Field::P, model.material.lambda * 1e-3),
                (Field::Phi, 1e-1),
                (Field::Tau, model.comp.c * 1e-2),
            ] {
                for i in dm.block(field) {
                    s[i] = scale;
                }
            }
            s
        };
        let h = 1e-6;
        for _ in 0..10 {
            let v: Vec<f64> = scales
                .iter()
                .map(|&s| s * rng.gen_range(-1.0..1.0))
                .collect();
            let jv = jac.matvec(&v);
            let mut plus = state.clone();
            let mut minus = state.clone();
            for i in 0..dm.n_total() {
                plus.dofs[i] += h * v[i];
                minus.dofs[i] -= h * v[i];
            }
            let rp = model.residual(&plus);
            let rm = model.residual(&minus);
            let scale_ref = norm2(&jv).max(1e-12);
            for i in 0..dm.n_total() {
                let fd = (rp[i] - rm[i]) / (2.0 * h);
                assert!(
                    (jv[i] - fd).abs() <= 1e-4 * scale_ref,
                    "row {i}: analytic {} vs fd {} (pressure_sign {pressure_sign})",
                    jv[i],
                    fd
                );
            }
        }
    }
}

#[test]
fn standard_jacobian_matches_finite_differences() {
    let mesh = build_shear_mesh::<f64>(2, 1).unwrap();
    for mode in [
        FormulationMode::standard_q1q1(),
        FormulationMode::standard_q2q1(),
    ] {
        let comp = ComplementarityParams::multiplier_default(2.7e-3, 1.0);
        let model = model_on(&mesh, mode, comp);
        let dm = model.dofmap();
        let mut state = interpolate_state(
            &mesh,
            &model,
            |x| [0.002 * x[0] + 0.001 * x[1], -0.0013 * x[1] + 0.0006 * x[0]],
            |_| 0.0,
            |x| 0.9 - 0.08 * (x[1] / 10.0),
            |_| 0.0,
        );
        for n in 0..mesh.n_nodes() {
            let phi = state.dofs[dm.scalar_global(Field::Phi, n)];
            if n % 2 == 0 {
                state.dofs[dm.scalar_global(Field::Tau, n)] = 1e-3;
                state.phi_prev[n] = phi;
            } else {
                state.phi_prev[n] = phi + 0.05;
            }
        }
        let jac = model.jacobian(&state);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = 1e-6;
        for _ in 0..5 {
            let v: Vec<f64> = (0..dm.n_total())
                .map(|i| {
                    let (field, _) = dm.classify(i);
                    let s = match field {
                        Field::U => 1e-2,
                        Field::Phi => 1e-1,
                        Field::Tau => 1e-3,
                        Field::P => 0.0,
                    };
                    s * rng.gen_range(-1.0..1.0)
                })
                .collect();
            let jv = jac.matvec(&v);
            let mut plus = state.clone();
            let mut minus = state.clone();
            for i in 0..dm.n_total() {
                plus.dofs[i] += h * v[i];
                minus.dofs[i] -= h * v[i];
            }
            let rp = model.residual(&plus);
            let rm = model.residual(&minus);
            let scale_ref = norm2(&jv).max(1e-12);
            for i in 0..dm.n_total() {
                let fd = (rp[i] - rm[i]) / (2.0 * h);
                assert!(
                    (jv[i] - fd).abs() <= 1e-4 * scale_ref,
                    "row {i}: analytic {} vs fd {}",
                    jv[i],
                    fd
                );
            }
        }
    }
}

#[test]
fn penalty_mode_has_no_tau_block_and_penalizes_healing() {
    let mesh = build_unit_square_mesh::<f64>(2);
    let comp = ComplementarityParams::penalty_default(2.7e-3, 1.0);
    let model = model_on(&mesh, FormulationMode::standard_q1q1(), comp);
    let dm = model.dofmap();
    assert!(dm.block(Field::Tau).is_empty());
    // phi above phi_prev triggers the penalty in the phi residual.
    let mut state = interpolate_state(&mesh, &model, |_| [0.0, 0.0], |_| 0.0, |_| 1.0, |_| 0.0);
    for v in &mut state.phi_prev {
        *v = 0.9;
    }
    let r = model.residual(&state);
    let phi_norm: f64 = dm
        .block(Field::Phi)
        .map(|i| r[i] * r[i])
        .sum::<f64>()
        .sqrt();
    assert!(phi_norm > 0.0, "penalty must resist healing");
}

#[test]
fn build_displacement_constraints_covers_q2_edge_dofs() {
    let mesh = build_shear_mesh::<f64>(4, 0).unwrap();
    let comp = ComplementarityParams::multiplier_default(2.7e-3, 1.0);
    let model = model_on(&mesh, FormulationMode::mixed(), comp);
    let dm = model.dofmap();
    let constraints = build_displacement_constraints(
        &mesh,
        dm,
        &[
            BoundaryDisplacement {
                tag: crate::mesh::BoundaryTag::Bottom,
                ux: Some(0.0),
                uy: Some(0.0),
            },
            BoundaryDisplacement {
                tag: crate::mesh::BoundaryTag::Top,
                ux: Some(0.5),
                uy: Some(0.0),
            },
        ],
    )
    .unwrap();
    // Bottom: 4 facets -> 9 scalar dofs x 2 comps; Top likewise, but the
    // corner dofs overlap between facets within a tag.
    assert_eq!(constraints.len(), 2 * (9 + 9));
    // Unknown tag errors.
    assert!(build_displacement_constraints(
        &mesh,
        dm,
        &[BoundaryDisplacement {
            tag: crate::mesh::BoundaryTag::GammaUy,
            ux: None,
            uy: Some(1.0),
        }]
    )
    .is_err());
}
