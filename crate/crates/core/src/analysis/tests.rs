//! Oracles for the analysis module: manufactured convergence, mixed/primal
//! consistency, and eigenproblem-based inf-sup checks.

use super::*;
use crate::fem::dofmap::{DofMap, ElementPairing};
use crate::fem::norms::l2_error_u;
use crate::material::lame_from_poisson;
use crate::mesh::{build_unit_square_mesh, translate_mesh};
use approx::assert_relative_eq;

#[test]
fn zero_data_gives_zero_solution() {
    let mesh = build_unit_square_mesh::<f64>(3);
    let zero_f = |_: [f64; 2]| [0.0, 0.0];
    let u = solve_decoupled_primal(
        &mesh,
        1.5,
        1.0,
        1e-10,
        ElementPairing::Q2Q1,
        &|_| 1.0,
        &zero_f,
        &zero_f,
    )
    .unwrap();
    assert!(u.iter().all(|v| v.abs() < 1e-12));
    let (u, p) = solve_decoupled_mixed(
        &mesh,
        1.5,
        1.0,
        1e-10,
        ElementPairing::Q2Q1,
        &|_| 1.0,
        &zero_f,
        &zero_f,
    )
    .unwrap();
    assert!(u.iter().all(|v| v.abs() < 1e-12));
    assert!(p.iter().all(|v| v.abs() < 1e-10));
}

#[test]
fn fully_cracked_coefficient_is_still_solvable() {
    // phi = 0 leaves g = kappa > 0; the scaled system solves and reproduces
    // the same solution as g = 1 when the data scales accordingly.
    let mesh = build_unit_square_mesh::<f64>(3);
    let kappa = 1e-6;
    let u = solve_decoupled_primal(
        &mesh,
        2.0,
        1.0,
        kappa,
        ElementPairing::Q2Q1,
        &|_| 0.0,
        &|x| {
            let f = Manufactured::Sinusoidal.body_force(x, 2.0, 1.0);
            [f[0] * kappa, f[1] * kappa]
        },
        &|_| [0.0, 0.0],
    )
    .unwrap();
    assert!(u.iter().any(|v| v.abs() > 1e-6), "system must not be trivial");
    assert!(u.iter().all(|v| v.is_finite()));
}

#[test]
fn primal_convergence_orders() {
    // Sinusoidal manufactured solution: Q1 converges at order >= 2 in L2,
    // Q2 at order >= 3.
    let q1 = convergence_study(
        Method::PrimalQ1,
        Manufactured::Sinusoidal,
        0.3,
        &[4, 8, 16],
    )
    .unwrap();
    let orders = q1.l2_orders();
    assert!(
        orders.iter().all(|&o| o > 1.8),
        "Q1 orders too low: {orders:?}"
    );
    let q2 = convergence_study(
        Method::PrimalQ2,
        Manufactured::Sinusoidal,
        0.3,
        &[4, 8, 16],
    )
    .unwrap();
    let orders = q2.l2_orders();
    assert!(
        orders.iter().all(|&o| o > 2.8),
        "Q2 orders too low: {orders:?}"
    );
}

#[test]
fn mixed_divergence_free_solution_has_vanishing_pressure() {
    let mesh = build_unit_square_mesh::<f64>(8);
    let (lambda, mu) = (lame_from_poisson(0.3, 1.0).unwrap(), 1.0);
    let m = Manufactured::DivergenceFree;
    let (u, p) = solve_decoupled_mixed(
        &mesh,
        lambda,
        mu,
        1e-10,
        ElementPairing::Q2Q1,
        &|_| 1.0,
        &|x| m.body_force(x, lambda, mu),
        &|x| m.value(x),
    )
    .unwrap();
    // p = lambda * projection of div u; the exact solution is divergence
    // free, so the discrete pressure tends to zero with the mesh.
    let p_max = p.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
    let u_scale = u.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
    assert!(
        p_max < 5e-2 * lambda * u_scale.max(1e-9),
        "pressure too large: {p_max}"
    );
}

#[test]
fn mixed_unit_divergence_reproduces_lambda_pressure() {
    // u* = (x, 0): div u = 1, f = 0 and p = lambda at every pressure dof.
    let mesh = build_unit_square_mesh::<f64>(2);
    let lambda = 2.5;
    let (u, p) = solve_decoupled_mixed(
        &mesh,
        lambda,
        1.0,
        1e-10,
        ElementPairing::Q2Q1,
        &|_| 1.0,
        &|_| [0.0, 0.0],
        &|x| [x[0], 0.0],
    )
    .unwrap();
    for &pi in &p {
        assert_relative_eq!(pi, lambda, max_relative = 1e-9);
    }
    // And u reproduces the linear field exactly.
    let dm = DofMap::build(&mesh, ElementPairing::Q2Q1, false);
    let err = l2_error_u(&mesh, &dm, &u, |x| [x[0], 0.0]);
    assert!(err < 1e-10, "u error {err}");
}

#[test]
fn mixed_solution_satisfies_pressure_projection_identity() {
    // Eliminating p from the mixed solution reproduces the weighted
    // projection identity p = lambda P_g(div u) to solver accuracy.
    let mesh = build_unit_square_mesh::<f64>(6);
    let (lambda, mu) = (lame_from_poisson(0.3, 1.0).unwrap(), 1.0);
    let m = Manufactured::Sinusoidal;
    let phi = |x: [f64; 2]| 1.0 - 0.3 * x[0]; // nonuniform coefficient
    let (u, p) = solve_decoupled_mixed(
        &mesh,
        lambda,
        mu,
        1e-10,
        ElementPairing::Q2Q1,
        &phi,
        &|x| m.body_force(x, lambda, mu),
        &|x| m.value(x),
    )
    .unwrap();
    let r = pressure_projection_residual(
        &mesh,
        ElementPairing::Q2Q1,
        1e-10,
        &phi,
        lambda,
        &u,
        &p,
    );
    let p_norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(
        r <= 1e-8 * (1.0 + lambda * p_norm),
        "projection residual {r} too large"
    );
}

#[test]
fn infsup_taylor_hood_is_bounded_below() {
    let mut betas = Vec::new();
    for n in [2usize, 4, 8] {
        let mesh = build_unit_square_mesh::<f64>(n);
        let report = discrete_infsup(&mesh, ElementPairing::Q2Q1, 1e-10, &|_| 1.0, "g = 1")
            .unwrap();
        betas.push(report.beta);
    }
    // Non-degrading along the refinement sequence.
    let coarse = betas[0];
    for &b in &betas[1..] {
        assert!(
            b >= 0.8 * coarse,
            "beta degraded along refinement: {betas:?}"
        );
    }
}

#[test]
fn infsup_equal_order_pairing_collapses() {
    let mesh = build_unit_square_mesh::<f64>(8);
    let stable = discrete_infsup(&mesh, ElementPairing::Q2Q1, 1e-10, &|_| 1.0, "g = 1")
        .unwrap()
        .beta;
    let unstable = discrete_infsup(&mesh, ElementPairing::Q1Q1, 1e-10, &|_| 1.0, "g = 1")
        .unwrap()
        .beta;
    assert!(
        unstable * 10.0 <= stable,
        "expected spurious-mode collapse: stable {stable}, equal-order {unstable}"
    );
}

#[test]
fn infsup_scales_linearly_with_uniform_degradation() {
    // g = kappa uniformly scales B, so beta scales by kappa.
    let mesh = build_unit_square_mesh::<f64>(4);
    let kappa = 1e-4;
    let baseline = discrete_infsup(&mesh, ElementPairing::Q2Q1, kappa, &|_| 1.0, "g = 1")
        .unwrap()
        .beta;
    let degraded = discrete_infsup(&mesh, ElementPairing::Q2Q1, kappa, &|_| 0.0, "g = kappa")
        .unwrap()
        .beta;
    assert_relative_eq!(degraded / baseline, kappa, max_relative = 1e-6);
}

#[test]
fn infsup_invariant_under_translation_and_relabeling() {
    let mesh = build_unit_square_mesh::<f64>(4);
    let base = discrete_infsup(&mesh, ElementPairing::Q2Q1, 1e-10, &|_| 1.0, "g = 1")
        .unwrap()
        .beta;
    let moved = translate_mesh(&mesh, 0.37, -1.2);
    let beta_moved = discrete_infsup(&moved, ElementPairing::Q2Q1, 1e-10, &|_| 1.0, "g = 1")
        .unwrap()
        .beta;
    assert_relative_eq!(beta_moved, base, max_relative = 1e-9);

    let perm: Vec<usize> = (0..mesh.n_nodes()).rev().collect();
    let relabeled = mesh.permute_nodes(&perm);
    let beta_relabel =
        discrete_infsup(&relabeled, ElementPairing::Q2Q1, 1e-10, &|_| 1.0, "g = 1")
            .unwrap()
            .beta;
    assert_relative_eq!(beta_relabel, base, max_relative = 1e-9);
}

#[test]
fn locking_ratios_separate_methods() {
    // The 8x8 coarsest mesh resolves the nu = 0.3 baseline well enough for
    // the locked error to stand out by an order of magnitude.
    let study = locking_study(
        &[Method::PrimalQ1, Method::MixedQ2Q1],
        &[0.3, 0.4999],
        &[8, 16],
    )
    .unwrap();
    let q1_ratio = study
        .locking_ratio(Method::PrimalQ1, 0.4999, 0.3)
        .unwrap();
    let mixed_ratio = study
        .locking_ratio(Method::MixedQ2Q1, 0.4999, 0.3)
        .unwrap();
    assert!(q1_ratio >= 10.0, "primal Q1 must lock: ratio {q1_ratio}");
    assert!(
        mixed_ratio <= 2.0,
        "mixed Q2Q1 must stay robust: ratio {mixed_ratio}"
    );
    // At fixed nu = 0.3 every method converges with positive order.
    for method in [Method::PrimalQ1, Method::MixedQ2Q1] {
        let table = study.table(method, 0.3).unwrap();
        for o in table.l2_orders() {
            assert!(o > 0.5, "{:?} order {o}", method);
        }
    }
}

#[test]
fn convergence_orders_have_floor_guard() {
    // Errors below 1e-12 produce no order entries.
    let table = ConvergenceTable {
        method: Method::PrimalQ1,
        nu: 0.3,
        rows: vec![
            ConvergenceRow {
                subdivisions: 2,
                h: 0.5,
                l2_error: 1e-13,
                h1_error: 1e-3,
            },
            ConvergenceRow {
                subdivisions: 4,
                h: 0.25,
                l2_error: 1e-14,
                h1_error: 5e-4,
            },
        ],
    };
    assert!(table.l2_orders().is_empty());
    assert_eq!(table.h1_orders().len(), 1);
}

#[test]
fn triple_norm_variant_is_positive_for_stable_pairing() {
    let mesh = build_unit_square_mesh::<f64>(2);
    let lambda = lame_from_poisson(0.3, 1.0).unwrap();
    let beta = triple_norm_infsup(&mesh, ElementPairing::Q2Q1, lambda, 1.0, 1e-10, &|_| 1.0)
        .unwrap();
    assert!(beta > 0.0 && beta.is_finite());
}
