//! Benchmark scenario definitions: geometry, material defaults, loading
//! schedules and quantity-of-interest evaluation.
//!
//! Internal units are kN, mm and s throughout; the loading rate is
//! 1 mm/s in both tests, so time and applied displacement coincide
//! numerically.

use crate::fem::assembly::{eval_grad_u, eval_scalar_q1};
use crate::fem::dofmap::Field;
use crate::fem::norms::boundary_integral;
use crate::material::{degradation, full_stress, strain, MaterialError, MaterialParams};
use crate::mesh::{
    build_lshape_mesh, build_shear_mesh_opts, build_square_mesh, BoundaryTag, Mesh, MeshError,
    SLIT_TIP_X, SLIT_Y,
};
use crate::model::{
    build_displacement_constraints, BoundaryDisplacement, ComplementarityParams, FormulationKind,
    FormulationMode, FractureModel, IrreversibilityMode, ModelError, SystemState,
};
use crate::scalar::Real;
use crate::solver::newton::NewtonSettings;
use crate::solver::timeloop::{ConvergenceLog, StepLog, TimeLoopConfig, TimeLoopError};
use std::path::PathBuf;
use thiserror::Error;

/// Benchmark geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    /// Single-edge notched shear test, 10 mm square with a slit.
    Shear,
    /// L-shaped panel, 500 mm with cyclic corner loading.
    LPanel,
}

/// How the initial crack of the shear test is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlitMode {
    /// Doubled mesh nodes along the slit (sharp geometric crack).
    Geometric,
    /// Plain mesh with `phi = 0` prescribed on slit-adjacent nodes at t = 0.
    PhaseFieldInitial,
}

#[derive(Debug, Error)]
pub enum ScenarioError<T: Real> {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    TimeLoop(#[from] TimeLoopError<T>),
    #[error("loading time {0} outside the L-panel schedule [0, 2] s")]
    LoadingOutOfRange(f64),
    #[error(
        "realized GammaUy strip of {realized} mm misses the 30 mm target by more than one \
         facet ({facet} mm); refine the mesh"
    )]
    GammaUyTooCoarse { realized: f64, facet: f64 },
    #[error("boundary tag {0:?} missing on this mesh")]
    MissingTag(BoundaryTag),
}

/// Full run configuration. Defaults per geometry match the published
/// standard settings (see [`ScenarioConfig::shear`] / [`ScenarioConfig::lpanel`]).
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig<T> {
    pub geometry: Geometry,
    pub nu: T,
    pub mu: T,
    pub g_c: T,
    pub kappa: T,
    /// Transition bandwidth; `None` selects `2 h` from the actual mesh.
    pub epsilon: Option<T>,
    pub base_subdivisions: usize,
    pub refinements: usize,
    pub dt: T,
    pub t_end: T,
    pub formulation: FormulationKind,
    pub degrade_pressure_mass: bool,
    pub use_mu_in_driving_force: bool,
    pub irreversibility: IrreversibilityMode,
    /// Snapshot times for field output (skipped when beyond `t_end`).
    pub snapshots: Vec<T>,
    pub mirror_slit: bool,
    pub slit_mode: SlitMode,
    /// Boundary on which the load functional is evaluated.
    pub load_boundary: BoundaryTag,
    pub output_dir: PathBuf,
}

impl<T: Real> ScenarioConfig<T> {
    /// Standard settings of the single-edge notched shear test.
    pub fn shear() -> Self {
        Self {
            geometry: Geometry::Shear,
            nu: T::lit(0.29999),
            mu: T::lit(80.77),
            g_c: T::lit(2.7e-3),
            kappa: T::lit(1e-10),
            epsilon: None,
            base_subdivisions: 4,
            refinements: 3,
            dt: T::lit(1e-4),
            t_end: T::lit(0.02),
            formulation: FormulationKind::MixedQ2Q1Q1Q1Star,
            degrade_pressure_mass: true,
            use_mu_in_driving_force: true,
            irreversibility: IrreversibilityMode::Multiplier,
            snapshots: [0.012, 0.015, 0.02, 0.03, 0.033, 0.042]
                .iter()
                .map(|&t| T::lit(t))
                .collect(),
            mirror_slit: false,
            slit_mode: SlitMode::Geometric,
            load_boundary: BoundaryTag::Top,
            output_dir: PathBuf::from("out"),
        }
    }

    /// Standard settings of the L-shaped panel test.
    pub fn lpanel() -> Self {
        Self {
            geometry: Geometry::LPanel,
            nu: T::lit(0.18),
            mu: T::lit(10.95),
            g_c: T::lit(8.9e-5),
            kappa: T::lit(1e-10),
            epsilon: None,
            base_subdivisions: 2,
            refinements: 2,
            dt: T::lit(1e-3),
            t_end: T::lit(2.0),
            formulation: FormulationKind::MixedQ2Q1Q1Q1Star,
            degrade_pressure_mass: true,
            use_mu_in_driving_force: true,
            irreversibility: IrreversibilityMode::Multiplier,
            // Figure loadings 0.22, 0.3, 0.45 and 1.0 mm along the cyclic
            // schedule correspond to these times.
            snapshots: [0.22, 0.3, 1.45, 2.0].iter().map(|&t| T::lit(t)).collect(),
            mirror_slit: false,
            slit_mode: SlitMode::Geometric,
            load_boundary: BoundaryTag::Top,
            output_dir: PathBuf::from("out"),
        }
    }

    pub fn scenario_name(&self) -> &'static str {
        match self.geometry {
            Geometry::Shear => "shear",
            Geometry::LPanel => "lpanel",
        }
    }
}

/// Shear-test loading: `u_x = t * 1 mm/s` on the top boundary.
pub fn shear_loading<T: Real>(t: T) -> T {
    t * T::lit(1.0)
}

/// L-panel cyclic loading on `GammaUy` (push, pull, push up to 1 mm).
pub fn lpanel_loading<T: Real>(t: T) -> Result<T, ScenarioError<T>> {
    let t3 = T::lit(0.3);
    let t8 = T::lit(0.8);
    let t20 = T::lit(2.0);
    if t < T::zero() || t > t20 {
        return Err(ScenarioError::LoadingOutOfRange(t.to_f64_lossy()));
    }
    Ok(if t < t3 {
        t
    } else if t < t8 {
        T::lit(0.6) - t
    } else {
        T::lit(-1.0) + t
    })
}

/// Load vector `(F_x, F_y)` on a tagged boundary and its degraded variant,
/// evaluated from the full stress `sigma(u) = 2 mu E + lambda tr(E) I`.
#[derive(Debug, Clone, Copy)]
pub struct LoadValues<T> {
    pub fx: T,
    pub fy: T,
    pub fx_degraded: T,
    pub fy_degraded: T,
}

pub fn evaluate_load<T: Real>(
    model: &FractureModel<'_, T>,
    state: &SystemState<T>,
    tag: BoundaryTag,
) -> Result<LoadValues<T>, crate::fem::norms::UnknownTag> {
    let mesh = model.mesh();
    let dm = model.dofmap();
    let u = state.block(dm, Field::U);
    let phi = state.block(dm, Field::Phi);
    let material = &model.material;
    let mut degraded = [T::zero(); 2];
    let undegraded = boundary_integral(mesh, tag, 3, |facet, pt| {
        let grad = eval_grad_u(mesh, dm, facet.cell, pt.cell_ref, u);
        let sigma = full_stress(strain(grad), material.lambda, material.mu);
        let traction = [
            sigma.xx * pt.normal[0] + sigma.xy * pt.normal[1],
            sigma.xy * pt.normal[0] + sigma.yy * pt.normal[1],
        ];
        let g = degradation(
            eval_scalar_q1(mesh, facet.cell, pt.cell_ref, phi),
            material.kappa,
        );
        degraded[0] += g * traction[0] * pt.ds;
        degraded[1] += g * traction[1] * pt.ds;
        traction
    })?;
    Ok(LoadValues {
        fx: undegraded[0],
        fy: undegraded[1],
        fx_degraded: degraded[0],
        fy_degraded: degraded[1],
    })
}

/// One row of the load-displacement history.
#[derive(Debug, Clone, Copy)]
pub struct LoadDisplacementRecord<T> {
    pub step: usize,
    pub time: T,
    pub displacement: T,
    pub fx: T,
    pub fy: T,
    pub fx_degraded: T,
    pub fy_degraded: T,
    pub newton_iters: usize,
}

/// A prepared scenario: mesh, material (with `epsilon = 2h` resolved) and
/// formulation switches.
pub struct Scenario<T> {
    pub config: ScenarioConfig<T>,
    pub mesh: Mesh<T>,
    pub material: MaterialParams<T>,
    pub mode: FormulationMode,
    pub comp: ComplementarityParams<T>,
    /// Preparation notes, e.g. the primal fallback at `lambda = 0` or the
    /// realized GammaUy strip.
    pub warnings: Vec<String>,
}

impl<T: Real> Scenario<T> {
    pub fn prepare(config: ScenarioConfig<T>) -> Result<Self, ScenarioError<T>> {
        let mut warnings = Vec::new();
        let mesh = match config.geometry {
            Geometry::Shear => match config.slit_mode {
                SlitMode::Geometric => build_shear_mesh_opts(
                    config.base_subdivisions,
                    config.refinements,
                    config.mirror_slit,
                )?,
                SlitMode::PhaseFieldInitial => build_square_mesh(
                    config.base_subdivisions * (1 << config.refinements),
                    T::lit(crate::mesh::SHEAR_EDGE),
                ),
            },
            Geometry::LPanel => {
                let mesh: Mesh<T> =
                    build_lshape_mesh(config.base_subdivisions, config.refinements)?;
                if let Some((_, len)) = mesh.gamma_uy_realized() {
                    let facet = T::lit(500.0)
                        / T::of_usize(2 * config.base_subdivisions * (1 << config.refinements));
                    let target: T = T::lit(crate::mesh::GAMMA_UY_LENGTH);
                    if (len - target).abs() > facet {
                        return Err(ScenarioError::GammaUyTooCoarse {
                            realized: len.to_f64_lossy(),
                            facet: facet.to_f64_lossy(),
                        });
                    }
                    warnings.push(format!(
                        "GammaUy snapped to whole facets: realized strip {} mm",
                        len.to_f64_lossy()
                    ));
                }
                mesh
            }
        };

        let epsilon = config.epsilon.unwrap_or(T::lit(2.0) * mesh.h());
        if epsilon < mesh.h() {
            warnings.push(format!(
                "epsilon = {} mm below the cell diameter h = {} mm",
                epsilon.to_f64_lossy(),
                mesh.h().to_f64_lossy()
            ));
        }
        let material =
            MaterialParams::from_poisson(config.nu, config.mu, config.g_c, config.kappa, epsilon)?;

        let mut kind = config.formulation;
        if kind.is_mixed() && material.lambda <= T::zero() {
            warnings.push(
                "lambda = 0 is incompatible with the mixed formulation (1/lambda); \
                 falling back to the primal Q2Q1 formulation"
                    .to_string(),
            );
            kind = FormulationKind::StandardQ2Q1;
        }
        let mode = FormulationMode {
            kind,
            degrade_pressure_mass: config.degrade_pressure_mass,
            use_mu_in_driving_force: config.use_mu_in_driving_force,
        };
        let comp = match config.irreversibility {
            IrreversibilityMode::Multiplier => {
                ComplementarityParams::multiplier_default(material.g_c, epsilon)
            }
            IrreversibilityMode::SimplePenalty => {
                ComplementarityParams::penalty_default(material.g_c, epsilon)
            }
        };
        Ok(Self {
            config,
            mesh,
            material,
            mode,
            comp,
            warnings,
        })
    }

    /// Applied boundary displacement at time `t`.
    pub fn applied_displacement(&self, t: T) -> Result<T, ScenarioError<T>> {
        match self.config.geometry {
            Geometry::Shear => Ok(shear_loading(t)),
            Geometry::LPanel => lpanel_loading(t),
        }
    }

    /// Dirichlet data of the geometry at time `t`.
    pub fn boundary_displacements(
        &self,
        t: T,
    ) -> Result<Vec<BoundaryDisplacement<T>>, ScenarioError<T>> {
        Ok(match self.config.geometry {
            Geometry::Shear => vec![
                BoundaryDisplacement {
                    tag: BoundaryTag::Bottom,
                    ux: Some(T::zero()),
                    uy: Some(T::zero()),
                },
                BoundaryDisplacement {
                    tag: BoundaryTag::Top,
                    ux: Some(shear_loading(t)),
                    uy: Some(T::zero()),
                },
                BoundaryDisplacement {
                    tag: BoundaryTag::Left,
                    ux: None,
                    uy: Some(T::zero()),
                },
                BoundaryDisplacement {
                    tag: BoundaryTag::Right,
                    ux: None,
                    uy: Some(T::zero()),
                },
            ],
            Geometry::LPanel => vec![
                BoundaryDisplacement {
                    tag: BoundaryTag::Bottom,
                    ux: Some(T::zero()),
                    uy: Some(T::zero()),
                },
                BoundaryDisplacement {
                    tag: BoundaryTag::GammaUy,
                    ux: None,
                    uy: Some(lpanel_loading(t)?),
                },
            ],
        })
    }

    /// Nodes carrying `phi = 0` in the phase-field slit alternative.
    pub fn phase_slit_nodes(&self) -> Vec<usize> {
        if self.config.geometry != Geometry::Shear
            || self.config.slit_mode != SlitMode::PhaseFieldInitial
        {
            return Vec::new();
        }
        let tol = T::lit(1e-9);
        let tip_x = T::lit(SLIT_TIP_X);
        let y = T::lit(SLIT_Y);
        self.mesh
            .coords()
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                (p[1] - y).abs() < tol
                    && if self.config.mirror_slit {
                        p[0] <= tip_x + tol
                    } else {
                        p[0] >= tip_x - tol
                    }
            })
            .map(|(n, _)| n)
            .collect()
    }
}

/// Crack-onset event: first node whose phase field drops below a threshold.
#[derive(Debug, Clone, Copy)]
pub struct CrackOnset<T> {
    pub step: usize,
    pub time: T,
    pub node: usize,
    pub x: T,
    pub y: T,
}

/// Full scenario run output.
pub struct ScenarioRun<T> {
    pub records: Vec<LoadDisplacementRecord<T>>,
    pub log: ConvergenceLog<T>,
    pub final_state: SystemState<T>,
    /// First node with `phi < 0.5`, if any step produced one.
    pub crack_onset: Option<CrackOnset<T>>,
    pub warnings: Vec<String>,
}

/// Run a prepared scenario. `on_step` fires after every accepted step with
/// the state, the step log and the fresh load record (for CSV/VTK sinks).
pub fn run_scenario<T: Real>(
    scenario: &Scenario<T>,
    settings: &NewtonSettings<T>,
    mut on_step: impl FnMut(&FractureModel<'_, T>, &SystemState<T>, &StepLog<T>, &LoadDisplacementRecord<T>),
) -> Result<ScenarioRun<T>, ScenarioError<T>> {
    let model = FractureModel::new(
        &scenario.mesh,
        scenario.material,
        scenario.mode,
        scenario.comp,
    )?;
    let config = TimeLoopConfig::new(scenario.config.dt, scenario.config.t_end)?;
    let dm = model.dofmap();

    // Any loading-schedule error is detected up front so the closures below
    // can unwrap safely.
    scenario.applied_displacement(scenario.config.t_end)?;
    for spec in scenario.boundary_displacements(T::zero())? {
        if !scenario.mesh.has_tag(spec.tag) {
            return Err(ScenarioError::MissingTag(spec.tag));
        }
    }
    if !scenario.mesh.has_tag(scenario.config.load_boundary) {
        return Err(ScenarioError::MissingTag(scenario.config.load_boundary));
    }

    let mut records: Vec<LoadDisplacementRecord<T>> = Vec::with_capacity(config.steps);
    let mut crack_onset: Option<CrackOnset<T>> = None;
    let phase_slit = scenario.phase_slit_nodes();

    let mesh = &scenario.mesh;
    let threshold = T::lit(0.5);
    // Phase-field slit alternative: an initial condition phi0 = 0 on the
    // slit nodes; irreversibility keeps the crack from healing afterwards.
    let mut initial = SystemState::intact(dm);
    for &n in &phase_slit {
        initial.dofs[dm.scalar_global(Field::Phi, n)] = T::zero();
        initial.phi_prev[n] = T::zero();
    }
    let result = crate::solver::timeloop::run_time_loop_from(
        &model,
        &config,
        settings,
        initial,
        |t| {
            let specs = scenario
                .boundary_displacements(t)
                .expect("loading schedule validated above");
            build_displacement_constraints(mesh, dm, &specs)
                .expect("scenario tags validated above")
        },
        |state, step_log| {
            let load = evaluate_load(&model, state, scenario.config.load_boundary)
                .expect("load boundary validated above");
            let record = LoadDisplacementRecord {
                step: step_log.step,
                time: step_log.time,
                displacement: scenario
                    .applied_displacement(step_log.time)
                    .expect("loading schedule validated above"),
                fx: load.fx,
                fy: load.fy,
                fx_degraded: load.fx_degraded,
                fy_degraded: load.fy_degraded,
                newton_iters: step_log.iterations,
            };
            if crack_onset.is_none() {
                let phi = state.block(dm, Field::Phi);
                if let Some((node, _)) = phi
                    .iter()
                    .enumerate()
                    .filter(|&(n, &v)| v < threshold && !phase_slit.contains(&n))
                    .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                {
                    let p = mesh.node(node);
                    crack_onset = Some(CrackOnset {
                        step: step_log.step,
                        time: step_log.time,
                        node,
                        x: p[0],
                        y: p[1],
                    });
                }
            }
            on_step(&model, state, step_log, &record);
            records.push(record);
        },
    );
    let output = result?;

    Ok(ScenarioRun {
        records,
        log: output.log,
        final_state: output.state,
        crack_onset,
        warnings: scenario.warnings.clone(),
    })
}

/// Connected region of nodes with `phi` below a threshold, grown from a seed
/// node through cell adjacency. Returns the member nodes.
pub fn phi_region_from<T: Real>(
    mesh: &Mesh<T>,
    phi: &[T],
    threshold: T,
    seed: usize,
) -> Vec<usize> {
    if phi[seed] >= threshold {
        return Vec::new();
    }
    let adj = mesh.node_neighbors();
    let mut visited = vec![false; mesh.n_nodes()];
    let mut queue = vec![seed];
    visited[seed] = true;
    let mut members = Vec::new();
    while let Some(n) = queue.pop() {
        members.push(n);
        for &m in &adj[n] {
            if !visited[m] && phi[m] < threshold {
                visited[m] = true;
                queue.push(m);
            }
        }
    }
    members
}

/// One entry of a Poisson-ratio sweep.
pub struct SweepEntry<T> {
    pub nu: T,
    pub lambda: T,
    pub peak_fx: T,
    pub peak_fy: T,
    pub peak_step: usize,
    pub run: ScenarioRun<T>,
}

/// Rerun the scenario for each Poisson ratio (`mu` fixed, `lambda`
/// recomputed); collects peak load and its step index per ratio.
pub fn nu_sweep<T: Real>(
    base: &ScenarioConfig<T>,
    nu_list: &[T],
    settings: &NewtonSettings<T>,
) -> Result<Vec<SweepEntry<T>>, ScenarioError<T>> {
    let mut entries = Vec::with_capacity(nu_list.len());
    for &nu in nu_list {
        let mut config = base.clone();
        config.nu = nu;
        let scenario = Scenario::prepare(config)?;
        let lambda = scenario.material.lambda;
        let run = run_scenario(&scenario, settings, |_, _, _, _| {})?;
        let (peak_step, peak_fx, peak_fy) = run
            .records
            .iter()
            .map(|r| (r.step, r.fx, r.fy))
            .fold((0usize, T::zero(), T::zero()), |acc, (s, fx, fy)| {
                if fx > acc.1 {
                    (s, fx, fy)
                } else {
                    acc
                }
            });
        entries.push(SweepEntry {
            nu,
            lambda,
            peak_fx,
            peak_fy,
            peak_step,
            run,
        });
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn shear_loading_is_linear_in_time() {
        assert_relative_eq!(shear_loading(0.0), 0.0);
        assert_relative_eq!(shear_loading(0.015), 0.015);
        assert_relative_eq!(shear_loading(0.042), 0.042);
    }

    #[test]
    fn lpanel_loading_hits_published_waypoints() {
        assert_relative_eq!(lpanel_loading(0.3).unwrap(), 0.3, epsilon = 1e-12);
        assert_relative_eq!(lpanel_loading(0.8).unwrap(), -0.2, epsilon = 1e-12);
        assert_relative_eq!(lpanel_loading(2.0).unwrap(), 1.0, epsilon = 1e-12);
        assert!(lpanel_loading(2.0 + 1e-9).is_err());
        assert!(lpanel_loading(-1e-9_f64).is_err());
    }

    #[test]
    fn lpanel_loading_is_continuous() {
        let mut t = 0.0f64;
        let mut prev = lpanel_loading(0.0).unwrap();
        while t < 2.0 {
            t = (t + 1e-4).min(2.0);
            let cur = lpanel_loading(t).unwrap();
            assert!(
                (cur - prev).abs() <= 1e-4 + 1e-9,
                "jump at t = {t}: {prev} -> {cur}"
            );
            prev = cur;
        }
    }

    #[test]
    fn defaults_match_standard_settings() {
        let shear = ScenarioConfig::<f64>::shear();
        assert_relative_eq!(shear.dt, 1e-4);
        assert_relative_eq!(shear.g_c, 2.7e-3);
        assert_relative_eq!(shear.kappa, 1e-10);
        assert_relative_eq!(shear.nu, 0.29999);
        let lp = ScenarioConfig::<f64>::lpanel();
        assert_relative_eq!(lp.dt, 1e-3);
        assert_relative_eq!(lp.g_c, 8.9e-5);
        assert_relative_eq!(lp.nu, 0.18);
        // epsilon = 2 h unless overridden.
        let s = Scenario::prepare(shear).unwrap();
        assert_relative_eq!(s.material.epsilon, 2.0 * s.mesh.h(), epsilon = 1e-12);
    }

    #[test]
    fn lambda_zero_falls_back_to_primal() {
        let mut config = ScenarioConfig::<f64>::shear();
        config.nu = 0.0;
        config.refinements = 0;
        let s = Scenario::prepare(config).unwrap();
        assert_eq!(s.mode.kind, FormulationKind::StandardQ2Q1);
        assert!(!s.warnings.is_empty());
    }

    #[test]
    fn sweep_lambda_values_match_conversion_table() {
        // mu fixed per column; lambda recomputed by the conversion.
        let shear = ScenarioConfig::<f64>::shear();
        for (nu, expect) in [(0.45, 726.93), (0.49, 3957.73)] {
            let mut c = shear.clone();
            c.nu = nu;
            c.refinements = 0;
            let s = Scenario::prepare(c).unwrap();
            assert_relative_eq!(s.material.lambda, expect, max_relative = 5e-3);
        }
    }

    #[test]
    fn evaluate_load_of_uniform_extension() {
        // u = (0, c y) on the shear geometry with phi = 1:
        // F = (0, 10 (2 mu + lambda) c).
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
        let c = 1e-3;
        for (s, p) in dm.u_scalar_coords(&scenario.mesh).iter().enumerate() {
            state.dofs[dm.u_global(s, 1)] = c * p[1];
        }
        let load = evaluate_load(&model, &state, BoundaryTag::Top).unwrap();
        let expect = 10.0 * (2.0 * scenario.material.mu + scenario.material.lambda) * c;
        assert_relative_eq!(load.fx, 0.0, epsilon = 1e-10);
        assert_relative_eq!(load.fy, expect, max_relative = 1e-10);
        // phi = 1 everywhere: degraded matches undegraded up to kappa.
        assert_relative_eq!(load.fy_degraded, expect, max_relative = 1e-6);

        // Zero displacement and rigid translation produce no load.
        let zero = SystemState::intact(dm);
        let l0 = evaluate_load(&model, &zero, BoundaryTag::Top).unwrap();
        assert_relative_eq!(l0.fx, 0.0, epsilon = 1e-12);
        assert_relative_eq!(l0.fy, 0.0, epsilon = 1e-12);
        let mut rigid = SystemState::intact(dm);
        for s in 0..dm.n_u_scalar() {
            rigid.dofs[dm.u_global(s, 0)] = 0.7;
            rigid.dofs[dm.u_global(s, 1)] = -0.3;
        }
        let lr = evaluate_load(&model, &rigid, BoundaryTag::Top).unwrap();
        assert_relative_eq!(lr.fx, 0.0, epsilon = 1e-10);
        assert_relative_eq!(lr.fy, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn phase_slit_nodes_only_in_phase_mode() {
        let mut config = ScenarioConfig::<f64>::shear();
        config.refinements = 1;
        let geom = Scenario::prepare(config.clone()).unwrap();
        assert!(geom.phase_slit_nodes().is_empty());
        config.slit_mode = SlitMode::PhaseFieldInitial;
        let phase = Scenario::prepare(config).unwrap();
        let nodes = phase.phase_slit_nodes();
        assert!(!nodes.is_empty());
        for &n in &nodes {
            let p = phase.mesh.node(n);
            assert_relative_eq!(p[1], 5.0, epsilon = 1e-9);
            assert!(p[0] >= 5.0 - 1e-9);
        }
    }
}
