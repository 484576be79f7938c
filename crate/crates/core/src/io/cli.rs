//! Command-line interface: scenario runs, parameter sweeps and the
//! analysis studies.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver failure (the
//! failing step is reported on stderr).

use crate::analysis::{
    convergence_study, discrete_infsup, locking_study, triple_norm_infsup, Manufactured, Method,
};
use crate::fem::dofmap::ElementPairing;
use crate::io::config::{emit_config, parse_config_file, ConfigError};
use crate::io::output::{
    write_convergence_csv, write_load_csv, write_mesh_vtk, write_vtk, RunManifest,
};
use crate::mesh::build_unit_square_mesh;
use crate::model::FormulationKind;
use crate::scenarios::{nu_sweep, run_scenario, Scenario, ScenarioConfig};
use crate::solver::newton::NewtonSettings;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "pfmix",
    about = "Quadrilateral FEM for quasi-static phase-field fracture with a \
             mixed displacement-pressure formulation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and emit load-displacement CSV, convergence CSV and
    /// VTK snapshots.
    Run(RunArgs),
    /// Rerun a scenario over a list of Poisson ratios (mu fixed).
    SweepNu(SweepNuArgs),
    /// Rerun a scenario over a list of refinement levels.
    SweepRefine(SweepRefineArgs),
    /// Discrete inf-sup constants for stable and equal-order pairings.
    Infsup(InfsupArgs),
    /// Volume-locking study with a divergence-free manufactured solution.
    Locking(LockingArgs),
    /// Manufactured-solution convergence study.
    Convergence(ConvergenceArgs),
}

#[derive(Debug, Args, Clone)]
struct CommonArgs {
    /// Scenario geometry.
    #[arg(long, value_parser = ["shear", "lpanel"])]
    scenario: Option<String>,
    /// Discretization / formulation.
    #[arg(long, value_parser = ["standard-q1q1", "standard-q2q1", "mixed"])]
    formulation: Option<String>,
    /// Uniform refinement steps of the base mesh.
    #[arg(long)]
    refinements: Option<usize>,
    /// Poisson ratio (lambda recomputed from mu).
    #[arg(long)]
    nu: Option<f64>,
    /// Loading increment in seconds.
    #[arg(long)]
    dt: Option<f64>,
    /// End time in seconds.
    #[arg(long)]
    end_time: Option<f64>,
    /// Configuration file (key = value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; all artifacts land below it.
    #[arg(long, default_value = "out")]
    output_dir: PathBuf,
    /// Snapshot times, comma separated.
    #[arg(long)]
    snapshots: Option<String>,
    /// Mirror the shear slit onto the left half.
    #[arg(long)]
    mirror_slit: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct SweepNuArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Poisson ratios, comma separated.
    #[arg(long, default_value = "0.3,0.45,0.49")]
    nu_list: String,
}

#[derive(Debug, Args)]
struct SweepRefineArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Refinement levels, comma separated.
    #[arg(long, default_value = "1,2,3")]
    refinements_list: String,
}

#[derive(Debug, Args)]
struct InfsupArgs {
    /// Unit-square subdivisions, comma separated.
    #[arg(long, default_value = "2,4,8")]
    subdivisions: String,
    #[arg(long, default_value = "out")]
    output_dir: PathBuf,
}

#[derive(Debug, Args)]
struct LockingArgs {
    /// Poisson ratios, comma separated.
    #[arg(long, default_value = "0.3,0.4999")]
    nu_list: String,
    /// Unit-square subdivisions, comma separated.
    #[arg(long, default_value = "8,16,32")]
    subdivisions: String,
    #[arg(long, default_value = "out")]
    output_dir: PathBuf,
}

#[derive(Debug, Args)]
struct ConvergenceArgs {
    /// Method: primal-q1, primal-q2, mixed-q2q1.
    #[arg(long, default_value = "mixed-q2q1")]
    method: String,
    /// Unit-square subdivisions, comma separated.
    #[arg(long, default_value = "4,8,16,32")]
    subdivisions: String,
    #[arg(long, default_value = "0.3")]
    nu: f64,
    #[arg(long, default_value = "out")]
    output_dir: PathBuf,
}

/// CLI entry point; returns the process exit code.
pub fn cli_main<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version through the error path with status 0.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::SweepNu(args) => cmd_sweep_nu(args),
        Command::SweepRefine(args) => cmd_sweep_refine(args),
        Command::Infsup(args) => cmd_infsup(args),
        Command::Locking(args) => cmd_locking(args),
        Command::Convergence(args) => cmd_convergence(args),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Config(e)) => {
            eprintln!("configuration error: {e}");
            2
        }
        Err(CliError::Solver(msg)) => {
            eprintln!("solver failure: {msg}");
            3
        }
        Err(CliError::Io(e)) => {
            eprintln!("io error: {e}");
            2
        }
    }
}

enum CliError {
    Config(String),
    Solver(String),
    Io(std::io::Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn build_config(common: &CommonArgs) -> Result<ScenarioConfig<f64>, CliError> {
    let mut config = match common.scenario.as_deref() {
        Some("lpanel") => ScenarioConfig::<f64>::lpanel(),
        Some("shear") | None => ScenarioConfig::<f64>::shear(),
        Some(other) => return Err(CliError::Config(format!("unknown scenario `{other}`"))),
    };
    if let Some(path) = &common.config {
        config = parse_config_file(path, config)?;
        // A scenario flag must agree with the file's geometry; re-apply the
        // flag to catch the ambiguity.
        if let Some(name) = common.scenario.as_deref() {
            let flag_geometry = if name == "lpanel" {
                crate::scenarios::Geometry::LPanel
            } else {
                crate::scenarios::Geometry::Shear
            };
            if config.geometry != flag_geometry {
                return Err(CliError::Config(
                    "scenario flag contradicts the config file".to_string(),
                ));
            }
        }
    }
    if let Some(f) = common.formulation.as_deref() {
        config.formulation = match f {
            "standard-q1q1" => FormulationKind::StandardQ1Q1,
            "standard-q2q1" => FormulationKind::StandardQ2Q1,
            "mixed" => FormulationKind::MixedQ2Q1Q1Q1Star,
            _ => unreachable!("validated by clap"),
        };
    }
    if let Some(r) = common.refinements {
        config.refinements = r;
    }
    if let Some(nu) = common.nu {
        if !(0.0..0.5).contains(&nu) {
            return Err(CliError::Config(format!(
                "nu = {nu} rejected: lambda = 2 nu mu / (1 - 2 nu) blows up at nu = 0.5"
            )));
        }
        config.nu = nu;
    }
    if let Some(dt) = common.dt {
        config.dt = dt;
    }
    if let Some(t) = common.end_time {
        config.t_end = t;
    }
    if let Some(list) = &common.snapshots {
        config.snapshots = parse_f64_list(list)?;
    }
    config.mirror_slit |= common.mirror_slit;
    config.output_dir = common.output_dir.clone();
    Ok(config)
}

fn parse_f64_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|e| CliError::Config(format!("bad list entry `{s}`: {e}")))
        })
        .collect()
}

fn parse_usize_list(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|e| CliError::Config(format!("bad list entry `{s}`: {e}")))
        })
        .collect()
}

/// Run one scenario and emit its artifacts into `dir`.
fn run_into_dir(config: ScenarioConfig<f64>, dir: &PathBuf) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let echo = emit_config(&config);
    print!("{echo}");
    let scenario = Scenario::prepare(config.clone())
        .map_err(|e| CliError::Config(format!("scenario preparation failed: {e}")))?;
    for w in &scenario.warnings {
        eprintln!("warning: {w}");
    }
    let mut manifest = RunManifest::new(echo);

    let name = config.scenario_name();
    let mut pending: Vec<f64> = config.snapshots.clone();
    pending.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pending.retain(|&t| t <= config.t_end + 1e-12);
    let mut snapshot_paths = Vec::new();

    let run = run_scenario(&scenario, &NewtonSettings::default(), |model, state, log, _| {
        while let Some(&next) = pending.first() {
            if log.time + config.dt * 0.5 > next {
                pending.remove(0);
                let path = dir.join(format!("{name}_{}.vtk", log.step));
                if let Err(e) = write_vtk(&path, &scenario.mesh, model.dofmap(), state, log.time)
                {
                    eprintln!("warning: could not write snapshot {path:?}: {e}");
                } else {
                    snapshot_paths.push(path);
                }
            } else {
                break;
            }
        }
    })
    .map_err(|e| CliError::Solver(e.to_string()))?;

    for w in &run.log.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(onset) = run.crack_onset {
        println!(
            "crack onset: step {} (t = {}), node {} at ({}, {})",
            onset.step, onset.time, onset.node, onset.x, onset.y
        );
    }

    let load_path = dir.join(format!("{name}_load_displacement.csv"));
    write_load_csv(&load_path, &run.records)?;
    let conv_path = dir.join(format!("{name}_convergence.csv"));
    write_convergence_csv(&conv_path, &run.log)?;
    let mesh_path = dir.join(format!("{name}_mesh.vtk"));
    write_mesh_vtk(&mesh_path, &scenario.mesh)?;

    manifest.add_file(&load_path)?;
    manifest.add_file(&conv_path)?;
    manifest.add_file(&mesh_path)?;
    for p in &snapshot_paths {
        manifest.add_file(p)?;
    }
    manifest.write_atomic(dir)?;
    println!(
        "run complete: {} steps, wrote {}",
        run.records.len(),
        load_path.display()
    );
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let config = build_config(&args.common)?;
    let dir = config.output_dir.clone();
    run_into_dir(config, &dir)
}

fn cmd_sweep_nu(args: SweepNuArgs) -> Result<(), CliError> {
    let base = build_config(&args.common)?;
    let nu_list = parse_f64_list(&args.nu_list)?;
    for &nu in &nu_list {
        if !(0.0..0.5).contains(&nu) {
            return Err(CliError::Config(format!("nu = {nu} out of [0, 0.5)")));
        }
    }
    std::fs::create_dir_all(&base.output_dir)?;

    // Independent runs; parallel threads, each run single-threaded and
    // writing to its own subdirectory.
    for &nu in &nu_list {
        std::fs::create_dir_all(base.output_dir.join(format!("nu_{nu}")))?;
    }
    let mut summaries: Vec<(f64, f64, f64, usize)> = Vec::new();
    let mut failures = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for &nu in &nu_list {
            let mut config = base.clone();
            config.nu = nu;
            config.output_dir = base.output_dir.join(format!("nu_{nu}"));
            handles.push((nu, scope.spawn(move || {
                let dir = config.output_dir.clone();
                let entries = nu_sweep(&config, &[nu], &NewtonSettings::default())?;
                let entry = entries.into_iter().next().expect("one entry per nu");
                let path = dir.join("load_displacement.csv");
                let _ = write_load_csv(&path, &entry.run.records);
                Ok::<_, crate::scenarios::ScenarioError<f64>>((
                    entry.lambda,
                    entry.peak_fx,
                    entry.peak_step,
                ))
            })));
        }
        for (nu, handle) in handles {
            match handle.join() {
                Ok(Ok((lambda, peak_fx, peak_step))) => {
                    summaries.push((nu, lambda, peak_fx, peak_step))
                }
                Ok(Err(e)) => failures.push(format!("nu = {nu} failed: {e}")),
                Err(_) => failures.push(format!("nu = {nu} panicked")),
            }
        }
    });
    if !failures.is_empty() {
        return Err(CliError::Solver(failures.join("; ")));
    }
    summaries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut csv = String::from("nu,lambda,peak_Fx_kN,peak_step\n");
    for (nu, lambda, peak, step) in &summaries {
        csv.push_str(&format!("{nu},{lambda:e},{peak:e},{step}\n"));
        println!("nu = {nu}: lambda = {lambda:.6e}, peak Fx = {peak:.6e} at step {step}");
    }
    let path = base.output_dir.join("nu_sweep_summary.csv");
    std::fs::write(&path, csv)?;
    println!("sweep complete: {}", path.display());
    Ok(())
}

fn cmd_sweep_refine(args: SweepRefineArgs) -> Result<(), CliError> {
    let base = build_config(&args.common)?;
    let levels = parse_usize_list(&args.refinements_list)?;
    std::fs::create_dir_all(&base.output_dir)?;
    let mut csv = String::from("refinements,h_mm,epsilon_mm,dofs,peak_Fx_kN,peak_step\n");
    for &r in &levels {
        let mut config = base.clone();
        config.refinements = r;
        config.output_dir = base.output_dir.join(format!("ref_{r}"));
        let scenario = Scenario::prepare(config.clone())
            .map_err(|e| CliError::Config(e.to_string()))?;
        let h = scenario.mesh.h();
        let eps = scenario.material.epsilon;
        let model = crate::model::FractureModel::new(
            &scenario.mesh,
            scenario.material,
            scenario.mode,
            scenario.comp,
        )
        .map_err(|e| CliError::Config(e.to_string()))?;
        let dofs = model.dofmap().n_total();
        drop(model);
        let dir = config.output_dir.clone();
        run_into_dir(config, &dir)?;
        // Recover the peak from the emitted CSV to avoid a second run.
        let text = std::fs::read_to_string(dir.join(format!(
            "{}_load_displacement.csv",
            base.scenario_name()
        )))?;
        let mut peak = (0usize, f64::MIN);
        for line in text.lines().skip(1) {
            let mut fields = line.split(',');
            let step: usize = fields.next().unwrap_or("0").parse().unwrap_or(0);
            let fx: f64 = fields.nth(2).unwrap_or("0").parse().unwrap_or(0.0);
            if fx > peak.1 {
                peak = (step, fx);
            }
        }
        csv.push_str(&format!("{r},{h:e},{eps:e},{dofs},{:e},{}\n", peak.1, peak.0));
        println!("refinements = {r}: h = {h:.4} mm, {dofs} dofs, peak Fx = {:.4e}", peak.1);
    }
    let path = base.output_dir.join("refine_sweep_summary.csv");
    std::fs::write(&path, csv)?;
    println!("sweep complete: {}", path.display());
    Ok(())
}

fn cmd_infsup(args: InfsupArgs) -> Result<(), CliError> {
    let sizes = parse_usize_list(&args.subdivisions)?;
    std::fs::create_dir_all(&args.output_dir)?;
    let mut csv = String::from("pairing,subdivisions,h,beta_h,n_pressure,n_free_u,coefficient\n");
    for &(pairing, label) in &[
        (ElementPairing::Q2Q1, "Q2Q1"),
        (ElementPairing::Q1Q1, "Q1Q1"),
    ] {
        for &n in &sizes {
            let mesh = build_unit_square_mesh::<f64>(n);
            let report = discrete_infsup(&mesh, pairing, 1e-10, &|_| 1.0, "g = 1")
                .map_err(|e| CliError::Solver(e.to_string()))?;
            csv.push_str(&format!(
                "{label},{n},{:e},{:e},{},{},{}\n",
                report.h, report.beta, report.n_pressure, report.n_free_displacement,
                report.coefficient
            ));
            println!("{label} {n}x{n}: beta_h = {:.6e}", report.beta);
        }
    }
    // Documentation-only: penalized-form inf-sup over the triple norm.
    let mesh = build_unit_square_mesh::<f64>(4);
    let lambda = crate::material::lame_from_poisson(0.3, 1.0).unwrap();
    match triple_norm_infsup(&mesh, ElementPairing::Q2Q1, lambda, 1.0, 1e-10, &|_| 1.0) {
        Ok(beta) => println!(
            "triple-norm inf-sup (Q2Q1, 4x4, nu = 0.3, informational): {beta:.6e}"
        ),
        Err(e) => eprintln!("triple-norm variant failed: {e}"),
    }
    let path = args.output_dir.join("infsup.csv");
    std::fs::write(&path, csv)?;
    println!("report written: {}", path.display());
    Ok(())
}

fn cmd_locking(args: LockingArgs) -> Result<(), CliError> {
    let nu_list = parse_f64_list(&args.nu_list)?;
    let sizes = parse_usize_list(&args.subdivisions)?;
    std::fs::create_dir_all(&args.output_dir)?;
    let methods = [Method::PrimalQ1, Method::PrimalQ2, Method::MixedQ2Q1];
    let study = locking_study(&methods, &nu_list, &sizes)
        .map_err(|e| CliError::Solver(e.to_string()))?;
    let mut csv = String::from("method,nu,subdivisions,h,l2_error,h1_error\n");
    for table in &study.tables {
        for row in &table.rows {
            csv.push_str(&format!(
                "{},{},{},{:e},{:e},{:e}\n",
                table.method.name(),
                table.nu,
                row.subdivisions,
                row.h,
                row.l2_error,
                row.h1_error
            ));
        }
    }
    if nu_list.len() >= 2 {
        let (lo, hi) = (nu_list[0], nu_list[nu_list.len() - 1]);
        for method in methods {
            if let Some(ratio) = study.locking_ratio(method, hi, lo) {
                println!(
                    "{}: coarse-mesh error ratio nu={hi} / nu={lo} = {ratio:.3}",
                    method.name()
                );
            }
        }
    }
    let path = args.output_dir.join("locking.csv");
    std::fs::write(&path, csv)?;
    println!("study written: {}", path.display());
    Ok(())
}

fn cmd_convergence(args: ConvergenceArgs) -> Result<(), CliError> {
    let sizes = parse_usize_list(&args.subdivisions)?;
    let method = match args.method.as_str() {
        "primal-q1" => Method::PrimalQ1,
        "primal-q2" => Method::PrimalQ2,
        "mixed-q2q1" => Method::MixedQ2Q1,
        other => return Err(CliError::Config(format!("unknown method `{other}`"))),
    };
    if !(0.0..0.5).contains(&args.nu) {
        return Err(CliError::Config(format!("nu = {} out of [0, 0.5)", args.nu)));
    }
    std::fs::create_dir_all(&args.output_dir)?;
    let table = convergence_study(method, Manufactured::Sinusoidal, args.nu, &sizes)
        .map_err(|e| CliError::Solver(e.to_string()))?;
    let mut csv = String::from("subdivisions,h,l2_error,h1_error\n");
    for row in &table.rows {
        csv.push_str(&format!(
            "{},{:e},{:e},{:e}\n",
            row.subdivisions, row.h, row.l2_error, row.h1_error
        ));
    }
    println!(
        "{} observed L2 orders: {:?}",
        method.name(),
        table
            .l2_orders()
            .iter()
            .map(|o| format!("{o:.2}"))
            .collect::<Vec<_>>()
    );
    let path = args.output_dir.join("convergence.csv");
    std::fs::write(&path, csv)?;
    println!("study written: {}", path.display());
    Ok(())
}
