//! Plain-text scenario configuration: `key = value` per line, `#` comments.
//!
//! Defaults come from the scenario's standard settings; file values and then
//! command-line flags are layered on top. The standard material parameter
//! names are accepted as keys (`lambda0`, `mu0`, `nu0`, `g_c`, `h0`,
//! `epsilon0`, `delta_t`, `kappa`) alongside the run controls.

use crate::material::lame_from_poisson;
use crate::mesh::BoundaryTag;
use crate::model::{FormulationKind, IrreversibilityMode};
use crate::scalar::Real;
use crate::scenarios::{Geometry, ScenarioConfig, SlitMode};
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`: {reason}")]
    BadValue {
        line: usize,
        key: String,
        reason: String,
    },
    #[error("nu = {0} rejected: the Lame parameter lambda = 2 nu mu / (1 - 2 nu) blows up at nu = 0.5")]
    PoissonBlowup(f64),
    #[error(
        "lambda = {lambda} inconsistent with nu = {nu}, mu = {mu} (conversion gives {expected}); \
         specify either nu or lambda"
    )]
    LambdaInconsistent {
        lambda: f64,
        nu: f64,
        mu: f64,
        expected: f64,
    },
    #[error("key `{0}` specified twice with different values")]
    ConflictingDuplicate(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Parse a configuration file into overrides applied to `base`.
pub fn parse_config_file<T: Real>(
    path: &std::path::Path,
    base: ScenarioConfig<T>,
) -> Result<ScenarioConfig<T>, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text, base)
}

/// Parse configuration text into overrides applied to `base`.
pub fn parse_config_str<T: Real>(
    text: &str,
    base: ScenarioConfig<T>,
) -> Result<ScenarioConfig<T>, ConfigError> {
    let mut config = base;
    let mut lambda_given: Option<(usize, T)> = None;
    let mut nu_given = false;
    let mut seen: Vec<(String, String)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = match raw.find('#') {
            Some(k) => &raw[..k],
            None => raw,
        }
        .trim();
        if stripped.is_empty() {
            continue;
        }
        let (key_raw, value) = stripped.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            text: stripped.to_string(),
        })?;
        let key = key_raw.trim().to_lowercase().replace('-', "_");
        let value = value.trim().to_string();
        if let Some((_, prev)) = seen.iter().find(|(k, _)| *k == key) {
            if *prev != value {
                return Err(ConfigError::ConflictingDuplicate(key));
            }
            continue;
        }
        seen.push((key.clone(), value.clone()));

        let bad = |reason: &str| ConfigError::BadValue {
            line,
            key: key.clone(),
            reason: reason.to_string(),
        };
        let parse_f = |v: &str| -> Result<T, ConfigError> {
            v.parse::<f64>()
                .map(T::lit)
                .map_err(|e| bad(&e.to_string()))
        };
        let parse_usize =
            |v: &str| -> Result<usize, ConfigError> { v.parse().map_err(|_| bad("not an integer")) };
        let parse_bool = |v: &str| -> Result<bool, ConfigError> {
            match v {
                "true" | "yes" | "1" | "on" => Ok(true),
                "false" | "no" | "0" | "off" => Ok(false),
                _ => Err(bad("not a boolean")),
            }
        };

        match key.as_str() {
            "scenario" | "geometry" => {
                config = match value.as_str() {
                    "shear" => rebase(config, ScenarioConfig::shear()),
                    "lpanel" | "l_panel" | "lshaped" | "l_shaped" => {
                        rebase(config, ScenarioConfig::lpanel())
                    }
                    _ => return Err(bad("expected `shear` or `lpanel`")),
                };
            }
            "nu" | "nu0" => {
                let nu = parse_f(&value)?;
                if nu.to_f64_lossy() >= 0.5 {
                    return Err(ConfigError::PoissonBlowup(nu.to_f64_lossy()));
                }
                if nu < T::zero() {
                    return Err(bad("nu must be nonnegative"));
                }
                config.nu = nu;
                nu_given = true;
            }
            "mu" | "mu0" => config.mu = parse_f(&value)?,
            "lambda" | "lambda0" => {
                lambda_given = Some((line, parse_f(&value)?));
            }
            "g_c" | "gc" => config.g_c = parse_f(&value)?,
            "kappa" => config.kappa = parse_f(&value)?,
            "epsilon" | "epsilon0" | "eps" => config.epsilon = Some(parse_f(&value)?),
            "h0" | "h" => {
                // Accepted for compatibility with the published parameter
                // tables; the mesh size always comes from the actual mesh.
                let _ = parse_f(&value)?;
            }
            "dt" | "delta_t" | "deltat" => config.dt = parse_f(&value)?,
            "t_end" | "end_time" | "t" => config.t_end = parse_f(&value)?,
            "refinements" => config.refinements = parse_usize(&value)?,
            "base_subdivisions" => config.base_subdivisions = parse_usize(&value)?,
            "formulation" => {
                config.formulation = match value.as_str() {
                    "standard_q1q1" | "standard-q1q1" => FormulationKind::StandardQ1Q1,
                    "standard_q2q1" | "standard-q2q1" => FormulationKind::StandardQ2Q1,
                    "mixed" => FormulationKind::MixedQ2Q1Q1Q1Star,
                    _ => {
                        return Err(bad(
                            "expected `standard-q1q1`, `standard-q2q1` or `mixed`",
                        ))
                    }
                };
            }
            "irreversibility" => {
                config.irreversibility = match value.as_str() {
                    "multiplier" => IrreversibilityMode::Multiplier,
                    "simple_penalty" | "simple-penalty" | "penalty" => {
                        IrreversibilityMode::SimplePenalty
                    }
                    _ => return Err(bad("expected `multiplier` or `simple-penalty`")),
                };
            }
            "degrade_pressure_mass" => config.degrade_pressure_mass = parse_bool(&value)?,
            "use_mu_in_driving_force" => config.use_mu_in_driving_force = parse_bool(&value)?,
            "mirror_slit" => config.mirror_slit = parse_bool(&value)?,
            "slit_mode" => {
                config.slit_mode = match value.as_str() {
                    "geometric" => SlitMode::Geometric,
                    "phase_initial" | "phase-initial" | "phase" => SlitMode::PhaseFieldInitial,
                    _ => return Err(bad("expected `geometric` or `phase-initial`")),
                };
            }
            "load_boundary" => {
                config.load_boundary = parse_tag(&value).ok_or_else(|| bad("unknown tag"))?;
            }
            "snapshots" => {
                let mut out = Vec::new();
                for piece in value.split(',') {
                    let piece = piece.trim();
                    if piece.is_empty() {
                        continue;
                    }
                    out.push(
                        piece
                            .parse::<f64>()
                            .map(T::lit)
                            .map_err(|e| bad(&e.to_string()))?,
                    );
                }
                config.snapshots = out;
            }
            "output_dir" => config.output_dir = PathBuf::from(value),
            _ => {
                return Err(ConfigError::UnknownKey { line, key });
            }
        }
    }

    if let Some((_, lambda)) = lambda_given {
        if nu_given {
            let expected = lame_from_poisson(config.nu, config.mu)
                .map_err(|_| ConfigError::PoissonBlowup(config.nu.to_f64_lossy()))?;
            let rel = (lambda - expected).abs()
                / expected.abs().max(T::lit(1e-30));
            if rel > T::lit(1e-9) {
                return Err(ConfigError::LambdaInconsistent {
                    lambda: lambda.to_f64_lossy(),
                    nu: config.nu.to_f64_lossy(),
                    mu: config.mu.to_f64_lossy(),
                    expected: expected.to_f64_lossy(),
                });
            }
        } else {
            // Derive nu from (lambda, mu): nu = lambda / (2 (lambda + mu)).
            config.nu = lambda / (T::lit(2.0) * (lambda + config.mu));
        }
    }
    Ok(config)
}

/// Switching the scenario resets the geometry-bound defaults but keeps the
/// output directory.
fn rebase<T: Real>(old: ScenarioConfig<T>, fresh: ScenarioConfig<T>) -> ScenarioConfig<T> {
    ScenarioConfig {
        output_dir: old.output_dir,
        ..fresh
    }
}

fn parse_tag(value: &str) -> Option<BoundaryTag> {
    Some(match value {
        "top" => BoundaryTag::Top,
        "bottom" => BoundaryTag::Bottom,
        "left" => BoundaryTag::Left,
        "right" => BoundaryTag::Right,
        "gamma_uy" | "gammauy" | "gamma-uy" => BoundaryTag::GammaUy,
        _ => return None,
    })
}

fn tag_name(tag: BoundaryTag) -> &'static str {
    match tag {
        BoundaryTag::Top => "top",
        BoundaryTag::Bottom => "bottom",
        BoundaryTag::Left => "left",
        BoundaryTag::Right => "right",
        BoundaryTag::GammaUy => "gamma_uy",
        BoundaryTag::SlitUpper => "slit_upper",
        BoundaryTag::SlitLower => "slit_lower",
        BoundaryTag::ReentrantFaces => "reentrant",
    }
}

/// Emit the effective configuration; `parse(emit(c))` reproduces `c`.
pub fn emit_config<T: Real>(config: &ScenarioConfig<T>) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    let f = |v: T| format!("{:e}", v.to_f64_lossy());
    kv(
        "scenario",
        match config.geometry {
            Geometry::Shear => "shear".into(),
            Geometry::LPanel => "lpanel".into(),
        },
    );
    kv("nu", f(config.nu));
    kv("mu", f(config.mu));
    kv("g_c", f(config.g_c));
    kv("kappa", f(config.kappa));
    if let Some(eps) = config.epsilon {
        kv("epsilon", f(eps));
    }
    kv("base_subdivisions", config.base_subdivisions.to_string());
    kv("refinements", config.refinements.to_string());
    kv("dt", f(config.dt));
    kv("t_end", f(config.t_end));
    kv(
        "formulation",
        match config.formulation {
            FormulationKind::StandardQ1Q1 => "standard-q1q1".into(),
            FormulationKind::StandardQ2Q1 => "standard-q2q1".into(),
            FormulationKind::MixedQ2Q1Q1Q1Star => "mixed".into(),
        },
    );
    kv(
        "irreversibility",
        match config.irreversibility {
            IrreversibilityMode::Multiplier => "multiplier".into(),
            IrreversibilityMode::SimplePenalty => "simple-penalty".into(),
        },
    );
    kv(
        "degrade_pressure_mass",
        config.degrade_pressure_mass.to_string(),
    );
    kv(
        "use_mu_in_driving_force",
        config.use_mu_in_driving_force.to_string(),
    );
    kv("mirror_slit", config.mirror_slit.to_string());
    kv(
        "slit_mode",
        match config.slit_mode {
            SlitMode::Geometric => "geometric".into(),
            SlitMode::PhaseFieldInitial => "phase-initial".into(),
        },
    );
    kv("load_boundary", tag_name(config.load_boundary).into());
    if !config.snapshots.is_empty() {
        kv(
            "snapshots",
            config
                .snapshots
                .iter()
                .map(|&t| format!("{:e}", t.to_f64_lossy()))
                .collect::<Vec<_>>()
                .join(","),
        );
    }
    kv(
        "output_dir",
        config.output_dir.to_string_lossy().into_owned(),
    );
    out
}
