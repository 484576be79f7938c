//! Quadrilateral finite elements for quasi-static phase-field brittle
//! fracture in (nearly) incompressible solids.
//!
//! The crate implements two problem formulations on structured quad meshes:
//!
//! * the classical displacement/phase-field system (`Q1Q1` or `Q2Q1`), and
//! * a mixed displacement/pressure/phase-field/multiplier system
//!   (`Q2 Q1 Q1 Q1*`) that stays stable as Poisson's ratio approaches 1/2,
//!
//! together with an analysis toolbox (manufactured-solution convergence,
//! volume-locking demonstration, discrete inf-sup constants) and a CLI for
//! the two benchmark scenarios (single-edge notched shear test, L-shaped
//! panel test).
//!
//! All numerical modules are generic over the scalar type via [`scalar::Real`];
//! concrete `f64` aliases for the main types live at the crate root.

pub mod scalar;

pub mod fem;
pub mod mesh;

pub mod material;
pub mod model;
pub mod solver;

pub mod analysis;
pub mod io;
pub mod scenarios;

pub use scalar::Real;

/// `f64` instantiations of the main domain types (the production scalar).
pub type Mesh64 = mesh::Mesh<f64>;
pub type MaterialParams64 = material::MaterialParams<f64>;
pub type SystemState64 = model::SystemState<f64>;
pub type ScenarioConfig64 = scenarios::ScenarioConfig<f64>;
pub type SparseMatrix64 = fem::sparse::CsrMatrix<f64>;
pub type DofMap64 = fem::dofmap::DofMap;

/// `f32` instantiations, provided for experimentation.
pub type Mesh32 = mesh::Mesh<f32>;
pub type MaterialParams32 = material::MaterialParams<f32>;
