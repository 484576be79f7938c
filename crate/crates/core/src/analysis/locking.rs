//! Manufactured-solution convergence studies and the volume-locking
//! demonstration.

use crate::analysis::decoupled::{solve_decoupled_mixed, solve_decoupled_primal};
use crate::analysis::manufactured::Manufactured;
use crate::fem::dofmap::{DofMap, ElementPairing};
use crate::fem::norms::{h1_error_u, l2_error_u};
use crate::material::lame_from_poisson;
use crate::mesh::build_unit_square_mesh;
use crate::scalar::Real;
use crate::solver::linear::LinearSolveError;

/// Discretization used in a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    PrimalQ1,
    PrimalQ2,
    MixedQ2Q1,
    /// Equal-order mixed pairing; unstable, kept for the spurious-mode
    /// demonstration.
    MixedQ1Q1,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::PrimalQ1 => "primal-q1",
            Method::PrimalQ2 => "primal-q2",
            Method::MixedQ2Q1 => "mixed-q2q1",
            Method::MixedQ1Q1 => "mixed-q1q1",
        }
    }

    fn pairing(self) -> ElementPairing {
        match self {
            Method::PrimalQ1 | Method::MixedQ1Q1 => ElementPairing::Q1Q1,
            Method::PrimalQ2 | Method::MixedQ2Q1 => ElementPairing::Q2Q1,
        }
    }
}

/// One refinement row of a convergence table.
#[derive(Debug, Clone, Copy)]
pub struct ConvergenceRow<T> {
    pub subdivisions: usize,
    pub h: T,
    pub l2_error: T,
    pub h1_error: T,
}

/// Errors per refinement with observed orders.
#[derive(Debug, Clone)]
pub struct ConvergenceTable<T> {
    pub method: Method,
    pub nu: T,
    pub rows: Vec<ConvergenceRow<T>>,
}

impl<T: Real> ConvergenceTable<T> {
    /// Observed L2 orders `log2(e_k / e_{k+1})`, with a floor guard: rows
    /// whose errors dip below 1e-12 are skipped.
    pub fn l2_orders(&self) -> Vec<T> {
        orders(self.rows.iter().map(|r| r.l2_error).collect())
    }

    pub fn h1_orders(&self) -> Vec<T> {
        orders(self.rows.iter().map(|r| r.h1_error).collect())
    }
}

fn orders<T: Real>(errors: Vec<T>) -> Vec<T> {
    let floor = T::lit(1e-12);
    let mut out = Vec::new();
    for pair in errors.windows(2) {
        if pair[0] > floor && pair[1] > floor {
            out.push((pair[0] / pair[1]).log2());
        }
    }
    out
}

/// Convergence study of a method against a manufactured solution on the
/// unit square (`mu = 1`, `lambda` from `nu`, intact material).
pub fn convergence_study<T: Real>(
    method: Method,
    manufactured: Manufactured,
    nu: T,
    subdivisions: &[usize],
) -> Result<ConvergenceTable<T>, LinearSolveError> {
    let mu = T::one();
    let lambda = lame_from_poisson(nu, mu).expect("nu in [0, 0.5)");
    let kappa = T::lit(1e-10);
    let phi = |_: [T; 2]| T::one();
    let mut rows = Vec::with_capacity(subdivisions.len());
    for &n in subdivisions {
        let mesh = build_unit_square_mesh::<T>(n);
        let pairing = method.pairing();
        let u = match method {
            Method::PrimalQ1 | Method::PrimalQ2 => solve_decoupled_primal(
                &mesh,
                lambda,
                mu,
                kappa,
                pairing,
                &phi,
                &|x| manufactured.body_force(x, lambda, mu),
                &|x| manufactured.value(x),
            )?,
            Method::MixedQ2Q1 | Method::MixedQ1Q1 => {
                let (u, _p) = solve_decoupled_mixed(
                    &mesh,
                    lambda,
                    mu,
                    kappa,
                    pairing,
                    &phi,
                    &|x| manufactured.body_force(x, lambda, mu),
                    &|x| manufactured.value(x),
                )?;
                u
            }
        };
        let dm = DofMap::build(&mesh, pairing, false);
        rows.push(ConvergenceRow {
            subdivisions: n,
            h: mesh.h(),
            l2_error: l2_error_u(&mesh, &dm, &u, |x| manufactured.value(x)),
            h1_error: h1_error_u(&mesh, &dm, &u, |x| manufactured.gradient(x)),
        });
    }
    Ok(ConvergenceTable {
        method,
        nu,
        rows,
    })
}

/// Locking study: convergence tables per Poisson ratio per method for the
/// divergence-free manufactured solution, whose exact solution does not
/// depend on `lambda`.
pub struct LockingStudy<T> {
    pub tables: Vec<ConvergenceTable<T>>,
}

impl<T: Real> LockingStudy<T> {
    pub fn table(&self, method: Method, nu: T) -> Option<&ConvergenceTable<T>> {
        self.tables
            .iter()
            .find(|t| t.method == method && (t.nu - nu).abs() < T::lit(1e-12))
    }

    /// Coarsest-mesh L2-error ratio between two Poisson ratios.
    pub fn locking_ratio(&self, method: Method, nu_hi: T, nu_lo: T) -> Option<T> {
        let hi = self.table(method, nu_hi)?.rows.first()?.l2_error;
        let lo = self.table(method, nu_lo)?.rows.first()?.l2_error;
        Some(hi / lo)
    }
}

pub fn locking_study<T: Real>(
    methods: &[Method],
    nu_list: &[T],
    subdivisions: &[usize],
) -> Result<LockingStudy<T>, LinearSolveError> {
    let mut tables = Vec::new();
    for &method in methods {
        for &nu in nu_list {
            tables.push(convergence_study(
                method,
                Manufactured::DivergenceFree,
                nu,
                subdivisions,
            )?);
        }
    }
    Ok(LockingStudy { tables })
}
