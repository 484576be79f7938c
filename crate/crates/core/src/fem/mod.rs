//! Reference elements, quadrature, dof management, sparse assembly, norms
//! and boundary integration on quadrilateral meshes.

pub mod assembly;
pub mod dofmap;
pub mod element;
pub mod norms;
pub mod quadrature;
pub mod sparse;

pub use dofmap::{DofMap, ElementPairing, Field};
pub use element::{ElementKind, ReferenceElement};
pub use quadrature::{gauss_rule, gauss_rule_1d, QuadratureRule};
pub use sparse::{CsrMatrix, Triplets};
