//! Numerical engine for curvature pinching bounds on four-manifolds:
//! algebraic curvature operators, Finsler-Thorpe certificates, quadratic
//! programs over small polytopes, the resulting geography bounds, and
//! randomized cross-checks.

pub mod curvature;
pub mod error;
pub mod geography;
pub mod linalg;
pub mod oracle;
pub mod polytopes;
pub mod qp_face;
pub mod quadforms;
pub mod ricci;

pub use error::{Error, Result};
