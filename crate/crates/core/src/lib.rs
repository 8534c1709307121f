//! Convex geometry toolkit for shadow covering experiments: polytopes and
//! body expressions, projections, mixed volumes, translate containment,
//! surface-measure reconstruction and inequality checks in dimensions 2 to 6.

pub mod blaschke;
pub mod constructions;
pub mod containment;
pub mod convex_core;
pub mod error;
pub mod experiments;
pub mod inequalities;
pub mod linalg;
pub mod lp;
pub mod mixed_volumes;
pub mod projections;
pub mod qp;
pub mod report;
pub mod rng;

pub use convex_core::{BodyExpr, HPolytope, SurfaceMeasure, VPolytope};
pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
