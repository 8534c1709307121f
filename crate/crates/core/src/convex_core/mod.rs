//! Polytope representations and the convex-body expression algebra.

pub mod body;
pub mod hull;
pub mod polytope;

pub use body::{BodyExpr, DirectPart, PolyBall};
pub use hull::{Facet, Hull, MAX_DIM};
pub use polytope::{Atom, HPolytope, Halfspace, SurfaceMeasure, VPolytope};
