//! Normed sequence spaces, operators between them and convex bodies.

pub mod body;
pub mod instance;
pub mod norm;
pub mod subspace;

pub use body::{ConvexBody, HalfDifference, Shape, MEMBERSHIP_TOL};
pub use instance::{DiffShape, Instance, Operator, Prepared};
pub use norm::{norm_eval, norming_functional, Functional, NormTag};
pub use subspace::{nullspace, Subspace};
