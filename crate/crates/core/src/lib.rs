//! Certified bounds on n-widths and s-numbers of finite-dimensional linear
//! operators restricted to convex bodies.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod numerics;
pub mod recovery;
pub(crate) mod serde_util;
pub mod spaces;
pub mod verify;
pub mod widths;
pub mod witness;

pub use error::{Error, Result};
pub use numerics::SearchConfig;
pub use recovery::{InformationMap, McEstimate, RecoveryReport};
pub use spaces::{ConvexBody, Functional, Instance, NormTag, Operator, Subspace};
pub use verify::{InequalityReport, RateReport, SuiteReport, Verdict};
pub use widths::{Bounds, InfoClass, WidthKind, WidthSet, Witness};
pub use witness::{ChainCertificate, ChainVariant, WitnessChain};
