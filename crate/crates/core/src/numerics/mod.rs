//! Solvers shared by the width estimators: dense linear algebra, a simplex LP
//! solver, polytope enumeration, and the section / inscribed-ball /
//! Chebyshev-centre subproblems.

pub mod ball;
pub mod chebyshev;
pub mod linalg;
pub mod lp;
pub mod polytope;
pub mod search;
pub mod section;

use serde::{Deserialize, Serialize};

pub use ball::{inscribed_ball, InscribedBall};
pub use chebyshev::{chebyshev_center, ChebyshevCenter};
pub use linalg::{kernel_basis, orthonormalize, singular_values, spectral_norm, svd, Svd};
pub use lp::{lp_solve, LpProblem, LpSolution, Relation, Sense};
pub use section::{max_seminorm_on_section, SectionMax};

pub use crate::spaces::nullspace;

/// Knobs for the randomized searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Number of random starting frames.
    pub restarts: usize,
    /// Cap on objective evaluations in each local refinement.
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iters: 500,
            tol: 1e-8,
            seed: 42,
        }
    }
}

impl SearchConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> crate::Result<()> {
        if self.restarts == 0 {
            return Err(crate::Error::Parse("restarts must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(crate::Error::Parse("tol must be positive".into()));
        }
        Ok(())
    }
}
