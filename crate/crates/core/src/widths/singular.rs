//! The Hilbert-ball regime, where every width equals `r σ_{n+1}(S)`.

use crate::error::{Error, Result};
use crate::numerics::linalg::svd;
use crate::spaces::{Instance, Shape};

/// `r σ_{n+1}(S)` for `n = 0, …, d − 1`, padded with zeros past the rank.
pub fn singular_widths(inst: &Instance) -> Result<Vec<f64>> {
    if !inst.is_hilbert_ball() {
        return Err(Error::WrongRegime(
            "singular widths need Euclidean norms and a Euclidean ball centred at 0".into(),
        ));
    }
    let Shape::Ball { radius, .. } = &inst.prepared()?.body else {
        unreachable!("checked above");
    };
    let dec = svd(inst.matrix());
    Ok((0..inst.source_dim()).map(|k| radius * dec.sigma_at(k)).collect())
}
