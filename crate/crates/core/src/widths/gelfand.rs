//! Gelfand numbers `c_n = inf_{codim M ≤ n} sup_{p ∈ D ∩ M} ‖S p‖`.

use nalgebra::{DMatrix, DVector};

use super::context::{full_frame, search_frames, Context, Exact, FrameSide};
use super::{rows_of, Bounds, InfoClass, Side, WidthKind, Witness};
use crate::error::{Error, Result};
use crate::numerics::ball::{dual_seminorm_arg, euclidean_reach_arg};
use crate::numerics::linalg::complement;
use crate::numerics::polytope::{binomial, for_each_combination};
use crate::numerics::{max_seminorm_on_section, SearchConfig};
use crate::spaces::{DiffShape, Functional, Instance, Subspace};
use crate::witness::{build_chain, ChainVariant, DEFAULT_EPS};

/// Largest number of subsets enumerated for a finite information class.
const MAX_SUBSETS: u64 = 20_000;

/// Number of best candidates refined by rotations.
const REFINE: usize = 2;

/// Section value on the joint kernel of the rows of `functionals` (`k × d`),
/// with a flag telling whether the maximization was exact.
pub fn kernel_value(inst: &Instance, functionals: &DMatrix<f64>, cfg: &SearchConfig) -> Result<(f64, bool)> {
    let d = inst.source_dim();
    if functionals.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: functionals.ncols(),
        });
    }
    let sub = Subspace::kernel_of_rows(functionals, d);
    let sm = max_seminorm_on_section(inst, &sub, cfg)?;
    Ok((sm.value, sm.certified))
}

fn frame_value(inst: &Instance, frame: &DMatrix<f64>, cfg: &SearchConfig) -> Result<(f64, bool)> {
    kernel_value(inst, &frame.transpose(), cfg)
}

fn kernel_witness(frame: &DMatrix<f64>) -> Witness {
    Witness::Kernel {
        functionals: rows_of(&frame.transpose()),
    }
}

/// Gelfand number over all linear functionals or over a finite class.
pub fn gelfand(inst: &Instance, n: usize, info: &InfoClass, cfg: &SearchConfig) -> Result<Bounds> {
    cfg.validate()?;
    info.validate()?;
    match info {
        InfoClass::AllLinear => Context::new(inst, n, cfg).gelfand_bounds(),
        InfoClass::FiniteSet(set) => finite(inst, n, set, cfg),
    }
}

/// Exhaustive minimum over `n`-subsets of a finite class.
fn finite(inst: &Instance, n: usize, set: &[Functional], cfg: &SearchConfig) -> Result<Bounds> {
    let d = inst.source_dim();
    for f in set {
        if f.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: f.dim() });
        }
    }
    let k = n.min(set.len());
    if binomial(set.len(), k) > MAX_SUBSETS {
        return Err(Error::Unsupported(format!(
            "{} subsets of a class of size {}",
            binomial(set.len(), k),
            set.len()
        )));
    }
    let mut best: Option<(f64, bool, DMatrix<f64>)> = None;
    let mut failure: Option<Error> = None;
    for_each_combination(set.len(), k, |idx| {
        if failure.is_some() {
            return;
        }
        let rows = DMatrix::from_fn(k, d, |i, j| set[idx[i]].coefficients[j]);
        match kernel_value(inst, &rows, cfg) {
            Ok((v, c)) => {
                if best.as_ref().is_none_or(|b| v < b.0 - 1e-13) {
                    best = Some((v, c, rows));
                }
            }
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let (value, certified, rows) = best.expect("at least the empty subset");
    let witness = Witness::Kernel {
        functionals: rows_of(&rows),
    };
    Ok(Bounds::new(
        WidthKind::Gelfand,
        n,
        Side::new(value, certified, witness.clone()),
        Side::new(value, certified, witness),
    ))
}

/// Closed-form regimes: `n = 0`, `n ≥ rank S`, the Hilbert ball, and
/// `n = d − 1` with `S` injective.
pub(crate) fn exact(ctx: &Context) -> Result<Option<Exact>> {
    let inst = ctx.inst;
    let n = ctx.n;
    let d = ctx.d();
    let rank = ctx.rank();
    if n == 0 {
        let sm = max_seminorm_on_section(inst, &Subspace::full(d), ctx.cfg)?;
        let side = Side::new(sm.value, sm.certified, Witness::ClosedForm { note: "half diameter of S(F)".into() });
        return Ok(Some(Exact {
            lower: side.clone(),
            upper: Some(side),
            frame: Some(DMatrix::zeros(d, 0)),
        }));
    }
    if n >= rank || n >= d {
        let frame = ctx.right_frame(n);
        let side = Side::new(0.0, true, kernel_witness(&frame));
        return Ok(Some(Exact {
            lower: Side::zero_lower(),
            upper: Some(side),
            frame: Some(frame),
        }));
    }
    if let Some(v) = ctx.singular_value() {
        let frame = ctx.right_frame(n);
        return Ok(Some(Exact {
            lower: Side::closed(v, "r·σ_{n+1}(S)"),
            upper: Some(Side::new(v, true, kernel_witness(&frame))),
            frame: Some(frame),
        }));
    }
    if n + 1 == d && rank == d {
        let (value, dir) = last_index(ctx)?;
        let frame = complement(&DMatrix::from_column_slice(d, 1, dir.as_slice()));
        return Ok(Some(Exact {
            lower: Side::closed(value, "inradius of D in the norm ‖S·‖"),
            upper: None,
            frame: Some(frame),
        }));
    }
    Ok(None)
}

/// `c_{d−1}` for injective `S`: the largest `r` with `{‖S x‖ ≤ r} ⊆ D`, and
/// the direction of the line where the ball touches the boundary of `D`.
fn last_index(ctx: &Context) -> Result<(f64, DVector<f64>)> {
    let inst = ctx.inst;
    let s = inst.matrix();
    let t = inst.target_norm();
    let prep = inst.prepared()?;
    match &prep.diff {
        DiffShape::Ball { radius } => {
            let (reach, z) = euclidean_reach_arg(s, t)?;
            Ok((radius / reach, z))
        }
        DiffShape::Polytope { .. } => {
            let h = prep.diff_hrep()?;
            let mut best: Option<(f64, DVector<f64>)> = None;
            for i in 0..h.len() {
                let (hi, z) = dual_seminorm_arg(&h.a.row(i).transpose(), s, t)?;
                let r = h.b[i] / hi;
                if best.as_ref().is_none_or(|b| r < b.0) {
                    best = Some((r, z));
                }
            }
            best.ok_or_else(|| Error::InvalidBody("difference body has no facets".into()))
        }
    }
}

/// Best kernel found by candidate enumeration and rotation refinement.
pub(crate) fn upper(ctx: &Context) -> Result<FrameSide> {
    if let Some(Exact { upper: Some(side), frame, .. }) = ctx.g_exact()? {
        return Ok(FrameSide {
            side: side.clone(),
            frame: frame.clone(),
        });
    }
    let inst = ctx.inst;
    let n = ctx.n;
    let d = ctx.d();
    let mut candidates = vec![ctx.right_frame(n)];
    if let Some(Exact { frame: Some(f), .. }) = ctx.g_exact()? {
        candidates.insert(0, f.clone());
    }
    if let Ok(chain) = build_chain(inst, n, ChainVariant::General, DEFAULT_EPS, ctx.cfg) {
        if chain.len() == n {
            let rows = DMatrix::from_fn(d, n, |i, j| chain.steps[j].l.coefficients[i]);
            if let Some(f) = full_frame(&rows) {
                candidates.push(f);
            }
        }
    }
    candidates.extend(ctx.generic_frames(d, n, 1));
    let mut failure: Option<Error> = None;
    let eval = |f: &DMatrix<f64>| match frame_value(inst, f, ctx.cfg) {
        Ok((v, _)) => Some(v),
        Err(e) => {
            failure.get_or_insert(e);
            None
        }
    };
    let best = search_frames(candidates, eval, REFINE, ctx.cfg);
    let Some((frame, _)) = best else {
        return Err(failure.unwrap_or(Error::Uncertified("no kernel candidate could be evaluated".into())));
    };
    let (value, certified) = frame_value(inst, &frame, ctx.cfg)?;
    Ok(FrameSide {
        side: Side::new(value, certified, kernel_witness(&frame)),
        frame: Some(frame),
    })
}
