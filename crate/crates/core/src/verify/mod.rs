//! Falsification checks of the width inequalities on certified bound sides,
//! plus rate fitting.
//!
//! Every check compares a certified lower bound of the smaller side with a
//! certified upper bound of the larger side, so a failing report with
//! certified sides is a genuine counterexample or a solver bug.

mod suite;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::SearchConfig;
use crate::recovery::{worst_case_error, InformationMap};
use crate::spaces::{Functional, Instance, NormTag, Shape};
use crate::widths::{shifted_kolmogorov, Bounds, WidthSet, Witness};
use crate::witness::{build_chain, certify_chain, ChainVariant, DEFAULT_EPS};

pub use suite::{default_suite, run_entries, run_suite, SuiteEntry, SuiteReport};

/// Slack of every inequality check.
pub const CHECK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    /// A side was heuristic; the comparison is informative only.
    Uncertified,
    /// The hypotheses of the inequality are not met.
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub name: String,
    pub instance: String,
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub factor: f64,
    pub holds: bool,
    /// `rhs − lhs`.
    pub margin: f64,
    pub sides_certified: bool,
    /// `true` for proven inequalities, `false` for exploratory comparisons.
    pub proven: bool,
    pub verdict: Verdict,
}

impl InequalityReport {
    pub fn new(name: &str, instance: &str, n: usize, lhs: f64, rhs: f64, factor: f64, sides_certified: bool) -> Self {
        let holds = lhs <= rhs + CHECK_TOL;
        let verdict = match (sides_certified, holds) {
            (false, _) => Verdict::Uncertified,
            (true, true) => Verdict::Holds,
            (true, false) => Verdict::Violated,
        };
        InequalityReport {
            name: name.into(),
            instance: instance.into(),
            n,
            lhs,
            rhs,
            factor,
            holds,
            margin: rhs - lhs,
            sides_certified,
            proven: true,
            verdict,
        }
    }

    fn not_applicable(name: &str, instance: &str, n: usize) -> Self {
        InequalityReport {
            name: name.into(),
            instance: instance.into(),
            n,
            lhs: f64::NAN,
            rhs: f64::NAN,
            factor: f64::NAN,
            holds: false,
            margin: f64::NAN,
            sides_certified: false,
            proven: true,
            verdict: Verdict::NotApplicable,
        }
    }

    /// A proven inequality that failed on certified sides.
    pub fn is_failure(&self) -> bool {
        self.proven && self.verdict == Verdict::Violated
    }
}

/// Least-squares rate `α` of `z_k ≈ C k^{−α}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub name: String,
    pub alpha: f64,
    /// Root-mean-square residual of the log–log fit.
    pub residual: f64,
    pub len: usize,
}

/// Fits `−log z_k = α log k + β` for `k = 1, …, len`.
pub fn fit_rate(name: &str, z: &[f64]) -> Result<RateReport> {
    if z.len() < 3 {
        return Err(Error::Parse("rate fitting needs at least three entries".into()));
    }
    if let Some(k) = z.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Parse(format!("entry {} is not positive", k + 1)));
    }
    let xs: Vec<f64> = (1..=z.len()).map(|k| (k as f64).ln()).collect();
    let ys: Vec<f64> = z.iter().map(|v| -v.ln()).collect();
    let nf = z.len() as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let alpha = sxy / sxx;
    let beta = my - alpha * mx;
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - alpha * x - beta).powi(2)).sum::<f64>() / nf).sqrt();
    Ok(RateReport {
        name: name.into(),
        alpha,
        residual,
        len: z.len(),
    })
}

fn geometric_mean(z: &[f64]) -> f64 {
    if z.iter().any(|&v| v <= 0.0) {
        return 0.0;
    }
    (z.iter().map(|v| v.ln()).sum::<f64>() / z.len() as f64).exp()
}

fn non_increasing_positive(z: &[f64]) -> bool {
    z.iter().all(|&v| v > 0.0) && z.windows(2).all(|w| w[1] <= w[0])
}

/// `(∏_{k≤n} z_k)^{1/n} ≤ c⁴ z_n` for `z_1 ≥ … ≥ z_n > 0` with
/// `z_k ≤ c z_{2k}` for `k ≤ n/2`; `z[0]` is `z_1`.
pub fn check_regularity(name: &str, z: &[f64], c: f64) -> InequalityReport {
    let n = z.len();
    let applicable = n >= 2 && n.is_multiple_of(2) && non_increasing_positive(z) && (1..=n / 2).all(|k| z[k - 1] <= c * z[2 * k - 1] * (1.0 + 1e-12));
    if !applicable {
        return InequalityReport::not_applicable("regularity", name, n);
    }
    let factor = c.powi(4);
    InequalityReport::new("regularity", name, n, geometric_mean(z), factor * z[n - 1], factor, true)
}

/// `(∏_{k≤n} z_k)^{1/n} ≤ √(z_1 z_{n/2})`; `z[0]` is `z_1`.
pub fn check_superpolynomial(name: &str, z: &[f64]) -> InequalityReport {
    let n = z.len();
    if n < 2 || n % 2 == 1 || !non_increasing_positive(z) {
        return InequalityReport::not_applicable("superpolynomial", name, n);
    }
    InequalityReport::new("superpolynomial", name, n, geometric_mean(z), (z[0] * z[n / 2 - 1]).sqrt(), 1.0, true)
}

/// Exponent of the width inequalities: `3/2` in general, `1` for symmetric
/// bodies or Euclidean targets, `1/2` when both hold.
pub fn width_gamma(inst: &Instance) -> Result<f64> {
    let sym = inst.is_symmetric()?;
    let hilbert = inst.target_norm() == NormTag::L2;
    Ok(match (sym, hilbert) {
        (true, true) => 0.5,
        (true, false) | (false, true) => 1.0,
        (false, false) => 1.5,
    })
}

/// `h_n ≤ b_n` and `b_n ≤ c_n`.
pub fn ordering_reports(name: &str, w: &WidthSet) -> Vec<InequalityReport> {
    vec![
        InequalityReport::new(
            "ordering_hilbert_bernstein",
            name,
            w.n,
            w.hilbert.lower,
            w.bernstein.upper,
            1.0,
            w.hilbert.lower_certified && w.bernstein.upper_certified,
        ),
        InequalityReport::new(
            "ordering_bernstein_gelfand",
            name,
            w.n,
            w.bernstein.lower,
            w.gelfand.upper,
            1.0,
            w.bernstein.lower_certified && w.gelfand.upper_certified,
        ),
    ]
}

pub fn check_ordering(name: &str, inst: &Instance, n: usize, cfg: &SearchConfig) -> Result<Vec<InequalityReport>> {
    Ok(ordering_reports(name, &WidthSet::compute(inst, n, cfg)?))
}

fn lower_upper(name: &str, inst_name: &str, n: usize, lo: &Bounds, hi: &Bounds, factor: f64) -> InequalityReport {
    InequalityReport::new(
        name,
        inst_name,
        n,
        lo.lower,
        factor * hi.upper,
        factor,
        lo.lower_certified && hi.upper_certified,
    )
}

/// `c_n ≤ (n+1) b_n`, with `√(n+1)` for symmetric `F`; Euclidean targets only.
pub fn hilbert_target_report(name: &str, inst: &Instance, w: &WidthSet) -> Result<InequalityReport> {
    if inst.target_norm() != NormTag::L2 {
        return Err(Error::WrongRegime("the comparison needs a Euclidean target".into()));
    }
    let n1 = (w.n + 1) as f64;
    let factor = if inst.is_symmetric()? { n1.sqrt() } else { n1 };
    Ok(lower_upper("hilbert_target", name, w.n, &w.gelfand, &w.bernstein, factor))
}

pub fn check_hilbert_target(name: &str, inst: &Instance, n: usize, cfg: &SearchConfig) -> Result<InequalityReport> {
    if inst.target_norm() != NormTag::L2 {
        return Err(Error::WrongRegime("the comparison needs a Euclidean target".into()));
    }
    hilbert_target_report(name, inst, &WidthSet::compute(inst, n, cfg)?)
}

/// Certificate-level geometric-mean inequality of one chain:
/// `∏ value_k ≤ N^{γN} (1+eps)^N ∏ σ_k(S_N)`, compared in logarithms.
/// Returns `None` when the chain collapses before `n` steps.
pub fn check_geometric_mean(
    name: &str,
    inst: &Instance,
    n: usize,
    variant: ChainVariant,
    cfg: &SearchConfig,
) -> Result<Option<InequalityReport>> {
    let chain = build_chain(inst, n, variant, DEFAULT_EPS, cfg)?;
    if chain.is_truncated() || chain.is_empty() {
        return Ok(None);
    }
    let cert = certify_chain(&chain, inst)?;
    let certified = chain.steps.iter().all(|s| s.certified);
    let mut r = InequalityReport::new(
        &format!("chain_certificate_{variant}"),
        name,
        n,
        cert.log_gelfand_product,
        cert.log_hilbert_side,
        cert.gamma,
        certified,
    );
    if certified && !cert.all_ok() {
        r.holds = false;
        r.verdict = Verdict::Violated;
    }
    Ok(Some(r))
}

/// `c_{N−1} ≤ N^γ (∏_{k<N} h_k)^{1/N}` with `N = sets.len()` and `sets[k]` at index `k`.
pub fn widths_geometric_mean_report(name: &str, inst: &Instance, sets: &[WidthSet]) -> Result<Option<InequalityReport>> {
    let big_n = sets.len();
    if big_n == 0 || sets.iter().enumerate().any(|(k, s)| s.n != k) {
        return Ok(None);
    }
    let gamma = width_gamma(inst)?;
    let factor = (big_n as f64).powf(gamma);
    let h: Vec<f64> = sets.iter().map(|s| s.hilbert.upper).collect();
    let last = &sets[big_n - 1];
    let certified = last.gelfand.lower_certified && sets.iter().all(|s| s.hilbert.upper_certified);
    Ok(Some(InequalityReport::new(
        "widths_geometric_mean",
        name,
        big_n - 1,
        last.gelfand.lower,
        factor * geometric_mean(&h),
        factor,
        certified,
    )))
}

/// `σ_N ≤ N^{1/2} (∏_{k≤N} σ_k)^{1/N}` for the singular values of `S`.
pub fn singular_geometric_mean_report(name: &str, sigma: &[f64], big_n: usize) -> InequalityReport {
    let factor = (big_n as f64).sqrt();
    InequalityReport::new(
        "singular_geometric_mean",
        name,
        big_n,
        sigma[big_n - 1],
        factor * geometric_mean(&sigma[..big_n]),
        factor,
        true,
    )
}

/// Relations of the Kolmogorov numbers at index `n`, given the sets for
/// indices `0..=n`: the geometric-mean bound, `c_n ≤ d_n` for Euclidean
/// targets, and `d_n ≤ (n+1)² b_n` for symmetric bodies.
pub fn kolmogorov_reports(name: &str, inst: &Instance, sets: &[WidthSet], cfg: &SearchConfig) -> Result<Vec<InequalityReport>> {
    let mut out = Vec::new();
    let Some(w) = sets.last() else {
        return Ok(out);
    };
    let n = w.n;
    let n1 = (n + 1) as f64;
    let sym = inst.is_symmetric()?;
    // the relations are stated for the translation-invariant width
    let d = if inst.is_origin_symmetric()? {
        w.kolmogorov.clone()
    } else {
        shifted_kolmogorov(inst, n, cfg)?
    };
    if sets.iter().enumerate().all(|(k, s)| s.n == k) {
        let alpha = if sym { 1.0 } else { 1.5 };
        let h: Vec<f64> = sets.iter().map(|s| s.hilbert.upper).collect();
        let factor = n1.powf(alpha);
        out.push(InequalityReport::new(
            "kolmogorov_geometric_mean",
            name,
            n,
            d.lower,
            factor * geometric_mean(&h),
            factor,
            d.lower_certified && sets.iter().all(|s| s.hilbert.upper_certified),
        ));
    }
    if inst.target_norm() == NormTag::L2 {
        out.push(lower_upper("kolmogorov_above_gelfand", name, n, &w.gelfand, &d, 1.0));
    }
    if sym {
        out.push(lower_upper("mityagin_henkin", name, n, &d, &w.bernstein, n1 * n1));
    }
    Ok(out)
}

pub fn check_kolmogorov_relations(name: &str, inst: &Instance, n: usize, cfg: &SearchConfig) -> Result<Vec<InequalityReport>> {
    let ns: Vec<usize> = (0..=n).collect();
    kolmogorov_reports(name, inst, &WidthSet::compute_range(inst, &ns, cfg)?, cfg)
}

/// `a_n ≥ c_n`, and `a_n ≤ (1+√n) c_n` when `F` is the unit ball of the
/// source norm.
pub fn approximation_reports(name: &str, inst: &Instance, w: &WidthSet) -> Result<Vec<InequalityReport>> {
    let mut out = vec![lower_upper("approximation_above_gelfand", name, w.n, &w.gelfand, &w.approximation, 1.0)];
    if is_source_unit_ball(inst) {
        let factor = 1.0 + (w.n as f64).sqrt();
        out.push(lower_upper("approximation_vs_gelfand", name, w.n, &w.approximation, &w.gelfand, factor));
    }
    Ok(out)
}

fn is_source_unit_ball(inst: &Instance) -> bool {
    matches!(&inst.body, crate::spaces::ConvexBody::LpBall { norm, .. } if *norm == inst.op.source_norm)
}

/// Carl-type bound through width proxies:
/// `c_{2n−1} ≤ 12^{α+1} n^{γ−α} max_{k<n} (k+1)^α h_{2k}/2`.
/// `sets[k]` must hold index `k` for `k ≤ 2n − 1`.
pub fn carl_report(name: &str, inst: &Instance, sets: &[WidthSet], n: usize, alpha: f64) -> Result<Option<InequalityReport>> {
    if n == 0 || sets.len() < 2 * n || sets.iter().enumerate().any(|(k, s)| s.n != k) {
        return Ok(None);
    }
    let gamma = width_gamma(inst)?;
    let nf = n as f64;
    let factor = 12f64.powf(alpha + 1.0) * nf.powf(gamma - alpha);
    let sup = (0..n)
        .map(|k| ((k + 1) as f64).powf(alpha) * sets[2 * k].hilbert.upper / 2.0)
        .fold(0.0, f64::max);
    let lhs = &sets[2 * n - 1].gelfand;
    let certified = lhs.lower_certified && (0..n).all(|k| sets[2 * k].hilbert.upper_certified);
    Ok(Some(InequalityReport::new(
        &format!("carl_alpha_{alpha}"),
        name,
        n,
        lhs.lower,
        factor * sup,
        factor,
        certified,
    )))
}

pub fn check_carl(name: &str, inst: &Instance, n: usize, alpha: f64, cfg: &SearchConfig) -> Result<Option<InequalityReport>> {
    let ns: Vec<usize> = (0..2 * n).collect();
    carl_report(name, inst, &WidthSet::compute_range(inst, &ns, cfg)?, n, alpha)
}

/// Optimal recovery with the best Gelfand functionals: the error lies in
/// `[c_n, 2 c_n]`. Only used when `c_n` is known exactly.
pub fn recovery_reports(name: &str, inst: &Instance, w: &WidthSet, cfg: &SearchConfig) -> Result<Vec<InequalityReport>> {
    let c = &w.gelfand;
    if !c.exact {
        return Ok(Vec::new());
    }
    let Witness::Kernel { functionals } = &c.upper_witness else {
        return Ok(Vec::new());
    };
    let dual = inst.op.source_norm.dual();
    let info = InformationMap::linear(
        functionals
            .iter()
            .map(|row| Functional::new(nalgebra::DVector::from_vec(row.clone()), dual))
            .collect(),
    )?;
    let rep = worst_case_error(inst, &info, cfg)?;
    let is_polytope = matches!(inst.prepared()?.body, Shape::Polytope(_));
    let certified = rep.certified || is_polytope;
    Ok(vec![
        InequalityReport::new("recovery_lower", name, w.n, c.lower, rep.worst_case_error, 1.0, certified),
        InequalityReport::new("recovery_upper", name, w.n, rep.worst_case_error, 2.0 * c.upper, 2.0, certified),
    ])
}
