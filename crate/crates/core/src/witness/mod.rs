//! The greedy witness chain: successive section maximizers `p_k`, their norming
//! functionals `λ_k`, the pulled-back functionals `L_k = λ_k ∘ S`, and the
//! triangular compression `S_n = B S A` they produce.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::linalg::svd;
use crate::numerics::{max_seminorm_on_section, SearchConfig};
use crate::spaces::{norming_functional, Functional, Instance, NormTag, Shape, Subspace, MEMBERSHIP_TOL};

/// Default relative slack of the chain maximizations.
pub const DEFAULT_EPS: f64 = 1e-3;

/// Steps whose section value falls below this end the chain.
pub const COLLAPSE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainVariant {
    General,
    SymmetricF,
    HilbertTarget,
    HilbertSourceBall,
}

impl ChainVariant {
    pub const ALL: [ChainVariant; 4] = [
        ChainVariant::General,
        ChainVariant::SymmetricF,
        ChainVariant::HilbertTarget,
        ChainVariant::HilbertSourceBall,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChainVariant::General => "general",
            ChainVariant::SymmetricF => "symmetric",
            ChainVariant::HilbertTarget => "hilbert_target",
            ChainVariant::HilbertSourceBall => "hilbert_source_ball",
        }
    }

    pub fn admissible(self, inst: &Instance) -> Result<bool> {
        Ok(match self {
            ChainVariant::General => true,
            ChainVariant::SymmetricF => inst.is_symmetric()?,
            ChainVariant::HilbertTarget => inst.target_norm() == NormTag::L2,
            ChainVariant::HilbertSourceBall => inst.op.source_norm == NormTag::L2 && inst.is_euclidean_ball(),
        })
    }

    /// Variants admissible for `inst`, in declaration order.
    pub fn admissible_for(inst: &Instance) -> Result<Vec<ChainVariant>> {
        let mut out = Vec::new();
        for v in Self::ALL {
            if v.admissible(inst)? {
                out.push(v);
            }
        }
        Ok(out)
    }

    /// Scalings `(a, b)` of `A = a·[p_0 … p_{N−1}]` and `B = b·[λ_0; …; λ_{N−1}]`.
    fn scales(self, len: usize, symmetric: bool) -> (f64, f64) {
        let n = len as f64;
        match self {
            ChainVariant::General => (1.0 / n, 1.0 / n.sqrt()),
            ChainVariant::SymmetricF => (1.0 / n.sqrt(), 1.0 / n.sqrt()),
            ChainVariant::HilbertTarget if symmetric => (1.0 / n.sqrt(), 1.0),
            ChainVariant::HilbertTarget => (1.0 / n, 1.0),
            ChainVariant::HilbertSourceBall => (1.0, 1.0 / n.sqrt()),
        }
    }

    /// Exponent `γ` with `a·b = N^{−γ}`.
    pub fn gamma(self, symmetric: bool) -> f64 {
        match self {
            ChainVariant::General => 1.5,
            ChainVariant::SymmetricF => 1.0,
            ChainVariant::HilbertTarget if symmetric => 0.5,
            ChainVariant::HilbertTarget => 1.0,
            ChainVariant::HilbertSourceBall => 0.5,
        }
    }

    /// Index of the Gelfand number that step `k` bounds.
    pub fn gelfand_index(self, k: usize) -> usize {
        match self {
            ChainVariant::HilbertSourceBall => 2 * k,
            _ => k,
        }
    }
}

impl fmt::Display for ChainVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChainVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "general" => Ok(ChainVariant::General),
            "symmetric" | "symmetric_f" => Ok(ChainVariant::SymmetricF),
            "hilbert_target" => Ok(ChainVariant::HilbertTarget),
            "hilbert_source_ball" => Ok(ChainVariant::HilbertSourceBall),
            other => Err(Error::Parse(format!("unknown chain variant '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainStep {
    #[serde(with = "crate::serde_util::dvec")]
    pub p: DVector<f64>,
    #[serde(with = "crate::serde_util::dvec")]
    pub f: DVector<f64>,
    #[serde(with = "crate::serde_util::dvec")]
    pub g: DVector<f64>,
    pub lambda: Functional,
    #[serde(rename = "L")]
    pub l: Functional,
    /// `‖S p‖`.
    pub value: f64,
    /// Whether the section maximization was exact.
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessChain {
    pub variant: ChainVariant,
    pub eps: f64,
    /// Number of steps asked for; `steps.len()` is smaller when a section collapsed.
    pub requested: usize,
    pub symmetric: bool,
    pub steps: Vec<ChainStep>,
    #[serde(with = "crate::serde_util::dmat")]
    pub a: DMatrix<f64>,
    #[serde(with = "crate::serde_util::dmat")]
    pub b: DMatrix<f64>,
    #[serde(with = "crate::serde_util::dvec")]
    pub shift: DVector<f64>,
    #[serde(with = "crate::serde_util::dmat")]
    pub s_n: DMatrix<f64>,
}

impl WitnessChain {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn is_truncated(&self) -> bool {
        self.steps.len() < self.requested
    }

    pub fn gamma(&self) -> f64 {
        self.variant.gamma(self.symmetric)
    }

    pub fn values(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.value).collect()
    }
}

/// Runs the greedy construction for `n` steps.
pub fn build_chain(inst: &Instance, n: usize, variant: ChainVariant, eps: f64, cfg: &SearchConfig) -> Result<WitnessChain> {
    if !(eps > 0.0) {
        return Err(Error::Parse("eps must be positive".into()));
    }
    if !variant.admissible(inst)? {
        return Err(Error::WrongRegime(format!("variant {variant} is not admissible for this instance")));
    }
    let d = inst.source_dim();
    let s = inst.matrix();
    let t = inst.target_norm();
    let symmetric = inst.is_symmetric()?;
    let mut steps: Vec<ChainStep> = Vec::new();
    let mut rows: Vec<DVector<f64>> = Vec::new();
    for _ in 0..n {
        let sub = if rows.is_empty() {
            Subspace::full(d)
        } else {
            Subspace::kernel_of_rows(&DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]), d)
        };
        let sm = max_seminorm_on_section(inst, &sub, cfg)?;
        if sm.value < COLLAPSE_TOL {
            break;
        }
        let y = s * &sm.p;
        let lambda = norming_functional(&y, t)?;
        let l = lambda.compose(s, inst.op.source_norm.dual());
        rows.push(l.coefficients.clone());
        if variant == ChainVariant::HilbertSourceBall {
            rows.push(sm.p.clone());
        }
        steps.push(ChainStep {
            value: sm.value,
            p: sm.p,
            f: sm.f,
            g: sm.g,
            lambda,
            l,
            certified: sm.certified,
        });
    }
    assemble(inst, variant, eps, n, symmetric, steps)
}

impl WitnessChain {
    /// The chain built from the first `len` steps, with `A`, `B` and the
    /// shift rescaled for that length.
    pub fn prefix(&self, inst: &Instance, len: usize) -> Result<WitnessChain> {
        if len > self.len() {
            return Err(Error::WrongRegime(format!("chain has {} steps, asked for {len}", self.len())));
        }
        assemble(inst, self.variant, self.eps, len, self.symmetric, self.steps[..len].to_vec())
    }
}

fn assemble(
    inst: &Instance,
    variant: ChainVariant,
    eps: f64,
    requested: usize,
    symmetric: bool,
    steps: Vec<ChainStep>,
) -> Result<WitnessChain> {
    let d = inst.source_dim();
    let s = inst.matrix();
    let len = steps.len();
    let m = inst.target_dim();
    let (sa, sb) = variant.scales(len.max(1), symmetric);
    let a = DMatrix::from_fn(d, len, |i, j| sa * steps[j].p[i]);
    let b = DMatrix::from_fn(len, m, |i, j| sb * steps[i].lambda.coefficients[j]);
    let prep = inst.prepared()?;
    let shift = match (variant, &prep.center) {
        (ChainVariant::General, _) | (ChainVariant::HilbertTarget, None) => {
            if len == 0 {
                DVector::zeros(d)
            } else {
                steps
                    .iter()
                    .fold(DVector::zeros(d), |acc, st| acc + (&st.f + &st.g) / 2.0)
                    / len as f64
            }
        }
        (_, Some(c)) => c.clone(),
        (_, None) => return Err(Error::WrongRegime("variant needs a symmetric body".into())),
    };
    let s_n = &b * s * &a;
    Ok(WitnessChain {
        variant,
        eps,
        requested,
        symmetric,
        steps,
        a,
        b,
        shift,
        s_n,
    })
}

/// Checks `A(B_{ℓ2}) + g ⊆ F` exactly: facet by facet for polytopes, by centre
/// distance plus spectral norm for Euclidean balls.
pub fn compression_fits(inst: &Instance, a: &DMatrix<f64>, g: &DVector<f64>, tol: f64) -> Result<bool> {
    let prep = inst.prepared()?;
    match &prep.body {
        Shape::Ball { center, radius } => {
            let spread = if a.ncols() == 0 { 0.0 } else { svd(a).sigma[0] };
            Ok((g - center).norm() + spread <= radius + tol)
        }
        Shape::Polytope(_) => {
            let h = prep.body_hrep(&inst.body)?;
            for i in 0..h.len() {
                let ai = h.a.row(i).transpose();
                if ai.dot(g) + (a.transpose() * &ai).norm() > h.b[i] + tol {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainCertificate {
    pub containment_ok: bool,
    pub contraction_ok: bool,
    pub triangular_ok: bool,
    /// Pairwise orthogonality of `p_k` (source-ball variant) or of `S p_k`
    /// (Hilbert-target variant); `true` when not applicable.
    pub orthogonality_ok: bool,
    /// Operator norm of `B` from the target norm into `ℓ2`.
    pub b_norm: f64,
    pub det_lower: f64,
    pub det_actual: f64,
    pub sigma: Vec<f64>,
    /// `σ_{k+1}(S_n)`, a lower bound for `h_k` when containment and contraction hold.
    pub per_step_hilbert_lb: Vec<f64>,
    /// Gelfand index that step `k` bounds from above.
    pub gelfand_index: Vec<usize>,
    pub gamma: f64,
    /// `log ∏_k value_k`.
    pub log_gelfand_product: f64,
    /// `log (N^{γN} (1+eps)^N ∏_k σ_k)`.
    pub log_hilbert_side: f64,
    pub geometric_mean_ok: bool,
}

impl ChainCertificate {
    pub fn all_ok(&self) -> bool {
        self.containment_ok
            && self.contraction_ok
            && self.triangular_ok
            && self.orthogonality_ok
            && self.det_actual >= self.det_lower * (1.0 - 1e-9) - 1e-12
            && self.geometric_mean_ok
    }
}

/// Re-derives every property the chain's use as a certificate depends on.
pub fn certify_chain(chain: &WitnessChain, inst: &Instance) -> Result<ChainCertificate> {
    let len = chain.len();
    let s = inst.matrix();
    let containment_ok = compression_fits(inst, &chain.a, &chain.shift, MEMBERSHIP_TOL)?
        && chain
            .steps
            .iter()
            .all(|st| inst.contains(&st.f, MEMBERSHIP_TOL) && inst.contains(&st.g, MEMBERSHIP_TOL));
    let b_norm = if len == 0 { 0.0 } else { inst.target_norm().into_l2_operator_norm(&chain.b) };
    let contraction_ok = b_norm <= 1.0 + 1e-9;
    let scale = chain.s_n.amax().max(1e-300);
    let mut triangular_ok = ((&chain.b * s * &chain.a) - &chain.s_n).amax() <= 1e-10 * scale.max(1.0);
    for i in 0..len {
        for j in i + 1..len {
            if chain.s_n[(i, j)].abs() > 1e-8 * scale.max(1.0) {
                triangular_ok = false;
            }
        }
    }
    let mut orthogonality_ok = true;
    let vectors: Option<Vec<DVector<f64>>> = match chain.variant {
        ChainVariant::HilbertSourceBall => Some(chain.steps.iter().map(|st| st.p.clone()).collect()),
        ChainVariant::HilbertTarget => Some(chain.steps.iter().map(|st| s * &st.p).collect()),
        _ => None,
    };
    if let Some(vs) = vectors {
        let top = vs.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                if vs[i].dot(&vs[j]).abs() > 1e-6 * top * top {
                    orthogonality_ok = false;
                }
            }
        }
    }
    let sigma = if len == 0 { Vec::new() } else { svd(&chain.s_n).sigma };
    let det_actual: f64 = sigma.iter().product();
    let (sa, sb) = chain.variant.scales(len.max(1), chain.symmetric);
    let det_lower: f64 = chain
        .steps
        .iter()
        .map(|st| st.value / (1.0 + chain.eps) * sa * sb)
        .product();
    let gamma = chain.gamma();
    let nf = len as f64;
    let log_gelfand_product: f64 = chain.steps.iter().map(|st| st.value.ln()).sum();
    let log_hilbert_side = if len == 0 {
        0.0
    } else {
        gamma * nf * nf.ln() + nf * (1.0 + chain.eps).ln() + sigma.iter().map(|x| x.ln()).sum::<f64>()
    };
    let geometric_mean_ok = log_gelfand_product <= log_hilbert_side + 1e-9 * (1.0 + log_hilbert_side.abs());
    Ok(ChainCertificate {
        containment_ok,
        contraction_ok,
        triangular_ok,
        orthogonality_ok,
        b_norm,
        det_lower,
        det_actual,
        per_step_hilbert_lb: sigma.clone(),
        sigma,
        gelfand_index: (0..len).map(|k| chain.variant.gelfand_index(k)).collect(),
        gamma,
        log_gelfand_product,
        log_hilbert_side,
        geometric_mean_ok,
    })
}

/// The step-`k` section value, which dominates `c_k` (or `c_{2k}` for the
/// source-ball variant) whenever the step's maximization was exact.
pub fn chain_gelfand_bound(chain: &WitnessChain, k: usize) -> Result<f64> {
    let st = chain
        .steps
        .get(k)
        .ok_or_else(|| Error::WrongRegime(format!("chain has {} steps, asked for step {k}", chain.len())))?;
    if !st.certified {
        return Err(Error::Uncertified(format!("step {k} came from restart search")));
    }
    Ok(st.value)
}

/// JSON dump of a chain together with its certificate.
pub fn chain_json(chain: &WitnessChain, cert: &ChainCertificate) -> serde_json::Value {
    serde_json::json!({
        "chain": chain,
        "certificate": cert,
        "all_ok": cert.all_ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::ConvexBody;

    fn diag2() -> Instance {
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.5]));
        Instance::from_parts(s, NormTag::L2, NormTag::L2, ConvexBody::lp_ball(NormTag::L2, 1.0, 2)).unwrap()
    }

    fn l1_linf() -> Instance {
        Instance::from_parts(
            DMatrix::identity(2, 2),
            NormTag::L1,
            NormTag::Linf,
            ConvexBody::lp_ball(NormTag::L1, 1.0, 2),
        )
        .unwrap()
    }

    #[test]
    fn source_ball_chain_on_diagonal() {
        let inst = diag2();
        let chain = build_chain(&inst, 2, ChainVariant::HilbertSourceBall, 0.01, &SearchConfig::default()).unwrap();
        let values = chain.values();
        assert_eq!(values.len(), 2);
        assert!(values[0] >= 1.0 / 1.01 - 1e-9 && values[1] >= 0.5 / 1.01 - 1e-9, "{values:?}");
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.5])) / 2f64.sqrt();
        assert!((chain.s_n.abs() - expected).amax() < 1e-6, "{}", chain.s_n);
        let cert = certify_chain(&chain, &inst).unwrap();
        assert!(cert.all_ok(), "{cert:?}");
        assert_eq!(cert.gelfand_index, vec![0, 2]);
    }

    #[test]
    fn doubled_b_breaks_contraction() {
        let inst = diag2();
        let mut chain = build_chain(&inst, 2, ChainVariant::General, DEFAULT_EPS, &SearchConfig::default()).unwrap();
        assert!(certify_chain(&chain, &inst).unwrap().contraction_ok);
        chain.b *= 2.0;
        let cert = certify_chain(&chain, &inst).unwrap();
        assert!(!cert.contraction_ok);
        assert!(!cert.all_ok());
    }

    #[test]
    fn symmetric_chain_on_cross_polytope() {
        let inst = l1_linf();
        let chain = build_chain(&inst, 2, ChainVariant::SymmetricF, DEFAULT_EPS, &SearchConfig::default()).unwrap();
        let v = chain.values();
        // step 0 is a vertex; on ker λ_0 ∘ S the ℓ∞ sup is still one
        assert!((v[0] - 1.0).abs() < 1e-9 && (v[1] - 1.0).abs() < 1e-9, "{v:?}");
        let cert = certify_chain(&chain, &inst).unwrap();
        assert!(cert.all_ok(), "{cert:?}");
        assert!(cert.log_gelfand_product <= cert.log_hilbert_side);
    }

    #[test]
    fn every_admissible_variant_certifies() {
        let cfg = SearchConfig::default();
        for inst in [diag2(), l1_linf()] {
            for variant in ChainVariant::admissible_for(&inst).unwrap() {
                let chain = build_chain(&inst, 2, variant, DEFAULT_EPS, &cfg).unwrap();
                let cert = certify_chain(&chain, &inst).unwrap();
                assert!(cert.all_ok(), "{variant}: {cert:?}");
                assert!(cert.det_actual >= cert.det_lower - 1e-8);
                assert!(chain.values().windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)));
            }
        }
    }

    #[test]
    fn hilbert_target_images_are_orthogonal() {
        let inst = diag2();
        let chain = build_chain(&inst, 2, ChainVariant::HilbertTarget, DEFAULT_EPS, &SearchConfig::default()).unwrap();
        let imgs: Vec<DVector<f64>> = chain.steps.iter().map(|st| inst.matrix() * &st.p).collect();
        assert!(imgs[0].dot(&imgs[1]).abs() < 1e-6);
    }

    #[test]
    fn gelfand_bound_reads_step_values() {
        let inst = diag2();
        let chain = build_chain(&inst, 2, ChainVariant::General, DEFAULT_EPS, &SearchConfig::default()).unwrap();
        assert!(chain_gelfand_bound(&chain, 1).unwrap() >= 0.5 / (1.0 + DEFAULT_EPS) - 1e-9);
        assert!(chain_gelfand_bound(&chain, 2).is_err());
    }

    #[test]
    fn triangular_determinant_matches_diagonal() {
        let inst = l1_linf();
        let chain = build_chain(&inst, 2, ChainVariant::General, DEFAULT_EPS, &SearchConfig::default()).unwrap();
        let cert = certify_chain(&chain, &inst).unwrap();
        let diag: f64 = (0..chain.len()).map(|i| chain.s_n[(i, i)]).product::<f64>().abs();
        assert!((diag - cert.det_actual).abs() <= 1e-8 * diag.max(1e-300));
    }
}
