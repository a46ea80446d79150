//! The shipped instance suite and the full verification run.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::{
    approximation_reports, carl_report, check_geometric_mean, check_regularity, check_superpolynomial, fit_rate,
    hilbert_target_report, kolmogorov_reports, ordering_reports, recovery_reports, singular_geometric_mean_report,
    widths_geometric_mean_report, InequalityReport, RateReport,
};
use crate::error::Result;
use crate::numerics::search::{gaussian_matrix, rng_for};
use crate::numerics::SearchConfig;
use crate::spaces::{ConvexBody, Instance, NormTag};
use crate::widths::{singular_widths, WidthSet};
use crate::witness::ChainVariant;

/// Chain lengths checked for every admissible variant.
const CHAIN_LENGTHS: [usize; 2] = [2, 3];

/// Exponents of the Carl-type check.
const CARL_ALPHAS: [f64; 2] = [0.5, 1.0];

#[derive(Debug, Clone)]
pub struct SuiteEntry {
    pub name: String,
    pub instance: Instance,
    /// Indices `0..=max_n` are checked.
    pub max_n: usize,
}

impl SuiteEntry {
    pub fn new(name: &str, instance: Instance, max_n: usize) -> Self {
        SuiteEntry {
            name: name.into(),
            instance,
            max_n,
        }
    }

    pub fn ns(&self) -> Vec<usize> {
        (0..=self.max_n).collect()
    }
}

fn identity(d: usize, src: NormTag, tgt: NormTag, body: ConvexBody) -> Result<Instance> {
    Instance::from_parts(DMatrix::identity(d, d), src, tgt, body)
}

/// Seeded matrix with entries of size about one and a dominant diagonal.
fn seeded_matrix(d: usize, stream: u64) -> DMatrix<f64> {
    let mut rng = rng_for(2024, stream);
    DMatrix::identity(d, d) + gaussian_matrix(d, d, &mut rng) * 0.4
}

fn seeded_points(d: usize, count: usize, stream: u64) -> Vec<DVector<f64>> {
    let mut rng = rng_for(2024, stream);
    let g = gaussian_matrix(d, count, &mut rng);
    g.column_iter().map(|c| c.into_owned()).collect()
}

/// Hilbert–Hilbert diagonals, `ℓ1` balls into `ℓ∞`, `ℓ2` and `ℓ1`, simplices,
/// seeded random polytopes and shifted bodies: 42 `(instance, n)` pairs.
pub fn default_suite() -> Result<Vec<SuiteEntry>> {
    let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.5, 0.25]));
    let l1 = |d| ConvexBody::lp_ball(NormTag::L1, 1.0, d);
    let poly = ConvexBody::vpolytope(seeded_points(3, 7, 1));
    let cube = ConvexBody::lp_ball(NormTag::Linf, 0.5, 3).shifted(DVector::from_element(3, 0.5));
    let ball = ConvexBody::lp_ball(NormTag::L2, 1.0, 3).shifted(DVector::from_vec(vec![0.5, 0.0, 0.0]));
    Ok(vec![
        SuiteEntry::new(
            "hh_diag3",
            Instance::from_parts(diag.clone(), NormTag::L2, NormTag::L2, ConvexBody::lp_ball(NormTag::L2, 1.0, 3))?,
            2,
        ),
        SuiteEntry::new("l1_linf_2", identity(2, NormTag::L1, NormTag::Linf, l1(2))?, 1),
        SuiteEntry::new("l1_linf_3", identity(3, NormTag::L1, NormTag::Linf, l1(3))?, 2),
        SuiteEntry::new("l1_linf_4", identity(4, NormTag::L1, NormTag::Linf, l1(4))?, 3),
        SuiteEntry::new("l1_l2_2", identity(2, NormTag::L1, NormTag::L2, l1(2))?, 1),
        SuiteEntry::new("l1_l2_3", identity(3, NormTag::L1, NormTag::L2, l1(3))?, 2),
        SuiteEntry::new("l1_l1_3", identity(3, NormTag::L1, NormTag::L1, l1(3))?, 2),
        SuiteEntry::new("simplex2_l2", identity(2, NormTag::L2, NormTag::L2, ConvexBody::simplex(2))?, 1),
        SuiteEntry::new("simplex2_linf", identity(2, NormTag::Linf, NormTag::Linf, ConvexBody::simplex(2))?, 1),
        SuiteEntry::new("simplex3_l2", identity(3, NormTag::L2, NormTag::L2, ConvexBody::simplex(3))?, 2),
        SuiteEntry::new("simplex3_linf", identity(3, NormTag::Linf, NormTag::Linf, ConvexBody::simplex(3))?, 2),
        SuiteEntry::new(
            "random_poly_l2",
            Instance::from_parts(seeded_matrix(3, 2), NormTag::L2, NormTag::L2, poly.clone())?,
            2,
        ),
        SuiteEntry::new(
            "random_poly_linf",
            Instance::from_parts(seeded_matrix(3, 3), NormTag::L2, NormTag::Linf, poly)?,
            2,
        ),
        SuiteEntry::new(
            "shifted_ball_l2",
            Instance::from_parts(diag.clone(), NormTag::L2, NormTag::L2, ball)?,
            2,
        ),
        SuiteEntry::new(
            "shifted_cube_linf",
            Instance::from_parts(seeded_matrix(3, 4), NormTag::Linf, NormTag::Linf, cube)?,
            2,
        ),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub reports: Vec<InequalityReport>,
    pub rates: Vec<RateReport>,
    /// Per-entry errors, reported instead of aborting the run.
    pub errors: Vec<String>,
}

impl SuiteReport {
    pub fn failures(&self) -> Vec<&InequalityReport> {
        self.reports.iter().filter(|r| r.is_failure()).collect()
    }

    /// Distinct check names, sorted.
    pub fn families(&self) -> Vec<String> {
        let mut names: Vec<String> = self.reports.iter().map(|r| r.name.clone()).collect();
        names.sort();
        names.dedup();
        names
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

fn entry_reports(entry: &SuiteEntry, cfg: &SearchConfig) -> Result<Vec<InequalityReport>> {
    let inst = &entry.instance;
    let name = entry.name.as_str();
    let sets = WidthSet::compute_range(inst, &entry.ns(), cfg)?;
    let mut out = Vec::new();
    for (i, w) in sets.iter().enumerate() {
        out.extend(ordering_reports(name, w));
        out.extend(approximation_reports(name, inst, w)?);
        if inst.target_norm() == NormTag::L2 {
            out.push(hilbert_target_report(name, inst, w)?);
        }
        out.extend(kolmogorov_reports(name, inst, &sets[..=i], cfg)?);
        if let Some(r) = widths_geometric_mean_report(name, inst, &sets[..=i])? {
            out.push(r);
        }
        if matches!(inst.prepared()?.body, crate::spaces::Shape::Polytope(_)) {
            out.extend(recovery_reports(name, inst, w, cfg)?);
        }
    }
    for n in 1..=sets.len() / 2 {
        for alpha in CARL_ALPHAS {
            if let Some(r) = carl_report(name, inst, &sets, n, alpha)? {
                out.push(r);
            }
        }
    }
    for variant in ChainVariant::admissible_for(inst)? {
        for n in CHAIN_LENGTHS {
            if let Some(r) = check_geometric_mean(name, inst, n, variant, cfg)? {
                out.push(r);
            }
        }
    }
    if inst.is_hilbert_ball() {
        let sigma = singular_widths(inst)?;
        for big_n in 1..=sigma.len() {
            if sigma[big_n - 1] > 0.0 {
                out.push(singular_geometric_mean_report(name, &sigma, big_n));
            }
        }
    }
    Ok(out)
}

fn sequence_reports() -> Vec<InequalityReport> {
    let mut out = Vec::new();
    for alpha in [0.5, 1.0, 2.0] {
        let c = 2f64.powf(alpha);
        for n in (2..=64).step_by(2) {
            let z: Vec<f64> = (1..=n).map(|k| (k as f64).powf(-alpha)).collect();
            out.push(check_regularity(&format!("power_{alpha}"), &z, c));
        }
    }
    for n in [2, 4, 8, 16, 32] {
        let z: Vec<f64> = (1..=n).map(|k| 2f64.powi(-k)).collect();
        out.push(check_superpolynomial("exp2", &z));
    }
    out
}

fn rate_reports() -> Result<Vec<RateReport>> {
    let mut out = Vec::new();
    for alpha in [0.5, 1.0, 2.0] {
        for d in [8, 16, 32, 64] {
            let diag = DVector::from_fn(d, |k, _| ((k + 1) as f64).powf(-alpha));
            let inst = Instance::from_parts(
                DMatrix::from_diagonal(&diag),
                NormTag::L2,
                NormTag::L2,
                ConvexBody::lp_ball(NormTag::L2, 1.0, d),
            )?;
            out.push(fit_rate(&format!("diag_power_{alpha}_d{d}"), &singular_widths(&inst)?)?);
        }
    }
    Ok(out)
}

/// Runs the per-instance checks on `entries`. Entries run in parallel; the
/// output order is fixed by the entry order.
pub fn run_entries(entries: &[SuiteEntry], seed: u64) -> SuiteReport {
    let cfg = SearchConfig::default().with_seed(seed);
    let per_entry: Vec<std::result::Result<Vec<InequalityReport>, String>> = entries
        .par_iter()
        .map(|e| entry_reports(e, &cfg).map_err(|err| format!("{}: {err}", e.name)))
        .collect();
    let mut reports = Vec::new();
    let mut errors = Vec::new();
    for r in per_entry {
        match r {
            Ok(v) => reports.extend(v),
            Err(e) => errors.push(e),
        }
    }
    SuiteReport {
        seed,
        reports,
        rates: Vec::new(),
        errors,
    }
}

/// Runs every check on the default suite, plus the sequence checks and the
/// rate fits.
pub fn run_suite(seed: u64) -> Result<SuiteReport> {
    let mut report = run_entries(&default_suite()?, seed);
    report.reports.extend(sequence_reports());
    report.rates = rate_reports()?;
    Ok(report)
}
