use nalgebra::{DMatrix, DVector};
use nwidths::verify::{
    check_carl, check_geometric_mean, check_hilbert_target, check_kolmogorov_relations, check_ordering,
    check_regularity, check_superpolynomial, fit_rate, run_suite,
};
use nwidths::{ChainVariant, ConvexBody, Instance, NormTag, SearchConfig, Verdict};

fn cfg() -> SearchConfig {
    SearchConfig::default()
}

fn diag(values: &[f64]) -> Instance {
    let d = values.len();
    Instance::from_parts(
        DMatrix::from_diagonal(&DVector::from_vec(values.to_vec())),
        NormTag::L2,
        NormTag::L2,
        ConvexBody::lp_ball(NormTag::L2, 1.0, d),
    )
    .unwrap()
}

fn identity(d: usize, src: NormTag, tgt: NormTag, body: ConvexBody) -> Instance {
    Instance::from_parts(DMatrix::identity(d, d), src, tgt, body).unwrap()
}

fn powers(n: usize, alpha: f64) -> Vec<f64> {
    (1..=n).map(|k| (k as f64).powf(-alpha)).collect()
}

fn geometric_mean(z: &[f64]) -> f64 {
    z.iter().product::<f64>().powf(1.0 / z.len() as f64)
}

#[test]
fn regularity_examples() {
    let z = powers(16, 1.0);
    let r = check_regularity("k^-1", &z, 2.0);
    assert_eq!(r.verdict, Verdict::Holds);
    assert!((r.lhs - geometric_mean(&z)).abs() < 1e-12 && (r.rhs - 16.0 / 16.0).abs() < 1e-12);
    let r = check_regularity("k^-1/2", &powers(64, 0.5), 2f64.sqrt());
    assert_eq!(r.verdict, Verdict::Holds);
    let r = check_regularity("constant", &[0.3; 6], 1.0);
    assert_eq!(r.verdict, Verdict::Holds);
    assert!(r.margin.abs() < 1e-12);
}

#[test]
fn regularity_hypothesis_failure_is_not_applicable() {
    let z: Vec<f64> = (1..=8).map(|k| 2f64.powi(-k)).collect();
    assert_eq!(check_regularity("exp", &z, 2.0).verdict, Verdict::NotApplicable);
    assert_eq!(check_regularity("odd", &powers(5, 1.0), 2.0).verdict, Verdict::NotApplicable);
}

#[test]
fn superpolynomial_examples() {
    let z: Vec<f64> = (1..=8).map(|k| 2f64.powi(-k)).collect();
    let r = check_superpolynomial("exp2", &z);
    assert_eq!(r.verdict, Verdict::Holds);
    assert!((r.rhs - (z[0] * z[3]).sqrt()).abs() < 1e-15);
    let r = check_superpolynomial("constant", &[0.7; 4]);
    assert_eq!(r.verdict, Verdict::Holds);
    assert!(r.margin.abs() < 1e-12);
    assert_eq!(check_superpolynomial("k^-2", &powers(16, 2.0)).verdict, Verdict::Holds);
}

#[test]
fn rate_examples() {
    assert!((fit_rate("k^-1", &powers(32, 1.0)).unwrap().alpha - 1.0).abs() < 0.01);
    assert!((fit_rate("k^-1/2", &powers(32, 0.5)).unwrap().alpha - 0.5).abs() < 0.01);
    assert!(fit_rate("constant", &[2.0; 10]).unwrap().alpha.abs() < 0.01);
    assert!(fit_rate("short", &[1.0, 0.5]).is_err());
    assert!(fit_rate("zero", &[1.0, 0.0, 0.5]).is_err());
}

#[test]
fn ordering_on_hilbert_diagonal_is_tight() {
    for r in check_ordering("diag", &diag(&[1.0, 0.5, 0.25]), 1, &cfg()).unwrap() {
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.margin.abs() < 1e-6, "{r:?}");
    }
}

#[test]
fn ordering_on_l1_cube_has_hilbert_below_bernstein() {
    let inst = identity(3, NormTag::L1, NormTag::L1, ConvexBody::lp_ball(NormTag::L1, 1.0, 3));
    let reports = check_ordering("l1_l1_3", &inst, 1, &cfg()).unwrap();
    assert!(reports.iter().all(|r| r.verdict == Verdict::Holds));
    assert!((reports[0].rhs - 1.0).abs() < 1e-6);
    assert!(reports[0].lhs < 1.0 - 1e-3);
}

#[test]
fn geometric_mean_on_hilbert_diagonal() {
    let inst = diag(&[1.0, 0.5, 0.25]);
    let r = check_geometric_mean("diag", &inst, 2, ChainVariant::HilbertSourceBall, &cfg())
        .unwrap()
        .unwrap();
    assert_eq!(r.verdict, Verdict::Holds);
    let sigma: f64 = 0.5;
    assert!(sigma <= 2f64.sqrt() * (1.0f64 * 0.5).sqrt());
}

#[test]
fn general_chain_on_simplex_certifies() {
    let inst = identity(2, NormTag::L2, NormTag::L2, ConvexBody::simplex(2));
    let r = check_geometric_mean("simplex2", &inst, 2, ChainVariant::General, &cfg())
        .unwrap()
        .unwrap();
    assert_eq!(r.verdict, Verdict::Holds);
    assert!((r.factor - 1.5).abs() < 1e-12);
}

#[test]
fn symmetric_chain_on_cross_polytope_certifies() {
    let inst = identity(2, NormTag::L1, NormTag::Linf, ConvexBody::lp_ball(NormTag::L1, 1.0, 2));
    let r = check_geometric_mean("l1_linf_2", &inst, 2, ChainVariant::SymmetricF, &cfg())
        .unwrap()
        .unwrap();
    assert_eq!(r.verdict, Verdict::Holds);
    assert!(r.margin >= 0.0 && (r.factor - 1.0).abs() < 1e-12);
}

#[test]
fn hilbert_target_examples() {
    let r = check_hilbert_target("diag", &diag(&[1.0, 0.5, 0.25]), 1, &cfg()).unwrap();
    assert_eq!(r.verdict, Verdict::Holds);
    assert!((r.lhs - 0.5).abs() < 1e-6 && (r.rhs - 2f64.sqrt() * 0.5).abs() < 1e-6);
    let simplex = identity(2, NormTag::L2, NormTag::L2, ConvexBody::simplex(2));
    let r = check_hilbert_target("simplex2", &simplex, 1, &cfg()).unwrap();
    assert_eq!(r.verdict, Verdict::Holds);
    assert!((r.factor - 2.0).abs() < 1e-12);
    let r = check_hilbert_target("ball", &diag(&[1.0, 1.0]), 0, &cfg()).unwrap();
    assert_eq!(r.verdict, Verdict::Holds);
    assert!((r.lhs - 1.0).abs() < 1e-6 && (r.rhs - 1.0).abs() < 1e-6);
    let linf = identity(2, NormTag::L1, NormTag::Linf, ConvexBody::lp_ball(NormTag::L1, 1.0, 2));
    assert!(check_hilbert_target("linf", &linf, 1, &cfg()).is_err());
}

#[test]
fn carl_examples() {
    let inst = diag(&[1.0, 0.5, 0.25, 0.125]);
    let r = check_carl("diag4", &inst, 2, 1.0, &cfg()).unwrap().unwrap();
    assert_eq!(r.verdict, Verdict::Holds);
    let sigma = [1.0, 0.5, 0.25, 0.125];
    let sup = (0..2).map(|k| (k + 1) as f64 * sigma[2 * k] / 2.0).fold(0.0, f64::max);
    let factor = 144.0 * 2f64.powf(0.5 - 1.0);
    assert!((r.lhs - sigma[3]).abs() < 1e-6 && (r.rhs - factor * sup).abs() < 1e-6);
    let r = check_carl("diag4", &inst, 2, 0.0, &cfg()).unwrap().unwrap();
    assert_eq!(r.verdict, Verdict::Holds);
    let simplex = identity(2, NormTag::L2, NormTag::L2, ConvexBody::simplex(2));
    let r = check_carl("simplex2", &simplex, 1, 1.0, &cfg()).unwrap().unwrap();
    assert_ne!(r.verdict, Verdict::Violated);
}

#[test]
fn kolmogorov_relations_examples() {
    for inst in [
        diag(&[1.0, 0.5, 0.25]),
        identity(2, NormTag::L1, NormTag::L2, ConvexBody::lp_ball(NormTag::L1, 1.0, 2)),
        identity(2, NormTag::L2, NormTag::L2, ConvexBody::simplex(2)),
    ] {
        let reports = check_kolmogorov_relations("k", &inst, 1, &cfg()).unwrap();
        assert!(!reports.is_empty());
        assert!(reports.iter().all(|r| r.verdict != Verdict::Violated), "{reports:?}");
    }
}

#[test]
fn default_suite_has_no_certified_failures() {
    let rep = run_suite(42).unwrap();
    assert!(rep.errors.is_empty(), "{:?}", rep.errors);
    assert!(rep.failures().is_empty(), "{:?}", rep.failures());
    assert!(rep.families().len() >= 8);
    for rate in &rep.rates {
        let alpha: f64 = rate.name.split('_').nth(2).unwrap().parse().unwrap();
        assert!((rate.alpha - alpha).abs() < 0.05, "{rate:?}");
    }
}
