use nalgebra::{DMatrix, DVector};
use nwidths::recovery::{best_recovery, optimal_recovery, sphere_mc_lower_bound, sphere_mc_rotated, worst_case_error};
use nwidths::widths::gelfand;
use nwidths::{ConvexBody, Functional, InfoClass, InformationMap, Instance, NormTag, SearchConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn v(xs: &[f64]) -> DVector<f64> {
    DVector::from_vec(xs.to_vec())
}

fn unit_square() -> Instance {
    let sq = ConvexBody::vpolytope(vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[1.0, 1.0])]);
    Instance::from_parts(DMatrix::identity(2, 2), NormTag::Linf, NormTag::Linf, sq).unwrap()
}

fn euclidean_ball3() -> Instance {
    Instance::from_parts(DMatrix::identity(3, 3), NormTag::L2, NormTag::L2, ConvexBody::lp_ball(NormTag::L2, 1.0, 3)).unwrap()
}

fn cross2() -> Instance {
    Instance::from_parts(DMatrix::identity(2, 2), NormTag::L1, NormTag::Linf, ConvexBody::lp_ball(NormTag::L1, 1.0, 2)).unwrap()
}

fn info(rows: &[&[f64]], dual: NormTag) -> InformationMap {
    InformationMap::linear(rows.iter().map(|r| Functional::new(v(r), dual)).collect()).unwrap()
}

#[test]
fn recovery_examples() {
    let est = optimal_recovery(&unit_square(), &info(&[&[1.0, 0.0]], NormTag::L1), &v(&[0.3])).unwrap();
    assert!((est - v(&[0.3, 0.5])).amax() < 1e-9);
    let est = optimal_recovery(&euclidean_ball3(), &info(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]], NormTag::L2), &v(&[0.0, 0.0])).unwrap();
    assert!(est.amax() < 1e-9);
    let est = optimal_recovery(&cross2(), &info(&[&[1.0, -1.0]], NormTag::Linf), &v(&[0.0])).unwrap();
    assert!(est.amax() < 1e-9);
}

#[test]
fn observation_outside_the_body_is_inconsistent() {
    assert!(optimal_recovery(&unit_square(), &info(&[&[1.0, 0.0]], NormTag::L1), &v(&[2.0])).is_err());
}

#[test]
fn worst_case_error_examples() {
    let cfg = SearchConfig::default();
    let rep = worst_case_error(&unit_square(), &info(&[&[1.0, 0.0]], NormTag::L1), &cfg).unwrap();
    assert!((rep.worst_case_error - 0.5).abs() < 1e-9 && rep.certified);
    let rep = worst_case_error(&euclidean_ball3(), &info(&[&[1.0, 0.0, 0.0]], NormTag::L2), &cfg).unwrap();
    assert!((rep.worst_case_error - 1.0).abs() < 1e-9 && rep.certified);
    let rep = worst_case_error(&cross2(), &info(&[&[1.0, -1.0]], NormTag::Linf), &cfg).unwrap();
    assert!((rep.worst_case_error - 0.5).abs() < 1e-9 && rep.certified);
    let c1 = gelfand(&cross2(), 1, &InfoClass::AllLinear, &cfg).unwrap();
    assert!((rep.worst_case_error - c1.upper).abs() < 1e-9);
}

#[test]
fn report_invariants_hold() {
    let cfg = SearchConfig::default();
    for (inst, map) in [
        (unit_square(), info(&[&[1.0, 0.0]], NormTag::L1)),
        (cross2(), info(&[&[0.3, 1.0]], NormTag::Linf)),
        (euclidean_ball3(), info(&[&[1.0, 1.0, 0.0]], NormTag::L2)),
    ] {
        let rep = worst_case_error(&inst, &map, &cfg).unwrap();
        assert!(rep.worst_case_error >= rep.radius_of_information - 1e-8);
        let (f, g) = (&rep.witnesses[0], &rep.witnesses[1]);
        assert!((map.apply(f) - map.apply(g)).amax() < 1e-8);
        assert!((0.5 * inst.op.seminorm(&(f - g)) - rep.witness_half_distance).abs() < 1e-9);
    }
}

#[test]
fn best_recovery_lies_in_the_gelfand_sandwich() {
    let cfg = SearchConfig::default();
    let inst = cross2();
    let c = gelfand(&inst, 1, &InfoClass::AllLinear, &cfg).unwrap();
    assert!(c.exact);
    let rep = best_recovery(&inst, 1, &cfg).unwrap();
    assert!(rep.worst_case_error >= c.lower - 1e-6 && rep.worst_case_error <= 2.0 * c.upper + 1e-6);
}

#[test]
fn sphere_moments_match_the_population_values() {
    for n in [1, 2, 4] {
        let est = sphere_mc_lower_bound(n, 100_000, 7).unwrap();
        assert!((est.coord_second_moment - 0.5).abs() < 0.01, "{est:?}");
        assert!(est.mean_error_lb >= 0.49, "{est:?}");
        assert!(est.mean_error_lb >= est.coord_second_moment - 3.0 * est.stderr);
    }
}

#[test]
fn sphere_estimate_is_reproducible() {
    let a = sphere_mc_lower_bound(2, 10_000, 11).unwrap();
    let b = sphere_mc_lower_bound(2, 10_000, 11).unwrap();
    assert_eq!(a, b);
    let c = sphere_mc_lower_bound(2, 10_000, 12).unwrap();
    assert_ne!(a.coord_second_moment, c.coord_second_moment);
}

#[test]
fn rotated_information_keeps_the_second_moment() {
    let n = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = DMatrix::from_fn(2 * n, 2 * n, |_, _| StandardNormal.sample(&mut rng));
    let q = g.qr().q();
    let plain = sphere_mc_lower_bound(n, 50_000, 3).unwrap();
    let rotated = sphere_mc_rotated(n, 50_000, 3, &q).unwrap();
    let spread = 3.0 * (plain.stderr.powi(2) + rotated.stderr.powi(2)).sqrt();
    assert!((plain.coord_second_moment - rotated.coord_second_moment).abs() <= spread);
    assert!(sphere_mc_rotated(n, 10, 3, &(q * 2.0)).is_err());
}

#[test]
fn zero_samples_are_rejected() {
    assert!(sphere_mc_lower_bound(1, 0, 1).is_err());
    assert!(sphere_mc_lower_bound(0, 10, 1).is_err());
}
