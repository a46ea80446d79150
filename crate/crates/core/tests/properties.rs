use nalgebra::{DMatrix, DVector};
use nwidths::recovery::worst_case_error;
use nwidths::widths::{compute_width, gelfand};
use nwidths::{ConvexBody, Functional, InfoClass, InformationMap, Instance, NormTag, SearchConfig, WidthKind, WidthSet};
use proptest::prelude::*;

const TOL: f64 = 1e-6;

fn norm_tag() -> impl Strategy<Value = NormTag> {
    prop_oneof![Just(NormTag::L1), Just(NormTag::L2), Just(NormTag::Linf)]
}

fn matrix(d: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-2.0..2.0f64, d * d).prop_map(move |v| DMatrix::from_row_slice(d, d, &v))
}

fn body(d: usize) -> impl Strategy<Value = ConvexBody> {
    let point = prop::collection::vec(-1.5..1.5f64, d).prop_map(DVector::from_vec);
    prop_oneof![
        norm_tag().prop_map(move |t| ConvexBody::lp_ball(t, 1.0, d)),
        prop::collection::vec(point, d + 1..d + 4).prop_map(ConvexBody::vpolytope),
        Just(ConvexBody::simplex(d)),
    ]
}

/// Small instances with a well-conditioned operator and a full-dimensional body.
fn instance() -> impl Strategy<Value = Instance> {
    (2usize..=3)
        .prop_flat_map(|d| (matrix(d), norm_tag(), norm_tag(), body(d)))
        .prop_filter_map("degenerate instance", |(m, s, t, b)| {
            let inst = Instance::from_parts(m.clone(), s, t, b).ok()?;
            let sv = nwidths::numerics::singular_values(&m);
            let full = match inst.prepared().ok()?.body_vertices() {
                None => true,
                Some(v) => {
                    let diffs: Vec<DVector<f64>> = v[1..].iter().map(|x| x - &v[0]).collect();
                    !diffs.is_empty() && DMatrix::from_columns(&diffs).rank(1e-6) == m.nrows()
                }
            };
            (sv[sv.len() - 1] > 0.05 && full).then_some(inst)
        })
}

fn cfg() -> SearchConfig {
    SearchConfig {
        restarts: 8,
        max_iters: 120,
        ..SearchConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn bounds_are_ordered(inst in instance(), n in 0usize..2) {
        let w = WidthSet::compute(&inst, n, &cfg()).unwrap();
        for kind in WidthKind::ALL {
            let b = w.get(kind);
            prop_assert!(b.lower <= b.upper + 1e-7, "{kind}: {b:?}");
        }
        prop_assert!(w.hilbert.lower <= w.bernstein.upper + TOL);
        prop_assert!(w.bernstein.lower <= w.gelfand.upper + TOL);
        prop_assert!(w.gelfand.lower <= w.approximation.upper + TOL);
    }

    #[test]
    fn uppers_do_not_increase_with_n(inst in instance()) {
        let sets = WidthSet::compute_range(&inst, &[0, 1, 2], &cfg()).unwrap();
        for kind in WidthKind::ALL {
            for pair in sets.windows(2) {
                prop_assert!(pair[1].get(kind).upper <= pair[0].get(kind).upper + 1e-8, "{kind}");
            }
        }
    }

    #[test]
    fn bounds_are_positively_homogeneous(inst in instance(), n in 0usize..2, t in 0.25..4.0f64) {
        let scaled = inst.scaled(t).unwrap();
        for kind in WidthKind::ALL {
            let a = compute_width(&inst, kind, n, &cfg()).unwrap();
            let b = compute_width(&scaled, kind, n, &cfg()).unwrap();
            prop_assert!((b.upper - t * a.upper).abs() <= 1e-8 * (t * a.upper).max(1.0), "{kind} upper {a:?} {b:?}");
            prop_assert!((b.lower - t * a.lower).abs() <= 1e-8 * (t * a.lower).max(1.0), "{kind} lower {a:?} {b:?}");
        }
    }

    #[test]
    fn smaller_information_classes_give_larger_widths(
        inst in instance(),
        coeffs in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 3), 3),
    ) {
        let d = inst.source_dim();
        let dual = inst.op.source_norm.dual();
        let fs: Vec<Functional> = coeffs
            .iter()
            .map(|c| Functional::new(DVector::from_vec(c[..d].to_vec()), dual))
            .collect();
        let big = InfoClass::FiniteSet(fs.clone());
        let small = InfoClass::FiniteSet(fs[..2].to_vec());
        let c_big = gelfand(&inst, 1, &big, &cfg()).unwrap();
        let c_small = gelfand(&inst, 1, &small, &cfg()).unwrap();
        let c_all = gelfand(&inst, 1, &InfoClass::AllLinear, &cfg()).unwrap();
        prop_assert!(c_small.upper >= c_big.upper - 1e-9);
        prop_assert!(c_all.lower <= c_big.upper + TOL);
    }

    #[test]
    fn recovery_witnesses_share_information(inst in instance(), c in prop::collection::vec(-1.0..1.0f64, 3)) {
        let d = inst.source_dim();
        let l = Functional::new(DVector::from_vec(c[..d].to_vec()), inst.op.source_norm.dual());
        let info = InformationMap::linear(vec![l]).unwrap();
        let rep = worst_case_error(&inst, &info, &cfg()).unwrap();
        let (f, g) = (&rep.witnesses[0], &rep.witnesses[1]);
        prop_assert!((info.apply(f) - info.apply(g)).amax() <= 1e-6);
        prop_assert!(inst.contains(f, 1e-6) && inst.contains(g, 1e-6));
        let half = 0.5 * inst.op.seminorm(&(f - g));
        prop_assert!((half - rep.witness_half_distance).abs() <= 1e-6);
        prop_assert!(rep.radius_of_information >= rep.witness_half_distance - 1e-6);
        if rep.certified {
            prop_assert!((rep.radius_of_information - rep.witness_half_distance).abs() <= 1e-6);
        }
    }
}
