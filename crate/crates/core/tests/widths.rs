use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use nalgebra::{DMatrix, DVector};
use nwidths::widths::{
    approximation, bernstein, gelfand, hilbert, kolmogorov, shifted_kolmogorov, singular_widths,
};
use nwidths::witness::{build_chain, certify_chain};
use nwidths::{Bounds, ChainVariant, ConvexBody, Functional, InfoClass, Instance, NormTag, SearchConfig, WidthSet};

const GRID: usize = 3600;

fn cfg() -> SearchConfig {
    SearchConfig::default()
}

fn diag(entries: &[f64], radius: f64) -> Instance {
    let s = DMatrix::from_diagonal(&DVector::from_vec(entries.to_vec()));
    Instance::from_parts(s, NormTag::L2, NormTag::L2, ConvexBody::lp_ball(NormTag::L2, radius, entries.len())).unwrap()
}

fn cross(d: usize, target: NormTag) -> Instance {
    Instance::from_parts(DMatrix::identity(d, d), NormTag::L1, target, ConvexBody::lp_ball(NormTag::L1, 1.0, d)).unwrap()
}

fn simplex2() -> Instance {
    Instance::from_parts(DMatrix::identity(2, 2), NormTag::L2, NormTag::L2, ConvexBody::simplex(2)).unwrap()
}

fn assert_exact(b: &Bounds, value: f64, tol: f64) {
    assert!((b.lower - value).abs() <= tol && (b.upper - value).abs() <= tol, "{b:?} vs {value}");
    assert!(b.lower_certified && b.upper_certified, "{b:?}");
}

/// Unit directions `(cos θ, sin θ)` on a uniform grid of half-turns.
fn directions() -> impl Iterator<Item = (f64, f64)> {
    (0..GRID).map(|k| {
        let th = PI * k as f64 / GRID as f64;
        (th.cos(), th.sin())
    })
}

#[test]
fn diagonal_hilbert_pair_matches_singular_values() {
    let inst = diag(&[1.0, 0.5, 0.25], 1.0);
    for b in [
        gelfand(&inst, 1, &InfoClass::AllLinear, &cfg()).unwrap(),
        kolmogorov(&inst, 1, &cfg()).unwrap(),
        bernstein(&inst, 1, &cfg()).unwrap(),
        hilbert(&inst, 1, &cfg()).unwrap(),
        approximation(&inst, 1, &cfg()).unwrap(),
    ] {
        assert_exact(&b, 0.5, 1e-9);
        assert!(b.exact);
    }
}

#[test]
fn zeroth_gelfand_number_is_half_diameter() {
    let inst = diag(&[1.0, 1.0, 1.0], 1.0);
    assert_exact(&gelfand(&inst, 0, &InfoClass::AllLinear, &cfg()).unwrap(), 1.0, 1e-9);
    assert_exact(&approximation(&inst, 0, &cfg()).unwrap(), 1.0, 1e-9);
}

#[test]
fn cross_polytope_gelfand_matches_grid_oracle() {
    // c_1 = min over kernels span(u) of ‖u‖∞ / ‖u‖₁
    let oracle = directions()
        .map(|(c, s)| {
            let u = (-s, c);
            u.0.abs().max(u.1.abs()) / (u.0.abs() + u.1.abs())
        })
        .fold(f64::INFINITY, f64::min);
    assert!((oracle - 0.5).abs() < 1e-6);
    let b = gelfand(&cross(2, NormTag::Linf), 1, &InfoClass::AllLinear, &cfg()).unwrap();
    assert_exact(&b, oracle, 1e-6);
}

#[test]
fn standard_information_doubles_the_gelfand_number() {
    let inst = cross(2, NormTag::Linf);
    // kernels of δ1 and δ2 are the coordinate axes
    let oracle = [(0.0, 1.0), (1.0, 0.0)]
        .iter()
        .map(|u: &(f64, f64)| u.0.abs().max(u.1.abs()) / (u.0.abs() + u.1.abs()))
        .fold(f64::INFINITY, f64::min);
    let b = gelfand(&inst, 1, &InfoClass::standard(2, NormTag::Linf), &cfg()).unwrap();
    assert_exact(&b, oracle, 1e-9);
    assert!((oracle - 1.0).abs() < 1e-12);
}

#[test]
fn cross_polytope_kolmogorov_in_euclidean_plane() {
    // distance of ±e1, ±e2 to the line spanned by (c, s)
    let oracle = directions()
        .map(|(c, s)| c.abs().max(s.abs()))
        .fold(f64::INFINITY, f64::min);
    let b = kolmogorov(&cross(2, NormTag::L2), 1, &cfg()).unwrap();
    assert!((oracle - FRAC_1_SQRT_2).abs() < 1e-6);
    assert!(b.upper <= oracle + 1e-6 && b.lower <= b.upper + 1e-7, "{b:?}");
    assert!((b.upper - FRAC_1_SQRT_2).abs() < 1e-3, "{b:?}");
}

#[test]
fn kolmogorov_vanishes_at_full_dimension() {
    for n in [2, 3] {
        let b = kolmogorov(&cross(2, NormTag::L2), n, &cfg()).unwrap();
        assert_exact(&b, 0.0, 0.0);
    }
}

#[test]
fn simplex_bernstein_is_the_inradius() {
    // 2·area / perimeter of the triangle (0,0), (1,0), (0,1)
    let oracle = 2.0 * 0.5 / (2.0 + SQRT_2);
    assert!((oracle - (2.0 - SQRT_2) / 2.0).abs() < 1e-12);
    let b = bernstein(&simplex2(), 1, &cfg()).unwrap();
    assert!((b.lower - oracle).abs() < 1e-6 && b.lower_certified, "{b:?}");
}

#[test]
fn cross_polytope_bernstein_in_l1_is_one() {
    let inst = cross(3, NormTag::L1);
    for n in 0..3 {
        let b = bernstein(&inst, n, &cfg()).unwrap();
        assert!(b.lower >= 1.0 - 1e-6 && b.lower_certified, "n={n}: {b:?}");
        assert!(b.upper <= 1.0 + 1e-6, "n={n}: {b:?}");
    }
}

#[test]
fn hilbert_lower_bound_beats_chain_and_random_contractions() {
    let inst = cross(3, NormTag::Linf);
    let h = hilbert(&inst, 1, &cfg()).unwrap();
    let chain = build_chain(&inst, 2, ChainVariant::SymmetricF, 1e-3, &cfg()).unwrap();
    let cert = certify_chain(&chain, &inst).unwrap();
    assert!(cert.all_ok());
    assert!(h.lower >= cert.per_step_hilbert_lb[1] - 1e-9, "{h:?} vs {:?}", cert.per_step_hilbert_lb);
    // random A: R^2 → R^3 with A(B2) ⊆ B_ℓ1 and B: ℓ∞^3 → ℓ2^2 with ‖B‖ ≤ 1
    let signs: Vec<DVector<f64>> = (0..8)
        .map(|m| DVector::from_fn(3, |i, _| if (m >> i) & 1 == 1 { -1.0 } else { 1.0 }))
        .collect();
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    let mut best: f64 = 0.0;
    for _ in 0..500 {
        let a = DMatrix::from_fn(3, 2, |_, _| next());
        let b = DMatrix::from_fn(2, 3, |_, _| next());
        let a_norm = signs.iter().map(|s| (a.transpose() * s).norm()).fold(0.0, f64::max);
        let b_norm = signs.iter().map(|s| (&b * s).norm()).fold(0.0, f64::max);
        let m = (&b / b_norm) * (&a / a_norm);
        let sv = nwidths::numerics::singular_values(&m);
        best = best.max(sv[1]);
    }
    assert!(h.lower >= best - 1e-9, "{} < random {best}", h.lower);
}

#[test]
fn singular_width_examples() {
    assert_eq!(singular_widths(&diag(&[1.0, 1.0, 1.0], 1.0)).unwrap(), vec![1.0, 1.0, 1.0]);
    assert_eq!(singular_widths(&diag(&[1.0, 0.5, 0.25], 1.0)).unwrap(), vec![1.0, 0.5, 0.25]);
    assert_eq!(singular_widths(&diag(&[1.0, 0.5, 0.25], 2.0)).unwrap(), vec![2.0, 1.0, 0.5]);
    assert!(singular_widths(&cross(2, NormTag::L2)).is_err());
}

#[test]
fn approximation_is_at_most_one_plus_root_n_gelfand() {
    let inst = cross(3, NormTag::Linf);
    for n in 0..3 {
        let w = WidthSet::compute(&inst, n, &cfg()).unwrap();
        assert!(w.approximation.upper <= (1.0 + (n as f64).sqrt()) * w.gelfand.upper + 1e-6, "{w:?}");
        assert!(w.approximation.upper >= w.gelfand.lower - 1e-6);
    }
}

#[test]
fn shifted_kolmogorov_is_translation_invariant() {
    let base = simplex2();
    let moved = Instance::from_parts(
        DMatrix::identity(2, 2),
        NormTag::L2,
        NormTag::L2,
        ConvexBody::simplex(2).shifted(DVector::from_vec(vec![3.0, -1.0])),
    )
    .unwrap();
    for n in 0..2 {
        let a = shifted_kolmogorov(&base, n, &cfg()).unwrap();
        let b = shifted_kolmogorov(&moved, n, &cfg()).unwrap();
        assert!((a.upper - b.upper).abs() < 1e-6, "{a:?} {b:?}");
        assert!(a.lower <= a.upper + 1e-7);
    }
    // d_0 over affine shifts is the circumradius of the triangle
    let d0 = shifted_kolmogorov(&base, 0, &cfg()).unwrap();
    assert!((d0.upper - FRAC_1_SQRT_2).abs() < 1e-6, "{d0:?}");
    assert!((d0.lower - FRAC_1_SQRT_2).abs() < 1e-6, "{d0:?}");
}

#[test]
fn finite_information_is_rejected_when_dimensions_differ() {
    let class = InfoClass::FiniteSet(vec![Functional::dirac(0, 3, NormTag::Linf)]);
    assert!(gelfand(&cross(2, NormTag::Linf), 1, &class, &cfg()).is_err());
}
