//! Acceptance run: one pass/fail line per criterion, nonzero exit on any failure.

use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use nwidths::numerics::search::{gaussian_matrix, rng_for};
use nwidths::recovery::{best_recovery, sphere_mc_lower_bound};
use nwidths::verify::{
    check_regularity, check_superpolynomial, default_suite, fit_rate, hilbert_target_report, run_suite, SuiteEntry,
};
use nwidths::widths::{gelfand, singular_widths};
use nwidths::witness::{build_chain, certify_chain, DEFAULT_EPS};
use nwidths::{
    ChainVariant, ConvexBody, InfoClass, Instance, NormTag, SearchConfig, SuiteReport, Verdict, WidthKind, WidthSet,
};

type Check<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

fn euclidean(m: DMatrix<f64>) -> Instance {
    let d = m.ncols();
    Instance::from_parts(m, NormTag::L2, NormTag::L2, ConvexBody::lp_ball(NormTag::L2, 1.0, d)).unwrap()
}

/// Singular values from the eigenvalues of `SᵀS`, descending.
fn oracle_sigma(m: &DMatrix<f64>) -> Vec<f64> {
    let eig = SymmetricEigen::new(m.transpose() * m);
    let mut s: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn svd_oracle() -> Outcome {
    let start = Instant::now();
    let cfg = SearchConfig::default();
    let ns: Vec<usize> = (0..5).collect();
    let mut worst = 0.0f64;
    for i in 0..20 {
        let mut rng = rng_for(2025, i);
        let m = gaussian_matrix(5, 5, &mut rng);
        let sigma = oracle_sigma(&m);
        let sets = WidthSet::compute_range(&euclidean(m), &ns, &cfg).unwrap();
        for s in &sets {
            for k in WidthKind::ALL {
                let b = s.get(k);
                worst = worst.max((b.lower - sigma[s.n]).abs()).max((b.upper - sigma[s.n]).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome::new(
        worst <= 1e-6 && elapsed < Duration::from_secs(60),
        format!("max deviation {worst:.2e}, {:.1} s", elapsed.as_secs_f64()),
    )
}

fn ordering(report: &SuiteReport, elapsed: Duration) -> Outcome {
    let rows: Vec<_> = report.reports.iter().filter(|r| r.name.starts_with("ordering_")).collect();
    let bad = rows.iter().filter(|r| r.verdict != Verdict::Holds).count();
    let pairs = rows.len() / 2;
    Outcome::new(
        bad == 0 && report.errors.is_empty() && elapsed < Duration::from_secs(300),
        format!("{pairs} instance/n pairs, {bad} not holding, suite {:.1} s", elapsed.as_secs_f64()),
    )
}

fn chains(suite: &[SuiteEntry], cfg: &SearchConfig) -> Outcome {
    let (mut checked, mut skipped, mut bad) = (0, 0, Vec::new());
    for e in suite {
        for variant in ChainVariant::admissible_for(&e.instance).unwrap() {
            for n in [2, 3] {
                let chain = build_chain(&e.instance, n, variant, DEFAULT_EPS, cfg).unwrap();
                if chain.is_truncated() {
                    skipped += 1;
                    continue;
                }
                let cert = certify_chain(&chain, &e.instance).unwrap();
                checked += 1;
                let ok = cert.all_ok() && cert.det_actual >= cert.det_lower && cert.geometric_mean_ok;
                if !ok {
                    bad.push(format!("{}/{variant}/{n}", e.name));
                }
            }
        }
    }
    Outcome::new(bad.is_empty(), format!("{checked} chains certified, {skipped} truncated, failing {bad:?}"))
}

fn hilbert_target(suite: &[SuiteEntry], cfg: &SearchConfig) -> Outcome {
    let ns: Vec<usize> = (0..=3).collect();
    let mut count = 0;
    let mut bad = Vec::new();
    for e in suite.iter().filter(|e| e.instance.target_norm() == NormTag::L2) {
        for w in WidthSet::compute_range(&e.instance, &ns, cfg).unwrap() {
            let r = hilbert_target_report(&e.name, &e.instance, &w).unwrap();
            count += 1;
            if r.verdict != Verdict::Holds {
                bad.push(format!("{}/{}: {:?}", e.name, w.n, r.verdict));
            }
        }
    }
    Outcome::new(bad.is_empty(), format!("{count} checks, failing {bad:?}"))
}

fn regularity() -> Outcome {
    let mut count = 0;
    let mut bad = Vec::new();
    for alpha in [0.5, 1.0, 2.0] {
        for n in (2..=64).step_by(2) {
            let z: Vec<f64> = (1..=n).map(|k| (k as f64).powf(-alpha)).collect();
            let gm = (z.iter().map(|v| v.ln()).sum::<f64>() / n as f64).exp();
            let r = check_regularity("power", &z, 2f64.powf(alpha));
            count += 1;
            if r.verdict != Verdict::Holds || gm > 2f64.powf(4.0 * alpha) * z[n - 1] {
                bad.push(format!("alpha {alpha} n {n}"));
            }
        }
    }
    for n in (2..=64).step_by(2) {
        let z: Vec<f64> = (1..=n).map(|k| 2f64.powi(-k)).collect();
        count += 1;
        if check_superpolynomial("exp2", &z).verdict != Verdict::Holds {
            bad.push(format!("exp2 n {n}"));
        }
    }
    Outcome::new(bad.is_empty(), format!("{count} checks, failing {bad:?}"))
}

fn monte_carlo() -> Outcome {
    let start = Instant::now();
    let mut detail = Vec::new();
    let mut ok = true;
    for n in [1, 2, 4] {
        let est = sphere_mc_lower_bound(n, 100_000, 20240607).unwrap();
        ok &= (est.coord_second_moment - 0.5).abs() <= 0.01 && est.mean_error_lb >= 0.49;
        detail.push(format!("n={n}: {:.4}/{:.4}", est.coord_second_moment, est.mean_error_lb));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(10);
    Outcome::new(ok, format!("{}, {:.2} s", detail.join(", "), elapsed.as_secs_f64()))
}

fn information_gap(cfg: &SearchConfig) -> Outcome {
    let inst = Instance::from_parts(
        DMatrix::identity(2, 2),
        NormTag::L1,
        NormTag::Linf,
        ConvexBody::lp_ball(NormTag::L1, 1.0, 2),
    )
    .unwrap();
    let std = gelfand(&inst, 1, &InfoClass::standard(2, NormTag::Linf), cfg).unwrap();
    let lin = gelfand(&inst, 1, &InfoClass::AllLinear, cfg).unwrap();
    let ok = std.certified() && lin.certified() && (std.lower - 1.0).abs() <= 1e-3 && (std.upper - 1.0).abs() <= 1e-3
        && (lin.lower - 0.5).abs() <= 1e-3 && (lin.upper - 0.5).abs() <= 1e-3;
    Outcome::new(
        ok,
        format!("standard [{}, {}], all linear [{}, {}]", std.lower, std.upper, lin.lower, lin.upper),
    )
}

fn recovery(suite: &[SuiteEntry], cfg: &SearchConfig) -> Outcome {
    let mut count = 0;
    let mut bad = Vec::new();
    for e in suite.iter().filter(|e| e.instance.prepared().unwrap().body_vertices().is_some()) {
        for n in e.ns() {
            let c = gelfand(&e.instance, n, &InfoClass::AllLinear, cfg).unwrap();
            if !c.exact {
                continue;
            }
            let err = best_recovery(&e.instance, n, cfg).unwrap().worst_case_error;
            count += 1;
            if err < c.lower - 1e-6 || err > 2.0 * c.upper + 1e-6 {
                bad.push(format!("{}/{n}: {err} vs c {}", e.name, c.upper));
            }
        }
    }
    Outcome::new(bad.is_empty() && count > 0, format!("{count} exact cases, failing {bad:?}"))
}

fn rates() -> Outcome {
    let mut worst = 0.0f64;
    for alpha in [0.5, 1.0, 2.0] {
        for d in [4, 8, 16, 32, 64] {
            let m = DMatrix::from_diagonal(&DVector::from_fn(d, |k, _| ((k + 1) as f64).powf(-alpha)));
            let fit = fit_rate("diag", &singular_widths(&euclidean(m)).unwrap()).unwrap();
            worst = worst.max((fit.alpha - alpha).abs());
        }
    }
    Outcome::new(worst <= 0.05, format!("max rate error {worst:.2e}"))
}

fn determinism() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_nwidths"))
            .args(["verify", "--suite", "default", "--seed", "42", "--deterministic"])
            .output()
            .expect("binary runs")
    };
    let (a, b) = std::thread::scope(|s| {
        let a = s.spawn(run);
        let b = s.spawn(run);
        (a.join().unwrap(), b.join().unwrap())
    });
    let families = serde_json::from_slice::<serde_json::Value>(&a.stdout)
        .ok()
        .and_then(|v| {
            let mut names: Vec<String> = v["reports"].as_array()?.iter().filter_map(|r| r["name"].as_str().map(String::from)).collect();
            names.sort();
            names.dedup();
            Some(names.len())
        })
        .unwrap_or(0);
    let ok = a.status.success() && b.status.success() && !a.stdout.is_empty() && a.stdout == b.stdout && families >= 8;
    Outcome::new(
        ok,
        format!("{} bytes, identical {}, exit {:?}, {families} families", a.stdout.len(), a.stdout == b.stdout, a.status.code()),
    )
}

fn main() {
    let cfg = SearchConfig::default();
    let suite = default_suite().unwrap();
    let start = Instant::now();
    let report = run_suite(42).unwrap();
    let suite_time = start.elapsed();

    let criteria: Vec<Check> = vec![
        ("SVD-oracle equivalence", Box::new(svd_oracle)),
        ("ordering on the shipped suite", Box::new(|| ordering(&report, suite_time))),
        ("witness-chain certificates", Box::new(|| chains(&suite, &cfg))),
        ("Gelfand versus Bernstein for Euclidean targets", Box::new(|| hilbert_target(&suite, &cfg))),
        ("regularity and super-polynomial sequences", Box::new(regularity)),
        ("sphere Monte Carlo", Box::new(monte_carlo)),
        ("standard versus linear information", Box::new(|| information_gap(&cfg))),
        ("recovery sandwich", Box::new(|| recovery(&suite, &cfg))),
        ("rate fitting", Box::new(rates)),
        ("deterministic verify output", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {:>2} {}: {} ({})", i + 1, if o.pass { "PASS" } else { "FAIL" }, name, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
