//! End-to-end acceptance criteria. Each test prints one `PASS`/`FAIL` line
//! and then asserts, so `cargo test --test acceptance -- --nocapture` gives a
//! readable summary.

use std::sync::OnceLock;
use std::time::Instant;

use num_traits::{Signed, Zero};
use rand::Rng;

use splinegram::gram::{
    check_total_positivity, gram, gram_exact_integration, gram_linear, gram_quadratic,
    gram_quadrature, quadratic_cross_terms,
};
use splinegram::invstep::{check_checkerboard, dense_inverse_oracle, invert_iteratively};
use splinegram::partition::{
    from_gaps, random_gaps_exact, random_gaps_float, trial_rng, PartitionKind, PartitionSpec,
};
use splinegram::polycert::{certify_with_spot_check, Inequality, DEFAULT_TERM_BUDGET};
use splinegram::sweep::{is_exact_inverse, run_sweep, ScalarMode, SweepConfig, SweepReport};
use splinegram::{KnotSequence, Rational, Scalar};

fn verdict(id: u32, title: &str, ok: bool, detail: &str) {
    println!(
        "criterion {id:>2} [{title}]: {} -- {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
}

fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

fn exact_partition(order: usize, seed: u64, trial: u64, max_m: usize) -> KnotSequence<Rational> {
    let mut rng = trial_rng(seed, trial);
    let m = rng.gen_range(order..=max_m);
    from_gaps(order, &random_gaps_exact(&mut rng, m - order + 1)).unwrap()
}

fn float_partition(order: usize, seed: u64, trial: u64, max_m: usize) -> KnotSequence<f64> {
    let mut rng = trial_rng(seed, trial);
    let m = rng.gen_range(order..=max_m);
    from_gaps(order, &random_gaps_float(&mut rng, m - order + 1)).unwrap()
}

fn sweep(order: usize, mode: ScalarMode) -> &'static SweepReport {
    static CELLS: [[OnceLock<SweepReport>; 2]; 2] = [
        [OnceLock::new(), OnceLock::new()],
        [OnceLock::new(), OnceLock::new()],
    ];
    let (trials, max_m, slot) = match mode {
        ScalarMode::Exact => (40, 40, 0),
        ScalarMode::Float => (1000, 100, 1),
    };
    CELLS[order - 2][slot].get_or_init(|| {
        let config = SweepConfig {
            order,
            trials,
            max_m,
            mode,
            seed: 2024,
        };
        run_sweep(&config).expect("sweep runs")
    })
}

fn describe_checks(report: &SweepReport) -> String {
    report
        .checks
        .iter()
        .map(|c| {
            let slack = c
                .worst_slack
                .map(|s| format!("{s:.3e}"))
                .unwrap_or_else(|| "-".into());
            format!(
                "{} ({} checks, worst slack {slack}{})",
                c.name,
                c.checked,
                if c.pass { "" } else { ", FAILED" }
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

#[test]
fn criterion_01_exact_iterative_inverse() {
    let start = Instant::now();
    let mut ok = true;
    let mut largest = 0;
    for order in [2usize, 3] {
        for trial in 0..20 {
            let ks = exact_partition(order, 11, trial, 40);
            largest = largest.max(ks.dim());
            let a = gram(&ks);
            let b = invert_iteratively(&a, false).unwrap().matrix();
            let oracle = dense_inverse_oracle(&a.to_dense()).unwrap();
            ok &= is_exact_inverse(&b, &a) && b == oracle;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs <= 30.0;
    verdict(
        1,
        "exactness",
        ok,
        &format!("40 partitions, largest m = {largest}, {secs:.2} s"),
    );
    assert!(ok);
}

#[test]
fn criterion_02_gram_against_quadrature() {
    let mut worst_rel = 0.0_f64;
    let mut exact_ok = true;
    for order in [2usize, 3] {
        for trial in 0..20 {
            let ks = float_partition(order, 21, trial, 200);
            let closed = if order == 2 {
                gram_linear(&ks)
            } else {
                gram_quadratic(&ks)
            }
            .unwrap();
            let quad = gram_quadrature(&ks);
            for i in 0..ks.dim() {
                for j in i..ks.dim().min(i + order) {
                    let (x, y) = (closed.get(i, j), quad.get(i, j));
                    let rel = if y == 0.0 {
                        x.abs()
                    } else {
                        ((x - y) / y).abs()
                    };
                    worst_rel = worst_rel.max(rel);
                }
            }
        }
        for trial in 0..10 {
            let ks = exact_partition(order, 22, trial, 30);
            let closed = if order == 2 {
                gram_linear(&ks)
            } else {
                gram_quadratic(&ks)
            }
            .unwrap();
            exact_ok &= closed == gram_exact_integration(&ks);
        }
    }
    // Uniform mesh h = 1/12: interior entries are 11h/20, 13h/60, h/120.
    let ks = PartitionSpec::new(3, PartitionKind::Uniform(11))
        .generate()
        .unwrap();
    let a = gram_quadratic(&ks).unwrap();
    let h = q(1, 12);
    let mut uniform_ok = true;
    for i in 2..ks.dim() - 4 {
        uniform_ok &= a.get(i, i) == q(11, 20) * &h;
        uniform_ok &= a.get(i, i + 1) == q(13, 60) * &h;
        uniform_ok &= a.get(i, i + 2) == q(1, 120) * &h;
    }
    let ok = worst_rel <= 1e-12 && exact_ok && uniform_ok;
    verdict(
        2,
        "gram correctness",
        ok,
        &format!("worst relative error {worst_rel:.2e}, exact integration {exact_ok}, uniform values {uniform_ok}"),
    );
    assert!(ok);
}

#[test]
fn criterion_03_row_sums() {
    let mut ok = true;
    for order in 2usize..=5 {
        for trial in 0..10 {
            let ks = exact_partition(order, 31, trial, 16);
            let a = gram(&ks);
            for i in 1..=ks.dim() {
                let target =
                    ks.bracket(order as i64, 0, i as i64) / Rational::from_int(order as i64);
                ok &= a.row_sum(i - 1) == target;
            }
        }
    }
    verdict(3, "row sums", ok, "k = 2..5, 10 partitions each");
    assert!(ok);
}

#[test]
fn criterion_04_checkerboard() {
    let mut ok = true;
    let mut trials = 0;
    for order in [2usize, 3] {
        let report = sweep(order, ScalarMode::Exact);
        ok &= report.checkerboard;
        trials += report.trials;
    }
    // Also directly on a few inverses, independent of the sweep bookkeeping.
    for trial in 0..5 {
        let ks = exact_partition(3, 41, trial, 25);
        let b = invert_iteratively(&gram(&ks), false).unwrap().matrix();
        ok &= check_checkerboard(&b).pass;
        for ((i, j), v) in b.indexed_iter() {
            ok &= !(if (i + j) % 2 == 0 {
                v.is_negative()
            } else {
                v.is_positive()
            });
        }
        trials += 1;
    }
    ok &= trials >= 40;
    verdict(4, "checkerboard", ok, &format!("{trials} exact inverses"));
    assert!(ok);
}

#[test]
fn criterion_05_total_positivity() {
    let mut ok = true;
    let mut minors = 0;
    for order in [2usize, 3] {
        for trial in 0..10 {
            let ks = exact_partition(order, 51, trial, 12);
            let a = gram(&ks);
            let report = check_total_positivity(&a, ks.dim().min(4), None).unwrap();
            ok &= report.pass();
            minors += report.minors_checked;
        }
    }
    verdict(
        5,
        "total positivity",
        ok,
        &format!("{minors} minors of order <= 4"),
    );
    assert!(ok);
}

#[test]
fn criterion_06_linear_bounds() {
    let float = sweep(2, ScalarMode::Float);
    let exact = sweep(2, ScalarMode::Exact);
    let mut equality = true;
    for trial in 0..40 {
        let ks = exact_partition(2, 61, trial, 40);
        let inv = invert_iteratively(&gram(&ks), true).unwrap();
        equality &= inv.diag_history()[0] == Rational::from_int(3) / ks.bracket(2, 0, 1);
    }
    let ok = float.pass && float.trials >= 1000 && exact.pass && exact.trials >= 40 && equality;
    verdict(
        6,
        "k=2 bounds",
        ok,
        &format!(
            "float {} trials worst ratio {:?}; exact {} trials worst ratio {:?}; n=1 equality {equality}; {}",
            float.trials,
            float.worst_ratio,
            exact.trials,
            exact.worst_ratio,
            describe_checks(exact)
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_07_quadratic_bounds() {
    let float = sweep(3, ScalarMode::Float);
    let exact = sweep(3, ScalarMode::Exact);
    let has = |r: &SweepReport, name: &str| r.checks.iter().any(|c| c.name.contains(name));
    let complete = ["phi_n", "psi_n", "87/100", "last column", "C_1"]
        .iter()
        .all(|n| has(float, n) && has(exact, n));
    let ok = float.pass && float.trials >= 1000 && exact.pass && exact.trials >= 40 && complete;
    verdict(
        7,
        "k=3 bounds",
        ok,
        &format!(
            "float worst ratio {:?}, exact worst ratio {:?}; exact checks: {}",
            float.worst_ratio,
            exact.worst_ratio,
            describe_checks(exact)
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_08_certificates() {
    let mut ok = true;
    let mut lines = Vec::new();
    for which in Inequality::ALL {
        let cert = certify_with_spot_check(which, DEFAULT_TERM_BUDGET, 1000, 8)
            .expect("certificate builds");
        let spot = cert
            .spot_check
            .as_ref()
            .is_some_and(|s| s.pass && s.samples == 1000);
        let aux_spot = cert
            .auxiliary
            .iter()
            .all(|a| a.success && a.spot_check.as_ref().is_some_and(|s| s.pass));
        let mut this = cert.success && spot && aux_spot;
        if which == Inequality::Offdiag {
            this &= cert
                .reference_denominator
                .as_ref()
                .is_some_and(|d| d.proportional);
        }
        if which == Inequality::PhiStep {
            this &= cert.peak_terms <= DEFAULT_TERM_BUDGET && cert.seconds <= 300.0;
        }
        lines.push(format!(
            "{} {} ({} / {} terms, peak {}, {:.2} s)",
            cert.name,
            if this { "ok" } else { "FAILED" },
            cert.num_terms,
            cert.den_terms,
            cert.peak_terms,
            cert.seconds
        ));
        ok &= this;
    }
    verdict(8, "certificates", ok, &lines.join("; "));
    assert!(ok);
}

#[test]
fn criterion_09_eta_inequality() {
    let mut rng = trial_rng(91, 0);
    let mut ok = true;
    let mut queries = 0;
    let mut trial = 0;
    while queries < 10_000 {
        let order = rng.gen_range(2usize..=5);
        let ks = exact_partition(order, 92, trial, 30);
        trial += 1;
        let m = ks.dim();
        if m < 2 {
            continue;
        }
        for _ in 0..100 {
            let n = rng.gen_range(1..m);
            let j = rng.gen_range(1..=n);
            let k = order as i64;
            let ni = n as i64;
            let lhs = ks.eta(j, n + 1).unwrap();
            let rhs = ks.eta(j, n).unwrap() * (ks.t(ni + k + 1) - ks.t(ni + 1))
                / (ks.t(ni + k) - ks.t(ni + 1));
            ok &= lhs <= rhs;
            queries += 1;
        }
    }
    verdict(
        9,
        "eta inequality",
        ok,
        &format!("{queries} queries over {trial} partitions"),
    );
    assert!(ok);
}

#[test]
fn criterion_10_cross_terms() {
    let mut ok = true;
    for trial in 0..20 {
        let ks = exact_partition(3, 101, trial, 30);
        let a = gram_quadratic(&ks).unwrap();
        let integrated = gram_exact_integration(&ks);
        for i in 1..ks.dim() {
            let (first, second) = quadratic_cross_terms(&ks, i).unwrap();
            let sum = first + second;
            ok &= sum == a.get(i - 1, i) && sum == integrated.get(i - 1, i);
        }
    }
    // A sanity anchor: both pieces are nonnegative integrals.
    let ks = PartitionSpec::new(3, PartitionKind::Uniform(3))
        .generate()
        .unwrap();
    let (first, second) = quadratic_cross_terms(&ks, 2).unwrap();
    ok &= !first.is_negative() && !second.is_negative() && !(first + second).is_zero();
    verdict(10, "cross terms", ok, "20 exact partitions");
    assert!(ok);
}
