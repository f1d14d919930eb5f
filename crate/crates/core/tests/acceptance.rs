//! Acceptance gate. Each test checks one criterion at its pinned tolerance and
//! prints a single `PASS`/`FAIL` line before asserting.
//!
//! Run with `cargo test -p betlab-core --test acceptance -- --nocapture`.

mod common;

use std::time::{Duration, Instant};

use betlab_core::oracle::best_policy_by_enumeration;
use betlab_core::{
    additive_allocation_value, evaluate_policy, solve, AlphaSpec, Lottery, Money, Monotonicity,
    PolicyTree, SimultaneousProblem, UtilityFunction,
};
use common::{sure_vs_coin, sure_vs_coin_log, random_problem, FAMILIES};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn verdict(id: u32, title: &str, failures: &[String]) {
    if failures.is_empty() {
        println!("criterion {id:>2} PASS  {title}");
    } else {
        println!("criterion {id:>2} FAIL  {title}");
        for f in failures {
            println!("              - {f}");
        }
    }
    assert!(failures.is_empty(), "criterion {id} failed: {failures:?}");
}

fn check(failures: &mut Vec<String>, ok: bool, what: impl Into<String>) {
    if !ok {
        failures.push(what.into());
    }
}

fn near(failures: &mut Vec<String>, label: &str, got: f64, want: f64, tol: f64) {
    check(
        failures,
        (got - want).abs() <= tol,
        format!("{label}: got {got:.6}, want {want} +/- {tol}"),
    );
}

#[test]
fn criterion_01_two_stage_log_example() {
    let start = Instant::now();
    let mut f = Vec::new();
    let p = sure_vs_coin_log(2);
    let u = p.utility();
    for (cash, want) in [
        (400, 5.994),
        (1000, 6.909),
        (800, 6.686),
        (1400, 7.245),
        (2000, 7.601),
    ] {
        near(&mut f, &format!("u({cash})"), u.eval_money(Money(cash)).unwrap(), want, 1e-3);
    }
    for (r2, r1, want) in [
        (400, 400, 0.692),
        (1000, 400, 1.251),
        (400, 1000, 0.336),
        (1000, 1000, 0.693),
    ] {
        let got = u.conditional_utility(Money(r2), Money(r1)).unwrap();
        near(&mut f, &format!("U({r2}|{r1})"), got, want, 1e-3);
    }

    let b_first = PolicyTree::from_rule(&p, |stage, state| match (stage, state.0) {
        (1, _) => 1,
        (_, 0) => 0,
        _ => 1,
    })
    .unwrap();
    near(&mut f, "B-first value", evaluate_policy(&p, &b_first).unwrap().value, 6.624, 1e-3);

    let sol = solve(&p).unwrap();
    near(&mut f, "DP root", sol.root_value, 6.686, 1e-3);
    check(
        &mut f,
        sol.tree.summary() == "A;A",
        format!("policy {} is not A;A", sol.tree.summary()),
    );
    let elapsed = start.elapsed();
    check(&mut f, elapsed < Duration::from_secs(1), format!("took {elapsed:?}"));
    verdict(1, "two-stage log example reproduces every number", &f);
}

#[test]
fn criterion_02_additive_values() {
    let mut f = Vec::new();
    for alpha in [0.3, 0.6, 0.7, 0.95] {
        let v = |k| additive_allocation_value(alpha, 2, k, 0.5).unwrap();
        check(&mut f, v(2) == 2.0 * alpha, format!("k=2 at alpha {alpha}: {}", v(2)));
        check(&mut f, v(1) == alpha + 0.5, format!("k=1 at alpha {alpha}: {}", v(1)));
        check(&mut f, v(0) == 1.0, format!("k=0 at alpha {alpha}: {}", v(0)));
    }
    verdict(2, "additive valuation gives (2a, a + 1/2, 1)", &f);
}

#[test]
fn criterion_03_all_b_moments_and_tail() {
    let mut f = Vec::new();
    for n in [1u32, 4, 9, 16] {
        let b = Lottery::binomial_total(n, Money(1000), 0.5).unwrap();
        let (mean, sd) = b.mean_and_sd();
        near(&mut f, &format!("mean n={n}"), mean, 500.0 * f64::from(n), 1e-9);
        near(&mut f, &format!("sd n={n}"), sd, 250.0 * f64::from(n).sqrt(), 1e-9);
    }
    let tails: Vec<(u32, f64)> = (1..=60u32)
        .map(|n| {
            let b = Lottery::binomial_total(n, Money(1000), 0.5).unwrap();
            (n, b.tail_prob(Money(400 * u64::from(n))))
        })
        .collect();
    let best = tails.iter().cloned().fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    check(
        &mut f,
        best.1 > 0.99,
        format!(
            "P(B_n > 400n) never exceeds 0.99 for n <= 60; largest is {:.6} at n = {}",
            best.1, best.0
        ),
    );
    verdict(3, "all-B moments 500n / 250 sqrt(n), tail above 0.99 by n = 60", &f);
}

#[test]
fn criterion_04_alpha_limit_for_log() {
    let mut f = Vec::new();
    let u = UtilityFunction::log_shifted(1e6 + 1000.0).unwrap();
    let spec = AlphaSpec::new(Money(0), Money(400), Money(1000), 0.0, 1e6).unwrap();
    near(&mut f, "alpha(1e6)", u.alpha(&spec, 1e6).unwrap(), 0.4, 0.005);
    let class = u.alpha_monotonicity_report(&spec, 1000).unwrap();
    check(&mut f, class == Monotonicity::Decreasing, format!("classified {class}"));
    verdict(4, "log alpha tends to 0.4 and decreases on [0, 1e6]", &f);
}

#[test]
fn criterion_05_curvature_classification() {
    let start = Instant::now();
    let mut f = Vec::new();
    let spec = AlphaSpec::new(Money(0), Money(400), Money(1000), 0.0, 5000.0).unwrap();
    let m = 6000.0;
    let cases = [
        ("log_shifted", UtilityFunction::log_shifted(m).unwrap(), Monotonicity::Decreasing),
        (
            "exponential(0.001)",
            UtilityFunction::exponential(0.001, m).unwrap(),
            Monotonicity::Decreasing,
        ),
        ("power(2)", UtilityFunction::power(2.0, m).unwrap(), Monotonicity::Increasing),
        ("linear", UtilityFunction::linear(1.0, m).unwrap(), Monotonicity::Constant),
    ];
    for (name, u, want) in &cases {
        let got = u.alpha_monotonicity_report(&spec, 1000).unwrap();
        check(&mut f, got == *want, format!("{name}: classified {got}, want {want}"));
    }
    let lin = &cases[3].1;
    let target = spec.linear_alpha();
    for (x, a) in lin.alpha_curve(&spec, 1000).unwrap() {
        check(&mut f, (a - target).abs() < 1e-12, format!("linear alpha({x}) = {a}"));
    }
    let elapsed = start.elapsed();
    check(&mut f, elapsed < Duration::from_secs(1), format!("took {elapsed:?}"));
    verdict(5, "alpha classification matches curvature for four families", &f);
}

#[test]
fn criterion_06_dp_matches_brute_force() {
    let start = Instant::now();
    let mut f = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut instances = 0;
    let mut worst: f64 = 0.0;
    for i in 0..220usize {
        let stages = 1 + (i % 4) as u32;
        let family = FAMILIES[(i / 4) % 5];
        let p = random_problem(&mut rng, stages, family);
        let dp = solve(&p).unwrap().root_value;
        let brute = best_policy_by_enumeration(&p).unwrap().value;
        let gap = (dp - brute).abs();
        worst = worst.max(gap);
        check(&mut f, gap < 1e-9, format!("instance {i} ({family}, n={stages}): gap {gap:e}"));
        instances += 1;
    }
    check(&mut f, instances >= 200, format!("only {instances} instances"));
    let elapsed = start.elapsed();
    check(&mut f, elapsed < Duration::from_secs(60), format!("took {elapsed:?}"));
    println!("              {instances} instances, worst gap {worst:e}, {elapsed:?}");
    verdict(6, "DP root equals brute-force optimum on random small instances", &f);
}

#[test]
fn criterion_07_adaptivity_dominates_commitment() {
    let mut f = Vec::new();
    let mut strict = Vec::new();
    for n in 2..=4u32 {
        let p = sure_vs_coin_log(n);
        let seq = solve(&p).unwrap().root_value;
        let sim = SimultaneousProblem::with_defaults(n, p.utility().clone()).unwrap();
        let best_committed = (0..=n)
            .map(|k| sim.exact_allocation_utility(k).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        check(
            &mut f,
            seq >= best_committed - 1e-12,
            format!("n={n}: sequential {seq} < committed {best_committed}"),
        );
        if seq > best_committed + 1e-12 {
            strict.push(n);
        }
        println!("              n={n}: sequential {seq:.6}, best committed {best_committed:.6}");
    }
    check(&mut f, !strict.is_empty(), "no strict improvement for n in 2..=4");
    verdict(7, "sequential value dominates every committed allocation", &f);
}

#[test]
fn criterion_08_plug_the_mean_gap() {
    let mut f = Vec::new();
    let gap = |n: u32| {
        let p = SimultaneousProblem::with_defaults(n, UtilityFunction::normalized_log(n).unwrap())
            .unwrap();
        (p.approx_allocation_utility(0).unwrap() - p.exact_allocation_utility(0).unwrap()).abs()
    };
    let (g10, g50) = (gap(10), gap(50));
    check(&mut f, g50 < 0.01, format!("gap at n=50 is {g50}"));
    check(&mut f, g50 < g10, format!("gap at 50 ({g50}) not below gap at 10 ({g10})"));
    println!("              gap n=10 {g10:.6e}, n=50 {g50:.6e}");
    verdict(8, "plug-the-mean approximation within 0.01 at n = 50 and improving", &f);
}

#[test]
fn criterion_09_large_n_prefers_all_b() {
    let mut f = Vec::new();
    let p = SimultaneousProblem::with_defaults(50, UtilityFunction::normalized_log(50).unwrap())
        .unwrap();
    let alpha = p.calibration_alpha().unwrap();
    let rep = p.allocation_report(alpha, true).unwrap();
    check(&mut f, rep.best_k_exact == 0, format!("best_k_exact = {}", rep.best_k_exact));
    verdict(9, "normalized log at n = 50 picks k = 0", &f);
}

#[test]
fn criterion_10_linear_history_independence() {
    let mut f = Vec::new();
    let p = sure_vs_coin(4, UtilityFunction::linear(1.0, 4000.0).unwrap());
    let sol = solve(&p).unwrap();
    for (k, level) in sol.table.decisions.iter().enumerate() {
        check(
            &mut f,
            level.windows(2).all(|w| w[0] == w[1]),
            format!("stage {} decisions vary: {level:?}", k + 1),
        );
    }
    verdict(10, "linear utility picks the same decision in every state of a stage", &f);
}
