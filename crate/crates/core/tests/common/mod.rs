#![allow(dead_code)]

use betlab_core::oracle::policy_count;
use betlab_core::{reachable_states, BetProblem, Decision, Lottery, Money, UtilityFunction};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const FAMILIES: [&str; 5] = ["linear", "log_shifted", "power_0.5", "power_2", "exponential"];

/// Largest policy space a generated instance may have; keeps the brute force
/// fast enough to run a few hundred instances in a debug build.
pub const MAX_POLICIES: u128 = 20_000;

pub fn utility_for(family: &str, domain_max: f64) -> UtilityFunction {
    match family {
        "linear" => UtilityFunction::linear(1.0, domain_max),
        "log_shifted" => UtilityFunction::log_shifted(domain_max),
        "power_0.5" => UtilityFunction::power(0.5, domain_max),
        "power_2" => UtilityFunction::power(2.0, domain_max),
        "exponential" => UtilityFunction::exponential(2.0 / domain_max, domain_max),
        other => panic!("unknown family {other}"),
    }
    .unwrap()
}

fn random_lottery(rng: &mut ChaCha8Rng, unit: u64) -> Lottery {
    let size = rng.gen_range(1..=3);
    let mut multiples = vec![0u64, 1, 2, 3];
    multiples.shuffle(rng);
    let weights: Vec<f64> = (0..size).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    Lottery::new(
        multiples
            .iter()
            .take(size)
            .zip(&weights)
            .map(|(&m, &w)| (Money(m * unit), w / total)),
    )
    .unwrap()
}

/// A random problem with `stages` stages and the given utility family, with
/// at most three decisions of support at most three, small enough to
/// enumerate.
pub fn random_problem(rng: &mut ChaCha8Rng, stages: u32, family: &str) -> BetProblem {
    loop {
        // Cash stays below a few hundred so that even x^2 utilities are
        // resolved to well under 1e-9 in double precision.
        let unit = *[1u64, 2, 3, 5, 7, 10].choose(rng).unwrap();
        let n_decisions = rng.gen_range(1..=3);
        let decisions: Vec<Decision> = (0..n_decisions)
            .map(|i| Decision::new(format!("D{i}"), random_lottery(rng, unit)))
            .collect();
        let top = decisions.iter().map(|d| d.lottery.max().0).max().unwrap();
        let domain_max = (top * u64::from(stages)).max(1) as f64;
        let p = BetProblem::new(stages, decisions, utility_for(family, domain_max)).unwrap();
        let states = reachable_states(&p).unwrap();
        if policy_count(&p, &states) <= MAX_POLICIES {
            return p;
        }
    }
}

pub fn sure_vs_coin(stages: u32, u: UtilityFunction) -> BetProblem {
    BetProblem::sure_vs_coin(stages, Money(400), Money(1000), 0.5, u).unwrap()
}

pub fn sure_vs_coin_log(stages: u32) -> BetProblem {
    sure_vs_coin(
        stages,
        UtilityFunction::log_shifted(1000.0 * f64::from(stages)).unwrap(),
    )
}
