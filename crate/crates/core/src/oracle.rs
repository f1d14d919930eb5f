//! Exhaustive ground truth for small sequential problems.
//!
//! A policy assigns one decision to every `(stage, cumulative cash)` pair.
//! Each policy is scored by pushing probability mass forward through the
//! state levels and taking the expected utility of the final cash. No
//! conditional utilities or continuation values are involved.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::money::{Lottery, Money};
use crate::sequential::{reachable_states, BetProblem, StateSpace};

pub const ENUMERATION_LIMIT: u128 = 1_000_000;

/// `choices[k][i]` is the decision taken at stage `k + 1` in the `i`-th state
/// of `R_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnumeratedPolicy {
    pub choices: Vec<Vec<usize>>,
}

impl EnumeratedPolicy {
    pub fn decision(&self, states: &StateSpace, stage: u32, state: Money) -> Option<usize> {
        let k = (stage as usize).checked_sub(1)?;
        let i = states.index_of(k, state)?;
        self.choices.get(k).map(|c| c[i])
    }
}

/// `|D|^(sum_k |R_{k-1}|)`, saturating.
pub fn policy_count(p: &BetProblem, states: &StateSpace) -> u128 {
    let base = p.decisions().len() as u128;
    let exp = states.decision_points();
    let mut count: u128 = 1;
    for _ in 0..exp {
        count = count.saturating_mul(base);
    }
    count
}

/// Odometer over all total assignments, first decision point most
/// significant.
pub struct PolicyEnumerator {
    shape: Vec<usize>,
    digits: Vec<usize>,
    base: usize,
    done: bool,
}

impl PolicyEnumerator {
    fn to_policy(&self) -> EnumeratedPolicy {
        let mut choices = Vec::with_capacity(self.shape.len());
        let mut at = 0;
        for &len in &self.shape {
            choices.push(self.digits[at..at + len].to_vec());
            at += len;
        }
        EnumeratedPolicy { choices }
    }
}

impl Iterator for PolicyEnumerator {
    type Item = EnumeratedPolicy;

    fn next(&mut self) -> Option<EnumeratedPolicy> {
        if self.done {
            return None;
        }
        let out = self.to_policy();
        let mut i = self.digits.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.digits[i] += 1;
            if self.digits[i] < self.base {
                break;
            }
            self.digits[i] = 0;
        }
        Some(out)
    }
}

pub fn enumerate_policies(p: &BetProblem) -> Result<PolicyEnumerator> {
    let states = reachable_states(p)?;
    let count = policy_count(p, &states);
    if count > ENUMERATION_LIMIT {
        return Err(Error::TooLargeToEnumerate {
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    let shape: Vec<usize> = states.levels[..p.stages() as usize]
        .iter()
        .map(Vec::len)
        .collect();
    let total = shape.iter().sum();
    Ok(PolicyEnumerator {
        shape,
        digits: vec![0; total],
        base: p.decisions().len(),
        done: false,
    })
}

/// Exact distribution of final cumulative cash under `policy`.
pub fn final_wealth(
    p: &BetProblem,
    states: &StateSpace,
    policy: &EnumeratedPolicy,
) -> Result<Lottery> {
    let mut mass = vec![1.0];
    for k in 0..p.stages() as usize {
        let next_level = states.level(k + 1);
        let mut next = vec![0.0; next_level.len()];
        for (i, &r) in states.level(k).iter().enumerate() {
            if mass[i] == 0.0 {
                continue;
            }
            let d = &p.decisions()[policy.choices[k][i]];
            for &(x, q) in d.lottery.outcomes() {
                let j = states
                    .index_of(k + 1, r + x)
                    .expect("successor is in the next level");
                next[j] += mass[i] * q;
            }
        }
        mass = next;
    }
    let level = states.level(p.stages() as usize);
    Lottery::new(
        level
            .iter()
            .zip(mass)
            .filter(|&(_, m)| m > 0.0)
            .map(|(&r, m)| (r, m)),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleBest {
    pub value: f64,
    pub policy: EnumeratedPolicy,
    pub policies_checked: u128,
}

/// Scores every policy; the first one in enumeration order wins ties.
pub fn best_policy_by_enumeration(p: &BetProblem) -> Result<OracleBest> {
    let states = reachable_states(p)?;
    let mut best: Option<(f64, EnumeratedPolicy)> = None;
    let mut checked = 0u128;
    for policy in enumerate_policies(p)? {
        checked += 1;
        let v = p.utility().expected_utility(&final_wealth(p, &states, &policy)?)?;
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, policy));
        }
    }
    let (value, policy) = best.expect("at least one policy exists");
    Ok(OracleBest {
        value,
        policy,
        policies_checked: checked,
    })
}
