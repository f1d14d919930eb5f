//! Backward induction for n sequential bets under conditional utility.
//!
//! The state before stage `k` is the cumulative cash `r` received in stages
//! `1..k`. The continuation value is
//!
//! ```text
//! X_k(r) = max_d sum_x p(x, d) * [ u(r + x) - u(r) + X_{k+1}(r + x) ]
//! X_{n+1} = 0
//! ```
//!
//! and at the root the first increment is scored with `u(x)` itself, so
//! `X_1` telescopes to the expected utility of final wealth.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::money::{Lottery, Money};
use crate::utility::UtilityFunction;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decision {
    pub name: String,
    pub lottery: Lottery,
}

impl Decision {
    pub fn new(name: impl Into<String>, lottery: Lottery) -> Decision {
        Decision {
            name: name.into(),
            lottery,
        }
    }
}

/// `stages` repetitions of a choice among the same decision lotteries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetProblem {
    stages: u32,
    decisions: Vec<Decision>,
    utility: UtilityFunction,
}

impl BetProblem {
    pub fn new(stages: u32, decisions: Vec<Decision>, utility: UtilityFunction) -> Result<Self> {
        if stages == 0 {
            return Err(Error::InvalidProblem("need at least one stage".into()));
        }
        if decisions.is_empty() {
            return Err(Error::InvalidProblem("need at least one decision".into()));
        }
        for (i, d) in decisions.iter().enumerate() {
            if decisions[..i].iter().any(|e| e.name == d.name) {
                return Err(Error::InvalidProblem(format!(
                    "duplicate decision name {:?}",
                    d.name
                )));
            }
        }
        let top = decisions.iter().map(|d| d.lottery.max()).max().unwrap_or(Money::ZERO);
        utility.check_domain((top * u64::from(stages)).as_f64())?;
        Ok(BetProblem {
            stages,
            decisions,
            utility,
        })
    }

    /// The two-decision problem: a sure `sure` versus a fair coin on `prize`.
    pub fn sure_vs_coin(
        stages: u32,
        sure: Money,
        prize: Money,
        win_prob: f64,
        utility: UtilityFunction,
    ) -> Result<Self> {
        Self::new(
            stages,
            vec![
                Decision::new("A", Lottery::point(sure)),
                Decision::new("B", Lottery::coin(prize, win_prob)?),
            ],
            utility,
        )
    }

    pub fn stages(&self) -> u32 {
        self.stages
    }

    pub fn decisions(&self) -> &[Decision] {
        &self.decisions
    }

    pub fn utility(&self) -> &UtilityFunction {
        &self.utility
    }

    /// Union of every decision's support.
    pub fn stage_rewards(&self) -> Vec<Money> {
        let mut all: Vec<Money> = self
            .decisions
            .iter()
            .flat_map(|d| d.lottery.support())
            .collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    /// Value of one decision at a state, given the next stage's values.
    fn stage_value(
        &self,
        decision: &Decision,
        stage: u32,
        state: Money,
        next: impl Fn(Money) -> f64,
    ) -> Result<f64> {
        let base = if stage == 1 {
            0.0
        } else {
            self.utility.eval_money(state)?
        };
        let mut total = 0.0;
        for &(x, p) in decision.lottery.outcomes() {
            let after = state + x;
            let gain = self.utility.eval_money(after)? - base;
            total += p * (gain + next(after));
        }
        Ok(total)
    }
}

/// Achievable cumulative rewards `R_0..=R_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateSpace {
    pub levels: Vec<Vec<Money>>,
}

impl StateSpace {
    pub fn level(&self, k: usize) -> &[Money] {
        &self.levels[k]
    }

    pub fn index_of(&self, k: usize, r: Money) -> Option<usize> {
        self.levels.get(k)?.binary_search(&r).ok()
    }

    /// Number of `(stage, state)` decision points, `sum_{k=1..n} |R_{k-1}|`.
    pub fn decision_points(&self) -> usize {
        self.levels[..self.levels.len() - 1].iter().map(Vec::len).sum()
    }
}

pub fn reachable_states(p: &BetProblem) -> Result<StateSpace> {
    let rewards = p.stage_rewards();
    let mut levels = vec![vec![Money::ZERO]];
    for _ in 0..p.stages {
        let prev = levels.last().expect("R_0 is always present");
        let mut next: Vec<Money> = prev
            .iter()
            .flat_map(|&r| rewards.iter().map(move |&x| r + x))
            .collect();
        next.sort_unstable();
        next.dedup();
        levels.push(next);
    }
    let top = *levels[p.stages as usize].last().expect("levels are nonempty");
    p.utility.check_domain(top.as_f64())?;
    Ok(StateSpace { levels })
}

/// Optimal continuation values and decisions for every stage and state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DPTable {
    pub states: StateSpace,
    /// `values[k - 1][i]` is `X_k` at the `i`-th state of `R_{k-1}`.
    pub values: Vec<Vec<f64>>,
    pub decisions: Vec<Vec<usize>>,
}

impl DPTable {
    pub fn value(&self, stage: u32, state: Money) -> Option<f64> {
        let k = stage as usize;
        let i = self.states.index_of(k.checked_sub(1)?, state)?;
        self.values.get(k - 1).map(|v| v[i])
    }

    pub fn decision(&self, stage: u32, state: Money) -> Option<usize> {
        let k = stage as usize;
        let i = self.states.index_of(k.checked_sub(1)?, state)?;
        self.decisions.get(k - 1).map(|v| v[i])
    }

    /// True when every state of each stage picks the same decision.
    pub fn is_history_independent(&self) -> bool {
        self.decisions
            .iter()
            .all(|level| level.windows(2).all(|w| w[0] == w[1]))
    }

    /// `stage,state,value,decision` rows.
    pub fn to_rows(&self, p: &BetProblem) -> Vec<DPRow> {
        let mut rows = Vec::new();
        for (k, (vals, decs)) in self.values.iter().zip(&self.decisions).enumerate() {
            for ((&state, &value), &d) in self.states.level(k).iter().zip(vals).zip(decs) {
                rows.push(DPRow {
                    stage: k as u32 + 1,
                    state,
                    value,
                    decision: p.decisions[d].name.clone(),
                });
            }
        }
        rows
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DPRow {
    pub stage: u32,
    pub state: Money,
    pub value: f64,
    pub decision: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub table: DPTable,
    pub tree: PolicyTree,
    pub root_value: f64,
}

/// Backward induction from stage `n` down to the root. Ties go to the lowest
/// decision index.
pub fn solve(p: &BetProblem) -> Result<Solution> {
    let states = reachable_states(p)?;
    let n = p.stages as usize;
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut decisions: Vec<Vec<usize>> = vec![Vec::new(); n];
    for k in (1..=n).rev() {
        let level = states.level(k - 1);
        let mut vals = Vec::with_capacity(level.len());
        let mut decs = Vec::with_capacity(level.len());
        for &r in level {
            let next = |s: Money| -> f64 {
                if k == n {
                    0.0
                } else {
                    let i = states.index_of(k, s).expect("successor state is reachable");
                    values[k][i]
                }
            };
            let mut best = (f64::NEG_INFINITY, 0);
            for (di, d) in p.decisions.iter().enumerate() {
                let v = p.stage_value(d, k as u32, r, next)?;
                if v > best.0 {
                    best = (v, di);
                }
            }
            vals.push(best.0);
            decs.push(best.1);
        }
        values[k - 1] = vals;
        decisions[k - 1] = decs;
    }
    let table = DPTable {
        states,
        values,
        decisions,
    };
    let tree = PolicyTree::from_rule(p, |stage, state| {
        table
            .decision(stage, state)
            .expect("table covers every reachable state")
    })?;
    let root_value = table.values[0][0];
    Ok(Solution {
        table,
        tree,
        root_value,
    })
}

/// Picks, at every state, the decision with the largest one-stage conditional
/// expected utility, ignoring later stages.
pub fn stagewise_myopic_policy(p: &BetProblem) -> Result<PolicyTree> {
    let mut err = None;
    let tree = PolicyTree::from_rule(p, |_, state| {
        let mut best = (f64::NEG_INFINITY, 0);
        for (di, d) in p.decisions.iter().enumerate() {
            match p.utility.conditional_expected_utility(&d.lottery, state) {
                Ok(v) if v > best.0 => best = (v, di),
                Ok(_) => {}
                Err(e) => {
                    err.get_or_insert(e);
                }
            }
        }
        best.1
    });
    match err {
        Some(e) => Err(e),
        None => tree,
    }
}

/// One node of a contingent plan: the decision taken at `stage` with
/// `cumulative` cash already received, and the plan's continuation value
/// from there.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyNode {
    pub stage: u32,
    pub cumulative: Money,
    pub decision: usize,
    pub decision_name: String,
    pub value: f64,
    pub branches: Vec<Branch>,
}

/// A realized stage reward and what follows it. `next` is absent after the
/// last stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    pub reward: Money,
    pub prob: f64,
    pub next: Option<Box<PolicyNode>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyTree {
    pub root: PolicyNode,
}

impl PolicyTree {
    /// Expands `rule(stage, cumulative)` over every history and annotates each
    /// node with its continuation value.
    pub fn from_rule<F>(p: &BetProblem, mut rule: F) -> Result<PolicyTree>
    where
        F: FnMut(u32, Money) -> usize,
    {
        let root = build_node(p, &mut rule, 1, Money::ZERO)?;
        Ok(PolicyTree { root })
    }

    /// Decision names chosen at each stage in first-seen order, `/` between
    /// alternatives and `;` between stages, e.g. `B;A/B`.
    pub fn summary(&self) -> String {
        let mut per_stage: Vec<Vec<&str>> = Vec::new();
        let mut stack = vec![&self.root];
        let mut frontier = Vec::new();
        while !stack.is_empty() {
            let mut names: Vec<&str> = Vec::new();
            for node in &stack {
                if !names.contains(&node.decision_name.as_str()) {
                    names.push(&node.decision_name);
                }
                frontier.extend(node.branches.iter().filter_map(|b| b.next.as_deref()));
            }
            per_stage.push(names);
            stack = std::mem::take(&mut frontier);
        }
        per_stage
            .iter()
            .map(|names| names.join("/"))
            .collect::<Vec<_>>()
            .join(";")
    }

    /// Indented text rendering, one line per node and branch.
    pub fn render(&self) -> String {
        let mut out = String::new();
        render_node(&self.root, 0, &mut out);
        out
    }
}

fn build_node<F>(p: &BetProblem, rule: &mut F, stage: u32, cumulative: Money) -> Result<PolicyNode>
where
    F: FnMut(u32, Money) -> usize,
{
    let decision = rule(stage, cumulative);
    let d = p.decisions.get(decision).ok_or_else(|| {
        Error::MalformedTree(format!(
            "rule chose decision {decision} at stage {stage}, state {cumulative}"
        ))
    })?;
    let mut branches = Vec::with_capacity(d.lottery.len());
    for &(reward, prob) in d.lottery.outcomes() {
        let next = if stage < p.stages {
            Some(Box::new(build_node(p, rule, stage + 1, cumulative + reward)?))
        } else {
            None
        };
        branches.push(Branch { reward, prob, next });
    }
    let value = node_value(p, stage, cumulative, &branches)?;
    Ok(PolicyNode {
        stage,
        cumulative,
        decision,
        decision_name: d.name.clone(),
        value,
        branches,
    })
}

fn node_value(p: &BetProblem, stage: u32, cumulative: Money, branches: &[Branch]) -> Result<f64> {
    let base = if stage == 1 {
        0.0
    } else {
        p.utility.eval_money(cumulative)?
    };
    let mut total = 0.0;
    for b in branches {
        let gain = p.utility.eval_money(cumulative + b.reward)? - base;
        let cont = b.next.as_ref().map_or(0.0, |n| n.value);
        total += b.prob * (gain + cont);
    }
    Ok(total)
}

fn render_node(node: &PolicyNode, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth * 2);
    let _ = writeln!(
        out,
        "{pad}stage {} @ {}: {} (value {:.6})",
        node.stage, node.cumulative, node.decision_name, node.value
    );
    for b in &node.branches {
        let _ = writeln!(out, "{pad}  +{} (p={:.6})", b.reward, b.prob);
        if let Some(next) = &b.next {
            render_node(next, depth + 1, out);
        }
    }
}

/// Value of a contingent plan together with the exact distribution of final
/// cumulative cash it induces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyEvaluation {
    pub value: f64,
    pub final_wealth: Lottery,
}

pub fn evaluate_policy(p: &BetProblem, tree: &PolicyTree) -> Result<PolicyEvaluation> {
    let mut finals = Vec::new();
    walk(p, &tree.root, 1, Money::ZERO, 1.0, &mut finals)?;
    let final_wealth = Lottery::new(finals)?;
    let value = p.utility.expected_utility(&final_wealth)?;
    Ok(PolicyEvaluation {
        value,
        final_wealth,
    })
}

fn walk(
    p: &BetProblem,
    node: &PolicyNode,
    stage: u32,
    cumulative: Money,
    mass: f64,
    finals: &mut Vec<(Money, f64)>,
) -> Result<()> {
    if node.stage != stage || node.cumulative != cumulative {
        return Err(Error::MalformedTree(format!(
            "node labelled stage {} @ {} sits at stage {stage} @ {cumulative}",
            node.stage, node.cumulative
        )));
    }
    let d = p.decisions.get(node.decision).ok_or_else(|| {
        Error::MalformedTree(format!(
            "unknown decision index {} at stage {stage}",
            node.decision
        ))
    })?;
    let outcomes = d.lottery.outcomes();
    if outcomes.len() != node.branches.len()
        || outcomes
            .iter()
            .zip(&node.branches)
            .any(|(&(m, _), b)| m != b.reward)
    {
        return Err(Error::MalformedTree(format!(
            "branches at stage {stage} @ {cumulative} do not match the support of {}",
            d.name
        )));
    }
    for (&(reward, prob), b) in outcomes.iter().zip(&node.branches) {
        let after = cumulative + reward;
        match (&b.next, stage < p.stages) {
            (Some(next), true) => walk(p, next, stage + 1, after, mass * prob, finals)?,
            (None, false) => finals.push((after, mass * prob)),
            (Some(_), false) => {
                return Err(Error::MalformedTree(format!(
                    "tree continues past the last stage at {after}"
                )))
            }
            (None, true) => {
                return Err(Error::MalformedTree(format!(
                    "tree ends early at stage {stage} @ {after}"
                )))
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sure_vs_coin(stages: u32) -> BetProblem {
        BetProblem::sure_vs_coin(
            stages,
            Money(400),
            Money(1000),
            0.5,
            UtilityFunction::log_shifted(1000.0 * f64::from(stages)).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn state_levels() {
        let s = reachable_states(&sure_vs_coin(2)).unwrap();
        let m = |v: &[u64]| v.iter().map(|&x| Money(x)).collect::<Vec<_>>();
        assert_eq!(s.level(0), m(&[0]).as_slice());
        assert_eq!(s.level(1), m(&[0, 400, 1000]).as_slice());
        assert_eq!(s.level(2), m(&[0, 400, 800, 1000, 1400, 2000]).as_slice());
        assert_eq!(s.decision_points(), 4);
    }

    #[test]
    fn problem_validation() {
        let u = UtilityFunction::log_shifted(1000.0).unwrap();
        assert!(BetProblem::new(1, vec![], u.clone()).is_err());
        assert!(BetProblem::new(0, vec![Decision::new("A", Lottery::point(Money(1)))], u.clone())
            .is_err());
        let dup = vec![
            Decision::new("A", Lottery::point(Money(1))),
            Decision::new("A", Lottery::point(Money(2))),
        ];
        assert!(BetProblem::new(1, dup, u.clone()).is_err());
        assert!(matches!(
            BetProblem::sure_vs_coin(2, Money(400), Money(1000), 0.5, u),
            Err(Error::DomainExceeded { .. })
        ));
    }

    #[test]
    fn two_stage_log_solution() {
        let sol = solve(&sure_vs_coin(2)).unwrap();
        assert!((sol.root_value - 6.686).abs() < 1e-3);
        assert!((sol.root_value - 801f64.ln()).abs() < 1e-12);
        assert_eq!(sol.tree.summary(), "A;A");
        assert_eq!(sol.table.decision(2, Money(1000)), Some(1));
        assert_eq!(sol.table.decision(2, Money(0)), Some(0));
        assert_eq!(sol.table.value(3, Money(0)), None);
    }

    #[test]
    fn single_stage() {
        let sol = solve(&sure_vs_coin(1)).unwrap();
        assert!((sol.root_value - 5.994).abs() < 1e-3);
        assert_eq!(sol.tree.root.decision_name, "A");

        let lin = BetProblem::sure_vs_coin(
            1,
            Money(400),
            Money(1000),
            0.5,
            UtilityFunction::linear(1.0, 1000.0).unwrap(),
        )
        .unwrap();
        let sol = solve(&lin).unwrap();
        assert!((sol.root_value - 500.0).abs() < 1e-12);
        assert_eq!(sol.tree.root.decision_name, "B");
    }

    #[test]
    fn ties_pick_lowest_index() {
        let u = UtilityFunction::linear(1.0, 100.0).unwrap();
        let p = BetProblem::new(
            1,
            vec![
                Decision::new("X", Lottery::point(Money(50))),
                Decision::new("Y", Lottery::coin(Money(100), 0.5).unwrap()),
            ],
            u,
        )
        .unwrap();
        assert_eq!(solve(&p).unwrap().tree.root.decision, 0);
    }

    #[test]
    fn b_first_tree_value() {
        let p = sure_vs_coin(2);
        let tree = PolicyTree::from_rule(&p, |stage, state| match (stage, state.0) {
            (1, _) => 1,
            (_, 0) => 0,
            _ => 1,
        })
        .unwrap();
        let ev = evaluate_policy(&p, &tree).unwrap();
        assert!((ev.value - 6.624).abs() < 1e-3);
        assert!((tree.root.value - ev.value).abs() < 1e-12);
        assert_eq!(tree.summary(), "B;A/B");
    }

    #[test]
    fn constant_a_is_deterministic() {
        for n in 1..=4 {
            let p = sure_vs_coin(n);
            let tree = PolicyTree::from_rule(&p, |_, _| 0).unwrap();
            let ev = evaluate_policy(&p, &tree).unwrap();
            assert_eq!(ev.final_wealth, Lottery::point(Money(400 * u64::from(n))));
        }
    }

    #[test]
    fn malformed_trees_are_rejected() {
        let p = sure_vs_coin(2);
        let good = solve(&p).unwrap().tree;

        let mut bad = good.clone();
        bad.root.decision = 1;
        assert!(matches!(evaluate_policy(&p, &bad), Err(Error::MalformedTree(_))));

        let mut bad = good.clone();
        bad.root.branches[0].next = None;
        assert!(matches!(evaluate_policy(&p, &bad), Err(Error::MalformedTree(_))));

        let mut bad = good.clone();
        bad.root.decision = 7;
        assert!(matches!(evaluate_policy(&p, &bad), Err(Error::MalformedTree(_))));

        let shorter = sure_vs_coin(1);
        assert!(matches!(evaluate_policy(&shorter, &good), Err(Error::MalformedTree(_))));
    }

    #[test]
    fn myopic_sure_vs_coin() {
        let p = sure_vs_coin(3);
        let tree = stagewise_myopic_policy(&p).unwrap();
        let mut seen = Vec::new();
        let mut stack = vec![&tree.root];
        while let Some(node) = stack.pop() {
            seen.push((node.cumulative, node.decision_name.clone()));
            stack.extend(node.branches.iter().filter_map(|b| b.next.as_deref()));
        }
        for (state, name) in seen {
            let want = match state.0 {
                0 | 400 => "A",
                1000 => "B",
                _ => continue,
            };
            assert_eq!(name, want, "state {state}");
        }
    }

    #[test]
    fn render_lists_every_node() {
        let sol = solve(&sure_vs_coin(2)).unwrap();
        let text = sol.tree.render();
        assert!(text.starts_with("stage 1 @ 0: A"));
        assert_eq!(text.lines().filter(|l| l.contains("stage 2")).count(), 1);
    }
}
