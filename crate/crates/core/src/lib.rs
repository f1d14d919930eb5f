//! Expected-utility analysis of repeated monetary bets.
//!
//! - [`money`]: exact cash amounts and finite lotteries.
//! - [`utility`]: utility-of-money families, conditional utility and the
//!   indifference probability `alpha(x)`.
//! - [`simultaneous`]: n committed bets, scored exactly, approximately and
//!   by summing single-bet utilities.
//! - [`sequential`]: backward induction over cumulative-cash states.
//! - [`oracle`]: brute-force policy enumeration for small instances.

pub mod error;
pub mod money;
pub mod oracle;
pub mod sequential;
pub mod simultaneous;
pub mod utility;

pub use error::{Error, Result};
pub use money::{make_lottery, Lottery, Money};
pub use oracle::{best_policy_by_enumeration, enumerate_policies, EnumeratedPolicy, OracleBest};
pub use sequential::{
    evaluate_policy, reachable_states, solve, stagewise_myopic_policy, BetProblem, DPTable,
    Decision, PolicyEvaluation, PolicyNode, PolicyTree, Solution, StateSpace,
};
pub use simultaneous::{
    additive_allocation_value, normal_pmf_weight, AllocationReport, AllocationRow,
    SimultaneousProblem,
};
pub use utility::{AlphaSpec, Family, Monotonicity, Table, UtilityFunction};
