//! Exact cash amounts and finite discrete lotteries over them.
//!
//! Cash is whole currency units held as `u64`, so sums of rewards never round
//! and cumulative totals can be used directly as dynamic-programming states.
//! A [`Lottery`] is kept in canonical form: outcomes sorted ascending by cash,
//! duplicates merged, probabilities summing to one.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the raw probability sum accepted by [`Lottery::new`].
pub const PROB_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Money(pub u64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub fn amount(self) -> u64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }
}

impl From<u64> for Money {
    fn from(v: u64) -> Self {
        Money(v)
    }
}

impl Add for Money {
    type Output = Money;

    fn add(self, rhs: Money) -> Money {
        Money(self.0.checked_add(rhs.0).expect("cash total overflows u64"))
    }
}

impl Mul<u64> for Money {
    type Output = Money;

    fn mul(self, rhs: u64) -> Money {
        Money(self.0.checked_mul(rhs).expect("cash total overflows u64"))
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A finite probability distribution over cash outcomes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lottery {
    outcomes: Vec<(Money, f64)>,
}

impl Lottery {
    /// Builds a canonical lottery from `(cash, probability)` pairs.
    ///
    /// Duplicate cash values are merged, outcomes are sorted, and the
    /// probabilities are divided by their sum. Zero-probability outcomes are
    /// dropped; they are not part of the support.
    pub fn new<I>(pairs: I) -> Result<Lottery>
    where
        I: IntoIterator<Item = (Money, f64)>,
    {
        let mut merged: BTreeMap<Money, f64> = BTreeMap::new();
        let mut sum = 0.0;
        for (money, prob) in pairs {
            if !(prob >= 0.0) || !prob.is_finite() {
                return Err(Error::NegativeProbability { money, prob });
            }
            sum += prob;
            *merged.entry(money).or_insert(0.0) += prob;
        }
        if merged.is_empty() {
            return Err(Error::EmptyLottery);
        }
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(Error::ProbabilitySumOutOfTolerance { sum });
        }
        let outcomes = merged
            .into_iter()
            .filter(|&(_, p)| p > 0.0)
            .map(|(m, p)| (m, p / sum))
            .collect();
        Ok(Lottery { outcomes })
    }

    /// The degenerate lottery paying `money` with certainty.
    pub fn point(money: Money) -> Lottery {
        Lottery {
            outcomes: vec![(money, 1.0)],
        }
    }

    /// `{0: 1 - win_prob, prize: win_prob}`.
    pub fn coin(prize: Money, win_prob: f64) -> Result<Lottery> {
        Lottery::new([(Money::ZERO, 1.0 - win_prob), (prize, win_prob)])
    }

    pub fn outcomes(&self) -> &[(Money, f64)] {
        &self.outcomes
    }

    pub fn support(&self) -> impl Iterator<Item = Money> + '_ {
        self.outcomes.iter().map(|&(m, _)| m)
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn min(&self) -> Money {
        self.outcomes[0].0
    }

    pub fn max(&self) -> Money {
        self.outcomes[self.outcomes.len() - 1].0
    }

    /// Probability mass at exactly `money`.
    pub fn prob_of(&self, money: Money) -> f64 {
        self.outcomes
            .binary_search_by_key(&money, |&(m, _)| m)
            .map(|i| self.outcomes[i].1)
            .unwrap_or(0.0)
    }

    /// Adds a sure amount to every outcome.
    pub fn shift(&self, by: Money) -> Lottery {
        Lottery {
            outcomes: self.outcomes.iter().map(|&(m, p)| (m + by, p)).collect(),
        }
    }

    /// Distribution of `X + Y` for independent `X ~ self`, `Y ~ other`.
    pub fn convolve(&self, other: &Lottery) -> Lottery {
        let mut merged: BTreeMap<Money, f64> = BTreeMap::new();
        for &(x, p) in &self.outcomes {
            for &(y, q) in &other.outcomes {
                *merged.entry(x + y).or_insert(0.0) += p * q;
            }
        }
        Lottery {
            outcomes: merged.into_iter().collect(),
        }
    }

    /// Total of `r` independent plays of `{0: 1 - w, prize: w}`.
    pub fn binomial_total(r: u32, prize: Money, win_prob: f64) -> Result<Lottery> {
        if !(0.0..=1.0).contains(&win_prob) {
            return Err(Error::InvalidParameter(format!(
                "win probability {win_prob} is outside [0, 1]"
            )));
        }
        if win_prob == 0.0 || r == 0 {
            return Ok(Lottery::point(Money::ZERO));
        }
        if win_prob == 1.0 {
            return Ok(Lottery::point(prize * u64::from(r)));
        }
        let ln_p = win_prob.ln();
        let ln_q = (-win_prob).ln_1p();
        let rf = f64::from(r);
        // ln C(r, l), accumulated as l grows.
        let mut ln_choose = 0.0;
        let mut outcomes = Vec::with_capacity(r as usize + 1);
        for l in 0..=r {
            if l > 0 {
                ln_choose += ((rf - f64::from(l) + 1.0) / f64::from(l)).ln();
            }
            let p = (ln_choose + f64::from(l) * ln_p + f64::from(r - l) * ln_q).exp();
            if p > 0.0 {
                outcomes.push((prize * u64::from(l), p));
            }
        }
        Ok(Lottery { outcomes })
    }

    pub fn mean(&self) -> f64 {
        self.outcomes.iter().map(|&(m, p)| p * m.as_f64()).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.outcomes
            .iter()
            .map(|&(m, p)| {
                let d = m.as_f64() - mean;
                p * d * d
            })
            .sum()
    }

    pub fn mean_and_sd(&self) -> (f64, f64) {
        (self.mean(), self.variance().sqrt())
    }

    /// `P(X > threshold)`, strict.
    pub fn tail_prob(&self, threshold: Money) -> f64 {
        self.outcomes
            .iter()
            .filter(|&&(m, _)| m > threshold)
            .map(|&(_, p)| p)
            .sum()
    }
}

/// Free-function spelling of [`Lottery::new`].
pub fn make_lottery<I>(pairs: I) -> Result<Lottery>
where
    I: IntoIterator<Item = (Money, f64)>,
{
    Lottery::new(pairs)
}
