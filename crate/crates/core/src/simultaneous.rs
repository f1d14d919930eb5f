//! n pre-committed bets between a sure amount (A) and a binary lottery (B).
//!
//! An allocation takes A in `k` of the bets and B in the remaining
//! `r = n - k`; its cash reward is `sure * k + prize * l` where `l` is the
//! number of B wins. This module scores every allocation exactly, with the
//! plug-the-mean approximation, and with the naive sum of single-bet
//! utilities, and searches for the horizon past which all-B beats all-A.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::money::{Lottery, Money};
use crate::utility::{AlphaSpec, Family, UtilityFunction};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimultaneousProblem {
    n: u32,
    sure_amount: Money,
    prize: Money,
    win_prob: f64,
    utility: UtilityFunction,
}

impl SimultaneousProblem {
    pub fn new(
        n: u32,
        sure_amount: Money,
        prize: Money,
        win_prob: f64,
        utility: UtilityFunction,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidProblem("need at least one bet".into()));
        }
        if !(Money::ZERO < sure_amount && sure_amount < prize) {
            return Err(Error::InvalidProblem(format!(
                "need 0 < sure amount < prize, got {sure_amount} and {prize}"
            )));
        }
        if !(win_prob > 0.0 && win_prob < 1.0) {
            return Err(Error::InvalidProblem(format!(
                "win probability must lie strictly between 0 and 1, got {win_prob}"
            )));
        }
        utility.check_domain((prize * u64::from(n)).as_f64())?;
        Ok(SimultaneousProblem {
            n,
            sure_amount,
            prize,
            win_prob,
            utility,
        })
    }

    /// Sure 400 against a fair coin on 1000.
    pub fn with_defaults(n: u32, utility: UtilityFunction) -> Result<Self> {
        Self::new(n, Money(400), Money(1000), 0.5, utility)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn sure_amount(&self) -> Money {
        self.sure_amount
    }

    pub fn prize(&self) -> Money {
        self.prize
    }

    pub fn win_prob(&self) -> f64 {
        self.win_prob
    }

    pub fn utility(&self) -> &UtilityFunction {
        &self.utility
    }

    /// The same bet repeated `n` times. A normalized log is re-anchored so
    /// that `prize * n` maps to 1; other families keep their domain.
    pub fn with_n(&self, n: u32) -> Result<Self> {
        let utility = match self.utility.family() {
            Family::NormalizedLog { .. } => {
                UtilityFunction::normalized_log_to((self.prize * u64::from(n)).as_f64())?
            }
            _ => self.utility.clone(),
        };
        Self::new(n, self.sure_amount, self.prize, self.win_prob, utility)
    }

    fn check_k(&self, k: u32) -> Result<()> {
        if k > self.n {
            Err(Error::KOutOfRange { k, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Exact expected utility of taking A `k` times and B `n - k` times.
    pub fn exact_allocation_utility(&self, k: u32) -> Result<f64> {
        self.check_k(k)?;
        let r = self.n - k;
        let base = self.sure_amount * u64::from(k);
        let mut total = 0.0;
        for (l, w) in binomial_weights(r, self.win_prob).into_iter().enumerate() {
            let cash = base + self.prize * l as u64;
            total += w * self.utility.eval_money(cash)?;
        }
        Ok(total)
    }

    /// Utility of the mean reward `sure * k + (prize / 2) * r`, valid for the
    /// normalized log with a fair coin.
    pub fn approx_allocation_utility(&self, k: u32) -> Result<f64> {
        if !matches!(self.utility.family(), Family::NormalizedLog { .. }) {
            return Err(Error::UnsupportedUtility(format!(
                "the plug-the-mean approximation needs a normalized log utility, got {}",
                self.utility.family()
            )));
        }
        if self.win_prob != 0.5 {
            return Err(Error::UnsupportedUtility(format!(
                "the plug-the-mean approximation needs win probability 1/2, got {}",
                self.win_prob
            )));
        }
        self.check_k(k)?;
        let r = f64::from(self.n - k);
        let cash = self.sure_amount.as_f64() * f64::from(k) + 0.5 * self.prize.as_f64() * r;
        self.utility.eval(cash)
    }

    /// Single-bet indifference probability of the sure amount against the
    /// prize, `(u(sure) - u(0)) / (u(prize) - u(0))`.
    pub fn calibration_alpha(&self) -> Result<f64> {
        let spec = AlphaSpec::new(Money::ZERO, self.sure_amount, self.prize, 0.0, 0.0)?;
        self.utility.alpha(&spec, 0.0)
    }

    pub fn allocation_report(&self, alpha_cal: f64, with_approx: bool) -> Result<AllocationReport> {
        let mut per_k = Vec::with_capacity(self.n as usize + 1);
        for k in 0..=self.n {
            let exact = self.exact_allocation_utility(k)?;
            let approx = if with_approx {
                Some(self.approx_allocation_utility(k)?)
            } else {
                None
            };
            let additive = additive_allocation_value(alpha_cal, self.n, k, self.win_prob)?;
            per_k.push(AllocationRow {
                k,
                exact,
                approx,
                additive,
            });
        }
        let mut best_k_exact = 0;
        for row in &per_k {
            if row.exact > per_k[best_k_exact as usize].exact {
                best_k_exact = row.k;
            }
        }
        let best_k_additive = if alpha_cal > self.win_prob { self.n } else { 0 };
        Ok(AllocationReport {
            per_k,
            best_k_exact,
            best_k_additive,
        })
    }

    /// All-B minus all-A expected utility for every horizon `1..=n_max`.
    pub fn preference_sweep(&self, n_max: u32) -> Result<Vec<FlipRow>> {
        (1..=n_max)
            .map(|n| {
                let p = self.with_n(n)?;
                Ok(FlipRow {
                    n,
                    all_b: p.exact_allocation_utility(0)?,
                    all_a: p.exact_allocation_utility(n)?,
                })
            })
            .collect()
    }

    /// Smallest `N <= n_max` such that all-B strictly beats all-A for every
    /// horizon in `N..=n_max`.
    pub fn find_preference_flip(&self, n_max: u32) -> Result<Option<u32>> {
        Ok(flip_threshold(&self.preference_sweep(n_max)?))
    }
}

/// Binomial pmf over `0..=r` wins. Built outward from the mode so that no
/// intermediate term underflows before the tails do.
fn binomial_weights(r: u32, w: f64) -> Vec<f64> {
    let len = r as usize + 1;
    let mut out = vec![0.0; len];
    if r == 0 {
        out[0] = 1.0;
        return out;
    }
    let rf = f64::from(r);
    let mode = (((rf + 1.0) * w).floor() as usize).min(r as usize);
    let mut ln_mode = mode as f64 * w.ln() + (rf - mode as f64) * (-w).ln_1p();
    for i in 1..=mode {
        ln_mode += ((rf - i as f64 + 1.0) / i as f64).ln();
    }
    out[mode] = ln_mode.exp();
    let odds = w / (1.0 - w);
    for l in mode + 1..len {
        out[l] = out[l - 1] * (rf - (l - 1) as f64) / l as f64 * odds;
    }
    for l in (0..mode).rev() {
        out[l] = out[l + 1] * (l + 1) as f64 / (rf - l as f64) / odds;
    }
    out
}

/// Sum of single-bet utilities: `alpha_cal * k + win_prob * (n - k)`.
pub fn additive_allocation_value(alpha_cal: f64, n: u32, k: u32, win_prob: f64) -> Result<f64> {
    if k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    if !(alpha_cal > 0.0 && alpha_cal < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "calibration alpha must lie strictly between 0 and 1, got {alpha_cal}"
        )));
    }
    Ok(alpha_cal * f64::from(k) + win_prob * f64::from(n - k))
}

/// Normal-density replacement for `2^-r C(r, l)`:
/// `sqrt(2 / (pi r)) * exp(-2 (l - r/2)^2 / r)`.
pub fn normal_pmf_weight(r: u32, ell: u32) -> Result<f64> {
    if r == 0 || ell > r {
        return Err(Error::ROutOfRange { r, ell });
    }
    let rf = f64::from(r);
    let d = f64::from(ell) - rf / 2.0;
    Ok((2.0 / (std::f64::consts::PI * rf)).sqrt() * (-2.0 * d * d / rf).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationRow {
    pub k: u32,
    pub exact: f64,
    pub approx: Option<f64>,
    pub additive: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationReport {
    pub per_k: Vec<AllocationRow>,
    /// First `k` attaining the largest exact utility.
    pub best_k_exact: u32,
    pub best_k_additive: u32,
}

impl AllocationReport {
    /// `k,exact,approx,additive` rows with six decimals; `approx` is left
    /// empty when it was not computed.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,exact,approx,additive\n");
        for row in &self.per_k {
            let approx = row.approx.map(|a| format!("{a:.6}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{:.6},{},{:.6}\n",
                row.k, row.exact, approx, row.additive
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlipRow {
    pub n: u32,
    pub all_b: f64,
    pub all_a: f64,
}

impl FlipRow {
    pub fn gap(&self) -> f64 {
        self.all_b - self.all_a
    }

    pub fn prefers_b(&self) -> bool {
        self.all_b > self.all_a
    }
}

/// Start of the trailing run of horizons that prefer all-B, if the sweep
/// ends inside one.
pub fn flip_threshold(rows: &[FlipRow]) -> Option<u32> {
    let mut threshold = None;
    for row in rows.iter().rev() {
        if !row.prefers_b() {
            break;
        }
        threshold = Some(row.n);
    }
    threshold
}

/// Exact utility of a committed allocation seen as a lottery: the shifted
/// binomial total, scored with [`UtilityFunction::expected_utility`].
pub fn allocation_lottery(p: &SimultaneousProblem, k: u32) -> Result<Lottery> {
    p.check_k(k)?;
    Ok(Lottery::binomial_total(p.n - k, p.prize, p.win_prob)?.shift(p.sure_amount * u64::from(k)))
}
