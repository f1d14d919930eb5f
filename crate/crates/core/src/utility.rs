//! Utility-of-money functions and the quantities built on them: expected
//! utility, conditional utility of a later installment, and the
//! indifference probability `alpha(x)` under added background wealth `x`.

use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::money::{Lottery, Money};

/// Successive differences of `alpha` smaller than this count as zero.
pub const ALPHA_CLASSIFY_TOLERANCE: f64 = 1e-10;
/// Smallest accepted `u(b+x) - u(a+x)`.
pub const ALPHA_MIN_DENOMINATOR: f64 = 1e-12;
/// Absolute cash tolerance of the certainty-equivalent bisection.
pub const CE_CASH_TOLERANCE: f64 = 1e-6;

/// Piecewise-linear utility through strictly increasing sample points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    points: Vec<(f64, f64)>,
}

impl Table {
    /// Validates the sample points. The first cash value must be 0 and both
    /// columns must be strictly increasing; rows are numbered from 1.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Table> {
        if points.len() < 2 {
            return Err(Error::InvalidTable {
                row: points.len() + 1,
                reason: "at least two rows are required".into(),
            });
        }
        for (i, &(x, y)) in points.iter().enumerate() {
            let row = i + 1;
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::InvalidTable {
                    row,
                    reason: "non-finite value".into(),
                });
            }
            if i == 0 {
                if x != 0.0 {
                    return Err(Error::InvalidTable {
                        row,
                        reason: format!("first cash value must be 0, got {x}"),
                    });
                }
                continue;
            }
            let (px, py) = points[i - 1];
            if x <= px {
                return Err(Error::InvalidTable {
                    row,
                    reason: format!("cash {x} does not exceed previous {px}"),
                });
            }
            if y <= py {
                return Err(Error::InvalidTable {
                    row,
                    reason: format!("utility {y} does not exceed previous {py}"),
                });
            }
        }
        Ok(Table { points })
    }

    /// Parses two-column `cash,utility` CSV text. A first line that does not
    /// parse as numbers is treated as a header. Blank lines and lines starting
    /// with `#` are skipped. Errors report the 1-based line number.
    pub fn from_csv_str(text: &str) -> Result<Table> {
        let mut points = Vec::new();
        let mut lines = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let row = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed = match cols.as_slice() {
                [x, y] => x.parse::<f64>().ok().zip(y.parse::<f64>().ok()),
                _ => None,
            };
            match parsed {
                Some(p) => {
                    points.push(p);
                    lines.push(row);
                }
                None if i == 0 => continue,
                None => {
                    return Err(Error::InvalidTable {
                        row,
                        reason: format!("expected two numeric columns, got {line:?}"),
                    })
                }
            }
        }
        Table::new(points).map_err(|e| match e {
            Error::InvalidTable { row, reason } => Error::InvalidTable {
                row: lines.get(row - 1).copied().unwrap_or(row),
                reason,
            },
            other => other,
        })
    }

    pub fn from_csv_path(path: &Path) -> Result<Table> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidTable {
            row: 0,
            reason: format!("cannot read {}: {e}", path.display()),
        })?;
        Table::from_csv_str(&text)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    fn max_cash(&self) -> f64 {
        self.points[self.points.len() - 1].0
    }

    fn interpolate(&self, x: f64) -> f64 {
        let i = self.points.partition_point(|&(px, _)| px < x);
        if i == 0 {
            return self.points[0].1;
        }
        let (x1, y1) = self.points[i.min(self.points.len() - 1)];
        let (x0, y0) = self.points[i - 1];
        if x >= x1 {
            return y1;
        }
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `ln(1 + x)`
    LogShifted,
    /// `ln(1 + x) / ln(1 + top)`, so that `u(0) = 0` and `u(top) = 1`.
    NormalizedLog { top: f64 },
    /// `slope * x`
    Linear { slope: f64 },
    /// `x^gamma`
    Power { gamma: f64 },
    /// `1 - exp(-lambda * x)`
    Exponential { lambda: f64 },
    Tabulated(Table),
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::LogShifted => write!(f, "log_shifted"),
            Family::NormalizedLog { top } => write!(f, "normalized_log(top={top})"),
            Family::Linear { slope } => write!(f, "linear(slope={slope})"),
            Family::Power { gamma } => write!(f, "power(gamma={gamma})"),
            Family::Exponential { lambda } => write!(f, "exponential(lambda={lambda})"),
            Family::Tabulated(t) => write!(f, "tabulated({} points)", t.points.len()),
        }
    }
}

/// A strictly increasing utility-of-money function on `[0, domain_max]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtilityFunction {
    family: Family,
    domain_max: f64,
}

impl UtilityFunction {
    pub fn new(family: Family, domain_max: f64) -> Result<UtilityFunction> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(domain_max > 0.0) || !domain_max.is_finite() {
            return bad(format!("domain_max must be positive and finite, got {domain_max}"));
        }
        match &family {
            Family::LogShifted => {}
            Family::NormalizedLog { top } => {
                if !(*top > 0.0) || !top.is_finite() {
                    return bad(format!("normalized_log top must be positive, got {top}"));
                }
            }
            Family::Linear { slope } => {
                if !(*slope > 0.0) || !slope.is_finite() {
                    return bad(format!("linear slope must be positive, got {slope}"));
                }
            }
            Family::Power { gamma } => {
                if !(*gamma > 0.0) || !gamma.is_finite() {
                    return bad(format!("power gamma must be positive, got {gamma}"));
                }
            }
            Family::Exponential { lambda } => {
                if !(*lambda > 0.0) || !lambda.is_finite() {
                    return bad(format!("exponential lambda must be positive, got {lambda}"));
                }
            }
            Family::Tabulated(t) => {
                if domain_max > t.max_cash() {
                    return bad(format!(
                        "domain_max {domain_max} exceeds the last tabulated cash value {}",
                        t.max_cash()
                    ));
                }
            }
        }
        Ok(UtilityFunction { family, domain_max })
    }

    pub fn log_shifted(domain_max: f64) -> Result<Self> {
        Self::new(Family::LogShifted, domain_max)
    }

    /// The `[0, 1]`-normalized log utility for `n` bets with a 1000 prize.
    pub fn normalized_log(n: u32) -> Result<Self> {
        let top = 1000.0 * f64::from(n);
        Self::new(Family::NormalizedLog { top }, top)
    }

    pub fn normalized_log_to(top: f64) -> Result<Self> {
        Self::new(Family::NormalizedLog { top }, top)
    }

    pub fn linear(slope: f64, domain_max: f64) -> Result<Self> {
        Self::new(Family::Linear { slope }, domain_max)
    }

    pub fn power(gamma: f64, domain_max: f64) -> Result<Self> {
        Self::new(Family::Power { gamma }, domain_max)
    }

    pub fn exponential(lambda: f64, domain_max: f64) -> Result<Self> {
        Self::new(Family::Exponential { lambda }, domain_max)
    }

    /// Tabulated utility; the domain is the full tabulated cash range.
    pub fn tabulated(table: Table) -> Result<Self> {
        let max = table.max_cash();
        Self::new(Family::Tabulated(table), max)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn domain_max(&self) -> f64 {
        self.domain_max
    }

    /// Same family over a different domain. A normalized log keeps its `top`.
    pub fn with_domain_max(&self, domain_max: f64) -> Result<Self> {
        Self::new(self.family.clone(), domain_max)
    }

    pub fn check_domain(&self, x: f64) -> Result<()> {
        if x >= 0.0 && x <= self.domain_max {
            Ok(())
        } else {
            Err(Error::DomainExceeded {
                value: x,
                max: self.domain_max,
            })
        }
    }

    /// `u(x)` for real `x` in `[0, domain_max]`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(self.raw(x))
    }

    pub fn eval_money(&self, m: Money) -> Result<f64> {
        self.eval(m.as_f64())
    }

    fn raw(&self, x: f64) -> f64 {
        match &self.family {
            Family::LogShifted => x.ln_1p(),
            Family::NormalizedLog { top } => x.ln_1p() / top.ln_1p(),
            Family::Linear { slope } => slope * x,
            Family::Power { gamma } => x.powf(*gamma),
            Family::Exponential { lambda } => -(-lambda * x).exp_m1(),
            Family::Tabulated(t) => t.interpolate(x),
        }
    }

    /// `sum_j p_j u(c_j)`.
    pub fn expected_utility(&self, l: &Lottery) -> Result<f64> {
        l.outcomes()
            .iter()
            .map(|&(m, p)| self.eval_money(m).map(|u| p * u))
            .sum()
    }

    /// Utility of a second installment `r2` after `r1` was already received:
    /// `u(r1 + r2) - u(r1)`.
    pub fn conditional_utility(&self, r2: Money, r1: Money) -> Result<f64> {
        Ok(self.eval_money(r1 + r2)? - self.eval_money(r1)?)
    }

    /// `E[u(r1 + D)] - u(r1)`.
    pub fn conditional_expected_utility(&self, d: &Lottery, r1: Money) -> Result<f64> {
        let base = self.eval_money(r1)?;
        d.outcomes()
            .iter()
            .map(|&(m, p)| self.eval_money(r1 + m).map(|u| p * (u - base)))
            .sum()
    }

    /// Probability `alpha(x)` at which `c + x` is indifferent to the lottery
    /// paying `b + x` with probability `alpha(x)` and `a + x` otherwise.
    pub fn alpha(&self, spec: &AlphaSpec, x: f64) -> Result<f64> {
        let (a, c, b) = (spec.a.as_f64(), spec.c.as_f64(), spec.b.as_f64());
        let ua = self.eval(a + x)?;
        let uc = self.eval(c + x)?;
        let ub = self.eval(b + x)?;
        let gap = ub - ua;
        if !(gap >= ALPHA_MIN_DENOMINATOR) {
            return Err(Error::DegenerateDenominator { x, gap });
        }
        Ok((uc - ua) / gap)
    }

    /// `alpha` on `grid_points` evenly spaced offsets covering the spec's range.
    pub fn alpha_curve(&self, spec: &AlphaSpec, grid_points: usize) -> Result<Vec<(f64, f64)>> {
        spec.grid(grid_points)?
            .into_iter()
            .map(|x| self.alpha(spec, x).map(|al| (x, al)))
            .collect()
    }

    /// Classifies how `alpha` moves across the spec's offset range.
    pub fn alpha_monotonicity_report(
        &self,
        spec: &AlphaSpec,
        grid_points: usize,
    ) -> Result<Monotonicity> {
        if grid_points < 3 {
            return Err(Error::InvalidParameter(format!(
                "monotonicity report needs at least 3 grid points, got {grid_points}"
            )));
        }
        let curve = self.alpha_curve(spec, grid_points)?;
        Ok(Monotonicity::classify(curve.iter().map(|p| p.1)))
    }

    /// Cash amount whose sure utility equals the lottery's expected utility.
    pub fn certainty_equivalent(&self, l: &Lottery) -> Result<f64> {
        let target = self.expected_utility(l)?;
        let mut lo = l.min().as_f64();
        let mut hi = l.max().as_f64();
        while hi - lo > CE_CASH_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            if self.raw(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Sign pattern of successive `alpha` differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Monotonicity {
    Decreasing,
    Increasing,
    Constant,
    Mixed,
}

impl Monotonicity {
    pub fn classify<I: IntoIterator<Item = f64>>(values: I) -> Monotonicity {
        let mut up = false;
        let mut down = false;
        let mut prev: Option<f64> = None;
        for v in values {
            if let Some(p) = prev {
                let d = v - p;
                if d > ALPHA_CLASSIFY_TOLERANCE {
                    up = true;
                } else if d < -ALPHA_CLASSIFY_TOLERANCE {
                    down = true;
                }
            }
            prev = Some(v);
        }
        match (up, down) {
            (true, true) => Monotonicity::Mixed,
            (true, false) => Monotonicity::Increasing,
            (false, true) => Monotonicity::Decreasing,
            (false, false) => Monotonicity::Constant,
        }
    }
}

impl fmt::Display for Monotonicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Cash levels `a < c < b` and the interval of background-wealth offsets `x`
/// over which `alpha(x)` is studied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaSpec {
    pub a: Money,
    pub c: Money,
    pub b: Money,
    pub x_range: (f64, f64),
}

impl AlphaSpec {
    pub fn new(a: Money, c: Money, b: Money, x_min: f64, x_max: f64) -> Result<AlphaSpec> {
        if !(a < c && c < b) {
            return Err(Error::InvalidAlphaSpec { a, c, b });
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_min > x_max {
            return Err(Error::InvalidParameter(format!(
                "offset range [{x_min}, {x_max}] is empty or not finite"
            )));
        }
        if x_min < -a.as_f64() {
            return Err(Error::DomainExceeded {
                value: a.as_f64() + x_min,
                max: f64::INFINITY,
            });
        }
        Ok(AlphaSpec {
            a,
            c,
            b,
            x_range: (x_min, x_max),
        })
    }

    /// Checks that every shifted argument stays inside `u`'s domain.
    pub fn check_within(&self, u: &UtilityFunction) -> Result<()> {
        u.check_domain(self.a.as_f64() + self.x_range.0)?;
        u.check_domain(self.b.as_f64() + self.x_range.1)
    }

    /// `points` evenly spaced offsets spanning `x_range`, endpoints exact.
    pub fn grid(&self, points: usize) -> Result<Vec<f64>> {
        if points < 2 {
            return Err(Error::InvalidParameter(format!(
                "alpha grid needs at least 2 points, got {points}"
            )));
        }
        let (lo, hi) = self.x_range;
        let step = (hi - lo) / (points - 1) as f64;
        Ok((0..points)
            .map(|i| if i + 1 == points { hi } else { lo + step * i as f64 })
            .collect())
    }

    /// `(c - a) / (b - a)`, the value `alpha` takes under linear utility.
    pub fn linear_alpha(&self) -> f64 {
        (self.c.as_f64() - self.a.as_f64()) / (self.b.as_f64() - self.a.as_f64())
    }
}
