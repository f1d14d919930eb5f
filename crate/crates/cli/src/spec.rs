//! The TOML problem-spec document shared by every command.
//!
//! ```toml
//! stages = 2
//! calibration_alpha = 0.7      # optional
//!
//! [utility]
//! family = "log_shifted"       # normalized_log | linear | power | exponential | tabulated
//! params = { gamma = 2.0 }     # family-specific, optional
//! domain_max = 2000            # optional
//! table = "u.csv"              # tabulated only, relative to the spec file
//!
//! [[decisions]]
//! name = "A"
//! outcomes = [{ prob = 1.0, reward = 400 }]
//!
//! [sweep]                      # optional
//! n_max = 60
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use betlab_core::{
    BetProblem, Decision, Lottery, Money, SimultaneousProblem, Table, UtilityFunction,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Syntax {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl ToString) -> SpecError {
    SpecError::Invalid {
        field: field.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub stages: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration_alpha: Option<f64>,
    pub utility: UtilitySpec,
    pub decisions: Vec<DecisionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilitySpec {
    pub family: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionSpec {
    pub name: String,
    pub outcomes: Vec<OutcomeSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeSpec {
    pub prob: f64,
    pub reward: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub n_max: u32,
}

/// A spec together with the directory relative paths resolve against.
#[derive(Debug, Clone)]
pub struct LoadedSpec {
    pub spec: ProblemSpec,
    pub base_dir: PathBuf,
}

/// The two-decision shape: a sure amount against `{0: 1 - w, prize: w}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SureVsCoin {
    pub sure: Money,
    pub prize: Money,
    pub win_prob: f64,
}

impl ProblemSpec {
    pub fn parse(text: &str, path: &Path) -> Result<ProblemSpec, SpecError> {
        let spec: ProblemSpec = toml::from_str(text).map_err(|source| SpecError::Syntax {
            path: path.to_path_buf(),
            source,
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<LoadedSpec, SpecError> {
        let text = std::fs::read_to_string(path).map_err(|source| SpecError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let spec = ProblemSpec::parse(&text, path)?;
        let base_dir = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(LoadedSpec { spec, base_dir })
    }

    fn validate(&self) -> Result<(), SpecError> {
        if self.stages == 0 {
            return Err(invalid("stages", "must be at least 1"));
        }
        if let Some(a) = self.calibration_alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(invalid("calibration_alpha", format!("{a} is not in (0, 1)")));
            }
        }
        if let Some(s) = self.sweep {
            if s.n_max == 0 {
                return Err(invalid("sweep.n_max", "must be at least 1"));
            }
        }
        if self.decisions.is_empty() {
            return Err(invalid("decisions", "at least one decision is required"));
        }
        for (i, d) in self.decisions.iter().enumerate() {
            if d.name.trim().is_empty() {
                return Err(invalid(format!("decisions[{i}].name"), "must not be empty"));
            }
            if self.decisions[..i].iter().any(|e| e.name == d.name) {
                return Err(invalid(
                    format!("decisions[{i}].name"),
                    format!("duplicate name {:?}", d.name),
                ));
            }
            d.lottery(i)?;
        }
        Ok(())
    }

    /// Outcomes merged and sorted, probabilities renormalized.
    pub fn canonicalize(&self) -> Result<ProblemSpec, SpecError> {
        let mut out = self.clone();
        for (i, d) in out.decisions.iter_mut().enumerate() {
            d.outcomes = d
                .lottery(i)?
                .outcomes()
                .iter()
                .map(|&(m, p)| OutcomeSpec {
                    prob: p,
                    reward: m.0,
                })
                .collect();
        }
        Ok(out)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("problem specs always serialize")
    }

    pub fn max_reward(&self) -> u64 {
        self.decisions
            .iter()
            .flat_map(|d| d.outcomes.iter().map(|o| o.reward))
            .max()
            .unwrap_or(0)
    }

    pub fn decisions(&self) -> Result<Vec<Decision>, SpecError> {
        self.decisions
            .iter()
            .enumerate()
            .map(|(i, d)| Ok(Decision::new(d.name.clone(), d.lottery(i)?)))
            .collect()
    }

    /// Identifies the sure decision (A) and the binary lottery (B), in
    /// either order.
    pub fn sure_vs_coin(&self) -> Result<SureVsCoin, String> {
        let lotteries: Vec<Lottery> = self
            .decisions()
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|d| d.lottery)
            .collect();
        let shape_err = || {
            "the decisions must be exactly a sure amount and a lottery on {0, prize}".to_string()
        };
        if lotteries.len() != 2 {
            return Err(shape_err());
        }
        let (sure, coin) = match (lotteries[0].len(), lotteries[1].len()) {
            (1, 2) => (&lotteries[0], &lotteries[1]),
            (2, 1) => (&lotteries[1], &lotteries[0]),
            _ => return Err(shape_err()),
        };
        let (low, high) = (coin.outcomes()[0], coin.outcomes()[1]);
        if low.0 != Money::ZERO {
            return Err(shape_err());
        }
        Ok(SureVsCoin {
            sure: sure.min(),
            prize: high.0,
            win_prob: high.1,
        })
    }
}

impl DecisionSpec {
    fn lottery(&self, index: usize) -> Result<Lottery, SpecError> {
        if self.outcomes.is_empty() {
            return Err(invalid(
                format!("decisions[{index}].outcomes"),
                "at least one outcome is required",
            ));
        }
        for (j, o) in self.outcomes.iter().enumerate() {
            if !(o.prob >= 0.0 && o.prob <= 1.0) {
                return Err(invalid(
                    format!("decisions[{index}].outcomes[{j}].prob"),
                    format!("{} is not a probability", o.prob),
                ));
            }
        }
        Lottery::new(self.outcomes.iter().map(|o| (Money(o.reward), o.prob)))
            .map_err(|e| invalid(format!("decisions[{index}].outcomes"), e))
    }
}

impl UtilitySpec {
    fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    fn required(&self, name: &str) -> Result<f64, SpecError> {
        self.param(name).ok_or_else(|| {
            invalid(
                format!("utility.params.{name}"),
                format!("required by family {:?}", self.family),
            )
        })
    }

    fn check_params(&self, allowed: &[&str]) -> Result<(), SpecError> {
        match self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(invalid(
                format!("utility.params.{k}"),
                format!("not a parameter of family {:?}", self.family),
            )),
            None => Ok(()),
        }
    }

    /// Builds the utility. `default_domain` applies when the spec does not
    /// set `domain_max`; a normalized log defaults to its own anchor.
    pub fn build(&self, default_domain: f64, base_dir: &Path) -> Result<UtilityFunction, SpecError> {
        let domain = self.domain_max.map(|d| d as f64).unwrap_or(default_domain.max(1.0));
        let at = |e: betlab_core::Error| invalid("utility", e);
        if self.table.is_some() && self.family != "tabulated" {
            return Err(invalid("utility.table", "only used by family \"tabulated\""));
        }
        match self.family.as_str() {
            "log_shifted" | "log" => {
                self.check_params(&[])?;
                UtilityFunction::log_shifted(domain).map_err(at)
            }
            "normalized_log" => {
                self.check_params(&["n", "top"])?;
                let top = match (self.param("top"), self.param("n")) {
                    (Some(top), _) => top,
                    (None, Some(n)) => 1000.0 * n,
                    (None, None) => default_domain.max(1.0),
                };
                let u = UtilityFunction::normalized_log_to(top).map_err(at)?;
                match self.domain_max {
                    Some(d) => u.with_domain_max(d as f64).map_err(at),
                    None => Ok(u),
                }
            }
            "linear" => {
                self.check_params(&["slope"])?;
                UtilityFunction::linear(self.param("slope").unwrap_or(1.0), domain).map_err(at)
            }
            "power" => {
                self.check_params(&["gamma"])?;
                UtilityFunction::power(self.required("gamma")?, domain).map_err(at)
            }
            "exponential" => {
                self.check_params(&["lambda"])?;
                UtilityFunction::exponential(self.required("lambda")?, domain).map_err(at)
            }
            "tabulated" => {
                self.check_params(&[])?;
                let rel = self
                    .table
                    .as_ref()
                    .ok_or_else(|| invalid("utility.table", "required by family \"tabulated\""))?;
                let table = Table::from_csv_path(&base_dir.join(rel))
                    .map_err(|e| invalid("utility.table", e))?;
                let u = UtilityFunction::tabulated(table).map_err(at)?;
                match self.domain_max {
                    Some(d) => u.with_domain_max(d as f64).map_err(at),
                    None => Ok(u),
                }
            }
            other => Err(invalid(
                "utility.family",
                format!(
                    "unknown family {other:?}; expected log_shifted, normalized_log, linear, power, exponential or tabulated"
                ),
            )),
        }
    }
}

impl LoadedSpec {
    pub fn utility(&self, default_domain: f64) -> Result<UtilityFunction, SpecError> {
        self.spec.utility.build(default_domain, &self.base_dir)
    }

    pub fn bet_problem(&self) -> Result<BetProblem, BuildError> {
        let s = &self.spec;
        let domain = (s.max_reward() * u64::from(s.stages)) as f64;
        let u = self.utility(domain)?;
        Ok(BetProblem::new(s.stages, s.decisions()?, u)?)
    }

    /// The simultaneous problem over `n` bets; the utility's default domain
    /// covers `prize * domain_bets`.
    pub fn simultaneous(
        &self,
        shape: SureVsCoin,
        n: u32,
        domain_bets: u32,
    ) -> Result<SimultaneousProblem, BuildError> {
        let domain = (shape.prize.0 * u64::from(domain_bets)) as f64;
        let u = self.utility(domain)?;
        Ok(SimultaneousProblem::new(
            n,
            shape.sure,
            shape.prize,
            shape.win_prob,
            u,
        )?)
    }
}

/// A spec that parsed but could not be turned into a problem, either because
/// a field is unusable or because the model rejects the combination.
#[derive(Debug, Error)]
pub enum BuildError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Model(#[from] betlab_core::Error),
}
