//! One function per subcommand. Each returns the text to emit; the binary
//! decides where it goes.

use std::fmt::Write as _;
use std::path::Path;

use betlab_core::oracle::best_policy_by_enumeration;
use betlab_core::simultaneous::flip_threshold;
use betlab_core::{solve, AlphaSpec, Money, Monotonicity, UtilityFunction};
use serde::Serialize;
use thiserror::Error;

use crate::spec::{BuildError, ProblemSpec, SpecError};

/// Agreement required between the backward induction and the brute force.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    ShapeMismatch(String),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 1,
            CliError::Domain(_) | CliError::ShapeMismatch(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<betlab_core::Error> for CliError {
    fn from(e: betlab_core::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<BuildError> for CliError {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::Spec(e) => e.into(),
            BuildError::Model(e) => e.into(),
        }
    }
}

/// Result of a verification command: the report, and whether it passed.
#[derive(Debug, Clone)]
pub struct Checked {
    pub report: String,
    pub passed: bool,
}

#[derive(Serialize)]
struct SolveJson<'a> {
    root_value: f64,
    policy: String,
    history_independent: bool,
    table: Vec<betlab_core::sequential::DPRow>,
    tree: &'a betlab_core::PolicyTree,
}

pub fn cmd_fmt(spec_path: &Path) -> Result<String, CliError> {
    let loaded = ProblemSpec::load(spec_path)?;
    Ok(loaded.spec.canonicalize()?.to_toml())
}

pub fn cmd_solve_sequential(spec_path: &Path, json: bool) -> Result<String, CliError> {
    let loaded = ProblemSpec::load(spec_path)?;
    let p = loaded.bet_problem()?;
    let sol = solve(&p)?;
    let rows = sol.table.to_rows(&p);
    let independent = sol.table.is_history_independent();
    if json {
        let doc = SolveJson {
            root_value: sol.root_value,
            policy: sol.tree.summary(),
            history_independent: independent,
            table: rows,
            tree: &sol.tree,
        };
        let mut text = serde_json::to_string_pretty(&doc)
            .map_err(|e| CliError::Domain(format!("cannot encode report: {e}")))?;
        text.push('\n');
        return Ok(text);
    }

    let mut out = String::new();
    let _ = writeln!(out, "stages={}", p.stages());
    let _ = writeln!(out, "utility={}", p.utility().family());
    let _ = writeln!(out, "root_value={:.6}", sol.root_value);
    let _ = writeln!(out, "policy={}", sol.tree.summary());
    let _ = writeln!(out, "history_independent={independent}");
    if independent {
        let _ = writeln!(
            out,
            "# every state of a stage takes the same decision; cash already won does not matter"
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "stage,state,value,decision");
    for r in &rows {
        let _ = writeln!(out, "{},{},{:.6},{}", r.stage, r.state, r.value, r.decision);
    }
    let _ = writeln!(out);
    out.push_str(&sol.tree.render());
    Ok(out)
}

pub fn cmd_analyze_simultaneous(
    spec_path: &Path,
    with_approx: bool,
    alpha: Option<f64>,
) -> Result<String, CliError> {
    let loaded = ProblemSpec::load(spec_path)?;
    let shape = loaded
        .spec
        .sure_vs_coin()
        .map_err(CliError::ShapeMismatch)?;
    let n = loaded.spec.stages;
    let p = loaded.simultaneous(shape, n, n)?;
    let alpha = match alpha.or(loaded.spec.calibration_alpha) {
        Some(a) => a,
        None => p.calibration_alpha()?,
    };
    let report = p.allocation_report(alpha, with_approx)?;
    let mut out = report.to_csv();
    let _ = writeln!(out, "# calibration_alpha={alpha:.6}");
    let _ = writeln!(out, "# best_k_exact={}", report.best_k_exact);
    let _ = writeln!(out, "# best_k_additive={}", report.best_k_additive);
    let _ = writeln!(
        out,
        "# agreement={}",
        report.best_k_exact == report.best_k_additive
    );
    Ok(out)
}

/// Parses `name[:param]`: `log`, `linear[:slope]`, `power:gamma`,
/// `exponential:lambda` (or `exp`), `normalized_log:n`.
pub fn parse_utility(text: &str, domain_max: f64) -> Result<UtilityFunction, CliError> {
    let (name, param) = match text.split_once(':') {
        Some((n, p)) => {
            let v: f64 = p
                .trim()
                .parse()
                .map_err(|_| CliError::Parse(format!("utility {text:?}: bad parameter {p:?}")))?;
            (n.trim(), Some(v))
        }
        None => (text.trim(), None),
    };
    let need = |p: Option<f64>| {
        p.ok_or_else(|| CliError::Parse(format!("utility {text:?}: {name} needs a parameter")))
    };
    let u = match name {
        "log" | "log_shifted" => {
            if param.is_some() {
                return Err(CliError::Parse(format!("utility {text:?}: log takes no parameter")));
            }
            UtilityFunction::log_shifted(domain_max)
        }
        "linear" => UtilityFunction::linear(param.unwrap_or(1.0), domain_max),
        "power" => UtilityFunction::power(need(param)?, domain_max),
        "exponential" | "exp" => UtilityFunction::exponential(need(param)?, domain_max),
        "normalized_log" => {
            let n = need(param)?;
            UtilityFunction::normalized_log_to(1000.0 * n)
                .and_then(|u| u.with_domain_max(domain_max.max(1000.0 * n)))
        }
        other => {
            return Err(CliError::Parse(format!(
                "unknown utility {other:?}; expected log, linear, power, exponential or normalized_log"
            )))
        }
    };
    Ok(u?)
}

#[derive(Debug, Clone, Copy)]
pub struct AlphaCurveArgs<'a> {
    pub utility: &'a str,
    pub a: u64,
    pub c: u64,
    pub b: u64,
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    pub domain_max: Option<f64>,
}

pub fn cmd_alpha_curve(args: AlphaCurveArgs<'_>) -> Result<String, CliError> {
    let spec = AlphaSpec::new(Money(args.a), Money(args.c), Money(args.b), args.x_min, args.x_max)?;
    let domain = args
        .domain_max
        .unwrap_or(args.b as f64 + args.x_max.max(0.0));
    let u = parse_utility(args.utility, domain)?;
    spec.check_within(&u)?;
    let mut out = String::from("x,alpha\n");
    let mut values = Vec::with_capacity(args.points);
    for x in spec.grid(args.points)? {
        let al = u
            .alpha(&spec, x)
            .map_err(|e| CliError::Domain(format!("at x = {x}: {e}")))?;
        let _ = writeln!(out, "{x:.6},{al:.12}");
        values.push(al);
    }
    let _ = writeln!(out, "# classification={}", Monotonicity::classify(values));
    Ok(out)
}

pub fn cmd_find_threshold(spec_path: &Path, n_max: Option<u32>) -> Result<String, CliError> {
    let loaded = ProblemSpec::load(spec_path)?;
    let n_max = n_max
        .or(loaded.spec.sweep.map(|s| s.n_max))
        .ok_or_else(|| CliError::Parse("no horizon: pass --n-max or set sweep.n_max".into()))?;
    if n_max == 0 {
        return Err(CliError::Parse("--n-max must be at least 1".into()));
    }
    let shape = loaded
        .spec
        .sure_vs_coin()
        .map_err(CliError::ShapeMismatch)?;
    let p = loaded.simultaneous(shape, 1, n_max)?;
    let rows = p.preference_sweep(n_max)?;
    let mut out = String::from("n,all_b,all_a,gap\n");
    for r in &rows {
        let _ = writeln!(out, "{},{:.6},{:.6},{:.6}", r.n, r.all_b, r.all_a, r.gap());
    }
    match flip_threshold(&rows) {
        Some(t) => {
            let _ = writeln!(out, "# threshold={t}");
        }
        None => {
            let _ = writeln!(out, "# threshold=NotFound");
        }
    }
    Ok(out)
}

pub fn cmd_oracle_check(spec_path: &Path) -> Result<Checked, CliError> {
    let loaded = ProblemSpec::load(spec_path)?;
    let p = loaded.bet_problem()?;
    let dp = solve(&p)?.root_value;
    let oracle = best_policy_by_enumeration(&p)?;
    let gap = (dp - oracle.value).abs();
    let passed = gap <= ORACLE_TOLERANCE;
    let mut report = String::new();
    let _ = writeln!(report, "dp_value={dp:.12}");
    let _ = writeln!(report, "oracle_value={:.12}", oracle.value);
    let _ = writeln!(report, "gap={gap:e}");
    let _ = writeln!(report, "policies_checked={}", oracle.policies_checked);
    let _ = writeln!(report, "{}", if passed { "PASS" } else { "FAIL" });
    Ok(Checked { report, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Parse(String::new()).exit_code(), 1);
        assert_eq!(CliError::Domain(String::new()).exit_code(), 2);
        assert_eq!(CliError::ShapeMismatch(String::new()).exit_code(), 2);
        assert_eq!(CliError::Verification(String::new()).exit_code(), 3);
    }

    #[test]
    fn utility_strings() {
        assert!(parse_utility("log", 10.0).is_ok());
        assert!(parse_utility("log:2", 10.0).is_err());
        assert!(parse_utility("power", 10.0).is_err());
        assert!(parse_utility("power:x", 10.0).is_err());
        let u = parse_utility("normalized_log:2", 10.0).unwrap();
        assert_eq!(u.eval(2000.0).unwrap(), 1.0);
        assert_eq!(parse_utility("linear", 10.0).unwrap().eval(4.0).unwrap(), 4.0);
        assert!(matches!(
            parse_utility("exp:-1", 10.0),
            Err(CliError::Domain(_))
        ));
    }
}
