//! Parameter sweeps and six-plan comparisons.
//!
//! A sweep clones a base market, walks one scalar parameter through an
//! increasing list of values, solves the requested plans at every point, and
//! collects a table that [`emit_csv`] serializes deterministically. Plans can
//! be scored two ways: against the (possibly reduced) market they were solved
//! on, or against the true market with the node re-best-responding.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fmt::sig12;
use crate::market::MarketInstance;
use crate::matrix::SymMatrix;
use crate::solver::{
    evaluate_with_best_response, plan_instance, solve_plan, PlanKind, SolveReport,
};

/// One scalar knob a sweep can turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    /// Diagonal cost coefficient c_ii.
    CostDiagonal(usize),
    /// Diagonal noise variance σ_ii.
    NoiseDiagonal(usize),
    /// Risk aversion η.
    Eta,
    /// Marginal product β_i.
    Beta(usize),
}

impl std::fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepParameter::CostDiagonal(i) => write!(f, "c[{i},{i}]"),
            SweepParameter::NoiseDiagonal(i) => write!(f, "sigma[{i},{i}]"),
            SweepParameter::Eta => write!(f, "eta"),
            SweepParameter::Beta(i) => write!(f, "beta[{i}]"),
        }
    }
}

/// Which market a plan's utilities are measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvaluationMode {
    /// Score each plan on the market it was solved on; participation binds.
    #[default]
    OwnInstance,
    /// Score every plan on the true market, with the node best-responding
    /// under the true cost matrix.
    TrueInstance,
}

impl std::fmt::Display for EvaluationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EvaluationMode::OwnInstance => f.write_str("own"),
            EvaluationMode::TrueInstance => f.write_str("true"),
        }
    }
}

impl std::str::FromStr for EvaluationMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "own" => Ok(EvaluationMode::OwnInstance),
            "true" => Ok(EvaluationMode::TrueInstance),
            other => Err(format!("unknown evaluation mode '{other}' (expected own or true)")),
        }
    }
}

/// A sweep over one parameter for a set of plans.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: MarketInstance,
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub plans: Vec<PlanKind>,
    pub evaluation_mode: EvaluationMode,
}

impl SweepSpec {
    /// All six plans, own-instance scoring.
    pub fn new(base: MarketInstance, parameter: SweepParameter, values: Vec<f64>) -> Self {
        Self {
            base,
            parameter,
            values,
            plans: PlanKind::all().to_vec(),
            evaluation_mode: EvaluationMode::OwnInstance,
        }
    }

    pub fn with_plans(mut self, plans: Vec<PlanKind>) -> Self {
        self.plans = plans;
        self
    }

    pub fn with_mode(mut self, mode: EvaluationMode) -> Self {
        self.evaluation_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidSweep("values list is empty".into()));
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSweep(
                "values must be strictly increasing".into(),
            ));
        }
        if self.plans.is_empty() {
            return Err(Error::InvalidSweep("plan list is empty".into()));
        }
        let n = self.base.n();
        let index = match self.parameter {
            SweepParameter::CostDiagonal(i)
            | SweepParameter::NoiseDiagonal(i)
            | SweepParameter::Beta(i) => Some(i),
            SweepParameter::Eta => None,
        };
        if let Some(i) = index {
            if i >= n {
                return Err(Error::InvalidSweep(format!(
                    "parameter index {i} out of range for dimension {n}"
                )));
            }
        }
        Ok(())
    }
}

/// One (parameter value, plan) record.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param_value: f64,
    pub plan: PlanKind,
    pub no_utility: f64,
    pub fn_ce: f64,
    pub welfare: f64,
    pub t: f64,
    pub s: Vec<f64>,
}

/// Sweep table, ordered by value then plan.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub n: usize,
    pub rows: Vec<SweepRow>,
}

fn apply_parameter(
    base: &MarketInstance,
    parameter: SweepParameter,
    value: f64,
) -> Result<MarketInstance> {
    let built = match parameter {
        SweepParameter::CostDiagonal(i) => base.with_cost_entry(i, i, value),
        SweepParameter::NoiseDiagonal(i) => base.with_noise_entry(i, i, value),
        SweepParameter::Eta => base.with_eta(value),
        SweepParameter::Beta(i) => base.with_beta_entry(i, value),
    };
    built.map_err(|e| match e {
        Error::InvalidInstance(msg) => {
            Error::InvalidPerturbation(format!("{parameter} = {value} rejected: {msg}"))
        }
        other => other,
    })
}

/// Solves `plan` on `inst` and scores it per `mode`.
pub fn solve_in_mode(
    inst: &MarketInstance,
    plan: PlanKind,
    mode: EvaluationMode,
) -> Result<SolveReport> {
    let own = solve_plan(inst, plan)?;
    match mode {
        EvaluationMode::OwnInstance => Ok(own),
        EvaluationMode::TrueInstance => {
            // plans solved on the true market already carry true scores
            if plan_instance(inst, plan) == *inst {
                Ok(own)
            } else {
                evaluate_with_best_response(inst, own.plan, own.contract)
            }
        }
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.values.len() * spec.plans.len());
    for &value in &spec.values {
        let inst = apply_parameter(&spec.base, spec.parameter, value)?;
        for &plan in &spec.plans {
            let report = solve_in_mode(&inst, plan, spec.evaluation_mode)?;
            rows.push(SweepRow {
                param_value: value,
                plan: report.plan,
                no_utility: report.no_utility,
                fn_ce: report.fn_ce,
                welfare: report.welfare,
                t: report.contract.t,
                s: report.contract.s,
            });
        }
    }
    Ok(SweepResult {
        n: spec.base.n(),
        rows,
    })
}

/// Solves all six plans and sorts them by operator utility, best first; ties
/// keep the canonical plan order.
pub fn rank_plans(
    inst: &MarketInstance,
    mode: EvaluationMode,
) -> Result<Vec<(PlanKind, f64)>> {
    let mut ranked: Vec<(PlanKind, f64)> = PlanKind::all()
        .iter()
        .map(|&plan| solve_in_mode(inst, plan, mode).map(|r| (plan, r.no_utility)))
        .collect::<Result<_>>()?;
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("utilities are finite"));
    Ok(ranked)
}

pub fn csv_string(result: &SweepResult) -> String {
    let mut out = String::from("param_value,plan,no_utility,fn_ce,welfare,t");
    for i in 0..result.n {
        out.push_str(&format!(",s_{i}"));
    }
    out.push('\n');
    for row in &result.rows {
        out.push_str(&sig12(row.param_value));
        out.push(',');
        out.push_str(row.plan.label());
        for v in [row.no_utility, row.fn_ce, row.welfare, row.t] {
            out.push(',');
            out.push_str(&sig12(v));
        }
        for v in &row.s {
            out.push(',');
            out.push_str(&sig12(*v));
        }
        out.push('\n');
    }
    out
}

/// Writes the sweep table as UTF-8 CSV with LF line endings.
pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    fs::write(path, csv_string(result))?;
    Ok(())
}

/// Reference two-resource market used by the comparison experiments.
///
/// Chosen by a deterministic grid search so that the measurement-noise
/// correlation (0.8) strictly dominates the cost coupling (0.2); under that
/// regime the six plan utilities are strictly ordered with the fixed-salary
/// benchmark on top and the single-bonus plan at the bottom.
pub fn fixture_instance() -> MarketInstance {
    MarketInstance::new(
        SymMatrix::from_rows(&[vec![1.0, 0.2], vec![0.2, 1.0]]).unwrap(),
        SymMatrix::from_rows(&[vec![1.0, 0.8], vec![0.8, 1.0]]).unwrap(),
        vec![1.0, 1.0],
        1.0,
        0.0,
    )
    .expect("fixture parameters are valid")
}
