//! Report rendering: key/value text for solve and simulate, CSV for compare.
//! All floats carry 12 significant digits so outputs are byte-stable.

use fogpact_core::fmt::{sig12, sig12_vec};
use fogpact_core::solver::{PlanKind, SolveReport};
use fogpact_core::{SimConfig, SimResult};

pub fn solve_report_text(report: &SolveReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("plan: {}\n", report.plan.label()));
    out.push_str(&format!("t: {}\n", sig12(report.contract.t)));
    out.push_str(&format!("s: {}\n", sig12_vec(&report.contract.s)));
    out.push_str(&format!("a: {}\n", sig12_vec(report.effort.as_slice())));
    out.push_str(&format!("no_utility: {}\n", sig12(report.no_utility)));
    out.push_str(&format!("fn_ce: {}\n", sig12(report.fn_ce)));
    out.push_str(&format!("welfare: {}\n", sig12(report.welfare)));
    out
}

pub fn compare_csv(ranked: &[(PlanKind, f64)], details: &[(PlanKind, f64, f64)]) -> String {
    let mut out = String::from("plan,no_utility,fn_ce,welfare\n");
    for (plan, utility) in ranked {
        let (_, fn_ce, welfare) = details
            .iter()
            .find(|(p, _, _)| p.label() == plan.label())
            .expect("every ranked plan has details");
        out.push_str(&format!(
            "{},{},{},{}\n",
            plan.label(),
            sig12(*utility),
            sig12(*fn_ce),
            sig12(*welfare)
        ));
    }
    out
}

/// z-score convention: an exact match with zero spread scores zero.
pub fn z_score(mean: f64, expected: f64, stderr: f64) -> f64 {
    let diff = mean - expected;
    if stderr == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(diff)
        }
    } else {
        diff / stderr
    }
}

pub struct SimulateView<'a> {
    pub plan: PlanKind,
    pub config: SimConfig,
    pub result: &'a SimResult,
    pub analytic_utility: f64,
    pub analytic_ce: f64,
    pub eta: f64,
}

pub fn simulate_report_text(view: &SimulateView<'_>) -> String {
    let empirical_ce = -(-view.result.mean_fn_utility).ln() / view.eta;
    let z = z_score(
        view.result.mean_fn_utility,
        view.analytic_utility,
        view.result.stderr_fn_utility,
    );
    let mut out = String::new();
    out.push_str(&format!("plan: {}\n", view.plan.label()));
    out.push_str(&format!("samples: {}\n", view.config.samples()));
    out.push_str(&format!("seed: {}\n", view.config.seed()));
    out.push_str(&format!("antithetic: {}\n", view.config.antithetic()));
    out.push_str(&format!("samples_used: {}\n", view.result.samples_used));
    out.push_str(&format!(
        "mean_payment: {}\n",
        sig12(view.result.mean_payment)
    ));
    out.push_str(&format!(
        "stderr_payment: {}\n",
        sig12(view.result.stderr_payment)
    ));
    out.push_str(&format!(
        "mean_fn_utility: {}\n",
        sig12(view.result.mean_fn_utility)
    ));
    out.push_str(&format!(
        "stderr_fn_utility: {}\n",
        sig12(view.result.stderr_fn_utility)
    ));
    out.push_str(&format!(
        "analytic_fn_utility: {}\n",
        sig12(view.analytic_utility)
    ));
    out.push_str(&format!("empirical_fn_ce: {}\n", sig12(empirical_ce)));
    out.push_str(&format!("analytic_fn_ce: {}\n", sig12(view.analytic_ce)));
    out.push_str(&format!("z_score: {}\n", sig12(z)));
    out
}
