//! Optimal linear payment plans.
//!
//! The operator picks the contract (t, s) maximizing its certainty
//! equivalent subject to the node's rational effort choice a = C⁻¹s and a
//! binding participation constraint. Substituting both into the objective
//! leaves the concave reduced program
//!
//! ```text
//!     maximize  g(s) = βᵀC⁻¹s − ½ sᵀC⁻¹s − ½η sᵀΣs
//! ```
//!
//! whose stationary point gives the closed forms
//!
//! ```text
//!     s* = (I + ηCΣ)⁻¹ β
//!     a* = C⁻¹ s*
//!     t* = w̄ + ½ s*ᵀ(ηΣ − C⁻¹) s*
//! ```
//!
//! Variant plans restrict the same program: the independent plans zero the
//! couplings of `C` and/or `Σ` before solving, the single-bonus plan pins
//! `s` to one axis, and the opening-reward plan is the first-best benchmark
//! where effort is dictated directly and only the fixed salary is paid.
//! [`solve_numeric_oracle`] maximizes `g` by gradient ascent instead of the
//! closed form and exists so the two routes can check each other.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::market::{Contract, EffortVector, MarketInstance};
use crate::matrix::{dot, Matrix};

/// Which coordinate a single-bonus plan rewards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BonusDim {
    /// Pick the coordinate with the highest operator utility (ties go to the
    /// lowest index).
    Auto,
    Index(usize),
}

/// The six payment mechanisms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlanKind {
    /// Full couplings in both `C` and `Σ`.
    General,
    /// Both `C` and `Σ` reduced to their diagonals.
    Independent,
    /// `Σ` reduced to its diagonal, `C` kept full.
    StochasticIndependent,
    /// `C` reduced to its diagonal, `Σ` kept full.
    TechnologicallyIndependent,
    /// Payment linked to a single QoS coordinate.
    SingleBonus(BonusDim),
    /// Fixed salary only; the first-best benchmark with dictated effort.
    OpeningReward,
}

impl PlanKind {
    /// All six plans in canonical order (single bonus in auto mode).
    pub fn all() -> [PlanKind; 6] {
        [
            PlanKind::General,
            PlanKind::Independent,
            PlanKind::StochasticIndependent,
            PlanKind::TechnologicallyIndependent,
            PlanKind::SingleBonus(BonusDim::Auto),
            PlanKind::OpeningReward,
        ]
    }

    pub fn label(&self) -> &'static str {
        match self {
            PlanKind::General => "general",
            PlanKind::Independent => "independent",
            PlanKind::StochasticIndependent => "stochastic-independent",
            PlanKind::TechnologicallyIndependent => "technologically-independent",
            PlanKind::SingleBonus(_) => "single-bonus",
            PlanKind::OpeningReward => "opening-reward",
        }
    }

    /// Position in the canonical ordering; used to break utility ties.
    pub fn rank_order(&self) -> usize {
        match self {
            PlanKind::General => 0,
            PlanKind::Independent => 1,
            PlanKind::StochasticIndependent => 2,
            PlanKind::TechnologicallyIndependent => 3,
            PlanKind::SingleBonus(_) => 4,
            PlanKind::OpeningReward => 5,
        }
    }
}

impl fmt::Display for PlanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PlanKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "general" => Ok(PlanKind::General),
            "independent" => Ok(PlanKind::Independent),
            "stochastic-independent" => Ok(PlanKind::StochasticIndependent),
            "technologically-independent" => Ok(PlanKind::TechnologicallyIndependent),
            "single-bonus" => Ok(PlanKind::SingleBonus(BonusDim::Auto)),
            "opening-reward" => Ok(PlanKind::OpeningReward),
            other => Err(format!(
                "unknown plan '{other}' (expected general, independent, \
                 stochastic-independent, technologically-independent, \
                 single-bonus, or opening-reward)"
            )),
        }
    }
}

/// A solved payment plan together with the utilities it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub plan: PlanKind,
    pub contract: Contract,
    pub effort: EffortVector,
    pub no_utility: f64,
    pub fn_ce: f64,
    pub welfare: f64,
    pub instance_digest: u64,
}

/// The instance a plan is actually solved against: the independent variants
/// drop the relevant couplings, everything else keeps the input unchanged.
pub fn plan_instance(inst: &MarketInstance, plan: PlanKind) -> MarketInstance {
    match plan {
        PlanKind::Independent => inst.with_diagonal_cost().with_diagonal_noise(),
        PlanKind::StochasticIndependent => inst.with_diagonal_noise(),
        PlanKind::TechnologicallyIndependent => inst.with_diagonal_cost(),
        PlanKind::General | PlanKind::SingleBonus(_) | PlanKind::OpeningReward => inst.clone(),
    }
}

/// Solve any plan kind against `inst`.
pub fn solve_plan(inst: &MarketInstance, plan: PlanKind) -> Result<SolveReport> {
    match plan {
        PlanKind::General => solve_general(inst),
        PlanKind::Independent => solve_independent(inst),
        PlanKind::StochasticIndependent => solve_stochastic_independent(inst),
        PlanKind::TechnologicallyIndependent => solve_technologically_independent(inst),
        PlanKind::SingleBonus(dim) => solve_single_bonus(inst, dim),
        PlanKind::OpeningReward => solve_opening_reward(inst),
    }
}

/// Optimal fully coupled plan via the closed forms.
pub fn solve_general(inst: &MarketInstance) -> Result<SolveReport> {
    closed_form_on(inst, PlanKind::General)
}

/// Plan for the market with both cost couplings and noise correlations
/// removed; utilities are reported against that reduced market.
pub fn solve_independent(inst: &MarketInstance) -> Result<SolveReport> {
    closed_form_on(&plan_instance(inst, PlanKind::Independent), PlanKind::Independent)
}

/// Plan with noise correlations removed, cost couplings kept.
pub fn solve_stochastic_independent(inst: &MarketInstance) -> Result<SolveReport> {
    closed_form_on(
        &plan_instance(inst, PlanKind::StochasticIndependent),
        PlanKind::StochasticIndependent,
    )
}

/// Plan with cost couplings removed, noise correlations kept.
pub fn solve_technologically_independent(inst: &MarketInstance) -> Result<SolveReport> {
    closed_form_on(
        &plan_instance(inst, PlanKind::TechnologicallyIndependent),
        PlanKind::TechnologicallyIndependent,
    )
}

fn closed_form_on(inst: &MarketInstance, plan: PlanKind) -> Result<SolveReport> {
    let n = inst.n();
    let c = inst.cost_matrix();
    let sigma = inst.noise_cov();
    let eta = inst.eta();

    let s = if n == 1 {
        // scalar case reduces to s* = β / (1 + η c σ²)
        let m = 1.0 + eta * (c.get(0, 0) * sigma.get(0, 0));
        vec![inst.beta()[0] / m]
    } else {
        let coupling = c.to_general().mul(&sigma.to_general()).scaled(eta);
        let m = Matrix::identity(n).add(&coupling);
        m.solve(inst.beta())?
    };

    let c_inv = c.invert()?;
    let effort = EffortVector(c_inv.mul_vec(&s));
    let t = inst.w_bar() + 0.5 * (eta * sigma.quadratic_form(&s) - c_inv.quadratic_form(&s));
    finish_report(inst, plan, Contract::new(t, s), effort)
}

/// Plan restricted to a single QoS-linked payment on coordinate `dim`.
///
/// With s = sᵢ·eᵢ the reduced objective is scalar and its stationary point is
/// sᵢ* = (C⁻¹β)ᵢ / ((C⁻¹)ᵢᵢ + η Σᵢᵢ). The node still best-responds across all
/// coordinates, so the induced effort need not be axis-aligned.
pub fn solve_single_bonus(inst: &MarketInstance, dim: BonusDim) -> Result<SolveReport> {
    let n = inst.n();
    let c_inv = inst.cost_matrix().invert()?;
    let gain = c_inv.mul_vec(inst.beta()); // C⁻¹β

    let build = |i: usize| -> Result<SolveReport> {
        let rate = gain[i] / (c_inv.get(i, i) + inst.eta() * inst.noise_cov().get(i, i));
        let mut s = vec![0.0; n];
        s[i] = rate;
        let effort = EffortVector(c_inv.mul_vec(&s));
        let t = inst.w_bar()
            + 0.5
                * (inst.eta() * inst.noise_cov().quadratic_form(&s) - c_inv.quadratic_form(&s));
        finish_report(
            inst,
            PlanKind::SingleBonus(BonusDim::Index(i)),
            Contract::new(t, s),
            effort,
        )
    };

    match dim {
        BonusDim::Index(i) => {
            if i >= n {
                return Err(Error::BadDimension { dim: i, n });
            }
            build(i)
        }
        BonusDim::Auto => {
            let mut best: Option<SolveReport> = None;
            for i in 0..n {
                let report = build(i)?;
                let replace = match &best {
                    Some(b) => report.no_utility > b.no_utility,
                    None => true,
                };
                if replace {
                    best = Some(report);
                }
            }
            Ok(best.expect("instance dimension is at least one"))
        }
    }
}

/// First-best benchmark: the operator dictates the surplus-maximizing effort
/// a = C⁻¹β, pays no QoS bonus, and covers cost plus reservation through the
/// fixed salary. Independent of η and Σ by construction.
pub fn solve_opening_reward(inst: &MarketInstance) -> Result<SolveReport> {
    let c_inv = inst.cost_matrix().invert()?;
    let effort = EffortVector(c_inv.mul_vec(inst.beta()));
    let s = vec![0.0; inst.n()];
    let t = inst.w_bar() + inst.operation_cost(&effort)?;
    finish_report(inst, PlanKind::OpeningReward, Contract::new(t, s), effort)
}

const ORACLE_MAX_ITERS: usize = 100_000;
const ORACLE_GRAD_TOL: f64 = 1e-10;
const ARMIJO_SLOPE: f64 = 1e-4;

/// Maximizes the reduced objective g(s) = βᵀC⁻¹s − ½sᵀC⁻¹s − ½η sᵀΣs by
/// gradient ascent with backtracking line search from s = 0, then rebuilds
/// t from the binding participation constraint. With `restriction` set, only
/// that coordinate of `s` may move.
///
/// This route is deliberately independent of the closed forms so the two can
/// be compared; it converges when ‖∇g‖∞ ≤ 1e-10 over the free coordinates.
pub fn solve_numeric_oracle(
    inst: &MarketInstance,
    restriction: Option<usize>,
) -> Result<SolveReport> {
    let n = inst.n();
    if let Some(i) = restriction {
        if i >= n {
            return Err(Error::BadDimension { dim: i, n });
        }
    }
    let c_inv = inst.cost_matrix().invert()?;
    let linear = c_inv.mul_vec(inst.beta()); // ∇ of the linear term
    let eta = inst.eta();

    // quadratic operator M s = (C⁻¹ + ηΣ) s
    let apply_m = |s: &[f64]| -> Vec<f64> {
        let mut out = c_inv.mul_vec(s);
        let noise = inst.noise_cov().mul_vec(s);
        for (o, v) in out.iter_mut().zip(&noise) {
            *o += eta * v;
        }
        out
    };
    let objective = |s: &[f64]| dot(&linear, s) - 0.5 * dot(&apply_m(s), s);

    let mut s = vec![0.0; n];
    let mut converged = false;
    for _ in 0..ORACLE_MAX_ITERS {
        let mut grad: Vec<f64> = apply_m(&s)
            .iter()
            .zip(&linear)
            .map(|(ms, l)| l - ms)
            .collect();
        if let Some(i) = restriction {
            for (j, g) in grad.iter_mut().enumerate() {
                if j != i {
                    *g = 0.0;
                }
            }
        }
        let grad_norm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if grad_norm <= ORACLE_GRAD_TOL {
            converged = true;
            break;
        }

        let slope = dot(&grad, &grad);
        let curvature = dot(&apply_m(&grad), &grad);
        // exact maximizer along the ray is the natural first trial step
        let mut step = if curvature > 0.0 { slope / curvature } else { 1.0 };
        let current = objective(&s);
        let mut advanced = false;
        loop {
            let trial: Vec<f64> = s.iter().zip(&grad).map(|(si, g)| si + step * g).collect();
            let trial_value = objective(&trial);
            // sufficient decrease up to the resolution of the objective
            // itself; near the optimum the true improvement drops below one
            // ulp and a raw comparison would stall the iteration
            let noise = f64::EPSILON * (current.abs() + trial_value.abs() + 1.0);
            if trial_value >= current + ARMIJO_SLOPE * step * slope - noise {
                s = trial;
                advanced = true;
                break;
            }
            step *= 0.5;
            if step < 1e-18 {
                break;
            }
        }
        if !advanced {
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(ORACLE_MAX_ITERS));
    }

    let effort = EffortVector(c_inv.mul_vec(&s));
    let t = inst.w_bar()
        + 0.5 * (eta * inst.noise_cov().quadratic_form(&s) - c_inv.quadratic_form(&s));
    let plan = match restriction {
        Some(i) => PlanKind::SingleBonus(BonusDim::Index(i)),
        None => PlanKind::General,
    };
    finish_report(inst, plan, Contract::new(t, s), effort)
}

/// Which scalar of the instance a sensitivity is taken against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceParam {
    CostEntry(usize, usize),
    NoiseEntry(usize, usize),
    Eta,
    Beta(usize),
}

impl fmt::Display for InstanceParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceParam::CostEntry(i, j) => write!(f, "c[{i},{j}]"),
            InstanceParam::NoiseEntry(i, j) => write!(f, "sigma[{i},{j}]"),
            InstanceParam::Eta => write!(f, "eta"),
            InstanceParam::Beta(i) => write!(f, "beta[{i}]"),
        }
    }
}

/// Step size for central differences: 1e-5 scaled by the parameter value.
pub fn default_fd_step(value: f64) -> f64 {
    1e-5 * value.abs().max(1.0)
}

fn param_value(inst: &MarketInstance, param: InstanceParam) -> Result<f64> {
    let n = inst.n();
    let check = |i: usize, j: usize| -> Result<()> {
        if i >= n || j >= n {
            return Err(Error::BadDimension { dim: i.max(j), n });
        }
        Ok(())
    };
    match param {
        InstanceParam::CostEntry(i, j) => {
            check(i, j)?;
            Ok(inst.cost_matrix().get(i, j))
        }
        InstanceParam::NoiseEntry(i, j) => {
            check(i, j)?;
            Ok(inst.noise_cov().get(i, j))
        }
        InstanceParam::Eta => Ok(inst.eta()),
        InstanceParam::Beta(i) => {
            check(i, i)?;
            Ok(inst.beta()[i])
        }
    }
}

/// Rebuilds the instance with `param` set to `value`; construction failures
/// surface as [`Error::InvalidPerturbation`] naming the offending value.
pub fn perturbed_instance(
    inst: &MarketInstance,
    param: InstanceParam,
    value: f64,
) -> Result<MarketInstance> {
    let built = match param {
        InstanceParam::CostEntry(i, j) => inst.with_cost_entry(i, j, value),
        InstanceParam::NoiseEntry(i, j) => inst.with_noise_entry(i, j, value),
        InstanceParam::Eta => inst.with_eta(value),
        InstanceParam::Beta(i) => inst.with_beta_entry(i, value),
    };
    built.map_err(|e| match e {
        Error::InvalidInstance(msg) => {
            Error::InvalidPerturbation(format!("{param} = {value} rejected: {msg}"))
        }
        other => other,
    })
}

/// Central finite difference ∂s*/∂param of the optimal coupled plan.
pub fn comparative_static_sensitivity(
    inst: &MarketInstance,
    param: InstanceParam,
    h: f64,
) -> Result<Vec<f64>> {
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::InvalidPerturbation(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let center = param_value(inst, param)?;
    let plus = solve_general(&perturbed_instance(inst, param, center + h)?)?;
    let minus = solve_general(&perturbed_instance(inst, param, center - h)?)?;
    Ok(plus
        .contract
        .s
        .iter()
        .zip(&minus.contract.s)
        .map(|(p, m)| (p - m) / (2.0 * h))
        .collect())
}

/// Re-scores a contract against `inst` with the node best-responding to it;
/// used when a plan designed on a reduced market is paid out in the full one.
pub fn evaluate_with_best_response(
    inst: &MarketInstance,
    plan: PlanKind,
    contract: Contract,
) -> Result<SolveReport> {
    let effort = inst.fn_best_response(&contract)?;
    finish_report(inst, plan, contract, effort)
}

fn finish_report(
    inst: &MarketInstance,
    plan: PlanKind,
    contract: Contract,
    effort: EffortVector,
) -> Result<SolveReport> {
    let no_utility = inst.no_certainty_equivalent(&contract, &effort)?;
    let fn_ce = inst.fn_certainty_equivalent(&contract, &effort)?;
    let welfare = inst.social_welfare(&contract, &effort)?;
    Ok(SolveReport {
        plan,
        contract,
        effort,
        no_utility,
        fn_ce,
        welfare,
        instance_digest: inst.digest(),
    })
}
