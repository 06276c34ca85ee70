//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured margin. Run with
//! `cargo test -p fogpact-cli --test acceptance -- --nocapture`.

use std::fs;
use std::process::Command;
use std::time::Instant;

use tempfile::TempDir;

use fogpact_core::experiments::{
    fixture_instance, rank_plans, run_sweep, EvaluationMode, SweepParameter, SweepSpec,
};
use fogpact_core::market::MarketInstance;
use fogpact_core::matrix::SymMatrix;
use fogpact_core::sim::{estimate_fn_utility, SimConfig};
use fogpact_core::solver::{
    comparative_static_sensitivity, default_fd_step, plan_instance, solve_general,
    solve_numeric_oracle, solve_opening_reward, solve_plan, InstanceParam, PlanKind,
};
use fogpact_core::testing::{random_instance, random_sim_triple};

const BIN: &str = env!("CARGO_BIN_EXE_fogpact");

fn z_score(mean: f64, expected: f64, stderr: f64) -> f64 {
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

/// Criterion 1: the closed forms agree with the independent gradient-ascent
/// oracle on 1000 randomized markets (n in 1..=6) within 1e-6 per rate and
/// 1e-8 in operator utility, in under 60 seconds.
#[test]
fn acceptance_1_closed_form_matches_oracle() {
    let start = Instant::now();
    let mut max_rate_gap = 0.0f64;
    let mut max_utility_gap = 0.0f64;
    for seed in 0..1000u64 {
        let n = 1 + (seed as usize) % 6;
        let inst = random_instance(n, seed);
        let closed = solve_general(&inst).unwrap();
        let oracle = solve_numeric_oracle(&inst, None).unwrap();
        for (a, b) in closed.contract.s.iter().zip(&oracle.contract.s) {
            max_rate_gap = max_rate_gap.max((a - b).abs());
        }
        max_utility_gap = max_utility_gap.max((closed.no_utility - oracle.no_utility).abs());
    }
    let elapsed = start.elapsed();
    assert!(max_rate_gap <= 1e-6, "rate gap {max_rate_gap}");
    assert!(max_utility_gap <= 1e-8, "utility gap {max_utility_gap}");
    assert!(elapsed.as_secs_f64() <= 60.0, "took {elapsed:?}");
    println!(
        "acceptance 1 (closed form vs oracle, 1000 instances): PASS \
         (max rate gap {max_rate_gap:.2e}, max utility gap {max_utility_gap:.2e}, {elapsed:?})"
    );
}

/// Criterion 2: the n = 1 solver reproduces s* = β/(1 + ηcσ²) exactly, and
/// the worked scalar case comes out at s* = 1/3, a* = 1/6, t* = 1/36,
/// utility 1/12 within 1e-12.
#[test]
fn acceptance_2_scalar_reduction() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(271828);
    for _ in 0..500 {
        let c: f64 = rng.random_range(0.05..10.0);
        let sigma: f64 = rng.random_range(0.0..10.0);
        let eta: f64 = rng.random_range(0.01..5.0);
        let beta: f64 = rng.random_range(-3.0..3.0);
        let inst = MarketInstance::new(
            SymMatrix::from_diagonal(&[c]),
            SymMatrix::from_diagonal(&[sigma]),
            vec![beta],
            eta,
            0.0,
        )
        .unwrap();
        let report = solve_general(&inst).unwrap();
        assert_eq!(report.contract.s[0], beta / (1.0 + eta * (c * sigma)));
    }

    let worked = MarketInstance::new(
        SymMatrix::from_diagonal(&[2.0]),
        SymMatrix::from_diagonal(&[1.0]),
        vec![1.0],
        1.0,
        0.0,
    )
    .unwrap();
    let report = solve_general(&worked).unwrap();
    assert!((report.contract.s[0] - 1.0 / 3.0).abs() <= 1e-12);
    assert!((report.effort.0[0] - 1.0 / 6.0).abs() <= 1e-12);
    assert!((report.contract.t - 1.0 / 36.0).abs() <= 1e-12);
    assert!((report.no_utility - 1.0 / 12.0).abs() <= 1e-12);
    let oracle = solve_numeric_oracle(&worked, None).unwrap();
    assert!((oracle.contract.s[0] - 1.0 / 3.0).abs() <= 1e-6);
    println!("acceptance 2 (scalar reduction and worked case): PASS");
}

/// Criterion 3: participation binds for every plan (node certainty
/// equivalent equals w̄ within 1e-9) and the simulated expected utility of
/// each solved plan sits within 3 standard errors of −e^(−η·w̄) at 1e6
/// seeded samples.
#[test]
fn acceptance_3_reservation_utility() {
    // binding participation on the fixture and on random markets
    let fixture = fixture_instance();
    for seed in 0..100u64 {
        let inst = random_instance(1 + (seed as usize) % 6, 40_000 + seed);
        for plan in PlanKind::all() {
            let report = solve_plan(&inst, plan).unwrap();
            assert!(
                (report.fn_ce - inst.w_bar()).abs() <= 1e-9,
                "{plan} on seed {seed}"
            );
        }
    }

    // simulated mean utility at the reservation level −1 (w̄ = 0)
    let config = SimConfig::new(1_000_000, 42, false).unwrap();
    let mut max_z = 0.0f64;
    for plan in PlanKind::all() {
        let report = solve_plan(&fixture, plan).unwrap();
        let market = plan_instance(&fixture, plan);
        let result = estimate_fn_utility(&market, &report.contract, &report.effort, config)
            .unwrap();
        let z = z_score(result.mean_fn_utility, -1.0, result.stderr_fn_utility);
        assert!(z.abs() <= 3.0, "{plan}: z = {z}");
        max_z = max_z.max(z.abs());
    }

    // and at a shifted reservation w̄ = 0.3
    let shifted = MarketInstance::new(
        fixture.cost_matrix().clone(),
        fixture.noise_cov().clone(),
        fixture.beta().to_vec(),
        fixture.eta(),
        0.3,
    )
    .unwrap();
    let report = solve_general(&shifted).unwrap();
    let result = estimate_fn_utility(&shifted, &report.contract, &report.effort, config).unwrap();
    let expected = -(-shifted.eta() * 0.3f64).exp();
    let z = z_score(result.mean_fn_utility, expected, result.stderr_fn_utility);
    assert!(z.abs() <= 3.0, "shifted reservation: z = {z}");
    println!("acceptance 3 (reservation utility, 1e6 samples/plan): PASS (max |z| {max_z:.2})");
}

/// Criterion 4: on the fixture market, sweeps over c_ii, η, and σ_ii each
/// strictly decrease the coupled plan's utility at every step, while the
/// fixed-salary benchmark is exactly constant under the η and σ sweeps.
#[test]
fn acceptance_4_fixture_trends() {
    let fixture = fixture_instance();
    let sweeps = [
        (SweepParameter::CostDiagonal(0), vec![0.8, 1.0, 1.2, 1.5]),
        (SweepParameter::Eta, vec![0.5, 1.0, 2.0, 4.0]),
        (SweepParameter::NoiseDiagonal(0), vec![0.9, 1.0, 1.2, 1.5]),
    ];
    for (parameter, values) in sweeps {
        let spec = SweepSpec::new(fixture.clone(), parameter, values.clone());
        let result = run_sweep(&spec).unwrap();
        let general: Vec<f64> = result
            .rows
            .iter()
            .filter(|r| r.plan == PlanKind::General)
            .map(|r| r.no_utility)
            .collect();
        assert_eq!(general.len(), values.len());
        assert!(
            general.windows(2).all(|w| w[1] < w[0]),
            "{parameter:?}: {general:?}"
        );
        if !matches!(parameter, SweepParameter::CostDiagonal(_)) {
            let opening: Vec<f64> = result
                .rows
                .iter()
                .filter(|r| r.plan == PlanKind::OpeningReward)
                .map(|r| r.no_utility)
                .collect();
            assert!(
                opening.iter().all(|u| *u == opening[0]),
                "{parameter:?}: {opening:?}"
            );
        }
    }
    println!("acceptance 4 (fixture sweep trends): PASS");
}

/// Criterion 5: own-instance ranking on the fixture is the strict order
/// opening-reward > independent > stochastic-independent >
/// technologically-independent > general > single-bonus.
#[test]
fn acceptance_5_fixture_ranking() {
    let ranked = rank_plans(&fixture_instance(), EvaluationMode::OwnInstance).unwrap();
    let labels: Vec<&str> = ranked.iter().map(|(p, _)| p.label()).collect();
    assert_eq!(
        labels,
        vec![
            "opening-reward",
            "independent",
            "stochastic-independent",
            "technologically-independent",
            "general",
            "single-bonus"
        ]
    );
    let mut min_gap = f64::INFINITY;
    for pair in ranked.windows(2) {
        let gap = pair[0].1 - pair[1].1;
        assert!(gap > 1e-9, "gap {gap} between {} and {}", pair[0].0, pair[1].0);
        min_gap = min_gap.min(gap);
    }
    println!("acceptance 5 (six-plan ranking): PASS (min gap {min_gap:.3e})");
}

/// Criterion 6: at the fixture point (cost coupling positive), worsening the
/// measurement of resource 0 lowers its own rate and raises the other.
#[test]
fn acceptance_6_measurement_complementarity() {
    let fixture = fixture_instance();
    let h = default_fd_step(fixture.noise_cov().get(0, 0));
    let d = comparative_static_sensitivity(&fixture, InstanceParam::NoiseEntry(0, 0), h).unwrap();
    assert!(d[0] < 0.0, "own-rate sensitivity {d:?}");
    assert!(d[1] > 0.0, "cross-rate sensitivity {d:?}");
    println!(
        "acceptance 6 (measurement complementarity): PASS (ds0 {:.3e}, ds1 {:.3e})",
        d[0], d[1]
    );
}

/// Criterion 7: with zero noise or vanishing risk aversion, the coupled
/// plan's utility collapses to the first-best benchmark within 1e-8.
#[test]
fn acceptance_7_limit_collapse() {
    let mut max_gap = 0.0f64;
    for seed in 0..100u64 {
        let n = 1 + (seed as usize) % 6;
        let inst = random_instance(n, 70_000 + seed);
        let first_best = solve_opening_reward(&inst).unwrap();

        let noise_free = MarketInstance::new(
            inst.cost_matrix().clone(),
            SymMatrix::zeros(n),
            inst.beta().to_vec(),
            inst.eta(),
            inst.w_bar(),
        )
        .unwrap();
        let gap = (solve_general(&noise_free).unwrap().no_utility - first_best.no_utility).abs();
        assert!(gap <= 1e-8, "noise-free gap {gap} at seed {seed}");
        max_gap = max_gap.max(gap);

        let risk_neutral = inst.with_eta(1e-12).unwrap();
        let gap = (solve_general(&risk_neutral).unwrap().no_utility - first_best.no_utility).abs();
        assert!(gap <= 1e-8, "risk-neutral gap {gap} at seed {seed}");
        max_gap = max_gap.max(gap);
    }
    println!("acceptance 7 (limit collapse to first best): PASS (max gap {max_gap:.2e})");
}

/// Criterion 8: across 50 random configurations, the sampled mean CARA
/// utility at 1e6 draws matches −exp(−η·CE) within 3 standard errors.
#[test]
fn acceptance_8_certainty_equivalent_identity() {
    let config = SimConfig::new(1_000_000, 1_234_567, false).unwrap();
    let mut max_z = 0.0f64;
    for seed in 0..50u64 {
        let (inst, contract, a) = random_sim_triple(seed);
        let result = estimate_fn_utility(&inst, &contract, &a, config).unwrap();
        let expected = -(-inst.eta() * inst.fn_certainty_equivalent(&contract, &a).unwrap()).exp();
        let z = z_score(result.mean_fn_utility, expected, result.stderr_fn_utility);
        assert!(z.abs() <= 3.0, "seed {seed}: z = {z}");
        max_z = max_z.max(z.abs());
    }
    println!("acceptance 8 (certainty-equivalent identity, 50 x 1e6 samples): PASS (max |z| {max_z:.2})");
}

/// Criterion 9: repeated sweep and simulate invocations with identical
/// configs produce byte-identical files.
#[test]
fn acceptance_9_byte_identical_outputs() {
    let dir = TempDir::new().unwrap();
    let cfg_path = dir.path().join("fixture.toml");
    fs::write(
        &cfg_path,
        r#"
[instance]
c = [[1.0, 0.2], [0.2, 1.0]]
sigma = [[1.0, 0.8], [0.8, 1.0]]
beta = [1.0, 1.0]
eta = 1.0
w_bar = 0.0

[sweep]
parameter = "eta"
values = [0.5, 1.0, 2.0]

[sim]
samples = 200000
seed = 42
"#,
    )
    .unwrap();

    let run_to = |sub: &str, name: &str| -> Vec<u8> {
        let out_path = dir.path().join(name);
        let status = Command::new(BIN)
            .args([
                sub,
                cfg_path.to_str().unwrap(),
                "--output",
                out_path.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success(), "{sub} failed");
        fs::read(&out_path).unwrap()
    };

    let sweep_a = run_to("sweep", "sweep_a.csv");
    let sweep_b = run_to("sweep", "sweep_b.csv");
    assert_eq!(sweep_a, sweep_b, "sweep outputs differ");

    let sim_a = run_to("simulate", "sim_a.txt");
    let sim_b = run_to("simulate", "sim_b.txt");
    assert_eq!(sim_a, sim_b, "simulate outputs differ");
    println!("acceptance 9 (byte-identical outputs): PASS");
}
