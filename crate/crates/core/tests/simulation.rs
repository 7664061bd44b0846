use udecide::decision::{expected_increase, DecisionProblem, StandardErrors};
use udecide::estimators::NoiseSpec;
use udecide::experiments::{Scenario, FIGURE1_COSTS, FIGURE1_P0};
use udecide::montecarlo::{simulate, simulate_trial, SimulationConfig};

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

fn golden_config() -> SimulationConfig {
    let p = DecisionProblem::new(0.2, 0.3, 0.5).unwrap();
    let noise = NoiseSpec::beta_uniform(StandardErrors::new(0.1, 0.1, 0.1).unwrap()).unwrap();
    SimulationConfig::new(p, noise, 1_000_000, 42, 0).unwrap()
}

#[test]
fn beta_uniform_regression_value() {
    // recorded from this engine; guards against silent changes to the samplers
    let r = simulate(&golden_config()).unwrap();
    assert_eq!(r.errors, 111_864);
    assert_eq!(r.p_err_hat, 0.111864);
    assert_eq!(r.truncation_count, 0);
    assert!(!r.clamp_flag);
}

#[test]
fn result_is_independent_of_thread_count() {
    let mut cfg = golden_config();
    cfg.trials = 200_003;
    let one = in_pool(1, || simulate(&cfg).unwrap());
    let four = in_pool(4, || simulate(&cfg).unwrap());
    let seven = in_pool(7, || simulate(&cfg).unwrap());
    assert_eq!(one, four);
    assert_eq!(one, seven);
}

#[test]
fn trials_are_addressable_individually() {
    let mut cfg = golden_config();
    cfg.trials = 5000;
    let whole = simulate(&cfg).unwrap();
    let counted = (0..cfg.trials)
        .filter(|&i| simulate_trial(&cfg, i).unwrap())
        .count() as u64;
    assert_eq!(whole.errors, counted);
}

#[test]
fn direct_delta_example() {
    // p0 = 0.5, c01 = 0.5, c10 = 0.7: δ = -0.1; equal cost errors s give σ̂² = s²/2
    let p = DecisionProblem::new(0.5, 0.5, 0.7).unwrap();
    let s = (2.0f64 * 0.0034).sqrt();
    let noise = NoiseSpec::direct_delta(StandardErrors::new(0.0, s, s).unwrap()).unwrap();
    let cfg = SimulationConfig::new(p, noise, 1_000_000, 7, 3).unwrap();
    let r = simulate(&cfg).unwrap();
    let bound = 3.0 * (0.0432f64 * 0.9568 / 1e6).sqrt();
    assert!((r.p_err_hat - 0.0432).abs() <= bound.max(6e-4), "{}", r.p_err_hat);
}

/// Beta/uniform simulation against the closed form at small standard error,
/// on the one-cost-pair grid, for every cell whose closed-form error rate is
/// at least 1e-3.
#[test]
fn small_noise_simulation_tracks_closed_form() {
    let (c01, c10) = FIGURE1_COSTS;
    let mut failures = Vec::new();
    for (i, &p0) in FIGURE1_P0.iter().enumerate() {
        for (j, scenario) in Scenario::ALL.into_iter().enumerate() {
            for sigma in [0.025, 0.05] {
                let p = DecisionProblem::new(p0, c01, c10).unwrap();
                let sigmas = scenario.sigmas(sigma);
                let analytic = expected_increase(&p, &sigmas);
                if analytic.p_err < 1e-3 {
                    continue;
                }
                let noise = NoiseSpec::beta_uniform(sigmas).unwrap();
                let cfg = SimulationConfig::new(p, noise, 100_000, 42, (i * 3 + j) as u64).unwrap();
                let mc = simulate(&cfg).unwrap();
                let (a, m) = (analytic.norm_inc.unwrap(), mc.norm_inc_hat.unwrap());
                if (m - a).abs() > 0.25 * a {
                    failures.push(format!("p0={p0} {} σ={sigma}: closed form {a:.4}, simulated {m:.4}", scenario.as_str()));
                }
            }
        }
    }
    assert!(failures.is_empty(), "outside 25%:\n{}", failures.join("\n"));
}
