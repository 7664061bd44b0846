use udecide::estimators::{
    beta_params_from_moments, sample_cost_hat, sample_delta_hat_direct, sample_p_hat, CostFamily,
    CostSampler, EstimatorError, ProbFamily, ProbSampler,
};
use udecide::rng::RngStream;

const N: usize = 1_000_000;

fn moments(mut draw: impl FnMut() -> f64) -> (f64, f64) {
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..N {
        let x = draw();
        sum += x;
        sum_sq += x * x;
    }
    let mean = sum / N as f64;
    let var = sum_sq / N as f64 - mean * mean;
    (mean, var.sqrt())
}

#[test]
fn beta_prior_estimate_example() {
    let sampler = ProbSampler::new(0.2, 0.1, ProbFamily::Beta).unwrap();
    let mut rng = RngStream::new(11, 0, 0);
    let (mean, sd) = moments(|| sampler.sample(&mut rng).value);
    assert!((mean - 0.2).abs() <= 3e-4, "mean {mean}");
    assert!((sd - 0.1).abs() <= 1e-3, "sd {sd}");
}

#[test]
fn beta_params_exact_case() {
    let b = beta_params_from_moments(0.2, 0.01).unwrap();
    assert_eq!((b.alpha, b.beta), (3.0, 12.0));
    assert!(!b.clamped);
    assert!((b.mean() - 0.2).abs() < 1e-15);
    assert!((b.implied_variance() - 0.01).abs() < 1e-15);
}

#[test]
fn infeasible_beta_variance_is_clamped() {
    let b = beta_params_from_moments(0.05, 0.35 * 0.35).unwrap();
    assert!(b.clamped);
    assert!((b.implied_variance() - 0.99 * 0.05 * 0.95).abs() < 1e-12);
    assert!(ProbSampler::new(0.05, 0.35, ProbFamily::Beta).unwrap().clamped());
    assert!(matches!(
        beta_params_from_moments(0.0, 0.01),
        Err(EstimatorError::BetaMeanOutOfRange(_))
    ));
}

#[test]
fn direct_gap_example() {
    let mut rng = RngStream::new(5, 1, 0);
    let (mean, sd) = moments(|| sample_delta_hat_direct(-0.10, 0.0034, &mut rng));
    assert!((mean + 0.10).abs() <= 2e-4, "mean {mean}");
    assert!((sd - 0.0034f64.sqrt()).abs() <= 2e-4, "sd {sd}");
}

#[test]
fn uniform_cost_moments_without_truncation() {
    let sampler = CostSampler::new(0.5, 0.1, CostFamily::UniformTruncated).unwrap();
    let mut rng = RngStream::new(3, 9, 0);
    let mut rejected = 0;
    let (mean, sd) = moments(|| {
        let d = sampler.sample(&mut rng).unwrap();
        rejected += d.adjustments;
        d.value
    });
    assert_eq!(rejected, 0);
    assert!((mean - 0.5).abs() <= 4.0 * 0.1 / (N as f64).sqrt());
    assert!((sd - 0.1).abs() <= 5e-4);
}

#[test]
fn normal_cost_moments() {
    let mut rng = RngStream::new(3, 10, 0);
    let (mean, sd) = moments(|| sample_cost_hat(2.0, 0.2, CostFamily::Normal, &mut rng).unwrap().value);
    assert!((mean - 2.0).abs() <= 4.0 * 0.2 / (N as f64).sqrt());
    assert!((sd - 0.2).abs() <= 1e-3);
}

#[test]
fn truncated_costs_stay_positive_and_shift_up() {
    let sampler = CostSampler::new(0.3, 0.35, CostFamily::UniformTruncated).unwrap();
    let mut rng = RngStream::new(8, 0, 0);
    let mut total_rejections = 0u64;
    let mut sum = 0.0;
    for _ in 0..100_000 {
        let d = sampler.sample(&mut rng).unwrap();
        assert!(d.value > 0.0);
        total_rejections += u64::from(d.adjustments);
        sum += d.value;
    }
    assert!(total_rejections > 0);
    assert!(sum / 100_000.0 > 0.3);
}

#[test]
fn hopeless_rejection_reports_error() {
    let mut rng = RngStream::new(1, 1, 0);
    let err = sample_cost_hat(1e-9, 1e-12, CostFamily::Normal, &mut rng);
    assert!(err.is_ok());
    // support entirely below zero is impossible for the uniform, so use a
    // normal centred far below its own spread
    let sampler = CostSampler::Normal { cost: -1.0, sigma: 0.01 };
    assert!(matches!(
        sampler.sample(&mut rng),
        Err(EstimatorError::RejectionExhausted { .. })
    ));
}

#[test]
fn normal_prior_estimates_are_clipped() {
    let mut rng = RngStream::new(2, 2, 0);
    let mut clipped = 0;
    for _ in 0..10_000 {
        let d = sample_p_hat(0.05, 0.2, ProbFamily::Normal, &mut rng).unwrap();
        assert!((0.0..=1.0).contains(&d.value));
        clipped += d.adjustments;
    }
    assert!(clipped > 3000);
}
