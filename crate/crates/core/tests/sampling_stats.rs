//! Statistical checks of the samplers against closed-form values.

use habcd::assignment::split_degrees;
use habcd::generation::seeded_rng;
use habcd::sampling::{sample_truncated_powerlaw, stochastic_round, PowerLaw};
use statrs::distribution::{ChiSquared, ContinuousCDF};

const DRAWS: usize = 1_000_000;

/// `k^-gamma / sum_{j=lo}^{hi} j^-gamma`, summed independently of the crate.
fn oracle_pmf(gamma: f64, lo: u64, hi: u64, k: u64) -> f64 {
    let norm: f64 = (lo..=hi).map(|j| (j as f64).powf(-gamma)).sum();
    (k as f64).powf(-gamma) / norm
}

#[test]
fn smallest_value_frequency() {
    let p5 = oracle_pmf(2.5, 5, 10, 5);
    assert!((p5 - 0.3596).abs() < 5e-4, "oracle {p5}");
    let mut rng = seeded_rng(1);
    let hits = (0..DRAWS)
        .filter(|_| sample_truncated_powerlaw(2.5, 5, 10, &mut rng).unwrap() == 5)
        .count();
    let freq = hits as f64 / DRAWS as f64;
    let se = (p5 * (1.0 - p5) / DRAWS as f64).sqrt();
    assert!((freq - p5).abs() < 3.0 * se, "freq {freq} vs {p5}");
}

#[test]
fn sample_mean_matches_weighted_sum() {
    let norm: f64 = (50..=100u64).map(|k| (k as f64).powf(-1.5)).sum();
    let mean: f64 = (50..=100u64)
        .map(|k| k as f64 * (k as f64).powf(-1.5))
        .sum::<f64>()
        / norm;
    let var: f64 = (50..=100u64)
        .map(|k| (k as f64 - mean).powi(2) * (k as f64).powf(-1.5))
        .sum::<f64>()
        / norm;
    let law = PowerLaw::new(1.5, 50, 100).unwrap();
    assert!((law.mean() - mean).abs() < 1e-9);

    let mut rng = seeded_rng(2);
    let total: u64 = (0..DRAWS).map(|_| law.sample(&mut rng)).sum();
    let sample_mean = total as f64 / DRAWS as f64;
    let se = (var / DRAWS as f64).sqrt();
    assert!(
        (sample_mean - mean).abs() < 3.0 * se,
        "{sample_mean} vs {mean}"
    );
}

#[test]
fn chi_square_goodness_of_fit() {
    let (lo, hi) = (5u64, 50u64);
    let law = PowerLaw::new(2.5, lo, hi).unwrap();
    let mut counts = vec![0u64; (hi - lo + 1) as usize];
    let mut rng = seeded_rng(3);
    for _ in 0..DRAWS {
        counts[(law.sample(&mut rng) - lo) as usize] += 1;
    }
    let stat: f64 = (lo..=hi)
        .map(|k| {
            let expected = oracle_pmf(2.5, lo, hi, k) * DRAWS as f64;
            let observed = counts[(k - lo) as usize] as f64;
            (observed - expected).powi(2) / expected
        })
        .sum();
    let dof = (hi - lo) as f64;
    let critical = ChiSquared::new(dof).unwrap().inverse_cdf(1.0 - 1e-3);
    assert!(stat < critical, "chi-square {stat} >= {critical}");
}

#[test]
fn pmf_and_ccdf_agree_with_oracle() {
    let law = PowerLaw::new(2.5, 5, 50).unwrap();
    for k in 5..=50 {
        assert!((law.pmf(k) - oracle_pmf(2.5, 5, 50, k)).abs() < 1e-12);
        let tail: f64 = (k..=50).map(|j| oracle_pmf(2.5, 5, 50, j)).sum();
        assert!((law.ccdf(k) - tail).abs() < 1e-12);
    }
    assert_eq!(law.ccdf(5), 1.0);
    assert_eq!(law.pmf(4), 0.0);
    assert_eq!(law.pmf(51), 0.0);
}

#[test]
fn degenerate_range_is_constant() {
    let mut rng = seeded_rng(4);
    for _ in 0..100 {
        assert_eq!(sample_truncated_powerlaw(2.5, 7, 7, &mut rng).unwrap(), 7);
    }
    assert!(sample_truncated_powerlaw(2.5, 8, 7, &mut rng).is_err());
}

fn round_mean(x: f64, seed: u64) -> f64 {
    let mut rng = seeded_rng(seed);
    (0..DRAWS)
        .map(|_| stochastic_round(x, &mut rng))
        .sum::<u64>() as f64
        / DRAWS as f64
}

#[test]
fn stochastic_rounding_is_unbiased() {
    for (x, seed) in [(2.3f64, 5), (0.999, 6)] {
        let frac = x - x.floor();
        let se = (frac * (1.0 - frac) / DRAWS as f64).sqrt();
        let mean = round_mean(x, seed);
        assert!((mean - x).abs() < 3.0 * se, "x {x}: mean {mean}");
    }
    let mut rng = seeded_rng(7);
    for _ in 0..1000 {
        let r = stochastic_round(2.3, &mut rng);
        assert!(r == 2 || r == 3);
        assert_eq!(stochastic_round(4.0, &mut rng), 4);
    }
}

#[test]
fn background_share_of_degree_seven() {
    // xi = 0.2, x = 7: z is 1 or 2 with mean 1.4.
    let degrees = vec![7u32; DRAWS];
    let profiles = split_degrees(&degrees, 0.2, &mut seeded_rng(8));
    assert!(profiles
        .iter()
        .all(|p| (p.z == 1 || p.z == 2) && p.y + p.z == 7));
    let mean = profiles.iter().map(|p| f64::from(p.z)).sum::<f64>() / DRAWS as f64;
    let se = (0.4f64 * 0.6 / DRAWS as f64).sqrt();
    assert!((mean - 1.4).abs() < 3.0 * se, "mean z {mean}");
}
