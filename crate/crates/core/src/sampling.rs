//! Random primitives: truncated discrete power laws, stochastic rounding,
//! degree sequences and community sizes.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::config::GeneratorParams;
use crate::error::{Error, Result};

/// Candidate community-size vectors drawn before falling back to repair.
pub const COMMUNITY_SIZE_MAX_ITER: usize = 1000;

/// Discrete power law on `lo..=hi` with `Pr(X = k)` proportional to
/// `k^-exponent`, sampled through a cumulative table.
#[derive(Debug, Clone)]
pub struct PowerLaw {
    lo: u64,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl PowerLaw {
    pub fn new(exponent: f64, lo: u64, hi: u64) -> Result<Self> {
        if lo > hi || lo == 0 {
            return Err(Error::EmptyRange { lo, hi });
        }
        let weights: Vec<f64> = (lo..=hi).map(|k| (k as f64).powf(-exponent)).collect();
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Ok(Self {
            lo,
            weights,
            cumulative,
        })
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.lo + self.weights.len() as u64 - 1
    }

    fn total(&self) -> f64 {
        *self.cumulative.last().expect("non-empty support")
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u = rng.gen::<f64>() * self.total();
        let idx = self.cumulative.partition_point(|&c| c <= u);
        self.lo + idx.min(self.weights.len() - 1) as u64
    }

    pub fn pmf(&self, k: u64) -> f64 {
        if k < self.lo || k > self.hi() {
            return 0.0;
        }
        self.weights[(k - self.lo) as usize] / self.total()
    }

    /// `Pr(X >= k)`, summed directly from the tail.
    pub fn ccdf(&self, k: u64) -> f64 {
        if k <= self.lo {
            return 1.0;
        }
        if k > self.hi() {
            return 0.0;
        }
        let tail: f64 = self.weights[(k - self.lo) as usize..].iter().rev().sum();
        tail / self.total()
    }

    pub fn mean(&self) -> f64 {
        (self.lo..=self.hi()).map(|k| k as f64 * self.pmf(k)).sum()
    }
}

/// One draw from the truncated power law on `lo..=hi`.
pub fn sample_truncated_powerlaw<R: Rng + ?Sized>(
    exponent: f64,
    lo: u64,
    hi: u64,
    rng: &mut R,
) -> Result<u64> {
    Ok(PowerLaw::new(exponent, lo, hi)?.sample(rng))
}

/// Rounds `x` down or up with probabilities making the result unbiased.
pub fn stochastic_round<R: Rng + ?Sized>(x: f64, rng: &mut R) -> u64 {
    debug_assert!(x >= 0.0);
    let base = x.floor();
    let frac = x - base;
    let up = frac > 0.0 && rng.gen::<f64>() < frac;
    base as u64 + u64::from(up)
}

/// Node degrees sorted non-increasingly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeSequence(Vec<u32>);

impl DegreeSequence {
    pub fn new(mut degrees: Vec<u32>) -> Self {
        degrees.sort_unstable_by(|a, b| b.cmp(a));
        Self(degrees)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u32> {
        self.0
    }

    pub fn volume(&self) -> u64 {
        self.0.iter().map(|&x| u64::from(x)).sum()
    }
}

/// Community sizes sorted non-increasingly; they add up to `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommunitySizes(Vec<usize>);

impl CommunitySizes {
    pub fn new(mut sizes: Vec<usize>) -> Self {
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        Self(sizes)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

pub fn sample_degrees<R: Rng + ?Sized>(
    params: &GeneratorParams,
    rng: &mut R,
) -> Result<DegreeSequence> {
    let law = PowerLaw::new(
        params.gamma,
        u64::from(params.min_degree),
        u64::from(params.max_degree),
    )?;
    let degrees = (0..params.n).map(|_| law.sample(rng) as u32).collect();
    Ok(DegreeSequence::new(degrees))
}

/// Whether some vector with entries in `[min, max]` sums to exactly `n`.
pub fn community_sizes_feasible(n: usize, min: usize, max: usize) -> bool {
    if min == 0 || min > max || n == 0 {
        return false;
    }
    n.div_ceil(max) <= n / min
}

pub fn sample_community_sizes<R: Rng + ?Sized>(
    params: &GeneratorParams,
    rng: &mut R,
) -> Result<CommunitySizes> {
    let (n, min, max) = (params.n, params.min_community, params.max_community);
    if !community_sizes_feasible(n, min, max) {
        return Err(Error::InfeasibleCommunitySizes { n, min, max });
    }
    let law = PowerLaw::new(params.beta, min as u64, max as u64)?;

    let mut best: Option<(usize, Vec<usize>)> = None;
    for _ in 0..COMMUNITY_SIZE_MAX_ITER {
        let mut sizes = Vec::new();
        let mut sum = 0;
        while sum < n {
            let c = law.sample(rng) as usize;
            sizes.push(c);
            sum += c;
        }
        if sum == n {
            return Ok(CommunitySizes::new(sizes));
        }
        if best.as_ref().is_none_or(|(s, _)| sum < *s) {
            best = Some((sum, sizes));
        }
    }

    let (_, mut sizes) = best.expect("at least one candidate");
    if sizes.len() * min > n {
        sizes.truncate(n / min);
    }
    let mut sum: usize = sizes.iter().sum();
    while sum != n {
        sizes.shuffle(rng);
        for c in sizes.iter_mut() {
            if sum < n && *c < max {
                *c += 1;
                sum += 1;
            } else if sum > n && *c > min {
                *c -= 1;
                sum -= 1;
            }
            if sum == n {
                break;
            }
        }
    }
    Ok(CommunitySizes::new(sizes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn degenerate_range_is_constant() {
        let mut r = rng(1);
        for _ in 0..1000 {
            assert_eq!(sample_truncated_powerlaw(2.5, 5, 5, &mut r).unwrap(), 5);
        }
    }

    #[test]
    fn reversed_range_is_rejected() {
        let mut r = rng(1);
        assert!(matches!(
            sample_truncated_powerlaw(2.5, 6, 5, &mut r),
            Err(Error::EmptyRange { lo: 6, hi: 5 })
        ));
    }

    #[test]
    fn integer_input_rounds_to_itself() {
        let mut r = rng(2);
        for _ in 0..1000 {
            assert_eq!(stochastic_round(3.0, &mut r), 3);
            assert_eq!(stochastic_round(0.0, &mut r), 0);
        }
    }

    #[test]
    fn rounding_stays_between_neighbors() {
        let mut r = rng(3);
        for _ in 0..10_000 {
            let v = stochastic_round(2.3, &mut r);
            assert!(v == 2 || v == 3);
        }
    }

    #[test]
    fn fixed_degrees() {
        let mut p = GeneratorParams::standard(1000);
        p.min_degree = 7;
        p.max_degree = 7;
        let d = sample_degrees(&p, &mut rng(4)).unwrap();
        assert!(d.as_slice().iter().all(|&x| x == 7));
    }

    #[test]
    fn default_degrees_respect_bounds() {
        let p = GeneratorParams::standard(1000);
        let d = sample_degrees(&p, &mut rng(5)).unwrap();
        let s = d.as_slice();
        assert_eq!(s.len(), 1000);
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
        assert!(*s.last().unwrap() >= 5);
        assert!(s[0] <= 31);
    }

    #[test]
    fn forced_single_community() {
        let mut p = GeneratorParams::standard(50);
        p.min_community = 50;
        p.max_community = 50;
        p.max_degree = 7;
        let c = sample_community_sizes(&p, &mut rng(6)).unwrap();
        assert_eq!(c.as_slice(), &[50]);
    }

    #[test]
    fn infeasible_sizes_rejected() {
        let mut p = GeneratorParams::standard(70);
        p.min_community = 50;
        p.max_community = 60;
        assert!(matches!(
            sample_community_sizes(&p, &mut rng(7)),
            Err(Error::InfeasibleCommunitySizes { n: 70, .. })
        ));
        assert!(community_sizes_feasible(100, 50, 60));
        assert!(!community_sizes_feasible(49, 50, 60));
    }

    #[test]
    fn repair_handles_tight_ranges() {
        // [50, 51] with n = 253: only 5 communities work, few samples hit it.
        let mut p = GeneratorParams::standard(253);
        p.min_community = 50;
        p.max_community = 51;
        p.max_degree = 10;
        for seed in 0..50 {
            let c = sample_community_sizes(&p, &mut rng(seed)).unwrap();
            assert_eq!(c.total(), 253);
            assert!(c.as_slice().iter().all(|&x| (50..=51).contains(&x)));
        }
    }

    #[test]
    fn pmf_and_ccdf_agree() {
        let law = PowerLaw::new(2.5, 5, 50).unwrap();
        let s: f64 = (5..=50).map(|k| law.pmf(k)).sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert_eq!(law.ccdf(5), 1.0);
        assert_eq!(law.ccdf(51), 0.0);
        let tail: f64 = (20..=50).map(|k| law.pmf(k)).sum();
        assert!((law.ccdf(20) - tail).abs() < 1e-12);
    }
}
