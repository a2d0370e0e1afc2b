//! Seeded multinomial sampling of digit tallies.
//!
//! Replicate `r` of a run seeded with `s` draws from its own ChaCha8 stream:
//! the generator is keyed by `ChaCha8Rng::seed_from_u64(s)` and switched to
//! stream `r`. Replicates therefore do not depend on execution order, and
//! parallel runs reproduce sequential ones bit for bit. Counts are drawn by
//! sequential binomial conditioning over categories in the fixed order 1..9.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::digits::benford_array;
use crate::statistics::{all_divergences, StatisticKind};
use crate::sum::mean_and_std;

/// Identifies the generator and sampling scheme; part of every calibration cache key.
pub const GENERATOR_VERSION: &str = "chacha8-stream-per-replicate/sequential-binomial/v1";

/// Generator for one replicate.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with identifying parts into an independent seed.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Draws a multinomial tally of `n` items over `probs` into `out`.
pub fn multinomial_into<R: rand::Rng + ?Sized>(
    rng: &mut R,
    n: u64,
    probs: &[f64],
    out: &mut [u64],
) {
    debug_assert_eq!(probs.len(), out.len());
    let last = probs.len() - 1;
    let mut remaining = n;
    let mut mass = 1.0f64;
    for (i, (&p, slot)) in probs.iter().zip(out.iter_mut()).enumerate() {
        if i == last {
            *slot = remaining;
            break;
        }
        if remaining == 0 || p <= 0.0 {
            *slot = 0;
        } else {
            let q = if mass > 0.0 {
                (p / mass).clamp(0.0, 1.0)
            } else {
                1.0
            };
            let c = Binomial::new(remaining, q)
                .expect("conditional probability lies in [0, 1]")
                .sample(rng);
            *slot = c;
            remaining -= c;
        }
        mass -= p;
    }
}

/// All seven statistics for each of `replications` simulated samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateStatistics {
    rows: Vec<[f64; 7]>,
}

impl ReplicateStatistics {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, kind: StatisticKind) -> Vec<f64> {
        self.rows.iter().map(|r| r[kind.index()]).collect()
    }

    /// Mean and standard error of the mean.
    pub fn mean_and_se(&self, kind: StatisticKind) -> (f64, f64) {
        let (mean, sd) = mean_and_std(&self.column(kind));
        (mean, sd / (self.rows.len() as f64).sqrt())
    }

    /// Empirical quantiles (linear interpolation between order statistics).
    pub fn quantiles(&self, kind: StatisticKind, levels: &[f64]) -> Vec<f64> {
        let mut values = self.column(kind);
        values.sort_by(f64::total_cmp);
        levels
            .iter()
            .map(|&l| quantile_sorted(&values, l))
            .collect()
    }
}

pub(crate) fn quantile_sorted(sorted: &[f64], level: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * level;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Simulates `replications` samples of size `n` from `probs` and evaluates
/// every statistic on each.
pub fn simulate_statistics(
    n: u64,
    probs: &[f64],
    replications: usize,
    seed: u64,
) -> ReplicateStatistics {
    let benford = benford_array();
    let k = probs.len();
    let nf = n as f64;
    let rows = (0..replications as u64)
        .into_par_iter()
        .map_init(
            || (vec![0u64; k], vec![0.0f64; k]),
            |(counts, obs), r| {
                let mut rng = replicate_rng(seed, r);
                multinomial_into(&mut rng, n, probs, counts);
                for (o, &c) in obs.iter_mut().zip(counts.iter()) {
                    *o = c as f64 / nf;
                }
                all_divergences(obs, &benford, n)
            },
        )
        .collect();
    ReplicateStatistics { rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        use rand::Rng;
        let a: u64 = replicate_rng(7, 3).random();
        let b: u64 = replicate_rng(7, 3).random();
        let c: u64 = replicate_rng(7, 4).random();
        let d: u64 = replicate_rng(8, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, &[100]), derive_seed(1, &[1000]));
        assert_ne!(derive_seed(1, &[100, 2]), derive_seed(1, &[2, 100]));
        assert_eq!(derive_seed(5, &[1, 2]), derive_seed(5, &[1, 2]));
    }

    #[test]
    fn multinomial_totals_and_point_masses() {
        let mut rng = replicate_rng(1, 0);
        let mut out = [0u64; 9];
        multinomial_into(&mut rng, 1234, &benford_array(), &mut out);
        assert_eq!(out.iter().sum::<u64>(), 1234);

        let mut nine = [0.0; 9];
        nine[8] = 1.0;
        multinomial_into(&mut rng, 50, &nine, &mut out);
        assert_eq!(out, [0, 0, 0, 0, 0, 0, 0, 0, 50]);

        let mut one = [0.0; 9];
        one[0] = 1.0;
        multinomial_into(&mut rng, 50, &one, &mut out);
        assert_eq!(out, [50, 0, 0, 0, 0, 0, 0, 0, 0]);

        multinomial_into(&mut rng, 0, &benford_array(), &mut out);
        assert_eq!(out, [0; 9]);
    }

    #[test]
    fn multinomial_cell_moments() {
        // Mean and variance of each cell against n·p and n·p·(1 − p).
        let probs = benford_array();
        let (n, reps) = (200u64, 40_000u64);
        let mut sums = [0.0f64; 9];
        let mut sq = [0.0f64; 9];
        let mut out = [0u64; 9];
        for r in 0..reps {
            multinomial_into(&mut replicate_rng(99, r), n, &probs, &mut out);
            for i in 0..9 {
                sums[i] += out[i] as f64;
                sq[i] += (out[i] * out[i]) as f64;
            }
        }
        for i in 0..9 {
            let mean = sums[i] / reps as f64;
            let var = sq[i] / reps as f64 - mean * mean;
            let want_var = n as f64 * probs[i] * (1.0 - probs[i]);
            let se = (want_var / reps as f64).sqrt();
            assert!(
                (mean - n as f64 * probs[i]).abs() < 5.0 * se,
                "cell {i} mean"
            );
            assert!((var / want_var - 1.0).abs() < 0.05, "cell {i} variance");
        }
    }

    #[test]
    fn parallel_matches_single_thread() {
        let probs = benford_array();
        let par = simulate_statistics(500, &probs, 3000, 11);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let seq = pool.install(|| simulate_statistics(500, &probs, 3000, 11));
        assert_eq!(par, seq);
        let (m1, s1) = par.mean_and_se(StatisticKind::Chi2);
        let (m2, s2) = seq.mean_and_se(StatisticKind::Chi2);
        assert_eq!(m1.to_bits(), m2.to_bits());
        assert_eq!(s1.to_bits(), s2.to_bits());
    }

    #[test]
    fn quantile_interpolation() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 1.0), 5.0);
        assert_eq!(quantile_sorted(&v, 0.5), 3.0);
        assert_eq!(quantile_sorted(&v, 0.125), 1.5);
    }
}
