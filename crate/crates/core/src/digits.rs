//! Leading-digit extraction, tallying, and the Benford reference distribution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// First-digit categories in their canonical order.
pub const FIRST_DIGITS: [u8; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];

/// Tolerance on `Σ p = 1` for a validated probability vector.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// A probability vector over an ordered set of digit categories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FrequencyVector(Vec<f64>);

impl FrequencyVector {
    /// Validates entries in `[0, 1]` summing to one within [`SUM_TOLERANCE`].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("no categories".into()));
        }
        if let Some(bad) = probs
            .iter()
            .find(|p| !p.is_finite() || **p < 0.0 || **p > 1.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "entry {bad} outside [0, 1]"
            )));
        }
        let total = crate::sum::neumaier(probs.iter().copied());
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}, not 1"
            )));
        }
        Ok(Self(probs))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().copied()
    }
}

impl TryFrom<Vec<f64>> for FrequencyVector {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<FrequencyVector> for Vec<f64> {
    fn from(value: FrequencyVector) -> Self {
        value.0
    }
}

impl std::ops::Index<usize> for FrequencyVector {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.0[index]
    }
}

/// Ordered digit categories and their reference probabilities.
///
/// Only the first-digit preset exists today; the structure leaves room for
/// other digit positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigitCategorySet {
    labels: Vec<u8>,
    reference_probs: FrequencyVector,
}

impl DigitCategorySet {
    /// Leading digits 1..9 with Benford reference probabilities.
    pub fn first_digit() -> Self {
        let labels = FIRST_DIGITS.to_vec();
        let reference_probs =
            benford_probabilities(&labels).expect("first-digit preset is supported");
        Self {
            labels,
            reference_probs,
        }
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn reference(&self) -> &FrequencyVector {
        &self.reference_probs
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: u8) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }
}

/// Benford first-digit probabilities `log10(1 + 1/d)`.
///
/// Only the first-digit label set `1..=9` is supported.
pub fn benford_probabilities(labels: &[u8]) -> Result<FrequencyVector> {
    if labels != FIRST_DIGITS {
        return Err(Error::UnsupportedDigitScheme);
    }
    let probs = labels
        .iter()
        .map(|&d| (1.0 + 1.0 / f64::from(d)).log10())
        .collect();
    FrequencyVector::new(probs)
}

/// Benford first-digit probabilities as a fixed array, for hot loops.
pub(crate) fn benford_array() -> [f64; 9] {
    std::array::from_fn(|i| (1.0 + 1.0 / (i as f64 + 1.0)).log10())
}

/// Exact powers of ten representable in an `f64`.
const EXACT_POW10: [f64; 23] = [
    1e0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8, 1e9, 1e10, 1e11, 1e12, 1e13, 1e14, 1e15, 1e16,
    1e17, 1e18, 1e19, 1e20, 1e21, 1e22,
];

/// Multiplies (`k > 0`) or divides (`k < 0`) by `10^|k|` using exact power chunks.
fn scale_pow10(mut m: f64, k: i32) -> f64 {
    let mut rest = k.unsigned_abs() as usize;
    while rest > 0 {
        let step = rest.min(22);
        if k > 0 {
            m *= EXACT_POW10[step];
        } else {
            m /= EXACT_POW10[step];
        }
        rest -= step;
    }
    m
}

/// Leading significant decimal digit of `|x|`.
pub fn extract_first_digit(x: f64) -> Result<u8> {
    if x == 0.0 || !x.is_finite() {
        return Err(Error::NoSignificantDigit(x));
    }
    let mut m = x.abs();
    // Subnormals lose precision under log10; lift them first.
    if m < f64::MIN_POSITIVE {
        m = scale_pow10(m, 300);
    }
    let exponent = m.log10().floor() as i32;
    m = scale_pow10(m, -exponent);
    while m >= 10.0 {
        m /= 10.0;
    }
    while m < 1.0 {
        m *= 10.0;
    }
    Ok(m as u8)
}

/// Treatment of negative values during ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NegativePolicy {
    #[default]
    Abs,
    Drop,
}

/// Treatment of values without a significant digit (zeros, non-finite).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingDigitPolicy {
    #[default]
    Drop,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IngestPolicy {
    pub negatives: NegativePolicy,
    pub zeros: MissingDigitPolicy,
    pub non_finite: MissingDigitPolicy,
}

/// Per-category tallies of an observed dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitCounts {
    counts: Vec<u64>,
    n: u64,
}

impl DigitCounts {
    pub fn new(counts: Vec<u64>) -> Self {
        let n = counts.iter().sum();
        Self { counts, n }
    }

    /// Counts over the first-digit categories, given as `(digit, count)` pairs.
    pub fn from_first_digit_pairs(pairs: &[(u8, u64)]) -> Result<Self> {
        let mut counts = vec![0u64; FIRST_DIGITS.len()];
        for &(d, c) in pairs {
            if !(1..=9).contains(&d) {
                return Err(Error::InvalidCategory(d));
            }
            counts[usize::from(d - 1)] += c;
        }
        Ok(Self::new(counts))
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Count for a first-digit label.
    pub fn count(&self, digit: u8) -> u64 {
        match digit {
            1..=9 => self
                .counts
                .get(usize::from(digit - 1))
                .copied()
                .unwrap_or(0),
            _ => 0,
        }
    }
}

/// Result of tallying a dataset, including what the ingestion policy skipped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitTally {
    pub counts: DigitCounts,
    pub skipped_zero: u64,
    pub skipped_negative: u64,
    pub skipped_non_finite: u64,
}

impl DigitTally {
    pub fn skipped(&self) -> u64 {
        self.skipped_zero + self.skipped_negative + self.skipped_non_finite
    }
}

/// Tallies first digits of `values` under `policy`.
pub fn count_digits(values: &[f64], policy: IngestPolicy) -> Result<DigitTally> {
    let mut counts = vec![0u64; FIRST_DIGITS.len()];
    let (mut zero, mut negative, mut non_finite) = (0, 0, 0);
    for &x in values {
        if !x.is_finite() {
            match policy.non_finite {
                MissingDigitPolicy::Drop => non_finite += 1,
                MissingDigitPolicy::Reject => return Err(Error::NoSignificantDigit(x)),
            }
            continue;
        }
        if x == 0.0 {
            match policy.zeros {
                MissingDigitPolicy::Drop => zero += 1,
                MissingDigitPolicy::Reject => return Err(Error::NoSignificantDigit(x)),
            }
            continue;
        }
        if x < 0.0 && policy.negatives == NegativePolicy::Drop {
            negative += 1;
            continue;
        }
        let d = extract_first_digit(x)?;
        counts[usize::from(d - 1)] += 1;
    }
    let counts = DigitCounts::new(counts);
    if counts.n() == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(DigitTally {
        counts,
        skipped_zero: zero,
        skipped_negative: negative,
        skipped_non_finite: non_finite,
    })
}

/// Observed proportions `O_d = count_d / n`.
pub fn frequencies(counts: &DigitCounts) -> Result<FrequencyVector> {
    if counts.n() == 0 {
        return Err(Error::EmptyDataset);
    }
    let n = counts.n() as f64;
    FrequencyVector::new(counts.counts().iter().map(|&c| c as f64 / n).collect())
}
