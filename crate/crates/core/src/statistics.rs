//! Divergence statistics between observed digit proportions and Benford's law.
//!
//! KS, Kuiper and CvM use the discrete CDFs over the ordered digits 1..9:
//! KS is the largest absolute CDF gap, Kuiper is `D⁺ + D⁻`, and CvM is the
//! unweighted sum of squared CDF gaps. SSD and MAD work on proportions, not
//! percentages.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::digits::{benford_array, frequencies, DigitCounts, FrequencyVector};
use crate::error::{Error, Result};

/// The seven supported divergence statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum StatisticKind {
    Chi2,
    Ssd,
    Mad,
    Ed,
    Ks,
    Kuiper,
    Cvm,
}

impl StatisticKind {
    pub const ALL: [StatisticKind; 7] = [
        StatisticKind::Chi2,
        StatisticKind::Ssd,
        StatisticKind::Mad,
        StatisticKind::Ed,
        StatisticKind::Ks,
        StatisticKind::Kuiper,
        StatisticKind::Cvm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StatisticKind::Chi2 => "CHI2",
            StatisticKind::Ssd => "SSD",
            StatisticKind::Mad => "MAD",
            StatisticKind::Ed => "ED",
            StatisticKind::Ks => "KS",
            StatisticKind::Kuiper => "KUIPER",
            StatisticKind::Cvm => "CVM",
        }
    }

    /// Position in [`StatisticKind::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    /// Whether the expectation has a closed form (exact or Taylor).
    pub fn has_closed_form(self) -> bool {
        matches!(
            self,
            StatisticKind::Chi2 | StatisticKind::Ssd | StatisticKind::Mad | StatisticKind::Ed
        )
    }
}

impl fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StatisticKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "chi2" | "chi-squared" | "chisq" => Ok(StatisticKind::Chi2),
            "ssd" => Ok(StatisticKind::Ssd),
            "mad" => Ok(StatisticKind::Mad),
            "ed" | "euclidean" => Ok(StatisticKind::Ed),
            "ks" => Ok(StatisticKind::Ks),
            "kuiper" => Ok(StatisticKind::Kuiper),
            "cvm" => Ok(StatisticKind::Cvm),
            other => Err(format!("unknown statistic kind {other:?}")),
        }
    }
}

/// An observed statistic `T(D)` and the sample size it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatisticValue {
    pub kind: StatisticKind,
    pub value: f64,
    pub n: u64,
}

impl StatisticValue {
    pub fn new(kind: StatisticKind, value: f64, n: u64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidObservation(value));
        }
        Ok(Self { kind, value, n })
    }

    /// Computes `kind` from observed proportions.
    pub fn from_frequencies(kind: StatisticKind, obs: &FrequencyVector, n: u64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidSampleSize { n, min: 1 });
        }
        let all = all_divergences(obs.probs(), &benford_array(), n);
        Ok(Self {
            kind,
            value: all[kind.index()],
            n,
        })
    }
}

/// All seven statistics of an observed tally, in [`StatisticKind::ALL`] order.
pub fn observe_all(counts: &DigitCounts) -> Result<Vec<StatisticValue>> {
    let obs = frequencies(counts)?;
    let all = all_divergences(obs.probs(), &benford_array(), counts.n());
    Ok(StatisticKind::ALL
        .iter()
        .map(|&kind| StatisticValue {
            kind,
            value: all[kind.index()],
            n: counts.n(),
        })
        .collect())
}

/// Evaluates every statistic in one pass over the categories.
///
/// The CDF gaps skip the last category, where both CDFs equal one.
pub(crate) fn all_divergences(obs: &[f64], reference: &[f64], n: u64) -> [f64; 7] {
    debug_assert_eq!(obs.len(), reference.len());
    let k = obs.len();
    let (mut chi, mut ssd, mut abs) = (0.0, 0.0, 0.0);
    let (mut gap, mut d_plus, mut d_minus, mut cvm) = (0.0f64, 0.0f64, 0.0f64, 0.0);
    for (i, (&o, &b)) in obs.iter().zip(reference).enumerate() {
        let diff = o - b;
        chi += diff * diff / b;
        ssd += diff * diff;
        abs += diff.abs();
        if i + 1 < k {
            gap += diff;
            d_plus = d_plus.max(gap);
            d_minus = d_minus.max(-gap);
            cvm += gap * gap;
        }
    }
    [
        n as f64 * chi,
        ssd,
        abs / k as f64,
        ssd.sqrt(),
        d_plus.max(d_minus),
        d_plus + d_minus,
        cvm,
    ]
}

fn one(kind: StatisticKind, obs: &FrequencyVector, n: u64) -> f64 {
    all_divergences(obs.probs(), &benford_array(), n)[kind.index()]
}

/// Pearson chi-squared `n · Σ (O_d − B_d)² / B_d`.
pub fn chi_squared(obs: &FrequencyVector, n: u64) -> f64 {
    one(StatisticKind::Chi2, obs, n)
}

/// Sum of squared differences `Σ (O_d − B_d)²`.
pub fn ssd(obs: &FrequencyVector) -> f64 {
    one(StatisticKind::Ssd, obs, 1)
}

/// Mean absolute deviation `(1/9) Σ |O_d − B_d|`.
pub fn mad(obs: &FrequencyVector) -> f64 {
    one(StatisticKind::Mad, obs, 1)
}

/// Euclidean distance `sqrt(SSD)`.
pub fn euclidean(obs: &FrequencyVector) -> f64 {
    one(StatisticKind::Ed, obs, 1)
}

/// Kolmogorov–Smirnov distance between the discrete digit CDFs.
pub fn ks(obs: &FrequencyVector) -> f64 {
    one(StatisticKind::Ks, obs, 1)
}

/// Kuiper distance `D⁺ + D⁻` between the discrete digit CDFs.
pub fn kuiper(obs: &FrequencyVector) -> f64 {
    one(StatisticKind::Kuiper, obs, 1)
}

/// Cramér–von Mises distance `Σ (F_O(d) − F_B(d))²`, unweighted.
pub fn cvm(obs: &FrequencyVector) -> f64 {
    one(StatisticKind::Cvm, obs, 1)
}

/// Conformity classes for first-digit MAD.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MadConformity {
    Close,
    Acceptable,
    MarginallyAcceptable,
    Nonconformity,
}

impl fmt::Display for MadConformity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MadConformity::Close => "close conformity",
            MadConformity::Acceptable => "acceptable conformity",
            MadConformity::MarginallyAcceptable => "marginally acceptable conformity",
            MadConformity::Nonconformity => "nonconformity",
        })
    }
}

/// MAD cut points 0.006 / 0.012 / 0.015.
pub const MAD_CUTOFFS: [f64; 3] = [0.006, 0.012, 0.015];

/// SSD cut points 0.0002 / 0.0025 / 0.0100.
pub const SSD_CUTOFFS: [f64; 3] = [0.0002, 0.0025, 0.0100];

fn bucket(value: f64, cuts: &[f64; 3]) -> usize {
    // A value equal to a cut point falls in the class above it.
    cuts.iter().take_while(|&&c| value >= c).count()
}

/// Classifies a first-digit MAD value.
pub fn classify_mad(value: f64) -> MadConformity {
    match bucket(value, &MAD_CUTOFFS) {
        0 => MadConformity::Close,
        1 => MadConformity::Acceptable,
        2 => MadConformity::MarginallyAcceptable,
        _ => MadConformity::Nonconformity,
    }
}

/// Conformity classes for first-digit SSD.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SsdConformity {
    Perfect,
    AcceptableClose,
    MarginallyBenford,
    NonBenford,
}

impl fmt::Display for SsdConformity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SsdConformity::Perfect => "Perfectly Benford",
            SsdConformity::AcceptableClose => "Acceptable Close",
            SsdConformity::MarginallyBenford => "Marginally Benford",
            SsdConformity::NonBenford => "Non-Benford",
        })
    }
}

/// Classifies a first-digit SSD value (on proportions).
pub fn classify_ssd(value: f64) -> SsdConformity {
    match bucket(value, &SSD_CUTOFFS) {
        0 => SsdConformity::Perfect,
        1 => SsdConformity::AcceptableClose,
        2 => SsdConformity::MarginallyBenford,
        _ => SsdConformity::NonBenford,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contamination::{mixture_probabilities, uniform_contaminant};
    use crate::digits::{benford_probabilities, FIRST_DIGITS};
    use proptest::prelude::*;

    fn benford() -> FrequencyVector {
        benford_probabilities(&FIRST_DIGITS).unwrap()
    }

    fn exact_mixture(f: f64) -> FrequencyVector {
        mixture_probabilities(f, &uniform_contaminant())
            .unwrap()
            .mixture
    }

    fn point_mass(d: usize) -> FrequencyVector {
        let mut v = vec![0.0; 9];
        v[d - 1] = 1.0;
        FrequencyVector::new(v).unwrap()
    }

    #[test]
    fn zero_on_benford() {
        let b = benford();
        assert_eq!(chi_squared(&b, 1000), 0.0);
        assert_eq!(ssd(&b), 0.0);
        assert_eq!(mad(&b), 0.0);
        assert_eq!(euclidean(&b), 0.0);
        assert_eq!(ks(&b), 0.0);
        assert_eq!(kuiper(&b), 0.0);
        assert_eq!(cvm(&b), 0.0);
    }

    #[test]
    fn chi_squared_examples() {
        // 9·((1 − B₁)²/B₁ + Σ_{d≥2} B_d), arbitrary-precision oracle
        assert!((chi_squared(&point_mass(1), 9) - 20.897_352_853_986_3).abs() < 1e-10);
        // n·f²·Σδ²/B
        let v = chi_squared(&exact_mixture(0.05), 10_000);
        assert!((v - 10_000.0 * 0.0025 * 0.401_698_292_912).abs() < 1e-8);
        assert!((v - 10.04).abs() < 0.01);
    }

    #[test]
    fn uniform_and_mixture_examples() {
        let u = FrequencyVector::new(vec![1.0 / 9.0; 9]).unwrap();
        assert!((ssd(&u) - 0.054_342_253_997_6).abs() < 1e-12);
        assert!((mad(&u) - 0.059_717_035_109_9).abs() < 1e-12);
        assert!((euclidean(&u) - 0.233_114_250_953).abs() < 1e-11);

        let p = exact_mixture(0.75);
        assert!((ssd(&p) - 0.5625 * 0.054_342_253_997_6).abs() < 1e-12);
        assert!((ssd(&p) - 0.03057).abs() < 1e-5);
        assert!((mad(&p) - 0.04478).abs() < 1e-5);
        assert!((euclidean(&p) - 0.17484).abs() < 1e-5);
        // 0.75·max|cumulative δ| and 0.5625·Σ(cumulative δ)²
        assert!((ks(&p) - 0.75 * 0.268_726_657_995).abs() < 1e-11);
        assert!((kuiper(&p) - ks(&p)).abs() < 1e-15);
        assert!((cvm(&p) - 0.5625 * 0.339_400_820_681).abs() < 1e-11);
    }

    #[test]
    fn point_mass_on_nine() {
        // F_O(8) = 0 against F_B(8) = log10(9)
        assert!((ks(&point_mass(9)) - 0.954_242_509_439).abs() < 1e-11);
    }

    #[test]
    fn statistic_value_validation() {
        assert!(StatisticValue::new(StatisticKind::Ks, -1.0, 10).is_err());
        assert!(StatisticValue::new(StatisticKind::Ks, f64::NAN, 10).is_err());
        let v = StatisticValue::from_frequencies(StatisticKind::Chi2, &point_mass(1), 9).unwrap();
        assert!((v.value - 20.8973).abs() < 1e-4);
        assert!(StatisticValue::from_frequencies(StatisticKind::Chi2, &point_mass(1), 0).is_err());
    }

    #[test]
    fn observe_all_from_counts() {
        let counts = DigitCounts::new(vec![30, 18, 12, 10, 8, 7, 6, 5, 4]);
        let all = observe_all(&counts).unwrap();
        assert_eq!(all.len(), 7);
        let obs = frequencies(&counts).unwrap();
        assert_eq!(all[0].value, chi_squared(&obs, 100));
        assert_eq!(all[6].value, cvm(&obs));
        assert!(all.iter().all(|s| s.n == 100));
    }

    #[test]
    fn kind_parsing() {
        for k in StatisticKind::ALL {
            assert_eq!(k.as_str().parse::<StatisticKind>().unwrap(), k);
            assert_eq!(StatisticKind::ALL[k.index()], k);
        }
        assert_eq!(
            "chi-squared".parse::<StatisticKind>().unwrap(),
            StatisticKind::Chi2
        );
        assert!("anderson".parse::<StatisticKind>().is_err());
    }

    #[test]
    fn mad_classes() {
        assert_eq!(classify_mad(0.004), MadConformity::Close);
        assert_eq!(classify_mad(0.0135), MadConformity::MarginallyAcceptable);
        assert_eq!(classify_mad(0.0296), MadConformity::Nonconformity);
        assert_eq!(classify_mad(0.008), MadConformity::Acceptable);
        assert_eq!(classify_mad(0.006), MadConformity::Acceptable);
        assert_eq!(classify_mad(0.012), MadConformity::MarginallyAcceptable);
        assert_eq!(classify_mad(0.015), MadConformity::Nonconformity);
        assert_eq!(classify_mad(0.004).to_string(), "close conformity");
    }

    #[test]
    fn ssd_classes() {
        assert_eq!(classify_ssd(0.0001), SsdConformity::Perfect);
        assert_eq!(classify_ssd(0.005), SsdConformity::MarginallyBenford);
        assert_eq!(classify_ssd(0.0305), SsdConformity::NonBenford);
        assert_eq!(classify_ssd(0.001), SsdConformity::AcceptableClose);
        assert_eq!(classify_ssd(0.0002), SsdConformity::AcceptableClose);
        assert_eq!(classify_ssd(0.0025), SsdConformity::MarginallyBenford);
        assert_eq!(classify_ssd(0.01), SsdConformity::NonBenford);
        assert_eq!(classify_ssd(0.0001).to_string(), "Perfectly Benford");
    }

    fn freq_strategy() -> impl Strategy<Value = FrequencyVector> {
        prop::collection::vec(0.0f64..1.0, 9).prop_filter_map("non-zero mass", |w| {
            let s: f64 = w.iter().sum();
            (s > 1e-9).then(|| FrequencyVector::new(w.iter().map(|x| x / s).collect()).ok())?
        })
    }

    proptest! {
        #[test]
        fn cdf_statistic_bounds(obs in freq_strategy()) {
            let (k, q, c) = (ks(&obs), kuiper(&obs), cvm(&obs));
            prop_assert!(k <= q + 1e-15);
            prop_assert!(q <= 2.0 * k + 1e-15);
            prop_assert!(c <= 8.0 * k * k + 1e-15);
        }

        #[test]
        fn euclidean_squared_is_ssd(obs in freq_strategy()) {
            let e = euclidean(&obs);
            prop_assert!((e * e - ssd(&obs)).abs() <= 1e-15);
        }

        #[test]
        fn positive_off_benford(f in 1e-6f64..=1.0) {
            let p = exact_mixture(f);
            prop_assert!(chi_squared(&p, 10) > 0.0);
            prop_assert!(ssd(&p) > 0.0 && mad(&p) > 0.0 && euclidean(&p) > 0.0);
            prop_assert!(ks(&p) > 0.0 && kuiper(&p) > 0.0 && cvm(&p) > 0.0);
        }
    }
}
