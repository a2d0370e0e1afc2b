//! Contaminant digit distributions and the Benford/contaminant mixture.

use serde::{Deserialize, Serialize};

use crate::digits::{benford_array, FrequencyVector, FIRST_DIGITS};
use crate::error::{Error, Result};
use crate::sum::neumaier;

/// Sum tolerance accepted for user-supplied contaminant files.
pub const CUSTOM_SUM_TOLERANCE: f64 = 1e-9;

/// Digit distribution `NB_d` of the contaminated fraction of a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContaminantDistribution {
    name: String,
    probs: FrequencyVector,
}

/// Uniform contaminant, `NB_d = 1/9`.
pub fn uniform_contaminant() -> ContaminantDistribution {
    ContaminantDistribution {
        name: "uniform".into(),
        probs: FrequencyVector::new(vec![1.0 / 9.0; 9]).expect("uniform is valid"),
    }
}

/// All contaminant mass on a single first digit.
pub fn degenerate_contaminant(target: u8) -> Result<ContaminantDistribution> {
    if !(1..=9).contains(&target) {
        return Err(Error::InvalidCategory(target));
    }
    let probs = FIRST_DIGITS
        .iter()
        .map(|&d| if d == target { 1.0 } else { 0.0 })
        .collect();
    Ok(ContaminantDistribution {
        name: format!("degenerate({target})"),
        probs: FrequencyVector::new(probs)?,
    })
}

impl ContaminantDistribution {
    /// Custom contaminant over digits 1..9.
    ///
    /// Vectors whose sum is off by more than [`CUSTOM_SUM_TOLERANCE`] are
    /// rejected. Smaller discrepancies are renormalized and reported through
    /// the returned warning.
    pub fn custom(probs: Vec<f64>) -> Result<(Self, Option<String>)> {
        if probs.len() != FIRST_DIGITS.len() {
            return Err(Error::InvalidDistribution(format!(
                "expected 9 probabilities, got {}",
                probs.len()
            )));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidDistribution(
                "probabilities must be finite and non-negative".into(),
            ));
        }
        let total = neumaier(probs.iter().copied());
        if (total - 1.0).abs() > CUSTOM_SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let warning = ((total - 1.0).abs() > crate::digits::SUM_TOLERANCE)
            .then(|| format!("contaminant probabilities summed to {total}; renormalized"));
        let probs = probs.into_iter().map(|p| p / total).collect();
        Ok((
            Self {
                name: "custom".into(),
                probs: FrequencyVector::new(probs)?,
            },
            warning,
        ))
    }

    /// Parses nine whitespace- or comma-separated probabilities in digit order.
    pub fn parse_custom(text: &str) -> Result<(Self, Option<String>)> {
        let probs = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|tok| !tok.is_empty())
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| {
                    Error::InvalidDistribution(format!("cannot parse probability {tok:?}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::custom(probs)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn probs(&self) -> &FrequencyVector {
        &self.probs
    }

    /// `δ_d = NB_d − B_d`.
    pub fn delta(&self) -> Vec<f64> {
        let benford = benford_array();
        self.probs
            .iter()
            .zip(benford)
            .map(|(nb, b)| nb - b)
            .collect()
    }

    /// Sums that parameterize the closed-form expectations.
    pub fn constants(&self) -> ContaminationConstants {
        ContaminationConstants::from_delta(&self.delta())
    }
}

/// Coefficients of the chi-squared and SSD expectations, recomputed from `B_d`
/// and `δ_d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContaminationConstants {
    /// `Σ δ²/B`
    pub chi_quadratic: f64,
    /// `Σ δ(1 − 2B)/B`
    pub chi_linear: f64,
    /// `Σ δ²`
    pub ssd_quadratic: f64,
    /// `Σ δ(1 − 2B)`
    pub ssd_linear: f64,
    /// `Σ B(1 − B)`
    pub ssd_null: f64,
    /// Number of digit categories.
    pub categories: usize,
}

impl ContaminationConstants {
    fn from_delta(delta: &[f64]) -> Self {
        let b = benford_array();
        let pairs = || delta.iter().copied().zip(b);
        Self {
            chi_quadratic: neumaier(pairs().map(|(d, b)| d * d / b)),
            chi_linear: neumaier(pairs().map(|(d, b)| d * (1.0 - 2.0 * b) / b)),
            ssd_quadratic: neumaier(pairs().map(|(d, _)| d * d)),
            ssd_linear: neumaier(pairs().map(|(d, b)| d * (1.0 - 2.0 * b))),
            ssd_null: neumaier(b.iter().map(|b| b * (1.0 - b))),
            categories: delta.len(),
        }
    }
}

/// Benford/contaminant mixture `p_d = B_d + f·δ_d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureModel {
    pub f: f64,
    pub contaminant: ContaminantDistribution,
    pub delta: Vec<f64>,
    pub mixture: FrequencyVector,
}

pub(crate) fn check_proportion(f: f64) -> Result<()> {
    if (0.0..=1.0).contains(&f) {
        Ok(())
    } else {
        Err(Error::InvalidProportion(f))
    }
}

/// Mixture probabilities at contamination `f`.
pub fn mixture_probabilities(
    f: f64,
    contaminant: &ContaminantDistribution,
) -> Result<MixtureModel> {
    check_proportion(f)?;
    let delta = contaminant.delta();
    let mixture = mixture_array(f, &delta);
    Ok(MixtureModel {
        f,
        contaminant: contaminant.clone(),
        delta,
        mixture: FrequencyVector::new(mixture)?,
    })
}

pub(crate) fn mixture_array(f: f64, delta: &[f64]) -> Vec<f64> {
    benford_array()
        .iter()
        .zip(delta)
        .map(|(b, d)| (b + f * d).clamp(0.0, 1.0))
        .collect()
}

/// Mean and variance of one observed digit proportion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProportionMoments {
    pub mean: f64,
    pub variance: f64,
}

/// Normal-approximation moments of `O_d`: mean `p_d`, variance `p_d(1 − p_d)/n`.
pub fn proportion_moments(model: &MixtureModel, n: u64) -> Result<Vec<ProportionMoments>> {
    if n < 1 {
        return Err(Error::InvalidSampleSize { n, min: 1 });
    }
    let n = n as f64;
    Ok(model
        .mixture
        .iter()
        .map(|p| ProportionMoments {
            mean: p,
            variance: p * (1.0 - p) / n,
        })
        .collect())
}
