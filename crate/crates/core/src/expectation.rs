//! Expected statistic values `E[T(S)] = g(n, f, NB)` for a contaminated
//! Benford sample, in closed form where one exists and by Monte Carlo
//! otherwise.

use serde::{Deserialize, Serialize};

use crate::contamination::{check_proportion, mixture_array, ContaminantDistribution};
use crate::digits::benford_array;
use crate::error::{Error, Result};
use crate::normal::folded_normal_mean;
use crate::sampling::simulate_statistics;
use crate::statistics::StatisticKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpectationMethod {
    ClosedForm,
    TaylorApprox,
    MonteCarlo,
}

/// An expected statistic value; `std_error` is set only for Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectationResult {
    pub kind: StatisticKind,
    pub value: f64,
    pub method: ExpectationMethod,
    pub std_error: Option<f64>,
}

impl ExpectationResult {
    fn exact(kind: StatisticKind, value: f64, method: ExpectationMethod) -> Self {
        Self {
            kind,
            value,
            method,
            std_error: None,
        }
    }
}

fn check(n: u64, f: f64) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidSampleSize { n, min: 1 });
    }
    check_proportion(f)
}

/// Coefficients `(a, b, c)` of `E[T] = a·f² + b·f + c` for the quadratic statistics.
pub(crate) fn quadratic_coefficients(
    kind: StatisticKind,
    n: u64,
    contaminant: &ContaminantDistribution,
) -> (f64, f64, f64) {
    let k = contaminant.constants();
    let n = n as f64;
    match kind {
        StatisticKind::Chi2 => (
            (n - 1.0) * k.chi_quadratic,
            k.chi_linear,
            (k.categories - 1) as f64,
        ),
        StatisticKind::Ssd | StatisticKind::Ed => (
            (n - 1.0) * k.ssd_quadratic / n,
            k.ssd_linear / n,
            k.ssd_null / n,
        ),
        _ => unreachable!("{kind} has no quadratic expectation"),
    }
}

fn quadratic(kind: StatisticKind, n: u64, f: f64, contaminant: &ContaminantDistribution) -> f64 {
    let (a, b, c) = quadratic_coefficients(kind, n, contaminant);
    (a * f + b) * f + c
}

/// `E[χ²] = (n − 1)f²Σδ²/B + fΣδ(1 − 2B)/B + (k − 1)`.
pub fn expected_chi_squared(
    n: u64,
    f: f64,
    contaminant: &ContaminantDistribution,
) -> Result<ExpectationResult> {
    check(n, f)?;
    Ok(ExpectationResult::exact(
        StatisticKind::Chi2,
        quadratic(StatisticKind::Chi2, n, f, contaminant),
        ExpectationMethod::ClosedForm,
    ))
}

/// `E[SSD] = [f²(n − 1)Σδ² + fΣδ(1 − 2B) + ΣB(1 − B)] / n`.
pub fn expected_ssd(
    n: u64,
    f: f64,
    contaminant: &ContaminantDistribution,
) -> Result<ExpectationResult> {
    check(n, f)?;
    Ok(ExpectationResult::exact(
        StatisticKind::Ssd,
        quadratic(StatisticKind::Ssd, n, f, contaminant),
        ExpectationMethod::ClosedForm,
    ))
}

pub(crate) fn mad_value(n: u64, f: f64, delta: &[f64]) -> f64 {
    let p = mixture_array(f, delta);
    let n = n as f64;
    let total: f64 = p
        .iter()
        .zip(delta)
        .map(|(&p, &d)| folded_normal_mean(f * d, (p * (1.0 - p) / n).sqrt()))
        .sum();
    total / delta.len() as f64
}

/// Expected MAD: the average folded-normal mean of `O_d − B_d`, each normal
/// with location `f·δ_d` and variance `p_d(1 − p_d)/n`.
pub fn expected_mad(
    n: u64,
    f: f64,
    contaminant: &ContaminantDistribution,
) -> Result<ExpectationResult> {
    check(n, f)?;
    Ok(ExpectationResult::exact(
        StatisticKind::Mad,
        mad_value(n, f, &contaminant.delta()),
        ExpectationMethod::ClosedForm,
    ))
}

/// First-order approximation `E[ED] ≈ sqrt(E[SSD])`.
pub fn expected_ed(
    n: u64,
    f: f64,
    contaminant: &ContaminantDistribution,
) -> Result<ExpectationResult> {
    check(n, f)?;
    Ok(ExpectationResult::exact(
        StatisticKind::Ed,
        quadratic(StatisticKind::Ed, n, f, contaminant).sqrt(),
        ExpectationMethod::TaylorApprox,
    ))
}

/// Closed-form (or Taylor) expectation for CHI2, SSD, MAD and ED.
pub fn expected_closed_form(
    kind: StatisticKind,
    n: u64,
    f: f64,
    contaminant: &ContaminantDistribution,
) -> Result<ExpectationResult> {
    match kind {
        StatisticKind::Chi2 => expected_chi_squared(n, f, contaminant),
        StatisticKind::Ssd => expected_ssd(n, f, contaminant),
        StatisticKind::Mad => expected_mad(n, f, contaminant),
        StatisticKind::Ed => expected_ed(n, f, contaminant),
        other => Err(Error::UnsupportedMethod {
            method: "closed-form".into(),
            kind: other.to_string(),
        }),
    }
}

/// Monte Carlo mean of `kind` over `replications` samples of size `n`.
pub fn mc_expected_statistic(
    kind: StatisticKind,
    n: u64,
    f: f64,
    contaminant: &ContaminantDistribution,
    replications: usize,
    seed: u64,
) -> Result<ExpectationResult> {
    check(n, f)?;
    if replications < 2 {
        return Err(Error::TooFewReplications {
            got: replications,
            min: 2,
        });
    }
    let probs = mixture_array(f, &contaminant.delta());
    let (mean, se) = simulate_statistics(n, &probs, replications, seed).mean_and_se(kind);
    Ok(ExpectationResult {
        kind,
        value: mean,
        method: ExpectationMethod::MonteCarlo,
        std_error: Some(se),
    })
}

/// Sum of `B_d(1 − B_d)`, the f = 0 numerator of the SSD expectation.
pub fn null_ssd_numerator() -> f64 {
    benford_array().iter().map(|b| b * (1.0 - b)).sum()
}
