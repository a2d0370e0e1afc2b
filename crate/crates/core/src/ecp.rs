//! Equivalent Contamination Proportion: the `f` at which the expected
//! statistic of a size-`n` contaminated Benford sample equals the observed one.
//!
//! Observations at or below the f = 0 expectation map to 0 and observations at
//! or above the f = 1 expectation map to 1.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::contamination::{mixture_array, ContaminantDistribution};
use crate::critical::Calibrator;
use crate::error::{Error, Result};
use crate::expectation::{expected_closed_form, mad_value, quadratic_coefficients};
use crate::root::{bisect, verify_increasing};
use crate::sampling::simulate_statistics;
use crate::statistics::{StatisticKind, StatisticValue};

/// Probe points used to verify the MAD expectation is increasing.
pub const MAD_PROBES: usize = 8;
/// Bracket tolerance of the MAD root finder.
pub const MAD_TOLERANCE: f64 = 1e-6;
/// Default cap of the sample-size search.
pub const DEFAULT_N_CAP: u64 = 100_000_000;

/// The test-of-means stop is allowed only once the bracket is this narrow.
const EARLY_STOP_WIDTH: f64 = 0.05;
/// Half-width of the finite difference used for the local slope.
const SLOPE_STEP: f64 = 0.05;
/// Standard errors a simulated mean may fall outside its bracket before the
/// sequence is declared non-monotone.
const MONOTONE_SLACK: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EcpMethod {
    Quadratic,
    RootFind,
    Simulated,
}

impl EcpMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Quadratic => "quadratic",
            Self::RootFind => "root-find",
            Self::Simulated => "simulated",
        }
    }
}

impl std::fmt::Display for EcpMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clamp {
    None,
    FloorZero,
    CeilOne,
}

impl Clamp {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::FloorZero => "floor-zero",
            Self::CeilOne => "ceil-one",
        }
    }
}

impl std::fmt::Display for Clamp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An ECP with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcpEstimate {
    pub f: f64,
    pub kind: StatisticKind,
    pub method: EcpMethod,
    pub clamped: Clamp,
    /// Monte Carlo error propagated through the local slope, when applicable.
    pub std_error: Option<f64>,
    pub iterations: u32,
    /// Set when the expectation being inverted is itself an approximation.
    pub approximate: bool,
    /// Local slope `dE[T]/df` at the estimate, when known.
    pub slope: Option<f64>,
}

impl EcpEstimate {
    fn clamp(kind: StatisticKind, method: EcpMethod, clamped: Clamp) -> Self {
        Self {
            f: if clamped == Clamp::CeilOne { 1.0 } else { 0.0 },
            kind,
            method,
            clamped,
            std_error: None,
            iterations: 0,
            approximate: false,
            slope: None,
        }
    }
}

/// Settings of the simulated ECP search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub replications: usize,
    /// Confidence of the two-sided test of means that may stop the search.
    pub confidence: f64,
    pub tolerance: f64,
    pub max_iterations: u32,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            replications: 5000,
            confidence: 0.95,
            tolerance: 1e-4,
            max_iterations: 60,
            seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(Error::TooFewReplications {
                got: self.replications,
                min: 2,
            });
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidLevel(self.confidence));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 || self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "tolerance and max iterations must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn check_observation(observed: f64) -> Result<()> {
    if observed.is_finite() && observed >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidObservation(observed))
    }
}

fn check_n(n: u64, min: u64) -> Result<()> {
    if n < min {
        Err(Error::InvalidSampleSize { n, min })
    } else {
        Ok(())
    }
}

/// Inverts `a·f² + b·f + c = observed` on [0, 1] with the clamp rules.
fn invert_quadratic(kind: StatisticKind, observed: f64, (a, b, c): (f64, f64, f64)) -> EcpEstimate {
    if observed <= c {
        return EcpEstimate::clamp(kind, EcpMethod::Quadratic, Clamp::FloorZero);
    }
    if observed >= a + b + c {
        return EcpEstimate::clamp(kind, EcpMethod::Quadratic, Clamp::CeilOne);
    }
    let excess = observed - c;
    let disc = b * b + 4.0 * a * excess;
    assert!(disc >= 0.0, "negative discriminant after floor clamp");
    // Larger root, in the form that avoids cancellation.
    let f = if b >= 0.0 {
        2.0 * excess / (b + disc.sqrt())
    } else {
        (-b + disc.sqrt()) / (2.0 * a)
    };
    let f = f.clamp(0.0, 1.0);
    EcpEstimate {
        f,
        kind,
        method: EcpMethod::Quadratic,
        clamped: Clamp::None,
        std_error: None,
        iterations: 0,
        approximate: false,
        slope: Some(2.0 * a * f + b),
    }
}

/// ECP from an observed chi-squared statistic.
pub fn ecp_chi_squared(
    observed: f64,
    n: u64,
    contaminant: &ContaminantDistribution,
) -> Result<EcpEstimate> {
    check_observation(observed)?;
    check_n(n, 2)?;
    let coeffs = quadratic_coefficients(StatisticKind::Chi2, n, contaminant);
    Ok(invert_quadratic(StatisticKind::Chi2, observed, coeffs))
}

/// ECP from an observed SSD.
pub fn ecp_ssd(
    observed: f64,
    n: u64,
    contaminant: &ContaminantDistribution,
) -> Result<EcpEstimate> {
    check_observation(observed)?;
    check_n(n, 2)?;
    let coeffs = quadratic_coefficients(StatisticKind::Ssd, n, contaminant);
    Ok(invert_quadratic(StatisticKind::Ssd, observed, coeffs))
}

/// ECP from an observed ED through `E[ED]² ≈ E[SSD]`.
pub fn ecp_ed_approx(
    observed: f64,
    n: u64,
    contaminant: &ContaminantDistribution,
) -> Result<EcpEstimate> {
    check_observation(observed)?;
    check_n(n, 2)?;
    let coeffs = quadratic_coefficients(StatisticKind::Ed, n, contaminant);
    let mut est = invert_quadratic(StatisticKind::Ed, observed * observed, coeffs);
    est.approximate = true;
    // d sqrt(E)/df = E'/(2·sqrt(E))
    if let Some(s) = est.slope {
        est.slope = Some(s / (2.0 * observed));
    }
    Ok(est)
}

/// ECP from an observed MAD by bracketed root finding on the expected MAD.
pub fn ecp_mad(
    observed: f64,
    n: u64,
    contaminant: &ContaminantDistribution,
) -> Result<EcpEstimate> {
    check_observation(observed)?;
    check_n(n, 1)?;
    let delta = contaminant.delta();
    let g = |f: f64| mad_value(n, f, &delta);
    let (e0, e1) = (g(0.0), g(1.0));
    if e0.is_nan() || e1.is_nan() || e1 <= e0 {
        return Err(Error::InvalidBracket(format!(
            "expected MAD does not increase from f = 0 ({e0}) to f = 1 ({e1})"
        )));
    }
    if observed <= e0 {
        return Ok(EcpEstimate::clamp(
            StatisticKind::Mad,
            EcpMethod::RootFind,
            Clamp::FloorZero,
        ));
    }
    if observed >= e1 {
        return Ok(EcpEstimate::clamp(
            StatisticKind::Mad,
            EcpMethod::RootFind,
            Clamp::CeilOne,
        ));
    }
    let probes = verify_increasing(g, 0.0, 1.0, MAD_PROBES)?;
    let (lo, hi) = probes
        .windows(2)
        .find(|w| observed <= w[1].1)
        .map(|w| (w[0].0, w[1].0))
        .expect("observed lies below the f = 1 expectation");
    let root = bisect(|f| g(f) - observed, lo, hi, MAD_TOLERANCE, 100)?;
    let f = root.x.clamp(0.0, 1.0);
    let h = 1e-4;
    let (a, b) = ((f - h).max(0.0), (f + h).min(1.0));
    Ok(EcpEstimate {
        f,
        kind: StatisticKind::Mad,
        method: EcpMethod::RootFind,
        clamped: Clamp::None,
        std_error: None,
        iterations: root.iterations,
        approximate: false,
        slope: Some((g(b) - g(a)) / (b - a)),
    })
}

/// ECP by inverting the closed-form (or Taylor) expectation of `kind`.
pub fn ecp_closed_form(
    kind: StatisticKind,
    observed: f64,
    n: u64,
    contaminant: &ContaminantDistribution,
) -> Result<EcpEstimate> {
    match kind {
        StatisticKind::Chi2 => ecp_chi_squared(observed, n, contaminant),
        StatisticKind::Ssd => ecp_ssd(observed, n, contaminant),
        StatisticKind::Mad => ecp_mad(observed, n, contaminant),
        StatisticKind::Ed => ecp_ed_approx(observed, n, contaminant),
        other => Err(Error::UnsupportedMethod {
            method: "closed-form".into(),
            kind: other.to_string(),
        }),
    }
}

/// Monte Carlo ECP search.
///
/// Means at f = 0 and f = 1 decide the clamps. Otherwise the bracket
/// [0, 1] is bisected, every candidate using the same replicate streams.
/// Once the bracket is narrower than 0.05 the search also stops when the
/// simulated mean is not significantly different from the observation at
/// `config.confidence`. The standard error is the final iterate's Monte Carlo
/// error divided by a finite-difference slope.
pub fn ecp_simulated(
    kind: StatisticKind,
    observed: f64,
    n: u64,
    contaminant: &ContaminantDistribution,
    config: &SearchConfig,
) -> Result<EcpEstimate> {
    check_observation(observed)?;
    check_n(n, 1)?;
    config.validate()?;
    let delta = contaminant.delta();
    let mean_at = |f: f64| {
        simulate_statistics(
            n,
            &mixture_array(f, &delta),
            config.replications,
            config.seed,
        )
        .mean_and_se(kind)
    };

    let (m0, s0) = mean_at(0.0);
    let (m1, s1) = mean_at(1.0);
    if observed <= m0 {
        return Ok(EcpEstimate::clamp(
            kind,
            EcpMethod::Simulated,
            Clamp::FloorZero,
        ));
    }
    if observed >= m1 {
        return Ok(EcpEstimate::clamp(
            kind,
            EcpMethod::Simulated,
            Clamp::CeilOne,
        ));
    }

    let z = Normal::standard().inverse_cdf(0.5 + 0.5 * config.confidence);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let (mut m_lo, mut s_lo, mut m_hi, mut s_hi) = (m0, s0, m1, s1);
    let mut iterations = 0u32;
    let mut accepted = None;
    while hi - lo > config.tolerance {
        if iterations >= config.max_iterations {
            return Err(Error::MaxIterations { lo, hi });
        }
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let (m, s) = mean_at(mid);
        let below = m_lo - m - MONOTONE_SLACK * s.hypot(s_lo);
        let above = m - m_hi - MONOTONE_SLACK * s.hypot(s_hi);
        if below > 0.0 || above > 0.0 {
            return Err(Error::InvalidBracket(format!(
                "non-monotone mean sequence: {m} at f = {mid} outside [{m_lo}, {m_hi}]"
            )));
        }
        if hi - lo < EARLY_STOP_WIDTH && (m - observed).abs() <= z * s {
            accepted = Some((mid, s));
            break;
        }
        if m < observed {
            (lo, m_lo, s_lo) = (mid, m, s);
        } else {
            (hi, m_hi, s_hi) = (mid, m, s);
        }
    }
    let (f, se) = match accepted {
        Some(found) => found,
        None => {
            let f = 0.5 * (lo + hi);
            (f, mean_at(f).1)
        }
    };

    let (a, b) = ((f - SLOPE_STEP).max(0.0), (f + SLOPE_STEP).min(1.0));
    let slope = (mean_at(b).0 - mean_at(a).0) / (b - a);
    Ok(EcpEstimate {
        f,
        kind,
        method: EcpMethod::Simulated,
        clamped: Clamp::None,
        std_error: (slope > 0.0).then(|| se / slope),
        iterations,
        approximate: false,
        slope: Some(slope),
    })
}

/// ECP of an observed statistic with the default method for its kind:
/// quadratic for CHI2 and SSD, root finding for MAD, simulation otherwise.
pub fn estimate_ecp(
    observed: &StatisticValue,
    contaminant: &ContaminantDistribution,
    config: &SearchConfig,
) -> Result<EcpEstimate> {
    match observed.kind {
        StatisticKind::Chi2 | StatisticKind::Ssd | StatisticKind::Mad => {
            ecp_closed_form(observed.kind, observed.value, observed.n, contaminant)
        }
        kind => ecp_simulated(kind, observed.value, observed.n, contaminant, config),
    }
}

fn check_planning_kind(kind: StatisticKind) -> Result<()> {
    if matches!(
        kind,
        StatisticKind::Chi2 | StatisticKind::Ssd | StatisticKind::Mad
    ) {
        Ok(())
    } else {
        Err(Error::UnsupportedMethod {
            method: "closed-form planning".into(),
            kind: kind.to_string(),
        })
    }
}

/// Smallest contamination whose expected statistic reaches the `level`
/// critical value at sample size `n`. A ceil-one clamp means no `f` suffices.
pub fn min_ecp_for_significance(
    kind: StatisticKind,
    n: u64,
    level: f64,
    calibrator: &Calibrator,
    contaminant: &ContaminantDistribution,
) -> Result<EcpEstimate> {
    check_planning_kind(kind)?;
    check_n(n, 2)?;
    let critical = calibrator.threshold(kind, n, level)?;
    ecp_closed_form(kind, critical, n, contaminant)
}

/// Smallest `n ≥ 2` whose expected statistic at contamination `f` exceeds the
/// `level` critical value at that `n`.
///
/// Doubling finds a bracket and bisection the first crossing inside it. With
/// simulated critical values the crossing is subject to their Monte Carlo error.
pub fn min_n_for_significance(
    kind: StatisticKind,
    f: f64,
    level: f64,
    calibrator: &Calibrator,
    contaminant: &ContaminantDistribution,
    cap: u64,
) -> Result<u64> {
    check_planning_kind(kind)?;
    if !(f > 0.0 && f <= 1.0) {
        return Err(Error::InvalidProportion(f));
    }
    let exceeds = |n: u64| -> Result<bool> {
        let expected = expected_closed_form(kind, n, f, contaminant)?.value;
        Ok(expected > calibrator.threshold(kind, n, level)?)
    };
    let mut lo = 1u64;
    let mut hi = 2u64;
    while !exceeds(hi)? {
        if hi >= cap {
            return Err(Error::ExceedsSearchCap { cap });
        }
        lo = hi;
        hi = hi.saturating_mul(2).min(cap);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if exceeds(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
