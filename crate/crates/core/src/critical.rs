//! Null critical values: analytic chi-squared quantiles, the KS rule of thumb,
//! an independent-cell approximation for SSD/ED, and Monte Carlo quantiles of
//! the f = 0 statistic distribution.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::digits::benford_array;
use crate::error::{Error, Result};
use crate::root::bisect;
use crate::sampling::{derive_seed, simulate_statistics, GENERATOR_VERSION};
use crate::statistics::StatisticKind;

/// Smallest replication count accepted for Monte Carlo calibration.
pub const MIN_CALIBRATION_REPLICATIONS: usize = 1000;

/// Sample size simulated by [`CriticalValueMethod::ScaledMonteCarlo`].
pub const SCALING_REFERENCE_N: u64 = 100;

const QUANTILE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticalValueMethod {
    /// Chi-squared distribution with `k − 1` degrees of freedom.
    Analytic,
    /// Empirical quantile of simulated Benford samples.
    MonteCarlo,
    /// `c(level)/√n` for KS.
    Formula,
    /// `n·SSD` treated as `Σ B_d(1 − B_d) χ²₁` with independent cells.
    IndependentCells,
    /// Monte Carlo quantile at `n = 100`, rescaled by `√(100/n)`.
    ScaledMonteCarlo,
}

impl CriticalValueMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::MonteCarlo => "monte-carlo",
            Self::Formula => "formula",
            Self::IndependentCells => "independent-cells",
            Self::ScaledMonteCarlo => "scaled-monte-carlo",
        }
    }

    pub fn supports(self, kind: StatisticKind) -> bool {
        match self {
            Self::Analytic => kind == StatisticKind::Chi2,
            Self::MonteCarlo => true,
            Self::Formula => kind == StatisticKind::Ks,
            Self::IndependentCells => matches!(kind, StatisticKind::Ssd | StatisticKind::Ed),
            Self::ScaledMonteCarlo => matches!(
                kind,
                StatisticKind::Mad | StatisticKind::Ed | StatisticKind::Ks | StatisticKind::Kuiper
            ),
        }
    }

    /// Whether thresholds depend on replications and seed.
    pub fn is_simulated(self) -> bool {
        matches!(self, Self::MonteCarlo | Self::ScaledMonteCarlo)
    }

    /// Method used when none is requested.
    pub fn default_for(kind: StatisticKind) -> Self {
        if kind == StatisticKind::Chi2 {
            Self::Analytic
        } else {
            Self::MonteCarlo
        }
    }
}

impl std::fmt::Display for CriticalValueMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CriticalValueMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "analytic" => Ok(Self::Analytic),
            "monte-carlo" | "mc" => Ok(Self::MonteCarlo),
            "formula" => Ok(Self::Formula),
            "independent-cells" => Ok(Self::IndependentCells),
            "scaled-monte-carlo" | "scaled" => Ok(Self::ScaledMonteCarlo),
            other => Err(Error::InvalidConfig(format!(
                "unknown critical-value method {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelThreshold {
    pub level: f64,
    pub threshold: f64,
}

/// Null quantiles of one statistic at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalValueTable {
    pub kind: StatisticKind,
    pub n: u64,
    pub method: CriticalValueMethod,
    pub levels: Vec<LevelThreshold>,
    pub replications: Option<usize>,
    pub seed: Option<u64>,
    pub generator: Option<String>,
}

impl CriticalValueTable {
    pub fn threshold(&self, level: f64) -> Option<f64> {
        self.levels
            .iter()
            .find(|l| l.level == level)
            .map(|l| l.threshold)
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidLevel(level))
    }
}

/// Chi-squared quantile, found by bisection on the CDF to 1e-9.
pub fn chi2_quantile(df: f64, level: f64) -> Result<f64> {
    check_level(level)?;
    let dist = ChiSquared::new(df)
        .map_err(|e| Error::InvalidConfig(format!("chi-squared df {df}: {e}")))?;
    let mut hi = df + 10.0 * (2.0 * df).sqrt() + 10.0;
    while dist.cdf(hi) < level {
        hi *= 2.0;
    }
    Ok(bisect(|x| dist.cdf(x) - level, 0.0, hi, QUANTILE_TOLERANCE, 200)?.x)
}

/// KS rule-of-thumb coefficient `c(level)` in `c/√n`.
///
/// The customary two-decimal constants are used at 0.90, 0.95 and 0.99;
/// other levels use the asymptotic `sqrt(−ln((1 − level)/2)/2)`.
pub fn ks_formula_coefficient(level: f64) -> Result<f64> {
    check_level(level)?;
    let tabled = [(0.90, 1.22), (0.95, 1.36), (0.99, 1.63)];
    Ok(tabled
        .iter()
        .find(|(l, _)| (*l - level).abs() < 1e-12)
        .map(|&(_, c)| c)
        .unwrap_or_else(|| (-0.5 * ((1.0 - level) / 2.0).ln()).sqrt()))
}

/// `P(Σ w_j Z_j² > x)` for independent standard normals (Imhof's inversion).
pub fn weighted_chi2_sf(weights: &[f64], x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let k = weights.len() as f64;
    let log_root: f64 = weights.iter().map(|w| 0.5 * w.ln()).sum();
    // Truncation error of the tail is below 2/(k·Πw^½·U^{k/2}).
    let upper = ((2.0 / (k * 1e-11)).ln() - log_root) * 2.0 / k;
    let upper = upper.exp().max(50.0);
    // The phase turns at most (x + Σw)/2 per unit of u.
    let h = (PI / (10.0 * (x + weights.iter().sum::<f64>()))).min(upper / 2000.0);
    let steps = 2 * ((upper / h / 2.0).ceil() as usize);
    let integrand = |u: f64| -> f64 {
        if u == 0.0 {
            return 0.5 * (weights.iter().sum::<f64>() - x);
        }
        let theta = 0.5 * weights.iter().map(|w| (w * u).atan()).sum::<f64>() - 0.5 * x * u;
        let log_rho: f64 = weights.iter().map(|w| 0.25 * (w * w * u * u).ln_1p()).sum();
        theta.sin() / (u * log_rho.exp())
    };
    let h = upper / steps as f64;
    let mut acc = integrand(0.0) + integrand(upper);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * integrand(i as f64 * h);
    }
    (0.5 + acc * h / (3.0 * PI)).clamp(0.0, 1.0)
}

/// Quantile of `Σ w_j Z_j²`.
pub fn weighted_chi2_quantile(weights: &[f64], level: f64) -> Result<f64> {
    check_level(level)?;
    if weights.is_empty() || weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
        return Err(Error::InvalidConfig("weights must be positive".into()));
    }
    let base = chi2_quantile(weights.len() as f64, level)?;
    let w_min = weights.iter().copied().fold(f64::INFINITY, f64::min);
    let w_max = weights.iter().copied().fold(0.0, f64::max);
    let (lo, hi) = (w_min * base, w_max * base);
    if hi - lo <= QUANTILE_TOLERANCE {
        return Ok(0.5 * (lo + hi));
    }
    let g = |x: f64| (1.0 - level) - weighted_chi2_sf(weights, x);
    Ok(bisect(g, lo, hi, QUANTILE_TOLERANCE * base, 200)?.x)
}

fn independent_cells_quantile(level: f64) -> Result<f64> {
    let weights: Vec<f64> = benford_array().iter().map(|b| b * (1.0 - b)).collect();
    weighted_chi2_quantile(&weights, level)
}

fn check_replications(replications: usize) -> Result<()> {
    if replications < MIN_CALIBRATION_REPLICATIONS {
        return Err(Error::TooFewReplications {
            got: replications,
            min: MIN_CALIBRATION_REPLICATIONS,
        });
    }
    Ok(())
}

/// Monte Carlo null quantiles for every statistic at `n`.
fn monte_carlo_quantiles(n: u64, levels: &[f64], replications: usize, seed: u64) -> [Vec<f64>; 7] {
    let null = simulate_statistics(n, &benford_array(), replications, derive_seed(seed, &[n]));
    StatisticKind::ALL.map(|kind| null.quantiles(kind, levels))
}

fn threshold_without_simulation(
    kind: StatisticKind,
    n: u64,
    level: f64,
    method: CriticalValueMethod,
) -> Result<f64> {
    match method {
        CriticalValueMethod::Analytic => chi2_quantile((benford_array().len() - 1) as f64, level),
        CriticalValueMethod::Formula => Ok(ks_formula_coefficient(level)? / (n as f64).sqrt()),
        CriticalValueMethod::IndependentCells => {
            let ssd = independent_cells_quantile(level)? / n as f64;
            Ok(if kind == StatisticKind::Ed {
                ssd.sqrt()
            } else {
                ssd
            })
        }
        CriticalValueMethod::MonteCarlo | CriticalValueMethod::ScaledMonteCarlo => {
            unreachable!("simulated separately")
        }
    }
}

/// Null critical values of `kind` at sample size `n`.
pub fn null_critical_values(
    kind: StatisticKind,
    n: u64,
    levels: &[f64],
    method: CriticalValueMethod,
    replications: usize,
    seed: u64,
) -> Result<CriticalValueTable> {
    let calibrator = Calibrator::new(replications, seed)?.with_method(kind, method)?;
    calibrator.table(kind, n, levels)
}

/// Single null critical value.
pub fn null_critical_value(
    kind: StatisticKind,
    n: u64,
    level: f64,
    method: CriticalValueMethod,
    replications: usize,
    seed: u64,
) -> Result<f64> {
    let table = null_critical_values(kind, n, &[level], method, replications, seed)?;
    Ok(table.levels[0].threshold)
}

type CacheKey = (StatisticKind, u64, u64);

/// Critical-value source with a per-kind method choice and a memo of
/// computed thresholds. Monte Carlo thresholds for all kinds at one `n`
/// come from the same simulated null sample.
#[derive(Debug, Clone)]
pub struct Calibrator {
    replications: usize,
    seed: u64,
    methods: [CriticalValueMethod; 7],
    cache: Arc<Mutex<HashMap<CacheKey, f64>>>,
}

impl Calibrator {
    pub fn new(replications: usize, seed: u64) -> Result<Self> {
        check_replications(replications)?;
        Ok(Self {
            replications,
            seed,
            methods: StatisticKind::ALL.map(CriticalValueMethod::default_for),
            cache: Arc::default(),
        })
    }

    pub fn with_method(mut self, kind: StatisticKind, method: CriticalValueMethod) -> Result<Self> {
        if !method.supports(kind) {
            return Err(Error::UnsupportedMethod {
                method: method.to_string(),
                kind: kind.to_string(),
            });
        }
        self.methods[kind.index()] = method;
        Ok(self)
    }

    pub fn method(&self, kind: StatisticKind) -> CriticalValueMethod {
        self.methods[kind.index()]
    }

    pub fn replications(&self) -> usize {
        self.replications
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn threshold(&self, kind: StatisticKind, n: u64, level: f64) -> Result<f64> {
        Ok(self.table(kind, n, &[level])?.levels[0].threshold)
    }

    pub fn table(&self, kind: StatisticKind, n: u64, levels: &[f64]) -> Result<CriticalValueTable> {
        if n < 1 {
            return Err(Error::InvalidSampleSize { n, min: 1 });
        }
        levels.iter().try_for_each(|&l| check_level(l))?;
        let method = self.method(kind);
        let key = |k: StatisticKind, l: f64| (k, n, l.to_bits());

        let missing: Vec<f64> = {
            let cache = self.cache.lock().expect("calibration cache poisoned");
            levels
                .iter()
                .copied()
                .filter(|&l| !cache.contains_key(&key(kind, l)))
                .collect()
        };
        if !missing.is_empty() {
            let mut computed = Vec::new();
            if method == CriticalValueMethod::ScaledMonteCarlo {
                // Thresholds of 1/√n statistics, extrapolated from one simulated size.
                let reference = self.monte_carlo_table(kind, SCALING_REFERENCE_N, &missing)?;
                let scale = (SCALING_REFERENCE_N as f64 / n as f64).sqrt();
                for (&l, t) in missing.iter().zip(reference) {
                    computed.push((key(kind, l), t * scale));
                }
            } else if method == CriticalValueMethod::MonteCarlo {
                let all = monte_carlo_quantiles(n, &missing, self.replications, self.seed);
                for k in StatisticKind::ALL {
                    if self.method(k) == CriticalValueMethod::MonteCarlo {
                        for (&l, &t) in missing.iter().zip(&all[k.index()]) {
                            computed.push((key(k, l), t));
                        }
                    }
                }
            } else {
                for &l in &missing {
                    computed.push((
                        key(kind, l),
                        threshold_without_simulation(kind, n, l, method)?,
                    ));
                }
            }
            self.cache
                .lock()
                .expect("calibration cache poisoned")
                .extend(computed);
        }

        let cache = self.cache.lock().expect("calibration cache poisoned");
        let simulated = method.is_simulated();
        Ok(CriticalValueTable {
            kind,
            n,
            method,
            levels: levels
                .iter()
                .map(|&level| LevelThreshold {
                    level,
                    threshold: cache[&key(kind, level)],
                })
                .collect(),
            replications: simulated.then_some(self.replications),
            seed: simulated.then_some(self.seed),
            generator: simulated.then(|| GENERATOR_VERSION.to_string()),
        })
    }

    /// Plain Monte Carlo thresholds of `kind` at `n`, whatever method `kind` is set to.
    fn monte_carlo_table(&self, kind: StatisticKind, n: u64, levels: &[f64]) -> Result<Vec<f64>> {
        let mut plain = self.clone();
        plain.methods[kind.index()] = CriticalValueMethod::MonteCarlo;
        let table = plain.table(kind, n, levels)?;
        Ok(table.levels.iter().map(|l| l.threshold).collect())
    }
}
