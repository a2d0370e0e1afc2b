//! Contaminated-sample generation and the statistic/ECP grid over sample
//! sizes and contamination levels.

use serde::{Deserialize, Serialize};

use crate::contamination::{
    check_proportion, mixture_array, uniform_contaminant, ContaminantDistribution,
};
use crate::critical::Calibrator;
use crate::digits::DigitCounts;
use crate::ecp::{ecp_closed_form, ecp_simulated, EcpEstimate, SearchConfig};
use crate::error::{Error, Result};
use crate::sampling::{
    derive_seed, multinomial_into, replicate_rng, simulate_statistics, GENERATOR_VERSION,
};
use crate::statistics::StatisticKind;

pub use crate::critical::{
    chi2_quantile, null_critical_value, null_critical_values, CriticalValueMethod,
    CriticalValueTable, LevelThreshold, MIN_CALIBRATION_REPLICATIONS,
};

/// Default replications per grid cell.
pub const DEFAULT_GRID_REPLICATIONS: usize = 100_000;

/// One multinomial sample of `n` first digits at contamination `f`.
pub fn sample_counts(
    n: u64,
    f: f64,
    contaminant: &ContaminantDistribution,
    seed: u64,
) -> Result<DigitCounts> {
    if n < 1 {
        return Err(Error::InvalidSampleSize { n, min: 1 });
    }
    check_proportion(f)?;
    let probs = mixture_array(f, &contaminant.delta());
    let mut counts = vec![0u64; probs.len()];
    multinomial_into(&mut replicate_rng(seed, 0), n, &probs, &mut counts);
    Ok(DigitCounts::new(counts))
}

/// Sizes, contamination levels and statistics of a simulation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub sizes: Vec<u64>,
    pub fractions: Vec<f64>,
    pub replications: usize,
    pub seed: u64,
    pub kinds: Vec<StatisticKind>,
    pub contaminant: ContaminantDistribution,
}

impl GridSpec {
    /// Four sizes from 100 to 100000 and six contamination levels, all statistics.
    pub fn reference_grid(replications: usize, seed: u64) -> Self {
        Self {
            sizes: vec![100, 1000, 10_000, 100_000],
            fractions: vec![0.01, 0.05, 0.25, 0.75, 0.95, 0.99],
            replications,
            seed,
            kinds: StatisticKind::ALL.to_vec(),
            contaminant: uniform_contaminant(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(Error::TooFewReplications {
                got: self.replications,
                min: 2,
            });
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| n < 1) {
            return Err(Error::InvalidSampleSize { n, min: 1 });
        }
        self.fractions
            .iter()
            .try_for_each(|&f| check_proportion(f))?;
        if self.sizes.is_empty() || self.fractions.is_empty() || self.kinds.is_empty() {
            return Err(Error::InvalidConfig("grid has no cells".into()));
        }
        Ok(())
    }
}

/// Position of a value relative to the null 95th and 99th percentiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Significance {
    None,
    P95,
    P99,
}

impl Significance {
    pub fn classify(value: f64, p95: f64, p99: f64) -> Self {
        if value > p99 {
            Self::P99
        } else if value > p95 {
            Self::P95
        } else {
            Self::None
        }
    }

    /// `†` above the 95th percentile, `*` above the 99th.
    pub fn marker(self) -> &'static str {
        match self {
            Self::None => "",
            Self::P95 => "†",
            Self::P99 => "*",
        }
    }
}

/// Settings for everything in a grid run besides the cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridOptions {
    /// Null replications for significance markers.
    pub calibration_replications: usize,
    pub search: SearchConfig,
}

impl GridOptions {
    pub fn for_spec(spec: &GridSpec) -> Self {
        Self {
            calibration_replications: spec
                .replications
                .max(crate::critical::MIN_CALIBRATION_REPLICATIONS),
            search: SearchConfig::with_seed(derive_seed(
                spec.seed,
                &[u64::from_le_bytes(*b"search__")],
            )),
        }
    }
}

/// One (statistic, n, f) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub kind: StatisticKind,
    pub n: u64,
    pub f: f64,
    pub mean: f64,
    pub std_error: f64,
    pub significance: Option<Significance>,
    /// ECP of the mean: closed form for CHI2/SSD/MAD, Taylor form for ED,
    /// simulated for KS/Kuiper/CvM. Its standard error combines the mean's
    /// Monte Carlo error with that of any search.
    pub ecp: Option<EcpEstimate>,
    /// Simulated ECP of the ED mean.
    pub ecp_simulated: Option<EcpEstimate>,
    pub errors: Vec<String>,
}

impl GridCell {
    /// ECP used to judge recovery of the true `f`.
    pub fn recovered(&self) -> Option<&EcpEstimate> {
        self.ecp_simulated.as_ref().or(self.ecp.as_ref())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub spec: GridSpec,
    pub options: GridOptions,
    pub generator: String,
    pub cells: Vec<GridCell>,
}

impl GridReport {
    pub fn failed_cells(&self) -> usize {
        self.cells.iter().filter(|c| !c.errors.is_empty()).count()
    }

    pub fn cell(&self, kind: StatisticKind, n: u64, f: f64) -> Option<&GridCell> {
        self.cells
            .iter()
            .find(|c| c.kind == kind && c.n == n && c.f == f)
    }
}

/// Adds the mean's Monte Carlo error to an estimate's own standard error.
fn with_mean_error(mut est: EcpEstimate, mean_se: f64) -> EcpEstimate {
    if let Some(slope) = est.slope.filter(|s| *s > 0.0) {
        let from_mean = mean_se / slope;
        est.std_error = Some(est.std_error.unwrap_or(0.0).hypot(from_mean));
    }
    est
}

fn run_cell(
    kind: StatisticKind,
    n: u64,
    f: f64,
    (mean, se): (f64, f64),
    spec: &GridSpec,
    calibrator: &Calibrator,
    search: &SearchConfig,
) -> GridCell {
    let mut errors = Vec::new();
    let significance = match calibrator.table(kind, n, &[0.95, 0.99]) {
        Ok(t) => Some(Significance::classify(
            mean,
            t.levels[0].threshold,
            t.levels[1].threshold,
        )),
        Err(e) => {
            errors.push(format!("critical values: {e}"));
            None
        }
    };
    let mut keep = |r: Result<EcpEstimate>, label: &str| match r {
        Ok(est) => Some(with_mean_error(est, se)),
        Err(e) => {
            errors.push(format!("{label}: {e}"));
            None
        }
    };
    let (ecp, ecp_simulated) = match kind {
        StatisticKind::Chi2 | StatisticKind::Ssd | StatisticKind::Mad => (
            keep(ecp_closed_form(kind, mean, n, &spec.contaminant), "ecp"),
            None,
        ),
        StatisticKind::Ed => (
            keep(ecp_closed_form(kind, mean, n, &spec.contaminant), "ecp"),
            keep(
                ecp_simulated(kind, mean, n, &spec.contaminant, search),
                "simulated ecp",
            ),
        ),
        _ => (
            keep(
                ecp_simulated(kind, mean, n, &spec.contaminant, search),
                "ecp",
            ),
            None,
        ),
    };
    GridCell {
        kind,
        n,
        f,
        mean,
        std_error: se,
        significance,
        ecp,
        ecp_simulated,
        errors,
    }
}

/// Simulates every (n, f) cell of `spec` and recovers the ECP of each
/// statistic's mean. Failures are recorded per cell.
pub fn run_grid(spec: &GridSpec) -> Result<GridReport> {
    run_grid_with(spec, GridOptions::for_spec(spec))
}

pub fn run_grid_with(spec: &GridSpec, options: GridOptions) -> Result<GridReport> {
    spec.validate()?;
    options.search.validate()?;
    let calibrator = Calibrator::new(
        options.calibration_replications,
        derive_seed(spec.seed, &[0]),
    )?;
    let delta = spec.contaminant.delta();
    let mut cells = Vec::with_capacity(spec.sizes.len() * spec.fractions.len() * spec.kinds.len());
    for &n in &spec.sizes {
        for &f in &spec.fractions {
            let seed = derive_seed(spec.seed, &[n, f.to_bits()]);
            let reps = simulate_statistics(n, &mixture_array(f, &delta), spec.replications, seed);
            for &kind in &spec.kinds {
                let moments = reps.mean_and_se(kind);
                cells.push(run_cell(
                    kind,
                    n,
                    f,
                    moments,
                    spec,
                    &calibrator,
                    &options.search,
                ));
            }
        }
    }
    Ok(GridReport {
        spec: spec.clone(),
        options,
        generator: GENERATOR_VERSION.to_string(),
        cells,
    })
}
