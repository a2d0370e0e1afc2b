//! Benford first-digit divergence statistics and Equivalent Contamination
//! Proportion (ECP) estimation.

pub mod contamination;
pub mod critical;
pub mod digits;
pub mod ecp;
pub mod error;
pub mod expectation;
pub mod normal;
pub mod root;
pub mod sampling;
pub mod simulation;
pub mod statistics;
pub mod sum;

pub use contamination::{
    degenerate_contaminant, mixture_probabilities, uniform_contaminant, ContaminantDistribution,
    MixtureModel,
};
pub use digits::{
    count_digits, extract_first_digit, frequencies, DigitCounts, FrequencyVector, IngestPolicy,
};
pub use ecp::{estimate_ecp, Clamp, EcpEstimate, EcpMethod, SearchConfig};
pub use error::{Error, Result};
pub use statistics::{StatisticKind, StatisticValue};
