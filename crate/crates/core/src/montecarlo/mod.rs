//! Monte Carlo ensembles, histogram estimates and distribution validation.

mod engine;
mod histogram;
mod validation;

pub use engine::{
    draw_channels, mean_variance, parallel_draws, run, simulate, summarize, EnsembleSamples, EnsembleStats,
    ExperimentSpec, HistogramSpec, OutageBasis, PhiPolicy, CHUNK,
};
pub use histogram::{
    bhattacharyya, histogram_estimate, histogram_from_cdf, ks_critical, ks_statistic, Bhattacharyya, Histogram,
    DISJOINT_DISTANCE,
};
pub use validation::{
    random_correlation_matched, validate_equal_sum, ValidationOptions, ValidationReport, ValidationTrial,
};
