//! Cumulative growth ratios and the distribution fits run over them.

mod histogram;
mod ks;
mod lognormal;
mod powerlaw;
mod timeline;

use thiserror::Error;

pub use histogram::{histogram, write_histogram_csv, Binning, HistRow};
pub use ks::{ks_distance, normal_cdf};
pub use lognormal::{fit_count_ratio_lognormal, fit_lognormal, LogNormalFit};
pub use powerlaw::{alpha_mle, fit_powerlaw, PowerLawFit, XMinMode};
pub use timeline::{
    build_timeline, build_window_timeline, ratio_samples, RatioClass, RatioSampleSet, TopicTimeline,
};

pub use lognormal::{DEFAULT_BOOTSTRAP, MIN_SAMPLES as LOGNORMAL_MIN_SAMPLES};
pub use powerlaw::MIN_SAMPLES as POWERLAW_MIN_SAMPLES;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum StatsError {
    #[error("frame ({i}, {j}) must satisfy i > j >= 1")]
    BadFrame { i: usize, j: usize },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("samples have zero spread")]
    DegenerateSamples,
    #[error("no sample lies strictly above x_min = {x_min}")]
    AllBelowCutoff { x_min: f64 },
    #[error("sample {0} is not a positive finite number")]
    NonPositive(f64),
    #[error("empty input")]
    EmptyInput,
    #[error("bin width or base out of range")]
    BadBinning,
}
