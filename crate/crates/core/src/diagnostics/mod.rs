//! Time-series diagnostics: autocorrelation, periodogram, augmented
//! Dickey-Fuller test and histograms. All are deterministic functions of
//! the input series.

mod acf;
mod adf;
mod histogram;
mod periodogram;

pub use acf::{acf, AcfResult};
pub use adf::{adf_test, critical_value, default_max_lags, AdfResult, Level};
pub use histogram::{histogram, HistogramResult};
pub use periodogram::{periodogram, PeriodogramResult};

use serde::Serialize;

use crate::error::Result;
use crate::market_data::ReturnSeries;

/// All four diagnostics for one series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsBundle {
    pub acf: AcfResult,
    pub periodogram: PeriodogramResult,
    pub adf: AdfResult,
    pub histogram: HistogramResult,
}

pub fn diagnose(
    series: &ReturnSeries,
    max_lag: usize,
    n_bins: usize,
    adf_max_lags: Option<usize>,
) -> Result<DiagnosticsBundle> {
    let lags = adf_max_lags.unwrap_or_else(|| default_max_lags(series.len()));
    Ok(DiagnosticsBundle {
        acf: acf(series, max_lag)?,
        periodogram: periodogram(series)?,
        adf: adf_test(series, lags)?,
        histogram: histogram(series, n_bins)?,
    })
}
