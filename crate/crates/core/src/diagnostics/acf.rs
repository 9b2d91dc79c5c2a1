use std::io::Write;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::market_data::ReturnSeries;
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcfResult {
    pub lags: Vec<usize>,
    pub acf: Vec<f64>,
    /// Half-width of the 95% white-noise band, `1.96/√n`.
    pub ci_halfwidth: f64,
}

impl AcfResult {
    /// `lag,acf,ci_lo,ci_hi`
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "lag,acf,ci_lo,ci_hi")?;
        for (lag, r) in self.lags.iter().zip(&self.acf) {
            writeln!(out, "{lag},{r},{},{}", -self.ci_halfwidth, self.ci_halfwidth)?;
        }
        Ok(())
    }
}

/// Biased sample autocorrelation for lags `0..=max_lag`.
pub fn acf(series: &ReturnSeries, max_lag: usize) -> Result<AcfResult> {
    let xs = series.values();
    let n = xs.len();
    if max_lag == 0 {
        return Err(invalid("max_lag must be at least 1"));
    }
    if n <= max_lag {
        return Err(Error::TooShort {
            needed: max_lag + 1,
            got: n,
        });
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = xs.iter().map(|x| x - mean).collect();
    let denom: f64 = centered.iter().map(|d| d * d).sum();
    if denom == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let acf = par::map_indexed(max_lag + 1, |k| {
        if k == 0 {
            return 1.0;
        }
        let num: f64 = centered[..n - k]
            .iter()
            .zip(&centered[k..])
            .map(|(a, b)| a * b)
            .sum();
        (num / denom).clamp(-1.0, 1.0)
    });
    Ok(AcfResult {
        lags: (0..=max_lag).collect(),
        acf,
        ci_halfwidth: 1.96 / (n as f64).sqrt(),
    })
}
