use std::io::Write;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::market_data::ReturnSeries;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodogramResult {
    /// Fourier frequencies `k/n`, cycles per sample, `k = 0..=n/2`.
    pub frequencies: Vec<f64>,
    pub power: Vec<f64>,
    /// Samples transformed; always the full series length.
    pub n_used: usize,
}

impl PeriodogramResult {
    /// `frequency,power`
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "frequency,power")?;
        for (f, p) in self.frequencies.iter().zip(&self.power) {
            writeln!(out, "{f},{p}")?;
        }
        Ok(())
    }

    /// One-sided power weighted so that the sum equals `Σ (x - x̄)²`.
    pub fn total_power(&self) -> f64 {
        let last = self.power.len() - 1;
        let even = self.n_used.is_multiple_of(2);
        self.power
            .iter()
            .enumerate()
            .map(|(k, p)| if k == 0 || (even && k == last) { *p } else { 2.0 * p })
            .sum()
    }
}

/// Power periodogram `|DFT(x - x̄)|² / n` at every non-negative Fourier
/// frequency. The FFT handles any length, so nothing is padded or cut.
pub fn periodogram(series: &ReturnSeries) -> Result<PeriodogramResult> {
    let xs = series.values();
    let n = xs.len();
    if n < 8 {
        return Err(Error::TooShort { needed: 8, got: n });
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = xs.iter().map(|x| Complex::new(x - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let power = buf[..=half].iter().map(|c| c.norm_sqr() / n as f64).collect();
    let frequencies = (0..=half).map(|k| k as f64 / n as f64).collect();
    Ok(PeriodogramResult {
        frequencies,
        power,
        n_used: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_has_no_power() {
        let s = ReturnSeries::from_values(vec![3.5; 16]).unwrap();
        let p = periodogram(&s).unwrap();
        assert!(p.power.iter().all(|&v| v.abs() < 1e-24));
        assert_eq!(p.frequencies.len(), 9);
        assert_eq!(*p.frequencies.last().unwrap(), 0.5);
    }

    #[test]
    fn single_tone_peak() {
        let n = 1000;
        let xs = (0..n)
            .map(|t| (2.0 * std::f64::consts::PI * 0.1 * t as f64).cos())
            .collect();
        let p = periodogram(&ReturnSeries::from_values(xs).unwrap()).unwrap();
        let argmax = (0..p.power.len())
            .max_by(|&a, &b| p.power[a].total_cmp(&p.power[b]))
            .unwrap();
        assert_eq!(p.frequencies[argmax], 0.1);
    }

    #[test]
    fn odd_lengths_keep_every_sample() {
        let xs: Vec<f64> = (0..37).map(|i| ((i * i) % 11) as f64).collect();
        let p = periodogram(&ReturnSeries::from_values(xs).unwrap()).unwrap();
        assert_eq!(p.n_used, 37);
        assert_eq!(p.frequencies.len(), 19);
        assert!(p.frequencies.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn too_short() {
        let s = ReturnSeries::from_values(vec![1.0; 7]).unwrap();
        assert!(matches!(periodogram(&s), Err(Error::TooShort { .. })));
    }
}
