use std::io::Write;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::market_data::ReturnSeries;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramResult {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub normalized_density: Vec<f64>,
    /// All values identical; a single narrow bin is reported.
    pub degenerate: bool,
}

impl HistogramResult {
    /// `bin_lo,bin_hi,count,density`
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "bin_lo,bin_hi,count,density")?;
        for (i, (c, d)) in self.counts.iter().zip(&self.normalized_density).enumerate() {
            writeln!(out, "{},{},{c},{d}", self.bin_edges[i], self.bin_edges[i + 1])?;
        }
        Ok(())
    }

    pub fn integral(&self) -> f64 {
        self.normalized_density
            .iter()
            .zip(self.bin_edges.windows(2))
            .map(|(d, e)| d * (e[1] - e[0]))
            .sum()
    }
}

/// Equal-width histogram on `[min, max]`; the last bin is closed on the
/// right. Densities integrate to one.
pub fn histogram(series: &ReturnSeries, n_bins: usize) -> Result<HistogramResult> {
    let xs = series.values();
    if xs.is_empty() {
        return Err(Error::EmptyInput);
    }
    if n_bins == 0 {
        return Err(invalid("n_bins must be at least 1"));
    }
    let n = xs.len() as f64;
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        let eps = 1e-9 * lo.abs().max(1.0);
        let edges = vec![lo - 0.5 * eps, lo + 0.5 * eps];
        let width = edges[1] - edges[0];
        return Ok(HistogramResult {
            bin_edges: edges,
            counts: vec![xs.len() as u64],
            normalized_density: vec![1.0 / width],
            degenerate: true,
        });
    }
    let width = (hi - lo) / n_bins as f64;
    let mut edges: Vec<f64> = (0..=n_bins).map(|i| lo + width * i as f64).collect();
    edges[n_bins] = hi;
    let mut counts = vec![0u64; n_bins];
    for &x in xs {
        let idx = (((x - lo) / width) as usize).min(n_bins - 1);
        counts[idx] += 1;
    }
    let normalized_density = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, e)| c as f64 / (n * (e[1] - e[0])))
        .collect();
    Ok(HistogramResult {
        bin_edges: edges,
        counts,
        normalized_density,
        degenerate: false,
    })
}
