//! Superstatistical return generator: piecewise-constant variance regimes
//! drawn from the mixing law, with Gaussian returns inside each regime.

use chrono::{DateTime, Duration, Utc};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::densities::ModelSpec;
use crate::error::{invalid, Error, Result};
use crate::market_data::{PriceSeries, ReturnKind, ReturnSeries, Timescale};
use crate::rng::stream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub model: ModelSpec,
    pub n_points: usize,
    /// Observations per θ regime.
    pub block_length: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSeries {
    pub returns: ReturnSeries,
    /// One θ per block, in order; block `j` covers observations
    /// `j*block_length .. (j+1)*block_length`.
    pub theta_path: Vec<f64>,
    pub block_length: usize,
}

impl SyntheticSeries {
    /// Latent θ in force at observation `t`.
    pub fn theta_at(&self, t: usize) -> f64 {
        self.theta_path[t / self.block_length]
    }
}

pub fn gen_superstat(config: &GeneratorConfig) -> Result<SyntheticSeries> {
    config.model.validate()?;
    if config.n_points == 0 {
        return Err(invalid("n_points must be at least 1"));
    }
    if config.block_length == 0 {
        return Err(invalid("block_length must be at least 1"));
    }
    let mut rng = stream(config.seed);
    let mu = config.model.mu;
    let n_blocks = config.n_points.div_ceil(config.block_length);
    let mut theta_path = Vec::with_capacity(n_blocks);
    let mut values = Vec::with_capacity(config.n_points);
    for j in 0..n_blocks {
        let theta = config.model.sample_prior(&mut rng);
        theta_path.push(theta);
        let sd = theta.sqrt();
        let len = config.block_length.min(config.n_points - j * config.block_length);
        for _ in 0..len {
            let z: f64 = StandardNormal.sample(&mut rng);
            values.push(mu + sd * z);
        }
    }
    Ok(SyntheticSeries {
        returns: ReturnSeries::new(values, Timescale::Raw, ReturnKind::Signed)?,
        theta_path,
        block_length: config.block_length,
    })
}

fn timescale_for(step: Duration) -> Timescale {
    Timescale::BARS
        .into_iter()
        .find(|t| t.seconds() == Some(step.num_seconds()) && step.subsec_nanos() == 0)
        .unwrap_or(Timescale::Raw)
}

/// Integrates returns into prices `P_{t+1} = P_t e^{r_t}` on a regular
/// clock starting at `start`.
pub fn gen_prices_from_returns(
    returns: &ReturnSeries,
    p0: f64,
    start: DateTime<Utc>,
    step: Duration,
) -> Result<PriceSeries> {
    if !(p0 > 0.0 && p0.is_finite()) {
        return Err(invalid("p0 must be positive"));
    }
    if step <= Duration::zero() {
        return Err(invalid("step must be positive"));
    }
    let n = returns.len() + 1;
    let mut prices = Vec::with_capacity(n);
    prices.push(p0);
    let mut p = p0;
    for (i, r) in returns.values().iter().enumerate() {
        p *= r.exp();
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::PriceOverflow { index: i + 1 });
        }
        prices.push(p);
    }
    let timestamps = (0..n)
        .map(|i| {
            step.checked_mul(i as i32)
                .and_then(|d| start.checked_add_signed(d))
                .ok_or_else(|| invalid("timestamp out of range"))
        })
        .collect::<Result<Vec<_>>>()?;
    PriceSeries::new(timestamps, prices, timescale_for(step))
}
