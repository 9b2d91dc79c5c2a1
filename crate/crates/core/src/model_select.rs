//! Marginal likelihoods by prior-draw Monte Carlo, Bayes factors, and the
//! repeated-draw preference protocol.
//!
//! Prior draws are generated in fixed chunks of [`CHUNK`], chunk `c` using
//! its own stream of the evidence seed. Chunks may run on any thread; their
//! log-sum-exp accumulators are merged in chunk order, so estimates are
//! bit-identical for any thread count, and the first `K` draws of a run
//! are the same whatever the total draw count.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::densities::{Law, ModelSpec, SufficientStats};
use crate::error::{invalid, Error, Result};
use crate::market_data::ReturnSeries;
use crate::par;
use crate::rng::{chunk_stream, derive_seed};

/// Prior draws per independently seeded chunk.
pub const CHUNK: usize = 4096;

/// Default prior draws per model per Bayes factor.
pub const DEFAULT_DRAWS: usize = 10_000;

/// Default number of Bayes-factor repetitions.
pub const DEFAULT_SERIES: usize = 1000;

/// How the data enter the likelihood.
///
/// `Whole` uses one θ for the entire series. `Blocks(T)` gives each
/// consecutive run of `T` observations its own θ drawn from the prior, so
/// the evidence is a product of per-block marginal likelihoods (the last
/// block may be shorter). `Blocks(n)` with `n ≥ len` equals `Whole`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    Whole,
    Blocks(usize),
}

impl Pooling {
    pub fn partition(&self, data: &ReturnSeries, mu: f64) -> Result<Vec<SufficientStats>> {
        let xs = data.values();
        if xs.is_empty() {
            return Err(Error::EmptyInput);
        }
        match *self {
            Pooling::Whole => Ok(vec![SufficientStats::from_slice(xs, mu)?]),
            Pooling::Blocks(0) => Err(invalid("block length must be at least 1")),
            Pooling::Blocks(t) => xs
                .chunks(t)
                .map(|c| SufficientStats::from_slice(c, mu))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvidenceEstimate {
    pub log_value: f64,
    /// Delta-method standard error of `log_value`.
    pub std_error: f64,
    pub n_draws: usize,
    pub model: ModelSpec,
}

/// Streaming `log Σ exp` with a running maximum, plus the second moment
/// needed for the standard error.
#[derive(Debug, Clone, Copy)]
struct LogSumExp {
    max: f64,
    sum: f64,
    sum_sq: f64,
}

impl LogSumExp {
    const EMPTY: Self = Self {
        max: f64::NEG_INFINITY,
        sum: 0.0,
        sum_sq: 0.0,
    };

    fn push(&mut self, v: f64) {
        if v == f64::NEG_INFINITY {
            return;
        }
        if v > self.max {
            let r = (self.max - v).exp();
            self.sum = self.sum * r + 1.0;
            self.sum_sq = self.sum_sq * r * r + 1.0;
            self.max = v;
        } else {
            let w = (v - self.max).exp();
            self.sum += w;
            self.sum_sq += w * w;
        }
    }

    fn merge(&mut self, other: &Self) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if self.max == f64::NEG_INFINITY {
            *self = *other;
            return;
        }
        let m = self.max.max(other.max);
        let a = (self.max - m).exp();
        let b = (other.max - m).exp();
        self.sum = self.sum * a + other.sum * b;
        self.sum_sq = self.sum_sq * a * a + other.sum_sq * b * b;
        self.max = m;
    }

    /// `(log mean, se of log mean)` over `k` terms.
    fn finish(&self, k: usize) -> Result<(f64, f64)> {
        if self.max == f64::NEG_INFINITY || self.sum == 0.0 {
            return Err(Error::DegenerateEvidence);
        }
        let kf = k as f64;
        let mean = self.sum / kf;
        let var = (self.sum_sq / kf - mean * mean).max(0.0);
        let se = if k > 1 { (var / kf).sqrt() / mean } else { 0.0 };
        Ok((self.max + mean.ln(), se))
    }
}

fn log_likelihood_or_neg_inf(stats: &SufficientStats, theta: f64) -> f64 {
    if !(theta > 0.0 && theta.is_finite()) {
        return f64::NEG_INFINITY;
    }
    let ll = stats.log_likelihood(theta);
    if ll.is_nan() {
        f64::NEG_INFINITY
    } else {
        ll
    }
}

/// Monte-Carlo evidence of a model for pre-partitioned data: one prior
/// draw per term is shared by all blocks, and the per-block log averages
/// are summed.
pub fn evidence_from_stats(
    blocks: &[SufficientStats],
    model: &ModelSpec,
    n_draws: usize,
    seed: u64,
) -> Result<EvidenceEstimate> {
    model.validate()?;
    if n_draws == 0 {
        return Err(invalid("n_draws must be at least 1"));
    }
    if blocks.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n_chunks = n_draws.div_ceil(CHUNK);
    let partials = par::map_indexed(n_chunks, |c| {
        let mut rng = chunk_stream(seed, c as u64);
        let count = CHUNK.min(n_draws - c * CHUNK);
        let mut acc = vec![LogSumExp::EMPTY; blocks.len()];
        for _ in 0..count {
            let theta = model.sample_prior(&mut rng);
            for (a, stats) in acc.iter_mut().zip(blocks) {
                a.push(log_likelihood_or_neg_inf(stats, theta));
            }
        }
        acc
    });
    let mut total = vec![LogSumExp::EMPTY; blocks.len()];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    let mut log_value = 0.0;
    let mut var = 0.0;
    for acc in &total {
        let (lv, se) = acc.finish(n_draws)?;
        log_value += lv;
        var += se * se;
    }
    Ok(EvidenceEstimate {
        log_value,
        std_error: var.sqrt(),
        n_draws,
        model: *model,
    })
}

/// `log (1/K) Σ_k L(θ_k)` with `θ_k` drawn from the model's prior.
pub fn evidence_mc(
    data: &ReturnSeries,
    model: &ModelSpec,
    n_draws: usize,
    seed: u64,
) -> Result<EvidenceEstimate> {
    evidence_mc_pooled(data, model, Pooling::Whole, n_draws, seed)
}

pub fn evidence_mc_pooled(
    data: &ReturnSeries,
    model: &ModelSpec,
    pooling: Pooling,
    n_draws: usize,
    seed: u64,
) -> Result<EvidenceEstimate> {
    let blocks = pooling.partition(data, model.mu)?;
    evidence_from_stats(&blocks, model, n_draws, seed)
}

/// Evidence seeds of the two models in a Bayes factor keyed by `seed`.
pub fn model_seeds(seed: u64) -> (u64, u64) {
    (derive_seed(seed, 1), derive_seed(seed, 2))
}

/// Log Bayes factor with explicit per-model evidence seeds.
pub fn log_bayes_factor_with_seeds(
    data: &ReturnSeries,
    m1: &ModelSpec,
    seed1: u64,
    m2: &ModelSpec,
    seed2: u64,
    pooling: Pooling,
    n_draws: usize,
) -> Result<f64> {
    let e1 = evidence_mc_pooled(data, m1, pooling, n_draws, seed1)?;
    let e2 = evidence_mc_pooled(data, m2, pooling, n_draws, seed2)?;
    Ok(e1.log_value - e2.log_value)
}

fn finite_bf(log_bf: f64) -> Result<f64> {
    let bf = log_bf.exp();
    if bf > 0.0 && bf.is_finite() {
        Ok(bf)
    } else {
        Err(Error::NonFiniteBayesFactor { log_bf })
    }
}

/// Evidence ratio `p(D|m1) / p(D|m2)` over the whole series.
pub fn bayes_factor(
    data: &ReturnSeries,
    m1: &ModelSpec,
    m2: &ModelSpec,
    n_draws: usize,
    seed: u64,
) -> Result<f64> {
    bayes_factor_pooled(data, m1, m2, Pooling::Whole, n_draws, seed)
}

pub fn bayes_factor_pooled(
    data: &ReturnSeries,
    m1: &ModelSpec,
    m2: &ModelSpec,
    pooling: Pooling,
    n_draws: usize,
    seed: u64,
) -> Result<f64> {
    let (s1, s2) = model_seeds(seed);
    finite_bf(log_bayes_factor_with_seeds(data, m1, s1, m2, s2, pooling, n_draws)?)
}

/// Repeated Bayes factors on fixed data, each repetition re-drawing θ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BayesFactorSeries {
    pub values: Vec<f64>,
    pub log_values: Vec<f64>,
    pub m1: ModelSpec,
    pub m2: ModelSpec,
    pub seed: u64,
}

impl BayesFactorSeries {
    /// Wraps precomputed Bayes factors; each must be positive and finite.
    pub fn from_values(values: Vec<f64>, m1: ModelSpec, m2: ModelSpec, seed: u64) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(invalid(format!("Bayes factor {v} is not positive and finite")));
        }
        Ok(Self {
            log_values: values.iter().map(|v| v.ln()).collect(),
            values,
            m1,
            m2,
            seed,
        })
    }

    /// `iter,bf` rows, 1-based.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "iter,bf")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", i + 1, v)?;
        }
        Ok(())
    }
}

pub fn bf_series(
    data: &ReturnSeries,
    m1: &ModelSpec,
    m2: &ModelSpec,
    n_series: usize,
    n_draws: usize,
    seed: u64,
) -> Result<BayesFactorSeries> {
    bf_series_pooled(data, m1, m2, Pooling::Whole, n_series, n_draws, seed)
}

/// Repetition `i` uses `derive_seed(seed, i)` as its Bayes-factor seed.
pub fn bf_series_pooled(
    data: &ReturnSeries,
    m1: &ModelSpec,
    m2: &ModelSpec,
    pooling: Pooling,
    n_series: usize,
    n_draws: usize,
    seed: u64,
) -> Result<BayesFactorSeries> {
    if n_series == 0 {
        return Err(invalid("n_series must be at least 1"));
    }
    m1.validate()?;
    m2.validate()?;
    let b1 = pooling.partition(data, m1.mu)?;
    let b2 = pooling.partition(data, m2.mu)?;
    let log_values = par::try_map_indexed(n_series, |i| {
        let (s1, s2) = model_seeds(derive_seed(seed, i as u64));
        let e1 = evidence_from_stats(&b1, m1, n_draws, s1)?;
        let e2 = evidence_from_stats(&b2, m2, n_draws, s2)?;
        Ok::<_, Error>(e1.log_value - e2.log_value)
    })?;
    let values = log_values
        .iter()
        .map(|&l| finite_bf(l))
        .collect::<Result<Vec<_>>>()?;
    Ok(BayesFactorSeries {
        values,
        log_values,
        m1: *m1,
        m2: *m2,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PreferenceSummary {
    /// Share of repetitions with a Bayes factor strictly above one.
    pub fraction_m1: f64,
    pub mean_bf: f64,
    pub median_bf: f64,
    /// `mean_bf / (1 + mean_bf)`: posterior probability of m1 under equal
    /// model priors.
    pub posterior_prob_m1: f64,
}

pub fn preference_summary(series: &BayesFactorSeries) -> Result<PreferenceSummary> {
    let v = &series.values;
    if v.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = v.len() as f64;
    let fraction_m1 = v.iter().filter(|&&b| b > 1.0).count() as f64 / n;
    let mean_bf = v.iter().sum::<f64>() / n;
    let mut sorted = v.clone();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median_bf = if sorted.len().is_multiple_of(2) {
        0.5 * (sorted[mid - 1] + sorted[mid])
    } else {
        sorted[mid]
    };
    Ok(PreferenceSummary {
        fraction_m1,
        mean_bf,
        median_bf,
        posterior_prob_m1: mean_bf / (1.0 + mean_bf),
    })
}

/// Prior family whose hyperparameters are chosen by [`fit_hyperparameters`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    #[serde(rename = "iga")]
    InverseGamma,
    #[serde(rename = "logn")]
    LogNormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HyperFit {
    pub model: ModelSpec,
    pub log_evidence: f64,
    pub candidates: usize,
}

/// `2^{lo/2} ..= 2^{hi/2}`: log-spaced with ratio √2.
fn half_octaves(lo: i32, hi: i32) -> impl Iterator<Item = f64> {
    (lo..=hi).map(|k| 2f64.powf(0.5 * k as f64))
}

/// Candidate hyperparameters, log-spaced with ratio √2.
///
/// Inverse-Gamma: a 9×9 grid with `α ∈ [0.5, 8]` and `β/α ∈ S·[0.25, 4]`,
/// where `S` is the mean squared deviation of the data, so the grid follows
/// the scale of the series. Log-normal: `s ∈ [0.25, 4]` (9 values); its
/// log-location is pinned at zero and does not scale with the data.
pub fn hyperparameter_grid(family: Family, mean_sq_dev: f64, mu: f64) -> Vec<ModelSpec> {
    let scale = if mean_sq_dev > 0.0 { mean_sq_dev } else { 1.0 };
    let laws: Vec<Law> = match family {
        Family::InverseGamma => half_octaves(-2, 6)
            .flat_map(|alpha| {
                half_octaves(-4, 4).map(move |c| Law::InverseGamma {
                    alpha,
                    beta: c * scale * alpha,
                })
            })
            .collect(),
        Family::LogNormal => half_octaves(-4, 4).map(|s| Law::LogNormal { s }).collect(),
    };
    laws.into_iter().map(|law| ModelSpec { law, mu }).collect()
}

/// Empirical-Bayes choice of hyperparameters: the grid candidate with the
/// largest Monte-Carlo evidence. All candidates share the draw seed.
pub fn fit_hyperparameters(
    data: &ReturnSeries,
    family: Family,
    mu: f64,
    pooling: Pooling,
    n_draws: usize,
    seed: u64,
) -> Result<HyperFit> {
    let blocks = pooling.partition(data, mu)?;
    let overall = SufficientStats::from_series(data, mu)?;
    let grid = hyperparameter_grid(family, overall.mean_sq_dev, mu);
    let scores = par::map_slice(&grid, |m| evidence_from_stats(&blocks, m, n_draws, seed));
    let mut best: Option<(ModelSpec, f64)> = None;
    for (m, score) in grid.iter().zip(scores) {
        let lv = match score {
            Ok(e) => e.log_value,
            Err(Error::DegenerateEvidence) => continue,
            Err(e) => return Err(e),
        };
        if best.is_none_or(|(_, b)| lv > b) {
            best = Some((*m, lv));
        }
    }
    let (model, log_evidence) = best.ok_or(Error::DegenerateEvidence)?;
    Ok(HyperFit {
        model,
        log_evidence,
        candidates: grid.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn data(xs: &[f64]) -> ReturnSeries {
        ReturnSeries::from_values(xs.to_vec()).unwrap()
    }

    #[test]
    fn single_draw_equals_its_likelihood() {
        let d = data(&[0.3, -1.2, 0.8, 2.0]);
        let m = ModelSpec::iga(2.0, 1.5).unwrap();
        let e = evidence_mc(&d, &m, 1, 99).unwrap();
        let theta = m.sample_prior(&mut chunk_stream(99, 0));
        let ll = SufficientStats::from_series(&d, 0.0).unwrap().log_likelihood(theta);
        assert_eq!(e.log_value, ll);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn log_sum_exp_matches_direct_sum() {
        let vals = [-3.0, 2.5, -700.0, 0.1, 1.0];
        let mut acc = LogSumExp::EMPTY;
        vals.iter().for_each(|&v| acc.push(v));
        let direct = (vals.iter().map(|v| v.exp()).sum::<f64>() / 5.0).ln();
        let (lv, _) = acc.finish(5).unwrap();
        assert!((lv - direct).abs() < 1e-14);
        let mut a = LogSumExp::EMPTY;
        let mut b = LogSumExp::EMPTY;
        vals[..2].iter().for_each(|&v| a.push(v));
        vals[2..].iter().for_each(|&v| b.push(v));
        a.merge(&b);
        assert!((a.finish(5).unwrap().0 - direct).abs() < 1e-14);
    }

    #[test]
    fn draw_prefix_is_stable() {
        // Re-derive the first K draws directly from the chunk streams.
        let d = data(&[0.1, -0.4, 0.9]);
        let m = ModelSpec::logn(0.7).unwrap();
        let k = CHUNK + 100;
        let stats = SufficientStats::from_series(&d, 0.0).unwrap();
        let mut direct = Vec::new();
        for c in 0..3u64 {
            let mut rng = chunk_stream(5, c);
            for _ in 0..CHUNK {
                direct.push(stats.log_likelihood(m.sample_prior(&mut rng)));
            }
        }
        let expect = |k: usize| {
            let mut acc = LogSumExp::EMPTY;
            direct[..k].iter().for_each(|&v| acc.push(v));
            acc.finish(k).unwrap().0
        };
        for kk in [k, 2 * k] {
            let e = evidence_mc(&d, &m, kk, 5).unwrap();
            assert!((e.log_value - expect(kk)).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_evidence_reported() {
        let acc = LogSumExp::EMPTY;
        assert!(matches!(acc.finish(10), Err(Error::DegenerateEvidence)));
    }

    #[test]
    fn identical_models_and_streams_give_unit_factor() {
        let d = data(&[0.5, -0.2, 1.1, -0.9]);
        let m = ModelSpec::iga(3.0, 2.0).unwrap();
        let lbf = log_bayes_factor_with_seeds(&d, &m, 4, &m, 4, Pooling::Whole, 5000).unwrap();
        assert_eq!(lbf, 0.0);
        assert_eq!(finite_bf(lbf).unwrap(), 1.0);
    }

    #[test]
    fn swapping_models_inverts() {
        let d = data(&[0.5, -0.2, 1.1, -0.9, 0.3]);
        let a = ModelSpec::iga(3.0, 2.0).unwrap();
        let b = ModelSpec::logn(1.0).unwrap();
        let ab = log_bayes_factor_with_seeds(&d, &a, 1, &b, 2, Pooling::Whole, 3000).unwrap();
        let ba = log_bayes_factor_with_seeds(&d, &b, 2, &a, 1, Pooling::Whole, 3000).unwrap();
        assert_eq!(ab, -ba);
        assert!((finite_bf(ab).unwrap() * finite_bf(ba).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singleton_series_is_one_bayes_factor() {
        let d = data(&[0.5, -0.2, 1.1, -0.9, 0.3]);
        let a = ModelSpec::iga(3.0, 2.0).unwrap();
        let b = ModelSpec::logn(1.0).unwrap();
        let s = bf_series(&d, &a, &b, 1, 2000, 17).unwrap();
        let single = bayes_factor(&d, &a, &b, 2000, derive_seed(17, 0)).unwrap();
        assert_eq!(s.values, vec![single]);
        assert!(bf_series(&d, &a, &b, 0, 10, 1).is_err());
    }

    #[test]
    fn summary_examples() {
        let a = ModelSpec::iga(1.0, 1.0).unwrap();
        let s = BayesFactorSeries::from_values(vec![2.0, 0.5], a, a, 0).unwrap();
        let p = preference_summary(&s).unwrap();
        assert_eq!((p.fraction_m1, p.mean_bf), (0.5, 1.25));
        let s = BayesFactorSeries::from_values(vec![1.0; 4], a, a, 0).unwrap();
        let p = preference_summary(&s).unwrap();
        assert_eq!((p.fraction_m1, p.mean_bf), (0.0, 1.0));
        assert_eq!(p.posterior_prob_m1, 0.5);
        let empty = BayesFactorSeries::from_values(vec![], a, a, 0).unwrap();
        assert!(preference_summary(&empty).is_err());
        assert!(BayesFactorSeries::from_values(vec![0.0], a, a, 0).is_err());
    }

    #[test]
    fn blocks_of_full_length_equal_whole() {
        let mut rng = stream(3);
        let xs: Vec<f64> = (0..50).map(|_| rand::Rng::random::<f64>(&mut rng) - 0.5).collect();
        let d = data(&xs);
        let m = ModelSpec::iga(2.0, 0.1).unwrap();
        let a = evidence_mc(&d, &m, 5000, 8).unwrap();
        let b = evidence_mc_pooled(&d, &m, Pooling::Blocks(50), 5000, 8).unwrap();
        assert_eq!(a, b);
        assert!(Pooling::Blocks(0).partition(&d, 0.0).is_err());
        assert_eq!(Pooling::Blocks(20).partition(&d, 0.0).unwrap().len(), 3);
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(hyperparameter_grid(Family::InverseGamma, 2.0, 0.0).len(), 81);
        assert_eq!(hyperparameter_grid(Family::LogNormal, 2.0, 0.0).len(), 9);
    }

    #[test]
    fn bf_csv_layout() {
        let a = ModelSpec::iga(1.0, 1.0).unwrap();
        let s = BayesFactorSeries::from_values(vec![2.0, 0.5], a, a, 0).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "iter,bf\n1,2\n2,0.5\n");
    }
}
