//! Random-walk Metropolis estimation of the fluctuating variance θ.
//!
//! Two acceptance rules are provided. `PaperGreedy` keeps a proposal only
//! when it strictly raises the posterior, which makes the chain a
//! stochastic hill climber. `Standard` is the usual Metropolis rule
//! `min(1, ρ)` and samples the posterior. Either rule may be followed by a
//! momentum gradient nudge on the log posterior (`learning_rate > 0`);
//! with the nudge enabled, `Standard` no longer targets the exact posterior.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::densities::{ModelSpec, SufficientStats};
use crate::error::{invalid, Error, Result};
use crate::market_data::ReturnSeries;
use crate::par;
use crate::rng::{stream, StreamRng};

/// Lower bound for every retained θ.
pub const THETA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AcceptanceMode {
    #[serde(rename = "greedy")]
    PaperGreedy,
    Standard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    pub iterations: usize,
    /// Random-walk standard deviation; `None` means 0.1 × initial θ.
    pub proposal_step: Option<f64>,
    pub learning_rate: f64,
    pub momentum: f64,
    pub acceptance_mode: AcceptanceMode,
    pub burn_in: usize,
    pub seed: u64,
    /// Starting θ; `None` means the mean squared deviation of the data.
    pub initial_theta: Option<f64>,
}

impl McmcConfig {
    /// Metropolis sampler without the gradient nudge.
    pub fn standard(iterations: usize, burn_in: usize, seed: u64) -> Self {
        Self {
            iterations,
            proposal_step: None,
            learning_rate: 0.0,
            momentum: 0.9,
            acceptance_mode: AcceptanceMode::Standard,
            burn_in,
            seed,
            initial_theta: None,
        }
    }

    /// Greedy climber with the default momentum nudge.
    pub fn greedy(iterations: usize, seed: u64) -> Self {
        Self {
            iterations,
            proposal_step: None,
            learning_rate: 1e-3,
            momentum: 0.9,
            acceptance_mode: AcceptanceMode::PaperGreedy,
            burn_in: 0,
            seed,
            initial_theta: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations <= self.burn_in {
            return Err(invalid("iterations must exceed burn_in"));
        }
        if let Some(step) = self.proposal_step {
            if !(step > 0.0 && step.is_finite()) {
                return Err(invalid("proposal_step must be positive"));
            }
        }
        if let Some(t) = self.initial_theta {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid("initial_theta must be positive"));
            }
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(invalid("learning_rate must be nonnegative"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(invalid("momentum must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Unnormalized log posterior `log L(θ) + log g(θ)` for fixed data.
#[derive(Debug, Clone, Copy)]
pub struct PosteriorTarget {
    pub stats: SufficientStats,
    pub model: ModelSpec,
}

impl PosteriorTarget {
    pub fn new(data: &ReturnSeries, model: &ModelSpec) -> Result<Self> {
        model.validate()?;
        Ok(Self {
            stats: SufficientStats::from_series(data, model.mu)?,
            model: *model,
        })
    }

    pub fn log_posterior(&self, theta: f64) -> Result<f64> {
        Ok(self.stats.log_likelihood(theta) + self.model.prior_log_pdf(theta)?)
    }

    pub fn gradient(&self, theta: f64) -> f64 {
        self.stats.log_likelihood_grad(theta) + self.model.prior_log_pdf_grad(theta)
    }
}

pub fn log_unnormalized_posterior(theta: f64, data: &ReturnSeries, model: &ModelSpec) -> Result<f64> {
    PosteriorTarget::new(data, model)?.log_posterior(theta)
}

/// Fully resolved per-step parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRule {
    pub mode: AcceptanceMode,
    pub proposal_step: f64,
    pub learning_rate: f64,
    pub momentum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainState {
    pub theta: f64,
    pub velocity: f64,
    pub log_posterior: f64,
}

impl ChainState {
    pub fn start(target: &PosteriorTarget, theta: f64) -> Result<Self> {
        Ok(Self {
            theta,
            velocity: 0.0,
            log_posterior: target.log_posterior(theta)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McmcRecord {
    pub iteration: usize,
    pub theta_proposed: f64,
    pub theta_current: f64,
    pub log_posterior: f64,
    pub accepted: bool,
}

/// One propose/accept/nudge cycle.
///
/// The proposal `θ + step·z` is reflected at zero. After the accept
/// decision the retained value moves by a momentum step
/// `v ← momentum·v + learning_rate·∇log p(θ)`. In greedy mode a nudge that
/// lowers the log posterior is discarded and the velocity reset, so the
/// retained log posterior never decreases.
pub fn mh_step<R: Rng + ?Sized>(
    state: ChainState,
    target: &PosteriorTarget,
    rule: &StepRule,
    iteration: usize,
    rng: &mut R,
) -> Result<(ChainState, McmcRecord)> {
    let z: f64 = rng.sample(StandardNormal);
    let proposed = (state.theta + rule.proposal_step * z).abs().max(THETA_FLOOR);
    let lp_proposed = target.log_posterior(proposed)?;
    let log_rho = lp_proposed - state.log_posterior;
    let accepted = match rule.mode {
        AcceptanceMode::PaperGreedy => log_rho > 0.0,
        AcceptanceMode::Standard => {
            let u: f64 = rng.random();
            log_rho >= 0.0 || u.ln() < log_rho
        }
    };
    let (mut theta, mut lp) = if accepted {
        (proposed, lp_proposed)
    } else {
        (state.theta, state.log_posterior)
    };
    let mut velocity = state.velocity;
    if rule.learning_rate > 0.0 {
        let grad = target.gradient(theta);
        if !grad.is_finite() {
            return Err(Error::NonFiniteGradient { theta });
        }
        velocity = rule.momentum * velocity + rule.learning_rate * grad;
        let nudged = (theta + velocity).max(THETA_FLOOR);
        let lp_nudged = target.log_posterior(nudged)?;
        if rule.mode == AcceptanceMode::PaperGreedy && !(lp_nudged >= lp) {
            velocity = 0.0;
        } else {
            theta = nudged;
            lp = lp_nudged;
        }
    }
    let next = ChainState {
        theta,
        velocity,
        log_posterior: lp,
    };
    let record = McmcRecord {
        iteration,
        theta_proposed: proposed,
        theta_current: theta,
        log_posterior: lp,
        accepted,
    };
    Ok((next, record))
}

/// A chain positioned at some iteration, for callers that want to stream
/// steps without keeping a trace.
pub struct Sampler {
    target: PosteriorTarget,
    rule: StepRule,
    state: ChainState,
    rng: StreamRng,
    iteration: usize,
}

impl Sampler {
    pub fn new(data: &ReturnSeries, model: &ModelSpec, config: &McmcConfig) -> Result<Self> {
        config.validate()?;
        let target = PosteriorTarget::new(data, model)?;
        Self::from_target(target, config)
    }

    pub fn from_target(target: PosteriorTarget, config: &McmcConfig) -> Result<Self> {
        config.validate()?;
        let theta0 = config.initial_theta.unwrap_or_else(|| {
            let s = target.stats.mean_sq_dev;
            if s > 0.0 {
                s
            } else {
                target.model.prior_mean().unwrap_or(1.0)
            }
        });
        let rule = StepRule {
            mode: config.acceptance_mode,
            proposal_step: config.proposal_step.unwrap_or(0.1 * theta0),
            learning_rate: config.learning_rate,
            momentum: config.momentum,
        };
        Ok(Self {
            state: ChainState::start(&target, theta0)?,
            target,
            rule,
            rng: stream(config.seed),
            iteration: 0,
        })
    }

    pub fn rule(&self) -> &StepRule {
        &self.rule
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn step(&mut self) -> Result<McmcRecord> {
        self.iteration += 1;
        let (next, record) = mh_step(self.state, &self.target, &self.rule, self.iteration, &mut self.rng)?;
        self.state = next;
        Ok(record)
    }
}

/// Every iteration of one chain, rejections included.
#[derive(Debug, Clone, PartialEq)]
pub struct McmcTrace {
    pub records: Vec<McmcRecord>,
    pub config: McmcConfig,
    pub model: ModelSpec,
    pub initial_theta: f64,
    pub proposal_step: f64,
}

impl McmcTrace {
    pub fn post_burn_in(&self) -> &[McmcRecord] {
        &self.records[self.config.burn_in.min(self.records.len())..]
    }

    pub fn acceptance_rate(&self) -> f64 {
        let post = self.post_burn_in();
        post.iter().filter(|r| r.accepted).count() as f64 / post.len().max(1) as f64
    }

    /// `iter,theta_proposed,theta_current,log_posterior,accepted`
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "iter,theta_proposed,theta_current,log_posterior,accepted")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.iteration,
                r.theta_proposed,
                r.theta_current,
                r.log_posterior,
                u8::from(r.accepted)
            )?;
        }
        Ok(())
    }
}

pub fn run_chain(data: &ReturnSeries, model: &ModelSpec, config: &McmcConfig) -> Result<McmcTrace> {
    let mut sampler = Sampler::new(data, model, config)?;
    let initial_theta = sampler.state.theta;
    let proposal_step = sampler.rule.proposal_step;
    let records = (0..config.iterations)
        .map(|_| sampler.step())
        .collect::<Result<Vec<_>>>()?;
    Ok(McmcTrace {
        records,
        config: *config,
        model: *model,
        initial_theta,
        proposal_step,
    })
}

/// Runs `n_chains` independent chains; chain `i` uses seed `config.seed + i`.
pub fn run_chains(
    data: &ReturnSeries,
    model: &ModelSpec,
    config: &McmcConfig,
    n_chains: usize,
) -> Result<Vec<McmcTrace>> {
    par::try_map_indexed(n_chains, |i| {
        let cfg = McmcConfig {
            seed: config.seed.wrapping_add(i as u64),
            ..*config
        };
        run_chain(data, model, &cfg)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaEstimate {
    pub point: f64,
    pub stderr: f64,
}

/// Point estimate of θ from a trace.
///
/// Standard chains give the post-burn-in mean with a batch-means standard
/// error. Greedy chains are optimizers, so the final retained θ is
/// reported with zero standard error.
pub fn estimate_theta(trace: &McmcTrace) -> Result<ThetaEstimate> {
    let post = trace.post_burn_in();
    if !post.iter().any(|r| r.accepted) {
        return Err(Error::NoAcceptedStates);
    }
    match trace.config.acceptance_mode {
        AcceptanceMode::PaperGreedy => Ok(ThetaEstimate {
            point: post[post.len() - 1].theta_current,
            stderr: 0.0,
        }),
        AcceptanceMode::Standard => {
            let values: Vec<f64> = post.iter().map(|r| r.theta_current).collect();
            Ok(ThetaEstimate {
                point: mean(&values),
                stderr: batch_means_stderr(&values),
            })
        }
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard error of the mean from ⌊√m⌋ non-overlapping batches; plain
/// `sd/√m` when fewer than 4 batches fit.
fn batch_means_stderr(xs: &[f64]) -> f64 {
    let m = xs.len();
    let n_batches = (m as f64).sqrt().floor() as usize;
    if n_batches < 4 {
        if m < 2 {
            return 0.0;
        }
        let mu = mean(xs);
        let var = xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (m - 1) as f64;
        return (var / m as f64).sqrt();
    }
    let size = m / n_batches;
    let batch_means: Vec<f64> = xs.chunks_exact(size).take(n_batches).map(mean).collect();
    let mu = mean(&batch_means);
    let var = batch_means.iter().map(|b| (b - mu) * (b - mu)).sum::<f64>()
        / (n_batches - 1) as f64;
    (var / n_batches as f64).sqrt()
}
