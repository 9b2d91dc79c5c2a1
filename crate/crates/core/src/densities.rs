//! Prior densities for the volatility parameter, the Gaussian likelihood
//! with known mean, and the conjugate updates. Everything is evaluated in
//! log space.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::market_data::ReturnSeries;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Mixing law of the fluctuating variance θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law")]
pub enum Law {
    /// Inverse-Gamma with shape `alpha` and scale `beta`.
    #[serde(rename = "iga")]
    InverseGamma { alpha: f64, beta: f64 },
    /// Log-normal with log-location fixed at zero and scale `s`.
    #[serde(rename = "logn")]
    LogNormal { s: f64 },
    /// Scaled inverse-χ² with `nu0` degrees of freedom and scale `sigma0_sq`.
    #[serde(rename = "sichi2")]
    ScaledInvChi2 { nu0: f64, sigma0_sq: f64 },
}

/// A superstatistics model: a law for θ plus the known likelihood mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub law: Law,
    pub mu: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

impl ModelSpec {
    pub fn iga(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Law::InverseGamma { alpha, beta }, 0.0)
    }

    pub fn logn(s: f64) -> Result<Self> {
        Self::new(Law::LogNormal { s }, 0.0)
    }

    pub fn scaled_inv_chi2(nu0: f64, sigma0_sq: f64) -> Result<Self> {
        Self::new(Law::ScaledInvChi2 { nu0, sigma0_sq }, 0.0)
    }

    pub fn new(law: Law, mu: f64) -> Result<Self> {
        let spec = Self { law, mu };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_mu(self, mu: f64) -> Result<Self> {
        Self::new(self.law, mu)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() {
            return Err(invalid("mu must be finite"));
        }
        match self.law {
            Law::InverseGamma { alpha, beta } => {
                positive("alpha", alpha)?;
                positive("beta", beta)
            }
            Law::LogNormal { s } => positive("s", s),
            Law::ScaledInvChi2 { nu0, sigma0_sq } => {
                positive("nu0", nu0)?;
                positive("sigma0_sq", sigma0_sq)
            }
        }
    }

    /// Short tag: `iga`, `logn` or `sichi2`.
    pub fn tag(&self) -> &'static str {
        match self.law {
            Law::InverseGamma { .. } => "iga",
            Law::LogNormal { .. } => "logn",
            Law::ScaledInvChi2 { .. } => "sichi2",
        }
    }

    /// Log prior density of θ.
    pub fn prior_log_pdf(&self, theta: f64) -> Result<f64> {
        match self.law {
            Law::InverseGamma { alpha, beta } => igamma_log_pdf(theta, alpha, beta),
            Law::LogNormal { s } => lognormal_log_pdf(theta, s),
            Law::ScaledInvChi2 { nu0, sigma0_sq } => {
                scaled_inv_chi2_log_pdf(theta, nu0, sigma0_sq)
            }
        }
    }

    /// d/dθ of the log prior density.
    pub fn prior_log_pdf_grad(&self, theta: f64) -> f64 {
        match self.law {
            Law::InverseGamma { alpha, beta } => -(alpha + 1.0) / theta + beta / (theta * theta),
            Law::LogNormal { s } => -(1.0 + theta.ln() / (s * s)) / theta,
            Law::ScaledInvChi2 { nu0, sigma0_sq } => {
                let (alpha, beta) = sichi2_as_iga(nu0, sigma0_sq);
                -(alpha + 1.0) / theta + beta / (theta * theta)
            }
        }
    }

    /// One draw of θ from the prior.
    pub fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.law {
            Law::InverseGamma { alpha, beta } => sample_igamma(rng, alpha, beta),
            Law::LogNormal { s } => {
                let z: f64 = StandardNormal.sample(rng);
                (s * z).exp()
            }
            Law::ScaledInvChi2 { nu0, sigma0_sq } => {
                let (alpha, beta) = sichi2_as_iga(nu0, sigma0_sq);
                sample_igamma(rng, alpha, beta)
            }
        }
    }

    /// Prior mean of θ, when finite.
    pub fn prior_mean(&self) -> Option<f64> {
        match self.law {
            Law::InverseGamma { alpha, beta } => (alpha > 1.0).then(|| beta / (alpha - 1.0)),
            Law::LogNormal { s } => Some((0.5 * s * s).exp()),
            Law::ScaledInvChi2 { nu0, sigma0_sq } => {
                let (alpha, beta) = sichi2_as_iga(nu0, sigma0_sq);
                (alpha > 1.0).then(|| beta / (alpha - 1.0))
            }
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.law {
            Law::InverseGamma { alpha, beta } => write!(f, "iga(alpha={alpha} beta={beta})"),
            Law::LogNormal { s } => write!(f, "logn(s={s})"),
            Law::ScaledInvChi2 { nu0, sigma0_sq } => {
                write!(f, "sichi2(nu0={nu0} sigma0_sq={sigma0_sq})")
            }
        }?;
        if self.mu != 0.0 {
            write!(f, "[mu={}]", self.mu)?;
        }
        Ok(())
    }
}

fn sample_igamma<R: Rng + ?Sized>(rng: &mut R, alpha: f64, beta: f64) -> f64 {
    let g = Gamma::new(alpha, 1.0).expect("validated shape");
    let x: f64 = g.sample(rng);
    beta / x
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("theta must be positive and finite, got {theta}")))
    }
}

/// Inverse-Gamma log density `α ln β − lnΓ(α) − (α+1) ln θ − β/θ`.
pub fn igamma_log_pdf(theta: f64, alpha: f64, beta: f64) -> Result<f64> {
    check_theta(theta)?;
    positive("alpha", alpha)?;
    positive("beta", beta)?;
    Ok(alpha * beta.ln() - ln_gamma(alpha) - (alpha + 1.0) * theta.ln() - beta / theta)
}

/// Log-normal log density with the log-location pinned at zero.
pub fn lognormal_log_pdf(theta: f64, s: f64) -> Result<f64> {
    check_theta(theta)?;
    positive("s", s)?;
    let l = theta.ln();
    Ok(-(s.ln() + l + 0.5 * LN_2PI) - l * l / (2.0 * s * s))
}

/// Scaled inverse-χ² log density, normalized; identical to
/// `igamma_log_pdf(θ, ν₀/2, ν₀σ₀²/2)`.
pub fn scaled_inv_chi2_log_pdf(theta: f64, nu0: f64, sigma0_sq: f64) -> Result<f64> {
    positive("nu0", nu0)?;
    positive("sigma0_sq", sigma0_sq)?;
    let (alpha, beta) = sichi2_as_iga(nu0, sigma0_sq);
    igamma_log_pdf(theta, alpha, beta)
}

/// `(ν₀, σ₀²) ↦ (α, β) = (ν₀/2, ν₀σ₀²/2)`.
pub fn sichi2_as_iga(nu0: f64, sigma0_sq: f64) -> (f64, f64) {
    (0.5 * nu0, 0.5 * nu0 * sigma0_sq)
}

/// Sample size and mean squared deviation about a known mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SufficientStats {
    pub n: usize,
    pub mean_sq_dev: f64,
}

impl SufficientStats {
    pub fn new(n: usize, mean_sq_dev: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        if !(mean_sq_dev >= 0.0 && mean_sq_dev.is_finite()) {
            return Err(invalid("mean squared deviation must be finite and nonnegative"));
        }
        Ok(Self { n, mean_sq_dev })
    }

    pub fn from_slice(xs: &[f64], mu: f64) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::EmptyInput);
        }
        let ss: f64 = xs.iter().map(|x| (x - mu) * (x - mu)).sum();
        Self::new(xs.len(), ss / xs.len() as f64)
    }

    pub fn from_series(data: &ReturnSeries, mu: f64) -> Result<Self> {
        Self::from_slice(data.values(), mu)
    }

    /// Gaussian log-likelihood `−(n/2) ln(2πθ) − nS/(2θ)` including constants.
    pub fn log_likelihood(&self, theta: f64) -> f64 {
        let n = self.n as f64;
        -0.5 * n * (LN_2PI + theta.ln()) - 0.5 * n * self.mean_sq_dev / theta
    }

    /// d/dθ of [`Self::log_likelihood`].
    pub fn log_likelihood_grad(&self, theta: f64) -> f64 {
        let n = self.n as f64;
        -0.5 * n / theta + 0.5 * n * self.mean_sq_dev / (theta * theta)
    }
}

pub fn gaussian_log_likelihood(data: &ReturnSeries, mu: f64, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    if !mu.is_finite() {
        return Err(invalid("mu must be finite"));
    }
    Ok(SufficientStats::from_series(data, mu)?.log_likelihood(theta))
}

/// Inverse-Gamma posterior `(α + n/2, β + nS/2)`.
pub fn conjugate_posterior_iga(alpha: f64, beta: f64, stats: &SufficientStats) -> Result<(f64, f64)> {
    positive("alpha", alpha)?;
    positive("beta", beta)?;
    let half_n = 0.5 * stats.n as f64;
    Ok((alpha + half_n, beta + half_n * stats.mean_sq_dev))
}

/// Scaled inverse-χ² posterior `(ν₀ + n, (ν₀σ₀² + nS)/(ν₀ + n))`.
pub fn conjugate_posterior_sichi2(
    nu0: f64,
    sigma0_sq: f64,
    stats: &SufficientStats,
) -> Result<(f64, f64)> {
    positive("nu0", nu0)?;
    positive("sigma0_sq", sigma0_sq)?;
    let n = stats.n as f64;
    let nu = nu0 + n;
    Ok((nu, (nu0 * sigma0_sq + n * stats.mean_sq_dev) / nu))
}

/// Gaussian log density, shared by the predictive and MCMC code.
pub(crate) fn normal_log_pdf(x: f64, mu: f64, var: f64) -> f64 {
    let d = x - mu;
    -0.5 * (LN_2PI + var.ln()) - 0.5 * d * d / var
}

/// `ln(2π)`.
pub const LN_TWO_PI: f64 = LN_2PI;
