//! Bayesian superstatistics for financial log-returns.
//!
//! Returns are modelled as Gaussian with a variance θ that fluctuates on a
//! slower timescale according to a mixing law (inverse-Gamma, log-normal or
//! scaled inverse-χ²). The crate covers:
//!
//! * [`market_data`]: price ingestion, bar resampling, log-returns;
//! * [`densities`]: priors, likelihood and conjugate updates;
//! * [`predictive`]: mixture return densities;
//! * [`mcmc`]: random-walk Metropolis estimation of θ;
//! * [`model_select`]: Monte-Carlo evidence and Bayes factors;
//! * [`diagnostics`]: ACF, periodogram, ADF test, histograms;
//! * [`synthetic`]: superstatistical series with known ground truth.
//!
//! Heavy loops (Bayes-factor repetitions, prior draws, chains, grid
//! points) run on rayon when the default `parallel` feature is enabled.
//! Results are identical with the feature off or with any thread count.

pub mod densities;
pub mod diagnostics;
pub mod error;
pub mod market_data;
pub mod mcmc;
pub mod model_select;
pub mod par;
pub mod predictive;
pub mod quadrature;
pub mod rng;
pub mod synthetic;

pub use densities::{Law, ModelSpec, SufficientStats};
pub use error::{Error, ErrorClass, Result};
pub use market_data::{PriceSeries, ReturnKind, ReturnSeries, Timescale};
pub use mcmc::{AcceptanceMode, McmcConfig, McmcTrace};
pub use model_select::{BayesFactorSeries, EvidenceEstimate, Pooling};
