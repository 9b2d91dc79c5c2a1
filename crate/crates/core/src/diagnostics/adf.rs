use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::densities::LN_TWO_PI;
use crate::error::{invalid, Error, Result};
use crate::market_data::ReturnSeries;

/// Significance levels with tabulated critical values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Level {
    #[serde(rename = "1%")]
    One,
    #[serde(rename = "5%")]
    Five,
    #[serde(rename = "10%")]
    Ten,
}

// MacKinnon (2010) response surface for the constant-only case, one
// variable: τ(T) = b0 + b1/T + b2/T² + b3/T³.
const TAU_C: [[f64; 4]; 3] = [
    [-3.43035, -6.5393, -16.786, -79.433],
    [-2.86154, -2.8903, -4.234, -40.040],
    [-2.56677, -1.5384, -2.809, 0.0],
];

/// Finite-sample critical value for a regression on `nobs` observations.
pub fn critical_value(level: Level, nobs: usize) -> f64 {
    let b = match level {
        Level::One => TAU_C[0],
        Level::Five => TAU_C[1],
        Level::Ten => TAU_C[2],
    };
    let inv = 1.0 / nobs as f64;
    b[0] + inv * (b[1] + inv * (b[2] + inv * b[3]))
}

/// `⌈12 (n/100)^{1/4}⌉`.
pub fn default_max_lags(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).ceil() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdfResult {
    pub statistic: f64,
    pub lags_used: usize,
    pub nobs: usize,
    pub critical_1: f64,
    pub critical_5: f64,
    pub critical_10: f64,
    pub reject_1: bool,
    pub reject_5: bool,
    pub reject_10: bool,
}

impl AdfResult {
    pub fn reject_at(&self, level: Level) -> bool {
        match level {
            Level::One => self.reject_1,
            Level::Five => self.reject_5,
            Level::Ten => self.reject_10,
        }
    }
}

struct Fit {
    ssr: f64,
    t_gamma: f64,
    nobs: usize,
    k: usize,
}

impl Fit {
    fn aic(&self) -> f64 {
        let n = self.nobs as f64;
        let llf = -0.5 * n * (LN_TWO_PI + (self.ssr / n).ln() + 1.0);
        -2.0 * llf + 2.0 * self.k as f64
    }
}

/// OLS of `Δy_t` on `[1, y_{t-1}, Δy_{t-1}, …, Δy_{t-p}]` over the rows
/// `t ∈ first..dy.len()` (indices into the differenced series).
fn regress(y: &[f64], dy: &[f64], p: usize, first: usize) -> Result<Fit> {
    let nobs = dy.len() - first;
    let k = p + 2;
    if nobs <= k {
        return Err(invalid("too few observations for the requested lag order"));
    }
    let x = DMatrix::from_fn(nobs, k, |r, c| {
        let t = first + r;
        match c {
            0 => 1.0,
            1 => y[t],
            j => dy[t - (j - 1)],
        }
    });
    let target = DVector::from_iterator(nobs, dy[first..].iter().copied());
    let xtx = x.transpose() * &x;
    let chol = xtx.clone().cholesky().ok_or(Error::SingularRegression)?;
    let l = chol.l();
    for i in 0..k {
        if !(l[(i, i)] * l[(i, i)] > 1e-10 * xtx[(i, i)]) {
            return Err(Error::SingularRegression);
        }
    }
    let beta = chol.solve(&(x.transpose() * &target));
    let resid = &target - &x * &beta;
    let ssr = resid.norm_squared();
    let sigma2 = ssr / (nobs - k) as f64;
    let inv = chol.inverse();
    let se = (sigma2 * inv[(1, 1)]).sqrt();
    if !(se > 0.0 && se.is_finite()) {
        return Err(Error::SingularRegression);
    }
    Ok(Fit {
        ssr,
        t_gamma: beta[1] / se,
        nobs,
        k,
    })
}

/// Augmented Dickey-Fuller test with drift and no trend. The lag order is
/// chosen by AIC over `0..=max_lags` on a common sample, then the chosen
/// regression is refit on all usable rows.
pub fn adf_test(series: &ReturnSeries, max_lags: usize) -> Result<AdfResult> {
    let y = series.values();
    let n = y.len();
    if n < 25 {
        return Err(Error::TooShort { needed: 25, got: n });
    }
    // dy[t] = y[t+1] - y[t]; the level regressor for dy[t] is y[t].
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let max_lags = max_lags.min(n / 2 - 3);
    let mut best: Option<(f64, usize)> = None;
    for p in 0..=max_lags {
        let aic = regress(y, &dy, p, max_lags)?.aic();
        if best.is_none_or(|(b, _)| aic < b) {
            best = Some((aic, p));
        }
    }
    let (_, p) = best.expect("at least one lag order");
    let fit = regress(y, &dy, p, p)?;
    let c1 = critical_value(Level::One, fit.nobs);
    let c5 = critical_value(Level::Five, fit.nobs);
    let c10 = critical_value(Level::Ten, fit.nobs);
    let stat = fit.t_gamma;
    Ok(AdfResult {
        statistic: stat,
        lags_used: p,
        nobs: fit.nobs,
        critical_1: c1,
        critical_5: c5,
        critical_10: c10,
        reject_1: stat < c1,
        reject_5: stat < c5,
        reject_10: stat < c10,
    })
}
