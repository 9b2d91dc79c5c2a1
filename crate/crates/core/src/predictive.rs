//! Predictive return densities `p(x) = ∫ N(x | μ, θ) g(θ) dθ`.
//!
//! Inverse-Gamma mixing has a Student-t closed form. Log-normal mixing is
//! integrated numerically in `u = ln θ`, where the integrand is smooth.

use std::io::Write;

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::densities::{normal_log_pdf, sichi2_as_iga, Law, ModelSpec, LN_TWO_PI};
use crate::error::{invalid, Result};
use crate::par;
use crate::quadrature::{integrate, DEFAULT_MAX_NODES};

/// Default absolute tolerance per density value.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Half-width of the log-normal integration window, in units of `s`.
pub const LOGN_WINDOW: f64 = 8.0;

/// A predictive density tabulated on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictiveCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub model: ModelSpec,
}

impl PredictiveCurve {
    /// Trapezoid-rule integral over the grid.
    pub fn trapezoid(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(x, d)| 0.5 * (x[1] - x[0]) * (d[0] + d[1]))
            .sum()
    }

    /// Writes `x,density,model` rows.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "x,density,model")?;
        let label = self.model.to_string();
        for (x, d) in self.grid.iter().zip(&self.density) {
            writeln!(out, "{x},{d},{label}")?;
        }
        Ok(())
    }
}

fn iga_params(model: &ModelSpec) -> Result<(f64, f64)> {
    model.validate()?;
    match model.law {
        Law::InverseGamma { alpha, beta } => Ok((alpha, beta)),
        Law::ScaledInvChi2 { nu0, sigma0_sq } => Ok(sichi2_as_iga(nu0, sigma0_sq)),
        Law::LogNormal { .. } => Err(invalid("expected an inverse-Gamma model")),
    }
}

/// Student-t density with `2α` degrees of freedom, location μ and squared
/// scale `β/α`.
pub fn predictive_iga(x: f64, model: &ModelSpec) -> Result<f64> {
    let (alpha, beta) = iga_params(model)?;
    let d = x - model.mu;
    let log_p = ln_gamma(alpha + 0.5)
        - ln_gamma(alpha)
        - 0.5 * (LN_TWO_PI + beta.ln())
        - (alpha + 0.5) * (d * d / (2.0 * beta)).ln_1p();
    Ok(log_p.exp())
}

/// Log-normal predictive density by adaptive quadrature over
/// `ln θ ∈ [−8s, 8s]` to absolute tolerance `tol`.
pub fn predictive_logn(x: f64, model: &ModelSpec, tol: f64) -> Result<f64> {
    model.validate()?;
    let Law::LogNormal { s } = model.law else {
        return Err(invalid("expected a log-normal model"));
    };
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let mu = model.mu;
    let var_u = s * s;
    let f = |u: f64| (normal_log_pdf(x, mu, u.exp()) + normal_log_pdf(u, 0.0, var_u)).exp();
    let half = LOGN_WINDOW * s;
    integrate(f, -half, half, tol, DEFAULT_MAX_NODES)
}

/// Signed predictive density for any supported law.
pub fn predictive_density(x: f64, model: &ModelSpec, tol: f64) -> Result<f64> {
    match model.law {
        Law::LogNormal { .. } => predictive_logn(x, model, tol),
        _ => predictive_iga(x, model),
    }
}

fn check_increasing(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(invalid("grid contains a non-finite point"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("grid must be strictly increasing"));
    }
    Ok(())
}

/// Signed predictive density on `grid`.
pub fn predictive_curve(model: &ModelSpec, grid: &[f64], tol: f64) -> Result<PredictiveCurve> {
    check_increasing(grid)?;
    let density = par::map_slice(grid, |&x| predictive_density(x, model, tol))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(PredictiveCurve {
        grid: grid.to_vec(),
        density,
        model: *model,
    })
}

/// Density of `|X|` on a nonnegative grid: `f(y) + f(−y)`.
pub fn predictive_abs_curve(model: &ModelSpec, grid: &[f64], tol: f64) -> Result<PredictiveCurve> {
    check_increasing(grid)?;
    if let Some(y) = grid.iter().find(|&&y| y < 0.0) {
        return Err(invalid(format!("negative grid point {y}")));
    }
    let density = par::map_slice(grid, |&y| {
        Ok(predictive_density(y, model, tol)? + predictive_density(-y, model, tol)?)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(PredictiveCurve {
        grid: grid.to_vec(),
        density,
        model: *model,
    })
}

/// Standard deviation of the predictive law, when finite.
pub fn predictive_sd(model: &ModelSpec) -> Option<f64> {
    model.prior_mean().map(f64::sqrt)
}
