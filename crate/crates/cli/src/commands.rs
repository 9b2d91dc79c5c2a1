use std::fs;
use std::path::Path;

use chrono::{DateTime, Duration, Utc};
use serde::Serialize;
use superstat::diagnostics::diagnose;
use superstat::market_data::{
    abs_returns, log_returns, parse_prices, parse_returns, resample, write_prices, write_returns,
};
use superstat::mcmc::{estimate_theta, run_chain};
use superstat::model_select::{bf_series_pooled, fit_hyperparameters, preference_summary, Family};
use superstat::predictive::{predictive_abs_curve, predictive_curve, predictive_sd};
use superstat::rng::derive_seed;
use superstat::synthetic::{gen_prices_from_returns, gen_superstat, GeneratorConfig};
use superstat::{
    AcceptanceMode, Law, McmcConfig, ModelSpec, Pooling, ReturnKind, ReturnSeries, Timescale,
};

use crate::args::{
    CompareArgs, DiagnoseArgs, FitArgs, HyperArgs, IngestArgs, ModeArg, ModelArg, PredictArgs,
    SimulateArgs, TimescaleArg,
};
use crate::error::CliError;
use crate::output::Sink;

pub fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Model named by explicit hyperparameter flags, `None` when none of the
/// model's flags were given.
fn explicit_model(model: ModelArg, h: &HyperArgs) -> Result<Option<ModelSpec>, CliError> {
    let stray = match model {
        ModelArg::Iga => [("s", h.s), ("nu0", h.nu0), ("sigma0-sq", h.sigma0_sq)],
        ModelArg::Logn => [("alpha", h.alpha), ("beta", h.beta), ("nu0", h.nu0)],
        ModelArg::Sichi2 => [("alpha", h.alpha), ("beta", h.beta), ("s", h.s)],
    };
    if let Some((name, _)) = stray.iter().find(|(_, v)| v.is_some()) {
        return Err(usage(format!("--{name} does not apply to this model")));
    }
    if model == ModelArg::Logn && h.sigma0_sq.is_some() {
        return Err(usage("--sigma0-sq does not apply to this model"));
    }
    let spec = match (model, h.alpha, h.beta, h.s, h.nu0, h.sigma0_sq) {
        (ModelArg::Iga, Some(a), Some(b), ..) => ModelSpec::iga(a, b)?,
        (ModelArg::Iga, None, None, ..) => return Ok(None),
        (ModelArg::Iga, ..) => return Err(usage("--alpha and --beta must be given together")),
        (ModelArg::Logn, _, _, Some(s), ..) => ModelSpec::logn(s)?,
        (ModelArg::Logn, ..) => return Ok(None),
        (ModelArg::Sichi2, .., Some(n), Some(s)) => ModelSpec::scaled_inv_chi2(n, s)?,
        (ModelArg::Sichi2, .., None, None) => return Ok(None),
        (ModelArg::Sichi2, ..) => return Err(usage("--nu0 and --sigma0-sq must be given together")),
    };
    Ok(Some(spec.with_mu(h.mu)?))
}

fn required_model(model: ModelArg, h: &HyperArgs) -> Result<ModelSpec, CliError> {
    explicit_model(model, h)?.ok_or_else(|| {
        usage(match model {
            ModelArg::Iga => "--model iga needs --alpha and --beta",
            ModelArg::Logn => "--model logn needs --s",
            ModelArg::Sichi2 => "--model sichi2 needs --nu0 and --sigma0-sq",
        })
    })
}

fn pooling(block_length: Option<usize>) -> Result<Pooling, CliError> {
    match block_length {
        None => Ok(Pooling::Whole),
        Some(0) => Err(usage("--block-length must be at least 1")),
        Some(t) => Ok(Pooling::Blocks(t)),
    }
}

/// Seed of the hyperparameter grid fit for a family; disjoint from the
/// per-repetition seeds `derive_seed(seed, i)`.
fn grid_seed(seed: u64, family: Family) -> u64 {
    match family {
        Family::InverseGamma => derive_seed(seed, u64::MAX),
        Family::LogNormal => derive_seed(seed, u64::MAX - 1),
    }
}

fn load_returns(path: &Path, bytes: &[u8]) -> Result<ReturnSeries, CliError> {
    parse_returns(bytes, Timescale::Raw).map_err(CliError::input(path))
}

fn to_abs(series: &ReturnSeries) -> ReturnSeries {
    abs_returns(series)
}

pub fn ingest(args: &IngestArgs, input: &[u8], sink: &Sink) -> Result<(), CliError> {
    let prices = parse_prices(input).map_err(CliError::input(&args.input))?;
    let scales: Vec<Timescale> = match args.timescale {
        TimescaleArg::All => Timescale::BARS.to_vec(),
        TimescaleArg::Minute => vec![Timescale::Minute],
        TimescaleArg::Hour => vec![Timescale::Hour],
        TimescaleArg::FourHour => vec![Timescale::FourHour],
        TimescaleArg::Day => vec![Timescale::Day],
    };
    for ts in scales {
        let bars = resample(&prices, ts)?;
        let signed = log_returns(&bars)?;
        let abs = abs_returns(&signed);
        sink.csv(&format!("returns_{ts}_signed.csv"), |w| write_returns(&signed, w))?;
        sink.csv(&format!("returns_{ts}_abs.csv"), |w| write_returns(&abs, w))?;
        println!("{ts}: {} bars, {} returns", bars.len(), signed.len());
    }
    Ok(())
}

#[derive(Serialize)]
struct DiagnoseSummary {
    n: usize,
    kind: ReturnKind,
    acf_band: f64,
    acf_lag1: Option<f64>,
    lags_outside_band: usize,
    max_lag: usize,
    periodogram_n_used: usize,
    peak_frequency: f64,
    adf_statistic: f64,
    adf_lags_used: usize,
    reject_1: bool,
    reject_5: bool,
    reject_10: bool,
    histogram_bins: usize,
    histogram_degenerate: bool,
}

#[derive(Serialize)]
struct AdfOut {
    statistic: f64,
    lags_used: usize,
    nobs: usize,
    critical_1: f64,
    critical_5: f64,
    critical_10: f64,
    reject_1: bool,
    reject_5: bool,
    reject_10: bool,
}

pub fn diagnose_cmd(args: &DiagnoseArgs, input: &[u8], sink: &Sink) -> Result<(), CliError> {
    let raw = load_returns(&args.input, input)?;
    let series = if args.signed { raw } else { to_abs(&raw) };
    let b = diagnose(&series, args.max_lag, args.bins, args.adf_max_lags)?;
    sink.csv("acf.csv", |w| b.acf.write_csv(w))?;
    sink.csv("periodogram.csv", |w| b.periodogram.write_csv(w))?;
    sink.csv("histogram.csv", |w| b.histogram.write_csv(w))?;
    let a = &b.adf;
    sink.json(
        "adf.json",
        &AdfOut {
            statistic: a.statistic,
            lags_used: a.lags_used,
            nobs: a.nobs,
            critical_1: a.critical_1,
            critical_5: a.critical_5,
            critical_10: a.critical_10,
            reject_1: a.reject_1,
            reject_5: a.reject_5,
            reject_10: a.reject_10,
        },
    )?;
    let p = &b.periodogram;
    let peak = p
        .power
        .iter()
        .enumerate()
        .skip(1)
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
        .0;
    let summary = DiagnoseSummary {
        n: series.len(),
        kind: series.kind(),
        acf_band: b.acf.ci_halfwidth,
        acf_lag1: b.acf.acf.get(1).copied(),
        lags_outside_band: b.acf.acf[1..]
            .iter()
            .filter(|r| r.abs() > b.acf.ci_halfwidth)
            .count(),
        max_lag: args.max_lag,
        periodogram_n_used: p.n_used,
        peak_frequency: p.frequencies.get(peak).copied().unwrap_or(0.0),
        adf_statistic: a.statistic,
        adf_lags_used: a.lags_used,
        reject_1: a.reject_1,
        reject_5: a.reject_5,
        reject_10: a.reject_10,
        histogram_bins: b.histogram.counts.len(),
        histogram_degenerate: b.histogram.degenerate,
    };
    sink.json("summary.json", &summary)?;
    println!(
        "n={} adf={:.4} reject_10={} acf[1]={:.4}",
        summary.n,
        a.statistic,
        a.reject_10,
        summary.acf_lag1.unwrap_or(f64::NAN)
    );
    Ok(())
}

#[derive(Serialize)]
struct FitOut {
    theta_hat: f64,
    stderr: f64,
    mode: ModeArg,
    model: &'static str,
    hyperparams: ModelSpec,
    hyperparams_source: &'static str,
    acceptance_rate: f64,
    iterations: usize,
    burn_in: usize,
    proposal_step: f64,
    initial_theta: f64,
}

fn family(model: ModelArg) -> Option<Family> {
    match model {
        ModelArg::Iga => Some(Family::InverseGamma),
        ModelArg::Logn => Some(Family::LogNormal),
        ModelArg::Sichi2 => None,
    }
}

pub fn fit(args: &FitArgs, input: &[u8], seed: u64, sink: &Sink) -> Result<(), CliError> {
    let data = load_returns(&args.input, input)?;
    let pool = pooling(args.block_length)?;
    let (model, source) = match explicit_model(args.model, &args.hyper)? {
        Some(m) => (m, "given"),
        None => {
            let fam = family(args.model)
                .ok_or_else(|| usage("--model sichi2 needs --nu0 and --sigma0-sq"))?;
            let fit = fit_hyperparameters(
                &data,
                fam,
                args.hyper.mu,
                pool,
                args.draws,
                grid_seed(seed, fam),
            )?;
            (fit.model, "grid")
        }
    };
    let (mode, default_lr, default_burn) = match args.mode {
        ModeArg::Standard => (AcceptanceMode::Standard, 0.0, args.iterations / 10),
        ModeArg::Greedy => (AcceptanceMode::PaperGreedy, 1e-3, 0),
    };
    let config = McmcConfig {
        iterations: args.iterations,
        proposal_step: args.step,
        learning_rate: args.learning_rate.unwrap_or(default_lr),
        momentum: args.momentum,
        acceptance_mode: mode,
        burn_in: args.burn_in.unwrap_or(default_burn),
        seed,
        initial_theta: args.initial_theta,
    };
    let trace = run_chain(&data, &model, &config)?;
    let est = estimate_theta(&trace)?;
    sink.csv("trace.csv", |w| trace.write_csv(w))?;
    sink.json(
        "estimate.json",
        &FitOut {
            theta_hat: est.point,
            stderr: est.stderr,
            mode: args.mode,
            model: model.tag(),
            hyperparams: model,
            hyperparams_source: source,
            acceptance_rate: trace.acceptance_rate(),
            iterations: config.iterations,
            burn_in: config.burn_in,
            proposal_step: trace.proposal_step,
            initial_theta: trace.initial_theta,
        },
    )?;
    println!("{model}: theta_hat={} stderr={}", est.point, est.stderr);
    Ok(())
}

#[derive(Serialize)]
struct Sources {
    m1: &'static str,
    m2: &'static str,
}

#[derive(Serialize)]
struct CompareOut {
    fraction_m1: f64,
    mean_bf: f64,
    median_bf: f64,
    posterior_prob_m1: f64,
    n_series: usize,
    n_draws: usize,
    m1: ModelSpec,
    m2: ModelSpec,
    seed: u64,
    block_length: Option<usize>,
    hyperparams_source: Sources,
}

pub fn compare(args: &CompareArgs, input: &[u8], seed: u64, sink: &Sink) -> Result<(), CliError> {
    let raw = load_returns(&args.input, input)?;
    let data = if args.abs { to_abs(&raw) } else { raw };
    let pool = pooling(args.block_length)?;
    let h = &args.hyper;
    if h.nu0.is_some() || h.sigma0_sq.is_some() {
        return Err(usage("compare takes --alpha/--beta and --s only"));
    }
    let pick = |fam: Family, given: Option<Law>| -> Result<(ModelSpec, &'static str), CliError> {
        match given {
            Some(law) => Ok((ModelSpec::new(law, h.mu)?, "given")),
            None => {
                let fit = fit_hyperparameters(&data, fam, h.mu, pool, args.draws, grid_seed(seed, fam))?;
                Ok((fit.model, "grid"))
            }
        }
    };
    let iga = match (h.alpha, h.beta) {
        (Some(alpha), Some(beta)) => Some(Law::InverseGamma { alpha, beta }),
        (None, None) => None,
        _ => return Err(usage("--alpha and --beta must be given together")),
    };
    let (m1, src1) = pick(Family::InverseGamma, iga)?;
    let (m2, src2) = pick(Family::LogNormal, h.s.map(|s| Law::LogNormal { s }))?;
    let series = bf_series_pooled(&data, &m1, &m2, pool, args.n_series, args.draws, seed)?;
    let summary = preference_summary(&series)?;
    sink.csv("bf.csv", |w| series.write_csv(w))?;
    sink.json(
        "summary.json",
        &CompareOut {
            fraction_m1: summary.fraction_m1,
            mean_bf: summary.mean_bf,
            median_bf: summary.median_bf,
            posterior_prob_m1: summary.posterior_prob_m1,
            n_series: args.n_series,
            n_draws: args.draws,
            m1,
            m2,
            seed,
            block_length: args.block_length,
            hyperparams_source: Sources { m1: src1, m2: src2 },
        },
    )?;
    println!(
        "{m1} vs {m2}: fraction_m1={} mean_bf={}",
        summary.fraction_m1, summary.mean_bf
    );
    Ok(())
}

#[derive(Serialize)]
struct SimulateOut {
    model: ModelSpec,
    n_points: usize,
    block_length: usize,
    seed: u64,
    p0: f64,
    start: String,
    step: i64,
}

pub fn simulate(args: &SimulateArgs, seed: u64, sink: &Sink) -> Result<(), CliError> {
    let model = required_model(args.model, &args.hyper)?;
    let start: DateTime<Utc> = DateTime::parse_from_rfc3339(&args.start)
        .map_err(|e| usage(format!("--start `{}`: {e}", args.start)))?
        .with_timezone(&Utc);
    if args.step <= 0 {
        return Err(usage("--step must be a positive number of seconds"));
    }
    let config = GeneratorConfig {
        model,
        n_points: args.n,
        block_length: args.block,
        seed,
    };
    let synth = gen_superstat(&config)?;
    let prices = gen_prices_from_returns(&synth.returns, args.p0, start, Duration::seconds(args.step))?;
    let returns = ReturnSeries::with_timestamps(
        synth.returns.values().to_vec(),
        prices.timestamps()[1..].to_vec(),
        prices.timescale(),
        ReturnKind::Signed,
    )?;
    sink.csv("prices.csv", |w| write_prices(&prices, w))?;
    sink.csv("returns.csv", |w| write_returns(&returns, w))?;
    if !args.no_theta {
        sink.csv("theta_path.csv", |w| {
            use std::io::Write;
            writeln!(w, "block,theta")?;
            for (j, t) in synth.theta_path.iter().enumerate() {
                writeln!(w, "{j},{t}")?;
            }
            Ok(())
        })?;
    }
    sink.json(
        "manifest.json",
        &SimulateOut {
            model,
            n_points: args.n,
            block_length: args.block,
            seed,
            p0: args.p0,
            start: start.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            step: args.step,
        },
    )?;
    println!("{model}: {} returns in {} blocks", args.n, synth.theta_path.len());
    Ok(())
}

/// `n` points from `lo` to `hi`; a grid symmetric about zero is exactly
/// symmetric in floating point.
fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let m = (n - 1) as f64;
    (0..n)
        .map(|i| mid + half * ((2 * i) as f64 - m) / m)
        .collect()
}

pub fn predict(args: &PredictArgs, sink: &Sink) -> Result<(), CliError> {
    let model = required_model(args.model, &args.hyper)?;
    if args.grid_points == 0 {
        return Err(usage("--grid-points must be at least 1"));
    }
    let scale = predictive_sd(&model).unwrap_or(match model.law {
        Law::InverseGamma { alpha, beta } => (beta / alpha).sqrt(),
        Law::ScaledInvChi2 { sigma0_sq, .. } => sigma0_sq.sqrt(),
        Law::LogNormal { .. } => 1.0,
    });
    let lo = args
        .grid_min
        .unwrap_or(if args.abs { 0.0 } else { model.mu - 10.0 * scale });
    let hi = args.grid_max.unwrap_or(if args.abs {
        model.mu.abs() + 10.0 * scale
    } else {
        model.mu + 10.0 * scale
    });
    if !(hi > lo) && args.grid_points > 1 {
        return Err(usage("--grid-max must exceed --grid-min"));
    }
    let grid = linspace(lo, hi, args.grid_points);
    let curve = if args.abs {
        predictive_abs_curve(&model, &grid, args.tol)?
    } else {
        predictive_curve(&model, &grid, args.tol)?
    };
    sink.csv("predictive.csv", |w| curve.write_csv(w))?;
    println!("{model}: {} grid points on [{lo}, {hi}]", grid.len());
    Ok(())
}
