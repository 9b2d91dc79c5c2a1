//! Helpers for driving the binary, plus oracles that share no code with
//! the library.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use sha2::{Digest, Sha256};
use statrs::function::gamma::ln_gamma;

pub const BIN: &str = env!("CARGO_BIN_EXE_superstat");

pub fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

/// Runs and panics with stderr on a nonzero exit.
pub fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "superstat {args:?} exited {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// SHA-256 of every file in `dir`, by file name.
pub fn dir_digests(dir: &Path) -> BTreeMap<String, String> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            let bytes = fs::read(e.path()).unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                hex::encode(Sha256::digest(bytes)),
            )
        })
        .collect()
}

/// Data rows of an output CSV: the manifest line and header are dropped.
pub fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# {"), "{path:?} lacks a manifest line");
    lines.next().expect("header");
    lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

pub fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Writes a simulated IGa(3, 2) fixture into `dir` and returns the path of
/// its returns file.
pub fn fixture(dir: &Path, n: usize, seed: u64) -> PathBuf {
    let out = dir.join("fixture");
    run_ok(&[
        "--seed",
        &seed.to_string(),
        "--out-dir",
        p(&out),
        "simulate",
        "--alpha",
        "3",
        "--beta",
        "2",
        "--n",
        &n.to_string(),
        "--block",
        "100",
    ]);
    out.join("returns.csv")
}

/// Writes `values` as a returns CSV with minute timestamps.
pub fn write_returns_csv(path: &Path, values: &[f64]) {
    let mut s = String::from("timestamp,value\n");
    for (i, v) in values.iter().enumerate() {
        let h = i / 60;
        s += &format!(
            "2021-{:02}-{:02}T{:02}:{:02}:00Z,{v}\n",
            1 + h / (24 * 28),
            1 + (h / 24) % 28,
            h % 24,
            i % 60
        );
    }
    fs::write(path, s).unwrap();
}

/// `n` draws from N(0, var) on a generator unrelated to the library's.
pub fn gaussian(n: usize, var: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let d = Normal::new(0.0, var.sqrt()).unwrap();
    (0..n).map(|_| d.sample(&mut rng)).collect()
}

pub fn mean_sq(xs: &[f64]) -> f64 {
    xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64
}

/// Closed-form log evidence of n zero-mean Gaussian observations with mean
/// square `s` under an inverse-Gamma(α, β) variance prior.
pub fn iga_log_evidence(alpha: f64, beta: f64, n: usize, s: f64) -> f64 {
    let nf = n as f64;
    alpha * beta.ln() - ln_gamma(alpha) - 0.5 * nf * (2.0 * std::f64::consts::PI).ln()
        + ln_gamma(alpha + 0.5 * nf)
        - (alpha + 0.5 * nf) * (beta + 0.5 * nf * s).ln()
}

/// Adaptive Simpson on `[a, b]`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let flm = f(0.5 * (a + m));
        let frm = f(0.5 * (m + b));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `∫_0^∞ f(θ) dθ` through `θ = e^u` over `u ∈ [lo, hi]`, in unit panels.
pub fn integrate_positive<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    let g = |u: f64| {
        let t = u.exp();
        f(t) * t
    };
    let panels = ((hi - lo).ceil() as usize).max(1) * 4;
    let w = (hi - lo) / panels as f64;
    (0..panels)
        .map(|i| simpson(&g, lo + i as f64 * w, lo + (i + 1) as f64 * w, tol / panels as f64))
        .sum()
}

/// One-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// Lag-k sample autocorrelation, biased normalization.
pub fn acf_lag(xs: &[f64], k: usize) -> f64 {
    let n = xs.len();
    let m = xs.iter().sum::<f64>() / n as f64;
    let c0: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    let ck: f64 = (0..n - k).map(|t| (xs[t] - m) * (xs[t + k] - m)).sum();
    ck / c0
}

pub fn normal_pdf(x: f64, var: f64) -> f64 {
    (-0.5 * x * x / var).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

pub fn igamma_pdf(t: f64, alpha: f64, beta: f64) -> f64 {
    (alpha * beta.ln() - ln_gamma(alpha) - (alpha + 1.0) * t.ln() - beta / t).exp()
}
