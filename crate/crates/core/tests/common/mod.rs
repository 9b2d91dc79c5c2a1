//! Independent oracles shared by the integration tests. Nothing here calls
//! into the crate's own quadrature or evidence code.

#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use statrs::function::gamma::ln_gamma;
use superstat::ReturnSeries;

/// Adaptive Simpson on `[a, b]`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
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
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `∫_0^∞ f(θ) dθ` through `θ = e^u` on a wide window in `u`, split into
/// unit panels so narrow peaks are not skipped.
pub fn integrate_positive<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    let g = |u: f64| {
        let t = u.exp();
        f(t) * t
    };
    let panels = (hi - lo).ceil() as usize * 4;
    let w = (hi - lo) / panels as f64;
    (0..panels)
        .map(|i| simpson(&g, lo + i as f64 * w, lo + (i + 1) as f64 * w, tol / panels as f64))
        .sum()
}

/// Golden-section search for the maximizer of a unimodal `f` on `[a, b]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol * (1.0 + c.abs() + d.abs()) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Closed-form log evidence of n Gaussian observations with mean-square
/// deviation `s` under an inverse-Gamma(α, β) variance prior.
pub fn iga_log_evidence(alpha: f64, beta: f64, n: usize, s: f64) -> f64 {
    let nf = n as f64;
    alpha * beta.ln() - ln_gamma(alpha) - 0.5 * nf * (2.0 * std::f64::consts::PI).ln()
        + ln_gamma(alpha + 0.5 * nf)
        - (alpha + 0.5 * nf) * (beta + 0.5 * nf * s).ln()
}

pub fn mean_sq(xs: &[f64], mu: f64) -> f64 {
    xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / xs.len() as f64
}

/// `n` draws from N(0, var), on a generator unrelated to the crate's.
pub fn gaussian(n: usize, var: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let d = Normal::new(0.0, var.sqrt()).unwrap();
    (0..n).map(|_| d.sample(&mut rng)).collect()
}

pub fn series(xs: Vec<f64>) -> ReturnSeries {
    ReturnSeries::from_values(xs).unwrap()
}

/// One-sample Kolmogorov-Smirnov statistic `D_n`.
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

/// Asymptotic 1% critical value of `D_n`.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}
