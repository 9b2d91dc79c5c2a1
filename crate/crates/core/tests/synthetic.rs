mod common;

use common::{ks_critical_1pct, ks_statistic};
use statrs::distribution::{ContinuousCDF, InverseGamma, LogNormal, Normal};
use superstat::diagnostics::acf;
use superstat::market_data::abs_returns;
use superstat::synthetic::{gen_superstat, GeneratorConfig, SyntheticSeries};
use superstat::ModelSpec;

fn generate(model: ModelSpec, n: usize, block: usize, seed: u64) -> SyntheticSeries {
    gen_superstat(&GeneratorConfig {
        model,
        n_points: n,
        block_length: block,
        seed,
    })
    .unwrap()
}

fn variance(xs: &[f64]) -> f64 {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

#[test]
fn long_run_variance_is_mean_theta() {
    let iga = generate(ModelSpec::iga(3.0, 2.0).unwrap(), 1_000_000, 100, 1);
    let v = variance(iga.returns.values());
    assert!((v - 1.0).abs() < 0.05, "{v}");
    let logn = generate(ModelSpec::logn(1.0).unwrap(), 1_000_000, 100, 2);
    let v = variance(logn.returns.values());
    let target = 0.5f64.exp();
    assert!((v / target - 1.0).abs() < 0.05, "{v}");
}

#[test]
fn single_regime_variance_converges_to_theta() {
    let s = generate(ModelSpec::iga(3.0, 2.0).unwrap(), 200_000, 200_000, 5);
    assert_eq!(s.theta_path.len(), 1);
    let v = variance(s.returns.values());
    assert!((v / s.theta_path[0] - 1.0).abs() < 0.02);
}

#[test]
fn theta_path_follows_mixing_law() {
    let n_blocks = 10_000;
    let iga = generate(ModelSpec::iga(3.0, 2.0).unwrap(), n_blocks * 10, 10, 7);
    let law = InverseGamma::new(3.0, 2.0).unwrap();
    let d = ks_statistic(&iga.theta_path, |t| law.cdf(t));
    assert!(d < ks_critical_1pct(n_blocks), "iga D={d}");
    let logn = generate(ModelSpec::logn(0.8).unwrap(), n_blocks * 10, 10, 8);
    let law = LogNormal::new(0.0, 0.8).unwrap();
    let d = ks_statistic(&logn.theta_path, |t| law.cdf(t));
    assert!(d < ks_critical_1pct(n_blocks), "logn D={d}");
}

#[test]
fn returns_gaussian_within_each_block() {
    let s = generate(ModelSpec::logn(1.0).unwrap(), 5_000, 1_000, 9);
    let z = Normal::new(0.0, 1.0).unwrap();
    for (j, block) in s.returns.values().chunks(1_000).enumerate() {
        let sd = s.theta_path[j].sqrt();
        let std: Vec<f64> = block.iter().map(|x| x / sd).collect();
        let d = ks_statistic(&std, |x| z.cdf(x));
        assert!(d < ks_critical_1pct(block.len()), "block {j}: D={d}");
    }
}

#[test]
fn block_length_raises_abs_return_lag_one_acf() {
    let m = ModelSpec::iga(3.0, 2.0).unwrap();
    let mean_acf1 = |block: usize| {
        (0..50u64)
            .map(|seed| {
                let s = generate(m, 10_000, block, 1000 + seed);
                acf(&abs_returns(&s.returns), 1).unwrap().acf[1]
            })
            .sum::<f64>()
            / 50.0
    };
    let short = mean_acf1(1);
    let long = mean_acf1(100);
    assert!(long > short, "block 100: {long}, block 1: {short}");
}
