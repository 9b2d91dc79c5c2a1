mod common;

use common::{golden_max, integrate_positive};
use proptest::prelude::*;
use superstat::densities::{
    conjugate_posterior_iga, conjugate_posterior_sichi2, igamma_log_pdf, lognormal_log_pdf,
    scaled_inv_chi2_log_pdf, sichi2_as_iga,
};
use superstat::SufficientStats;

#[test]
fn priors_integrate_to_one() {
    let cases: [(&str, Box<dyn Fn(f64) -> f64>); 3] = [
        ("iga(3,2)", Box::new(|t| igamma_log_pdf(t, 3.0, 2.0).unwrap().exp())),
        ("logn(1.2)", Box::new(|t| lognormal_log_pdf(t, 1.2).unwrap().exp())),
        ("sichi2(5,0.8)", Box::new(|t| scaled_inv_chi2_log_pdf(t, 5.0, 0.8).unwrap().exp())),
    ];
    for (name, f) in &cases {
        let total = integrate_positive(f, -30.0, 30.0, 1e-12);
        assert!((total - 1.0).abs() < 1e-8, "{name}: {total}");
    }
}

#[test]
fn igamma_mode_by_search() {
    let m = golden_max(|t| igamma_log_pdf(t, 1.0, 2.0).unwrap(), 1e-3, 20.0, 1e-10);
    assert!((m - 1.0).abs() < 1e-6, "{m}");
}

#[test]
fn likelihood_maximized_at_mean_square() {
    let xs = common::gaussian(500, 0.7, 11);
    let stats = SufficientStats::from_slice(&xs, 0.0).unwrap();
    let m = golden_max(|t| stats.log_likelihood(t), 1e-3, 10.0, 1e-12);
    assert!((m - stats.mean_sq_dev).abs() < 1e-6 * stats.mean_sq_dev, "{m}");
}

#[test]
fn conjugate_posterior_is_renormalized_product() {
    let xs = common::gaussian(40, 1.3, 5);
    let stats = SufficientStats::from_slice(&xs, 0.0).unwrap();
    let (alpha, beta) = (2.5, 1.5);
    let log_product = |t: f64| stats.log_likelihood(t) + igamma_log_pdf(t, alpha, beta).unwrap();
    // Scale out the peak before integrating to keep the quadrature in range.
    let (ap, bp) = conjugate_posterior_iga(alpha, beta, &stats).unwrap();
    let peak = log_product(bp / (ap + 1.0));
    let z = integrate_positive(|t| (log_product(t) - peak).exp(), -20.0, 20.0, 1e-14);
    let log_z = peak + z.ln();
    for t in [0.3, 0.8, 1.0, 1.4, 2.5, 5.0] {
        let lhs = log_product(t) - log_z;
        let rhs = igamma_log_pdf(t, ap, bp).unwrap();
        assert!((lhs - rhs).abs() < 1e-10, "θ={t}: {lhs} vs {rhs}");
    }
}

#[test]
fn sichi2_posterior_maps_to_iga_posterior() {
    let stats = SufficientStats::new(7, 0.45).unwrap();
    let (nu0, s0) = (3.0, 0.9);
    let (nu, s2) = conjugate_posterior_sichi2(nu0, s0, &stats).unwrap();
    let (a0, b0) = sichi2_as_iga(nu0, s0);
    let (a, b) = conjugate_posterior_iga(a0, b0, &stats).unwrap();
    let (a2, b2) = sichi2_as_iga(nu, s2);
    assert!((a - a2).abs() < 1e-14 && (b - b2).abs() < 1e-14);
    let (nu, s2) = conjugate_posterior_sichi2(1.0, 2.0, &SufficientStats::new(3, 0.4).unwrap()).unwrap();
    assert_eq!(nu, 4.0);
    assert!((s2 - 0.8).abs() < 1e-15);
}

proptest! {
    #[test]
    fn sichi2_is_reparameterized_iga(
        theta in 1e-3f64..50.0,
        nu0 in 0.1f64..40.0,
        s0 in 1e-2f64..10.0,
    ) {
        let a = scaled_inv_chi2_log_pdf(theta, nu0, s0).unwrap();
        let b = igamma_log_pdf(theta, nu0 / 2.0, nu0 * s0 / 2.0).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn likelihood_is_permutation_invariant(
        xs in prop::collection::vec(-5.0f64..5.0, 1..60),
        theta in 0.01f64..10.0,
        rot in 0usize..60,
    ) {
        let mut ys = xs.clone();
        ys.rotate_left(rot % xs.len());
        ys.reverse();
        let a = SufficientStats::from_slice(&xs, 0.1).unwrap().log_likelihood(theta);
        let b = SufficientStats::from_slice(&ys, 0.1).unwrap().log_likelihood(theta);
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
    }

    #[test]
    fn nonpositive_theta_rejected(theta in -10.0f64..=0.0) {
        prop_assert!(igamma_log_pdf(theta, 1.0, 1.0).is_err());
        prop_assert!(lognormal_log_pdf(theta, 1.0).is_err());
    }
}
