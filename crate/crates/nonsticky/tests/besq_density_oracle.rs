//! Brute-force validation of the squared-Bessel sampler against a
//! numerical integration of the transition density
//!
//! ```text
//! p_t(y0, y) = (1/(2t)) (y/y0)^(nu/2) exp(-(y0+y)/(2t)) I_nu(sqrt(y0 y)/t),
//! nu = delta/2 - 1,
//! ```
//!
//! evaluated independently of the sampler (Bessel I by power series,
//! quadrature by Simpson under a singularity-removing substitution).

use nonsticky::estimators::MeanVarAccumulator;
use nonsticky::oracles::{besq_exact_sample, BesqParams};
use nonsticky::rng::RngKey;
use statrs::function::gamma::gamma;

/// Modified Bessel function of the first kind, fractional order, by its
/// ascending series; plenty accurate for the argument range used here.
fn bessel_i(nu: f64, x: f64) -> f64 {
    let half = x / 2.0;
    let mut sum = 0.0;
    for m in 0..200 {
        let m_f = m as f64;
        let term = half.powf(2.0 * m_f + nu) / (gamma(m_f + 1.0) * gamma(m_f + nu + 1.0));
        sum += term;
        if term.abs() < 1e-18 * sum.abs() && m > 4 {
            break;
        }
    }
    sum
}

fn transition_density(params: &BesqParams, y: f64) -> f64 {
    let (y0, t) = (params.y0, params.t);
    let nu = params.delta / 2.0 - 1.0;
    if y <= 0.0 {
        return 0.0;
    }
    (1.0 / (2.0 * t))
        * (y / y0).powf(nu / 2.0)
        * (-(y0 + y) / (2.0 * t)).exp()
        * bessel_i(nu, (y0 * y).sqrt() / t)
}

/// Integrate `y^k p(y)` over y > 0. The density blows up like
/// `y^nu` (nu in (-1, 0)) at the origin; substituting `y = u^6` removes
/// the singularity, after which plain Simpson converges fast.
fn density_moment(params: &BesqParams, k: i32, y_max: f64) -> f64 {
    let u_max = y_max.powf(1.0 / 6.0);
    let n = 40_000usize; // even
    let h = u_max / n as f64;
    let f = |u: f64| {
        if u == 0.0 {
            return 0.0;
        }
        let y = u.powi(6);
        6.0 * u.powi(5) * y.powi(k) * transition_density(params, y)
    };
    let mut acc = f(0.0) + f(u_max);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(i as f64 * h);
    }
    acc * h / 3.0
}

#[test]
fn sampler_matches_numerically_integrated_density() {
    // delta = 2/3, y0 = 16/9, t = 1: the CEV alpha = 1/4 case.
    let params = BesqParams::new(2.0 / 3.0, 16.0 / 9.0, 1.0).unwrap();

    let mass = density_moment(&params, 0, 120.0);
    let mean = density_moment(&params, 1, 120.0);
    let second = density_moment(&params, 2, 120.0);
    let variance = second - mean * mean;

    // The integration itself must reproduce the closed-form moments.
    assert!((mass - 1.0).abs() < 1e-7, "density mass {mass}");
    assert!(
        ((mean - params.mean()) / params.mean()).abs() < 1e-7,
        "density mean {mean} vs {}",
        params.mean()
    );
    assert!(
        ((variance - params.variance()) / params.variance()).abs() < 1e-6,
        "density variance {variance} vs {}",
        params.variance()
    );

    // And the sampler must agree with the integrated moments.
    let n = 200_000u64;
    let mut acc = MeanVarAccumulator::default();
    for j in 0..n {
        acc.push(besq_exact_sample(&params, RngKey::new(271828, j)));
    }
    let z = (acc.mean() - mean).abs() / acc.standard_error();
    assert!(
        z < 4.0,
        "sample mean {} vs density mean {mean}: {z:.2} SEs",
        acc.mean()
    );
    let rel_var = (acc.sample_variance() - variance).abs() / variance;
    assert!(
        rel_var < 0.03,
        "sample variance {} vs density variance {variance}",
        acc.sample_variance()
    );
}

#[test]
fn sampler_matches_density_cdf_at_quantiles() {
    let params = BesqParams::new(2.0 / 3.0, 16.0 / 9.0, 1.0).unwrap();
    let n = 200_000u64;
    let mut samples: Vec<f64> = (0..n)
        .map(|j| besq_exact_sample(&params, RngKey::new(314159, j)))
        .collect();
    samples.sort_unstable_by(f64::total_cmp);
    for q in [0.5, 1.0, 2.0, 4.0] {
        let cdf = density_moment_cdf(&params, q);
        let empirical = samples.partition_point(|&y| y <= q) as f64 / n as f64;
        // Binomial 4-sigma band.
        let band = 4.0 * (cdf * (1.0 - cdf) / n as f64).sqrt();
        assert!(
            (empirical - cdf).abs() < band,
            "P(Y <= {q}): empirical {empirical} vs integrated {cdf} (band {band})"
        );
    }
}

fn density_moment_cdf(params: &BesqParams, y_cut: f64) -> f64 {
    density_moment(params, 0, y_cut)
}
