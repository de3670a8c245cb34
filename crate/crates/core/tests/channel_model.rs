use fluidnet::channel::*;
use fluidnet::config::RunConfig;
use fluidnet::geometry::{build_frame_budget, FaArrayConfig};
use fluidnet::numerics::{integrate_finite, QuadratureSpec};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn generated_gains_follow_the_correlation_model() {
    let cfg = FaArrayConfig::new(2, 6, 0, 2.0, 0.06).unwrap();
    let mu: Vec<f64> = (1..=6).map(|i| autocorrelation(i, &cfg).unwrap()).collect();
    let sigma_sq = 1.7;
    let n = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut power = [0.0; 6];
    let mut cross = [[Complex64::new(0.0, 0.0); 6]; 6];
    let mut between = Complex64::new(0.0, 0.0);
    for _ in 0..n {
        let g = sample_correlated_channels(&mut rng, &cfg, sigma_sq).unwrap();
        for i in 0..6 {
            power[i] += g[0][i].norm_sqr();
            for j in 0..6 {
                cross[i][j] += g[0][i] * g[0][j].conj();
            }
        }
        between += g[0][0] * g[1][0].conj();
    }
    // sample correlations of unit-variance complex Gaussians have
    // standard deviation about 1/sqrt(n)
    let tol = 5.0 / (n as f64).sqrt();
    for i in 0..6 {
        assert!((power[i] / n as f64 / sigma_sq - 1.0).abs() < tol);
        let c1 = cross[i][0].re / n as f64 / sigma_sq;
        assert!((c1 - if i == 0 { 1.0 } else { mu[i] }).abs() < tol, "port {i}: {c1} vs {}", mu[i]);
        for j in 1..6 {
            if i >= 1 && i != j {
                let c = cross[i][j].re / n as f64 / sigma_sq;
                assert!((c - mu[i] * mu[j]).abs() < tol, "({i},{j}): {c} vs {}", mu[i] * mu[j]);
            }
        }
    }
    assert!((between / n as f64 / sigma_sq).norm() < tol);
}

#[test]
fn joint_cdf_tends_to_one() {
    let p = CorrelationProfile::from_variances(vec![0.0, 0.9, 0.6], vec![1.2, 0.4, 0.9]).unwrap();
    let v = joint_cdf(&[12.0, 12.0, 12.0], &p, &QuadratureSpec::default()).unwrap();
    assert!((v - 1.0).abs() < 1e-8);
}

#[test]
fn joint_cdf_is_the_integral_of_joint_pdf() {
    let spec = QuadratureSpec::default();
    let inner = spec.with_tolerances(1e-11, 1e-10);
    for (mu, s, taus) in [
        (0.9, [1.0, 0.3], [1.0, 1.0]),
        (0.5, [1.3, 0.8], [0.7, 1.6]),
        (-0.99, [1.05, 0.07], [1.4, 0.5]),
    ] {
        let p = CorrelationProfile::from_variances(vec![0.0, mu], s.to_vec()).unwrap();
        let cdf = joint_cdf(&taus, &p, &spec).unwrap();
        let box_integral = integrate_finite(
            |x| integrate_finite(|y| joint_pdf(&[x, y], &p).unwrap(), 0.0, taus[1], &inner).unwrap(),
            0.0,
            taus[0],
            &inner,
        )
        .unwrap();
        assert!((cdf - box_integral).abs() < 1e-6, "{cdf} vs {box_integral}");
    }
}

#[test]
fn error_variance_monotonicity() {
    let base = RunConfig::default().scenario;
    let rho = base.network.length_scale();
    let at = |m: usize, nu: usize, frac: f64| {
        let mut s = base;
        s.array.num_fas = m;
        s.array.skipped_ports = nu;
        s.frame.estimation_fraction = frac;
        let b = build_frame_budget(&s.array, &s.fluid, &s.frame).unwrap();
        (b.selected_count, estimation_error_variance(1, rho, &s.array, &b, &s.network).unwrap().error_variance)
    };
    for nu in [0, 1, 3] {
        let v: Vec<f64> = (1..=7).map(|m| at(m, nu, 0.16).1).collect();
        assert!(v.windows(2).all(|w| w[1] > w[0]), "in M: {v:?}");
        let v: Vec<f64> = [0.16, 0.2, 0.3, 0.5].iter().map(|f| at(4, nu, *f).1).collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]), "in L_e: {v:?}");
    }
    let mut by_count: Vec<(usize, f64)> = (0..15).map(|nu| at(4, nu, 0.16)).collect();
    by_count.sort_by(|a, b| a.partial_cmp(b).unwrap());
    by_count.dedup_by_key(|p| p.0);
    assert!(by_count.windows(2).all(|w| w[1].1 > w[0].1), "in N': {by_count:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn skip_count_meets_its_target(
        m in 1usize..7,
        n in 2usize..40,
        frac in 0.05f64..0.4,
        density in 1e-6f64..1e-3,
        target in 0.2f64..0.9,
        dbm in 0.0f64..60.0,
    ) {
        let mut s = RunConfig::default().scenario;
        s.array.num_fas = m;
        s.array.ports_per_fa = n;
        s.frame.estimation_fraction = frac;
        s.network.bs_density = density;
        s.network.tx_power = 10f64.powf((dbm - 30.0) / 10.0);
        let rho = s.network.length_scale();
        let nu_star = match min_skipped_ports(target, rho, 1, &s.array, &s.fluid, &s.frame, &s.network) {
            Ok(v) => v,
            Err(_) => return Ok(()),
        };
        let skip = nu_star.ceil() as usize;
        prop_assume!(skip < n);
        s.array.skipped_ports = skip;
        let b = build_frame_budget(&s.array, &s.fluid, &s.frame).unwrap();
        let e = estimation_error_variance(1, rho, &s.array, &b, &s.network).unwrap().error_variance;
        prop_assert!(e <= target, "nu* = {nu_star}, skip {skip}: {e} > {target}");
    }

    #[test]
    fn sampler_uses_one_anchor_per_antenna(seed in 0u64..1000) {
        let sampler = ChannelSampler::from_correlations(vec![0.0, 1.0, -1.0], 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = [Complex64::new(0.0, 0.0); 3];
        sampler.sample_fa(&mut rng, &mut g);
        // full correlation reuses the reference draw exactly
        prop_assert!((g[1] - g[0]).norm() < 1e-12);
        prop_assert!((g[2] + g[0]).norm() < 1e-12);
        let _: f64 = rng.random();
    }
}
