//! Statistical law checks: simulated paths against independent analytic
//! oracles (inverse Gaussian law, Poisson counts, exact defect, Kendall-style
//! moment identities). Seeds are fixed, so every run sees the same draws; the
//! acceptance bands are 4-5 sigma so the checks stay insensitive to harmless
//! refactors of unrelated draw order.

use fptd_core::closed_form::{bm_defect, ig_cdf};
use fptd_core::estimator::{estimate_cdf, estimate_defect};
use fptd_core::model::{JumpDiffusionModel, JumpDistribution, JumpSign, Level};
use fptd_core::oracles::euler_hitting_mc;
use fptd_core::pathsim::{detect_hit, refine_tau, simulate_skeleton};
use fptd_core::rng::RandomStream;

fn model(m: f64, a: f64, jumps: JumpDistribution) -> JumpDiffusionModel {
    JumpDiffusionModel { m, a, jumps }
}

fn lvl(x: f64) -> Level {
    Level::new(x).unwrap()
}

/// Two-sided Kolmogorov-Smirnov statistic against a continuous CDF.
fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i as f64 + 1.0) / n - f);
    }
    d
}

#[test]
fn jump_samplers_match_their_cdfs() {
    // Sampling goes through inverse-CDF transforms; the CDF evaluation is a
    // separate closed-form path, so a KS test cross-checks the two. The
    // 2 / sqrt(n) threshold is the asymptotic 0.006% Kolmogorov quantile.
    let continuous_laws = [
        JumpDistribution::Exponential {
            rate: 1.7,
            sign: JumpSign::Positive,
        },
        JumpDistribution::Exponential {
            rate: 0.6,
            sign: JumpSign::Negative,
        },
        JumpDistribution::DoubleExponential {
            p: 0.4,
            eta1: 1.0,
            eta2: 3.0,
        },
        JumpDistribution::Gaussian {
            mu: -0.5,
            sigma: 1.3,
        },
        JumpDistribution::FiniteMixture {
            weights: vec![0.3, 0.7],
            components: vec![
                JumpDistribution::Exponential {
                    rate: 1.0,
                    sign: JumpSign::Positive,
                },
                JumpDistribution::Gaussian {
                    mu: -1.0,
                    sigma: 0.5,
                },
            ],
        },
    ];
    let n = 60_000;
    for (k, law) in continuous_laws.iter().enumerate() {
        let mut rng = RandomStream::for_path(100 + k as u64, 0);
        let mut samples: Vec<f64> = (0..n).map(|_| law.sample(&mut rng)).collect();
        let d = ks_statistic(&mut samples, |y| law.cdf(y));
        assert!(
            d < 2.0 / (n as f64).sqrt(),
            "law {k}: KS statistic {d} at n {n}"
        );
    }
}

#[test]
fn jump_counts_have_poisson_mean_and_variance() {
    let m = model(0.0, 3.0, JumpDistribution::PointMass { c: 1.0 });
    let n = 30_000;
    let lambda = 6.0; // a * horizon
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for path in 0..n {
        let mut rng = RandomStream::for_path(7, path);
        let skel = simulate_skeleton(&m, 2.0, &[], &mut rng).unwrap();
        let c = f64::from(skel.jump_count);
        sum += c;
        sumsq += c * c;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = sumsq / nf - mean * mean;
    // mean ~ lambda with sd sqrt(lambda / n); var ~ lambda with sd
    // sqrt((mu4 - lambda^2) / n), mu4 = lambda (1 + 3 lambda) + ... ~ 78.
    assert!(
        (mean - lambda).abs() < 4.0 * (lambda / nf).sqrt(),
        "count mean {mean}"
    );
    assert!(
        (var - lambda).abs() < 5.0 * (78.0f64 / nf).sqrt(),
        "count variance {var}"
    );
}

#[test]
fn terminal_values_have_the_exact_mean_and_variance() {
    // Pure diffusion: X_T ~ N(m T, T).
    let bm = model(0.7, 0.0, JumpDistribution::PointMass { c: 0.0 });
    let n = 100_000;
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for path in 0..n {
        let mut rng = RandomStream::for_path(8, path);
        let skel = simulate_skeleton(&bm, 2.0, &[], &mut rng).unwrap();
        sum += skel.value_at_horizon;
        sumsq += skel.value_at_horizon * skel.value_at_horizon;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = sumsq / nf - mean * mean;
    assert!((mean - 1.4).abs() < 4.0 * (2.0f64 / nf).sqrt(), "mean {mean}");
    assert!((var - 2.0).abs() < 5.0 * (8.0f64 / nf).sqrt(), "variance {var}");

    // With jumps: E X_T = (m + a E Y) T, Var X_T = (1 + a E Y^2) T.
    let jd = model(-0.2, 2.0, JumpDistribution::PointMass { c: 0.3 });
    let mut sum = 0.0;
    for path in 0..n {
        let mut rng = RandomStream::for_path(9, path);
        let skel = simulate_skeleton(&jd, 1.5, &[], &mut rng).unwrap();
        sum += skel.value_at_horizon;
    }
    let mean = sum / nf;
    let exact = (-0.2 + 2.0 * 0.3) * 1.5;
    let sd = (1.5 * (1.0 + 2.0 * 0.09) / nf).sqrt();
    assert!((mean - exact).abs() < 4.0 * sd, "jump mean {mean} vs {exact}");
}

#[test]
fn hitting_probabilities_follow_the_inverse_gaussian_law() {
    let grid = [0.25, 0.5, 1.0, 2.0];
    for (seed, m) in [(11u64, 0.0), (12u64, -0.5)] {
        let bm = model(m, 0.0, JumpDistribution::PointMass { c: 0.0 });
        let est = estimate_cdf(&bm, lvl(1.0), &grid, 100_000, seed).unwrap();
        for (k, &t) in grid.iter().enumerate() {
            let exact = ig_cdf(t, 1.0, m).unwrap();
            let band = 4.0 * est.std_err[k].max(1e-4);
            assert!(
                (est.p_hat[k] - exact).abs() < band,
                "m {m} t {t}: p_hat {} vs {exact}",
                est.p_hat[k]
            );
        }
    }
}

#[test]
fn defect_estimate_matches_the_exact_brownian_tail() {
    let bm = model(-0.8, 0.0, JumpDistribution::PointMass { c: 0.0 });
    let est = estimate_defect(&bm, lvl(1.0), 150.0, 30_000, 13).unwrap();
    // At this horizon the truncated tail equals the true defect to ~1e-22.
    let exact_truncated = 1.0 - ig_cdf(150.0, 1.0, -0.8).unwrap();
    let defect = bm_defect(1.0, -0.8).unwrap();
    assert!((exact_truncated - defect).abs() < 1e-12);
    assert!(
        (est.defect_hat - defect).abs() < 4.0 * est.std_err,
        "defect_hat {} vs {defect}",
        est.defect_hat
    );
}

#[test]
fn bridge_detection_sits_above_the_discrete_observation_bound() {
    // Discrete observation misses crossings inside segments, so the Euler
    // reference is biased low; the bridge estimator must sit above it by
    // roughly the known 1/sqrt(n_steps) gap, and the fine reference must
    // close most of that gap.
    let m = model(0.0, 1.0, JumpDistribution::PointMass { c: 0.5 });
    let n = 40_000;
    let bridge = estimate_cdf(&m, lvl(1.0), &[1.0], n, 21).unwrap();
    let coarse = euler_hitting_mc(&m, lvl(1.0), 1.0, 16, n, 22).unwrap();
    let fine = euler_hitting_mc(&m, lvl(1.0), 1.0, 1024, n, 23).unwrap();
    let se = |a: f64, b: f64| (a * a + b * b).sqrt();
    let se_coarse = se(bridge.std_err[0], coarse.std_err);
    let se_fine = se(bridge.std_err[0], fine.std_err);
    assert!(
        bridge.p_hat[0] - coarse.p_hat > 0.01 + 3.0 * se_coarse,
        "bridge {} coarse {}",
        bridge.p_hat[0],
        coarse.p_hat
    );
    let gap = bridge.p_hat[0] - fine.p_hat;
    assert!(
        gap > -3.0 * se_fine && gap < 0.025,
        "bridge {} fine {} gap {gap}",
        bridge.p_hat[0],
        fine.p_hat
    );
    assert!(fine.p_hat > coarse.p_hat);
}

#[test]
fn refined_hitting_times_follow_the_inverse_gaussian_law() {
    // Chi-square goodness of fit of refined crossing times against the
    // exact law of tau conditioned on tau <= 1, for driftless Brownian
    // motion at level 1. Twenty equal-probability bins, edges found by
    // bisecting the exact CDF.
    let bm = model(0.0, 0.0, JumpDistribution::PointMass { c: 0.0 });
    let x = lvl(1.0);
    let p1 = ig_cdf(1.0, 1.0, 0.0).unwrap();
    let bins = 20usize;
    let mut edges = Vec::with_capacity(bins);
    for k in 1..=bins {
        let target = p1 * k as f64 / bins as f64;
        let (mut lo, mut hi) = (1e-12, 1.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if ig_cdf(mid, 1.0, 0.0).unwrap() < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        edges.push(0.5 * (lo + hi));
    }
    *edges.last_mut().unwrap() = 1.0;

    let n = 20_000;
    let mut counts = vec![0u64; bins];
    let mut hits = 0u64;
    for path in 0..n {
        let mut rng = RandomStream::for_path(31, path);
        let skel = simulate_skeleton(&bm, 1.0, &[], &mut rng).unwrap();
        let hit = detect_hit(&skel, x, &mut rng);
        let Some(c) = hit.crossing else { continue };
        assert!(!c.by_jump);
        let tau = refine_tau(&skel, x, c.anchor_index, &mut rng, 1e-6).unwrap();
        let bin = edges.partition_point(|&e| e < tau).min(bins - 1);
        counts[bin] += 1;
        hits += 1;
    }
    // Hit fraction itself must match the law.
    let p_hat = hits as f64 / n as f64;
    let se = (p1 * (1.0 - p1) / n as f64).sqrt();
    assert!((p_hat - p1).abs() < 4.0 * se, "hit fraction {p_hat} vs {p1}");

    let expected = hits as f64 / bins as f64;
    let chi2: f64 = counts
        .iter()
        .map(|&o| {
            let d = o as f64 - expected;
            d * d / expected
        })
        .sum();
    // 0.1% critical value of chi-square with 19 degrees of freedom.
    assert!(chi2 < 43.82, "chi2 {chi2}, counts {counts:?}");
}
