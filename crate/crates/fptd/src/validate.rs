//! The runtime self-validation suite behind `fptd validate` and
//! `fptd selftest`.
//!
//! Every check re-derives something the library claims from an independent
//! direction: closed forms against quadrature, samplers against their CDFs,
//! the estimators against exact Brownian laws and against each other. Checks
//! are named, run in a fixed order with fixed seeds, and print one table row
//! each; any failure names itself and flips the exit code to 1.
//!
//! Monte Carlo bands are 4 standard errors wide (or exact, where the claim is
//! exact), sized so the whole suite's false-failure probability stays well
//! under 1% at both the full scale and the reduced `selftest` scale.

use std::io::{self, Write};

use fptd_core::closed_form::{
    bm_defect, f_zero, ftilde, ftilde_bound_holds, ftilde_bound_rhs, ig_cdf,
    neg_moment_bound_holds, series_term_bound_holds, series_term_ratio, smoothed_ftilde,
    BoundConstants,
};
use fptd_core::estimator::{self, DefectVerdict};
use fptd_core::model::{JumpDistribution, JumpSign};
use fptd_core::oracles::{
    euler_hitting_mc, kendall_residual, marginal_density, smoothed_ftilde_quadrature,
    MarginalDensitySpec,
};
use fptd_core::pathsim::{bridge_crossing_prob, detect_hit, refine_tau, simulate_skeleton};
use fptd_core::quad;
use fptd_core::rng::RandomStream;
use fptd_core::special::{gauss_abs_moment, lgamma, normal_cdf, normal_pdf, normal_sf};
use fptd_core::{JumpDiffusionModel, Level};

use crate::parallel;

/// Knobs for a validation run.
#[derive(Debug, Clone, Copy)]
pub struct ValidateOptions {
    /// Base seed; every check derives its own stream from it. Changing the
    /// seed changes Monte Carlo digits but must not change any verdict.
    pub seed: u64,
    /// Path-count multiplier: 1.0 for `validate`, 0.1 for `selftest`.
    pub scale: f64,
    /// Multiplier on the envelope constant `c_eps` (test-only mutation hook;
    /// 1.0 in normal operation, and e.g. 0.5 must make `ftilde_bound` fail).
    pub c_eps_factor: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            seed: 0,
            scale: 1.0,
            c_eps_factor: 1.0,
        }
    }
}

type CheckResult = Result<(), String>;

struct Check {
    name: &'static str,
    run: fn(&ValidateOptions) -> CheckResult,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> CheckResult {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn core<T>(r: fptd_core::error::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Path count for a Monte Carlo check after applying the scale knob.
fn scaled(opts: &ValidateOptions, base: u64) -> u64 {
    (((base as f64) * opts.scale).round() as u64).max(500)
}

fn level(x: f64) -> Level {
    Level::new(x).expect("validation levels are positive constants")
}

fn pure_diffusion(m: f64) -> JumpDiffusionModel {
    JumpDiffusionModel {
        m,
        a: 0.0,
        jumps: JumpDistribution::PointMass { c: 0.0 },
    }
}

fn gaussian_jump_model() -> JumpDiffusionModel {
    JumpDiffusionModel {
        m: 0.0,
        a: 1.0,
        jumps: JumpDistribution::Gaussian { mu: 0.0, sigma: 1.0 },
    }
}

// ---------------------------------------------------------------- checks --

fn special_functions(_: &ValidateOptions) -> CheckResult {
    ensure(normal_cdf(0.0) == 0.5, || "Phi(0) != 1/2".to_string())?;
    let phi1 = normal_cdf(1.0);
    ensure((phi1 - 0.841_344_746_068_542_9).abs() <= 1e-15, || {
        format!("Phi(1) = {phi1}")
    })?;
    let sf2 = normal_sf(2.0);
    ensure((sf2 - 0.022_750_131_948_179_195).abs() <= 1e-16, || {
        format!("Phibar(2) = {sf2}")
    })?;
    // Exact sandwich phi(x)(1/x - 1/x^3) < Phibar(x) < phi(x)/x at x = 10
    // checks the far tail without a frozen constant.
    let (p10, s10) = (normal_pdf(10.0), normal_sf(10.0));
    ensure(s10 > p10 * (0.1 - 1e-3) && s10 < p10 * 0.1, || {
        format!("Phibar(10) = {s10} outside its asymptotic sandwich")
    })?;
    let lg = lgamma(5.0);
    ensure((lg - 24f64.ln()).abs() <= 1e-13, || {
        format!("lgamma(5) = {lg}, want ln 24")
    })?;
    let m15 = gauss_abs_moment(1.5);
    ensure((m15 - 0.860_039_987_324_519_5).abs() <= 1e-14, || {
        format!("E|G|^1.5 = {m15}")
    })
}

fn quadrature_polynomials(_: &ValidateOptions) -> CheckResult {
    let q = quad::integrate(|x| 3.0 * x * x + 2.0 * x, 0.0, 1.0, 1e-12);
    ensure((q.value - 2.0).abs() <= 1e-10, || {
        format!("int_0^1 (3x^2+2x) = {}", q.value)
    })?;
    let odd = quad::integrate(|x| x * x * x, -1.0, 1.0, 1e-12);
    ensure(odd.value.abs() <= 1e-12, || {
        format!("odd cubic integrates to {}", odd.value)
    })?;
    let s = quad::integrate(f64::sin, 0.0, core::f64::consts::PI, 1e-10);
    ensure((s.value - 2.0).abs() <= 1e-9, || {
        format!("int_0^pi sin = {}", s.value)
    })
}

fn quadrature_endpoint_singularities(_: &ValidateOptions) -> CheckResult {
    // Beta(1/2, 1/2) = pi, with both endpoints singular.
    let q = quad::integrate_endpoint_powers(|_| 1.0, 0.0, 1.0, -0.5, -0.5, 1e-10);
    ensure((q.value - core::f64::consts::PI).abs() <= 1e-8, || {
        format!("Beta(1/2,1/2) quadrature = {}", q.value)
    })?;
    // Beta(3/4, 1) = 4/3 with one singular endpoint.
    let q = quad::integrate_endpoint_powers(|_| 1.0, 0.0, 1.0, -0.25, 0.0, 1e-10);
    ensure((q.value - 4.0 / 3.0).abs() <= 1e-8, || {
        format!("Beta(3/4,1) quadrature = {}", q.value)
    })
}

fn ftilde_normalization(_: &ValidateOptions) -> CheckResult {
    // int_0^U ftilde(u, z, m) du must reproduce the hitting CDF at U.
    for &(z, m, u_max) in &[(1.0, 0.0, 40.0), (1.0, -0.5, 30.0), (2.0, 0.3, 25.0), (0.5, -1.0, 20.0)] {
        let q = quad::integrate(|u| ftilde(u, z, m), 0.0, u_max, 1e-9);
        let want = core(ig_cdf(u_max, z, m))?;
        ensure((q.value - want).abs() <= 1e-6, || {
            format!(
                "int_0^{u_max} ftilde(u, {z}, {m}) du = {} but the CDF there is {want}",
                q.value
            )
        })?;
    }
    Ok(())
}

fn ftilde_scaling(_: &ValidateOptions) -> CheckResult {
    // ftilde(c^2 u, c z, m / c) = ftilde(u, z, m) / c^2 (Brownian scaling).
    for &c in &[0.5, 2.0, 3.7] {
        for &(u, z, m) in &[(0.3, 1.0, 0.4), (1.0, 2.0, -0.8), (4.0, 0.7, 0.0)] {
            let base = ftilde(u, z, m);
            let scaled_val = ftilde(c * c * u, c * z, m / c) * c * c;
            ensure((scaled_val - base).abs() <= 1e-12 * base.max(1.0), || {
                format!("scaling violated at c={c} u={u} z={z} m={m}: {scaled_val} vs {base}")
            })?;
        }
    }
    Ok(())
}

fn ig_cdf_limits(_: &ValidateOptions) -> CheckResult {
    for &(z, m) in &[(1.0, -0.8), (2.0, -0.3), (1.0, 0.0), (1.5, 0.6)] {
        let total = core(ig_cdf(1e8, z, m))?;
        let want = if m < 0.0 {
            1.0 - core(bm_defect(z, m))?
        } else {
            1.0
        };
        // Nonzero drift reaches its limit exponentially fast; zero drift only
        // like 2*phi(0)*z/sqrt(t).
        let tol = if m == 0.0 { 0.8 * z / 1e4 + 1e-9 } else { 1e-9 };
        ensure((total - want).abs() <= tol, || {
            format!("ig_cdf(1e8, {z}, {m}) = {total}, want {want} within {tol}")
        })?;
        let (p1, p2) = (core(ig_cdf(0.5, z, m))?, core(ig_cdf(2.0, z, m))?);
        ensure(p1 <= p2, || format!("ig_cdf not monotone at z={z} m={m}"))?;
    }
    Ok(())
}

fn f_zero_catalogue(_: &ValidateOptions) -> CheckResult {
    let x = level(1.0);
    // Atom exactly at the level: a/2 * (2 - 1 - 0) + a/4 * 1 = 3a/4.
    let pm_at = JumpDiffusionModel {
        m: 0.0,
        a: 1.0,
        jumps: JumpDistribution::PointMass { c: 1.0 },
    };
    let v = f_zero(x, &pm_at);
    ensure((v - 0.75).abs() <= 1e-15, || format!("point mass at level: {v}"))?;
    // Continuous law: a * (1 - F(x)) = e^-1 for Exp(1) positive jumps.
    let exp_up = JumpDiffusionModel {
        m: 0.0,
        a: 1.0,
        jumps: JumpDistribution::Exponential {
            rate: 1.0,
            sign: JumpSign::Positive,
        },
    };
    let v = f_zero(x, &exp_up);
    ensure((v - (-1f64).exp()).abs() <= 1e-15, || {
        format!("exp jumps: {v}")
    })?;
    // Atom strictly above the level: F(x) = F(x-) = 0, so f_zero = a.
    let pm_above = JumpDiffusionModel {
        m: 0.0,
        a: 0.7,
        jumps: JumpDistribution::PointMass { c: 2.0 },
    };
    let v = f_zero(x, &pm_above);
    ensure((v - 0.7).abs() <= 1e-15, || format!("atom above level: {v}"))?;
    // No jumps: no t = 0 atom.
    ensure(f_zero(x, &pure_diffusion(0.4)) == 0.0, || {
        "pure diffusion must have f_zero = 0".to_string()
    })
}

fn smoothed_ftilde_identity(_: &ValidateOptions) -> CheckResult {
    // Closed form against direct quadrature on the full documented grid.
    for &u in &[0.5, 1.0, 2.0] {
        for &mu in &[-1.0, 0.0, 1.0] {
            for &sigma in &[0.5, 1.0] {
                for &m in &[-1.0, 0.0, 1.0] {
                    let closed = core(smoothed_ftilde(u, mu, sigma, m))?;
                    let direct = core(smoothed_ftilde_quadrature(u, mu, sigma, m))?;
                    ensure((closed - direct).abs() <= 1e-8, || {
                        format!(
                            "smoothed ftilde at u={u} mu={mu} sigma={sigma} m={m}: closed {closed} vs quadrature {direct}"
                        )
                    })?;
                }
            }
        }
    }
    Ok(())
}

fn ftilde_bound(opts: &ValidateOptions) -> CheckResult {
    let mut max_ratio = 0.0f64;
    for &(eps, m_big) in &[(0.1, 1.0), (0.05, 2.0), (0.2, 1.5)] {
        let mut bc = core(BoundConstants::new(eps, m_big))?;
        if opts.c_eps_factor != 1.0 {
            bc = core(BoundConstants::with_c_eps(
                eps,
                m_big,
                bc.c_eps * opts.c_eps_factor,
            ))?;
        }
        for &u in &[0.05, 0.3, 1.0, 5.0] {
            for &z in &[-4.0, -1.0, -0.3, 0.3, 1.0, 4.0] {
                for &m in &[-1.0, 0.0, 1.0] {
                    ensure(core(ftilde_bound_holds(u, z, m, &bc))?, || {
                        format!(
                            "envelope violated at u={u} z={z} m={m} (eps={eps}, M={m_big}): ftilde {} > rhs {}",
                            ftilde(u, z, m),
                            ftilde_bound_rhs(u, z, m, &bc).unwrap_or(f64::NAN)
                        )
                    })?;
                    let rhs = core(ftilde_bound_rhs(u, z, m, &bc))?;
                    if rhs > 0.0 {
                        max_ratio = max_ratio.max(ftilde(u, z, m) / rhs);
                    }
                }
            }
        }
    }
    if opts.c_eps_factor == 1.0 {
        // The envelope must be near-tight somewhere on the grid, so halving
        // c_eps demonstrably flips the check (mutation sensitivity).
        ensure(max_ratio > 0.55, || {
            format!("envelope is nowhere close to tight (max ratio {max_ratio}); halving c_eps would not flip it")
        })?;
    }
    Ok(())
}

fn neg_moment_bound(_: &ValidateOptions) -> CheckResult {
    for &mu in &[0.0, -0.5, 0.5, -2.0, 2.0] {
        for &sigma in &[0.5, 1.0, 2.0] {
            for &alpha in &[0.25, 0.5, 0.75] {
                ensure(core(neg_moment_bound_holds(mu, sigma, alpha))?, || {
                    format!("negative-moment bound violated at mu={mu} sigma={sigma} alpha={alpha}")
                })?;
            }
        }
    }
    Ok(())
}

fn series_term_bound(_: &ValidateOptions) -> CheckResult {
    for &a in &[0.5, 2.0] {
        for &t in &[0.5, 5.0] {
            for &i in &[1u32, 3, 10] {
                for &alpha in &[-0.5, 0.5] {
                    for &gamma in &[-0.5, 0.7] {
                        ensure(core(series_term_bound_holds(a, t, i, alpha, gamma))?, || {
                            format!("series-term bound violated at a={a} t={t} i={i} alpha={alpha} gamma={gamma}")
                        })?;
                    }
                }
            }
            // The envelope ratio decays like a*t/i: factorial summability.
            let r_small = core(series_term_ratio(a, t, 40, 0.5, 0.5))?;
            ensure(r_small < 0.5 * a * t / 39.0 + 0.2, || {
                format!("envelope ratio at i=40 unexpectedly large: {r_small}")
            })?;
        }
    }
    Ok(())
}

fn jump_sampler_vs_cdf(opts: &ValidateOptions) -> CheckResult {
    let laws: [(&str, JumpDistribution); 3] = [
        (
            "exponential(1.3, +)",
            JumpDistribution::Exponential {
                rate: 1.3,
                sign: JumpSign::Positive,
            },
        ),
        (
            "double_exponential(0.4, 1, 3)",
            JumpDistribution::DoubleExponential {
                p: 0.4,
                eta1: 1.0,
                eta2: 3.0,
            },
        ),
        (
            "gaussian(-0.5, 1.3)",
            JumpDistribution::Gaussian {
                mu: -0.5,
                sigma: 1.3,
            },
        ),
    ];
    let n = scaled(opts, 20_000) as usize;
    for (idx, (name, law)) in laws.iter().enumerate() {
        let mut rng = RandomStream::for_path(opts.seed.wrapping_add(101), idx as u64);
        let mut samples: Vec<f64> = (0..n).map(|_| law.sample(&mut rng)).collect();
        samples.sort_by(f64::total_cmp);
        let mut ks = 0.0f64;
        for (k, &s) in samples.iter().enumerate() {
            let f = law.cdf(s);
            ks = ks.max((f - k as f64 / n as f64).abs());
            ks = ks.max(((k + 1) as f64 / n as f64 - f).abs());
        }
        let threshold = 2.0 / (n as f64).sqrt();
        ensure(ks <= threshold, || {
            format!("KS statistic {ks} for {name} exceeds {threshold} at n={n}")
        })?;
    }
    Ok(())
}

fn model_json_round_trip(_: &ValidateOptions) -> CheckResult {
    let models = [
        pure_diffusion(-0.3),
        gaussian_jump_model(),
        JumpDiffusionModel {
            m: 1.0,
            a: 2.5,
            jumps: JumpDistribution::FiniteMixture {
                weights: vec![0.25, 0.75],
                components: vec![
                    JumpDistribution::PointMass { c: -1.0 },
                    JumpDistribution::Exponential {
                        rate: 2.0,
                        sign: JumpSign::Negative,
                    },
                ],
            },
        },
    ];
    for model in &models {
        let text = serde_json::to_string(model).map_err(|e| e.to_string())?;
        let back: JumpDiffusionModel = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        ensure(&back == model, || format!("round trip changed {text}"))?;
    }
    let literal = r#"{"m":-0.5,"a":1.0,"jumps":{"type":"exponential","rate":2.0,"sign":"-"}}"#;
    let parsed: JumpDiffusionModel = serde_json::from_str(literal).map_err(|e| e.to_string())?;
    ensure(
        parsed.m == -0.5
            && parsed.a == 1.0
            && parsed.jumps
                == JumpDistribution::Exponential {
                    rate: 2.0,
                    sign: JumpSign::Negative,
                },
        || "literal JSON parsed to unexpected model".to_string(),
    )
}

fn spectral_classification(_: &ValidateOptions) -> CheckResult {
    let cases: [(JumpDistribution, bool); 5] = [
        (JumpDistribution::PointMass { c: -1.0 }, true),
        (JumpDistribution::PointMass { c: 0.5 }, false),
        (
            JumpDistribution::Exponential {
                rate: 1.0,
                sign: JumpSign::Negative,
            },
            true,
        ),
        (
            JumpDistribution::Gaussian {
                mu: -3.0,
                sigma: 0.1,
            },
            false,
        ),
        (
            JumpDistribution::FiniteMixture {
                weights: vec![0.5, 0.5],
                components: vec![
                    JumpDistribution::PointMass { c: -2.0 },
                    JumpDistribution::Exponential {
                        rate: 3.0,
                        sign: JumpSign::Negative,
                    },
                ],
            },
            true,
        ),
    ];
    for (law, want) in &cases {
        ensure(law.spectrally_nonpositive() == *want, || {
            format!("spectral classification wrong for {law:?}")
        })?;
    }
    let balanced = JumpDiffusionModel {
        m: -1.0,
        a: 1.0,
        jumps: JumpDistribution::PointMass { c: 1.0 },
    };
    ensure(balanced.drift_index() == 0.0, || {
        format!("drift index of the balanced model: {}", balanced.drift_index())
    })?;
    let tilted = JumpDiffusionModel {
        m: 0.5,
        a: 2.0,
        jumps: JumpDistribution::Gaussian {
            mu: -0.2,
            sigma: 1.0,
        },
    };
    ensure((tilted.drift_index() - 0.1).abs() <= 1e-15, || {
        format!("drift index: {}", tilted.drift_index())
    })
}

fn bridge_crossing_formula(_: &ValidateOptions) -> CheckResult {
    let p = core(bridge_crossing_prob(1.0, 0.2, 0.3, 0.5))?;
    let want = (-2.0f64 * 0.8 * 0.7 / 0.5).exp();
    ensure((p - want).abs() <= 1e-15, || format!("bridge prob {p}, want {want}"))?;
    ensure(core(bridge_crossing_prob(1.0, 1.0, 0.0, 1.0))? == 1.0, || {
        "crossing must be certain when an endpoint reaches the level".to_string()
    })?;
    let a = core(bridge_crossing_prob(2.0, -0.4, 1.1, 0.7))?;
    let b = core(bridge_crossing_prob(2.0, 1.1, -0.4, 0.7))?;
    ensure(a.to_bits() == b.to_bits(), || {
        "bridge probability must be symmetric in its endpoints".to_string()
    })
}

fn hitting_law_inverse_gaussian(opts: &ValidateOptions) -> CheckResult {
    let model = pure_diffusion(-0.5);
    let x = level(1.0);
    let grid = [0.25, 0.5, 1.0, 2.0, 4.0];
    let n = scaled(opts, 20_000);
    let est = core(estimator::estimate_cdf(
        &model,
        x,
        &grid,
        n,
        opts.seed.wrapping_add(201),
    ))?;
    for k in 0..grid.len() {
        let want = core(ig_cdf(grid[k], 1.0, -0.5))?;
        let band = 4.0 * est.std_err[k].max(1e-4);
        ensure((est.p_hat[k] - want).abs() <= band, || {
            format!(
                "P(tau <= {}) = {} but the inverse Gaussian law says {want} (band {band})",
                grid[k], est.p_hat[k]
            )
        })?;
    }
    Ok(())
}

fn refined_times_bracket(opts: &ValidateOptions) -> CheckResult {
    let model = JumpDiffusionModel {
        m: 0.2,
        a: 1.0,
        jumps: JumpDistribution::Gaussian {
            mu: 0.0,
            sigma: 0.6,
        },
    };
    let x = level(1.0);
    let seed = opts.seed.wrapping_add(202);
    let mut refined_any = false;
    for path in 0..300u64 {
        let run = |tol: f64| -> Result<Option<(f64, f64, f64)>, String> {
            let mut rng = RandomStream::for_path(seed, path);
            let skel = core(simulate_skeleton(&model, 3.0, &[], &mut rng))?;
            let hit = detect_hit(&skel, x, &mut rng);
            match hit.crossing {
                Some(c) if !c.by_jump && skel.anchors[c.anchor_index - 1].value_after < 1.0 => {
                    let left = skel.anchors[c.anchor_index - 1].time;
                    let tau = core(refine_tau(&skel, x, c.anchor_index, &mut rng, tol))?;
                    Ok(Some((left, c.time, tau)))
                }
                _ => Ok(None),
            }
        };
        if let Some((left, right, tau)) = run(1e-4)? {
            refined_any = true;
            ensure(tau > left && tau < right, || {
                format!("refined time {tau} escapes its segment [{left}, {right}]")
            })?;
            // Same seed, same draws: the refinement is reproducible.
            let again = run(1e-4)?.expect("same path must cross again");
            ensure(again.2.to_bits() == tau.to_bits(), || {
                "refinement is not reproducible".to_string()
            })?;
        }
    }
    ensure(refined_any, || {
        "no continuous crossings found to refine".to_string()
    })
}

fn pure_diffusion_exactness(opts: &ValidateOptions) -> CheckResult {
    let model = pure_diffusion(0.3);
    let x = level(1.0);
    let grid: Vec<f64> = (1..=20).map(|k| 0.25 * k as f64).collect();
    let est = core(estimator::estimate_density(
        &model,
        x,
        &grid,
        512,
        opts.seed.wrapping_add(203),
    ))?;
    for k in 0..grid.len() {
        let want = ftilde(grid[k], 1.0, 0.3);
        ensure(est.f_hat[k].to_bits() == want.to_bits(), || {
            format!(
                "with no jumps the estimate at t={} must equal ftilde exactly: {} vs {want}",
                grid[k], est.f_hat[k]
            )
        })?;
        ensure(est.std_err[k] == 0.0, || {
            format!("no-jump standard error must be exactly 0, got {}", est.std_err[k])
        })?;
    }
    Ok(())
}

fn estimator_determinism(opts: &ValidateOptions) -> CheckResult {
    let model = JumpDiffusionModel {
        m: -0.1,
        a: 1.2,
        jumps: JumpDistribution::DoubleExponential {
            p: 0.55,
            eta1: 2.0,
            eta2: 1.0,
        },
    };
    let x = level(0.9);
    let grid = [0.5, 1.0, 2.0];
    let n = 8_192 + 777;
    let seed = opts.seed.wrapping_add(204);
    let d1 = core(estimator::estimate_density(&model, x, &grid, n, seed))?;
    let d2 = core(estimator::estimate_density(&model, x, &grid, n, seed))?;
    ensure(d1 == d2, || "two identical density runs disagree".to_string())?;
    let d3 = core(parallel::density(&model, x, &grid, n, seed, 3))?;
    ensure(d1 == d3, || {
        "a 3-thread density run disagrees with the sequential one".to_string()
    })?;
    let c1 = core(estimator::estimate_cdf(&model, x, &grid, n, seed))?;
    let c2 = core(parallel::cdf(&model, x, &grid, n, seed, 4))?;
    ensure(c1 == c2, || {
        "a 4-thread CDF run disagrees with the sequential one".to_string()
    })
}

fn cdf_monotone_density_nonnegative(opts: &ValidateOptions) -> CheckResult {
    let model = JumpDiffusionModel {
        m: -0.1,
        a: 1.2,
        jumps: JumpDistribution::DoubleExponential {
            p: 0.55,
            eta1: 2.0,
            eta2: 1.0,
        },
    };
    let x = level(0.9);
    let grid: Vec<f64> = (1..=12).map(|k| 0.25 * k as f64).collect();
    let seed = opts.seed.wrapping_add(205);
    let cdf = core(estimator::estimate_cdf(&model, x, &grid, 4_096, seed))?;
    for k in 1..grid.len() {
        ensure(cdf.p_hat[k] >= cdf.p_hat[k - 1], || {
            format!("p_hat decreases between t={} and t={}", grid[k - 1], grid[k])
        })?;
    }
    let den = core(estimator::estimate_density(&model, x, &grid, 4_096, seed))?;
    for k in 0..grid.len() {
        ensure(den.f_hat[k] >= 0.0, || {
            format!("f_hat({}) = {} is negative", grid[k], den.f_hat[k])
        })?;
    }
    Ok(())
}

fn density_cdf_self_consistency(opts: &ValidateOptions) -> CheckResult {
    let model = gaussian_jump_model();
    let x = level(1.0);
    let grid: Vec<f64> = (0..=30).map(|k| 0.5 + 0.05 * k as f64).collect();
    let n = scaled(opts, 20_000);
    let seed = opts.seed.wrapping_add(206);
    let den = core(estimator::estimate_density(&model, x, &grid, n, seed))?;
    let (mass, bound) = core(estimator::integrate_density(&den))?;
    let cdf = core(estimator::estimate_cdf(
        &model,
        x,
        &[grid[0], grid[30]],
        n,
        seed.wrapping_add(1),
    ))?;
    let diff = cdf.p_hat[1] - cdf.p_hat[0];
    let se = (cdf.std_err[0].powi(2) + cdf.std_err[1].powi(2)).sqrt();
    // 3 sigma on the CDF difference, the propagated density error bound, and
    // a trapezoid discretization allowance for step 0.05.
    let tol = 3.0 * se + bound + 5e-4;
    ensure((mass - diff).abs() <= tol, || {
        format!(
            "integral of f over [0.5, 2] is {mass} but the CDF increment is {diff} (tol {tol})"
        )
    })
}

fn conditional_variance_advantage(opts: &ValidateOptions) -> CheckResult {
    let model = gaussian_jump_model();
    let x = level(1.0);
    let n = scaled(opts, 20_000);
    let seed = opts.seed.wrapping_add(207);
    let den = core(estimator::estimate_density(&model, x, &[1.0], n, seed))?;
    let se_cond = den.std_err[0];
    let delta = 0.05;
    let cdf = core(estimator::estimate_cdf(
        &model,
        x,
        &[1.0 - delta, 1.0 + delta],
        n,
        seed.wrapping_add(1),
    ))?;
    let q = cdf.p_hat[1] - cdf.p_hat[0];
    ensure(q > 0.0, || "no mass in the difference window".to_string())?;
    let se_fd = (q * (1.0 - q) / n as f64).sqrt() / (2.0 * delta);
    ensure(se_cond > 0.0 && se_cond < se_fd, || {
        format!(
            "conditional estimator std err {se_cond} is not below the finite-difference std err {se_fd}"
        )
    })
}

fn defect_brownian_tail(opts: &ValidateOptions) -> CheckResult {
    let model = pure_diffusion(-0.8);
    let x = level(1.0);
    let n = scaled(opts, 20_000);
    let est = core(estimator::estimate_defect(
        &model,
        x,
        120.0,
        n,
        opts.seed.wrapping_add(208),
    ))?;
    let want = core(bm_defect(1.0, -0.8))?;
    let band = 4.0 * est.std_err.max(1e-4);
    ensure((est.defect_hat - want).abs() <= band, || {
        format!(
            "defect estimate {} vs exact Brownian defect {want} (band {band})",
            est.defect_hat
        )
    })?;
    ensure(est.verdict == DefectVerdict::Defective, || {
        "negative drift with no jumps must be classified defective".to_string()
    })?;
    ensure(est.defect_detected && !est.horizon_too_short, || {
        "a real defect must be detected without raising the horizon flag".to_string()
    })
}

fn marginal_density_normalizes(_: &ValidateOptions) -> CheckResult {
    let pm = JumpDiffusionModel {
        m: 0.0,
        a: 1.0,
        jumps: JumpDistribution::PointMass { c: -1.0 },
    };
    let spec = core(MarginalDensitySpec::for_model(&pm, 1.0))?;
    let q = quad::integrate(
        |y| marginal_density(&spec, 1.0, y).unwrap_or(0.0),
        -20.0,
        6.0,
        1e-10,
    );
    ensure((q.value - 1.0).abs() <= 1e-8, || {
        format!("point-mass marginal integrates to {}", q.value)
    })?;
    let gj = JumpDiffusionModel {
        m: 0.2,
        a: 0.8,
        jumps: JumpDistribution::Gaussian {
            mu: 0.3,
            sigma: 1.1,
        },
    };
    let spec = core(MarginalDensitySpec::for_model(&gj, 1.5))?;
    let q = quad::integrate(
        |y| marginal_density(&spec, 1.5, y).unwrap_or(0.0),
        -20.0,
        22.0,
        1e-10,
    );
    ensure((q.value - 1.0).abs() <= 1e-8, || {
        format!("gaussian-jump marginal integrates to {}", q.value)
    })
}

fn marginal_density_symmetry(_: &ValidateOptions) -> CheckResult {
    // Zero drift and symmetric jumps: X_t is symmetric, so p(t, y) = p(t, -y).
    let model = gaussian_jump_model();
    for &t in &[0.5, 2.0] {
        let spec = core(MarginalDensitySpec::for_model(&model, t))?;
        for &y in &[0.25, 1.0, 2.5] {
            let up = core(marginal_density(&spec, t, y))?;
            let down = core(marginal_density(&spec, t, -y))?;
            ensure((up - down).abs() <= 1e-12 * (1.0 + up), || {
                format!("marginal asymmetry at t={t} y={y}: {up} vs {down}")
            })?;
        }
    }
    Ok(())
}

fn kendall_pure_diffusion(opts: &ValidateOptions) -> CheckResult {
    let model = JumpDiffusionModel {
        m: 0.4,
        a: 0.0,
        jumps: JumpDistribution::PointMass { c: -1.0 },
    };
    let x = level(1.0);
    let grid = [0.5, 1.0, 2.0];
    let est = core(estimator::estimate_density(
        &model,
        x,
        &grid,
        64,
        opts.seed.wrapping_add(209),
    ))?;
    for &t in &grid {
        let check = core(kendall_residual(&model, x, t, &est))?;
        ensure(check.passes && check.residual.abs() <= 1e-13, || {
            format!(
                "with no jumps the identity t*f = x*p is exact, got residual {} at t={t}",
                check.residual
            )
        })?;
    }
    Ok(())
}

fn kendall_with_jumps(opts: &ValidateOptions) -> CheckResult {
    let model = JumpDiffusionModel {
        m: 1.0,
        a: 1.0,
        jumps: JumpDistribution::PointMass { c: -1.0 },
    };
    let x = level(1.0);
    let n = scaled(opts, 20_000);
    let est = core(estimator::estimate_density(
        &model,
        x,
        &[0.5, 1.0],
        n,
        opts.seed.wrapping_add(210),
    ))?;
    let check = core(kendall_residual(&model, x, 1.0, &est))?;
    ensure(check.passes, || {
        format!(
            "Kendall residual {} exceeds tolerance {} (f_hat {}, marginal {})",
            check.residual, check.tolerance, check.f_hat, check.marginal
        )
    })
}

fn euler_stays_below_exact(opts: &ValidateOptions) -> CheckResult {
    let model = pure_diffusion(0.0);
    let x = level(1.0);
    let exact = core(ig_cdf(1.0, 1.0, 0.0))?;
    // Fixed N: the bias separation needs it, and 8-step paths are cheap.
    let n = 10_000;
    let coarse = core(euler_hitting_mc(
        &model,
        x,
        1.0,
        8,
        n,
        opts.seed.wrapping_add(211),
    ))?;
    let fine = core(euler_hitting_mc(
        &model,
        x,
        1.0,
        128,
        n,
        opts.seed.wrapping_add(212),
    ))?;
    ensure(coarse.p_hat + 4.0 * coarse.std_err < exact, || {
        format!(
            "8-step discrete monitoring should visibly undershoot {exact}, got {}",
            coarse.p_hat
        )
    })?;
    ensure(fine.p_hat <= exact + 4.0 * fine.std_err, || {
        format!("128-step estimate {} exceeds the exact value {exact}", fine.p_hat)
    })?;
    let se = (coarse.std_err.powi(2) + fine.std_err.powi(2)).sqrt();
    ensure(fine.p_hat > coarse.p_hat - 4.0 * se, || {
        format!(
            "refining the grid lowered the estimate: {} to {}",
            coarse.p_hat, fine.p_hat
        )
    })
}

// ------------------------------------------------------------- registry --

const CHECKS: &[Check] = &[
    Check { name: "special_functions", run: special_functions },
    Check { name: "quadrature_polynomials", run: quadrature_polynomials },
    Check { name: "quadrature_endpoint_singularities", run: quadrature_endpoint_singularities },
    Check { name: "ftilde_normalization", run: ftilde_normalization },
    Check { name: "ftilde_scaling", run: ftilde_scaling },
    Check { name: "ig_cdf_limits", run: ig_cdf_limits },
    Check { name: "f_zero_catalogue", run: f_zero_catalogue },
    Check { name: "smoothed_ftilde_identity", run: smoothed_ftilde_identity },
    Check { name: "ftilde_bound", run: ftilde_bound },
    Check { name: "neg_moment_bound", run: neg_moment_bound },
    Check { name: "series_term_bound", run: series_term_bound },
    Check { name: "jump_sampler_vs_cdf", run: jump_sampler_vs_cdf },
    Check { name: "model_json_round_trip", run: model_json_round_trip },
    Check { name: "spectral_classification", run: spectral_classification },
    Check { name: "bridge_crossing_formula", run: bridge_crossing_formula },
    Check { name: "hitting_law_inverse_gaussian", run: hitting_law_inverse_gaussian },
    Check { name: "refined_times_bracket", run: refined_times_bracket },
    Check { name: "pure_diffusion_exactness", run: pure_diffusion_exactness },
    Check { name: "estimator_determinism", run: estimator_determinism },
    Check { name: "cdf_monotone_density_nonnegative", run: cdf_monotone_density_nonnegative },
    Check { name: "density_cdf_self_consistency", run: density_cdf_self_consistency },
    Check { name: "conditional_variance_advantage", run: conditional_variance_advantage },
    Check { name: "defect_brownian_tail", run: defect_brownian_tail },
    Check { name: "marginal_density_normalizes", run: marginal_density_normalizes },
    Check { name: "marginal_density_symmetry", run: marginal_density_symmetry },
    Check { name: "kendall_pure_diffusion", run: kendall_pure_diffusion },
    Check { name: "kendall_with_jumps", run: kendall_with_jumps },
    Check { name: "euler_stays_below_exact", run: euler_stays_below_exact },
];

/// Names of all registered checks, in execution order.
pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.name).collect()
}

/// Runs every check, printing one `PASS`/`FAIL` row per check and a summary
/// line. Returns `true` iff everything passed.
pub fn run_all<W: Write>(opts: &ValidateOptions, out: &mut W) -> io::Result<bool> {
    let mut failed = 0usize;
    for check in CHECKS {
        match (check.run)(opts) {
            Ok(()) => writeln!(out, "PASS  {}", check.name)?,
            Err(msg) => {
                failed += 1;
                writeln!(out, "FAIL  {}: {msg}", check.name)?;
            }
        }
    }
    let total = CHECKS.len();
    if failed == 0 {
        writeln!(out, "validation: {total}/{total} checks passed")?;
    } else {
        writeln!(
            out,
            "validation: {}/{total} checks passed ({failed} failed)",
            total - failed
        )?;
    }
    Ok(failed == 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_names_are_unique_and_snake_case() {
        let names = check_names();
        let mut sorted = names.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len(), "duplicate check names");
        for name in names {
            assert!(
                name.chars().all(|c| c.is_ascii_lowercase() || c == '_' || c.is_ascii_digit()),
                "check name {name:?} is not snake_case"
            );
        }
    }

    #[test]
    fn deterministic_checks_pass_quickly() {
        let opts = ValidateOptions::default();
        for check in CHECKS.iter().take(15) {
            // The first 15 checks are closed-form or tiny-N; run them here so
            // plain `cargo test` exercises the suite wiring.
            if let Err(msg) = (check.run)(&opts) {
                panic!("{} failed: {msg}", check.name);
            }
        }
    }

    #[test]
    fn perturbed_envelope_constant_fails_the_bound_check() {
        let opts = ValidateOptions {
            c_eps_factor: 0.5,
            ..ValidateOptions::default()
        };
        assert!(ftilde_bound(&opts).is_err());
        // And the unperturbed constant passes.
        assert!(ftilde_bound(&ValidateOptions::default()).is_ok());
    }
}
