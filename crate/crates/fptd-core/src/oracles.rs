//! Independent cross-checks for the estimators and closed forms.
//!
//! Everything here is computed by a different route than the code it checks:
//! the marginal density of `X_t` comes from an explicit Poisson mixture, the
//! Kendall identity ties the hitting density to that marginal, the Euler-style
//! reference estimator observes paths only at discrete times, and the smoothed
//! kernel is integrated numerically. None of these call the estimator
//! internals they are used to validate.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::closed_form::ftilde;
use crate::error::{Error, Result};
use crate::estimator::DensityEstimate;
use crate::model::{JumpDiffusionModel, JumpDistribution, Level};
use crate::pathsim::simulate_skeleton;
use crate::quad;
use crate::rng::RandomStream;
use crate::special::{normal_pdf, INV_SQRT_2PI};

/// Exact marginal density of `X_t` as a Poisson mixture over the jump count.
///
/// Supported jump laws are point masses and Gaussians (both give Gaussian
/// conditionals given the jump count); any law is accepted when `a == 0`
/// since jumps then never occur. The Poisson sum is truncated where the
/// remaining mass at `a * t_max` drops below 1e-12; `tail_bound` reports that
/// mass, and since every mixture component density is at most
/// `1 / sqrt(2 pi t)`, the truncation error of the density is at most
/// `tail_bound / sqrt(2 pi t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalDensitySpec {
    pub model: JumpDiffusionModel,
    pub t_max: f64,
    pub truncation_k: u32,
    pub tail_bound: f64,
    shift_mu: f64,
    shift_var: f64,
}

impl MarginalDensitySpec {
    pub fn for_model(model: &JumpDiffusionModel, t_max: f64) -> Result<Self> {
        model.validate()?;
        if !t_max.is_finite() || t_max <= 0.0 {
            return Err(Error::domain(
                "marginal_density",
                "t_max must be positive and finite",
            ));
        }
        let (shift_mu, shift_var) = if model.a == 0.0 {
            (0.0, 0.0)
        } else {
            match &model.jumps {
                JumpDistribution::PointMass { c } => (*c, 0.0),
                JumpDistribution::Gaussian { mu, sigma } => (*mu, sigma * sigma),
                _ => {
                    return Err(Error::UnsupportedJumpKind {
                        context: "marginal_density",
                    })
                }
            }
        };
        let lambda = model.a * t_max;
        if lambda > 600.0 {
            return Err(Error::domain(
                "marginal_density",
                format!("a * t_max = {lambda} is too large for the Poisson truncation"),
            ));
        }
        let mut pmf = libm::exp(-lambda);
        let mut cum = pmf;
        let mut k = 0u32;
        while cum < 1.0 - 1e-12 {
            k += 1;
            pmf *= lambda / f64::from(k);
            cum += pmf;
        }
        let tail_bound = (1.0 - cum).max(0.0);
        Ok(MarginalDensitySpec {
            model: model.clone(),
            t_max,
            truncation_k: k,
            tail_bound,
            shift_mu,
            shift_var,
        })
    }
}

/// Evaluates the truncated Poisson-mixture marginal density at `(t, y)`.
/// Requires `0 < t <= t_max` so the truncation bound applies.
pub fn marginal_density(spec: &MarginalDensitySpec, t: f64, y: f64) -> Result<f64> {
    if !t.is_finite() || t <= 0.0 || t > spec.t_max {
        return Err(Error::domain(
            "marginal_density",
            format!("t must lie in (0, {}], got {t}", spec.t_max),
        ));
    }
    if !y.is_finite() {
        return Err(Error::domain("marginal_density", "y must be finite"));
    }
    let lambda = spec.model.a * t;
    let mt = spec.model.m * t;
    let mut pmf = libm::exp(-lambda);
    let mut sum = 0.0;
    for k in 0..=spec.truncation_k {
        if k > 0 {
            pmf *= lambda / f64::from(k);
        }
        let kf = f64::from(k);
        let sd = libm::sqrt(t + kf * spec.shift_var);
        sum += pmf * normal_pdf((y - mt - kf * spec.shift_mu) / sd) / sd;
    }
    Ok(sum)
}

/// Outcome of the Kendall identity check `t * f(t, x) = x * p(t, x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KendallCheck {
    pub t: f64,
    pub x: f64,
    pub f_hat: f64,
    pub std_err: f64,
    /// Marginal density `p(t, x)` from the Poisson-mixture oracle.
    pub marginal: f64,
    /// `t * f_hat - x * p(t, x)`.
    pub residual: f64,
    /// `3 t * std_err` plus the marginal truncation allowance and a roundoff floor.
    pub tolerance: f64,
    pub passes: bool,
}

/// Checks the estimated density against the Kendall identity.
///
/// For a process with no positive jumps the level is always hit by the
/// continuous part, and the hitting-time density obeys
/// `t * f(t, x) = x * p(t, x)` with `p` the marginal density of `X_t`.
/// (Drifted Brownian motion shows the direction of the identity:
/// `t * ftilde(t, x, m)` equals `x` times the Gaussian density at `x`.)
/// The estimate must contain `t` on its grid; the residual is compared
/// against three standard errors plus the oracle's truncation allowance.
pub fn kendall_residual(
    model: &JumpDiffusionModel,
    x: Level,
    t: f64,
    est: &DensityEstimate,
) -> Result<KendallCheck> {
    if !model.jumps.spectrally_nonpositive() {
        return Err(Error::NotSpectrallyNegative(
            "the jump law can produce positive jumps".to_string(),
        ));
    }
    if *model != est.model {
        return Err(Error::domain(
            "kendall_residual",
            "model disagrees with the estimate's model",
        ));
    }
    let xv = x.get();
    if xv != est.x.get() {
        return Err(Error::domain(
            "kendall_residual",
            "level disagrees with the estimate's level",
        ));
    }
    let close = |g: f64| (g - t).abs() <= 1e-9 * t.abs().max(1.0);
    let k = est
        .t_grid
        .iter()
        .position(|&g| close(g))
        .ok_or_else(|| Error::domain("kendall_residual", "t is not on the estimate's grid"))?;
    let spec = MarginalDensitySpec::for_model(model, t)?;
    let marginal = marginal_density(&spec, t, xv)?;
    let f_hat = est.f_hat[k];
    let std_err = est.std_err[k];
    let residual = t * f_hat - xv * marginal;
    let truncation = xv * spec.tail_bound * INV_SQRT_2PI / libm::sqrt(t);
    let roundoff = 1e-12 * (1.0 + t * f_hat.abs() + xv * marginal);
    let tolerance = 3.0 * t * std_err + truncation + roundoff;
    Ok(KendallCheck {
        t,
        x: xv,
        f_hat,
        std_err,
        marginal,
        residual,
        tolerance,
        passes: residual.abs() <= tolerance,
    })
}

/// Hitting probability estimated from discrete observations only.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerEstimate {
    pub x: Level,
    pub t: f64,
    pub n_steps: u32,
    pub n_paths: u64,
    pub master_seed: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub std_err: f64,
}

/// Reference estimator of `P(tau <= t)` that observes each path only at a
/// uniform grid of `n_steps` times plus the exact jump times, with no bridge
/// correction. Crossings inside segments are missed, so `p_hat` estimates a
/// lower bound of the true probability; the bias shrinks like
/// `1 / sqrt(n_steps)` and vanishes only in the limit. Useful as an
/// independent, differently-biased check on the bridge-based estimators.
pub fn euler_hitting_mc(
    model: &JumpDiffusionModel,
    x: Level,
    t: f64,
    n_steps: u32,
    n_paths: u64,
    master_seed: u64,
) -> Result<EulerEstimate> {
    model.validate()?;
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::domain("euler_hitting_mc", "t must be positive and finite"));
    }
    if n_steps == 0 {
        return Err(Error::invalid("n_steps", "need at least one step"));
    }
    if n_paths < 2 {
        return Err(Error::invalid("n_paths", "need at least 2 paths"));
    }
    let grid: Vec<f64> = (1..=n_steps)
        .map(|j| t * (f64::from(j) / f64::from(n_steps)))
        .collect();
    let xv = x.get();
    let mut hits = 0u64;
    for path in 0..n_paths {
        let mut rng = RandomStream::for_path(master_seed, path);
        let skel = simulate_skeleton(model, t, &grid, &mut rng)?;
        let crossed = skel.anchors[1..]
            .iter()
            .any(|a| a.value_before >= xv || a.value_after >= xv);
        if crossed {
            hits += 1;
        }
    }
    let n = n_paths as f64;
    let p_hat = hits as f64 / n;
    Ok(EulerEstimate {
        x,
        t,
        n_steps,
        n_paths,
        master_seed,
        hits,
        p_hat,
        std_err: libm::sqrt(p_hat * (1.0 - p_hat) / n),
    })
}

/// Numeric version of the Gaussian-smoothed kernel: integrates
/// `ftilde(u, mu + sigma * g, m)` against the standard normal density over
/// the event `mu + sigma * g > 0`, by adaptive quadrature. Requires
/// `sigma > 0`; the closed form handles the degenerate case itself.
pub fn smoothed_ftilde_quadrature(u: f64, mu: f64, sigma: f64, m: f64) -> Result<f64> {
    if !u.is_finite() || u <= 0.0 {
        return Err(Error::domain(
            "smoothed_ftilde_quadrature",
            "u must be positive and finite",
        ));
    }
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::domain(
            "smoothed_ftilde_quadrature",
            "sigma must be positive and finite",
        ));
    }
    if !mu.is_finite() || !m.is_finite() {
        return Err(Error::domain(
            "smoothed_ftilde_quadrature",
            "mu and m must be finite",
        ));
    }
    // The positivity event {mu + sigma g > 0} is {g > g0}; beyond |g| = 45
    // the normal density is far below any representable contribution.
    let g0 = -mu / sigma;
    let lower = g0.max(-45.0);
    if lower >= 45.0 {
        return Ok(0.0);
    }
    let out = quad::integrate(
        |g| normal_pdf(g) * ftilde(u, mu + sigma * g, m),
        lower,
        45.0,
        1e-10,
    );
    Ok(out.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::smoothed_ftilde;
    use crate::estimator::estimate_density;
    use crate::model::JumpSign;

    fn model(m: f64, a: f64, jumps: JumpDistribution) -> JumpDiffusionModel {
        JumpDiffusionModel { m, a, jumps }
    }

    fn lvl(x: f64) -> Level {
        Level::new(x).unwrap()
    }

    #[test]
    fn point_mass_marginal_matches_the_reference_values() {
        let m = model(0.0, 1.0, JumpDistribution::PointMass { c: 1.0 });
        let spec = MarginalDensitySpec::for_model(&m, 1.0).unwrap();
        assert!(spec.tail_bound <= 1e-12);
        let p0 = marginal_density(&spec, 1.0, 0.0).unwrap();
        assert!((p0 - 0.245_983_588_322_549_32).abs() < 1e-12, "p0 {p0}");
        let p7 = marginal_density(&spec, 1.0, 0.7).unwrap();
        assert!((p7 - 0.288_461_374_708_051_37).abs() < 1e-12, "p7 {p7}");
    }

    #[test]
    fn gaussian_jump_marginal_matches_the_reference_values() {
        let m = model(
            -0.5,
            2.0,
            JumpDistribution::Gaussian { mu: 0.3, sigma: 0.5 },
        );
        let spec = MarginalDensitySpec::for_model(&m, 0.8).unwrap();
        let p = marginal_density(&spec, 0.8, 0.2).unwrap();
        assert!((p - 0.345_701_666_802_369_17).abs() < 1e-12, "p {p}");
        let q = marginal_density(&spec, 0.8, -1.0).unwrap();
        assert!((q - 0.239_538_746_338_202_1).abs() < 1e-12, "q {q}");
    }

    #[test]
    fn marginal_without_jumps_is_the_gaussian_density() {
        // With a == 0 the jump law is irrelevant, even an unsupported kind.
        let m = model(
            0.5,
            0.0,
            JumpDistribution::Exponential {
                rate: 1.0,
                sign: JumpSign::Positive,
            },
        );
        let spec = MarginalDensitySpec::for_model(&m, 2.0).unwrap();
        assert_eq!(spec.truncation_k, 0);
        let p = marginal_density(&spec, 2.0, 1.3).unwrap();
        let sd = libm::sqrt(2.0);
        let exact = normal_pdf((1.3 - 1.0) / sd) / sd;
        assert!((p - exact).abs() < 1e-15);
    }

    #[test]
    fn marginal_density_integrates_to_one() {
        let m = model(0.0, 1.0, JumpDistribution::PointMass { c: 1.0 });
        let spec = MarginalDensitySpec::for_model(&m, 1.0).unwrap();
        let mass = quad::integrate(
            |y| marginal_density(&spec, 1.0, y).unwrap(),
            -10.0,
            25.0,
            1e-10,
        );
        assert!((mass.value - 1.0).abs() < 1e-9, "mass {}", mass.value);
    }

    #[test]
    fn marginal_rejects_unsupported_jump_kinds_and_bad_times() {
        let m = model(
            0.0,
            1.0,
            JumpDistribution::Exponential {
                rate: 1.0,
                sign: JumpSign::Negative,
            },
        );
        assert!(matches!(
            MarginalDensitySpec::for_model(&m, 1.0),
            Err(Error::UnsupportedJumpKind { .. })
        ));
        let pm = model(0.0, 1.0, JumpDistribution::PointMass { c: 1.0 });
        let spec = MarginalDensitySpec::for_model(&pm, 1.0).unwrap();
        assert!(marginal_density(&spec, 0.0, 0.0).is_err());
        assert!(marginal_density(&spec, 1.5, 0.0).is_err());
    }

    #[test]
    fn kendall_residual_is_roundoff_for_pure_diffusion() {
        // With a == 0 the estimator collapses to the closed form, the
        // marginal is exactly Gaussian, and t * ftilde(t,x,m) = x * p(t,x)
        // holds analytically, so only f64 roundoff remains.
        let m = model(0.2, 0.0, JumpDistribution::PointMass { c: 0.0 });
        let est = estimate_density(&m, lvl(1.0), &[0.5, 1.0], 64, 3).unwrap();
        for &t in &[0.5, 1.0] {
            let check = kendall_residual(&m, lvl(1.0), t, &est).unwrap();
            assert!(check.residual.abs() < 1e-14, "residual {}", check.residual);
            assert!(check.passes);
        }
    }

    #[test]
    fn kendall_residual_passes_for_negative_point_mass_jumps() {
        let m = model(0.3, 1.0, JumpDistribution::PointMass { c: -0.7 });
        let est = estimate_density(&m, lvl(1.0), &[1.0], 20_000, 5).unwrap();
        let check = kendall_residual(&m, lvl(1.0), 1.0, &est).unwrap();
        // Independent mpmath value of the marginal at (t, y) = (1, 1).
        assert!((check.marginal - 0.178_542_669_936_939_73).abs() < 1e-12);
        assert!(check.passes, "residual {} tolerance {}", check.residual, check.tolerance);
    }

    #[test]
    fn kendall_residual_rejects_invalid_requests() {
        let up = model(0.0, 1.0, JumpDistribution::PointMass { c: 0.5 });
        let est_up = estimate_density(&up, lvl(1.0), &[1.0], 16, 1).unwrap();
        assert!(matches!(
            kendall_residual(&up, lvl(1.0), 1.0, &est_up),
            Err(Error::NotSpectrallyNegative(_))
        ));
        let exp_down = model(
            0.0,
            1.0,
            JumpDistribution::Exponential {
                rate: 2.0,
                sign: JumpSign::Negative,
            },
        );
        let est_down = estimate_density(&exp_down, lvl(1.0), &[1.0], 16, 1).unwrap();
        assert!(matches!(
            kendall_residual(&exp_down, lvl(1.0), 1.0, &est_down),
            Err(Error::UnsupportedJumpKind { .. })
        ));
        let bm = model(0.0, 0.0, JumpDistribution::PointMass { c: 0.0 });
        let est_bm = estimate_density(&bm, lvl(1.0), &[1.0], 16, 1).unwrap();
        assert!(kendall_residual(&bm, lvl(1.0), 0.75, &est_bm).is_err());
        assert!(kendall_residual(&exp_down, lvl(1.0), 1.0, &est_bm).is_err());
    }

    #[test]
    fn euler_reference_is_biased_low_and_tightens_with_more_steps() {
        // Brownian motion, x = 1, t = 1: the true probability is
        // ig_cdf(1, 1, 0) = 0.3173105078629141.
        let m = model(0.0, 0.0, JumpDistribution::PointMass { c: 0.0 });
        let coarse = euler_hitting_mc(&m, lvl(1.0), 1.0, 8, 4000, 2).unwrap();
        let fine = euler_hitting_mc(&m, lvl(1.0), 1.0, 512, 4000, 2).unwrap();
        assert!(coarse.p_hat < 0.30, "coarse {}", coarse.p_hat);
        assert!(fine.p_hat > coarse.p_hat);
        assert!(
            fine.p_hat > 0.27 && fine.p_hat < 0.33,
            "fine {}",
            fine.p_hat
        );
    }

    #[test]
    fn smoothed_quadrature_agrees_with_the_closed_form() {
        let q = smoothed_ftilde_quadrature(1.0, 1.0, 0.5, -1.0).unwrap();
        let c = smoothed_ftilde(1.0, 1.0, 0.5, -1.0).unwrap();
        assert!((q - c).abs() < 1e-8, "q {q} c {c}");
        let q = smoothed_ftilde_quadrature(0.5, -0.2, 1.0, 1.0).unwrap();
        let c = smoothed_ftilde(0.5, -0.2, 1.0, 1.0).unwrap();
        assert!((q - c).abs() < 1e-8, "q {q} c {c}");
    }

    #[test]
    fn smoothed_quadrature_validates_its_arguments() {
        assert!(smoothed_ftilde_quadrature(0.0, 1.0, 0.5, 0.0).is_err());
        assert!(smoothed_ftilde_quadrature(1.0, 1.0, 0.0, 0.0).is_err());
        // Entirely negative support: the positive-part expectation is 0.
        let q = smoothed_ftilde_quadrature(1.0, -100.0, 1.0, 0.0).unwrap();
        assert_eq!(q, 0.0);
    }
}
