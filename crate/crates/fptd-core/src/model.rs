//! Model description: drift `m`, jump rate `a`, and the jump law `Y`.
//!
//! The jump law catalogue covers point masses, one-sided exponentials, the
//! double exponential, Gaussians, and finite mixtures of any of these. Each
//! law exposes its right-continuous CDF `F(y)`, its left limit `F(y-)`, and
//! its atom `P(Y = y)`; the CDF is *defined* as `cdf_left + atom` so the
//! decomposition identity holds exactly in floating point, not just in math.
//!
//! `Level` is the barrier: a finite, strictly positive real. Constructing one
//! is the single domain gate for every hitting-time operation downstream.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::special::normal_cdf;

/// Side of the real line an exponential jump law lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JumpSign {
    /// Mass on (0, inf).
    #[serde(rename = "+")]
    Positive,
    /// Mass on (-inf, 0).
    #[serde(rename = "-")]
    Negative,
}

/// Distribution of a single jump `Y_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum JumpDistribution {
    /// Deterministic jump of size `c`.
    PointMass { c: f64 },
    /// Exponential with the given rate, signed by `sign`.
    Exponential { rate: f64, sign: JumpSign },
    /// With probability `p` an Exp(eta1) jump upward, otherwise an Exp(eta2)
    /// jump downward.
    DoubleExponential { p: f64, eta1: f64, eta2: f64 },
    /// Normal with mean `mu` and standard deviation `sigma >= 0`; `sigma = 0`
    /// degenerates to a point mass at `mu`.
    Gaussian { mu: f64, sigma: f64 },
    /// Convex combination of other jump laws.
    FiniteMixture {
        weights: Vec<f64>,
        components: Vec<JumpDistribution>,
    },
}

impl JumpDistribution {
    /// Parameter-range validation; recurses into mixtures.
    pub fn validate(&self) -> Result<()> {
        match self {
            JumpDistribution::PointMass { c } => {
                if !c.is_finite() {
                    return Err(Error::invalid("c", "point mass location must be finite"));
                }
            }
            JumpDistribution::Exponential { rate, .. } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return Err(Error::invalid("rate", format!("must be > 0, got {rate}")));
                }
            }
            JumpDistribution::DoubleExponential { p, eta1, eta2 } => {
                if !(p.is_finite() && (0.0..=1.0).contains(p)) {
                    return Err(Error::invalid("p", format!("must lie in [0, 1], got {p}")));
                }
                if !(eta1.is_finite() && *eta1 > 0.0) {
                    return Err(Error::invalid("eta1", format!("must be > 0, got {eta1}")));
                }
                if !(eta2.is_finite() && *eta2 > 0.0) {
                    return Err(Error::invalid("eta2", format!("must be > 0, got {eta2}")));
                }
            }
            JumpDistribution::Gaussian { mu, sigma } => {
                if !mu.is_finite() {
                    return Err(Error::invalid("mu", "must be finite"));
                }
                if !(sigma.is_finite() && *sigma >= 0.0) {
                    return Err(Error::invalid("sigma", format!("must be >= 0, got {sigma}")));
                }
            }
            JumpDistribution::FiniteMixture {
                weights,
                components,
            } => {
                if components.is_empty() {
                    return Err(Error::invalid("components", "mixture must be nonempty"));
                }
                if weights.len() != components.len() {
                    return Err(Error::invalid(
                        "weights",
                        format!(
                            "{} weights for {} components",
                            weights.len(),
                            components.len()
                        ),
                    ));
                }
                let mut sum = 0.0;
                for w in weights {
                    if !(w.is_finite() && *w >= 0.0) {
                        return Err(Error::invalid("weights", format!("weight {w} invalid")));
                    }
                    sum += w;
                }
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::invalid(
                        "weights",
                        format!("must sum to 1 within 1e-12, got {sum}"),
                    ));
                }
                for comp in components {
                    comp.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Left limit `F(y-) = P(Y < y)`.
    pub fn cdf_left(&self, y: f64) -> f64 {
        match self {
            JumpDistribution::PointMass { c } => {
                if y > *c {
                    1.0
                } else {
                    0.0
                }
            }
            JumpDistribution::Exponential { rate, sign } => match sign {
                JumpSign::Positive => {
                    if y <= 0.0 {
                        0.0
                    } else {
                        -libm::expm1(-rate * y)
                    }
                }
                JumpSign::Negative => {
                    if y <= 0.0 {
                        libm::exp(rate * y)
                    } else {
                        1.0
                    }
                }
            },
            JumpDistribution::DoubleExponential { p, eta1, eta2 } => {
                if y <= 0.0 {
                    (1.0 - p) * libm::exp(eta2 * y)
                } else {
                    1.0 - p * libm::exp(-eta1 * y)
                }
            }
            JumpDistribution::Gaussian { mu, sigma } => {
                if *sigma > 0.0 {
                    normal_cdf((y - mu) / sigma)
                } else if y > *mu {
                    1.0
                } else {
                    0.0
                }
            }
            JumpDistribution::FiniteMixture {
                weights,
                components,
            } => weights
                .iter()
                .zip(components)
                .map(|(w, comp)| w * comp.cdf_left(y))
                .sum(),
        }
    }

    /// Atom `P(Y = y)`; zero everywhere for the continuous kinds.
    pub fn atom(&self, y: f64) -> f64 {
        match self {
            JumpDistribution::PointMass { c } => {
                if y == *c {
                    1.0
                } else {
                    0.0
                }
            }
            JumpDistribution::Exponential { .. } | JumpDistribution::DoubleExponential { .. } => {
                0.0
            }
            JumpDistribution::Gaussian { mu, sigma } => {
                if *sigma == 0.0 && y == *mu {
                    1.0
                } else {
                    0.0
                }
            }
            JumpDistribution::FiniteMixture {
                weights,
                components,
            } => weights
                .iter()
                .zip(components)
                .map(|(w, comp)| w * comp.atom(y))
                .sum(),
        }
    }

    /// Right-continuous CDF `F(y) = P(Y <= y)`, by construction exactly
    /// `cdf_left(y) + atom(y)`.
    pub fn cdf(&self, y: f64) -> f64 {
        self.cdf_left(y) + self.atom(y)
    }

    /// `E[Y_1]`; finite for every admissible law.
    pub fn mean(&self) -> f64 {
        match self {
            JumpDistribution::PointMass { c } => *c,
            JumpDistribution::Exponential { rate, sign } => match sign {
                JumpSign::Positive => 1.0 / rate,
                JumpSign::Negative => -1.0 / rate,
            },
            JumpDistribution::DoubleExponential { p, eta1, eta2 } => {
                p / eta1 - (1.0 - p) / eta2
            }
            JumpDistribution::Gaussian { mu, .. } => *mu,
            JumpDistribution::FiniteMixture {
                weights,
                components,
            } => weights
                .iter()
                .zip(components)
                .map(|(w, comp)| w * comp.mean())
                .sum(),
        }
    }

    /// Supremum of `beta >= 0` with `E[exp(beta * Y_1)] < inf`;
    /// `f64::INFINITY` when every exponential moment exists.
    pub fn exp_moment_beta_sup(&self) -> f64 {
        match self {
            JumpDistribution::PointMass { .. } | JumpDistribution::Gaussian { .. } => {
                f64::INFINITY
            }
            JumpDistribution::Exponential { rate, sign } => match sign {
                JumpSign::Positive => *rate,
                JumpSign::Negative => f64::INFINITY,
            },
            JumpDistribution::DoubleExponential { p, eta1, .. } => {
                if *p == 0.0 {
                    f64::INFINITY
                } else {
                    *eta1
                }
            }
            JumpDistribution::FiniteMixture {
                weights,
                components,
            } => weights
                .iter()
                .zip(components)
                .filter(|(w, _)| **w > 0.0)
                .map(|(_, comp)| comp.exp_moment_beta_sup())
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// True when the law has no atoms (so `F(y-) = F(y)` everywhere).
    pub fn is_continuous(&self) -> bool {
        match self {
            JumpDistribution::PointMass { .. } => false,
            JumpDistribution::Exponential { .. } | JumpDistribution::DoubleExponential { .. } => {
                true
            }
            JumpDistribution::Gaussian { sigma, .. } => *sigma > 0.0,
            JumpDistribution::FiniteMixture {
                weights,
                components,
            } => weights
                .iter()
                .zip(components)
                .all(|(w, comp)| *w == 0.0 || comp.is_continuous()),
        }
    }

    /// True when all jump mass sits on (-inf, 0], i.e. the process is
    /// spectrally negative (up-crossings happen only by diffusion).
    pub fn spectrally_nonpositive(&self) -> bool {
        match self {
            JumpDistribution::PointMass { c } => *c <= 0.0,
            JumpDistribution::Exponential { sign, .. } => *sign == JumpSign::Negative,
            JumpDistribution::DoubleExponential { p, .. } => *p == 0.0,
            JumpDistribution::Gaussian { mu, sigma } => *sigma == 0.0 && *mu <= 0.0,
            JumpDistribution::FiniteMixture {
                weights,
                components,
            } => weights
                .iter()
                .zip(components)
                .all(|(w, comp)| *w == 0.0 || comp.spectrally_nonpositive()),
        }
    }

    /// Draw one jump. Draw budget per kind: point mass none, exponential and
    /// double exponential one uniform (quantile transform), Gaussian two
    /// uniforms (Box-Muller), mixture one uniform plus the component's budget.
    pub fn sample(&self, rng: &mut RandomStream) -> f64 {
        match self {
            JumpDistribution::PointMass { c } => *c,
            JumpDistribution::Exponential { rate, sign } => {
                let u = rng.uniform();
                match sign {
                    // Quantile of 1 - exp(-rate*y): -ln(1-u)/rate.
                    JumpSign::Positive => -libm::log1p(-u) / rate,
                    // Quantile of exp(rate*y) on y <= 0: ln(u)/rate.
                    JumpSign::Negative => libm::log(u) / rate,
                }
            }
            JumpDistribution::DoubleExponential { p, eta1, eta2 } => {
                // Piecewise quantile split at u = 1-p; both branches hit 0
                // at the split, matching F's value 1-p there.
                let u = rng.uniform();
                if u <= 1.0 - p {
                    libm::log(u / (1.0 - p)) / eta2
                } else {
                    -libm::log((1.0 - u) / p) / eta1
                }
            }
            JumpDistribution::Gaussian { mu, sigma } => mu + sigma * rng.gaussian(),
            JumpDistribution::FiniteMixture {
                weights,
                components,
            } => {
                let u = rng.uniform();
                let mut acc = 0.0;
                for (w, comp) in weights.iter().zip(components) {
                    acc += w;
                    if u <= acc {
                        return comp.sample(rng);
                    }
                }
                // Weight-sum rounding can leave u just past the last bin.
                components[components.len() - 1].sample(rng)
            }
        }
    }
}

/// The jump diffusion `X_t = m t + W_t + sum_{i <= N_t} Y_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpDiffusionModel {
    /// Drift of the Brownian part.
    pub m: f64,
    /// Poisson jump intensity, `a >= 0`; zero means pure diffusion.
    pub a: f64,
    /// Law of a single jump.
    pub jumps: JumpDistribution,
}

/// Summary emitted by a successful validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationReport {
    /// `m + a * E[Y_1]`; the hitting time is finite a.s. iff this is >= 0.
    pub drift_index: f64,
    /// Supremum of finite exponential moments of the jump law.
    pub exp_moment_beta_sup: f64,
    /// Whether the level is reached with probability one.
    pub hits_almost_surely: bool,
}

impl JumpDiffusionModel {
    /// `m + a * E[Y_1]`, the sign of which decides whether the hitting time
    /// is finite almost surely.
    pub fn drift_index(&self) -> f64 {
        self.m + self.a * self.jumps.mean()
    }

    /// Full parameter validation with a summary report.
    pub fn validate(&self) -> Result<ValidationReport> {
        if !self.m.is_finite() {
            return Err(Error::invalid("m", "drift must be finite"));
        }
        if !(self.a.is_finite() && self.a >= 0.0) {
            return Err(Error::invalid(
                "a",
                format!("jump rate must be >= 0, got {}", self.a),
            ));
        }
        self.jumps.validate()?;
        let drift_index = self.drift_index();
        Ok(ValidationReport {
            drift_index,
            exp_moment_beta_sup: self.jumps.exp_moment_beta_sup(),
            hits_almost_surely: drift_index >= 0.0,
        })
    }
}

/// Validate a model and summarize its hitting behavior.
pub fn validate_model(model: &JumpDiffusionModel) -> Result<ValidationReport> {
    model.validate()
}

/// Right-continuous CDF of the jump law.
pub fn jump_cdf(dist: &JumpDistribution, y: f64) -> f64 {
    dist.cdf(y)
}

/// Left limit of the jump CDF.
pub fn jump_cdf_left(dist: &JumpDistribution, y: f64) -> f64 {
    dist.cdf_left(y)
}

/// Atom of the jump law at `y`.
pub fn jump_atom(dist: &JumpDistribution, y: f64) -> f64 {
    dist.atom(y)
}

/// Draw one jump from the law.
pub fn sample_jump(dist: &JumpDistribution, rng: &mut RandomStream) -> f64 {
    dist.sample(rng)
}

/// Barrier level: finite and strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Level(f64);

impl Level {
    pub fn new(x: f64) -> Result<Self> {
        if x.is_finite() && x > 0.0 {
            Ok(Level(x))
        } else {
            Err(Error::domain(
                "Level",
                format!("level must be finite and > 0, got {x}"),
            ))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Level {
    type Error = Error;

    fn try_from(x: f64) -> Result<Self> {
        Level::new(x)
    }
}

impl From<Level> for f64 {
    fn from(level: Level) -> f64 {
        level.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn exp_pos(rate: f64) -> JumpDistribution {
        JumpDistribution::Exponential {
            rate,
            sign: JumpSign::Positive,
        }
    }

    #[test]
    fn point_mass_cdf_decomposition() {
        let d = JumpDistribution::PointMass { c: -1.0 };
        assert_eq!(d.cdf(-1.0), 1.0);
        assert_eq!(d.cdf_left(-1.0), 0.0);
        assert_eq!(d.atom(-1.0), 1.0);
        assert_eq!(d.cdf(-1.5), 0.0);
        assert_eq!(d.cdf(0.0), 1.0);
    }

    #[test]
    fn exponential_cdf_values() {
        let d = exp_pos(2.0);
        assert_eq!(d.cdf(0.0), 0.0);
        assert!((d.cdf(1.0) - (1.0 - (-2.0f64).exp())).abs() < 1e-15);
        assert_eq!(d.cdf(1.0), d.cdf_left(1.0));

        let neg = JumpDistribution::Exponential {
            rate: 3.0,
            sign: JumpSign::Negative,
        };
        assert_eq!(neg.cdf(0.0), 1.0);
        assert!((neg.cdf(-1.0) - (-3.0f64).exp()).abs() < 1e-15);
        assert_eq!(neg.cdf(0.5), 1.0);
    }

    #[test]
    fn double_exponential_cdf_values() {
        let d = JumpDistribution::DoubleExponential {
            p: 0.5,
            eta1: 1.0,
            eta2: 2.0,
        };
        assert_eq!(d.cdf(0.0), 0.5);
        assert_eq!(d.atom(0.0), 0.0);
        assert!((d.cdf(1.0) - (1.0 - 0.5 * (-1.0f64).exp())).abs() < 1e-15);
        assert!((d.cdf(-1.0) - 0.5 * (-2.0f64).exp()).abs() < 1e-15);
        assert!((d.mean() - (0.5 / 1.0 - 0.5 / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn gaussian_cdf_and_degenerate_sigma() {
        let d = JumpDistribution::Gaussian {
            mu: 0.3,
            sigma: 2.0,
        };
        assert_eq!(d.cdf(0.3), 0.5);
        assert!(d.is_continuous());

        let degenerate = JumpDistribution::Gaussian {
            mu: 0.3,
            sigma: 0.0,
        };
        assert_eq!(degenerate.atom(0.3), 1.0);
        assert_eq!(degenerate.cdf(0.3), 1.0);
        assert_eq!(degenerate.cdf_left(0.3), 0.0);
        assert!(!degenerate.is_continuous());
    }

    #[test]
    fn mixture_cdf_is_convex_combination() {
        let d = JumpDistribution::FiniteMixture {
            weights: vec![0.5, 0.5],
            components: vec![JumpDistribution::PointMass { c: -1.0 }, exp_pos(2.0)],
        };
        assert!((d.cdf(0.0) - 0.5).abs() < 1e-15);
        assert_eq!(d.atom(-1.0), 0.5);
        assert_eq!(d.cdf_left(-1.0) + d.atom(-1.0), d.cdf(-1.0));
        assert!((d.mean() - (0.5 * -1.0 + 0.5 * 0.5)).abs() < 1e-15);
        assert!(!d.is_continuous());
        assert!(!d.spectrally_nonpositive());
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        let bad_rate = JumpDiffusionModel {
            m: 0.0,
            a: 1.0,
            jumps: exp_pos(-1.0),
        };
        assert!(matches!(
            bad_rate.validate(),
            Err(Error::InvalidParameter { field: "rate", .. })
        ));

        let bad_a = JumpDiffusionModel {
            m: 0.0,
            a: -1.0,
            jumps: JumpDistribution::PointMass { c: 1.0 },
        };
        assert!(matches!(
            bad_a.validate(),
            Err(Error::InvalidParameter { field: "a", .. })
        ));

        let bad_weights = JumpDistribution::FiniteMixture {
            weights: vec![0.5, 0.4],
            components: vec![
                JumpDistribution::PointMass { c: 0.0 },
                JumpDistribution::PointMass { c: 1.0 },
            ],
        };
        assert!(matches!(
            bad_weights.validate(),
            Err(Error::InvalidParameter {
                field: "weights",
                ..
            })
        ));
    }

    #[test]
    fn validation_report_summarizes_drift_and_moments() {
        let model = JumpDiffusionModel {
            m: 1.0,
            a: 2.0,
            jumps: JumpDistribution::PointMass { c: -1.0 },
        };
        let report = model.validate().unwrap();
        assert!((report.drift_index - -1.0).abs() < 1e-15);
        assert_eq!(report.exp_moment_beta_sup, f64::INFINITY);
        assert!(!report.hits_almost_surely);

        let report = JumpDiffusionModel {
            m: 0.0,
            a: 1.0,
            jumps: exp_pos(3.0),
        }
        .validate()
        .unwrap();
        assert_eq!(report.exp_moment_beta_sup, 3.0);
        assert!(report.hits_almost_surely);
    }

    #[test]
    fn spectral_negativity_detection() {
        assert!(JumpDistribution::PointMass { c: -1.0 }.spectrally_nonpositive());
        assert!(JumpDistribution::PointMass { c: 0.0 }.spectrally_nonpositive());
        assert!(!JumpDistribution::PointMass { c: 0.5 }.spectrally_nonpositive());
        assert!(JumpDistribution::Exponential {
            rate: 1.0,
            sign: JumpSign::Negative
        }
        .spectrally_nonpositive());
        assert!(!exp_pos(1.0).spectrally_nonpositive());
    }

    #[test]
    fn model_json_round_trip() {
        let text = r#"{
            "m": 0.5,
            "a": 2.0,
            "jumps": {
                "type": "finite_mixture",
                "weights": [0.5, 0.5],
                "components": [
                    {"type": "point_mass", "c": -1.0},
                    {"type": "exponential", "rate": 2.0, "sign": "+"}
                ]
            }
        }"#;
        let model: JumpDiffusionModel = serde_json::from_str(text).unwrap();
        assert_eq!(model.m, 0.5);
        model.validate().unwrap();
        let back = serde_json::to_string(&model).unwrap();
        let again: JumpDiffusionModel = serde_json::from_str(&back).unwrap();
        assert_eq!(model, again);
    }

    #[test]
    fn level_guards_its_domain() {
        assert!(Level::new(1.0).is_ok());
        assert!(Level::new(0.0).is_err());
        assert!(Level::new(-2.0).is_err());
        assert!(Level::new(f64::NAN).is_err());
        assert!(Level::new(f64::INFINITY).is_err());
        let level: Level = serde_json::from_str("2.5").unwrap();
        assert_eq!(level.get(), 2.5);
        assert!(serde_json::from_str::<Level>("-1.0").is_err());
    }

    #[test]
    fn point_mass_sampling_consumes_no_draws() {
        let d = JumpDistribution::PointMass { c: 4.0 };
        let mut s1 = RandomStream::for_path(7, 0);
        let mut s2 = RandomStream::for_path(7, 0);
        assert_eq!(d.sample(&mut s1), 4.0);
        assert_eq!(s1.uniform(), s2.uniform());
    }
}
