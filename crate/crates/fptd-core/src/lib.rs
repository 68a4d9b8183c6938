//! First-passage time law of a jump diffusion.
//!
//! The process is `X_t = m*t + W_t + sum_{i<=N_t} Y_i`: Brownian motion with
//! drift `m`, plus a compound Poisson stream of i.i.d. jumps `Y_i` arriving at
//! rate `a`. For a level `x > 0` the hitting time is
//! `tau_x = inf { u > 0 : X_u >= x }`, and its law has a density on `(0, inf)`
//! together with a possible atom at `t = 0` and a defect at infinity.
//!
//! The crate provides three independent routes to that law:
//!
//! * [`closed_form`]: the Brownian building blocks (`ftilde`, the inverse
//!   Gaussian CDF, the defect formula), the density value at `t = 0`, a
//!   Gaussian-smoothed `ftilde` in closed form, and evaluable envelope bounds
//!   with explicit constants.
//! * [`pathsim`] + [`estimator`]: exact-in-distribution skeleton simulation
//!   (jump times, values at jumps and grid times), Brownian-bridge crossing
//!   Bernoullis between anchors, and conditional Monte Carlo estimators of the
//!   density, CDF, and defect built on the hitting-time representation.
//! * [`oracles`]: independent cross-checks (truncated Poisson-mixture marginal
//!   density, the Kendall identity residual `t*f - x*p`, a biased-from-below
//!   Euler scheme, and direct quadrature of the smoothed `ftilde`).
//!
//! The crate is `no_std` (with `alloc`); anything that needs an OS lives in
//! the companion `fptd` crate. All randomness flows through [`rng::RandomStream`],
//! a counter-based splittable generator, so every estimate is a pure function
//! of `(model, parameters, master_seed)` regardless of how work is scheduled.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod closed_form;
pub mod error;
pub mod estimator;
pub mod model;
pub mod oracles;
pub mod pathsim;
pub mod quad;
pub mod rng;
pub mod special;

pub use error::Error;
pub use model::{JumpDiffusionModel, JumpDistribution, Level};
