//! Seeded path simulation: Bernstein diffusions, the one-factor affine
//! model, squared Bessel processes and the exact Ornstein–Uhlenbeck
//! transition, plus the closed-form δ = 1 and δ = 3 marginal laws.
//!
//! Every path draws from its own ChaCha8 stream (`seed_from_u64(seed)` with
//! `set_stream(path_index)`), so ensembles are bit-identical for any rayon
//! thread count.

mod density;
mod ensemble;
mod simulate;

pub use density::{density, Density};
pub use ensemble::PathEnsemble;
pub use simulate::{
    besq_time_change, clock, ou_exact, s_expectation, s_martingale, simulate_affine,
    simulate_affine_via_besq, simulate_bernstein, simulate_besq, simulate_besq_on_grid,
    AffinePaths,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SdeError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("z0 = {z0} is outside the solution domain at t0 = {t0}")]
    Z0OutOfDomain { z0: f64, t0: f64 },
    #[error("time change needs BESQ time {needed} for t = {t}, beyond the simulated horizon {horizon}")]
    TimeChangeBeyondHorizon { t: f64, needed: f64, horizon: f64 },
    #[error("BESQ grid has no time matching clock({t}) = {needed}")]
    TimeChangeOffGrid { t: f64, needed: f64 },
    #[error("nonpositive value {value} on path {path} at t = {t}")]
    NonPositive { path: usize, t: f64, value: f64 },
    #[error("unsupported delta {0}")]
    UnsupportedDelta(f64),
    #[error("scheme {0:?} does not apply here")]
    UnsupportedScheme(Scheme),
    #[error("malformed ensemble file: {0}")]
    BadFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One-factor affine short-rate model `dr = √|αr + β| dw + (φ − λr) dt`.
/// In `X = αr + β` it reads `dX = α√|X| dw + (αφ̃ − λX) dt`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineModel {
    pub alpha: f64,
    pub beta: f64,
    pub phi: f64,
    pub lambda: f64,
}

impl AffineModel {
    pub fn new(alpha: f64, beta: f64, phi: f64, lambda: f64) -> Result<Self, SdeError> {
        let m = AffineModel {
            alpha,
            beta,
            phi,
            lambda,
        };
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(SdeError::InvalidModel(format!("alpha must be positive, got {alpha}")));
        }
        if ![beta, phi, lambda].iter().all(|v| v.is_finite()) {
            return Err(SdeError::InvalidModel("parameters must be finite".into()));
        }
        if m.phi_tilde() < 0.0 {
            return Err(SdeError::InvalidModel(format!(
                "phi_tilde = phi + lambda*beta/alpha must be >= 0, got {}",
                m.phi_tilde()
            )));
        }
        Ok(m)
    }

    /// The model with `β = 0` and dimension δ, i.e. `φ = δα/4`.
    pub fn from_delta(alpha: f64, lambda: f64, delta: f64) -> Result<Self, SdeError> {
        Self::new(alpha, 0.0, delta * alpha / 4.0, lambda)
    }

    pub fn phi_tilde(&self) -> f64 {
        self.phi + self.lambda * self.beta / self.alpha
    }

    pub fn delta(&self) -> f64 {
        4.0 * self.phi_tilde() / self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.alpha * self.alpha / 4.0
    }

    pub fn x_from_r(&self, r: f64) -> f64 {
        self.alpha * r + self.beta
    }

    pub fn r_from_x(&self, x: f64) -> f64 {
        (x - self.beta) / self.alpha
    }
}

/// Time stepping scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Implicit square-root scheme for the affine model when δ = 1 or
    /// δ ≥ 2, Euler–Maruyama otherwise.
    #[default]
    Auto,
    /// Euler–Maruyama; full truncation (`X⁺` inside drift and √) for
    /// CIR-type equations.
    EulerMaruyama,
    /// Drift-implicit Euler on `√X`.
    ImplicitSqrt,
    /// Exact Gaussian transitions (OU only).
    ExactOu,
    /// `|√y0 e₁ + W|²` for a δ-dimensional Brownian motion (integer δ).
    BesqSumOfSquares,
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "auto" => Scheme::Auto,
            "euler-maruyama" => Scheme::EulerMaruyama,
            "implicit-sqrt" => Scheme::ImplicitSqrt,
            "exact-ou" => Scheme::ExactOu,
            "besq-sum-of-squares" => Scheme::BesqSumOfSquares,
            other => return Err(format!("unknown scheme '{other}'")),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    #[serde(default)]
    pub scheme: Scheme,
    /// Keep every `record_stride`-th grid time (and the last one).
    #[serde(default = "one")]
    pub record_stride: usize,
}

fn one() -> usize {
    1
}

impl SimConfig {
    pub fn new(t0: f64, t1: f64, steps: usize, n_paths: usize, seed: u64) -> Self {
        SimConfig {
            t0,
            t1,
            steps,
            n_paths,
            seed,
            scheme: Scheme::Auto,
            record_stride: 1,
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn validate(&self) -> Result<(), SdeError> {
        let bad = |m: String| Err(SdeError::InvalidConfig(m));
        if !(self.t0.is_finite() && self.t1.is_finite() && self.t1 > self.t0) {
            return bad(format!("need t1 > t0, got [{}, {}]", self.t0, self.t1));
        }
        if self.steps == 0 || self.n_paths == 0 || self.record_stride == 0 {
            return bad("steps, n_paths and record_stride must be positive".into());
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }

    /// Grid time of step `k`.
    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.t1
        } else {
            self.t0 + k as f64 * self.dt()
        }
    }

    pub(crate) fn is_recorded(&self, k: usize) -> bool {
        k.is_multiple_of(self.record_stride) || k == self.steps
    }

    /// Recorded grid times.
    pub fn recorded_times(&self) -> Vec<f64> {
        (0..=self.steps)
            .filter(|&k| self.is_recorded(k))
            .map(|k| self.time(k))
            .collect()
    }
}
