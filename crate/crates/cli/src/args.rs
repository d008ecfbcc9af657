//! Flag groups shared by several commands, resolved against a config file.

use clap::{Args, ValueEnum};
use hjb_iso::isovectors::{basis, transformed_basis, AlgebraCase, Potential};
use hjb_iso::sde::{AffineModel, Scheme, SimConfig};

use crate::config::RunConfig;
use crate::CliError;

#[derive(Args, Clone, Debug, Default)]
pub struct PotentialArgs {
    /// Coefficient of 1/q² in the potential.
    #[arg(long = "C")]
    pub c: Option<f64>,
    /// Coefficient of q² in the potential.
    #[arg(long = "D")]
    pub d: Option<f64>,
    /// Noise scale γ > 0.
    #[arg(long)]
    pub gamma: Option<f64>,
}

impl PotentialArgs {
    pub fn resolve(&self, cfg: &RunConfig) -> Result<Potential, CliError> {
        let p = &cfg.potential;
        Ok(Potential::new(
            self.c.or(p.c).unwrap_or(0.0),
            self.d.or(p.d).unwrap_or(0.0),
            self.gamma.or(p.gamma).unwrap_or(1.0),
        )?)
    }

    pub fn any_set(&self, cfg: &RunConfig) -> bool {
        let p = &cfg.potential;
        self.c.or(p.c).is_some() || self.d.or(p.d).is_some() || self.gamma.or(p.gamma).is_some()
    }
}

/// Which basis of the algebra to work in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyChoice {
    /// `M` when D = 0, the limit-adapted `R`/`V` basis otherwise.
    Auto,
    /// `M` when D = 0, `P` otherwise.
    Native,
    /// `R` (D > 0) or `V` (D < 0).
    Limit,
    /// The basis with the structure constants of `M`.
    Structure,
}

pub fn algebra_case(p: Potential, family: FamilyChoice) -> Result<AlgebraCase, CliError> {
    let native = basis(p);
    if p.d == 0.0 {
        return match family {
            FamilyChoice::Limit => Err(CliError::Usage("the limit basis needs D != 0".into())),
            _ => Ok(native),
        };
    }
    Ok(match family {
        FamilyChoice::Native => native,
        FamilyChoice::Auto | FamilyChoice::Limit => transformed_basis(&native)?.limit,
        FamilyChoice::Structure => transformed_basis(&native)?.structure,
    })
}

#[derive(Args, Clone, Debug, Default)]
pub struct AffineArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Effective dimension 4φ̃/α; replaces φ when given.
    #[arg(long)]
    pub delta: Option<f64>,
}

/// Resolved affine flags: α and λ default to 2, δ to 3.
#[derive(Clone, Copy, Debug)]
pub struct AffineParams {
    pub alpha: f64,
    pub beta: f64,
    pub phi: Option<f64>,
    pub lambda: f64,
    pub delta: Option<f64>,
}

impl AffineArgs {
    pub fn resolve(&self, cfg: &RunConfig) -> AffineParams {
        let a = &cfg.affine;
        AffineParams {
            alpha: self.alpha.or(a.alpha).unwrap_or(2.0),
            beta: self.beta.or(a.beta).unwrap_or(0.0),
            phi: self.phi.or(a.phi),
            lambda: self.lambda.or(a.lambda).unwrap_or(2.0),
            delta: self.delta.or(a.delta),
        }
    }
}

impl AffineParams {
    pub fn delta_or(&self, default: f64) -> f64 {
        self.delta.unwrap_or(default)
    }

    /// The model at a fixed δ; a conflicting `--delta` or any `--phi` is a
    /// usage error.
    pub fn model_with_delta(&self, delta: f64) -> Result<AffineModel, CliError> {
        if self.phi.is_some() || self.delta.is_some_and(|d| d != delta) {
            return Err(CliError::Usage(format!("this command needs delta = {delta}")));
        }
        AffineParams {
            delta: Some(delta),
            ..*self
        }
        .model()
    }

    pub fn model(&self) -> Result<AffineModel, CliError> {
        match (self.delta, self.phi) {
            (Some(_), Some(_)) => Err(CliError::Usage("give either --delta or --phi, not both".into())),
            (None, Some(phi)) => Ok(AffineModel::new(self.alpha, self.beta, phi, self.lambda)?),
            (delta, None) => {
                let m = AffineModel::from_delta(self.alpha, self.lambda, delta.unwrap_or(3.0))?;
                // Shifting by β moves X = αr + β but keeps φ̃, hence δ.
                Ok(AffineModel::new(
                    self.alpha,
                    self.beta,
                    m.phi - self.lambda * self.beta / self.alpha,
                    self.lambda,
                )?)
            }
        }
    }
}

#[derive(Args, Clone, Debug, Default)]
pub struct SimArgs {
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub t1: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// auto, euler-maruyama, implicit-sqrt, exact-ou or besq-sum-of-squares.
    #[arg(long)]
    pub scheme: Option<Scheme>,
    /// Record every n-th step.
    #[arg(long)]
    pub stride: Option<usize>,
    /// Initial value (r0, y0 or z0 depending on the model).
    #[arg(long)]
    pub start: Option<f64>,
}

/// Defaults a command applies where neither flag nor file sets a value.
#[derive(Clone, Copy, Debug)]
pub struct SimDefaults {
    pub steps: usize,
    pub paths: usize,
    pub stride: usize,
    pub start: f64,
}

impl SimArgs {
    pub fn resolve(&self, cfg: &RunConfig, dflt: SimDefaults) -> Result<(SimConfig, f64), CliError> {
        let s = &cfg.simulation;
        let sim = SimConfig {
            t0: self.t0.or(s.t0).unwrap_or(0.0),
            t1: self.t1.or(s.t1).unwrap_or(1.0),
            steps: self.steps.or(s.steps).unwrap_or(dflt.steps),
            n_paths: self.paths.or(s.paths).unwrap_or(dflt.paths),
            seed: self.seed.or(s.seed).unwrap_or(0),
            scheme: self.scheme.or(s.scheme).unwrap_or_default(),
            record_stride: self.stride.or(s.stride).unwrap_or(dflt.stride),
        };
        sim.validate()?;
        Ok((sim, self.start.or(s.start).unwrap_or(dflt.start)))
    }
}
