use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use super::{AffineModel, SdeError};
use crate::solutions::Solution;

/// Marginal law of the Bernstein process `z(t)` for the δ = 1 and δ = 3
/// affine models. With `σ² = α²(1 − e^{−λt})/(4λ)`, z(t) is
/// `Normal(e^{−λt/2} z0, σ²)` for δ = 1 and Maxwell with scale σ for δ = 3
/// started at 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Density {
    pub delta: u8,
    pub model: AffineModel,
    pub z0: f64,
    pub t: f64,
}

pub fn density(delta: u8, m: &AffineModel, z0: f64, t: f64) -> Result<Density, SdeError> {
    if delta != 1 && delta != 3 {
        return Err(SdeError::UnsupportedDelta(delta as f64));
    }
    if (m.delta() - delta as f64).abs() > 1e-12 {
        return Err(SdeError::InvalidModel(format!(
            "model has delta {} but density requested for {delta}",
            m.delta()
        )));
    }
    if m.lambda == 0.0 {
        return Err(SdeError::InvalidModel("density needs lambda != 0".into()));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(SdeError::InvalidConfig(format!("density needs t > 0, got {t}")));
    }
    if delta == 3 && z0 != 0.0 {
        return Err(SdeError::InvalidModel("the delta = 3 law assumes z0 = 0".into()));
    }
    Ok(Density {
        delta,
        model: *m,
        z0,
        t,
    })
}

impl Density {
    pub fn sigma2(&self) -> f64 {
        let (a, l) = (self.model.alpha, self.model.lambda);
        a * a * -(-l * self.t).exp_m1() / (4.0 * l)
    }

    /// `e^{−λt/2} z0`, the mean of the δ = 1 law.
    pub fn center(&self) -> f64 {
        (-0.5 * self.model.lambda * self.t).exp() * self.z0
    }

    pub fn pdf(&self, q: f64) -> f64 {
        let s2 = self.sigma2();
        if self.delta == 1 {
            let d = q - self.center();
            (-d * d / (2.0 * s2)).exp() / (2.0 * std::f64::consts::PI * s2).sqrt()
        } else if q <= 0.0 {
            0.0
        } else {
            (2.0 / std::f64::consts::PI).sqrt() * q * q * (-q * q / (2.0 * s2)).exp()
                / (s2 * s2.sqrt())
        }
    }

    pub fn cdf(&self, q: f64) -> f64 {
        let s = self.sigma2().sqrt();
        if self.delta == 1 {
            0.5 * (1.0 + erf((q - self.center()) / (s * std::f64::consts::SQRT_2)))
        } else if q <= 0.0 {
            0.0
        } else {
            let x = q / s;
            erf(x / std::f64::consts::SQRT_2)
                - (2.0 / std::f64::consts::PI).sqrt() * x * (-0.5 * x * x).exp()
        }
    }

    /// `E[z^k]` for `k = 1..=4`.
    pub fn raw_moment(&self, k: u32) -> f64 {
        let s2 = self.sigma2();
        let s = s2.sqrt();
        if self.delta == 1 {
            let m = self.center();
            match k {
                1 => m,
                2 => m * m + s2,
                3 => m.powi(3) + 3.0 * m * s2,
                4 => m.powi(4) + 6.0 * m * m * s2 + 3.0 * s2 * s2,
                _ => f64::NAN,
            }
        } else {
            let c = (2.0 / std::f64::consts::PI).sqrt();
            match k {
                1 => 2.0 * c * s,
                2 => 3.0 * s2,
                3 => 8.0 * c * s2 * s,
                4 => 15.0 * s2 * s2,
                _ => f64::NAN,
            }
        }
    }

    /// `η_* = ρ_t / η`, a solution of the dual equation.
    pub fn eta_star(&self) -> Solution {
        Solution::density_ratio(self.delta, self.model.alpha, self.model.lambda, self.z0)
            .expect("parameters validated on construction")
    }

    /// Support of the law: `(lo, hi)` with `lo = −∞` for δ = 1.
    pub fn support(&self) -> (f64, f64) {
        if self.delta == 1 {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else {
            (0.0, f64::INFINITY)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printed_delta_one_form() {
        let (alpha, lambda, z0, t) = (2.0f64, 1.5f64, 0.7f64, 0.6f64);
        let m = AffineModel::from_delta(alpha, lambda, 1.0).unwrap();
        let d = density(1, &m, z0, t).unwrap();
        let om = 1.0 - (-lambda * t).exp();
        for q in [-1.0, 0.2, 1.4] {
            let printed = 2.0 * lambda.sqrt()
                / (alpha * (2.0 * std::f64::consts::PI * om).sqrt())
                * (-2.0 * lambda * (q - (-lambda * t / 2.0).exp() * z0).powi(2) / (alpha * alpha * om))
                    .exp();
            assert!((d.pdf(q) - printed).abs() < 1e-14);
        }
    }

    #[test]
    fn matches_printed_delta_three_form() {
        let (alpha, lambda, t) = (1.7f64, 0.8f64, 1.3f64);
        let m = AffineModel::from_delta(alpha, lambda, 3.0).unwrap();
        let d = density(3, &m, 0.0, t).unwrap();
        let om = 1.0 - (-lambda * t).exp();
        for q in [0.1, 0.9, 2.5] {
            let printed = 1.0 / (2.0 * std::f64::consts::PI).sqrt() * 16.0 * lambda.powf(1.5)
                / (alpha.powi(3) * om.powf(1.5))
                * q
                * q
                * (-2.0 * lambda * q * q / (alpha * alpha * om)).exp();
            assert!((d.pdf(q) - printed).abs() < 1e-13 * printed);
        }
        assert_eq!(d.pdf(-0.3), 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let m3 = AffineModel::from_delta(2.0, 2.0, 3.0).unwrap();
        assert!(density(3, &m3, 0.5, 1.0).is_err());
        assert!(density(1, &m3, 0.0, 1.0).is_err());
        assert!(density(2, &m3, 0.0, 1.0).is_err());
        assert!(density(3, &AffineModel::from_delta(2.0, 0.0, 3.0).unwrap(), 0.0, 1.0).is_err());
        assert!(density(3, &m3, 0.0, 0.0).is_err());
    }
}
