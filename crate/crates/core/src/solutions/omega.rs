use serde::{Deserialize, Serialize};

use super::{Solution, SolutionError};
use crate::isovectors::{bracket, TildeField};

/// The section `S = −γ ln η` and its conjugate momenta at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionValues {
    pub s: f64,
    /// `γ η_t / η`.
    pub theta_e: f64,
    /// `γ η_q / η`.
    pub theta_b: f64,
    /// `Ẽ = −γ η_t / η = S_t`.
    pub e_tilde: f64,
    /// `B̃ = −γ η_q / η = S_q`.
    pub b_tilde: f64,
    /// `−S_t + ½S_q² − (γ/2)S_qq − V` (primal) or its dual analogue
    /// `S_t + ½S_q² − (γ/2)S_qq − V`.
    pub hjb_residual: f64,
}

/// Evaluates the section induced by η at `(t, q)`.
pub fn section(eta: &Solution, t: f64, q: f64) -> Result<SectionValues, SolutionError> {
    let g = eta.gamma();
    let j = eta.jet(t, q, 2)?;
    if j.value() <= 0.0 {
        return Err(SolutionError::NonPositive { t, q });
    }
    let s = j.ln().scale(-g);
    let (st, sq, sqq) = (s.partial(1, 0), s.partial(0, 1), s.partial(0, 2));
    let v = eta.potential().v(q);
    let hjb_residual = if eta.is_dual() {
        st + 0.5 * sq * sq - 0.5 * g * sqq - v
    } else {
        -st + 0.5 * sq * sq - 0.5 * g * sqq - v
    };
    Ok(SectionValues {
        s: s.value(),
        theta_e: -st,
        theta_b: -sq,
        e_tilde: st,
        b_tilde: sq,
        hjb_residual,
    })
}

/// Contact Hamiltonian `θ(F) = −γc − θ_E a − θ_B b` of a tilde field
/// `F = a∂t + b∂q + c` along the section of η.
#[derive(Clone, Debug)]
pub struct ContactHamiltonian {
    pub field: TildeField,
    pub eta: Solution,
}

impl ContactHamiltonian {
    pub fn eval(&self, t: f64, q: f64) -> Result<f64, SolutionError> {
        let g = self.eta.gamma();
        let (lt, lq) = self.eta.log_grad(t, q)?;
        let [a, b, c] = self.field.eval(t, q);
        Ok(-g * c - g * lt * a - g * lq * b)
    }

    /// `−(1/γ) η θ(F)`, which equals `F(η)`.
    pub fn tilde_value(&self, t: f64, q: f64) -> Result<f64, SolutionError> {
        let h = self.eval(t, q)?;
        Ok(-h * self.eta.value(t, q)? / self.eta.gamma())
    }
}

pub fn contact_hamiltonian(field: &TildeField, eta: &Solution) -> ContactHamiltonian {
    ContactHamiltonian {
        field: field.clone(),
        eta: eta.clone(),
    }
}

/// `Ω_η(X, Y) = γ [X, Y](η) / η`.
#[derive(Clone, Debug)]
pub struct OmegaEta {
    pub bracket: TildeField,
    pub eta: Solution,
}

impl OmegaEta {
    pub fn eval(&self, t: f64, q: f64) -> Result<f64, SolutionError> {
        let g = self.eta.gamma();
        let [a, b, c] = self.bracket.eval(t, q);
        if a == 0.0 && b == 0.0 {
            self.eta.check(t, q)?;
            return Ok(g * c);
        }
        let (lt, lq) = self.eta.log_grad(t, q)?;
        Ok(g * (a * lt + b * lq + c))
    }

    /// True when the bracket is a constant multiplier, so Ω is deterministic.
    pub fn is_deterministic(&self) -> bool {
        self.bracket.is_zero() || self.bracket.is_pure_constant()
    }
}

pub fn omega_eta(x: &TildeField, y: &TildeField, eta: &Solution) -> OmegaEta {
    OmegaEta {
        bracket: bracket(x, y),
        eta: eta.clone(),
    }
}
