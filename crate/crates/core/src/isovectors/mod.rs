//! Tilde isovector fields and the Lie algebras they span.
//!
//! A [`TildeField`] is the first-order operator `a ∂_t + b ∂_q + c` acting on
//! solutions η of the deformed backward heat equation with potential
//! `V = C/q² + Dq²`. [`basis`] builds the generators for a [`Potential`],
//! [`structure_constants`] expresses brackets in that basis by exact term
//! matching, and the submodules cover basis changes, the structure theorem,
//! limits in `D → 0` and the determining equations.

mod basis;
mod checks;
mod structure;
pub mod tables;

pub use basis::{basis, transformed_basis, transformed_basis_with_theta, Transformed};
pub use checks::{
    commutator_fd_deviation, determining_check, limit_check, DeterminingResiduals, LimitRow,
};
pub use structure::{
    isomorphism_to_m, structure_constants, structure_identification, subalgebra_tables,
    Isomorphism, StructureKind, StructureReport, StructureTable, SubalgebraReport,
};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::ScalarField;

#[derive(Debug, Error, PartialEq)]
pub enum IsoError {
    #[error("gamma must be positive and finite, got {0}")]
    InvalidGamma(f64),
    #[error("potential coefficients must be finite")]
    NonFinitePotential,
    #[error("the d/dt coefficient of a tilde field must not depend on q")]
    TimeCoefficientDependsOnQ,
    #[error("bracket [{0}, {1}] leaves the span of the basis")]
    NotClosed(String, String),
    #[error("operation requires D != 0")]
    RequiresNonzeroD,
    #[error("limit sequence mixes signs of D")]
    MixedSigns,
    #[error("structure mismatch: {0}")]
    StructureMismatch(String),
    #[error("input must depend on t only")]
    NotTimeOnly,
}

/// Potential `V(t, q) = C/q² + D q²` together with the noise scale γ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub c: f64,
    pub d: f64,
    pub gamma: f64,
}

impl Potential {
    pub fn new(c: f64, d: f64, gamma: f64) -> Result<Self, IsoError> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(IsoError::InvalidGamma(gamma));
        }
        if !(c.is_finite() && d.is_finite()) {
            return Err(IsoError::NonFinitePotential);
        }
        Ok(Potential { c, d, gamma })
    }

    /// Free case `V = 0`.
    pub fn free(gamma: f64) -> Result<Self, IsoError> {
        Self::new(0.0, 0.0, gamma)
    }

    pub fn v(&self, q: f64) -> f64 {
        let mut v = self.d * q * q;
        if self.c != 0.0 {
            v += self.c / (q * q);
        }
        v
    }

    pub fn label(&self) -> CaseLabel {
        CaseLabel::of(self.c, self.d)
    }
}

/// The six sign cases of `(C, D)`. Dispatch uses exact comparison with 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseLabel {
    CNonzeroDPositive,
    CNonzeroDZero,
    CNonzeroDNegative,
    CZeroDPositive,
    CZeroDZero,
    CZeroDNegative,
}

impl CaseLabel {
    pub fn of(c: f64, d: f64) -> Self {
        use CaseLabel::*;
        match (c != 0.0, d.partial_cmp(&0.0)) {
            (true, Some(std::cmp::Ordering::Greater)) => CNonzeroDPositive,
            (true, Some(std::cmp::Ordering::Less)) => CNonzeroDNegative,
            (true, _) => CNonzeroDZero,
            (false, Some(std::cmp::Ordering::Greater)) => CZeroDPositive,
            (false, Some(std::cmp::Ordering::Less)) => CZeroDNegative,
            (false, _) => CZeroDZero,
        }
    }

    pub fn c_is_zero(&self) -> bool {
        matches!(
            self,
            CaseLabel::CZeroDPositive | CaseLabel::CZeroDZero | CaseLabel::CZeroDNegative
        )
    }

    pub fn dim(&self) -> usize {
        if self.c_is_zero() {
            6
        } else {
            4
        }
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use CaseLabel::*;
        let s = match self {
            CNonzeroDPositive => "C!=0, D>0",
            CNonzeroDZero => "C!=0, D=0",
            CNonzeroDNegative => "C!=0, D<0",
            CZeroDPositive => "C=0, D>0",
            CZeroDZero => "C=0, D=0",
            CZeroDNegative => "C=0, D<0",
        };
        f.write_str(s)
    }
}

/// Generator family of a basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// Native basis for D ≠ 0.
    P,
    /// Native basis for D = 0.
    M,
    /// Limit-adapted basis for D > 0.
    R,
    /// Limit-adapted basis for D < 0.
    V,
    /// Basis with the same structure constants as `M`.
    S,
}

impl Family {
    pub fn prefix(&self) -> &'static str {
        match self {
            Family::P => "P",
            Family::M => "M",
            Family::R => "R",
            Family::V => "V",
            Family::S => "S",
        }
    }
}

/// Operator `a ∂_t + b ∂_q + c`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TildeField {
    #[serde(rename = "dt")]
    pub a: ScalarField,
    #[serde(rename = "dq")]
    pub b: ScalarField,
    #[serde(rename = "mul")]
    pub c: ScalarField,
}

impl TildeField {
    pub fn new(a: ScalarField, b: ScalarField, c: ScalarField) -> Result<Self, IsoError> {
        if !a.is_t_only() {
            return Err(IsoError::TimeCoefficientDependsOnQ);
        }
        Ok(TildeField { a, b, c })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        TildeField {
            a: &self.a + &other.a,
            b: &self.b + &other.b,
            c: &self.c + &other.c,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, k: f64) -> Self {
        TildeField {
            a: self.a.scale(k),
            b: self.b.scale(k),
            c: self.c.scale(k),
        }
    }

    /// `Σ coeffs[k] · fields[k]`.
    pub fn combination(coeffs: &[f64], fields: &[TildeField]) -> Self {
        assert_eq!(coeffs.len(), fields.len());
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut c = Vec::new();
        for (k, f) in coeffs.iter().zip(fields) {
            if *k == 0.0 {
                continue;
            }
            a.extend(f.a.scale(*k).terms().iter().copied());
            b.extend(f.b.scale(*k).terms().iter().copied());
            c.extend(f.c.scale(*k).terms().iter().copied());
        }
        TildeField {
            a: ScalarField::from_terms(a),
            b: ScalarField::from_terms(b),
            c: ScalarField::from_terms(c),
        }
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }

    /// First-order part `a ∂_t + b ∂_q` applied to `f`.
    pub fn derive(&self, f: &ScalarField) -> ScalarField {
        &self.a * f.d_dt() + &self.b * f.d_dq()
    }

    /// Full operator applied to a field: `a f_t + b f_q + c f`.
    pub fn apply(&self, f: &ScalarField) -> ScalarField {
        self.derive(f) + &self.c * f
    }

    /// The multiplier is a constant and both derivative parts vanish.
    pub fn is_pure_constant(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.constant_value().is_some()
    }

    /// Evaluates `(a, b, c)` at a point.
    pub fn eval(&self, t: f64, q: f64) -> [f64; 3] {
        [self.a.eval(t, q), self.b.eval(t, q), self.c.eval(t, q)]
    }
}

impl fmt::Display for TildeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})·∂t + ({})·∂q + ({})", self.a, self.b, self.c)
    }
}

/// Commutator of two first-order operators.
///
/// With `X = a∂_t + b∂_q + c` and `X₁ = a∂_t + b∂_q`,
/// `[X, Y] = (X₁a' − Y₁a)∂_t + (X₁b' − Y₁b)∂_q + (X₁c' − Y₁c)` where primes
/// denote the components of `Y`.
pub fn bracket(x: &TildeField, y: &TildeField) -> TildeField {
    TildeField {
        a: x.derive(&y.a) - y.derive(&x.a),
        b: x.derive(&y.b) - y.derive(&x.b),
        c: x.derive(&y.c) - y.derive(&x.c),
    }
}

/// A basis of one of the algebras, with generator labels.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgebraCase {
    pub potential: Potential,
    pub label: CaseLabel,
    /// `√(8|D|)`, absent for D = 0.
    pub epsilon: Option<f64>,
    pub family: Family,
    pub names: Vec<String>,
    pub basis: Vec<TildeField>,
}

impl AlgebraCase {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn gamma(&self) -> f64 {
        self.potential.gamma
    }

    /// Generator by 1-based index.
    pub fn gen(&self, i: usize) -> &TildeField {
        &self.basis[i - 1]
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i - 1]
    }
}
