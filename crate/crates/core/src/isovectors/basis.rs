//! Generator bases for every sign case, and the limit-adapted bases.

use serde::{Deserialize, Serialize};

use super::{AlgebraCase, CaseLabel, Family, IsoError, Potential, TildeField};
use crate::field::{ScalarField as F, Term};

fn tf(a: F, b: F, c: F) -> TildeField {
    TildeField { a, b, c }
}

fn term(coeff: f64) -> Term {
    Term::constant(coeff)
}

fn names(family: Family, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{}{}", family.prefix(), i)).collect()
}

fn d_zero_basis(gamma: f64) -> Vec<TildeField> {
    vec![
        tf(
            F::term(term(-1.0).t(2)),
            F::term(term(-1.0).t(1).q(1)),
            F::from_terms(vec![term(-0.5).t(1), term(0.5 / gamma).q(2)]),
        ),
        tf(F::t() * -1.0, F::q() * -0.5, F::zero()),
        tf(F::constant(-1.0), F::zero(), F::zero()),
        tf(F::zero(), F::zero(), F::constant(-1.0 / gamma)),
        tf(F::zero(), F::t() * -1.0, F::q() * (1.0 / gamma)),
        tf(F::zero(), F::constant(-1.0), F::zero()),
    ]
}

fn d_positive_basis(eps: f64, gamma: f64) -> Vec<TildeField> {
    let k = eps / (4.0 * gamma);
    let h = eps / (2.0 * gamma);
    vec![
        tf(
            F::term(term(-1.0 / eps).exp(eps)),
            F::term(term(-0.5).q(1).exp(eps)),
            F::from_terms(vec![term(-0.25).exp(eps), term(k).q(2).exp(eps)]),
        ),
        tf(
            F::term(term(1.0 / eps).exp(-eps)),
            F::term(term(-0.5).q(1).exp(-eps)),
            F::from_terms(vec![term(-0.25).exp(-eps), term(-k).q(2).exp(-eps)]),
        ),
        tf(F::constant(-1.0), F::zero(), F::zero()),
        tf(F::zero(), F::zero(), F::constant(-1.0 / gamma)),
        tf(
            F::zero(),
            F::term(term(-1.0).exp(eps / 2.0)),
            F::term(term(h).q(1).exp(eps / 2.0)),
        ),
        tf(
            F::zero(),
            F::term(term(-1.0).exp(-eps / 2.0)),
            F::term(term(-h).q(1).exp(-eps / 2.0)),
        ),
    ]
}

fn d_negative_basis(eps: f64, gamma: f64) -> Vec<TildeField> {
    let k = eps / (4.0 * gamma);
    let h = eps / (2.0 * gamma);
    vec![
        tf(
            F::term(term(-1.0 / eps).sin(eps)),
            F::term(term(-0.5).q(1).cos(eps)),
            F::from_terms(vec![term(-k).q(2).sin(eps), term(-0.25).cos(eps)]),
        ),
        tf(
            F::term(term(1.0 / eps).cos(eps)),
            F::term(term(-0.5).q(1).sin(eps)),
            F::from_terms(vec![term(k).q(2).cos(eps), term(-0.25).sin(eps)]),
        ),
        tf(F::constant(-1.0), F::zero(), F::zero()),
        tf(F::zero(), F::zero(), F::constant(-1.0 / gamma)),
        tf(
            F::zero(),
            F::term(term(-1.0).cos(eps / 2.0)),
            F::term(term(-h).q(1).sin(eps / 2.0)),
        ),
        tf(
            F::zero(),
            F::term(term(-1.0).sin(eps / 2.0)),
            F::term(term(h).q(1).cos(eps / 2.0)),
        ),
    ]
}

/// Generators of the tilde algebra for a potential: `M1..M6` when D = 0,
/// `P1..P6` otherwise, truncated to the first four when C ≠ 0.
pub fn basis(p: Potential) -> AlgebraCase {
    let label = p.label();
    let dim = label.dim();
    let (family, epsilon, mut fields) = if p.d > 0.0 {
        let eps = (8.0 * p.d).sqrt();
        (Family::P, Some(eps), d_positive_basis(eps, p.gamma))
    } else if p.d < 0.0 {
        let eps = (-8.0 * p.d).sqrt();
        (Family::P, Some(eps), d_negative_basis(eps, p.gamma))
    } else {
        (Family::M, None, d_zero_basis(p.gamma))
    };
    fields.truncate(dim);
    AlgebraCase {
        potential: p,
        label,
        epsilon,
        family,
        names: names(family, dim),
        basis: fields,
    }
}

/// Result of [`transformed_basis`]: the limit-adapted basis (`R` for D > 0,
/// `V` for D < 0) and the `S` basis whose structure constants coincide with
/// those of `M`, each with its coefficient matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Transformed {
    pub native: AlgebraCase,
    pub limit: AlgebraCase,
    pub structure: AlgebraCase,
    /// Row `i` holds the coordinates of the i-th limit generator over `P`.
    pub limit_in_native: Vec<Vec<f64>>,
    /// Row `i` holds the coordinates of `S_i` over the limit basis.
    pub structure_in_limit: Vec<Vec<f64>>,
}

impl Transformed {
    /// Coordinates of `S_i` over `P`.
    pub fn structure_in_native(&self) -> Vec<Vec<f64>> {
        let n = self.native.dim();
        let mut out = vec![vec![0.0; n]; n];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..n)
                    .map(|k| self.structure_in_limit[i][k] * self.limit_in_native[k][j])
                    .sum();
            }
        }
        out
    }
}

fn combine(rows: &[Vec<f64>], fields: &[TildeField]) -> Vec<TildeField> {
    rows.iter()
        .map(|r| TildeField::combination(r, fields))
        .collect()
}

fn truncate_rows(rows: Vec<[f64; 6]>, dim: usize) -> Vec<Vec<f64>> {
    rows.into_iter().take(dim).map(|r| r[..dim].to_vec()).collect()
}

/// [`transformed_basis_with_theta`] with `θ² = γ`, the value for which the
/// limit basis tends to `M` as D → 0.
pub fn transformed_basis(case: &AlgebraCase) -> Result<Transformed, IsoError> {
    transformed_basis_with_theta(case, case.gamma())
}

/// Limit-adapted and structure bases for D ≠ 0.
///
/// D > 0: `R1 = (P1 − P2)/ε − (2/ε²)P3`, `R2 = ½(P1 + P2 − ½θ²P4)`,
/// `R3 = P3`, `R4 = P4`, `R5 = (P5 − P6)/ε`, `R6 = P6`;
/// `S1 = R1`, `S2 = R2 − (ε/2)R1`, `S3 = (ε²/2)R1 − εR2 + R3 − (εγ/4)R4`,
/// `S4..S6 = R4..R6`.
///
/// D < 0: `V1 = (2/ε)P2 + (2/ε²)P3`, `V2 = P1 − (θ²/4)P4`, `V3 = P3`,
/// `V4 = P4`, `V5 = (2/ε)P6`, `V6 = P5`; `S3 = −(ε/2)²V1 + V3`, the other
/// `S_i = V_i`.
pub fn transformed_basis_with_theta(
    case: &AlgebraCase,
    theta_sq: f64,
) -> Result<Transformed, IsoError> {
    let native = super::basis(case.potential);
    let eps = native.epsilon.ok_or(IsoError::RequiresNonzeroD)?;
    let gamma = native.gamma();
    let dim = native.dim();
    let (limit_family, lim, st) = if native.potential.d > 0.0 {
        let lim = vec![
            [1.0 / eps, -1.0 / eps, -2.0 / (eps * eps), 0.0, 0.0, 0.0],
            [0.5, 0.5, 0.0, -0.25 * theta_sq, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 1.0 / eps, -1.0 / eps],
            [0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        ];
        let st = vec![
            [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [-eps / 2.0, 1.0, 0.0, 0.0, 0.0, 0.0],
            [eps * eps / 2.0, -eps, 1.0, -eps * gamma / 4.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        ];
        (Family::R, lim, st)
    } else {
        let lim = vec![
            [0.0, 2.0 / eps, 2.0 / (eps * eps), 0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, -0.25 * theta_sq, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, 2.0 / eps],
            [0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        ];
        let st = vec![
            [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
            [-(eps / 2.0).powi(2), 0.0, 1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        ];
        (Family::V, lim, st)
    };
    let lim = truncate_rows(lim, dim);
    let st = truncate_rows(st, dim);
    let limit_fields = combine(&lim, &native.basis);
    let structure_fields = combine(&st, &limit_fields);
    let limit = AlgebraCase {
        family: limit_family,
        names: names(limit_family, dim),
        basis: limit_fields,
        ..native.clone()
    };
    let structure = AlgebraCase {
        family: Family::S,
        names: names(Family::S, dim),
        basis: structure_fields,
        ..native.clone()
    };
    Ok(Transformed {
        native,
        limit,
        structure,
        limit_in_native: lim,
        structure_in_limit: st,
    })
}

impl CaseLabel {
    /// Representative potential for the case with the given γ, used by
    /// batteries that sweep all six cases.
    pub fn representative(&self, gamma: f64) -> Potential {
        use CaseLabel::*;
        let (c, d) = match self {
            CNonzeroDPositive => (1.0, 0.5),
            CNonzeroDZero => (1.0, 0.0),
            CNonzeroDNegative => (1.0, -0.5),
            CZeroDPositive => (0.0, 0.5),
            CZeroDZero => (0.0, 0.0),
            CZeroDNegative => (0.0, -0.5),
        };
        Potential { c, d, gamma }
    }

    pub const ALL: [CaseLabel; 6] = [
        CaseLabel::CNonzeroDPositive,
        CaseLabel::CNonzeroDZero,
        CaseLabel::CNonzeroDNegative,
        CaseLabel::CZeroDPositive,
        CaseLabel::CZeroDZero,
        CaseLabel::CZeroDNegative,
    ];
}
