//! Numerical and algebraic checks: D → 0 limits, determining equations and
//! a finite-difference commutator used to cross-examine table mismatches.

use serde::{Deserialize, Serialize};

use super::{basis, transformed_basis, IsoError, Potential, TildeField};
use crate::field::ScalarField;
use crate::jet::Jet;

/// Deviation of the limit-adapted basis from `M` at one value of D.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LimitRow {
    pub d: f64,
    pub epsilon: f64,
    /// Per generator, max over the grid of `|coeff_R − coeff_M|` for the
    /// `∂_t`, `∂_q` and multiplier slots.
    pub deviations: Vec<[f64; 3]>,
}

impl LimitRow {
    pub fn max_deviation(&self) -> f64 {
        self.deviations
            .iter()
            .flat_map(|d| d.iter().copied())
            .fold(0.0, f64::max)
    }

    pub fn generator_deviation(&self, i: usize) -> f64 {
        self.deviations[i - 1].iter().copied().fold(0.0, f64::max)
    }
}

/// Compares `R_i` (D > 0) or `V_i` (D < 0) with `M_i` on a grid for each D
/// of the sequence.
pub fn limit_check(
    d_sequence: &[f64],
    c: f64,
    gamma: f64,
    grid: &[(f64, f64)],
) -> Result<Vec<LimitRow>, IsoError> {
    let positive = d_sequence.iter().all(|d| *d > 0.0);
    let negative = d_sequence.iter().all(|d| *d < 0.0);
    if !(positive || negative) {
        return Err(IsoError::MixedSigns);
    }
    let m = basis(Potential::new(c, 0.0, gamma)?);
    d_sequence
        .iter()
        .map(|&d| {
            let case = basis(Potential::new(c, d, gamma)?);
            let tr = transformed_basis(&case)?;
            let deviations = tr
                .limit
                .basis
                .iter()
                .zip(&m.basis)
                .map(|(r, mi)| {
                    let mut dev = [0.0f64; 3];
                    for &(t, q) in grid {
                        let a = r.eval(t, q);
                        let b = mi.eval(t, q);
                        for s in 0..3 {
                            dev[s] = dev[s].max((a[s] - b[s]).abs());
                        }
                    }
                    dev
                })
                .collect();
            Ok(LimitRow {
                d,
                epsilon: case.epsilon.expect("D is nonzero"),
                deviations,
            })
        })
        .collect()
}

/// Residuals of the determining system
/// `2Cl = 0`, `l'' − 2Dl = 0`, `σ' − (γ/4)T_N'' = 0`, `T_N''' − 8D T_N' = 0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeterminingResiduals {
    pub r1: ScalarField,
    pub r2: ScalarField,
    pub r3: ScalarField,
    pub r4: ScalarField,
}

impl DeterminingResiduals {
    pub fn all_zero(&self) -> bool {
        self.r1.is_zero() && self.r2.is_zero() && self.r3.is_zero() && self.r4.is_zero()
    }
}

pub fn determining_check(
    t_n: &ScalarField,
    l: &ScalarField,
    sigma: &ScalarField,
    p: Potential,
) -> Result<DeterminingResiduals, IsoError> {
    if !(t_n.is_t_only() && l.is_t_only() && sigma.is_t_only()) {
        return Err(IsoError::NotTimeOnly);
    }
    let tn1 = t_n.d_dt();
    let tn2 = tn1.d_dt();
    Ok(DeterminingResiduals {
        r1: l.scale(2.0 * p.c),
        r2: l.d_dt().d_dt() - l.scale(2.0 * p.d),
        r3: sigma.d_dt() - tn2.scale(p.gamma / 4.0),
        r4: tn2.d_dt() - tn1.scale(8.0 * p.d),
    })
}

fn test_function(t: f64, q: f64) -> Jet {
    let tj = Jet::var_t(t, 1);
    let qj = Jet::var_q(q, 1);
    (tj * 0.3 - qj * 0.2).exp() + (qj * 0.7 + tj * 0.4).sin() * (qj * qj + 1.0)
}

fn apply_numeric(x: &TildeField, g: &dyn Fn(f64, f64) -> Jet, t: f64, q: f64) -> f64 {
    let j = g(t, q);
    let [a, b, c] = x.eval(t, q);
    a * j.dt() + b * j.dq() + c * j.value()
}

fn richardson(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

/// Max relative deviation over the grid between `X(Y g) − Y(X g)`, with the
/// outer derivatives taken by finite differences, and `expected(g)`, for a
/// fixed smooth test function `g`.
pub fn commutator_fd_deviation(
    x: &TildeField,
    y: &TildeField,
    expected: &TildeField,
    grid: &[(f64, f64)],
) -> f64 {
    let h = 1e-3;
    let outer = |p: &TildeField, inner: &TildeField, t: f64, q: f64| {
        let f = |tt: f64, qq: f64| apply_numeric(inner, &test_function, tt, qq);
        let ft = richardson(&|s| f(s, q), t, h);
        let fq = richardson(&|s| f(t, s), q, h);
        let [a, b, c] = p.eval(t, q);
        a * ft + b * fq + c * f(t, q)
    };
    let mut worst = 0.0f64;
    for &(t, q) in grid {
        let xy = outer(x, y, t, q);
        let yx = outer(y, x, t, q);
        let e = apply_numeric(expected, &test_function, t, q);
        let scale = 1.0 + xy.abs().max(yx.abs());
        worst = worst.max(((xy - yx) - e).abs() / scale);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Term;
    use crate::isovectors::bracket;

    #[test]
    fn determining_examples() {
        let p = Potential::new(1.0, 0.5, 1.3).unwrap();
        let eps = 2.0;
        let tn = ScalarField::exp(eps) * (1.0 / eps);
        let sigma = ScalarField::exp(eps) * (p.gamma / 4.0);
        assert!(determining_check(&tn, &ScalarField::zero(), &sigma, p)
            .unwrap()
            .all_zero());
        let one = ScalarField::constant(1.0);
        assert!(determining_check(&one, &ScalarField::zero(), &ScalarField::zero(), p)
            .unwrap()
            .all_zero());
        let p1 = Potential::new(1.0, 0.0, 1.0).unwrap();
        let r = determining_check(&ScalarField::zero(), &one, &ScalarField::zero(), p1).unwrap();
        assert_eq!(r.r1.constant_value(), Some(2.0));
        assert!(determining_check(&ScalarField::q(), &one, &one, p1).is_err());
    }

    #[test]
    fn limit_rejects_mixed_signs() {
        assert_eq!(
            limit_check(&[0.1, -0.1], 0.0, 1.0, &[(0.0, 0.0)]).err(),
            Some(IsoError::MixedSigns)
        );
    }

    #[test]
    fn fd_commutator_agrees_with_bracket() {
        let case = basis(Potential::new(0.0, 0.3, 1.2).unwrap());
        let grid = [(0.1, 0.4), (-0.5, 1.0), (0.7, -0.8)];
        let br = bracket(case.gen(1), case.gen(5));
        assert!(commutator_fd_deviation(case.gen(1), case.gen(5), &br, &grid) < 1e-6);
        let wrong = br.add(&TildeField {
            c: ScalarField::term(Term::constant(0.5).q(1)),
            ..TildeField::zero()
        });
        assert!(commutator_fd_deviation(case.gen(1), case.gen(5), &wrong, &grid) > 1e-3);
    }
}
