//! Closed forms of `Ω_η` on pairs of limit-basis generators, written in the
//! section variables `Ẽ = −γη_t/η` and `B̃ = −γη_q/η`.
//!
//! [`corrected`] holds forms derived from the bracket tables and agrees with
//! `γ[X,Y](η)/η` for every γ. [`printed`] is a literal transcription of an
//! older table whose section slots carry `Ẽ/γ` and `B̃/γ`; several of its
//! entries drop factors and disagree with the bracket (see
//! `printed_discrepancies`).

use serde::{Deserialize, Serialize};

use crate::isovectors::Family;

/// Values needed to evaluate a closed form at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaPoint {
    pub t: f64,
    pub q: f64,
    pub eta: f64,
    pub e_tilde: f64,
    pub b_tilde: f64,
    pub gamma: f64,
    /// ε of the R / V families; ignored for M.
    pub epsilon: f64,
}

fn ordered(i: usize, j: usize) -> Option<(usize, usize, f64)> {
    if !(1..=6).contains(&i) || !(1..=6).contains(&j) {
        return None;
    }
    Some(if i <= j { (i, j, 1.0) } else { (j, i, -1.0) })
}

/// Corrected closed form of `Ω_η(X_i, X_j)` (1-based); `None` for families
/// without a table or indices out of range.
pub fn corrected(family: Family, i: usize, j: usize, p: &OmegaPoint) -> Option<f64> {
    let (i, j, sign) = ordered(i, j)?;
    let OmegaPoint {
        t,
        q,
        e_tilde: e,
        b_tilde: b,
        gamma: g,
        epsilon: eps,
        ..
    } = *p;
    let v = match family {
        Family::M => match (i, j) {
            (1, 2) => t * t * e + t * q * b - 0.5 * (g * t - q * q),
            (1, 3) => 2.0 * t * e + q * b - 0.5 * g,
            (1, 6) => t * b + q,
            (2, 3) => e,
            (2, 5) => -0.5 * (t * b + q),
            (2, 6) => 0.5 * b,
            (3, 5) => -b,
            (5, 6) => 1.0,
            _ => 0.0,
        },
        Family::R => {
            let (cp, cm) = ((eps * t).exp(), (-eps * t).exp());
            let (hp, hm) = ((0.5 * eps * t).exp(), (-0.5 * eps * t).exp());
            match (i, j) {
                (1, 2) => {
                    (cp + cm - 2.0) / (eps * eps) * e + q * (cp - cm) / (2.0 * eps) * b
                        + q * q * (cp + cm) / 4.0
                        - g * (cp - cm) / (4.0 * eps)
                }
                (1, 3) => {
                    (cp - cm) / eps * e + 0.5 * q * (cp + cm) * b + eps * q * q * (cp - cm) / 4.0
                        - g * (cp + cm) / 4.0
                }
                (1, 6) => (hp - hm) / eps * b + 0.5 * q * (hp + hm),
                (2, 3) => {
                    0.5 * (cp + cm) * e + q * eps * (cp - cm) / 4.0 * b
                        + eps * eps * q * q * (cp + cm) / 8.0
                        - g * eps * (cp - cm) / 8.0
                }
                (2, 5) => -(hp - hm) / (2.0 * eps) * b - q * (hp + hm) / 4.0,
                (2, 6) => 0.5 * hp * b + q * eps * hp / 4.0,
                (3, 5) => -0.5 * (hp + hm) * b - q * eps * (hp - hm) / 4.0,
                (3, 6) => 0.5 * eps * hm * b - q * eps * eps * hm / 4.0,
                (5, 6) => 1.0,
                _ => 0.0,
            }
        }
        Family::V => {
            let (c, s) = ((eps * t).cos(), (eps * t).sin());
            let (c2, s2) = ((0.5 * eps * t).cos(), (0.5 * eps * t).sin());
            match (i, j) {
                (1, 2) => {
                    2.0 / (eps * eps) * (1.0 - c) * e + q * s / eps * b + 0.5 * q * q * c
                        - g * s / (2.0 * eps)
                }
                (1, 3) => 2.0 * s / eps * e + q * c * b - 0.5 * q * q * eps * s - 0.5 * g * c,
                (1, 6) => 2.0 / eps * s2 * b + q * c2,
                (2, 3) => c * e - 0.5 * q * eps * s * b - 0.25 * eps * eps * q * q * c + 0.25 * g * eps * s,
                (2, 5) => -s2 / eps * b - 0.5 * q * c2,
                (2, 6) => 0.5 * c2 * b - 0.25 * q * eps * s2,
                (3, 5) => -c2 * b + 0.5 * q * eps * s2,
                (3, 6) => 0.5 * eps * s2 * b + 0.25 * q * eps * eps * c2,
                (5, 6) => 1.0,
                _ => 0.0,
            }
        }
        _ => return None,
    };
    Some(sign * v)
}

/// Literal transcription of the older closed-form table.
pub fn printed(family: Family, i: usize, j: usize, p: &OmegaPoint) -> Option<f64> {
    let (i, j, sign) = ordered(i, j)?;
    let OmegaPoint {
        t,
        q,
        eta,
        gamma: g,
        epsilon: eps,
        ..
    } = *p;
    // The table's own section variables.
    let e = p.e_tilde / g;
    let b = p.b_tilde / g;
    let v = match family {
        Family::M => match (i, j) {
            (1, 2) => g * t * t * e + g * b - 0.5 * (t * g - q * q),
            (1, 3) => g * q * b + g * eta * t * e - 0.5 * g,
            (1, 6) => g * t * b + q,
            (2, 3) => g * e,
            (2, 5) => -0.5 * g * t * b - 0.5 * q,
            (2, 6) => 0.5 * g * b,
            (3, 5) => -g * b,
            (5, 6) => 1.0,
            _ => 0.0,
        },
        Family::R => {
            let (cp, cm) = ((eps * t).exp(), (-eps * t).exp());
            let (hp, hm) = ((0.5 * eps * t).exp(), (-0.5 * eps * t).exp());
            match (i, j) {
                (1, 2) => {
                    g / (eps * eps) * (cp + cm - 2.0) * e - g / (2.0 * eps) * q * (cm - cp) * b
                        + q * q / 4.0 * (cp + cm)
                        - (cm - cp) / (4.0 * eps)
                }
                (1, 3) => {
                    -g * (cm - cp) / eps * e + g * (cp + cm) / eta * q * b
                        + q * q / 4.0 * eps * (cp - cm)
                        - g / 4.0 * (cp + cm)
                }
                (1, 6) => -g / eps * (hm - hp) * b + q / 2.0 * (hm + hp),
                (2, 3) => {
                    g / 2.0 * (cp + cm) * e + g / 4.0 * q * eps * (cp - cm) * b
                        + q * q / 8.0 * eps * eps * (cp + cm)
                        - g / 8.0 * eps * (cp - cm)
                }
                (2, 5) => -g / (2.0 * eps) * (hp - hm) * b - 0.25 * (hp + hm),
                (2, 6) => g / 2.0 * hp * b + 0.5 * q * eps / 2.0 * hp,
                (3, 5) => -g * (hp + hm) * b - 0.5 * q * eps / 2.0 * (hp - hm),
                (3, 6) => g * eps / 2.0 * hm * b - q * (eps / 2.0).powi(2) * hm,
                (5, 6) => 1.0,
                _ => 0.0,
            }
        }
        Family::V => {
            let (c, s) = ((eps * t).cos(), (eps * t).sin());
            let (c2, s2) = ((0.5 * eps * t).cos(), (0.5 * eps * t).sin());
            match (i, j) {
                (1, 2) => {
                    (2.0 * g / (eps * eps) - 2.0 * g / (eps * eps) * c) * e + q * g / eps * s * b
                        + c * q * q / 2.0
                        - g * s / (2.0 * eps)
                }
                (1, 3) => {
                    2.0 * g / eps * s * e + g * q * c * b - q * q * s / (2.0 * eps) - g / 2.0 * c
                }
                (1, 6) => 2.0 * g / eps * s2 * b + q * c2,
                (2, 3) => {
                    g * c * e - q * g / 2.0 * eps * s * b - 0.25 * q * q * eps * eps * c
                        + 0.25 * eps * s
                }
                (2, 5) => -g / eps * s2 * b - 0.5 * q * c2,
                (2, 6) => g / 2.0 * c2 * b - eps / 4.0 * q * s2,
                (3, 5) => -g * c2 * b + eps / 2.0 * q * s2,
                (3, 6) => g * eps / 2.0 * s2 * b + q * eps / 2.0 * c2,
                (5, 6) => 1.0,
                _ => 0.0,
            }
        }
        _ => return None,
    };
    Some(sign * v)
}

/// Pairs `(i, j)`, `i < j`, where the printed and corrected forms differ by
/// more than `tol` (relative) at any of the given points.
pub fn printed_discrepancies(family: Family, points: &[OmegaPoint], tol: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 1..=6 {
        for j in (i + 1)..=6 {
            let differs = points.iter().any(|p| {
                let a = corrected(family, i, j, p).unwrap_or(f64::NAN);
                let b = printed(family, i, j, p).unwrap_or(f64::NAN);
                (a - b).abs() > tol * a.abs().max(b.abs()).max(1.0)
            });
            if differs {
                out.push((i, j));
            }
        }
    }
    out
}
