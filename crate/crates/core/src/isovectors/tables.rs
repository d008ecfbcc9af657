//! Reference bracket tables for the `M` (D = 0), `R` (D > 0) and `V`
//! (D < 0) bases, and their comparison against computed brackets.
//!
//! Only nonzero brackets are listed; every other pair of the six
//! generators commutes.

use serde::{Deserialize, Serialize};

use super::{bracket, AlgebraCase, Family, TildeField};

/// `[e_i, e_j] = Σ (k, coeff)` for 1-based `i < j`.
pub type TableEntry = (usize, usize, Vec<(usize, f64)>);

pub fn m_table(gamma: f64) -> Vec<TableEntry> {
    vec![
        (1, 2, vec![(1, 1.0)]),
        (1, 3, vec![(2, 2.0), (4, gamma / 2.0)]),
        (1, 6, vec![(5, 1.0)]),
        (2, 3, vec![(3, 1.0)]),
        (2, 5, vec![(5, -0.5)]),
        (2, 6, vec![(6, 0.5)]),
        (3, 5, vec![(6, -1.0)]),
        (5, 6, vec![(4, -1.0)]),
    ]
}

pub fn r_table(eps: f64, gamma: f64) -> Vec<TableEntry> {
    vec![
        (1, 2, vec![(1, 1.0)]),
        (1, 3, vec![(2, 2.0), (4, gamma / 2.0)]),
        (1, 6, vec![(5, 1.0)]),
        (2, 3, vec![(1, 0.5 * eps * eps), (3, 1.0)]),
        (2, 5, vec![(5, -0.5)]),
        (2, 6, vec![(5, eps / 2.0), (6, 0.5)]),
        (3, 5, vec![(5, -eps / 2.0), (6, -1.0)]),
        (3, 6, vec![(6, eps / 2.0)]),
        (5, 6, vec![(4, -1.0)]),
    ]
}

pub fn v_table(eps: f64, gamma: f64) -> Vec<TableEntry> {
    vec![
        (1, 2, vec![(1, 1.0)]),
        (1, 3, vec![(2, 2.0), (4, gamma / 2.0)]),
        (1, 6, vec![(5, 1.0)]),
        (2, 3, vec![(1, -0.5 * eps * eps), (3, 1.0)]),
        (2, 5, vec![(5, -0.5)]),
        (2, 6, vec![(6, 0.5)]),
        (3, 5, vec![(6, -1.0)]),
        (3, 6, vec![(5, (eps / 2.0).powi(2))]),
        (5, 6, vec![(4, -1.0)]),
    ]
}

/// Reference table for a case in the `M`, `R` or `V` family.
pub fn reference_table(case: &AlgebraCase) -> Option<Vec<TableEntry>> {
    let gamma = case.gamma();
    match case.family {
        Family::M => Some(m_table(gamma)),
        Family::R => Some(r_table(case.epsilon?, gamma)),
        Family::V => Some(v_table(case.epsilon?, gamma)),
        _ => None,
    }
}

/// Outcome of comparing one basis pair against the reference.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairCheck {
    pub i: usize,
    pub j: usize,
    pub expected: Vec<f64>,
    pub matches: bool,
}

/// Compares every pair `i < j` of the case against the reference table by
/// equality of normal forms: `[e_i, e_j]` versus `Σ coeff·e_k`. Entries
/// involving generators beyond the case dimension are skipped.
pub fn compare_with_reference(case: &AlgebraCase) -> Option<Vec<PairCheck>> {
    let table = reference_table(case)?;
    let n = case.dim();
    let mut out = Vec::new();
    for i in 1..=n {
        for j in (i + 1)..=n {
            let mut expected = vec![0.0; n];
            let mut in_range = true;
            if let Some((_, _, rhs)) = table.iter().find(|(a, b, _)| *a == i && *b == j) {
                for (k, c) in rhs {
                    if *k > n {
                        in_range = false;
                    } else {
                        expected[*k - 1] = *c;
                    }
                }
            }
            let lhs = bracket(case.gen(i), case.gen(j));
            let rhs = TildeField::combination(&expected, &case.basis);
            out.push(PairCheck {
                i,
                j,
                matches: in_range && lhs.approx_eq(&rhs),
                expected,
            });
        }
    }
    Some(out)
}
