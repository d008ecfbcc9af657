//! Structure constants, the isomorphism onto the free algebra, the
//! sl₂ ⋉ H₃ identification and the 𝒥̃ / 𝒦̃ subalgebras.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{basis, bracket, transformed_basis, AlgebraCase, CaseLabel, IsoError, Potential, TildeField};
use crate::field::{Term, MERGE_TOL};

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= MERGE_TOL * a.abs().max(b.abs())
}

fn same_key(x: &Term, y: &Term) -> bool {
    x.tpow == y.tpow
        && x.qpow == y.qpow
        && std::mem::discriminant(&x.osc) == std::mem::discriminant(&y.osc)
        && close(x.exprate, y.exprate)
        && match (x.osc, y.osc) {
            (crate::field::Osc::Cos(a), crate::field::Osc::Cos(b))
            | (crate::field::Osc::Sin(a), crate::field::Osc::Sin(b)) => close(a, b),
            _ => true,
        }
}

fn slots(f: &TildeField) -> [&crate::field::ScalarField; 3] {
    [&f.a, &f.b, &f.c]
}

/// Coordinates of fields over a basis by exact term matching.
pub(crate) struct Coordinates<'a> {
    basis: &'a [TildeField],
    keys: Vec<(usize, Term)>,
    svd: nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl<'a> Coordinates<'a> {
    pub(crate) fn new(basis: &'a [TildeField]) -> Self {
        let mut keys: Vec<(usize, Term)> = Vec::new();
        for f in basis {
            for (s, field) in slots(f).iter().enumerate() {
                for t in field.terms() {
                    if !keys.iter().any(|(ks, kt)| *ks == s && same_key(kt, t)) {
                        keys.push((s, *t));
                    }
                }
            }
        }
        let mut m = DMatrix::zeros(keys.len().max(1), basis.len());
        for (col, f) in basis.iter().enumerate() {
            for (s, field) in slots(f).iter().enumerate() {
                for t in field.terms() {
                    let row = keys
                        .iter()
                        .position(|(ks, kt)| *ks == s && same_key(kt, t))
                        .expect("key registered above");
                    m[(row, col)] += t.coeff;
                }
            }
        }
        Coordinates {
            basis,
            keys,
            svd: m.svd(true, true),
        }
    }

    /// Coordinates of `target`, or `None` if it is outside the span.
    pub(crate) fn solve(&self, target: &TildeField) -> Option<Vec<f64>> {
        let mut b = DVector::zeros(self.keys.len().max(1));
        for (s, field) in slots(target).iter().enumerate() {
            for t in field.terms() {
                let row = self
                    .keys
                    .iter()
                    .position(|(ks, kt)| *ks == s && same_key(kt, t))?;
                b[row] += t.coeff;
            }
        }
        let x = self.svd.solve(&b, 1e-14).ok()?;
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let coeffs: Vec<f64> = x
            .iter()
            .map(|v| if v.abs() <= 1e-13 * scale { 0.0 } else { *v })
            .collect();
        let rebuilt = TildeField::combination(&coeffs, self.basis);
        if !rebuilt.approx_eq(target) {
            return None;
        }
        // Prefer short decimals when they are within rounding of the solve.
        let tidy: Vec<f64> = coeffs
            .iter()
            .map(|v| {
                let r = (v * 1e10).round() / 1e10;
                if (r - v).abs() <= 1e-12 * v.abs().max(1.0) {
                    r
                } else {
                    *v
                }
            })
            .collect();
        if TildeField::combination(&tidy, self.basis).approx_eq(target) {
            Some(tidy)
        } else {
            Some(coeffs)
        }
    }
}

/// One row of a structure-constant table, `[e_i, e_j] = Σ_k coeffs[k] e_k`
/// with 1-based `i < j`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    pub coeffs: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StructureTable {
    pub names: Vec<String>,
    pub entries: Vec<BracketEntry>,
}

impl StructureTable {
    pub fn dim(&self) -> usize {
        self.names.len()
    }

    /// Coefficients of `[e_i, e_j]` for any ordered pair (1-based).
    pub fn get(&self, i: usize, j: usize) -> Vec<f64> {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => vec![0.0; self.dim()],
            Less => self.lookup(i, j).to_vec(),
            Greater => self.lookup(j, i).iter().map(|v| -v).collect(),
        }
    }

    fn lookup(&self, i: usize, j: usize) -> &[f64] {
        &self
            .entries
            .iter()
            .find(|e| e.i == i && e.j == j)
            .expect("table covers all pairs")
            .coeffs
    }

    /// Renders `[Xi,Xj] = ...` lines, skipping zero brackets unless asked.
    pub fn to_text(&self, show_zero: bool) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let rhs = format_combination(&e.coeffs, &self.names);
            if rhs == "0" && !show_zero {
                continue;
            }
            out.push_str(&format!(
                "[{:>3},{:>3}] = {}\n",
                self.names[e.i - 1],
                self.names[e.j - 1],
                rhs
            ));
        }
        out
    }
}

/// `2·M1 - 0.5·M4` style rendering; `0` for the empty combination.
pub fn format_combination(coeffs: &[f64], names: &[String]) -> String {
    let mut parts: Vec<String> = Vec::new();
    for (c, n) in coeffs.iter().zip(names) {
        if *c == 0.0 {
            continue;
        }
        let mag = c.abs();
        let body = if (mag - 1.0).abs() < 1e-12 {
            n.clone()
        } else {
            format!("{}·{}", fmt_num(mag), n)
        };
        let sign = if *c < 0.0 { "-" } else { "+" };
        if parts.is_empty() {
            parts.push(if *c < 0.0 { format!("-{body}") } else { body });
        } else {
            parts.push(format!("{sign} {body}"));
        }
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" ")
    }
}

fn fmt_num(v: f64) -> String {
    let r = (v * 1e10).round() / 1e10;
    format!("{r}")
}

/// Expresses every bracket `[e_i, e_j]`, `i < j`, in the basis.
pub fn structure_constants(case: &AlgebraCase) -> Result<StructureTable, IsoError> {
    let coords = Coordinates::new(&case.basis);
    let n = case.dim();
    let mut entries = Vec::with_capacity(n * (n - 1) / 2);
    for i in 1..=n {
        for j in (i + 1)..=n {
            let br = bracket(case.gen(i), case.gen(j));
            let coeffs = coords.solve(&br).ok_or_else(|| {
                IsoError::NotClosed(case.name(i).to_string(), case.name(j).to_string())
            })?;
            entries.push(BracketEntry { i, j, coeffs });
        }
    }
    Ok(StructureTable {
        names: case.names.clone(),
        entries,
    })
}

/// A linear map between two bases given by its matrix: row `i` holds the
/// coordinates of the image of `from_i` over `to`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Isomorphism {
    pub from: AlgebraCase,
    pub to: AlgebraCase,
    pub matrix: Vec<Vec<f64>>,
}

impl Isomorphism {
    pub fn image(&self, i: usize) -> TildeField {
        TildeField::combination(&self.matrix[i - 1], &self.to.basis)
    }

    /// Image of a field given by coordinates over `from`.
    pub fn map_coords(&self, coords: &[f64]) -> TildeField {
        let n = self.to.dim();
        let mut out = vec![0.0; n];
        for (c, row) in coords.iter().zip(&self.matrix) {
            for (o, r) in out.iter_mut().zip(row) {
                *o += c * r;
            }
        }
        TildeField::combination(&out, &self.to.basis)
    }

    /// Checks `φ([x_i, x_j]) = [φx_i, φx_j]` for every basis pair and that
    /// the matrix is invertible.
    pub fn verify(&self) -> Result<(), IsoError> {
        let n = self.from.dim();
        let m = DMatrix::from_fn(n, n, |i, j| self.matrix[i][j]);
        if m.determinant().abs() < 1e-12 {
            return Err(IsoError::StructureMismatch("matrix is singular".into()));
        }
        let table = structure_constants(&self.from)?;
        let images: Vec<TildeField> = (1..=n).map(|i| self.image(i)).collect();
        for i in 1..=n {
            for j in (i + 1)..=n {
                let lhs = self.map_coords(&table.get(i, j));
                let rhs = bracket(&images[i - 1], &images[j - 1]);
                if !lhs.approx_eq(&rhs) {
                    return Err(IsoError::StructureMismatch(format!(
                        "phi([{},{}]) != [phi {}, phi {}]",
                        self.from.name(i),
                        self.from.name(j),
                        self.from.name(i),
                        self.from.name(j)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The map `S_i ↦ M_i` onto the D = 0 algebra with the same C and γ
/// (the identity on `M` when D = 0).
pub fn isomorphism_to_m(case: &AlgebraCase) -> Result<Isomorphism, IsoError> {
    let p = case.potential;
    let target = basis(Potential { d: 0.0, ..p });
    let from = if p.d == 0.0 {
        basis(p)
    } else {
        transformed_basis(case)?.structure
    };
    let n = from.dim();
    let matrix = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    Ok(Isomorphism {
        from,
        to: target,
        matrix,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StructureKind {
    /// sl₂(ℝ) ⋉ H₃ (C = 0).
    Sl2SemidirectHeisenberg,
    /// sl₂(ℝ) ⊕ ℝ (C ≠ 0).
    Sl2DirectCenter,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StructureReport {
    pub label: CaseLabel,
    pub kind: StructureKind,
    pub dim: usize,
    /// Basis family used for `e, f, h` (M for D = 0, S otherwise).
    pub working_family: String,
    pub e: TildeField,
    pub f: TildeField,
    pub h: TildeField,
    pub verified: Vec<String>,
}

/// Verifies the sl₂ triple `e = −½W3`, `f = 2W1`, `h = 2W2 + (γ/2)W4` in
/// the working basis `W` (M or S), the Heisenberg ideal `⟨W4, W5, W6⟩` with
/// center `⟨W4⟩` when C = 0, and the direct sum with `⟨W4⟩` when C ≠ 0.
pub fn structure_identification(case: &AlgebraCase) -> Result<StructureReport, IsoError> {
    let p = case.potential;
    let work = if p.d == 0.0 {
        basis(p)
    } else {
        transformed_basis(case)?.structure
    };
    let gamma = p.gamma;
    let w = |i: usize| work.gen(i).clone();
    let e = w(3).scale(-0.5);
    let f = w(1).scale(2.0);
    let h = w(2).scale(2.0).add(&w(4).scale(gamma / 2.0));
    let mut verified = Vec::new();
    let mut expect = |name: &str, lhs: TildeField, rhs: TildeField| -> Result<(), IsoError> {
        if lhs.approx_eq(&rhs) {
            verified.push(name.to_string());
            Ok(())
        } else {
            Err(IsoError::StructureMismatch(name.to_string()))
        }
    };
    expect("[h,e] = 2e", bracket(&h, &e), e.scale(2.0))?;
    expect("[h,f] = -2f", bracket(&h, &f), f.scale(-2.0))?;
    expect("[e,f] = h", bracket(&e, &f), h.clone())?;
    let triple = [("e", &e), ("f", &f), ("h", &h)];
    let kind = if work.dim() == 6 {
        let pre = work.family.prefix();
        expect(
            &format!("[{pre}5,{pre}6] = -{pre}4"),
            bracket(&w(5), &w(6)),
            w(4).scale(-1.0),
        )?;
        for k in 1..=6 {
            expect(
                &format!("[{pre}4,{pre}{k}] = 0"),
                bracket(&w(4), &w(k)),
                TildeField::zero(),
            )?;
        }
        let coords = Coordinates::new(&work.basis);
        for (xn, x) in triple {
            for k in 4..=6 {
                let br = bracket(x, &w(k));
                let name = format!("[{xn},{pre}{k}] in <{pre}4,{pre}5,{pre}6>");
                let c = coords
                    .solve(&br)
                    .ok_or_else(|| IsoError::StructureMismatch(name.clone()))?;
                if c[..3].iter().any(|v| *v != 0.0) {
                    return Err(IsoError::StructureMismatch(name));
                }
                verified.push(name);
            }
        }
        StructureKind::Sl2SemidirectHeisenberg
    } else {
        let pre = work.family.prefix();
        for (xn, x) in triple {
            expect(
                &format!("[{xn},{pre}4] = 0"),
                bracket(x, &w(4)),
                TildeField::zero(),
            )?;
        }
        let coords = Coordinates::new(&work.basis);
        let mut rows = Vec::new();
        for x in [&e, &f, &h, &w(4)] {
            rows.push(coords.solve(x).ok_or_else(|| {
                IsoError::StructureMismatch("sl2 triple outside the algebra".into())
            })?);
        }
        let m = DMatrix::from_fn(4, 4, |i, j| rows[i][j]);
        if m.rank(1e-10) != 4 {
            return Err(IsoError::StructureMismatch(
                "e, f, h and the center do not span the algebra".into(),
            ));
        }
        verified.push(format!("span(e,f,h,{pre}4) = algebra"));
        StructureKind::Sl2DirectCenter
    };
    Ok(StructureReport {
        label: case.label,
        kind,
        dim: work.dim(),
        working_family: work.family.prefix().to_string(),
        e,
        f,
        h,
        verified,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubalgebraReport {
    pub label: CaseLabel,
    pub j: Vec<String>,
    pub k: Vec<String>,
    pub intersection: Vec<String>,
    pub j_closed: bool,
    pub k_closed: bool,
    /// 𝒥̃ coincides with the basis elements whose multiplier is constant.
    pub j_matches_constant_multiplier: bool,
}

fn closed_under_bracket(case: &AlgebraCase, members: &[usize]) -> bool {
    let coords = Coordinates::new(&case.basis);
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            let br = bracket(case.gen(i), case.gen(j));
            match coords.solve(&br) {
                Some(c) => {
                    let outside = c
                        .iter()
                        .enumerate()
                        .any(|(k, v)| *v != 0.0 && !members.contains(&(k + 1)));
                    if outside {
                        return false;
                    }
                }
                None => return false,
            }
        }
    }
    true
}

/// The 𝒥̃ and 𝒦̃ generator sets of the native basis, with closure checks.
pub fn subalgebra_tables(case: &AlgebraCase) -> SubalgebraReport {
    let native = basis(case.potential);
    let (j, k): (Vec<usize>, Vec<usize>) = match case.label {
        CaseLabel::CZeroDZero => (vec![2, 3, 4, 6], vec![1, 2, 3, 4]),
        CaseLabel::CNonzeroDZero => (vec![2, 3, 4], vec![1, 2, 3, 4]),
        _ => (vec![3, 4], vec![1, 2, 3, 4]),
    };
    let constant_mult: Vec<usize> = (1..=native.dim())
        .filter(|&i| native.gen(i).c.constant_value().is_some())
        .collect();
    let names = |v: &[usize]| v.iter().map(|i| native.name(*i).to_string()).collect();
    let inter: Vec<usize> = j.iter().copied().filter(|i| k.contains(i)).collect();
    SubalgebraReport {
        label: case.label,
        j_closed: closed_under_bracket(&native, &j),
        k_closed: closed_under_bracket(&native, &k),
        j_matches_constant_multiplier: constant_mult == j,
        j: names(&j),
        k: names(&k),
        intersection: names(&inter),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pot(c: f64, d: f64, g: f64) -> Potential {
        Potential::new(c, d, g).unwrap()
    }

    #[test]
    fn free_table_examples() {
        let case = basis(pot(0.0, 0.0, 1.3));
        let t = structure_constants(&case).unwrap();
        assert_eq!(t.get(5, 6), vec![0.0, 0.0, 0.0, -1.0, 0.0, 0.0]);
        assert_eq!(t.get(3, 5), vec![0.0, 0.0, 0.0, 0.0, 0.0, -1.0]);
        assert_eq!(t.get(6, 5), vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        for i in 1..=6 {
            assert!(bracket(case.gen(i), case.gen(i)).is_zero());
        }
    }

    #[test]
    fn not_closed_is_reported() {
        let mut case = basis(pot(0.0, 0.0, 1.0));
        case.basis.truncate(2);
        case.names.truncate(2);
        case.basis[1] = TildeField {
            c: crate::field::ScalarField::q(),
            ..TildeField::zero()
        };
        assert!(matches!(structure_constants(&case), Err(IsoError::NotClosed(_, _))));
    }

    #[test]
    fn format_combination_renders_signs() {
        let names: Vec<String> = ["M1", "M2", "M3", "M4"].iter().map(|s| s.to_string()).collect();
        assert_eq!(format_combination(&[0.0, 2.0, 0.0, 0.65], &names), "2·M2 + 0.65·M4");
        assert_eq!(format_combination(&[-1.0, 0.0, 0.0, 0.0], &names), "-M1");
        assert_eq!(format_combination(&[0.0; 4], &names), "0");
    }

    #[test]
    fn identification_kinds() {
        let r = structure_identification(&basis(pot(0.0, 0.0, 1.0))).unwrap();
        assert_eq!(r.kind, StructureKind::Sl2SemidirectHeisenberg);
        let r = structure_identification(&basis(pot(1.0, 0.5, 1.0))).unwrap();
        assert_eq!(r.kind, StructureKind::Sl2DirectCenter);
        assert_eq!(r.dim, 4);
    }

    #[test]
    fn subalgebras() {
        let r = subalgebra_tables(&basis(pot(0.0, 0.0, 1.0)));
        assert_eq!(r.j, vec!["M2", "M3", "M4", "M6"]);
        assert!(r.j_closed && r.k_closed && r.j_matches_constant_multiplier);
        let r = subalgebra_tables(&basis(pot(2.0, -0.4, 1.0)));
        assert_eq!(r.j, vec!["P3", "P4"]);
        assert_eq!(r.k, vec!["P1", "P2", "P3", "P4"]);
        assert!(r.j_closed && r.k_closed && r.j_matches_constant_multiplier);
    }
}
