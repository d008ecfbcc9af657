use hjb_iso::isovectors::tables::compare_with_reference;
use hjb_iso::isovectors::{
    basis, bracket, isomorphism_to_m, limit_check, structure_constants, structure_identification,
    subalgebra_tables, transformed_basis, CaseLabel, Potential, TildeField,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn pot(c: f64, d: f64, g: f64) -> Potential {
    Potential::new(c, d, g).unwrap()
}

fn grid() -> Vec<(f64, f64)> {
    let mut g = Vec::new();
    for i in 0..=8 {
        for j in 0..=8 {
            g.push((-2.0 + 0.5 * i as f64, -2.0 + 0.5 * j as f64));
        }
    }
    g
}

#[test]
fn reference_tables_match_in_all_d_signs() {
    for gamma in [1.0, 1.3] {
        let m = basis(pot(0.0, 0.0, gamma));
        let r = transformed_basis(&basis(pot(0.0, 0.3, gamma))).unwrap().limit;
        let v = transformed_basis(&basis(pot(0.0, -0.3, gamma))).unwrap().limit;
        for case in [m, r, v] {
            let checks = compare_with_reference(&case).unwrap();
            assert_eq!(checks.len(), 15);
            for c in checks {
                assert!(c.matches, "{:?} [{},{}]", case.family, c.i, c.j);
            }
        }
    }
}

#[test]
fn r2_r3_and_v5_v6_entries() {
    let case = basis(pot(0.0, 0.5, 1.0));
    let r = transformed_basis(&case).unwrap().limit;
    let eps = r.epsilon.unwrap();
    let expect = r.gen(1).scale(0.5 * eps * eps).add(r.gen(3));
    assert!(bracket(r.gen(2), r.gen(3)).approx_eq(&expect));
    let v = transformed_basis(&basis(pot(0.0, -0.5, 1.0))).unwrap().limit;
    assert!(bracket(v.gen(5), v.gen(6)).approx_eq(&v.gen(4).scale(-1.0)));
}

#[test]
fn jacobi_and_closure_in_all_cases() {
    for label in CaseLabel::ALL {
        let case = basis(label.representative(1.3));
        structure_constants(&case).unwrap();
        let n = case.dim();
        for i in 1..=n {
            for j in 1..=n {
                for k in 1..=n {
                    let (x, y, z) = (case.gen(i), case.gen(j), case.gen(k));
                    let jac = bracket(&bracket(x, y), z)
                        .add(&bracket(&bracket(y, z), x))
                        .add(&bracket(&bracket(z, x), y));
                    assert!(jac.is_zero(), "{label} ({i},{j},{k})");
                }
            }
        }
    }
}

#[test]
fn isomorphisms_intertwine_brackets() {
    for label in CaseLabel::ALL {
        for gamma in [1.0, 0.7] {
            let case = basis(label.representative(gamma));
            let iso = isomorphism_to_m(&case).unwrap();
            iso.verify().unwrap_or_else(|e| panic!("{label}: {e}"));
        }
    }
}

#[test]
fn printed_d_positive_s3_fails_to_intertwine() {
    // The alternative S3 = ε²R1 − εR2 + R3 − (ε/2)R4 does not reproduce [M2, M3] = M3.
    let case = basis(pot(0.0, 0.5, 1.0));
    let tr = transformed_basis(&case).unwrap();
    let r = &tr.limit;
    let eps = r.epsilon.unwrap();
    let s2 = r.gen(2).sub(&r.gen(1).scale(eps / 2.0));
    let s3 = TildeField::combination(&[eps * eps, -eps, 1.0, -eps / 2.0, 0.0, 0.0], &r.basis);
    assert!(!bracket(&s2, &s3).approx_eq(&s3));
    assert!(bracket(tr.structure.gen(2), tr.structure.gen(3)).approx_eq(tr.structure.gen(3)));
}

#[test]
fn basis_change_round_trip() {
    for d in [0.4, -0.4] {
        let case = basis(pot(0.0, d, 1.2));
        let tr = transformed_basis(&case).unwrap();
        let a = tr.structure_in_native();
        let n = a.len();
        let m = DMatrix::from_fn(n, n, |i, j| a[i][j]);
        let inv = m.try_inverse().unwrap();
        for i in 0..n {
            // Entries that are exactly zero come back as rounding noise.
            let big = inv.amax();
            let row: Vec<f64> = (0..n)
                .map(|k| inv[(i, k)])
                .map(|v| if v.abs() < 1e-13 * big { 0.0 } else { v })
                .collect();
            let back = TildeField::combination(&row, &tr.structure.basis);
            assert!(back.approx_eq(&case.basis[i]), "D={d} P{}", i + 1);
        }
    }
}

#[test]
fn structure_theorem_all_cases() {
    for label in CaseLabel::ALL {
        let r = structure_identification(&basis(label.representative(0.9))).unwrap();
        assert_eq!(r.dim, label.dim());
    }
}

#[test]
fn subalgebra_intersection_depends_only_on_d() {
    for d in [0.5, 0.0, -0.5] {
        let a = subalgebra_tables(&basis(pot(0.0, d, 1.0)));
        let b = subalgebra_tables(&basis(pot(2.0, d, 1.0)));
        assert_eq!(a.intersection, b.intersection);
        assert!(a.j_closed && a.k_closed && b.j_closed && b.k_closed);
        assert!(a.j_matches_constant_multiplier && b.j_matches_constant_multiplier);
    }
}

#[test]
fn limit_deviation_is_order_epsilon() {
    let g = grid();
    for sign in [1.0, -1.0] {
        let ds: Vec<f64> = (1..=4).map(|k| sign * 10f64.powi(-2 * k)).collect();
        let rows = limit_check(&ds, 0.0, 1.0, &g).unwrap();
        let mut prev = f64::INFINITY;
        for row in &rows {
            let dev = row.max_deviation();
            assert!(dev < prev);
            assert!(dev < 20.0 * row.epsilon, "dev {dev} eps {}", row.epsilon);
            assert_eq!(row.generator_deviation(3), 0.0);
            assert_eq!(row.generator_deviation(4), 0.0);
            prev = dev;
        }
    }
    let rows = limit_check(&[1e-6], 0.0, 1.0, &g).unwrap();
    assert!(rows[0].generator_deviation(1) < 1e-2);
}

#[test]
fn wrong_theta_breaks_the_limit() {
    use hjb_iso::isovectors::transformed_basis_with_theta;
    let case = basis(pot(0.0, 1e-8, 1.5));
    let good = transformed_basis_with_theta(&case, 1.5).unwrap().limit;
    let bad = transformed_basis_with_theta(&case, 0.0).unwrap().limit;
    let m2 = basis(pot(0.0, 0.0, 1.5)).gen(2).clone();
    let dev = |x: &TildeField| {
        let [_, _, c] = x.eval(0.3, 0.5);
        (c - m2.c.eval(0.3, 0.5)).abs()
    };
    assert!(dev(good.gen(2)) < 1e-3);
    assert!(dev(bad.gen(2)) > 0.1);
}

fn coeffs6() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bracket_antisymmetric_and_bilinear(a in coeffs6(), b in coeffs6(), c in coeffs6(), k in -3.0f64..3.0) {
        for d in [0.3, 0.0, -0.3] {
            let case = basis(pot(0.0, d, 1.1));
            let x = TildeField::combination(&a, &case.basis);
            let y = TildeField::combination(&b, &case.basis);
            let z = TildeField::combination(&c, &case.basis);
            prop_assert!(bracket(&x, &y).add(&bracket(&y, &x)).is_zero());
            let lhs = bracket(&x.scale(k).add(&z), &y);
            let rhs = bracket(&x, &y).scale(k).add(&bracket(&z, &y));
            prop_assert!(lhs.approx_eq(&rhs));
        }
    }
}
