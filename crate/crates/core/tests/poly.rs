use std::collections::BTreeMap;

use num_bigint::BigInt;
use proptest::prelude::*;
use twopath_core::poly::{det2x2, TruncPoly2, UniPoly};

fn uni() -> impl Strategy<Value = UniPoly> {
    prop::collection::vec(-50i64..50, 0..6).prop_map(|c| UniPoly::from_i64s(&c))
}

/// Up to degree two in at most four indeterminates.
fn trunc() -> impl Strategy<Value = TruncPoly2> {
    (
        -9i64..9,
        prop::collection::vec((0usize..4, -9i64..9), 0..4),
        prop::collection::vec((0usize..4, 0usize..4, -9i64..9), 0..4),
    )
        .prop_map(|(c, lin, quad)| {
            let mut p = TruncPoly2::constant(BigInt::from(c));
            for (i, v) in lin {
                p.add_linear(i, BigInt::from(v));
            }
            for (i, j, v) in quad {
                p.add_quadratic(i, j, BigInt::from(v));
            }
            p
        })
}

type Monomials = BTreeMap<Vec<usize>, BigInt>;

fn monomials(p: &TruncPoly2) -> Monomials {
    let mut m = Monomials::new();
    m.insert(vec![], p.constant_term().clone());
    for (i, v) in p.linear_terms() {
        m.insert(vec![*i], v.clone());
    }
    for ((i, j), v) in p.quadratic_terms() {
        m.insert(vec![*i, *j], v.clone());
    }
    m
}

/// Full product, then every monomial above degree two dropped.
fn naive_trunc_product(a: &TruncPoly2, b: &TruncPoly2) -> TruncPoly2 {
    let mut out = TruncPoly2::zero();
    for (ma, ca) in monomials(a) {
        for (mb, cb) in monomials(b) {
            let mut m: Vec<usize> = ma.iter().chain(mb.iter()).copied().collect();
            m.sort_unstable();
            let c = &ca * &cb;
            match m.len() {
                0 => out.add_constant(&c),
                1 => out.add_linear(m[0], c),
                2 => out.add_quadratic(m[0], m[1], c),
                _ => {}
            }
        }
    }
    out
}

proptest! {
    #[test]
    fn ring_axioms(a in uni(), b in uni(), c in uni()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a - &a, UniPoly::zero());
        prop_assert_eq!(&a * &UniPoly::one(), a.clone());
    }

    #[test]
    fn evaluation_is_a_homomorphism(a in uni(), b in uni(), s in -20i64..20) {
        let s = BigInt::from(s);
        prop_assert_eq!((&a * &b).eval(&s), a.eval(&s) * b.eval(&s));
        prop_assert_eq!((&a + &b).eval(&s), a.eval(&s) + b.eval(&s));
    }

    #[test]
    fn degree_of_product(a in uni(), b in uni()) {
        let p = &a * &b;
        match (a.degree(), b.degree()) {
            (Some(x), Some(y)) => prop_assert_eq!(p.degree(), Some(x + y)),
            _ => prop_assert!(p.is_zero()),
        }
    }

    #[test]
    fn linear_factor_multiplication(a in uni(), r in -20i64..20) {
        let r = BigInt::from(r);
        let mut b = a.clone();
        b.mul_linear_factor(&r);
        prop_assert_eq!(b, &a * &UniPoly::linear_factor(&r));
    }

    #[test]
    fn det2x2_matches_expansion(m in [[uni(), uni()], [uni(), uni()]]) {
        let want = &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]);
        prop_assert_eq!(det2x2(&m), want);
    }

    #[test]
    fn trunc2_mul_matches_naive(a in trunc(), b in trunc()) {
        prop_assert_eq!(a.trunc2_mul(&b), naive_trunc_product(&a, &b));
    }

    #[test]
    fn mul_var_matches_trunc2_mul(a in trunc(), i in 0usize..4) {
        prop_assert_eq!(a.mul_var(i), a.trunc2_mul(&TruncPoly2::var(i)));
    }
}

#[test]
fn hand_expansions() {
    let p = &UniPoly::linear_factor(&BigInt::from(2)) * &UniPoly::linear_factor(&BigInt::from(4));
    assert_eq!(&p - &UniPoly::one(), UniPoly::from_i64s(&[7, -6, 1]));
    let s = TruncPoly2::var(1).trunc2_mul(&TruncPoly2::var(2));
    let sum = {
        let mut x = TruncPoly2::var(1);
        x.add_assign_ref(&TruncPoly2::var(2));
        x
    };
    let sq = sum.trunc2_mul(&sum);
    assert_eq!(sq.quadratic_coeff(1, 2), BigInt::from(2));
    assert_eq!(sq.quadratic_coeff(1, 1), BigInt::from(1));
    assert_eq!(s.quadratic_coeff(2, 1), BigInt::from(1));
}
