mod common;

use common::{fixtures, graph, standard};
use num_bigint::BigInt;
use twopath_core::mason::{assoc_loop_sets, cross_check, enumerate_loops, factorization_check, DEFAULT_LOOP_CAP, DEFAULT_PATH_CAP};
use twopath_core::phi::generate_phi;
use twopath_core::Error;

#[test]
fn two_loops_sharing_a_node() {
    let (sfg, _) = standard(&graph(&[("a", "b"), ("b", "a"), ("b", "c"), ("c", "b")]));
    assert_eq!(enumerate_loops(&sfg, DEFAULT_LOOP_CAP).unwrap().len(), 2);
}

#[test]
fn figure_eight_is_one_set() {
    let (sfg, s) = standard(&graph(&[("a", "b"), ("b", "a"), ("a", "c"), ("c", "a")]));
    let sets = assoc_loop_sets(&sfg);
    assert_eq!(sets.len(), 1);
    // `a` is 2-in/2-out and splits, so there are five branches
    assert_eq!(s.n, 5);
    let short: Vec<BigInt> = [2, 4, 6, 8].map(BigInt::from).to_vec();
    assert!(matches!(factorization_check(&sfg, &s, &short, DEFAULT_LOOP_CAP), Err(Error::Invariant(_))));
    let alpha: Vec<BigInt> = [2, 4, 6, 8, 10].map(BigInt::from).to_vec();
    let fc = factorization_check(&sfg, &s, &alpha, DEFAULT_LOOP_CAP).unwrap();
    assert!(fc.holds);
    assert_eq!(fc.factors.len(), 1);
}

#[test]
fn loop_fixtures_cross_check() {
    for (stem, g) in fixtures("mason") {
        let (sfg, s) = standard(&g);
        for p in generate_phi(s.n).iter().filter(|p| p.family == 1) {
            let cc = cross_check(&sfg, &s, &p.alpha, DEFAULT_LOOP_CAP, DEFAULT_PATH_CAP).unwrap();
            assert!(cc.holds(), "{stem} at {:?}", p.alpha);
            assert!(factorization_check(&sfg, &s, &p.alpha, DEFAULT_LOOP_CAP).unwrap().holds, "{stem}");
        }
    }
}

#[test]
fn loop_cap_is_reported() {
    let (sfg, _) = standard(&graph(&[("a", "b"), ("b", "a")]));
    assert!(matches!(enumerate_loops(&sfg, 0), Err(Error::CapExceeded { .. })));
}
