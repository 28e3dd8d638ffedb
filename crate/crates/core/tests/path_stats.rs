mod common;

use common::{esqp_by_hand, graph, layered_dag, shortest_branch_paths, standard};
use num_bigint::BigInt;
use twopath_core::path_stats::{
    reconstruct_single_path, relative_order, series_coeffs, verify_esqp, walk_series, RelativeOrder,
};
use twopath_core::poly::TruncPoly2;

#[test]
fn layered_dags_match_enumeration() {
    let mut pairs = 0;
    for seed in 0..50 {
        let g = layered_dag(seed);
        let (sfg, s) = standard(&g);
        for input in 0..2 {
            for output in 0..2 {
                let paths = shortest_branch_paths(&sfg, input, output);
                match relative_order(&s, input, output) {
                    RelativeOrder::Unreachable => assert!(paths.is_empty()),
                    RelativeOrder::Finite(d) => {
                        pairs += 1;
                        assert_eq!(paths[0].len(), d);
                        let c = series_coeffs(&s, input, output).unwrap();
                        assert_eq!(c.f0, BigInt::from(paths.len()));
                        let mut sum = TruncPoly2::zero();
                        for p in &paths {
                            sum.add_assign_ref(&esqp_by_hand(p));
                        }
                        assert_eq!(c.f22(), sum, "dag {seed}");
                        assert!(verify_esqp(&s, input, output).unwrap().passes());
                        if paths.len() == 1 {
                            assert_eq!(reconstruct_single_path(&s, input, output, &c), Some(paths[0].clone()));
                        }
                    }
                }
            }
        }
    }
    assert!(pairs >= 50);
}

#[test]
fn walks_with_a_cycle() {
    // u1 -> a -> y1 with a two-cycle a -> b -> a; `a` splits into a.1 -> a.2
    let g = graph(&[("u1", "a"), ("a", "y1"), ("a", "b"), ("b", "a")]);
    let (_, s) = standard(&g);
    let c = series_coeffs(&s, 0, 0).unwrap();
    assert_eq!(c.d, 3);
    assert_eq!(c.f0, BigInt::from(1));
    assert_eq!(*c.f10(), BigInt::from(0));
    assert_eq!(*c.f20(), BigInt::from(0));
    // one walk of d + 3 branches runs once around a.2 -> b -> a.1
    let walks = walk_series(&s, 0, 0, 5);
    assert_eq!(walks[3..], [BigInt::from(0), BigInt::from(0), BigInt::from(1)]);
}

#[test]
fn unreachable_pair() {
    let (_, s) = standard(&graph(&[("u1", "a"), ("a", "y1")]));
    assert_eq!(relative_order(&s, 1, 1), RelativeOrder::Unreachable);
    assert_eq!(relative_order(&s, 1, 1).or_sentinel(s.n), s.n);
    assert!(series_coeffs(&s, 1, 1).is_err());
}
