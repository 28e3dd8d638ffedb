mod common;

use common::{fixtures, graph};
use proptest::prelude::*;
use twopath_core::campaign::{exhaustive_count, exhaustive_graph, random_graph};
use twopath_core::oracles::{brute_force_class, maxflow_class, verify_certificate, ClassCertificate, DEFAULT_BUDGET};

#[test]
fn crossed_pairing() {
    let g = graph(&[("u1", "y2"), ("u2", "y1")]);
    let bf = brute_force_class(&g, DEFAULT_BUDGET).unwrap();
    match &bf.certificate {
        ClassCertificate::Two { pairing, .. } => assert_eq!(*pairing, [2, 1]),
        other => panic!("expected class 2, got {other:?}"),
    }
    verify_certificate(&g, &bf.certificate).unwrap();
}

#[test]
fn exhaustive_five_nodes_agree() {
    for i in 0..exhaustive_count(5) {
        let g = exhaustive_graph(5, i);
        let bf = brute_force_class(&g, DEFAULT_BUDGET).unwrap();
        assert_eq!(bf.certificate.class(), maxflow_class(&g), "instance {i}");
        verify_certificate(&g, &bf.certificate).unwrap();
    }
}

#[test]
fn curated_fixtures_certify() {
    for (stem, g) in fixtures("curated") {
        let bf = brute_force_class(&g, DEFAULT_BUDGET).unwrap();
        assert_eq!(bf.certificate.class(), maxflow_class(&g), "{stem}");
        verify_certificate(&g, &bf.certificate).unwrap_or_else(|e| panic!("{stem}: {e}"));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn oracles_agree(seed in any::<u64>(), i in 0u64..1000, simple in any::<bool>()) {
        let g = random_graph(seed, i, 8, 12, simple);
        let bf = brute_force_class(&g, DEFAULT_BUDGET).unwrap();
        prop_assert_eq!(bf.certificate.class(), maxflow_class(&g));
        prop_assert!(verify_certificate(&g, &bf.certificate).is_ok());
    }
}
