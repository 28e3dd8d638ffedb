//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twopath_core::format::parse_graph_file;
use twopath_core::graph::{build_system, standardize, RawDigraph, StandardSfg, SystemStructure};
use twopath_core::poly::TruncPoly2;

pub fn fixture_dir(group: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(group)
}

/// `(stem, graph)` for every fixture in a group, sorted by file name.
pub fn fixtures(group: &str) -> Vec<(String, RawDigraph)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(fixture_dir(group))
        .expect("fixture directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "graph"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let stem = p.file_stem().unwrap().to_string_lossy().into_owned();
            (stem, parse_graph_file(&p).unwrap())
        })
        .collect()
}

pub fn graph(edges: &[(&str, &str)]) -> RawDigraph {
    RawDigraph::from_edges(edges, ["u1", "u2"], ["y1", "y2"]).unwrap()
}

pub fn standard(g: &RawDigraph) -> (StandardSfg, SystemStructure) {
    build_system(&standardize(g).unwrap()).unwrap()
}

/// Every simple branch path from input `input` to output `output`, by
/// depth-first search over the branch list.
pub fn all_branch_paths(sfg: &StandardSfg, input: usize, output: usize) -> Vec<Vec<usize>> {
    let start = sfg.inputs[input];
    let goal = sfg.outputs[output];
    let mut found = Vec::new();
    let mut visited = vec![false; sfg.order()];
    let mut path = Vec::new();
    fn go(
        sfg: &StandardSfg,
        v: usize,
        goal: usize,
        visited: &mut [bool],
        path: &mut Vec<usize>,
        found: &mut Vec<Vec<usize>>,
    ) {
        if v == goal {
            found.push(path.clone());
            return;
        }
        visited[v] = true;
        for (i, b) in sfg.branches.iter().enumerate() {
            if b.tail == v && !visited[b.head] {
                path.push(i);
                go(sfg, b.head, goal, visited, path, found);
                path.pop();
            }
        }
        visited[v] = false;
    }
    go(sfg, start, goal, &mut visited, &mut path, &mut found);
    found
}

pub fn shortest_branch_paths(sfg: &StandardSfg, input: usize, output: usize) -> Vec<Vec<usize>> {
    let all = all_branch_paths(sfg, input, output);
    let Some(d) = all.iter().map(Vec::len).min() else {
        return all;
    };
    all.into_iter().filter(|p| p.len() == d).collect()
}

/// `Σ z_v² + Σ_{v<w} z_v z_w` over the branches of one path.
pub fn esqp_by_hand(path: &[usize]) -> TruncPoly2 {
    let mut p = TruncPoly2::zero();
    for (a, &i) in path.iter().enumerate() {
        p.add_quadratic(i, i, BigInt::one());
        for &j in &path[a + 1..] {
            p.add_quadratic(i, j, BigInt::one());
        }
    }
    p
}

/// A random layered DAG: the inputs feed layer 1, the last layer feeds
/// the outputs, and edges only go from one layer to the next.
pub fn layered_dag(seed: u64) -> RawDigraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = rng.gen_range(1..=4);
    let names: Vec<Vec<String>> = (0..layers)
        .map(|l| (0..rng.gen_range(1..=3)).map(|k| format!("l{l}n{k}")).collect())
        .collect();
    let mut edges: Vec<(String, String)> = Vec::new();
    let link = |from: &[String], to: &[String], rng: &mut ChaCha8Rng, edges: &mut Vec<(String, String)>| {
        for a in from {
            for b in to {
                if rng.gen_bool(0.6) {
                    edges.push((a.clone(), b.clone()));
                }
            }
        }
        // keep every layer connected forward
        let (a, b) = (&from[rng.gen_range(0..from.len())], &to[rng.gen_range(0..to.len())]);
        if !edges.contains(&(a.clone(), b.clone())) {
            edges.push((a.clone(), b.clone()));
        }
    };
    let inputs = vec!["u1".to_string(), "u2".to_string()];
    let outputs = vec!["y1".to_string(), "y2".to_string()];
    link(&inputs, &names[0], &mut rng, &mut edges);
    for l in 1..layers {
        link(&names[l - 1], &names[l], &mut rng, &mut edges);
    }
    link(&names[layers - 1], &outputs, &mut rng, &mut edges);
    let nodes: Vec<String> = names.into_iter().flatten().collect();
    RawDigraph::new(nodes, edges, ["u1".into(), "u2".into()], ["y1".into(), "y2".into()]).unwrap()
}

/// Fraction-free Gaussian elimination (Bareiss) determinant.
pub fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// `A = A0 + diag(alpha)` as a dense matrix.
pub fn dense_a(structure: &SystemStructure, alpha: &[BigInt]) -> Vec<Vec<BigInt>> {
    (0..structure.n)
        .map(|i| {
            (0..structure.n)
                .map(|j| {
                    let mut v = BigInt::from(structure.a0(i, j) as u8);
                    if i == j {
                        v += &alpha[i];
                    }
                    v
                })
                .collect()
        })
        .collect()
}
