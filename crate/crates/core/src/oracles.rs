//! Combinatorial ground truth for the path class, with no algebra involved.
//!
//! Both oracles accept any valid [`RawDigraph`]; paths are node-simple and
//! two paths are disjoint when they share no node, endpoints included.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{IndexedGraph, RawDigraph};

pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// The two input indices `(j1, j2)` routed to `y1` and `y2`.
pub const PAIRINGS: [[usize; 2]; 2] = [[0, 1], [1, 0]];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CommonNode {
    /// Node of the graph that was searched.
    pub node: String,
    /// The user-graph node it stands for.
    pub origin: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "class")]
pub enum ClassCertificate {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One {
        /// `None` when no node meets every input-output path.
        common_node: Option<CommonNode>,
    },
    #[serde(rename = "2")]
    Two {
        /// 1-based input indices routed to `y1` and `y2`.
        pairing: [usize; 2],
        paths: [Vec<String>; 2],
    },
}

impl ClassCertificate {
    pub fn class(&self) -> u8 {
        match self {
            ClassCertificate::Zero => 0,
            ClassCertificate::One { .. } => 1,
            ClassCertificate::Two { .. } => 2,
        }
    }
}

/// Outcome of the brute-force search with its work counter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteForce {
    pub certificate: ClassCertificate,
    pub expansions: u64,
}

fn any_path(ig: &IndexedGraph, blocked: &[bool]) -> bool {
    let reach = ig.reachable(&ig.inputs, blocked);
    ig.outputs.iter().any(|&y| reach[y])
}

/// BFS path avoiding `blocked`, smallest canonical successor first.
fn bfs_path(ig: &IndexedGraph, from: usize, to: usize, blocked: &[bool]) -> Option<Vec<usize>> {
    if blocked[from] || blocked[to] {
        return None;
    }
    let mut parent = vec![usize::MAX; ig.len()];
    parent[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            let mut path = vec![to];
            let mut cur = to;
            while cur != from {
                cur = parent[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &w in &ig.succ[v] {
            if parent[w] == usize::MAX && !blocked[w] {
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    None
}

fn names(ig: &IndexedGraph, path: &[usize]) -> Vec<String> {
    path.iter().map(|&v| ig.names[v].clone()).collect()
}

/// Backtracks over simple `u_{j1} -> y1` paths for each pairing and tests
/// `u_{j2} -> y2` reachability once the first path's nodes are removed.
///
/// Every node pushed onto the search path counts as one expansion.
pub fn brute_force_class(g: &RawDigraph, budget: u64) -> Result<BruteForce> {
    let ig = g.indexed();
    let n = ig.len();
    let mut expansions = 0u64;
    for pairing in PAIRINGS {
        let (start, goal) = (ig.inputs[pairing[0]], ig.outputs[0]);
        let (second_start, second_goal) = (ig.inputs[pairing[1]], ig.outputs[1]);
        // the second pair's terminals may never lie on the first path
        let mut forbidden = vec![false; n];
        forbidden[second_start] = true;
        forbidden[second_goal] = true;
        let useful = ig.coreachable(&[goal], &forbidden);
        if !useful[start] {
            continue;
        }
        let mut on_path = vec![false; n];
        let mut path = vec![start];
        on_path[start] = true;
        expansions += 1;
        // per-depth cursor into the successor list
        let mut cursor = vec![0usize];
        while let Some(&v) = path.last() {
            if v == goal {
                if let Some(second) = bfs_path(&ig, second_start, second_goal, &on_path) {
                    return Ok(BruteForce {
                        certificate: ClassCertificate::Two {
                            pairing: [pairing[0] + 1, pairing[1] + 1],
                            paths: [names(&ig, &path), names(&ig, &second)],
                        },
                        expansions,
                    });
                }
                on_path[v] = false;
                path.pop();
                cursor.pop();
                continue;
            }
            let c = cursor.last_mut().expect("parallel to path");
            let next = ig.succ[v][*c..]
                .iter()
                .position(|&w| !on_path[w] && useful[w])
                .map(|off| *c + off);
            match next {
                Some(pos) => {
                    *c = pos + 1;
                    let w = ig.succ[v][pos];
                    expansions += 1;
                    if expansions > budget {
                        return Err(Error::SearchBudgetExceeded(budget));
                    }
                    on_path[w] = true;
                    path.push(w);
                    cursor.push(0);
                }
                None => {
                    on_path[v] = false;
                    path.pop();
                    cursor.pop();
                }
            }
        }
    }
    let certificate = if any_path(&ig, &vec![false; n]) {
        ClassCertificate::One {
            common_node: common_node_certificate(g),
        }
    } else {
        ClassCertificate::Zero
    };
    Ok(BruteForce {
        certificate,
        expansions,
    })
}

/// Maximum number of node-disjoint paths from `{u1, u2}` to `{y1, y2}`,
/// capped at 2, by augmenting paths on the node-split unit-capacity network.
pub fn maxflow_class(g: &RawDigraph) -> u8 {
    let ig = g.indexed();
    let n = ig.len();
    // node v: in-copy 2v, out-copy 2v+1; source 2n, sink 2n+1
    let (source, sink) = (2 * n, 2 * n + 1);
    let mut cap: Vec<std::collections::HashMap<usize, i32>> = vec![Default::default(); 2 * n + 2];
    let add = |cap: &mut Vec<std::collections::HashMap<usize, i32>>, a: usize, b: usize| {
        *cap[a].entry(b).or_insert(0) += 1;
        cap[b].entry(a).or_insert(0);
    };
    for v in 0..n {
        add(&mut cap, 2 * v, 2 * v + 1);
        for &w in &ig.succ[v] {
            add(&mut cap, 2 * v + 1, 2 * w);
        }
    }
    for &u in &ig.inputs {
        add(&mut cap, source, 2 * u);
    }
    for &y in &ig.outputs {
        add(&mut cap, 2 * y + 1, sink);
    }
    let mut flow = 0u8;
    while flow < 2 {
        let mut parent = vec![usize::MAX; 2 * n + 2];
        parent[source] = source;
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            let mut next: Vec<usize> = cap[v].iter().filter(|(_, &c)| c > 0).map(|(&w, _)| w).collect();
            next.sort_unstable();
            for w in next {
                if parent[w] == usize::MAX {
                    parent[w] = v;
                    queue.push_back(w);
                }
            }
        }
        if parent[sink] == usize::MAX {
            break;
        }
        let mut cur = sink;
        while cur != source {
            let p = parent[cur];
            *cap[p].get_mut(&cur).expect("residual edge") -= 1;
            *cap[cur].get_mut(&p).expect("reverse edge") += 1;
            cur = p;
        }
        flow += 1;
    }
    flow
}

/// First node in canonical order that lies on some input-output path and
/// whose removal leaves no input-output path.
pub fn common_node_certificate(g: &RawDigraph) -> Option<CommonNode> {
    let ig = g.indexed();
    let n = ig.len();
    let none = vec![false; n];
    let forward = ig.reachable(&ig.inputs, &none);
    let backward = ig.coreachable(&ig.outputs, &none);
    (0..n)
        .filter(|&v| forward[v] && backward[v])
        .find(|&v| {
            let mut blocked = vec![false; n];
            blocked[v] = true;
            !any_path(&ig, &blocked)
        })
        .map(|v| CommonNode {
            node: ig.names[v].clone(),
            origin: g.origin_of(&ig.names[v]).to_string(),
        })
}

/// Re-checks a certificate against `g` without reusing the search.
pub fn verify_certificate(g: &RawDigraph, cert: &ClassCertificate) -> std::result::Result<(), String> {
    let ig = g.indexed();
    let n = ig.len();
    let index = |name: &str| ig.names.iter().position(|m| m == name);
    match cert {
        ClassCertificate::Zero => {
            if any_path(&ig, &vec![false; n]) {
                return Err("an input reaches an output".into());
            }
        }
        ClassCertificate::One { common_node } => {
            if !any_path(&ig, &vec![false; n]) {
                return Err("no input reaches an output".into());
            }
            let Some(c) = common_node else {
                return Err("class 1 without a common node".into());
            };
            let v = index(&c.node).ok_or_else(|| format!("unknown node {}", c.node))?;
            let none = vec![false; n];
            if !(ig.reachable(&ig.inputs, &none)[v] && ig.coreachable(&ig.outputs, &none)[v]) {
                return Err(format!("{} lies on no input-output path", c.node));
            }
            let mut blocked = vec![false; n];
            blocked[v] = true;
            if any_path(&ig, &blocked) {
                return Err(format!("a path avoids {}", c.node));
            }
        }
        ClassCertificate::Two { pairing, paths } => {
            let mut used = vec![false; n];
            for k in 0..2 {
                let j = pairing[k];
                if !(1..=2).contains(&j) || pairing[0] == pairing[1] {
                    return Err(format!("invalid pairing {pairing:?}"));
                }
                let ids: Vec<usize> = paths[k]
                    .iter()
                    .map(|name| index(name).ok_or_else(|| format!("unknown node {name}")))
                    .collect::<std::result::Result<_, _>>()?;
                if ids.first() != Some(&ig.inputs[j - 1]) || ids.last() != Some(&ig.outputs[k]) {
                    return Err(format!("path {} has wrong endpoints", k + 1));
                }
                for pair in ids.windows(2) {
                    if !ig.succ[pair[0]].contains(&pair[1]) {
                        return Err(format!("missing edge {} -> {}", ig.names[pair[0]], ig.names[pair[1]]));
                    }
                }
                for &v in &ids {
                    if used[v] {
                        return Err(format!("node {} repeated", ig.names[v]));
                    }
                    used[v] = true;
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(edges: &[(&str, &str)]) -> RawDigraph {
        RawDigraph::from_edges(edges, ["u1", "u2"], ["y1", "y2"]).unwrap()
    }

    fn check(edges: &[(&str, &str)]) -> ClassCertificate {
        let g = graph(edges);
        let bf = brute_force_class(&g, DEFAULT_BUDGET).unwrap();
        assert_eq!(bf.certificate.class(), maxflow_class(&g));
        verify_certificate(&g, &bf.certificate).unwrap();
        bf.certificate
    }

    #[test]
    fn disjoint_edges() {
        let c = check(&[("u1", "y1"), ("u2", "y2")]);
        assert_eq!(
            c,
            ClassCertificate::Two {
                pairing: [1, 2],
                paths: [vec!["u1".into(), "y1".into()], vec!["u2".into(), "y2".into()]],
            }
        );
    }

    #[test]
    fn crossed_edges() {
        let c = check(&[("u1", "y2"), ("u2", "y1")]);
        let ClassCertificate::Two { pairing, .. } = c else {
            panic!("expected class 2");
        };
        assert_eq!(pairing, [2, 1]);
    }

    #[test]
    fn star_has_common_node() {
        let c = check(&[("u1", "v"), ("u2", "v"), ("v", "y1"), ("v", "y2")]);
        assert_eq!(
            c,
            ClassCertificate::One {
                common_node: Some(CommonNode {
                    node: "v".into(),
                    origin: "v".into(),
                }),
            }
        );
    }

    #[test]
    fn single_path_certificate_is_first_node() {
        let c = check(&[("u1", "a"), ("a", "y1")]);
        let ClassCertificate::One { common_node: Some(node) } = c else {
            panic!("expected class 1");
        };
        assert_eq!(node.node, "u1");
    }

    #[test]
    fn empty_graph_is_class_zero() {
        assert_eq!(check(&[("u1", "a"), ("b", "y2")]), ClassCertificate::Zero);
    }

    #[test]
    fn paths_through_terminals_count_as_shared() {
        // the only route to y2 runs through y1's path
        let c = check(&[("u1", "a"), ("a", "y1"), ("u2", "a"), ("a", "y2")]);
        assert_eq!(c.class(), 1);
        let c = check(&[("u1", "u2"), ("u2", "y1"), ("u2", "y2")]);
        assert_eq!(c.class(), 1);
    }

    #[test]
    fn budget_is_enforced() {
        let g = graph(&[("u1", "a"), ("a", "b"), ("b", "y1"), ("u1", "b")]);
        assert!(matches!(
            brute_force_class(&g, 1),
            Err(Error::SearchBudgetExceeded(1))
        ));
    }

    #[test]
    fn certificate_on_split_graph_reports_origin() {
        let g = graph(&[("u1", "v"), ("u2", "v"), ("v", "y1"), ("v", "y2")]);
        let s = crate::graph::standardize(&g).unwrap();
        let node = common_node_certificate(&s).unwrap();
        assert_eq!(node.node, "v.1");
        assert_eq!(node.origin, "v");
    }

    #[test]
    fn verifier_rejects_bad_certificates() {
        let g = graph(&[("u1", "v"), ("u2", "v"), ("v", "y1"), ("v", "y2")]);
        let bad = ClassCertificate::Two {
            pairing: [1, 2],
            paths: [
                vec!["u1".into(), "v".into(), "y1".into()],
                vec!["u2".into(), "v".into(), "y2".into()],
            ],
        };
        assert!(verify_certificate(&g, &bad).is_err());
        let bad = ClassCertificate::One {
            common_node: Some(CommonNode {
                node: "u1".into(),
                origin: "u1".into(),
            }),
        };
        assert!(verify_certificate(&g, &bad).is_err());
        assert!(verify_certificate(&g, &ClassCertificate::Zero).is_err());
    }
}
