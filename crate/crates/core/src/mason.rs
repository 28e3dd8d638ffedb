//! Independent transfer-function oracle built on loop enumeration and the
//! gain formula `G = Σ p_μ Δ_μ / Δ`, `Δ = 1 - ΣL_i + ΣL_iL_j - ...`.
//!
//! Every branch gain is `1/(s - α_i)`, so all quantities are cleared by the
//! product `Π(s - α_i)` over the branches in play: a set `S` of pairwise
//! node-disjoint loops contributes `(-1)^|S| Π_{i ∉ ∪S} (s - α_i)`.

use std::collections::HashMap;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{StandardSfg, SystemStructure};
use crate::poly::{BigScalar, UniPoly};
use crate::resolvent::faddeev;

pub const DEFAULT_LOOP_CAP: usize = 10_000;
pub const DEFAULT_PATH_CAP: usize = 10_000;

/// A simple directed cycle of the graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Loop {
    /// Nodes in cycle order, starting at the smallest index.
    pub nodes: Vec<usize>,
    /// Branch indices, ascending.
    pub branches: Vec<usize>,
}

/// Branch set of one associative loop set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AssocLoopSet {
    pub branches: Vec<usize>,
}

struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn intersects(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }
}

/// Johnson's elementary-circuit enumeration over the node graph.
pub fn enumerate_loops(sfg: &StandardSfg, cap: usize) -> Result<Vec<Loop>> {
    let v = sfg.order();
    let adj = sfg.node_adjacency();
    let branch_of: HashMap<(usize, usize), usize> = sfg
        .branches
        .iter()
        .enumerate()
        .map(|(i, b)| ((b.tail, b.head), i))
        .collect();

    let mut loops = Vec::new();
    for start in 0..v {
        // strongly connected piece of the subgraph on nodes >= start holding `start`
        let mut sub: DiGraph<usize, ()> = DiGraph::new();
        let idx: Vec<_> = (0..v).map(|i| sub.add_node(i)).collect();
        for a in start..v {
            for &(b, _) in &adj[a] {
                if b >= start {
                    sub.add_edge(idx[a], idx[b], ());
                }
            }
        }
        let component = tarjan_scc(&sub)
            .into_iter()
            .find(|c| c.contains(&idx[start]))
            .unwrap_or_default();
        if component.len() < 2 {
            continue;
        }
        let mut in_component = vec![false; v];
        for c in component {
            in_component[sub[c]] = true;
        }

        let mut search = CircuitSearch {
            adj: &adj,
            allowed: &in_component,
            blocked: vec![false; v],
            blocked_by: vec![Vec::new(); v],
            stack: Vec::new(),
            start,
            found: Vec::new(),
            cap: cap.saturating_sub(loops.len()),
            overflow: false,
        };
        search.circuit(start);
        if search.overflow {
            return Err(Error::CapExceeded { what: "loops", cap });
        }
        for cycle in search.found {
            let mut branches: Vec<usize> = (0..cycle.len())
                .map(|k| branch_of[&(cycle[k], cycle[(k + 1) % cycle.len()])])
                .collect();
            branches.sort_unstable();
            loops.push(Loop { nodes: cycle, branches });
        }
    }
    Ok(loops)
}

struct CircuitSearch<'a> {
    adj: &'a [Vec<(usize, usize)>],
    allowed: &'a [bool],
    blocked: Vec<bool>,
    blocked_by: Vec<Vec<usize>>,
    stack: Vec<usize>,
    start: usize,
    found: Vec<Vec<usize>>,
    cap: usize,
    overflow: bool,
}

impl CircuitSearch<'_> {
    fn unblock(&mut self, u: usize) {
        self.blocked[u] = false;
        while let Some(w) = self.blocked_by[u].pop() {
            if self.blocked[w] {
                self.unblock(w);
            }
        }
    }

    fn circuit(&mut self, v: usize) -> bool {
        if self.overflow {
            return true;
        }
        let mut closed = false;
        self.stack.push(v);
        self.blocked[v] = true;
        for &(w, _) in &self.adj[v] {
            if !self.allowed[w] {
                continue;
            }
            if w == self.start {
                if self.found.len() >= self.cap {
                    self.overflow = true;
                    return true;
                }
                self.found.push(self.stack.clone());
                closed = true;
            } else if !self.blocked[w] && self.circuit(w) {
                closed = true;
            }
        }
        if closed {
            self.unblock(v);
        } else {
            for &(w, _) in &self.adj[v] {
                if self.allowed[w] && !self.blocked_by[w].contains(&v) {
                    self.blocked_by[w].push(v);
                }
            }
        }
        self.stack.pop();
        closed
    }
}

fn node_bits(sfg: &StandardSfg, nodes: &[usize]) -> Bits {
    let mut b = Bits::new(sfg.order());
    for &v in nodes {
        b.set(v);
    }
    b
}

/// `Σ_S (-1)^|S| Π_{i ∈ universe \ ∪S} (s - α_i)` over sets `S` of pairwise
/// node-disjoint loops drawn from `loops`.
fn signed_cover_sum(sfg: &StandardSfg, universe: &[usize], loops: &[&Loop], alpha: &[BigScalar]) -> UniPoly {
    let masks: Vec<Bits> = loops.iter().map(|l| node_bits(sfg, &l.nodes)).collect();
    let mut total = UniPoly::zero();
    let mut covered = vec![false; sfg.size()];
    let mut chosen: Vec<usize> = Vec::new();

    fn term(universe: &[usize], covered: &[bool], alpha: &[BigScalar]) -> UniPoly {
        let mut p = UniPoly::one();
        for &i in universe {
            if !covered[i] {
                p.mul_linear_factor(&alpha[i]);
            }
        }
        p
    }

    #[allow(clippy::too_many_arguments)]
    fn walk(
        next: usize,
        loops: &[&Loop],
        masks: &[Bits],
        chosen: &mut Vec<usize>,
        covered: &mut [bool],
        universe: &[usize],
        alpha: &[BigScalar],
        total: &mut UniPoly,
    ) {
        let t = term(universe, covered, alpha);
        *total = if chosen.len().is_multiple_of(2) {
            &*total + &t
        } else {
            &*total - &t
        };
        for k in next..loops.len() {
            if chosen.iter().any(|&c| masks[c].intersects(&masks[k])) {
                continue;
            }
            chosen.push(k);
            for &b in &loops[k].branches {
                covered[b] = true;
            }
            walk(k + 1, loops, masks, chosen, covered, universe, alpha, total);
            for &b in &loops[k].branches {
                covered[b] = false;
            }
            chosen.pop();
        }
    }

    walk(0, loops, &masks, &mut chosen, &mut covered, universe, alpha, &mut total);
    total
}

/// The graph determinant multiplied through by `Π(s - α_i)`.
pub fn cleared_determinant(sfg: &StandardSfg, loops: &[Loop], alpha: &[BigScalar]) -> UniPoly {
    let universe: Vec<usize> = (0..sfg.size()).collect();
    let all: Vec<&Loop> = loops.iter().collect();
    signed_cover_sum(sfg, &universe, &all, alpha)
}

/// Simple node paths from `from` to `to`, as branch sequences.
pub fn forward_paths(sfg: &StandardSfg, from: usize, to: usize, cap: usize) -> Result<Vec<Vec<usize>>> {
    let adj = sfg.node_adjacency();
    let mut paths = Vec::new();
    let mut on_path = vec![false; sfg.order()];
    let mut branches = Vec::new();

    fn dfs(
        v: usize,
        to: usize,
        adj: &[Vec<(usize, usize)>],
        on_path: &mut [bool],
        branches: &mut Vec<usize>,
        paths: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> bool {
        if v == to {
            if paths.len() >= cap {
                return false;
            }
            paths.push(branches.clone());
            return true;
        }
        on_path[v] = true;
        for &(w, b) in &adj[v] {
            if on_path[w] {
                continue;
            }
            branches.push(b);
            let ok = dfs(w, to, adj, on_path, branches, paths, cap);
            branches.pop();
            if !ok {
                return false;
            }
        }
        on_path[v] = false;
        true
    }

    if !dfs(from, to, &adj, &mut on_path, &mut branches, &mut paths, cap) {
        return Err(Error::CapExceeded { what: "forward paths", cap });
    }
    Ok(paths)
}

/// Cleared gain from input `k` to output `j`: `(Σ_μ p_μ Δ_μ, Δ)`, both
/// multiplied by `Π(s - α_i)`.
pub fn transfer_gain(
    sfg: &StandardSfg,
    loops: &[Loop],
    alpha: &[BigScalar],
    input: usize,
    output: usize,
    path_cap: usize,
) -> Result<(UniPoly, UniPoly)> {
    let denominator = cleared_determinant(sfg, loops, alpha);
    let mut numerator = UniPoly::zero();
    for path in forward_paths(sfg, sfg.inputs[input], sfg.outputs[output], path_cap)? {
        let mut path_nodes = vec![sfg.branches[path[0]].tail];
        path_nodes.extend(path.iter().map(|&b| sfg.branches[b].head));
        let path_mask = node_bits(sfg, &path_nodes);
        let untouched: Vec<&Loop> = loops
            .iter()
            .filter(|l| !node_bits(sfg, &l.nodes).intersects(&path_mask))
            .collect();
        let universe: Vec<usize> = (0..sfg.size()).filter(|i| !path.contains(i)).collect();
        numerator = &numerator + &signed_cover_sum(sfg, &universe, &untouched, alpha);
    }
    Ok((numerator, denominator))
}

/// Nontrivial strongly connected components of the branch-feeding graph.
pub fn assoc_loop_sets(sfg: &StandardSfg) -> Vec<AssocLoopSet> {
    let n = sfg.size();
    let mut g: DiGraph<usize, ()> = DiGraph::new();
    let idx: Vec<_> = (0..n).map(|i| g.add_node(i)).collect();
    for (j, bj) in sfg.branches.iter().enumerate() {
        for (i, bi) in sfg.branches.iter().enumerate() {
            if bj.head == bi.tail {
                g.add_edge(idx[j], idx[i], ());
            }
        }
    }
    let mut sets: Vec<AssocLoopSet> = tarjan_scc(&g)
        .into_iter()
        .filter(|c| c.len() > 1)
        .map(|c| {
            let mut branches: Vec<usize> = c.into_iter().map(|x| g[x]).collect();
            branches.sort_unstable();
            AssocLoopSet { branches }
        })
        .collect();
    sets.sort_by_key(|s| s.branches[0]);
    sets
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorizationCheck {
    pub sets: Vec<AssocLoopSet>,
    /// Cleared sub-determinant of each set, in `sets` order.
    pub factors: Vec<UniPoly>,
    /// `det(sI - A)` from the resolvent recurrence.
    pub char_poly: UniPoly,
    pub product: UniPoly,
    pub holds: bool,
}

/// Checks `det(sI - A) = Π_m Δ̄_m · Π_{k in no loop} (s - α_k)`.
pub fn factorization_check(
    sfg: &StandardSfg,
    structure: &SystemStructure,
    alpha: &[BigScalar],
    cap: usize,
) -> Result<FactorizationCheck> {
    let (cp, _) = faddeev(structure, alpha)?;
    let loops = enumerate_loops(sfg, cap)?;
    let sets = assoc_loop_sets(sfg);
    let mut in_set = vec![false; sfg.size()];
    let mut factors = Vec::with_capacity(sets.len());
    for set in &sets {
        for &b in &set.branches {
            in_set[b] = true;
        }
        let members: Vec<&Loop> = loops
            .iter()
            .filter(|l| l.branches.iter().all(|b| set.branches.binary_search(b).is_ok()))
            .collect();
        factors.push(signed_cover_sum(sfg, &set.branches, &members, alpha));
    }
    let mut product = factors.iter().fold(UniPoly::one(), |acc, f| &acc * f);
    for (k, a) in alpha.iter().enumerate() {
        if !in_set[k] {
            product.mul_linear_factor(a);
        }
    }
    let char_poly = cp.to_poly();
    Ok(FactorizationCheck {
        holds: char_poly == product,
        sets,
        factors,
        char_poly,
        product,
    })
}

/// Outcome of comparing the loop-based quantities against the resolvent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossCheck {
    pub loops: usize,
    pub char_poly_matches: bool,
    /// `[output][input]`: cleared gain equals `N_ji / Δ` after cross-multiplication.
    pub transfer_matches: [[bool; 2]; 2],
}

impl CrossCheck {
    pub fn holds(&self) -> bool {
        self.char_poly_matches && self.transfer_matches.iter().flatten().all(|&b| b)
    }
}

/// Cleared determinant against `Δ(s)` and every cleared gain against
/// `N(s, α)`, at the point `alpha`.
pub fn cross_check(
    sfg: &StandardSfg,
    structure: &SystemStructure,
    alpha: &[BigScalar],
    loop_cap: usize,
    path_cap: usize,
) -> Result<CrossCheck> {
    let loops = enumerate_loops(sfg, loop_cap)?;
    let (cp, nm) = faddeev(structure, alpha)?;
    let delta = cp.to_poly();
    let cleared = cleared_determinant(sfg, &loops, alpha);
    let mut transfer_matches = [[false; 2]; 2];
    for (output, row) in transfer_matches.iter_mut().enumerate() {
        for (input, cell) in row.iter_mut().enumerate() {
            let (num, den) = transfer_gain(sfg, &loops, alpha, input, output, path_cap)?;
            *cell = &num * &delta == &nm.entries[output][input] * &den;
        }
    }
    Ok(CrossCheck {
        loops: loops.len(),
        char_poly_matches: cleared == delta,
        transfer_matches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_system, standardize, RawDigraph};

    fn build(edges: &[(&str, &str)]) -> (StandardSfg, SystemStructure) {
        let g = RawDigraph::from_edges(edges, ["u1", "u2"], ["y1", "y2"]).unwrap();
        build_system(&standardize(&g).unwrap()).unwrap()
    }

    fn big(v: &[i64]) -> Vec<BigScalar> {
        v.iter().map(|&x| BigScalar::from(x)).collect()
    }

    fn lin(r: i64) -> UniPoly {
        UniPoly::from_i64s(&[-r, 1])
    }

    #[test]
    fn two_cycle_is_one_loop() {
        let (sfg, _) = build(&[("a", "b"), ("b", "a")]);
        let loops = enumerate_loops(&sfg, 10).unwrap();
        assert_eq!(loops.len(), 1);
        assert_eq!(loops[0].branches, vec![0, 1]);
    }

    #[test]
    fn dag_has_no_loops() {
        let (sfg, _) = build(&[("u1", "a"), ("a", "b"), ("u2", "b"), ("b", "y1")]);
        assert!(enumerate_loops(&sfg, 10).unwrap().is_empty());
        assert!(assoc_loop_sets(&sfg).is_empty());
        let alpha = big(&[2, 4, 6, 8]);
        let expected = [2, 4, 6, 8].iter().fold(UniPoly::one(), |acc, &r| &acc * &lin(r));
        assert_eq!(cleared_determinant(&sfg, &[], &alpha), expected);
    }

    #[test]
    fn loops_sharing_a_node() {
        let (sfg, _) = build(&[("a", "b"), ("b", "a"), ("b", "c"), ("c", "b")]);
        assert_eq!(enumerate_loops(&sfg, 10).unwrap().len(), 2);
    }

    #[test]
    fn cap_is_enforced() {
        let (sfg, _) = build(&[("a", "b"), ("b", "a"), ("b", "c"), ("c", "b")]);
        assert!(matches!(
            enumerate_loops(&sfg, 1),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn single_loop_determinant() {
        let (sfg, _) = build(&[("a", "b"), ("b", "a")]);
        let loops = enumerate_loops(&sfg, 10).unwrap();
        let d = cleared_determinant(&sfg, &loops, &big(&[2, 4]));
        assert_eq!(d, UniPoly::from_i64s(&[7, -6, 1]));
    }

    #[test]
    fn disjoint_loops_multiply() {
        let (sfg, s) = build(&[("a", "b"), ("b", "a"), ("c", "d"), ("d", "c")]);
        let loops = enumerate_loops(&sfg, 10).unwrap();
        let alpha = big(&[2, 4, 6, 8]);
        let one = UniPoly::one();
        let expected = &(&(&lin(2) * &lin(4)) - &one) * &(&(&lin(6) * &lin(8)) - &one);
        assert_eq!(cleared_determinant(&sfg, &loops, &alpha), expected);
        let sets = assoc_loop_sets(&sfg);
        assert_eq!(sets.len(), 2);
        let check = factorization_check(&sfg, &s, &alpha, 10).unwrap();
        assert!(check.holds);
        assert_eq!(check.product, expected);
    }

    #[test]
    fn figure_eight_is_one_set() {
        // a <-> b <-> c; b has in 2 / out 2 and gets split
        let (sfg, s) = build(&[("a", "b"), ("b", "a"), ("b", "c"), ("c", "b")]);
        let sets = assoc_loop_sets(&sfg);
        assert_eq!(sets.len(), 1);
        assert_eq!(sets[0].branches.len(), sfg.size());
        let alpha = big(&[2, 4, 6, 8, 10]);
        let check = factorization_check(&sfg, &s, &alpha, 10).unwrap();
        assert!(check.holds);
        // two loops through the shared split branch cannot be taken together
        let loops = enumerate_loops(&sfg, 10).unwrap();
        let everything = alpha.iter().fold(UniPoly::one(), |acc, a| &acc * &UniPoly::linear_factor(a));
        assert_ne!(cleared_determinant(&sfg, &loops, &alpha), everything);
    }

    #[test]
    fn path_gain_without_loops() {
        let (sfg, _) = build(&[("u1", "a"), ("a", "y1")]);
        let (num, den) = transfer_gain(&sfg, &[], &big(&[2, 4]), 0, 0, 10).unwrap();
        assert_eq!(num, UniPoly::one());
        assert_eq!(den, &lin(2) * &lin(4));
        let (num, _) = transfer_gain(&sfg, &[], &big(&[2, 4]), 1, 1, 10).unwrap();
        assert!(num.is_zero());
    }

    #[test]
    fn cofactor_drops_touching_loop() {
        // forward path u1 -> a -> y1, loop a -> b -> a touches the path at a
        // (a is split into a.1 -> a.2), loop c -> d -> c is untouched
        let (sfg, s) = build(&[
            ("u1", "a"),
            ("a", "y1"),
            ("a", "b"),
            ("b", "a"),
            ("c", "d"),
            ("d", "c"),
        ]);
        let loops = enumerate_loops(&sfg, 10).unwrap();
        assert_eq!(loops.len(), 2);
        let alpha: Vec<BigScalar> = (1..=sfg.size() as i64).map(|k| BigScalar::from(3 * k)).collect();
        let (num, _) = transfer_gain(&sfg, &loops, &alpha, 0, 0, 10).unwrap();
        // numerator = (touching loop's own branches as plain factors) * (cleared c/d loop)
        let label = |i: usize| sfg.branch_label(i);
        let idx = |l: &str| (0..sfg.size()).find(|&i| label(i) == l).unwrap();
        let f = |l: &str| UniPoly::linear_factor(&alpha[idx(l)]);
        let cd = &(&f("c->d") * &f("d->c")) - &UniPoly::one();
        let expected = &(&f("a.2->b") * &f("b->a.1")) * &cd;
        assert_eq!(num, expected);
        let cc = cross_check(&sfg, &s, &alpha, 10, 10).unwrap();
        assert!(cc.holds());
    }
}
