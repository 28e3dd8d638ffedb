//! Raw digraphs with four designated terminals, their normalization to a
//! standard signal flow graph, and the branch-level system matrices.
//!
//! Every edge of a standard graph is a first-order branch `x_i` with gain
//! `1/(s - z_i)`. The branch index doubles as the state index, so the
//! system matrices read directly off the head/tail incidences:
//!
//! * `A0[i][j] = 1` iff `head(x_j) = tail(x_i)`,
//! * `B[i][k] = 1` iff `tail(x_i) = u_k`,
//! * `C[j][i] = 1` iff `head(x_i) = y_j`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::error::{Error, Result};

/// A digraph with designated inputs `u1, u2` and outputs `y1, y2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawDigraph {
    nodes: BTreeSet<String>,
    edges: Vec<(String, String)>,
    inputs: [String; 2],
    outputs: [String; 2],
    /// Nodes introduced by normalization or splitting, mapped to the node of
    /// the user's graph they stand for.
    origins: BTreeMap<String, String>,
}

/// Position of a node in the canonical order: inputs, then internal nodes by
/// name, then outputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct NodeKey<'a>(u8, usize, &'a str);

impl RawDigraph {
    pub fn new(
        nodes: impl IntoIterator<Item = String>,
        edges: Vec<(String, String)>,
        inputs: [String; 2],
        outputs: [String; 2],
    ) -> Result<Self> {
        let mut nodes: BTreeSet<String> = nodes.into_iter().collect();
        nodes.extend(inputs.iter().cloned());
        nodes.extend(outputs.iter().cloned());
        let g = RawDigraph {
            nodes,
            edges,
            inputs,
            outputs,
            origins: BTreeMap::new(),
        };
        g.validate()?;
        Ok(g)
    }

    /// Builds a graph whose node set is the edge endpoints plus the terminals.
    pub fn from_edges(edges: &[(&str, &str)], inputs: [&str; 2], outputs: [&str; 2]) -> Result<Self> {
        let nodes = edges
            .iter()
            .flat_map(|(a, b)| [a.to_string(), b.to_string()])
            .collect::<Vec<_>>();
        Self::new(
            nodes,
            edges
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
            inputs.map(str::to_string),
            outputs.map(str::to_string),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let terminals: Vec<&String> = self.inputs.iter().chain(self.outputs.iter()).collect();
        let distinct: BTreeSet<&String> = terminals.iter().copied().collect();
        if distinct.len() != 4 {
            return Err(Error::InvalidTerminals(format!(
                "inputs {:?}, outputs {:?}",
                self.inputs, self.outputs
            )));
        }
        for t in terminals {
            if !self.nodes.contains(t) {
                return Err(Error::InvalidTerminals(format!("`{t}` is not a node")));
            }
        }
        for (a, b) in &self.edges {
            for v in [a, b] {
                if !self.nodes.contains(v) {
                    return Err(Error::UnknownNode(v.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    pub fn edges(&self) -> &[(String, String)] {
        &self.edges
    }

    pub fn inputs(&self) -> &[String; 2] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[String; 2] {
        &self.outputs
    }

    pub fn origins(&self) -> &BTreeMap<String, String> {
        &self.origins
    }

    /// The user-graph node that `name` stands for.
    pub fn origin_of<'a>(&'a self, name: &'a str) -> &'a str {
        self.origins.get(name).map(String::as_str).unwrap_or(name)
    }

    /// Adds an edge between existing nodes.
    pub fn add_edge(&mut self, tail: &str, head: &str) -> Result<()> {
        for v in [tail, head] {
            if !self.nodes.contains(v) {
                return Err(Error::UnknownNode(v.to_string()));
            }
        }
        self.edges.push((tail.to_string(), head.to_string()));
        Ok(())
    }

    /// Removes the edge at `index` in [`Self::edges`] order.
    pub fn remove_edge(&mut self, index: usize) -> (String, String) {
        self.edges.remove(index)
    }

    pub fn key<'a>(&self, name: &'a str) -> NodeKey<'a> {
        if let Some(k) = self.inputs.iter().position(|u| u == name) {
            NodeKey(0, k, "")
        } else if let Some(k) = self.outputs.iter().position(|y| y == name) {
            NodeKey(2, k, "")
        } else {
            NodeKey(1, 0, name)
        }
    }

    /// Nodes in canonical order: `u1, u2`, internal nodes by name, `y1, y2`.
    pub fn canonical_nodes(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.nodes.iter().map(String::as_str).collect();
        v.sort_by_key(|n| self.key(n));
        v
    }

    pub fn in_degrees(&self) -> HashMap<&str, usize> {
        let mut d: HashMap<&str, usize> = self.nodes.iter().map(|n| (n.as_str(), 0)).collect();
        for (_, b) in &self.edges {
            *d.get_mut(b.as_str()).expect("validated endpoint") += 1;
        }
        d
    }

    pub fn out_degrees(&self) -> HashMap<&str, usize> {
        let mut d: HashMap<&str, usize> = self.nodes.iter().map(|n| (n.as_str(), 0)).collect();
        for (a, _) in &self.edges {
            *d.get_mut(a.as_str()).expect("validated endpoint") += 1;
        }
        d
    }

    /// Adjacency view with nodes indexed in canonical order and successor
    /// lists sorted by that order.
    pub fn indexed(&self) -> IndexedGraph {
        let names: Vec<String> = self.canonical_nodes().into_iter().map(String::from).collect();
        let index: HashMap<&str, usize> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let mut succ = vec![Vec::new(); names.len()];
        let mut pred = vec![Vec::new(); names.len()];
        for (a, b) in &self.edges {
            let (a, b) = (index[a.as_str()], index[b.as_str()]);
            succ[a].push(b);
            pred[b].push(a);
        }
        for list in succ.iter_mut().chain(pred.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        IndexedGraph {
            inputs: [index[self.inputs[0].as_str()], index[self.inputs[1].as_str()]],
            outputs: [index[self.outputs[0].as_str()], index[self.outputs[1].as_str()]],
            names,
            succ,
            pred,
        }
    }

    fn fresh_name(&self, base: &str, sep: &str) -> String {
        let mut candidate = format!("{base}{sep}");
        let mut k = 0usize;
        while self.nodes.contains(&candidate) {
            k += 1;
            candidate = format!("{base}{sep}{k}");
        }
        candidate
    }

    fn insert_derived(&mut self, name: String, stands_for: &str) {
        let origin = self.origin_of(stands_for).to_string();
        self.nodes.insert(name.clone());
        self.origins.insert(name, origin);
    }

    fn sort_edges(&mut self) {
        self.edges.sort();
    }
}

/// Realizes the standing assumptions of a standard signal flow graph.
///
/// * each self-loop `v -> v` becomes `v -> w -> v` with a fresh `w`;
/// * each repeated edge `a -> b` beyond the first becomes `a -> w -> b`;
/// * an input with incoming edges is fed by a fresh input `u'` through
///   `u' -> u`, and an output with outgoing edges feeds a fresh output
///   `y'` through `y -> y'`.
///
/// Fresh names contain characters outside `[A-Za-z0-9_]`, so they never
/// collide with parsed identifiers. The result lists its edges sorted.
pub fn normalize(raw: &RawDigraph) -> Result<RawDigraph> {
    raw.validate()?;
    let mut g = raw.clone();
    let old_edges = std::mem::take(&mut g.edges);
    let mut seen: HashSet<(String, String)> = HashSet::new();
    for (a, b) in old_edges {
        if a == b || seen.contains(&(a.clone(), b.clone())) {
            let w = g.fresh_name("~", "");
            g.insert_derived(w.clone(), &a);
            g.edges.push((a.clone(), w.clone()));
            g.edges.push((w, b));
        } else {
            seen.insert((a.clone(), b.clone()));
            g.edges.push((a, b));
        }
    }

    for k in 0..2 {
        let u = g.inputs[k].clone();
        if g.edges.iter().any(|(_, b)| *b == u) {
            let fresh = g.fresh_name(&u, "'");
            g.insert_derived(fresh.clone(), &u);
            g.edges.push((fresh.clone(), u));
            g.inputs[k] = fresh;
        }
    }
    for k in 0..2 {
        let y = g.outputs[k].clone();
        if g.edges.iter().any(|(a, _)| *a == y) {
            let fresh = g.fresh_name(&y, "'");
            g.insert_derived(fresh.clone(), &y);
            g.edges.push((y, fresh.clone()));
            g.outputs[k] = fresh;
        }
    }
    g.sort_edges();
    Ok(g)
}

/// Replaces every non-terminal node with in-degree > 1 and out-degree > 1
/// by a branch `v.1 -> v.2`; incoming edges land on `v.1`, outgoing edges
/// leave from `v.2`.
pub fn split_nodes(g: &RawDigraph) -> RawDigraph {
    let indeg = g.in_degrees();
    let outdeg = g.out_degrees();
    let terminals: HashSet<&String> = g.inputs.iter().chain(g.outputs.iter()).collect();
    let to_split: Vec<String> = g
        .nodes
        .iter()
        .filter(|v| !terminals.contains(v) && indeg[v.as_str()] > 1 && outdeg[v.as_str()] > 1)
        .cloned()
        .collect();
    if to_split.is_empty() {
        return g.clone();
    }
    let mut out = g.clone();
    let mut halves: HashMap<String, (String, String)> = HashMap::new();
    for v in &to_split {
        let first = out.fresh_name(v, ".1");
        out.insert_derived(first.clone(), v);
        let second = out.fresh_name(v, ".2");
        out.insert_derived(second.clone(), v);
        halves.insert(v.clone(), (first, second));
    }
    for v in &to_split {
        out.nodes.remove(v);
        out.origins.remove(v);
    }
    let mut edges: Vec<(String, String)> = out
        .edges
        .iter()
        .map(|(a, b)| {
            let a = halves.get(a).map(|h| h.1.clone()).unwrap_or_else(|| a.clone());
            let b = halves.get(b).map(|h| h.0.clone()).unwrap_or_else(|| b.clone());
            (a, b)
        })
        .collect();
    edges.extend(halves.into_values());
    out.edges = edges;
    out.sort_edges();
    out
}

/// `split_nodes(normalize(raw))`.
pub fn standardize(raw: &RawDigraph) -> Result<RawDigraph> {
    Ok(split_nodes(&normalize(raw)?))
}

/// Integer adjacency lists over canonically ordered nodes.
#[derive(Clone, Debug)]
pub struct IndexedGraph {
    pub names: Vec<String>,
    pub succ: Vec<Vec<usize>>,
    pub pred: Vec<Vec<usize>>,
    pub inputs: [usize; 2],
    pub outputs: [usize; 2],
}

impl IndexedGraph {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Nodes reachable from `sources` without entering `blocked` nodes.
    pub fn reachable(&self, sources: &[usize], blocked: &[bool]) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack: Vec<usize> = sources.iter().copied().filter(|&s| !blocked[s]).collect();
        for &s in &stack {
            seen[s] = true;
        }
        while let Some(v) = stack.pop() {
            for &w in &self.succ[v] {
                if !seen[w] && !blocked[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Nodes from which some node of `targets` is reachable.
    pub fn coreachable(&self, targets: &[usize], blocked: &[bool]) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack: Vec<usize> = targets.iter().copied().filter(|&t| !blocked[t]).collect();
        for &t in &stack {
            seen[t] = true;
        }
        while let Some(v) = stack.pop() {
            for &w in &self.pred[v] {
                if !seen[w] && !blocked[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }
}

/// A first-order branch of the standard graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Branch {
    pub tail: usize,
    pub head: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SfgNode {
    pub name: String,
    /// Node of the user's graph this node stands for.
    pub origin: String,
    pub in_degree: usize,
    pub out_degree: usize,
}

/// The branch-indexed standard signal flow graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StandardSfg {
    pub nodes: Vec<SfgNode>,
    pub branches: Vec<Branch>,
    pub inputs: [usize; 2],
    pub outputs: [usize; 2],
}

impl StandardSfg {
    /// Number of branches, `‖D‖`.
    pub fn size(&self) -> usize {
        self.branches.len()
    }

    /// Number of nodes, `|D|`.
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn out_branches(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.branches
            .iter()
            .enumerate()
            .filter(move |(_, b)| b.tail == v)
            .map(|(i, _)| i)
    }

    /// Successor adjacency by node: `(head node, branch index)` per node.
    pub fn node_adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (i, b) in self.branches.iter().enumerate() {
            adj[b.tail].push((b.head, i));
        }
        adj
    }

    pub fn branch_label(&self, i: usize) -> String {
        let b = self.branches[i];
        format!("{}->{}", self.nodes[b.tail].name, self.nodes[b.head].name)
    }
}

/// The 0/1 structure `(A0, B, C)` of the branch-level state-space system.
///
/// `A0` is kept as row adjacency lists; the diagonal slots are supplied per
/// evaluation (a numeric point) or symbolically (the indeterminates).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemStructure {
    pub n: usize,
    /// `feeders[i]` lists every `j` with `A0[i][j] = 1`, ascending.
    pub feeders: Vec<Vec<usize>>,
    /// Branches leaving `u_k` (the support of column `k` of `B`).
    pub input_branches: [Vec<usize>; 2],
    /// Branches entering `y_j` (the support of row `j` of `C`).
    pub output_branches: [Vec<usize>; 2],
}

impl SystemStructure {
    pub fn a0(&self, i: usize, j: usize) -> bool {
        self.feeders[i].binary_search(&j).is_ok()
    }

    pub fn a0_dense(&self) -> Vec<Vec<u8>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.a0(i, j) as u8).collect())
            .collect()
    }

    /// `B` as an `n x 2` 0/1 matrix.
    pub fn b_dense(&self) -> Vec<[u8; 2]> {
        (0..self.n)
            .map(|i| [0, 1].map(|k| self.input_branches[k].contains(&i) as u8))
            .collect()
    }

    /// `C` as a `2 x n` 0/1 matrix.
    pub fn c_dense(&self) -> [Vec<u8>; 2] {
        [0, 1].map(|j| {
            (0..self.n)
                .map(|i| self.output_branches[j].contains(&i) as u8)
                .collect()
        })
    }

    pub fn a0_ones(&self) -> usize {
        self.feeders.iter().map(Vec::len).sum()
    }
}

/// Indexes the edges of a normalized, split graph as branches and reads off
/// `(A0, B, C)`.
///
/// Branches are ordered by `(tail, head)` in the canonical node order.
pub fn build_system(g: &RawDigraph) -> Result<(StandardSfg, SystemStructure)> {
    g.validate()?;
    let names = g.canonical_nodes();
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let mut branches: Vec<Branch> = g
        .edges
        .iter()
        .map(|(a, b)| Branch {
            tail: index[a.as_str()],
            head: index[b.as_str()],
        })
        .collect();
    branches.sort_by_key(|b| (b.tail, b.head));

    let mut nodes: Vec<SfgNode> = names
        .iter()
        .map(|n| SfgNode {
            name: n.to_string(),
            origin: g.origin_of(n).to_string(),
            in_degree: 0,
            out_degree: 0,
        })
        .collect();
    for (i, b) in branches.iter().enumerate() {
        if b.tail == b.head {
            return Err(Error::NotStandard(format!("self-loop at `{}`", names[b.tail])));
        }
        if i > 0 && branches[i - 1] == *b {
            return Err(Error::NotStandard(format!(
                "parallel branches {} -> {}",
                names[b.tail], names[b.head]
            )));
        }
        nodes[b.tail].out_degree += 1;
        nodes[b.head].in_degree += 1;
    }
    let inputs = [index[g.inputs[0].as_str()], index[g.inputs[1].as_str()]];
    let outputs = [index[g.outputs[0].as_str()], index[g.outputs[1].as_str()]];
    for &u in &inputs {
        if nodes[u].in_degree > 0 {
            return Err(Error::NotStandard(format!("input `{}` has incoming branches", names[u])));
        }
    }
    for &y in &outputs {
        if nodes[y].out_degree > 0 {
            return Err(Error::NotStandard(format!("output `{}` has outgoing branches", names[y])));
        }
    }
    for (v, node) in nodes.iter().enumerate() {
        let terminal = inputs.contains(&v) || outputs.contains(&v);
        if !terminal && node.in_degree > 1 && node.out_degree > 1 {
            return Err(Error::NotStandard(format!("node `{}` needs splitting", node.name)));
        }
    }

    let n = branches.len();
    let mut by_head: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (j, b) in branches.iter().enumerate() {
        by_head[b.head].push(j);
    }
    let feeders: Vec<Vec<usize>> = branches.iter().map(|b| by_head[b.tail].clone()).collect();
    let input_branches = inputs.map(|u| (0..n).filter(|&i| branches[i].tail == u).collect());
    let output_branches = outputs.map(|y| (0..n).filter(|&i| branches[i].head == y).collect());

    Ok((
        StandardSfg {
            nodes,
            branches,
            inputs,
            outputs,
        },
        SystemStructure {
            n,
            feeders,
            input_branches,
            output_branches,
        },
    ))
}
