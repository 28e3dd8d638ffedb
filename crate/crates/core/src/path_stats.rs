//! Low-order series coefficients of a single transfer entry
//! `c_j (sI - A)^{-1} b_i = Σ_k c_j A^k b_i / s^{k+1}` with `A = A0 + diag(z)`.
//!
//! With `d` the relative order (shortest path length in branches):
//!
//! * `c A^{d-1} b = f0`, the number of shortest paths;
//! * `c A^d b = f11(z) + f10`, the ESPP sum of the shortest paths plus the
//!   number of walks with `d + 1` branches;
//! * `c A^{d+1} b = f22(z) + f21(z) + f20`, whose quadratic part is the sum of
//!   the ESQPs `Σ z_v² + Σ_{v<w} z_v z_w` of the shortest paths.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::SystemStructure;
use crate::poly::{BigScalar, TruncPoly2};

/// Smallest `k` with `c_j A^{k-1} b_i != 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RelativeOrder {
    Finite(usize),
    /// No path from the input to the output.
    Unreachable,
}

impl RelativeOrder {
    /// The conventional integer form: `n` stands for "no path".
    pub fn or_sentinel(self, n: usize) -> usize {
        match self {
            RelativeOrder::Finite(d) => d,
            RelativeOrder::Unreachable => n,
        }
    }
}

/// Powers `A0^k b` as integer walk counts into each branch.
fn walk_counts(structure: &SystemStructure, input: usize, steps: usize) -> Vec<Vec<BigScalar>> {
    let n = structure.n;
    let mut v = vec![BigScalar::zero(); n];
    for &i in &structure.input_branches[input] {
        v[i] = BigScalar::one();
    }
    let mut out = vec![v];
    for _ in 0..steps {
        let prev = out.last().expect("non-empty");
        let next = (0..n)
            .map(|i| structure.feeders[i].iter().map(|&j| &prev[j]).sum())
            .collect();
        out.push(next);
    }
    out
}

fn observe(structure: &SystemStructure, output: usize, v: &[BigScalar]) -> BigScalar {
    structure.output_branches[output].iter().map(|&i| &v[i]).sum()
}

/// `c_output A0^k b_input` for `k = 0..=max_power`.
pub fn walk_series(structure: &SystemStructure, input: usize, output: usize, max_power: usize) -> Vec<BigScalar> {
    walk_counts(structure, input, max_power)
        .iter()
        .map(|v| observe(structure, output, v))
        .collect()
}

pub fn relative_order(structure: &SystemStructure, input: usize, output: usize) -> RelativeOrder {
    // a shortest path uses each branch at most once, so n powers suffice
    let series = walk_series(structure, input, output, structure.n.saturating_sub(1));
    match series.iter().position(|c| !c.is_zero()) {
        Some(k) => RelativeOrder::Finite(k + 1),
        None => RelativeOrder::Unreachable,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesCoeffs {
    pub d: usize,
    pub f0: BigScalar,
    /// `c A^d b` up to degree one: linear part `f11`, constant `f10`.
    pub first_order: TruncPoly2,
    /// `c A^{d+1} b` up to degree two: quadratic `f22`, linear `f21`,
    /// constant `f20`.
    pub second_order: TruncPoly2,
}

impl SeriesCoeffs {
    pub fn f11(&self) -> TruncPoly2 {
        self.first_order.homogeneous_part(1)
    }

    pub fn f10(&self) -> &BigScalar {
        self.first_order.constant_term()
    }

    pub fn f22(&self) -> TruncPoly2 {
        self.second_order.homogeneous_part(2)
    }

    pub fn f21(&self) -> TruncPoly2 {
        self.second_order.homogeneous_part(1)
    }

    pub fn f20(&self) -> &BigScalar {
        self.second_order.constant_term()
    }
}

fn apply_symbolic(structure: &SystemStructure, v: &[TruncPoly2]) -> Vec<TruncPoly2> {
    (0..structure.n)
        .map(|i| {
            let mut acc = v[i].mul_var(i);
            for &j in &structure.feeders[i] {
                acc.add_assign_ref(&v[j]);
            }
            acc
        })
        .collect()
}

/// Truncated symbolic coefficients `c A^{d-1} b`, `c A^d b`, `c A^{d+1} b`.
pub fn series_coeffs(structure: &SystemStructure, input: usize, output: usize) -> Result<SeriesCoeffs> {
    let d = match relative_order(structure, input, output) {
        RelativeOrder::Finite(d) => d,
        RelativeOrder::Unreachable => return Err(Error::NoPath { input, output }),
    };
    let n = structure.n;
    let mut v = vec![TruncPoly2::zero(); n];
    for &i in &structure.input_branches[input] {
        v[i] = TruncPoly2::constant(BigScalar::one());
    }
    let mut terms = Vec::with_capacity(d + 2);
    for k in 0..=d + 1 {
        if k + 1 >= d {
            let mut acc = TruncPoly2::zero();
            for &i in &structure.output_branches[output] {
                acc.add_assign_ref(&v[i]);
            }
            terms.push(acc);
        }
        if k <= d {
            v = apply_symbolic(structure, &v);
        }
    }
    let leading = &terms[0];
    if !leading.linear_terms().is_empty() || !leading.quadratic_terms().is_empty() {
        return Err(Error::Invariant(
            "leading series coefficient depends on z".to_string(),
        ));
    }
    Ok(SeriesCoeffs {
        d,
        f0: leading.constant_term().clone(),
        first_order: terms[1].clone(),
        second_order: terms[2].clone(),
    })
}

/// One shortest path (branch indices in order) and its ESQP.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EsqpWitness {
    pub branches: Vec<usize>,
    pub esqp: TruncPoly2,
}

pub fn esqp(branches: &[usize]) -> TruncPoly2 {
    let mut p = TruncPoly2::zero();
    for (a, &i) in branches.iter().enumerate() {
        for &j in &branches[a..] {
            p.add_quadratic(i, j, BigScalar::one());
        }
    }
    p
}

pub fn espp(branches: &[usize]) -> TruncPoly2 {
    let mut p = TruncPoly2::zero();
    for &i in branches {
        p.add_linear(i, BigScalar::one());
    }
    p
}

/// Branch-level BFS distances: `forward[i]` is the fewest branches on a walk
/// from the input ending with branch `i`; `backward[i]` the fewest branches
/// on a walk starting with `i` and entering the output.
fn layer_distances(structure: &SystemStructure, input: usize, output: usize) -> (Vec<usize>, Vec<usize>) {
    let n = structure.n;
    let mut successors = vec![Vec::new(); n];
    for i in 0..n {
        for &j in &structure.feeders[i] {
            successors[j].push(i);
        }
    }
    let bfs = |starts: &[usize], next: &dyn Fn(usize) -> Vec<usize>| {
        let mut dist = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::new();
        for &s in starts {
            dist[s] = 1;
            queue.push_back(s);
        }
        while let Some(v) = queue.pop_front() {
            for w in next(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    };
    let forward = bfs(&structure.input_branches[input], &|v| successors[v].clone());
    let backward = bfs(&structure.output_branches[output], &|v| structure.feeders[v].clone());
    (forward, backward)
}

/// Every shortest input-to-output path, enumerated through the layered DAG.
pub fn shortest_paths(structure: &SystemStructure, input: usize, output: usize) -> Vec<Vec<usize>> {
    let RelativeOrder::Finite(d) = relative_order(structure, input, output) else {
        return Vec::new();
    };
    let (forward, backward) = layer_distances(structure, input, output);
    let on_layer = |i: usize, level: usize| forward[i] == level && backward[i] == d - level + 1;
    let mut successors = vec![Vec::new(); structure.n];
    for i in 0..structure.n {
        for &j in &structure.feeders[i] {
            successors[j].push(i);
        }
    }
    let mut paths = Vec::new();
    let mut stack: Vec<Vec<usize>> = structure.input_branches[input]
        .iter()
        .filter(|&&i| on_layer(i, 1))
        .map(|&i| vec![i])
        .collect();
    stack.reverse();
    while let Some(path) = stack.pop() {
        let level = path.len();
        let last = *path.last().expect("non-empty");
        if level == d {
            if structure.output_branches[output].contains(&last) {
                paths.push(path);
            }
            continue;
        }
        let mut next: Vec<usize> = successors[last]
            .iter()
            .copied()
            .filter(|&w| on_layer(w, level + 1))
            .collect();
        next.sort_unstable();
        for &w in next.iter().rev() {
            let mut p = path.clone();
            p.push(w);
            stack.push(p);
        }
    }
    paths
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EsqpVerdict {
    pub witnesses: Vec<EsqpWitness>,
    pub coeffs: SeriesCoeffs,
    pub count_matches: bool,
    pub espp_matches: bool,
    pub esqp_matches: bool,
}

impl EsqpVerdict {
    pub fn passes(&self) -> bool {
        self.count_matches && self.espp_matches && self.esqp_matches
    }
}

/// Compares the algebraic `f0`, `f11`, `f22` with sums over independently
/// enumerated shortest paths.
pub fn verify_esqp(structure: &SystemStructure, input: usize, output: usize) -> Result<EsqpVerdict> {
    let coeffs = series_coeffs(structure, input, output)?;
    let paths = shortest_paths(structure, input, output);
    let mut esqp_sum = TruncPoly2::zero();
    let mut espp_sum = TruncPoly2::zero();
    let witnesses: Vec<EsqpWitness> = paths
        .into_iter()
        .map(|branches| {
            let q = esqp(&branches);
            esqp_sum.add_assign_ref(&q);
            espp_sum.add_assign_ref(&espp(&branches));
            EsqpWitness { branches, esqp: q }
        })
        .collect();
    Ok(EsqpVerdict {
        count_matches: coeffs.f0 == BigScalar::from(witnesses.len()),
        espp_matches: coeffs.f11() == espp_sum,
        esqp_matches: coeffs.f22() == esqp_sum,
        witnesses,
        coeffs,
    })
}

/// Recovers the unique shortest path from the square terms of `f22` when
/// `f0 = 1`, ordering its branches by BFS level from the input.
pub fn reconstruct_single_path(
    structure: &SystemStructure,
    input: usize,
    output: usize,
    coeffs: &SeriesCoeffs,
) -> Option<Vec<usize>> {
    if !coeffs.f0.is_one() {
        return None;
    }
    let (forward, _) = layer_distances(structure, input, output);
    let mut branches: Vec<usize> = coeffs
        .f22()
        .quadratic_terms()
        .keys()
        .filter(|(i, j)| i == j)
        .map(|&(i, _)| i)
        .collect();
    branches.sort_by_key(|&i| forward[i]);
    Some(branches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_system, standardize, RawDigraph};

    fn structure(edges: &[(&str, &str)]) -> SystemStructure {
        let g = RawDigraph::from_edges(edges, ["u1", "u2"], ["y1", "y2"]).unwrap();
        build_system(&standardize(&g).unwrap()).unwrap().1
    }

    fn sum_vars(vars: &[usize]) -> TruncPoly2 {
        espp(vars)
    }

    #[test]
    fn relative_orders() {
        let s = structure(&[("u1", "a"), ("a", "y1")]);
        assert_eq!(relative_order(&s, 0, 0), RelativeOrder::Finite(2));
        assert_eq!(relative_order(&s, 1, 1), RelativeOrder::Unreachable);
        assert_eq!(relative_order(&s, 1, 1).or_sentinel(s.n), 2);
        let s = structure(&[("u1", "y1")]);
        assert_eq!(relative_order(&s, 0, 0), RelativeOrder::Finite(1));
    }

    #[test]
    fn single_path_coefficients() {
        let s = structure(&[("u1", "a"), ("a", "y1")]);
        let c = series_coeffs(&s, 0, 0).unwrap();
        assert_eq!(c.d, 2);
        assert_eq!(c.f0, BigScalar::one());
        assert_eq!(c.f11(), sum_vars(&[0, 1]));
        assert!(c.f10().is_zero());
        assert_eq!(c.f22(), esqp(&[0, 1]));
        assert_eq!(c.f22().quadratic_coeff(0, 1), BigScalar::one());
        assert!(c.f20().is_zero() && c.f21().is_zero());
        assert!(verify_esqp(&s, 0, 0).unwrap().passes());
        assert_eq!(reconstruct_single_path(&s, 0, 0, &c), Some(vec![0, 1]));
    }

    #[test]
    fn two_parallel_paths() {
        let s = structure(&[("u1", "a"), ("a", "y1"), ("u1", "b"), ("b", "y1")]);
        let c = series_coeffs(&s, 0, 0).unwrap();
        assert_eq!(c.f0, BigScalar::from(2));
        assert_eq!(c.f11(), sum_vars(&[0, 1, 2, 3]));
        let mut expected = esqp(&[0, 2]);
        expected.add_assign_ref(&esqp(&[1, 3]));
        assert_eq!(c.f22(), expected);
        let v = verify_esqp(&s, 0, 0).unwrap();
        assert!(v.passes());
        assert_eq!(v.witnesses.len(), 2);
        assert_eq!(reconstruct_single_path(&s, 0, 0, &c), None);
    }

    #[test]
    fn detour_adds_walk_counts() {
        // shortest u1 -> a -> y1, longer u1 -> b -> c -> y1
        let s = structure(&[("u1", "a"), ("a", "y1"), ("u1", "b"), ("b", "c"), ("c", "y1")]);
        let c = series_coeffs(&s, 0, 0).unwrap();
        assert_eq!(c.d, 2);
        assert_eq!(c.f0, BigScalar::one());
        assert_eq!(c.f10(), &BigScalar::one());
        let walks = walk_series(&s, 0, 0, 4);
        assert_eq!(&walks[2], c.f10());
        assert_eq!(&walks[3], c.f20());
        assert!(verify_esqp(&s, 0, 0).unwrap().passes());
    }

    #[test]
    fn unreachable_pair_errors() {
        let s = structure(&[("u1", "a")]);
        assert!(matches!(series_coeffs(&s, 0, 0), Err(Error::NoPath { .. })));
        assert!(shortest_paths(&s, 0, 0).is_empty());
    }
}
