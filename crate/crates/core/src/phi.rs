//! The structured evaluation points `Φ3` and the rank decision over them.
//!
//! For `n` branches, family 1 is the base point `α_i = n·i` together with
//! each single-coordinate perturbation by `-1` and then by `+1`; family
//! `j >= 2` is the base point `α_i = (n·i)^j` with each single-coordinate
//! perturbation by `-1`. That gives `(2n + 1) + (n - 1)(n + 1) = n² + 2n`
//! points. The system rank `r` is the largest pointwise rank of `T(s, α)`.

use num_traits::{One, Pow};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::graph::SystemStructure;
use crate::poly::BigScalar;
use crate::resolvent::{bound_check, classify_numerator, faddeev, BoundCheck, CoefficientBounds, PointRank};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "coordinate", rename_all = "lowercase")]
pub enum PointKind {
    Base,
    /// Coordinate `k` (1-based) lowered by one.
    Minus(usize),
    /// Coordinate `k` (1-based) raised by one.
    Plus(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiPoint {
    pub alpha: Vec<BigScalar>,
    pub family: usize,
    pub kind: PointKind,
}

fn family_base(n: usize, j: usize) -> Vec<BigScalar> {
    (1..=n)
        .map(|i| Pow::pow(&BigScalar::from(n * i), j as u64))
        .collect()
}

fn perturbed(base: &[BigScalar], k: usize, up: bool) -> Vec<BigScalar> {
    let mut alpha = base.to_vec();
    if up {
        alpha[k] += BigScalar::one();
    } else {
        alpha[k] -= BigScalar::one();
    }
    alpha
}

/// All `n² + 2n` points, family 1 first; empty for `n = 0`.
pub fn generate_phi(n: usize) -> Vec<PhiPoint> {
    let mut points = Vec::with_capacity(n * n + 2 * n);
    for j in 1..=n {
        let base = family_base(n, j);
        points.push(PhiPoint {
            alpha: base.clone(),
            family: j,
            kind: PointKind::Base,
        });
        for k in 0..n {
            points.push(PhiPoint {
                alpha: perturbed(&base, k, false),
                family: j,
                kind: PointKind::Minus(k + 1),
            });
        }
        if j == 1 {
            for k in 0..n {
                points.push(PhiPoint {
                    alpha: perturbed(&base, k, true),
                    family: j,
                    kind: PointKind::Plus(k + 1),
                });
            }
        }
    }
    points
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SweepMode {
    /// Stop at the first rank-2 point.
    #[default]
    EarlyExit,
    /// Evaluate and record every point.
    FullSweep,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DecideOptions {
    pub mode: SweepMode,
    /// Evaluate points on the rayon pool; the reduction stays in point order.
    pub parallel: bool,
}

/// Evaluation record for one point of the sweep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointRecord {
    pub index: usize,
    pub point: PhiPoint,
    pub rank: PointRank,
    pub bounds: BoundCheck,
}

/// Aggregate bound statistics over the evaluated points.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BoundStats {
    pub points_checked: usize,
    #[serde(serialize_with = "crate::report::ser_big")]
    pub a_max: BigScalar,
    #[serde(serialize_with = "crate::report::ser_big")]
    pub rbar_max: BigScalar,
    /// Indices (in generation order) of points that broke a bound.
    pub violations: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    pub class: u8,
    pub r: u8,
    pub n: usize,
    /// Lowest-indexed rank-2 point.
    pub witness: Option<PhiPoint>,
    pub witness_index: Option<usize>,
    /// Every evaluated point in full-sweep mode; empty in early-exit mode.
    pub table: Vec<PointRecord>,
    pub points_evaluated: usize,
    pub bounds: BoundStats,
    /// Some points gave `N = 0` and others did not.
    pub mixed_zero_numerator: bool,
}

fn evaluate(
    structure: &SystemStructure,
    index: usize,
    point: &PhiPoint,
    bounds: &CoefficientBounds,
) -> Result<PointRecord> {
    let (cp, nm) = faddeev(structure, &point.alpha)?;
    let check = bound_check(&cp, &nm, bounds);
    Ok(PointRecord {
        index,
        point: point.clone(),
        rank: classify_numerator(point.alpha.clone(), &nm),
        bounds: check,
    })
}

/// Sweeps `Φ3` and returns `r` as the class.
pub fn decide(structure: &SystemStructure, options: DecideOptions) -> Result<Decision> {
    let n = structure.n;
    let points = generate_phi(n);
    let bounds = CoefficientBounds::for_size(n);

    let records: Vec<PointRecord> = if options.parallel {
        let all: Result<Vec<PointRecord>> = points
            .par_iter()
            .enumerate()
            .map(|(i, p)| evaluate(structure, i, p, &bounds))
            .collect();
        let mut all = all?;
        if options.mode == SweepMode::EarlyExit {
            if let Some(pos) = all.iter().position(|r| r.rank.rank == 2) {
                all.truncate(pos + 1);
            }
        }
        all
    } else {
        let mut out = Vec::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            let rec = evaluate(structure, i, p, &bounds)?;
            let stop = rec.rank.rank == 2 && options.mode == SweepMode::EarlyExit;
            out.push(rec);
            if stop {
                break;
            }
        }
        out
    };

    let mut stats = BoundStats::default();
    let mut r = 0u8;
    let mut witness_index = None;
    let mut zero_seen = false;
    let mut nonzero_seen = false;
    for rec in &records {
        stats.points_checked += 1;
        if rec.bounds.a_max > stats.a_max {
            stats.a_max = rec.bounds.a_max.clone();
        }
        if rec.bounds.rbar_max > stats.rbar_max {
            stats.rbar_max = rec.bounds.rbar_max.clone();
        }
        if !rec.bounds.holds() {
            stats.violations.push(rec.index);
        }
        if rec.rank.rank == 0 {
            zero_seen = true;
        } else {
            nonzero_seen = true;
        }
        if rec.rank.rank == 2 && witness_index.is_none() {
            witness_index = Some(rec.index);
        }
        r = r.max(rec.rank.rank);
    }
    let witness = witness_index.map(|i| points[i].clone());
    let points_evaluated = records.len();
    Ok(Decision {
        class: r,
        r,
        n,
        witness,
        witness_index,
        table: if options.mode == SweepMode::FullSweep {
            records
        } else {
            Vec::new()
        },
        points_evaluated,
        bounds: stats,
        mixed_zero_numerator: zero_seen && nonzero_seen,
    })
}

/// Random points whose rank exceeds the system rank `r`.
///
/// Each point has distinct coordinates drawn from `[1, n²]`.
pub fn subordination_violations(
    structure: &SystemStructure,
    r: u8,
    seed: u64,
    count: usize,
) -> Result<Vec<PointRank>> {
    let n = structure.n;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool: Vec<u64> = (1..=(n * n) as u64).collect();
    let mut violations = Vec::new();
    for _ in 0..count {
        let alpha: Vec<BigScalar> = pool
            .choose_multiple(&mut rng, n)
            .map(|&v| BigScalar::from(v))
            .collect();
        let (_, nm) = faddeev(structure, &alpha)?;
        let pr = classify_numerator(alpha, &nm);
        if pr.rank > r {
            violations.push(pr);
        }
    }
    Ok(violations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_system, standardize, RawDigraph};

    fn alphas(points: &[PhiPoint]) -> Vec<Vec<i64>> {
        points
            .iter()
            .map(|p| p.alpha.iter().map(|a| i64::try_from(a).unwrap()).collect())
            .collect()
    }

    fn structure(edges: &[(&str, &str)]) -> SystemStructure {
        let g = RawDigraph::from_edges(edges, ["u1", "u2"], ["y1", "y2"]).unwrap();
        build_system(&standardize(&g).unwrap()).unwrap().1
    }

    #[test]
    fn phi_for_one_branch() {
        let pts = generate_phi(1);
        assert_eq!(alphas(&pts), vec![vec![1], vec![0], vec![2]]);
    }

    #[test]
    fn phi_for_two_branches() {
        let pts = generate_phi(2);
        assert_eq!(
            alphas(&pts),
            vec![
                vec![2, 4],
                vec![1, 4],
                vec![2, 3],
                vec![3, 4],
                vec![2, 5],
                vec![4, 16],
                vec![3, 16],
                vec![4, 15],
            ]
        );
        assert_eq!(pts[3].kind, PointKind::Plus(1));
        assert_eq!(pts[6].family, 2);
    }

    #[test]
    fn phi_family_sizes_for_three() {
        let pts = generate_phi(3);
        assert_eq!(pts.len(), 15);
        for (family, size) in [(1, 7), (2, 4), (3, 4)] {
            assert_eq!(pts.iter().filter(|p| p.family == family).count(), size);
        }
    }

    #[test]
    fn phi_cardinality() {
        for n in 1..=12 {
            assert_eq!(generate_phi(n).len(), n * n + 2 * n);
        }
        assert!(generate_phi(0).is_empty());
    }

    #[test]
    fn disjoint_edges_decide_two_at_base() {
        let s = structure(&[("u1", "y1"), ("u2", "y2")]);
        let d = decide(&s, DecideOptions::default()).unwrap();
        assert_eq!(d.class, 2);
        assert_eq!(d.witness_index, Some(0));
        assert_eq!(d.witness.unwrap().kind, PointKind::Base);
        assert_eq!(d.points_evaluated, 1);
    }

    #[test]
    fn split_star_is_rank_one_everywhere() {
        let s = structure(&[("u1", "v"), ("u2", "v"), ("v", "y1"), ("v", "y2")]);
        let d = decide(
            &s,
            DecideOptions {
                mode: SweepMode::FullSweep,
                parallel: false,
            },
        )
        .unwrap();
        assert_eq!(d.class, 1);
        assert_eq!(d.table.len(), 35);
        assert!(d.table.iter().all(|r| r.rank.rank == 1));
        assert!(d.witness.is_none());
    }

    #[test]
    fn no_branches_is_class_zero() {
        let s = structure(&[]);
        let d = decide(&s, DecideOptions::default()).unwrap();
        assert_eq!(d.class, 0);
        assert_eq!(d.points_evaluated, 0);
    }

    #[test]
    fn parallel_matches_sequential() {
        let s = structure(&[("u1", "a"), ("a", "y1"), ("u2", "a"), ("b", "y2"), ("u2", "b")]);
        for mode in [SweepMode::EarlyExit, SweepMode::FullSweep] {
            let seq = decide(&s, DecideOptions { mode, parallel: false }).unwrap();
            let par = decide(&s, DecideOptions { mode, parallel: true }).unwrap();
            assert_eq!(seq, par);
        }
    }

    #[test]
    fn random_points_never_exceed_rank() {
        let s = structure(&[("u1", "v"), ("u2", "v"), ("v", "y1"), ("v", "y2")]);
        assert!(subordination_violations(&s, 1, 7, 100).unwrap().is_empty());
    }
}
