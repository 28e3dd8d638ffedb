//! Deterministic structured-text reports.
//!
//! Everything is routed through `serde_json::Value`, whose objects keep
//! their keys sorted, and exact integers are written as decimal strings.

use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::oracles::ClassCertificate;
use crate::phi::{BoundStats, Decision, PointKind};
use crate::poly::BigScalar;

/// Exact integers are written as decimal strings.
pub fn ser_big<S: Serializer>(v: &BigScalar, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

pub fn ser_big_vec<S: Serializer>(v: &[BigScalar], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report types serialize");
    let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
    s.push('\n');
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Node and branch counts before and after standardization.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Sizes {
    pub raw_nodes: usize,
    pub raw_edges: usize,
    /// `|D|`: nodes of the standard graph.
    pub order: usize,
    /// `‖D‖`: branches of the standard graph.
    pub size: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Classes {
    pub algebraic: Option<u8>,
    pub brute_force: Option<u8>,
    pub maxflow: Option<u8>,
}

impl Classes {
    pub fn disagree(&self) -> bool {
        let known: Vec<u8> = [self.algebraic, self.brute_force, self.maxflow]
            .into_iter()
            .flatten()
            .collect();
        known.windows(2).any(|w| w[0] != w[1])
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PointRow {
    pub index: usize,
    pub family: usize,
    pub kind: PointKind,
    #[serde(serialize_with = "ser_big_vec")]
    pub alpha: Vec<BigScalar>,
    pub rank: u8,
    pub within_bounds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecisionSummary {
    pub r: u8,
    pub n: usize,
    pub points_total: usize,
    pub points_evaluated: usize,
    pub witness_index: Option<usize>,
    #[serde(serialize_with = "ser_opt_big_vec")]
    pub witness_alpha: Option<Vec<BigScalar>>,
    pub mixed_zero_numerator: bool,
    pub bounds: BoundStats,
    /// Full-sweep runs only.
    pub table: Option<Vec<PointRow>>,
}

fn ser_opt_big_vec<S: Serializer>(v: &Option<Vec<BigScalar>>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => ser_big_vec(v, s),
        None => s.serialize_none(),
    }
}

impl DecisionSummary {
    pub fn from_decision(d: &Decision, full_sweep: bool) -> Self {
        DecisionSummary {
            r: d.r,
            n: d.n,
            points_total: d.n * d.n + 2 * d.n,
            points_evaluated: d.points_evaluated,
            witness_index: d.witness_index,
            witness_alpha: d.witness.as_ref().map(|p| p.alpha.clone()),
            mixed_zero_numerator: d.mixed_zero_numerator,
            bounds: d.bounds.clone(),
            table: full_sweep.then(|| {
                d.table
                    .iter()
                    .map(|rec| PointRow {
                        index: rec.index,
                        family: rec.point.family,
                        kind: rec.point.kind,
                        alpha: rec.point.alpha.clone(),
                        rank: rec.rank.rank,
                        within_bounds: rec.bounds.holds(),
                    })
                    .collect()
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleSummary {
    /// `complete` or `budget_exceeded`.
    pub brute_force_status: String,
    pub expansions: u64,
    pub certificate: Option<ClassCertificate>,
    pub certificate_valid: Option<bool>,
}

/// One graph through `decide`, `oracle` or `compare`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub command: String,
    /// SHA-256 of the canonical graph text.
    pub input_digest: String,
    pub sizes: Sizes,
    pub classes: Classes,
    pub decision: Option<DecisionSummary>,
    pub oracle: Option<OracleSummary>,
    pub disagreement: bool,
    pub invariant_violations: Vec<String>,
    pub injected_fault: Option<String>,
}

impl RunReport {
    /// 3 on disagreement, else 2 on an invariant violation, else 0.
    pub fn exit_code(&self) -> i32 {
        if self.disagreement {
            3
        } else if !self.invariant_violations.is_empty() {
            2
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        to_canonical_json(self)
    }
}
