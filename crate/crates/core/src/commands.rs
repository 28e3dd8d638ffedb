//! The per-graph commands behind the CLI: `decide`, `oracle`, `compare`,
//! `stats` and `mason-check`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::write_graph;
use crate::graph::{build_system, standardize, RawDigraph, StandardSfg, SystemStructure};
use crate::mason::{cross_check, factorization_check, CrossCheck, DEFAULT_PATH_CAP};
use crate::oracles::{brute_force_class, maxflow_class, verify_certificate};
use crate::path_stats::{relative_order, reconstruct_single_path, verify_esqp, walk_series, RelativeOrder};
use crate::phi::{decide, generate_phi, DecideOptions, SweepMode};
use crate::report::{
    sha256_hex, ser_big_vec, Classes, DecisionSummary, OracleSummary, RunReport, Sizes,
};
use crate::poly::BigScalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Decide,
    Oracle,
    Compare,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Decide => "decide",
            Command::Oracle => "oracle",
            Command::Compare => "compare",
        }
    }
}

/// Deliberate defects for exercising the disagreement path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// The algebraic decider reports class 1 where it found class 2.
    DemoteTwoPath,
}

impl Fault {
    pub fn name(self) -> &'static str {
        match self {
            Fault::DemoteTwoPath => "demote-two-path",
        }
    }

    pub fn parse(s: &str) -> Option<Fault> {
        (s == "demote-two-path").then_some(Fault::DemoteTwoPath)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub full_sweep: bool,
    pub parallel: bool,
    pub budget: u64,
    pub fault: Option<Fault>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            full_sweep: false,
            parallel: false,
            budget: crate::oracles::DEFAULT_BUDGET,
            fault: None,
        }
    }
}

/// Exit status for an error that aborted a command.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::InvalidTerminals(_)
        | Error::UnknownNode(_)
        | Error::Parse { .. }
        | Error::MissingTerminals(_)
        | Error::Io { .. } => 1,
        _ => 2,
    }
}

pub fn input_digest(g: &RawDigraph) -> String {
    sha256_hex(write_graph(g).as_bytes())
}

fn standard(g: &RawDigraph) -> Result<(StandardSfg, SystemStructure)> {
    build_system(&standardize(g)?)
}

pub fn run(command: Command, g: &RawDigraph, opts: &RunOptions) -> Result<RunReport> {
    let (sfg, structure) = standard(g)?;
    let mut classes = Classes::default();
    let mut invariant_violations = Vec::new();

    let decision = if command != Command::Oracle {
        let mode = if opts.full_sweep {
            SweepMode::FullSweep
        } else {
            SweepMode::EarlyExit
        };
        let d = decide(
            &structure,
            DecideOptions {
                mode,
                parallel: opts.parallel,
            },
        )?;
        let mut class = d.class;
        if opts.fault == Some(Fault::DemoteTwoPath) && class == 2 {
            class = 1;
        }
        classes.algebraic = Some(class);
        Some(DecisionSummary::from_decision(&d, opts.full_sweep))
    } else {
        None
    };

    let oracle = if command != Command::Decide {
        classes.maxflow = Some(maxflow_class(g));
        Some(match brute_force_class(g, opts.budget) {
            Ok(bf) => {
                let class = bf.certificate.class();
                classes.brute_force = Some(class);
                let valid = verify_certificate(g, &bf.certificate);
                if let Err(why) = &valid {
                    invariant_violations.push(format!("class {class} certificate rejected: {why}"));
                }
                OracleSummary {
                    brute_force_status: "complete".into(),
                    expansions: bf.expansions,
                    certificate: Some(bf.certificate),
                    certificate_valid: Some(valid.is_ok()),
                }
            }
            Err(Error::SearchBudgetExceeded(b)) => OracleSummary {
                brute_force_status: "budget_exceeded".into(),
                expansions: b,
                certificate: None,
                certificate_valid: None,
            },
            Err(e) => return Err(e),
        })
    } else {
        None
    };

    Ok(RunReport {
        command: command.name().into(),
        input_digest: input_digest(g),
        sizes: Sizes {
            raw_nodes: g.nodes().len(),
            raw_edges: g.edges().len(),
            order: sfg.order(),
            size: sfg.size(),
        },
        disagreement: classes.disagree(),
        classes,
        decision,
        oracle,
        invariant_violations,
        injected_fault: opts.fault.map(|f| f.name().to_string()),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EsqpSummary {
    pub count_matches: bool,
    pub espp_matches: bool,
    pub esqp_matches: bool,
    /// Shortest paths as branch labels.
    pub shortest_paths: Vec<Vec<String>>,
    pub f10_is_walk_count: bool,
    pub f20_is_walk_count: bool,
    /// `f0 = 1` only: whether the path read off `f22` is the shortest path.
    pub reconstruction_matches: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StatsReport {
    pub input_digest: String,
    pub input: usize,
    pub output: usize,
    /// `z{i}` is the indeterminate of branch `i` in this list.
    pub branches: Vec<String>,
    pub relative_order: Option<usize>,
    pub f0: Option<String>,
    pub f10: Option<String>,
    pub f11: Option<String>,
    pub f20: Option<String>,
    pub f21: Option<String>,
    pub f22: Option<String>,
    pub esqp: Option<EsqpSummary>,
    pub disagreement: bool,
}

impl StatsReport {
    pub fn exit_code(&self) -> i32 {
        if self.disagreement {
            3
        } else {
            0
        }
    }
}

/// Series coefficients of `u_input -> y_output` (both 1-based).
pub fn run_stats(g: &RawDigraph, input: usize, output: usize) -> Result<StatsReport> {
    if !(1..=2).contains(&input) || !(1..=2).contains(&output) {
        return Err(Error::InvalidTerminals(format!(
            "terminal indices must be 1 or 2, got {input} and {output}"
        )));
    }
    let (i, j) = (input - 1, output - 1);
    let (sfg, structure) = standard(g)?;
    let mut report = StatsReport {
        input_digest: input_digest(g),
        input,
        output,
        branches: (0..sfg.size()).map(|b| sfg.branch_label(b)).collect(),
        relative_order: None,
        f0: None,
        f10: None,
        f11: None,
        f20: None,
        f21: None,
        f22: None,
        esqp: None,
        disagreement: false,
    };
    let RelativeOrder::Finite(d) = relative_order(&structure, i, j) else {
        return Ok(report);
    };
    let verdict = verify_esqp(&structure, i, j)?;
    let c = &verdict.coeffs;
    let walks = walk_series(&structure, i, j, d + 1);
    let reconstruction_matches = reconstruct_single_path(&structure, i, j, c)
        .map(|p| verdict.witnesses.len() == 1 && verdict.witnesses[0].branches == p);
    let summary = EsqpSummary {
        count_matches: verdict.count_matches,
        espp_matches: verdict.espp_matches,
        esqp_matches: verdict.esqp_matches,
        shortest_paths: verdict
            .witnesses
            .iter()
            .map(|w| w.branches.iter().map(|&b| sfg.branch_label(b)).collect())
            .collect(),
        f10_is_walk_count: c.f10() == &walks[d],
        f20_is_walk_count: c.f20() == &walks[d + 1],
        reconstruction_matches,
    };
    report.disagreement = !(verdict.passes()
        && summary.f10_is_walk_count
        && summary.f20_is_walk_count
        && reconstruction_matches != Some(false));
    report.relative_order = Some(d);
    report.f0 = Some(c.f0.to_string());
    report.f10 = Some(c.f10().to_string());
    report.f11 = Some(c.f11().to_string());
    report.f20 = Some(c.f20().to_string());
    report.f21 = Some(c.f21().to_string());
    report.f22 = Some(c.f22().to_string());
    report.esqp = Some(summary);
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FactorizationSummary {
    pub sets: Vec<Vec<String>>,
    pub factors: Vec<String>,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MasonReport {
    pub input_digest: String,
    /// `checked`, or `inapplicable` when an enumeration cap was hit.
    pub status: String,
    pub reason: Option<String>,
    /// The first structured point (family-1 base).
    #[serde(serialize_with = "ser_big_vec")]
    pub alpha: Vec<BigScalar>,
    pub cross_check: Option<CrossCheck>,
    pub factorization: Option<FactorizationSummary>,
    pub disagreement: bool,
}

impl MasonReport {
    pub fn exit_code(&self) -> i32 {
        if self.disagreement {
            3
        } else {
            0
        }
    }
}

pub fn run_mason_check(g: &RawDigraph, loop_cap: usize) -> Result<MasonReport> {
    let (sfg, structure) = standard(g)?;
    let alpha = generate_phi(structure.n)
        .into_iter()
        .next()
        .map(|p| p.alpha)
        .unwrap_or_default();
    let mut report = MasonReport {
        input_digest: input_digest(g),
        status: "checked".into(),
        reason: None,
        alpha: alpha.clone(),
        cross_check: None,
        factorization: None,
        disagreement: false,
    };
    let outcome = cross_check(&sfg, &structure, &alpha, loop_cap, DEFAULT_PATH_CAP)
        .and_then(|cc| Ok((cc, factorization_check(&sfg, &structure, &alpha, loop_cap)?)));
    match outcome {
        Ok((cc, fc)) => {
            report.disagreement = !(cc.holds() && fc.holds);
            report.cross_check = Some(cc);
            report.factorization = Some(FactorizationSummary {
                sets: fc
                    .sets
                    .iter()
                    .map(|s| s.branches.iter().map(|&b| sfg.branch_label(b)).collect())
                    .collect(),
                factors: fc.factors.iter().map(|f| f.to_string()).collect(),
                holds: fc.holds,
            });
        }
        Err(e @ Error::CapExceeded { .. }) => {
            report.status = "inapplicable".into();
            report.reason = Some(e.to_string());
        }
        Err(e) => return Err(e),
    }
    Ok(report)
}
