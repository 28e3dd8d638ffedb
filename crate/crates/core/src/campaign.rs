//! Comparison campaigns: exhaustive and seeded random instance streams run
//! through `compare`, with greedy minimization of any disagreement.

use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::{run, Command, RunOptions};
use crate::error::{Error, Result};
use crate::format::write_graph;
use crate::graph::RawDigraph;
use crate::report::{sha256_hex, to_canonical_json};

pub const INPUTS: [&str; 2] = ["u1", "u2"];
pub const OUTPUTS: [&str; 2] = ["y1", "y2"];

/// Branch counts up to this size have their bound checks tallied.
pub const BOUND_CHECK_MAX_N: usize = 10;

fn internal_names(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("v{i}")).collect()
}

fn build(internal: &[String], edges: Vec<(String, String)>) -> RawDigraph {
    RawDigraph::new(
        internal.iter().cloned(),
        edges,
        INPUTS.map(String::from),
        OUTPUTS.map(String::from),
    )
    .expect("generated terminals are distinct")
}

/// Ordered pairs allowed in the exhaustive stream for `k` nodes.
///
/// On the four terminals alone every ordered pair of distinct nodes is
/// allowed. With internal nodes the inputs are sources and the outputs are
/// sinks, and internal nodes may carry self-loops.
fn exhaustive_pairs(k: usize) -> Vec<(String, String)> {
    let internal = internal_names(k - 4);
    if internal.is_empty() {
        let all: Vec<&str> = INPUTS.iter().chain(OUTPUTS.iter()).copied().collect();
        return all
            .iter()
            .flat_map(|a| all.iter().filter(move |b| a != *b).map(move |b| (a.to_string(), b.to_string())))
            .collect();
    }
    let tails: Vec<String> = INPUTS.iter().map(|s| s.to_string()).chain(internal.iter().cloned()).collect();
    let heads: Vec<String> = internal.iter().cloned().chain(OUTPUTS.iter().map(|s| s.to_string())).collect();
    tails
        .iter()
        .flat_map(|a| heads.iter().map(move |b| (a.clone(), b.clone())))
        .collect()
}

/// Number of graphs `exhaustive_graph(max_nodes, _)` can index.
pub fn exhaustive_count(max_nodes: usize) -> usize {
    (4..=max_nodes).map(|k| 1usize << exhaustive_pairs(k).len()).sum()
}

/// The `index`-th graph of the exhaustive stream over 4 to `max_nodes`
/// nodes: each node count in turn, edge subsets in binary counting order.
pub fn exhaustive_graph(max_nodes: usize, mut index: usize) -> RawDigraph {
    for k in 4..=max_nodes {
        let pairs = exhaustive_pairs(k);
        let total = 1usize << pairs.len();
        if index < total {
            let edges = pairs
                .into_iter()
                .enumerate()
                .filter(|(bit, _)| index >> bit & 1 == 1)
                .map(|(_, e)| e)
                .collect();
            return build(&internal_names(k - 4), edges);
        }
        index -= total;
    }
    panic!("exhaustive index out of range");
}

/// Seeded random graph on 4 to `max_nodes` nodes with up to `max_edges`
/// edges. Simple graphs draw distinct ordered pairs of distinct nodes;
/// otherwise pairs are drawn independently, self-loops and repeats included.
pub fn random_graph(seed: u64, index: u64, max_nodes: usize, max_edges: usize, simple: bool) -> RawDigraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let k = rng.gen_range(4..=max_nodes.max(4));
    let internal = internal_names(k - 4);
    let names: Vec<String> = INPUTS
        .iter()
        .chain(OUTPUTS.iter())
        .map(|s| s.to_string())
        .chain(internal.iter().cloned())
        .collect();
    let pair = |a: usize, b: usize| (names[a].clone(), names[b].clone());
    let edges = if simple {
        let m = rng.gen_range(0..=max_edges.min(k * (k - 1)));
        sample(&mut rng, k * (k - 1), m)
            .into_iter()
            .map(|p| {
                let (a, b) = (p / (k - 1), p % (k - 1));
                pair(a, if b >= a { b + 1 } else { b })
            })
            .collect()
    } else {
        let m = rng.gen_range(0..=max_edges);
        (0..m)
            .map(|_| pair(rng.gen_range(0..k), rng.gen_range(0..k)))
            .collect()
    };
    build(&internal, edges)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CampaignConfig {
    pub seed: u64,
    pub count: u64,
    pub max_nodes: usize,
    pub max_edges: usize,
    /// Draw simple random graphs (no self-loops, no repeated edges).
    pub simple: bool,
    /// Prefix the random stream with every exhaustive graph on up to this
    /// many nodes.
    pub exhaustive_up_to: Option<usize>,
    pub run: RunOptions,
    /// Counterexamples are written here when set.
    pub artifact_dir: Option<PathBuf>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            seed: 1,
            count: 1000,
            max_nodes: 8,
            max_edges: 10,
            simple: true,
            exhaustive_up_to: None,
            run: RunOptions::default(),
            artifact_dir: None,
        }
    }
}

/// Per-instance digest line: `index digest classes`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Outcome {
    index: usize,
    digest: String,
    classes: [Option<u8>; 3],
    n: usize,
    disagreement: bool,
    invariant_violations: Vec<String>,
    bound_violations: Vec<usize>,
    points_evaluated: usize,
    budget_exceeded: bool,
    error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub class_0: u64,
    pub class_1: u64,
    pub class_2: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundViolation {
    pub instance: usize,
    pub n: usize,
    pub points: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub instance: usize,
    pub original_edges: usize,
    pub minimized_edges: usize,
    pub graph: String,
    pub minimized_digest: String,
    /// File names inside the artifact directory.
    pub files: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CampaignReport {
    pub seed: u64,
    pub count: u64,
    pub max_nodes: usize,
    pub max_edges: usize,
    pub simple: bool,
    pub exhaustive_up_to: Option<usize>,
    pub exhaustive_instances: usize,
    pub instances: usize,
    /// SHA-256 over the ordered per-instance digests and classes.
    pub campaign_digest: String,
    pub agreements: u64,
    pub disagreements: Vec<usize>,
    pub tally: Tally,
    pub brute_force_budget_exceeded: u64,
    pub points_evaluated: u64,
    pub bound_checked_instances: u64,
    pub bound_violations: Vec<BoundViolation>,
    pub invariant_violations: Vec<String>,
    pub errors: Vec<String>,
    pub counterexamples: Vec<Counterexample>,
    pub injected_fault: Option<String>,
}

impl CampaignReport {
    pub fn exit_code(&self) -> i32 {
        if !self.disagreements.is_empty() {
            3
        } else if !self.invariant_violations.is_empty() || !self.errors.is_empty() {
            2
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        to_canonical_json(self)
    }
}

pub fn instance(config: &CampaignConfig, index: usize) -> RawDigraph {
    let exhaustive = config.exhaustive_up_to.map_or(0, exhaustive_count);
    if index < exhaustive {
        exhaustive_graph(config.exhaustive_up_to.expect("nonzero count"), index)
    } else {
        random_graph(
            config.seed,
            (index - exhaustive) as u64,
            config.max_nodes,
            config.max_edges,
            config.simple,
        )
    }
}

fn evaluate(index: usize, g: &RawDigraph, opts: &RunOptions) -> Outcome {
    let digest = crate::commands::input_digest(g);
    match run(Command::Compare, g, opts) {
        Ok(r) => {
            let decision = r.decision.as_ref().expect("compare decides");
            let oracle = r.oracle.as_ref().expect("compare runs oracles");
            Outcome {
                index,
                digest,
                classes: [r.classes.algebraic, r.classes.brute_force, r.classes.maxflow],
                n: decision.n,
                disagreement: r.disagreement,
                invariant_violations: r.invariant_violations.clone(),
                bound_violations: decision.bounds.violations.clone(),
                points_evaluated: decision.points_evaluated,
                budget_exceeded: oracle.brute_force_status != "complete",
                error: None,
            }
        }
        Err(e) => Outcome {
            index,
            digest,
            classes: [None; 3],
            n: 0,
            disagreement: false,
            invariant_violations: Vec::new(),
            bound_violations: Vec::new(),
            points_evaluated: 0,
            budget_exceeded: false,
            error: Some(e.to_string()),
        },
    }
}

fn disagrees(g: &RawDigraph, opts: &RunOptions) -> bool {
    run(Command::Compare, g, opts).is_ok_and(|r| r.disagreement)
}

/// Greedy single-edge deletion: drop any edge whose removal keeps the
/// disagreement, until no single deletion does.
pub fn minimize(g: &RawDigraph, opts: &RunOptions) -> RawDigraph {
    let mut current = g.clone();
    let mut i = 0;
    while i < current.edges().len() {
        let mut candidate = current.clone();
        candidate.remove_edge(i);
        if disagrees(&candidate, opts) {
            current = candidate;
        } else {
            i += 1;
        }
    }
    current
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn persist(dir: &Path, instance: usize, original: &RawDigraph, minimized: &RawDigraph, opts: &RunOptions) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    let stem = format!("counterexample-{instance}");
    let files = vec![
        format!("{stem}.graph"),
        format!("{stem}.original.graph"),
        format!("{stem}.json"),
    ];
    write_file(&dir.join(&files[0]), &write_graph(minimized))?;
    write_file(&dir.join(&files[1]), &write_graph(original))?;
    let report = run(Command::Compare, minimized, opts)?;
    write_file(&dir.join(&files[2]), &report.to_json())?;
    Ok(files)
}

/// Runs every instance through `compare` in parallel and reduces the
/// outcomes in index order.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignReport> {
    let exhaustive = config.exhaustive_up_to.map_or(0, exhaustive_count);
    let total = exhaustive + config.count as usize;
    let mut opts = config.run;
    // instances are the unit of parallelism
    opts.parallel = false;
    let outcomes: Vec<Outcome> = (0..total)
        .into_par_iter()
        .map(|i| evaluate(i, &instance(config, i), &opts))
        .collect();

    let mut report = CampaignReport {
        seed: config.seed,
        count: config.count,
        max_nodes: config.max_nodes,
        max_edges: config.max_edges,
        simple: config.simple,
        exhaustive_up_to: config.exhaustive_up_to,
        exhaustive_instances: exhaustive,
        instances: total,
        campaign_digest: String::new(),
        agreements: 0,
        disagreements: Vec::new(),
        tally: Tally::default(),
        brute_force_budget_exceeded: 0,
        points_evaluated: 0,
        bound_checked_instances: 0,
        bound_violations: Vec::new(),
        invariant_violations: Vec::new(),
        errors: Vec::new(),
        counterexamples: Vec::new(),
        injected_fault: config.run.fault.map(|f| f.name().to_string()),
    };
    let mut digest_input = String::new();
    for o in &outcomes {
        let class_text: Vec<String> = o
            .classes
            .iter()
            .map(|c| c.map_or("-".to_string(), |c| c.to_string()))
            .collect();
        digest_input.push_str(&format!("{} {} {}\n", o.index, o.digest, class_text.join(",")));
        if let Some(e) = &o.error {
            report.errors.push(format!("instance {}: {e}", o.index));
            continue;
        }
        report.points_evaluated += o.points_evaluated as u64;
        if o.budget_exceeded {
            report.brute_force_budget_exceeded += 1;
        }
        if o.disagreement {
            report.disagreements.push(o.index);
        } else {
            report.agreements += 1;
            match o.classes[2] {
                Some(0) => report.tally.class_0 += 1,
                Some(1) => report.tally.class_1 += 1,
                _ => report.tally.class_2 += 1,
            }
        }
        for v in &o.invariant_violations {
            report.invariant_violations.push(format!("instance {}: {v}", o.index));
        }
        if o.n <= BOUND_CHECK_MAX_N {
            report.bound_checked_instances += 1;
            if !o.bound_violations.is_empty() {
                report.bound_violations.push(BoundViolation {
                    instance: o.index,
                    n: o.n,
                    points: o.bound_violations.clone(),
                });
            }
        }
    }
    report.campaign_digest = sha256_hex(digest_input.as_bytes());

    for &index in &report.disagreements.clone() {
        let original = instance(config, index);
        let minimized = minimize(&original, &opts);
        let files = match &config.artifact_dir {
            Some(dir) => persist(dir, index, &original, &minimized, &opts)?,
            None => Vec::new(),
        };
        report.counterexamples.push(Counterexample {
            instance: index,
            original_edges: original.edges().len(),
            minimized_edges: minimized.edges().len(),
            graph: write_graph(&minimized),
            minimized_digest: crate::commands::input_digest(&minimized),
            files,
        });
    }
    if let Some(dir) = &config.artifact_dir {
        if !report.bound_violations.is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::Io {
                path: dir.display().to_string(),
                message: e.to_string(),
            })?;
            write_file(
                &dir.join("bound-violations.json"),
                &to_canonical_json(&report.bound_violations),
            )?;
        }
    }
    Ok(report)
}
