//! Exhaustive stability checking on the finite reachable state space.
//!
//! For mass-conserving (or otherwise bounded) networks the set of
//! configurations reachable from a given start is finite, so stable
//! computation can be decided exactly:
//!
//! 1. build the reachability graph by breadth-first exploration,
//! 2. condense it into strongly connected components,
//! 3. label each component *output stable* when every configuration in it
//!    and in every component below it shows the same output value,
//! 4. certify that from every reachable configuration some correct
//!    output-stable configuration stays reachable — or extract a shortest
//!    counterexample path if not.
//!
//! Node budgets keep exploration bounded; exceeding the budget yields an
//! inconclusive verdict rather than a wrong one.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::crn::{Configuration, Crn, SpeciesId};
use crate::kinetics::VoteStatus;

/// Default exploration budget used by the command line and examples.
pub const DEFAULT_NODE_BUDGET: usize = 2_000_000;

#[derive(Debug, Error)]
pub enum CheckError {
    #[error("count {count} of species {species:?} does not fit the checker's compact encoding")]
    CountsTooLarge { species: String, count: u64 },
    #[error("stable decision checking requires a network with declared yes-voters")]
    NotADecider,
    #[error("expected output has {got} entries but the network declares {want} outputs")]
    OutputArity { got: usize, want: usize },
}

/// The reachable state space from one initial configuration.
///
/// Nodes are configurations (deduplicated), node 0 is the initial one, and
/// ids follow breadth-first discovery order, so lower ids are reachable in
/// fewer reaction steps.
pub struct ReachabilityGraph {
    nodes: Vec<Box<[u32]>>,
    lookup: HashMap<Box<[u32]>, u32>,
    /// `(reaction, target)` pairs, filled only for expanded nodes.
    edges: Vec<Vec<(u32, u32)>>,
    /// `(parent, reaction)` along the BFS tree; the root stores `u32::MAX`.
    parents: Vec<(u32, u32)>,
    edge_count: u64,
    capped: bool,
}

const NO_PARENT: u32 = u32::MAX;

impl ReachabilityGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    /// True when exploration stopped at the node budget, leaving the graph
    /// incomplete; classification is then impossible.
    pub fn capped(&self) -> bool {
        self.capped
    }

    pub fn successors(&self, node: u32) -> &[(u32, u32)] {
        &self.edges[node as usize]
    }

    pub fn configuration(&self, node: u32) -> Configuration {
        let counts: Vec<u64> = self.nodes[node as usize].iter().map(|&c| u64::from(c)).collect();
        Configuration::from_counts(counts)
    }

    /// Node id of `cfg`, if it was discovered.
    pub fn find(&self, cfg: &Configuration) -> Option<u32> {
        let key: Box<[u32]> =
            cfg.counts().iter().map(|&c| u32::try_from(c).ok()).collect::<Option<_>>()?;
        self.lookup.get(key.as_ref()).copied()
    }

    /// Shortest-path witness from the root to `node`: the reactions fired
    /// and every configuration along the way (root first).
    pub fn path_from_root(&self, node: u32) -> (Vec<u32>, Vec<Configuration>) {
        let mut reactions = Vec::new();
        let mut nodes = vec![node];
        let mut cur = node;
        while self.parents[cur as usize].0 != NO_PARENT {
            let (parent, reaction) = self.parents[cur as usize];
            reactions.push(reaction);
            nodes.push(parent);
            cur = parent;
        }
        reactions.reverse();
        nodes.reverse();
        let configs = nodes.into_iter().map(|n| self.configuration(n)).collect();
        (reactions, configs)
    }
}

/// Explore all configurations reachable from `initial`, storing at most
/// `node_budget` of them.
pub fn build_reachability_graph(
    crn: &Crn,
    initial: &Configuration,
    node_budget: usize,
) -> Result<ReachabilityGraph, CheckError> {
    let compact = |cfg: &Configuration| -> Result<Box<[u32]>, CheckError> {
        cfg.counts()
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                u32::try_from(c).map_err(|_| CheckError::CountsTooLarge {
                    species: crn.name_of(SpeciesId(i as u32)).to_string(),
                    count: c,
                })
            })
            .collect()
    };

    let root = compact(initial)?;
    let mut lookup: HashMap<Box<[u32]>, u32> = HashMap::new();
    lookup.insert(root.clone(), 0);
    let mut nodes = vec![root];
    let mut edges: Vec<Vec<(u32, u32)>> = vec![Vec::new()];
    let mut parents: Vec<(u32, u32)> = vec![(NO_PARENT, NO_PARENT)];
    let mut edge_count = 0u64;
    let mut queue: VecDeque<u32> = VecDeque::new();
    queue.push_back(0);
    let mut capped = false;

    'expand: while let Some(node) = queue.pop_front() {
        let cfg = {
            let counts: Vec<u64> =
                nodes[node as usize].iter().map(|&c| u64::from(c)).collect();
            Configuration::from_counts(counts)
        };
        for index in crn.applicable_reactions(&cfg) {
            let next = crn.apply(&cfg, index).expect("applicable reactions apply");
            let key = compact(&next)?;
            let target = match lookup.get(&key) {
                Some(&t) => t,
                None => {
                    if nodes.len() >= node_budget {
                        capped = true;
                        break 'expand;
                    }
                    let id = nodes.len() as u32;
                    lookup.insert(key.clone(), id);
                    nodes.push(key);
                    edges.push(Vec::new());
                    parents.push((node, index as u32));
                    queue.push_back(id);
                    id
                }
            };
            edges[node as usize].push((index as u32, target));
            edge_count += 1;
        }
    }
    if !queue.is_empty() {
        capped = true;
    }

    Ok(ReachabilityGraph { nodes, edges, parents, edge_count, capped, lookup })
}

/// Strongly connected components by iterative Tarjan. Returns the component
/// id of each node; ids are assigned in completion order, so every edge that
/// crosses components points at a smaller id.
fn tarjan_components(edges: &[Vec<(u32, u32)>]) -> (Vec<u32>, u32) {
    const UNVISITED: u32 = u32::MAX;
    let n = edges.len();
    let mut order = vec![UNVISITED; n];
    let mut lowlink = vec![0u32; n];
    let mut component = vec![UNVISITED; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut frames: Vec<(u32, usize)> = Vec::new();
    let mut next_order = 0u32;
    let mut components = 0u32;

    for start in 0..n as u32 {
        if order[start as usize] != UNVISITED {
            continue;
        }
        order[start as usize] = next_order;
        lowlink[start as usize] = next_order;
        next_order += 1;
        stack.push(start);
        on_stack[start as usize] = true;
        frames.push((start, 0));

        while let Some(frame) = frames.last_mut() {
            let (v, pos) = (frame.0, frame.1);
            if pos < edges[v as usize].len() {
                frame.1 += 1;
                let w = edges[v as usize][pos].1;
                if order[w as usize] == UNVISITED {
                    order[w as usize] = next_order;
                    lowlink[w as usize] = next_order;
                    next_order += 1;
                    stack.push(w);
                    on_stack[w as usize] = true;
                    frames.push((w, 0));
                } else if on_stack[w as usize] {
                    lowlink[v as usize] = lowlink[v as usize].min(order[w as usize]);
                }
            } else {
                frames.pop();
                if let Some(parent) = frames.last() {
                    let p = parent.0 as usize;
                    lowlink[p] = lowlink[p].min(lowlink[v as usize]);
                }
                if lowlink[v as usize] == order[v as usize] {
                    loop {
                        let w = stack.pop().expect("tarjan stack holds the component");
                        on_stack[w as usize] = false;
                        component[w as usize] = components;
                        if w == v {
                            break;
                        }
                    }
                    components += 1;
                }
            }
        }
    }
    (component, components)
}

/// Label every node with `Some(value)` when it is *output stable for that
/// value*: each configuration reachable from it (itself included) maps to
/// the same `value`. Nodes that can still change keep `None`.
pub fn classify_stable<V: PartialEq + Clone>(
    graph: &ReachabilityGraph,
    mut value_of: impl FnMut(&Configuration) -> V,
) -> Vec<Option<V>> {
    assert!(!graph.capped(), "classification needs a complete graph");
    let values: Vec<V> =
        (0..graph.node_count() as u32).map(|n| value_of(&graph.configuration(n))).collect();
    let (component, count) = tarjan_components(&graph.edges);
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); count as usize];
    for node in 0..graph.node_count() as u32 {
        members[component[node as usize] as usize].push(node);
    }

    let mut component_stable: Vec<Option<V>> = Vec::with_capacity(count as usize);
    for comp in 0..count as usize {
        let candidate = values[members[comp][0] as usize].clone();
        let mut stable = members[comp].iter().all(|&n| values[n as usize] == candidate);
        if stable {
            'nodes: for &n in &members[comp] {
                for &(_, target) in graph.successors(n) {
                    let tc = component[target as usize] as usize;
                    if tc != comp && component_stable[tc].as_ref() != Some(&candidate) {
                        stable = false;
                        break 'nodes;
                    }
                }
            }
        }
        component_stable.push(if stable { Some(candidate) } else { None });
    }

    (0..graph.node_count())
        .map(|n| component_stable[component[n] as usize].clone())
        .collect()
}

/// Per-node output-stability labels using output species counts as the value.
pub fn stable_output_labels(crn: &Crn, graph: &ReachabilityGraph) -> Vec<Option<Vec<u64>>> {
    let outputs: Vec<SpeciesId> = crn.outputs().to_vec();
    classify_stable(graph, |cfg| outputs.iter().map(|&s| cfg.get(s)).collect())
}

/// Per-node stability labels over the vote status; `Some(Yes)`/`Some(No)`
/// are the output-stable deciding configurations.
pub fn stable_vote_labels(
    crn: &Crn,
    graph: &ReachabilityGraph,
) -> Result<Vec<Option<VoteStatus>>, CheckError> {
    if !crn.is_decider() {
        return Err(CheckError::NotADecider);
    }
    Ok(classify_stable(graph, |cfg| crate::kinetics::vote_status(crn, cfg)))
}

/// Why a refuted network fails, with a replayable path from the start.
#[derive(Clone, Debug)]
pub struct Witness {
    /// Reaction indices fired along the path.
    pub reactions: Vec<u32>,
    /// Configurations along the path; first is the initial one.
    pub path: Vec<Configuration>,
    pub reason: WitnessReason,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WitnessReason {
    /// The end of the path is output stable with a wrong value.
    StabilizesWrong { observed: String },
    /// From the end of the path no correct output-stable configuration is
    /// reachable (and it never stabilizes correctly itself).
    NoCorrectStableReachable,
}

/// Outcome of a stability check.
#[derive(Clone, Debug)]
pub enum Verdict {
    /// Every reachable configuration keeps a correct output-stable
    /// configuration reachable: the network provably computes the value.
    Certified { nodes: u64, edges: u64 },
    /// A reachable configuration breaks the requirement; see the witness.
    Refuted { nodes: u64, edges: u64, witness: Witness },
    /// The check could not decide.
    Inconclusive { nodes: u64, edges: u64, cause: InconclusiveCause },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InconclusiveCause {
    NodeBudgetExceeded { budget: usize },
    /// The empty initial configuration carries no votes and no molecules;
    /// deciders leave their output undefined on it.
    EmptyInput,
}

impl Verdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, Verdict::Certified { .. })
    }

    /// Human-readable report; needs the network for species names.
    pub fn describe(&self, crn: &Crn) -> String {
        match self {
            Verdict::Certified { nodes, edges } => format!(
                "certified: all {nodes} reachable configurations ({edges} transitions) \
                 keep a correct stable configuration reachable"
            ),
            Verdict::Inconclusive { nodes, cause, .. } => match cause {
                InconclusiveCause::NodeBudgetExceeded { budget } => format!(
                    "inconclusive: exploration hit the node budget ({budget}) after \
                     {nodes} configurations"
                ),
                InconclusiveCause::EmptyInput => {
                    "inconclusive: the empty input carries no votes, so the output \
                     is undefined"
                        .to_string()
                }
            },
            Verdict::Refuted { nodes, edges, witness } => {
                let mut out = format!(
                    "refuted: explored {nodes} configurations ({edges} transitions)\n"
                );
                match &witness.reason {
                    WitnessReason::StabilizesWrong { observed } => {
                        out.push_str(&format!(
                            "counterexample stabilizes with output {observed}:\n"
                        ));
                    }
                    WitnessReason::NoCorrectStableReachable => {
                        out.push_str(
                            "counterexample cannot reach any correct stable configuration:\n",
                        );
                    }
                }
                out.push_str(&format!("  start {}", crn.display_configuration(&witness.path[0])));
                for (step, reaction) in witness.reactions.iter().enumerate() {
                    out.push_str(&format!(
                        "\n  --[{}]--> {}",
                        crn.display_reaction(*reaction as usize),
                        crn.display_configuration(&witness.path[step + 1])
                    ));
                }
                out
            }
        }
    }
}

/// Nodes from which some seed node stays reachable (backward reachability
/// over the transition relation).
fn can_reach(graph: &ReachabilityGraph, seeds: &[bool]) -> Vec<bool> {
    let n = graph.node_count();
    let mut reverse: Vec<Vec<u32>> = vec![Vec::new(); n];
    for node in 0..n as u32 {
        for &(_, target) in graph.successors(node) {
            if target != node {
                reverse[target as usize].push(node);
            }
        }
    }
    let mut reached = seeds.to_vec();
    let mut queue: VecDeque<u32> =
        (0..n as u32).filter(|&i| seeds[i as usize]).collect();
    while let Some(node) = queue.pop_front() {
        for &pred in &reverse[node as usize] {
            if !reached[pred as usize] {
                reached[pred as usize] = true;
                queue.push_back(pred);
            }
        }
    }
    reached
}

fn refute<V: PartialEq>(
    graph: &ReachabilityGraph,
    labels: &[Option<V>],
    ok: &[bool],
    describe_label: impl Fn(&V) -> String,
    is_wrong_stable: impl Fn(&V) -> bool,
) -> Witness {
    // Prefer a configuration that provably stabilizes wrong; otherwise take
    // the shallowest configuration cut off from every correct stable one.
    let bad = (0..graph.node_count() as u32)
        .filter(|&n| !ok[n as usize])
        .min_by_key(|&n| {
            let wrong = matches!(&labels[n as usize], Some(v) if is_wrong_stable(v));
            (!wrong, n)
        })
        .expect("refute is called only when some node fails");
    let (reactions, path) = graph.path_from_root(bad);
    let reason = match &labels[bad as usize] {
        Some(v) if is_wrong_stable(v) => {
            WitnessReason::StabilizesWrong { observed: describe_label(v) }
        }
        _ => WitnessReason::NoCorrectStableReachable,
    };
    Witness { reactions, path, reason }
}

/// Decide whether the network stably computes `expected` (the output species
/// counts) from `initial`, by exhaustive search up to `node_budget`.
pub fn check_stable_computation(
    crn: &Crn,
    initial: &Configuration,
    expected: &[u64],
    node_budget: usize,
) -> Result<Verdict, CheckError> {
    if expected.len() != crn.outputs().len() {
        return Err(CheckError::OutputArity { got: expected.len(), want: crn.outputs().len() });
    }
    let graph = build_reachability_graph(crn, initial, node_budget)?;
    let nodes = graph.node_count() as u64;
    let edges = graph.edge_count();
    if graph.capped() {
        return Ok(Verdict::Inconclusive {
            nodes,
            edges,
            cause: InconclusiveCause::NodeBudgetExceeded { budget: node_budget },
        });
    }
    let labels = stable_output_labels(crn, &graph);
    let ok_seed: Vec<bool> =
        labels.iter().map(|l| l.as_deref() == Some(expected)).collect();
    let ok = can_reach(&graph, &ok_seed);
    if ok.iter().all(|&b| b) {
        Ok(Verdict::Certified { nodes, edges })
    } else {
        let witness = refute(
            &graph,
            &labels,
            &ok,
            |v| format!("{v:?}"),
            |v| v.as_slice() != expected,
        );
        Ok(Verdict::Refuted { nodes, edges, witness })
    }
}

/// Decide whether the decider stably answers `expected` from `initial`.
pub fn check_stable_decision(
    crn: &Crn,
    initial: &Configuration,
    expected: bool,
    node_budget: usize,
) -> Result<Verdict, CheckError> {
    if !crn.is_decider() {
        return Err(CheckError::NotADecider);
    }
    if initial.is_zero() {
        return Ok(Verdict::Inconclusive {
            nodes: 1,
            edges: 0,
            cause: InconclusiveCause::EmptyInput,
        });
    }
    let graph = build_reachability_graph(crn, initial, node_budget)?;
    let nodes = graph.node_count() as u64;
    let edges = graph.edge_count();
    if graph.capped() {
        return Ok(Verdict::Inconclusive {
            nodes,
            edges,
            cause: InconclusiveCause::NodeBudgetExceeded { budget: node_budget },
        });
    }
    let labels = stable_vote_labels(crn, &graph)?;
    let target = if expected { VoteStatus::Yes } else { VoteStatus::No };
    let wrong = if expected { VoteStatus::No } else { VoteStatus::Yes };
    let ok_seed: Vec<bool> = labels.iter().map(|l| *l == Some(target)).collect();
    let ok = can_reach(&graph, &ok_seed);
    if ok.iter().all(|&b| b) {
        Ok(Verdict::Certified { nodes, edges })
    } else {
        let witness = refute(
            &graph,
            &labels,
            &ok,
            |v| format!("{v:?}"),
            |v| *v == wrong,
        );
        Ok(Verdict::Refuted { nodes, edges, witness })
    }
}
