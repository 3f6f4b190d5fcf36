//! Compilation of a piece's domain gate into a stably-deciding reaction
//! network in which every molecule votes.
//!
//! Each input molecule becomes an agent whose state is a tuple with one
//! component per distinct atom of the gate. A threshold atom
//! `sum_a w_a x(a) >= t` is decided by value carriers: each agent initially
//! carries its coordinate's weight, two carriers merge when their combined
//! value fits in the window `[-s, s]` (the loser becomes a follower), and
//! they rebalance into near-equal halves when it does not. The window
//! `s = 2(|t| + max|w| + 1)` is wide enough that any sum inside it fits in a
//! single carrier, while any population whose total falls outside keeps all
//! carriers on the correct side of the threshold once merging settles.
//! A mod atom carries residues instead and needs no window. Followers copy
//! the vote of any carrier they meet; carrier count never drops to zero
//! because merges leave the merged value on one of the two agents.
//!
//! An agent's vote is the gate formula evaluated on its per-component votes.
//! All transitions preserve the agent count, and identity transitions are
//! omitted, so the network quiesces exactly when every pair of agents is
//! mutually settled.

use std::collections::{HashMap, VecDeque};

use crate::compiler::affine::Terms;
use crate::crn::{Crn, CrnBuilder};
use crate::semilinear::{Atom, DomainPredicate};

/// One agent-state component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Comp {
    Carrier(i64),
    Follower(bool),
}

/// The decision rule for one distinct atom of the gate.
#[derive(Clone, Debug)]
enum AtomSchema {
    Threshold { coeffs: Vec<i64>, t: i64, s: i64 },
    Mod { coeffs: Vec<i64>, m: i64, r: i64 },
}

type AgentState = Vec<Comp>;

/// The compiled decider for one piece's gate, in string form.
#[derive(Clone, Debug)]
pub struct PredicateCrd {
    pub piece_index: usize,
    pub species: Vec<String>,
    pub reactions: Vec<(Terms, Terms)>,
    /// Species seeded by one input molecule of each coordinate.
    pub initial_for_coordinate: Vec<String>,
    pub yes_species: Vec<String>,
    pub no_species: Vec<String>,
    pub warnings: Vec<String>,
}

fn schema_for(atom: &Atom) -> AtomSchema {
    match atom {
        Atom::Threshold { coeffs, threshold } => {
            let widest = coeffs.iter().map(|c| c.abs()).max().unwrap_or(0).max(1);
            AtomSchema::Threshold {
                coeffs: coeffs.clone(),
                t: *threshold,
                s: 2 * (threshold.abs() + widest + 1),
            }
        }
        Atom::Mod { coeffs, modulus, residue } => AtomSchema::Mod {
            coeffs: coeffs.clone(),
            m: i64::try_from(*modulus).expect("modulus fits"),
            r: i64::try_from(*residue).expect("residue fits"),
        },
    }
}

fn initial_comp(schema: &AtomSchema, coordinate: usize) -> Comp {
    match schema {
        AtomSchema::Threshold { coeffs, .. } => Comp::Carrier(coeffs[coordinate]),
        AtomSchema::Mod { coeffs, m, .. } => Comp::Carrier(coeffs[coordinate].rem_euclid(*m)),
    }
}

fn step_component(schema: &AtomSchema, a: Comp, b: Comp) -> (Comp, Comp) {
    use Comp::{Carrier, Follower};
    match schema {
        AtomSchema::Threshold { t, s, .. } => match (a, b) {
            (Carrier(u), Carrier(v)) => {
                let q = u + v;
                if q.abs() > *s {
                    let low = q.div_euclid(2);
                    (Carrier(q - low), Carrier(low))
                } else {
                    (Carrier(q), Follower(q >= *t))
                }
            }
            (Carrier(u), Follower(_)) => (Carrier(u), Follower(u >= *t)),
            (Follower(_), Carrier(v)) => (Follower(v >= *t), Carrier(v)),
            pair => pair,
        },
        AtomSchema::Mod { m, r, .. } => match (a, b) {
            (Carrier(u), Carrier(v)) => {
                let q = (u + v).rem_euclid(*m);
                (Carrier(q), Follower(q == *r))
            }
            (Carrier(u), Follower(_)) => (Carrier(u), Follower(u == *r)),
            (Follower(_), Carrier(v)) => (Follower(v == *r), Carrier(v)),
            pair => pair,
        },
    }
}

fn step(schemas: &[AtomSchema], a: &AgentState, b: &AgentState) -> (AgentState, AgentState) {
    let mut next_a = Vec::with_capacity(a.len());
    let mut next_b = Vec::with_capacity(b.len());
    for (idx, schema) in schemas.iter().enumerate() {
        let (na, nb) = step_component(schema, a[idx], b[idx]);
        next_a.push(na);
        next_b.push(nb);
    }
    (next_a, next_b)
}

fn comp_vote(schema: &AtomSchema, comp: Comp) -> bool {
    match (schema, comp) {
        (AtomSchema::Threshold { t, .. }, Comp::Carrier(v)) => v >= *t,
        (AtomSchema::Mod { r, .. }, Comp::Carrier(v)) => v == *r,
        (_, Comp::Follower(b)) => b,
    }
}

fn state_name(piece: usize, schemas: &[AtomSchema], state: &AgentState) -> String {
    let mut name = format!("P_{piece}");
    if state.is_empty() {
        name.push_str("_e");
        return name;
    }
    for (schema, comp) in schemas.iter().zip(state) {
        name.push('_');
        match (schema, comp) {
            (AtomSchema::Threshold { .. }, Comp::Carrier(v)) if *v < 0 => {
                name.push_str(&format!("tm{}", -v));
            }
            (AtomSchema::Threshold { .. }, Comp::Carrier(v)) => {
                name.push_str(&format!("tp{v}"));
            }
            (AtomSchema::Mod { .. }, Comp::Carrier(v)) => name.push_str(&format!("r{v}")),
            (_, Comp::Follower(true)) => name.push_str("fy"),
            (_, Comp::Follower(false)) => name.push_str("fn"),
        }
    }
    name
}

/// Compile `gate` over `input_arity` coordinates into a decider namespaced by
/// the 1-based `piece_index`. `species_budget` only controls a warning; the
/// state space is always finite because carrier values stay windowed.
pub fn compile_predicate(
    gate: &DomainPredicate,
    input_arity: usize,
    piece_index: usize,
    species_budget: usize,
) -> PredicateCrd {
    let occurrences = gate.atoms();
    let mut uniques: Vec<&Atom> = Vec::new();
    let mut occurrence_to_unique = Vec::with_capacity(occurrences.len());
    for atom in &occurrences {
        match uniques.iter().position(|u| *u == *atom) {
            Some(pos) => occurrence_to_unique.push(pos),
            None => {
                occurrence_to_unique.push(uniques.len());
                uniques.push(atom);
            }
        }
    }
    let schemas: Vec<AtomSchema> = uniques.iter().map(|a| schema_for(a)).collect();

    let mut states: Vec<AgentState> = Vec::new();
    let mut index: HashMap<AgentState, usize> = HashMap::new();
    let mut pending: VecDeque<(usize, usize)> = VecDeque::new();
    let add = |state: AgentState,
                   states: &mut Vec<AgentState>,
                   index: &mut HashMap<AgentState, usize>,
                   pending: &mut VecDeque<(usize, usize)>|
     -> usize {
        if let Some(&idx) = index.get(&state) {
            return idx;
        }
        let idx = states.len();
        index.insert(state.clone(), idx);
        states.push(state);
        for other in 0..=idx {
            pending.push_back((other, idx));
        }
        idx
    };

    let initial_for_coordinate: Vec<usize> = (0..input_arity)
        .map(|a| {
            let state: AgentState = schemas.iter().map(|s| initial_comp(s, a)).collect();
            add(state, &mut states, &mut index, &mut pending)
        })
        .collect();

    let mut reactions: Vec<(Terms, Terms)> = Vec::new();
    let mut raw_reactions: Vec<(usize, usize, AgentState, AgentState)> = Vec::new();
    while let Some((ia, ib)) = pending.pop_front() {
        let (x, y) = if states[ia] <= states[ib] {
            (states[ia].clone(), states[ib].clone())
        } else {
            (states[ib].clone(), states[ia].clone())
        };
        let (nx, ny) = step(&schemas, &x, &y);
        let mut before = [x.clone(), y.clone()];
        let mut after = [nx.clone(), ny.clone()];
        before.sort();
        after.sort();
        add(nx.clone(), &mut states, &mut index, &mut pending);
        add(ny.clone(), &mut states, &mut index, &mut pending);
        if before != after {
            raw_reactions.push((ia, ib, nx, ny));
        }
    }

    let name_of = |state: &AgentState| state_name(piece_index, &schemas, state);
    for (ia, ib, nx, ny) in &raw_reactions {
        let (x, y) = (&states[*ia], &states[*ib]);
        let reactants: Terms = if x == y {
            vec![(name_of(x), 2)]
        } else {
            vec![(name_of(x), 1), (name_of(y), 1)]
        };
        let products: Terms = if nx == ny {
            vec![(name_of(nx), 2)]
        } else {
            vec![(name_of(nx), 1), (name_of(ny), 1)]
        };
        reactions.push((reactants, products));
    }

    let mut yes_species = Vec::new();
    let mut no_species = Vec::new();
    for state in &states {
        let votes: Vec<bool> = occurrence_to_unique
            .iter()
            .map(|&u| comp_vote(&schemas[u], state[u]))
            .collect();
        let vote = gate.eval_with(&mut votes.into_iter());
        if vote {
            yes_species.push(name_of(state));
        } else {
            no_species.push(name_of(state));
        }
    }

    let mut warnings = Vec::new();
    if states.len() > species_budget {
        warnings.push(format!(
            "piece {piece_index} gate needs {} agent states, over the budget of {species_budget}",
            states.len()
        ));
    }

    PredicateCrd {
        piece_index,
        species: states.iter().map(&name_of).collect(),
        reactions,
        initial_for_coordinate: initial_for_coordinate
            .iter()
            .map(|&idx| name_of(&states[idx]))
            .collect(),
        yes_species,
        no_species,
        warnings,
    }
}

/// Wrap a decider as a standalone network: inputs are the per-coordinate
/// initial species and every species carries its vote.
pub fn crd_crn(crd: &PredicateCrd) -> Crn {
    let mut builder = CrnBuilder::default();
    for name in &crd.species {
        builder = builder.species(name);
    }
    for (reactants, products) in &crd.reactions {
        let r: Vec<(&str, u32)> = reactants.iter().map(|(n, m)| (n.as_str(), *m)).collect();
        let p: Vec<(&str, u32)> = products.iter().map(|(n, m)| (n.as_str(), *m)).collect();
        builder = builder.reaction(&r, &p);
    }
    for name in &crd.initial_for_coordinate {
        builder = builder.input(name);
    }
    let yes = crd.yes_species.iter().map(String::as_str);
    builder.yes_voters(yes).build().expect("deciders are well-formed networks")
}
