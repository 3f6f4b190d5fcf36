//! Compilation of a piecewise-affine function specification into a reaction
//! network that stably computes it from any input, with no pre-seeded
//! species.
//!
//! Every input molecule `X_a` fans out into one agent per piece decider and
//! one alias per affine fragment. Fragments produce inactive additive and
//! subtractive output tokens; an activation layer, gated by the decider
//! votes, converts the winning piece's tokens into global outputs and
//! reclaims tokens of losing pieces. A killer species cancels one global
//! output per subtractive token, so the settled count on output `j` is
//! exactly the winning piece's additive minus subtractive total.
//!
//! The layer maintains, per output `j`, the audit identity
//! `#Y_j = #K_j + sum_i (#Y^P_i_j + #M_i_j)`, which every reaction preserves
//! and which guarantees reclaim and kill steps never deadlock.

pub mod affine;
pub mod predicate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crn::{Configuration, Crn, CrnBuilder};
use crate::kinetics::Volume;
use crate::semilinear::{validate, DomainPredicate, FunctionSpec, ValidationReport};

use affine::{compile_affine, AffineFragment, Terms};
use predicate::{compile_predicate, PredicateCrd};

#[derive(Clone, Debug)]
pub struct CompilerOptions {
    /// Inputs in `[0, validate_bound]^k` are evaluated before compiling;
    /// any undefined point rejects the specification.
    pub validate_bound: u64,
    /// Species count above which a warning is attached.
    pub species_budget: usize,
}

impl Default for CompilerOptions {
    fn default() -> Self {
        CompilerOptions { validate_bound: 8, species_budget: 4096 }
    }
}

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("specification rejected: {report}")]
    Validation { report: ValidationReport },
}

/// What a species is for, recorded for artifacts and checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpeciesRole {
    Input { coordinate: usize },
    GlobalOutput { coordinate: usize },
    Predicate { piece: usize },
    Affine { piece: usize },
    /// Activation-layer species; the killer `K_j` is shared across pieces.
    Activation { piece: Option<usize>, output: usize },
}

impl fmt::Display for SpeciesRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpeciesRole::Input { coordinate } => write!(f, "input:{coordinate}"),
            SpeciesRole::GlobalOutput { coordinate } => write!(f, "output:{coordinate}"),
            SpeciesRole::Predicate { piece } => write!(f, "predicate:{piece}"),
            SpeciesRole::Affine { piece } => write!(f, "affine:{piece}"),
            SpeciesRole::Activation { piece: Some(p), output } => {
                write!(f, "activation:{p}:{output}")
            }
            SpeciesRole::Activation { piece: None, output } => write!(f, "activation:*:{output}"),
        }
    }
}

/// Species named in the per-output audit identity.
#[derive(Clone, Debug)]
pub struct AuditGroup {
    pub output: String,
    pub killer: String,
    /// The `Y^P_i_j` and `M_i_j` species, over all pieces.
    pub positives: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct CompiledCrn {
    pub crn: Crn,
    pub spec: FunctionSpec,
    /// Molecule-count bound per unit of input size; simulation volume for
    /// input `x` is `gamma * max(1, |x|)`.
    pub gamma: u64,
    pub roles: BTreeMap<String, SpeciesRole>,
    pub piece_yes_voters: Vec<Vec<String>>,
    pub piece_no_voters: Vec<Vec<String>>,
    pub audit: Vec<AuditGroup>,
    pub warnings: Vec<String>,
}

impl CompiledCrn {
    pub fn volume_for_norm(&self, input_norm: u64) -> Volume {
        Volume::new((self.gamma * input_norm.max(1)) as f64).expect("positive volume")
    }

    pub fn volume_for(&self, x: &[u64]) -> Volume {
        self.volume_for_norm(x.iter().sum())
    }
}

/// The gate deciding piece `i` (0-based): its own domain and the negation of
/// every earlier domain, reflecting first-match piece selection.
pub fn piece_gate(spec: &FunctionSpec, piece: usize) -> DomainPredicate {
    let mut parts = vec![spec.pieces()[piece].domain.clone()];
    for earlier in 0..piece {
        parts.push(DomainPredicate::Not(Box::new(spec.pieces()[earlier].domain.clone())));
    }
    DomainPredicate::And(parts)
}

fn input_name(a: usize) -> String {
    format!("X{}", a + 1)
}

fn output_name(j: usize) -> String {
    format!("Y{}", j + 1)
}

fn active_name(sign: &str, i: usize, j: usize) -> String {
    format!("Y^{sign}_{i}_{j}")
}

fn reclaim_name(i: usize, j: usize) -> String {
    format!("M_{i}_{j}")
}

fn killer_name(j: usize) -> String {
    format!("K_{j}")
}

/// Drop reactions that can never fire and species that can never appear:
/// iterate to the set of species producible from the inputs, keeping only
/// reactions whose reactants all qualify.
fn prune_unproducible(
    reactions: Vec<(Terms, Terms)>,
    inputs: &[String],
) -> (Vec<(Terms, Terms)>, BTreeSet<String>) {
    let mut producible: BTreeSet<String> = inputs.iter().cloned().collect();
    let mut kept = vec![false; reactions.len()];
    loop {
        let mut changed = false;
        for (idx, (reactants, products)) in reactions.iter().enumerate() {
            if kept[idx] {
                continue;
            }
            if reactants.iter().all(|(name, _)| producible.contains(name)) {
                kept[idx] = true;
                changed = true;
                for (name, _) in products {
                    producible.insert(name.clone());
                }
            }
        }
        if !changed {
            break;
        }
    }
    let kept_reactions = reactions
        .into_iter()
        .zip(kept)
        .filter_map(|(reaction, keep)| keep.then_some(reaction))
        .collect();
    (kept_reactions, producible)
}

pub fn compile(spec: &FunctionSpec, options: &CompilerOptions) -> Result<CompiledCrn, CompileError> {
    let report = validate(spec, options.validate_bound);
    if !report.is_ok() {
        return Err(CompileError::Validation { report });
    }

    let k = spec.input_arity();
    let l = spec.output_arity();
    let m = spec.pieces().len();
    let mut warnings = Vec::new();

    match spec.eval(&vec![0; k]) {
        Ok(y) if y.iter().all(|&v| v == 0) => {}
        Ok(y) => warnings.push(format!(
            "f(0,...,0) = {y:?}, but the empty input has no molecules to react: \
             the network necessarily outputs zero there"
        )),
        Err(err) => warnings.push(format!("f undefined on the all-zero input: {err}")),
    }

    let deciders: Vec<PredicateCrd> = (0..m)
        .map(|i| compile_predicate(&piece_gate(spec, i), k, i + 1, options.species_budget))
        .collect();
    let fragments: Vec<AffineFragment> =
        (0..m).map(|i| compile_affine(&spec.pieces()[i].affine, i + 1)).collect();
    for crd in &deciders {
        warnings.extend(crd.warnings.iter().cloned());
    }

    let mut reactions: Vec<(Terms, Terms)> = Vec::new();
    let mut roles: BTreeMap<String, SpeciesRole> = BTreeMap::new();

    for a in 0..k {
        roles.insert(input_name(a), SpeciesRole::Input { coordinate: a + 1 });
    }
    for j in 0..l {
        roles.insert(output_name(j), SpeciesRole::GlobalOutput { coordinate: j + 1 });
    }
    for (i, crd) in deciders.iter().enumerate() {
        for name in &crd.species {
            roles.insert(name.clone(), SpeciesRole::Predicate { piece: i + 1 });
        }
    }
    for (i, fragment) in fragments.iter().enumerate() {
        for name in affine::fragment_species(fragment) {
            roles.insert(name, SpeciesRole::Affine { piece: i + 1 });
        }
    }

    // Fan-out: one agent per decider plus one alias per fragment.
    for a in 0..k {
        let mut products: Terms = Vec::new();
        for crd in &deciders {
            products.push((crd.initial_for_coordinate[a].clone(), 1));
        }
        for fragment in &fragments {
            products.push((fragment.input_aliases[a].clone(), 1));
        }
        reactions.push((vec![(input_name(a), 1)], products));
    }

    for crd in &deciders {
        reactions.extend(crd.reactions.iter().cloned());
    }
    for fragment in &fragments {
        reactions.extend(fragment.reactions.iter().cloned());
    }

    // Activation: votes gate the conversion of inactive fragment outputs
    // into global outputs, reversibly so late vote flips are repaired.
    let mut audit: Vec<AuditGroup> = (0..l)
        .map(|j| AuditGroup {
            output: output_name(j),
            killer: killer_name(j + 1),
            positives: Vec::new(),
        })
        .collect();
    let mut kill_emitted: BTreeSet<usize> = BTreeSet::new();
    for (idx, fragment) in fragments.iter().enumerate() {
        let i = idx + 1;
        let crd = &deciders[idx];
        for j in 0..l {
            let hat_p = fragment.output_p[j].clone();
            let hat_c = fragment.output_c[j].clone();
            let y = output_name(j);
            let yp = active_name("P", i, j + 1);
            let yc = active_name("C", i, j + 1);
            let reclaim = reclaim_name(i, j + 1);
            let killer = killer_name(j + 1);
            if hat_p.is_some() {
                audit[j].positives.push(yp.clone());
                audit[j].positives.push(reclaim.clone());
                roles.insert(yp.clone(), SpeciesRole::Activation { piece: Some(i), output: j + 1 });
                roles.insert(
                    reclaim.clone(),
                    SpeciesRole::Activation { piece: Some(i), output: j + 1 },
                );
            }
            if hat_c.is_some() {
                roles.insert(yc.clone(), SpeciesRole::Activation { piece: Some(i), output: j + 1 });
            }
            if let Some(hp) = &hat_p {
                for voter in &crd.yes_species {
                    reactions.push((
                        vec![(voter.clone(), 1), (hp.clone(), 1)],
                        vec![(voter.clone(), 1), (yp.clone(), 1), (y.clone(), 1)],
                    ));
                }
                for voter in &crd.no_species {
                    reactions.push((
                        vec![(voter.clone(), 1), (yp.clone(), 1)],
                        vec![(voter.clone(), 1), (reclaim.clone(), 1)],
                    ));
                }
                reactions.push((
                    vec![(reclaim.clone(), 1), (y.clone(), 1)],
                    vec![(hp.clone(), 1)],
                ));
            }
            if let Some(hc) = &hat_c {
                for voter in &crd.yes_species {
                    reactions.push((
                        vec![(voter.clone(), 1), (hc.clone(), 1)],
                        vec![(voter.clone(), 1), (yc.clone(), 1)],
                    ));
                }
                for voter in &crd.no_species {
                    reactions.push((
                        vec![(voter.clone(), 1), (yc.clone(), 1)],
                        vec![(voter.clone(), 1), (hc.clone(), 1)],
                    ));
                }
            }
            if hat_p.is_some() && hat_c.is_some() {
                reactions.push((
                    vec![(yp.clone(), 1), (yc.clone(), 1)],
                    vec![(killer.clone(), 1)],
                ));
                if kill_emitted.insert(j) {
                    reactions.push((vec![(killer.clone(), 1), (y.clone(), 1)], Vec::new()));
                    roles.insert(killer, SpeciesRole::Activation { piece: None, output: j + 1 });
                }
            }
        }
    }

    let inputs: Vec<String> = (0..k).map(input_name).collect();
    let (kept, producible) = prune_unproducible(reactions, &inputs);

    let mut builder = CrnBuilder::default();
    for (reactants, products) in &kept {
        let r: Vec<(&str, u32)> = reactants.iter().map(|(n, c)| (n.as_str(), *c)).collect();
        let p: Vec<(&str, u32)> = products.iter().map(|(n, c)| (n.as_str(), *c)).collect();
        builder = builder.reaction(&r, &p);
    }
    for a in 0..k {
        builder = builder.input(&input_name(a));
    }
    for j in 0..l {
        builder = builder.species(&output_name(j)).output(&output_name(j));
    }
    let crn = builder.build().expect("compiled networks are well-formed");

    let surviving: BTreeSet<&str> = crn.species_names().collect();
    roles.retain(|name, _| surviving.contains(name.as_str()));
    let filter = |names: &[String]| -> Vec<String> {
        names.iter().filter(|n| surviving.contains(n.as_str())).cloned().collect()
    };
    let piece_yes_voters: Vec<Vec<String>> =
        deciders.iter().map(|crd| filter(&crd.yes_species)).collect();
    let piece_no_voters: Vec<Vec<String>> =
        deciders.iter().map(|crd| filter(&crd.no_species)).collect();
    for group in &mut audit {
        group.positives.retain(|n| producible.contains(n));
    }

    // Mass bound per unit of input: the input molecule itself, one decider
    // agent per piece, and per piece the fragment stock plus activation
    // copies (active token + global output per additive hat, active token
    // per subtractive hat, killer per annihilated pair), each within the
    // fragment's own per-input bound.
    let gamma = 1 + m as u64 + 4 * fragments.iter().map(|f| f.gamma).sum::<u64>();

    Ok(CompiledCrn {
        crn,
        spec: spec.clone(),
        gamma,
        roles,
        piece_yes_voters,
        piece_no_voters,
        audit,
        warnings,
    })
}

/// Check the per-output audit identity on one configuration.
pub fn audit_invariant(compiled: &CompiledCrn, cfg: &Configuration) -> bool {
    let count = |name: &str| -> u64 {
        compiled.crn.species_id(name).map(|id| cfg.get(id)).unwrap_or(0)
    };
    compiled.audit.iter().all(|group| {
        let rhs: u64 =
            count(&group.killer) + group.positives.iter().map(|n| count(n)).sum::<u64>();
        count(&group.output) == rhs
    })
}

/// Verify symbolically that every reaction preserves the audit identity.
pub fn audit_reaction_deltas(compiled: &CompiledCrn) -> Result<(), String> {
    let net = |reaction: &crate::crn::Reaction, name: &str| -> i64 {
        compiled.crn.species_id(name).map(|id| reaction.net(id)).unwrap_or(0)
    };
    for idx in 0..compiled.crn.reactions().len() {
        let reaction = compiled.crn.reaction(idx);
        for group in &compiled.audit {
            let delta = net(reaction, &group.output)
                - net(reaction, &group.killer)
                - group.positives.iter().map(|n| net(reaction, n)).sum::<i64>();
            if delta != 0 {
                return Err(format!(
                    "reaction {} unbalances the audit identity for {}",
                    compiled.crn.display_reaction(idx),
                    group.output
                ));
            }
        }
    }
    Ok(())
}

/// Everything an artifact needs to reproduce or interpret a compiled
/// network, serialized alongside the reaction list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompiledMetadata {
    pub tool_version: String,
    pub gamma: u64,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    pub piece_yes_voters: Vec<Vec<String>>,
    pub piece_no_voters: Vec<Vec<String>>,
    pub roles: BTreeMap<String, String>,
}

pub fn metadata(compiled: &CompiledCrn) -> CompiledMetadata {
    let name = |id: &crate::crn::SpeciesId| compiled.crn.name_of(*id).to_string();
    CompiledMetadata {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        gamma: compiled.gamma,
        inputs: compiled.crn.inputs().iter().map(|id| name(id)).collect(),
        outputs: compiled.crn.outputs().iter().map(|id| name(id)).collect(),
        warnings: compiled.warnings.clone(),
        piece_yes_voters: compiled.piece_yes_voters.clone(),
        piece_no_voters: compiled.piece_no_voters.clone(),
        roles: compiled.roles.iter().map(|(n, r)| (n.clone(), r.to_string())).collect(),
    }
}

pub fn metadata_to_toml(meta: &CompiledMetadata) -> String {
    toml::to_string_pretty(meta).expect("metadata serializes")
}

pub fn metadata_from_toml(text: &str) -> Result<CompiledMetadata, toml::de::Error> {
    toml::from_str(text)
}
