//! Core reaction-network model: species, reactions, and integer configurations.
//!
//! A network is a finite set of named species together with a finite set of
//! reactions. Every reaction consumes one or two molecules (unimolecular or
//! bimolecular, never more) and produces an arbitrary multiset of molecules.
//! All reactions share the same unit rate constant; kinetics live in
//! [`crate::kinetics`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Index of a species inside its owning [`Crn`].
///
/// Ids are dense and ordered by species name, so iterating `0..crn.species_len()`
/// visits species alphabetically.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SpeciesId(pub(crate) u32);

impl SpeciesId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Errors produced while assembling or manipulating a network.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CrnError {
    #[error("invalid species name {0:?}: must start with a letter or '_' and contain only letters, digits, '_', '^', '''")]
    BadSpeciesName(String),
    #[error("species {0:?} is not declared in this network")]
    UnknownSpecies(String),
    #[error("reaction {0} has {1} reactant molecules; only unimolecular and bimolecular reactions are supported")]
    ReactantArity(String, u64),
    #[error("reaction {0} has no reactants; spontaneous creation is not allowed")]
    EmptyReactants(String),
    #[error("duplicate reaction {0}")]
    DuplicateReaction(String),
    #[error("species {0:?} listed more than once in outputs")]
    DuplicateOutput(String),
    #[error("species {0:?} is listed both as input and output")]
    InputOutputOverlap(String),
    #[error("reaction {reaction} is not applicable to the given configuration")]
    Inapplicable { reaction: usize },
    #[error("molecule count overflow while applying reaction {reaction}")]
    CountOverflow { reaction: usize },
    #[error("configuration has {got} entries but the network declares {want} species")]
    ConfigurationLength { got: usize, want: usize },
}

/// A single reaction with implicit unit rate.
///
/// Reactant and product lists are kept sorted by species id with multiplicities
/// merged, so two reactions are equal exactly when they describe the same
/// multisets.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Reaction {
    reactants: Vec<(SpeciesId, u32)>,
    products: Vec<(SpeciesId, u32)>,
}

impl Reaction {
    fn new(reactants: Vec<(SpeciesId, u32)>, products: Vec<(SpeciesId, u32)>) -> Self {
        Reaction { reactants, products }
    }

    /// Sorted `(species, multiplicity)` pairs on the left-hand side.
    pub fn reactants(&self) -> &[(SpeciesId, u32)] {
        &self.reactants
    }

    /// Sorted `(species, multiplicity)` pairs on the right-hand side.
    pub fn products(&self) -> &[(SpeciesId, u32)] {
        &self.products
    }

    /// Total number of reactant molecules (1 or 2).
    pub fn order(&self) -> u32 {
        self.reactants.iter().map(|&(_, m)| m).sum()
    }

    /// Net stoichiometric change for `species`.
    pub fn net(&self, species: SpeciesId) -> i64 {
        let gain: i64 = self
            .products
            .iter()
            .filter(|&&(s, _)| s == species)
            .map(|&(_, m)| i64::from(m))
            .sum();
        let loss: i64 = self
            .reactants
            .iter()
            .filter(|&&(s, _)| s == species)
            .map(|&(_, m)| i64::from(m))
            .sum();
        gain - loss
    }

    /// True when `cfg` contains every reactant with sufficient multiplicity.
    pub fn applicable(&self, cfg: &Configuration) -> bool {
        self.reactants
            .iter()
            .all(|&(s, m)| cfg.counts[s.index()] >= u64::from(m))
    }
}

/// A nonnegative integer count for every species of a network.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Configuration {
    counts: Vec<u64>,
}

impl Configuration {
    /// All-zero configuration over `species_len` species.
    pub fn zeros(species_len: usize) -> Self {
        Configuration { counts: vec![0; species_len] }
    }

    /// Configuration from a raw count vector in species-id order.
    pub fn from_counts(counts: Vec<u64>) -> Self {
        Configuration { counts }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty_network(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn get(&self, species: SpeciesId) -> u64 {
        self.counts[species.index()]
    }

    pub fn set(&mut self, species: SpeciesId, count: u64) {
        self.counts[species.index()] = count;
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Total molecule count.
    pub fn total(&self) -> u64 {
        self.counts
            .iter()
            .fold(0u64, |acc, &c| acc.checked_add(c).expect("total molecule count overflowed u64"))
    }

    /// True when no molecule is present.
    pub fn is_zero(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Configuration) -> bool {
        self.counts.len() == other.counts.len()
            && self.counts.iter().zip(&other.counts).all(|(a, b)| a <= b)
    }
}

/// A chemical reaction network: named species, reactions, and interface lists.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Crn {
    species: Vec<String>,
    reactions: Vec<Reaction>,
    inputs: Vec<SpeciesId>,
    outputs: Vec<SpeciesId>,
    yes_voters: Option<BTreeSet<SpeciesId>>,
}

impl Crn {
    pub fn builder() -> CrnBuilder {
        CrnBuilder::default()
    }

    pub fn species_len(&self) -> usize {
        self.species.len()
    }

    pub fn species_names(&self) -> impl Iterator<Item = &str> {
        self.species.iter().map(String::as_str)
    }

    pub fn name_of(&self, id: SpeciesId) -> &str {
        &self.species[id.index()]
    }

    /// Look up a species id by name.
    pub fn species_id(&self, name: &str) -> Option<SpeciesId> {
        self.species
            .binary_search_by(|probe| probe.as_str().cmp(name))
            .ok()
            .map(|i| SpeciesId(i as u32))
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn reaction(&self, index: usize) -> &Reaction {
        &self.reactions[index]
    }

    /// Ordered input species; entries may repeat when two input coordinates
    /// share one species.
    pub fn inputs(&self) -> &[SpeciesId] {
        &self.inputs
    }

    /// Ordered output species.
    pub fn outputs(&self) -> &[SpeciesId] {
        &self.outputs
    }

    /// Yes-voter set, present only when the network is a decider. Every
    /// species of a decider votes: species absent from this set vote no.
    pub fn yes_voters(&self) -> Option<&BTreeSet<SpeciesId>> {
        self.yes_voters.as_ref()
    }

    pub fn is_decider(&self) -> bool {
        self.yes_voters.is_some()
    }

    /// Empty configuration sized for this network.
    pub fn empty_configuration(&self) -> Configuration {
        Configuration::zeros(self.species.len())
    }

    /// Build a configuration from `(name, count)` pairs; repeated names accumulate.
    pub fn configuration(&self, pairs: &[(&str, u64)]) -> Result<Configuration, CrnError> {
        let mut cfg = self.empty_configuration();
        for &(name, count) in pairs {
            let id = self
                .species_id(name)
                .ok_or_else(|| CrnError::UnknownSpecies(name.to_string()))?;
            cfg.counts[id.index()] += count;
        }
        Ok(cfg)
    }

    /// Configuration assigning `x[i]` to the i-th input species (accumulating
    /// over repeated input entries).
    pub fn input_configuration(&self, x: &[u64]) -> Result<Configuration, CrnError> {
        if x.len() != self.inputs.len() {
            return Err(CrnError::ConfigurationLength { got: x.len(), want: self.inputs.len() });
        }
        let mut cfg = self.empty_configuration();
        for (&id, &count) in self.inputs.iter().zip(x) {
            cfg.counts[id.index()] += count;
        }
        Ok(cfg)
    }

    fn check_len(&self, cfg: &Configuration) -> Result<(), CrnError> {
        if cfg.counts.len() != self.species.len() {
            return Err(CrnError::ConfigurationLength {
                got: cfg.counts.len(),
                want: self.species.len(),
            });
        }
        Ok(())
    }

    /// True when reaction `index` can fire in `cfg`.
    pub fn is_applicable(&self, cfg: &Configuration, index: usize) -> bool {
        self.reactions[index].applicable(cfg)
    }

    /// Indices of all reactions applicable in `cfg`, in declaration order.
    pub fn applicable_reactions(&self, cfg: &Configuration) -> Vec<usize> {
        (0..self.reactions.len()).filter(|&i| self.is_applicable(cfg, i)).collect()
    }

    /// Apply reaction `index` to `cfg`, yielding the successor configuration.
    ///
    /// Fails if the reaction is not applicable or a product count would
    /// overflow; counts are never silently wrapped.
    pub fn apply(&self, cfg: &Configuration, index: usize) -> Result<Configuration, CrnError> {
        self.check_len(cfg)?;
        let rxn = &self.reactions[index];
        let mut next = cfg.clone();
        for &(s, m) in &rxn.reactants {
            next.counts[s.index()] = next.counts[s.index()]
                .checked_sub(u64::from(m))
                .ok_or(CrnError::Inapplicable { reaction: index })?;
        }
        for &(s, m) in &rxn.products {
            next.counts[s.index()] = next.counts[s.index()]
                .checked_add(u64::from(m))
                .ok_or(CrnError::CountOverflow { reaction: index })?;
        }
        Ok(next)
    }

    /// Render a configuration as `{A: 2, B: 1}`, omitting zero species.
    pub fn display_configuration(&self, cfg: &Configuration) -> String {
        let mut parts = Vec::new();
        for (i, &count) in cfg.counts.iter().enumerate() {
            if count > 0 {
                parts.push(format!("{}: {}", self.species[i], count));
            }
        }
        format!("{{{}}}", parts.join(", "))
    }

    /// Render one reaction in the same syntax the text format uses.
    pub fn display_reaction(&self, index: usize) -> String {
        let rxn = &self.reactions[index];
        let side = |terms: &[(SpeciesId, u32)]| -> String {
            if terms.is_empty() {
                return "0".to_string();
            }
            terms
                .iter()
                .map(|&(s, m)| {
                    if m == 1 {
                        self.name_of(s).to_string()
                    } else {
                        format!("{}{}", m, self.name_of(s))
                    }
                })
                .collect::<Vec<_>>()
                .join(" + ")
        };
        format!("{} -> {}", side(&rxn.reactants), side(&rxn.products))
    }
}

fn valid_species_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '^' || c == '\'')
}

/// Staged construction of a [`Crn`].
///
/// Species mentioned in reactions or interface lists are declared implicitly;
/// `species` is only needed for species that appear nowhere else. `build`
/// sorts the species table by name, so ids are stable for a given species set.
#[derive(Default)]
pub struct CrnBuilder {
    species: BTreeSet<String>,
    reactions: Vec<(Vec<(String, u32)>, Vec<(String, u32)>)>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    yes_voters: Option<Vec<String>>,
}

impl CrnBuilder {
    pub fn species(mut self, name: &str) -> Self {
        self.species.insert(name.to_string());
        self
    }

    /// Add a reaction given `(species, multiplicity)` terms for each side.
    /// Repeated species within a side accumulate.
    pub fn reaction(mut self, reactants: &[(&str, u32)], products: &[(&str, u32)]) -> Self {
        let own = |terms: &[(&str, u32)]| {
            terms.iter().map(|&(n, m)| (n.to_string(), m)).collect::<Vec<_>>()
        };
        for &(n, _) in reactants.iter().chain(products) {
            self.species.insert(n.to_string());
        }
        self.reactions.push((own(reactants), own(products)));
        self
    }

    pub fn input(mut self, name: &str) -> Self {
        self.species.insert(name.to_string());
        self.inputs.push(name.to_string());
        self
    }

    pub fn output(mut self, name: &str) -> Self {
        self.species.insert(name.to_string());
        self.outputs.push(name.to_string());
        self
    }

    /// Declare the yes-voter set, marking the network as a decider.
    pub fn yes_voters<'a>(mut self, names: impl IntoIterator<Item = &'a str>) -> Self {
        let list: Vec<String> = names.into_iter().map(str::to_string).collect();
        for n in &list {
            self.species.insert(n.clone());
        }
        self.yes_voters = Some(list);
        self
    }

    pub fn build(self) -> Result<Crn, CrnError> {
        for name in &self.species {
            if !valid_species_name(name) {
                return Err(CrnError::BadSpeciesName(name.clone()));
            }
        }
        let species: Vec<String> = self.species.into_iter().collect();
        let index: BTreeMap<&str, SpeciesId> = species
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), SpeciesId(i as u32)))
            .collect();

        let intern_side = |terms: &[(String, u32)]| -> Vec<(SpeciesId, u32)> {
            let mut merged: BTreeMap<SpeciesId, u32> = BTreeMap::new();
            for (name, mult) in terms {
                *merged.entry(index[name.as_str()]).or_insert(0) += *mult;
            }
            merged.into_iter().filter(|&(_, m)| m > 0).collect()
        };

        let mut reactions = Vec::with_capacity(self.reactions.len());
        for (reactants, products) in &self.reactions {
            let r = intern_side(reactants);
            let p = intern_side(products);
            let rxn = Reaction::new(r, p);
            let shown = || {
                let name = |id: SpeciesId| species[id.index()].clone();
                let side = |terms: &[(SpeciesId, u32)]| {
                    if terms.is_empty() {
                        "0".to_string()
                    } else {
                        terms
                            .iter()
                            .map(|&(s, m)| {
                                if m == 1 { name(s) } else { format!("{}{}", m, name(s)) }
                            })
                            .collect::<Vec<_>>()
                            .join(" + ")
                    }
                };
                format!("{} -> {}", side(&rxn.reactants), side(&rxn.products))
            };
            let order = u64::from(rxn.order());
            if order == 0 {
                return Err(CrnError::EmptyReactants(shown()));
            }
            if order > 2 {
                return Err(CrnError::ReactantArity(shown(), order));
            }
            if reactions.contains(&rxn) {
                return Err(CrnError::DuplicateReaction(shown()));
            }
            reactions.push(rxn);
        }

        let lookup = |name: &String| -> Result<SpeciesId, CrnError> {
            index.get(name.as_str()).copied().ok_or_else(|| CrnError::UnknownSpecies(name.clone()))
        };
        let inputs: Vec<SpeciesId> = self.inputs.iter().map(lookup).collect::<Result<_, _>>()?;
        let outputs: Vec<SpeciesId> = self.outputs.iter().map(lookup).collect::<Result<_, _>>()?;
        let mut seen = BTreeSet::new();
        for &o in &outputs {
            if !seen.insert(o) {
                return Err(CrnError::DuplicateOutput(species[o.index()].clone()));
            }
            if inputs.contains(&o) {
                return Err(CrnError::InputOutputOverlap(species[o.index()].clone()));
            }
        }
        let yes_voters = match self.yes_voters {
            None => None,
            Some(list) => {
                Some(list.iter().map(lookup).collect::<Result<BTreeSet<_>, _>>()?)
            }
        };

        Ok(Crn { species, reactions, inputs, outputs, yes_voters })
    }
}

impl fmt::Display for Crn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.reactions.len() {
            writeln!(f, "{}", self.display_reaction(i))?;
        }
        Ok(())
    }
}
