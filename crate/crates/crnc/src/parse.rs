//! Text format for reaction networks.
//!
//! A network document is UTF-8 text, one item per line. `#` starts a comment
//! that runs to the end of the line; blank lines are ignored.
//!
//! Header lines (each at most once, anywhere in the file):
//!
//! ```text
//! species: A, B, X, Y      # optional: declares the full species set
//! inputs: X                # optional: ordered input species, repeats allowed
//! outputs: Y               # optional: ordered output species, no repeats
//! yesvoters: A, B          # optional: marks the network as a decider
//! ```
//!
//! Every other nonempty line is a reaction `LHS -> RHS`, where each side is
//! `0` (empty) or `+`-separated terms. A term is a species identifier with an
//! optional positive multiplicity prefix: `2Y` and `2 Y` both mean two copies
//! of `Y`. Identifiers start with a letter or `_` and continue with letters,
//! digits, `_`, `^`, or `'`. The left side must hold one or two molecules.
//!
//! When a `species:` header is present it must cover every identifier used in
//! the file; otherwise the species set is inferred. Serialization is
//! canonical: a sorted `species:` header, interface headers, then reactions in
//! declaration order with each side's terms sorted by species name, so
//! `parse(serialize(crn)) == crn` for every valid network.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::crn::{Crn, CrnBuilder, CrnError};

/// A parse failure, locating the offending line (1-based).
#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("expected `reactants -> products` or a `name:` header, got {0:?}")]
    MalformedLine(String),
    #[error("malformed term {0:?}")]
    MalformedTerm(String),
    #[error("multiplicity must be a positive integer in {0:?}")]
    BadMultiplicity(String),
    #[error("invalid species identifier {0:?}")]
    BadSpeciesName(String),
    #[error("duplicate `{0}:` header")]
    DuplicateHeader(&'static str),
    #[error("species {0:?} listed twice in `{1}:`")]
    DuplicateSpecies(String, &'static str),
    #[error("species {0:?} is not declared in the `species:` header")]
    UndeclaredSpecies(String),
    #[error("left side of a reaction must not be empty")]
    EmptyReactants,
    #[error("{0} reactant molecules; reactions must be unimolecular or bimolecular")]
    TooManyReactants(u64),
    #[error("duplicate reaction")]
    DuplicateReaction,
    #[error("{0}")]
    Structure(CrnError),
}

fn fail<T>(line: usize, kind: ParseErrorKind) -> Result<T, ParseError> {
    Err(ParseError { line, kind })
}

/// One side of a reaction as parsed `(name, multiplicity)` terms.
type Side = Vec<(String, u32)>;

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '^' || c == '\'')
}

fn parse_term(raw: &str, line: usize) -> Result<(String, u32), ParseError> {
    let term = raw.trim();
    if term.is_empty() {
        return fail(line, ParseErrorKind::MalformedTerm(raw.trim().to_string()));
    }
    let digits: String = term.chars().take_while(|c| c.is_ascii_digit()).collect();
    let rest = term[digits.len()..].trim_start();
    let mult = if digits.is_empty() {
        1
    } else {
        match digits.parse::<u32>() {
            Ok(m) if m >= 1 => m,
            _ => return fail(line, ParseErrorKind::BadMultiplicity(term.to_string())),
        }
    };
    if !valid_name(rest) {
        return fail(line, ParseErrorKind::BadSpeciesName(rest.to_string()));
    }
    Ok((rest.to_string(), mult))
}

fn parse_side(raw: &str, line: usize) -> Result<Side, ParseError> {
    let text = raw.trim();
    if text == "0" {
        return Ok(Vec::new());
    }
    text.split('+').map(|term| parse_term(term, line)).collect()
}

fn parse_name_list(
    raw: &str,
    line: usize,
    header: &'static str,
    allow_repeats: bool,
) -> Result<Vec<String>, ParseError> {
    let mut names = Vec::new();
    let mut seen = BTreeSet::new();
    for part in raw.split(',') {
        let name = part.trim();
        if name.is_empty() {
            if raw.trim().is_empty() {
                break; // an empty list is allowed
            }
            return fail(line, ParseErrorKind::BadSpeciesName(name.to_string()));
        }
        if !valid_name(name) {
            return fail(line, ParseErrorKind::BadSpeciesName(name.to_string()));
        }
        if !seen.insert(name.to_string()) && !allow_repeats {
            return fail(line, ParseErrorKind::DuplicateSpecies(name.to_string(), header));
        }
        names.push(name.to_string());
    }
    Ok(names)
}

/// Parse a network document. See the module docs for the grammar.
pub fn parse_crn(text: &str) -> Result<Crn, ParseError> {
    let mut declared: Option<(Vec<String>, usize)> = None;
    let mut inputs: Option<(Vec<String>, usize)> = None;
    let mut outputs: Option<(Vec<String>, usize)> = None;
    let mut yes_voters: Option<(Vec<String>, usize)> = None;
    // (reactants, products, line) triples in declaration order.
    let mut reactions: Vec<(Side, Side, usize)> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some((lhs, rhs)) = content.split_once("->") {
            let reactants = parse_side(lhs, line)?;
            let products = parse_side(rhs, line)?;
            if reactants.is_empty() {
                return fail(line, ParseErrorKind::EmptyReactants);
            }
            let order: u64 = reactants.iter().map(|&(_, m)| u64::from(m)).sum();
            if order > 2 {
                return fail(line, ParseErrorKind::TooManyReactants(order));
            }
            let normalize = |side: &Side| {
                let mut merged: Vec<(String, u64)> = Vec::new();
                let mut sorted = side.clone();
                sorted.sort();
                for (name, mult) in sorted {
                    match merged.last_mut() {
                        Some((last, m)) if *last == name => *m += u64::from(mult),
                        _ => merged.push((name, u64::from(mult))),
                    }
                }
                merged
            };
            let key = (normalize(&reactants), normalize(&products));
            if reactions.iter().any(|(r, p, _)| (normalize(r), normalize(p)) == key) {
                return fail(line, ParseErrorKind::DuplicateReaction);
            }
            reactions.push((reactants, products, line));
        } else if let Some((key, rest)) = content.split_once(':') {
            let slot: (&mut Option<(Vec<String>, usize)>, &'static str, bool) =
                match key.trim() {
                    "species" => (&mut declared, "species", false),
                    "inputs" => (&mut inputs, "inputs", true),
                    "outputs" => (&mut outputs, "outputs", false),
                    "yesvoters" => (&mut yes_voters, "yesvoters", false),
                    _ => return fail(line, ParseErrorKind::MalformedLine(content.to_string())),
                };
            let (target, header, repeats) = slot;
            if target.is_some() {
                return fail(line, ParseErrorKind::DuplicateHeader(header));
            }
            *target = Some((parse_name_list(rest, line, header, repeats)?, line));
        } else {
            return fail(line, ParseErrorKind::MalformedLine(content.to_string()));
        }
    }

    if let Some((declared_names, _)) = &declared {
        let known: BTreeSet<&str> = declared_names.iter().map(String::as_str).collect();
        let check = |names: &[String], line: usize| -> Result<(), ParseError> {
            for name in names {
                if !known.contains(name.as_str()) {
                    return fail(line, ParseErrorKind::UndeclaredSpecies(name.clone()));
                }
            }
            Ok(())
        };
        for (side_names, line) in [&inputs, &outputs, &yes_voters].into_iter().flatten() {
            check(side_names, *line)?;
        }
        for (reactants, products, line) in &reactions {
            let names: Vec<String> =
                reactants.iter().chain(products).map(|(n, _)| n.clone()).collect();
            check(&names, *line)?;
        }
    }

    let mut builder = CrnBuilder::default();
    if let Some((names, _)) = declared {
        for name in names {
            builder = builder.species(&name);
        }
    }
    fn as_refs(side: &Side) -> Vec<(&str, u32)> {
        side.iter().map(|(n, m)| (n.as_str(), *m)).collect()
    }
    for (reactants, products, _) in &reactions {
        builder = builder.reaction(&as_refs(reactants), &as_refs(products));
    }
    if let Some((names, _)) = inputs {
        for name in names {
            builder = builder.input(&name);
        }
    }
    if let Some((names, _)) = outputs {
        for name in names {
            builder = builder.output(&name);
        }
    }
    if let Some((names, _)) = yes_voters {
        builder = builder.yes_voters(names.iter().map(String::as_str));
    }
    builder.build().map_err(|e| ParseError { line: 0, kind: ParseErrorKind::Structure(e) })
}

/// Serialize a network in canonical form; see the module docs.
pub fn serialize_crn(crn: &Crn) -> String {
    let mut out = String::new();
    write_crn(crn, &mut out).expect("writing to String cannot fail");
    out
}

pub(crate) fn write_crn(crn: &Crn, out: &mut impl fmt::Write) -> fmt::Result {
    let names: Vec<&str> = crn.species_names().collect();
    writeln!(out, "species: {}", names.join(", "))?;
    if !crn.inputs().is_empty() {
        let list: Vec<&str> = crn.inputs().iter().map(|&id| crn.name_of(id)).collect();
        writeln!(out, "inputs: {}", list.join(", "))?;
    }
    if !crn.outputs().is_empty() {
        let list: Vec<&str> = crn.outputs().iter().map(|&id| crn.name_of(id)).collect();
        writeln!(out, "outputs: {}", list.join(", "))?;
    }
    if let Some(voters) = crn.yes_voters() {
        let list: Vec<&str> = voters.iter().map(|&id| crn.name_of(id)).collect();
        writeln!(out, "yesvoters: {}", list.join(", "))?;
    }
    for i in 0..crn.reactions().len() {
        writeln!(out, "{}", crn.display_reaction(i))?;
    }
    Ok(())
}
