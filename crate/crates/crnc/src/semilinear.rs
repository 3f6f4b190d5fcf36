//! Piecewise affine functions over nonnegative integer vectors, the source
//! language of the compiler.
//!
//! A function spec maps `N^k -> N^l` and is given as an ordered list of
//! pieces. Each piece pairs an affine partial map
//!
//! ```text
//! y(j) = b_j + (1/d_j) * sum_i coeff[i][j] * (x(i) - c_i)
//! ```
//!
//! with a domain predicate built from linear threshold and congruence atoms.
//! On input `x` the function takes the value of the first piece (in list
//! order) whose domain holds, so later pieces act as fallbacks.
//!
//! # Spec documents
//!
//! The `.fnspec` text form is line oriented; `#` starts a comment. The file
//! opens with the two arities and is followed by one block per piece whose
//! fields appear in fixed order:
//!
//! ```text
//! arity_in: 2
//! arity_out: 1
//!
//! piece:
//! coeff: 2 -1        # k*l integers, row-major: all outputs for input 1, ...
//! denom: 1           # l positive integers
//! b: 0               # l nonnegative integers
//! c: 0 0             # k nonnegative integers
//! domain: (ge 2 -1 0)
//! ```
//!
//! Domain formulas are s-expressions over `(ge a1 .. ak t)`, meaning
//! `sum a_i*x_i >= t`, and `(mod a1 .. ak m r)`, meaning
//! `sum a_i*x_i = r (mod m)`, combined with `(and ..)`, `(or ..)`, `(not ..)`,
//! and the constant `true`.

use std::fmt;

use thiserror::Error;

/// An atomic domain condition over `x in N^k`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Atom {
    /// `sum coeffs[i] * x[i] >= threshold`
    Threshold { coeffs: Vec<i64>, threshold: i64 },
    /// `sum coeffs[i] * x[i] = residue (mod modulus)`, `modulus >= 2`
    Mod { coeffs: Vec<i64>, modulus: u64, residue: u64 },
}

impl Atom {
    pub fn arity(&self) -> usize {
        match self {
            Atom::Threshold { coeffs, .. } | Atom::Mod { coeffs, .. } => coeffs.len(),
        }
    }

    fn linear_form(coeffs: &[i64], x: &[u64]) -> i128 {
        coeffs.iter().zip(x).map(|(&a, &v)| i128::from(a) * i128::from(v)).sum()
    }

    /// Evaluate the atom at `x`; `x.len()` must equal the arity.
    pub fn eval(&self, x: &[u64]) -> bool {
        match self {
            Atom::Threshold { coeffs, threshold } => {
                Self::linear_form(coeffs, x) >= i128::from(*threshold)
            }
            Atom::Mod { coeffs, modulus, residue } => {
                Self::linear_form(coeffs, x).rem_euclid(i128::from(*modulus))
                    == i128::from(*residue)
            }
        }
    }
}

/// Boolean combination of [`Atom`]s.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum DomainPredicate {
    True,
    Atom(Atom),
    Not(Box<DomainPredicate>),
    And(Vec<DomainPredicate>),
    Or(Vec<DomainPredicate>),
}

impl DomainPredicate {
    pub fn eval(&self, x: &[u64]) -> bool {
        match self {
            DomainPredicate::True => true,
            DomainPredicate::Atom(atom) => atom.eval(x),
            DomainPredicate::Not(inner) => !inner.eval(x),
            DomainPredicate::And(parts) => parts.iter().all(|p| p.eval(x)),
            DomainPredicate::Or(parts) => parts.iter().any(|p| p.eval(x)),
        }
    }

    /// All atoms in the formula, left to right, duplicates included.
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            DomainPredicate::True => {}
            DomainPredicate::Atom(a) => out.push(a),
            DomainPredicate::Not(inner) => inner.collect_atoms(out),
            DomainPredicate::And(parts) | DomainPredicate::Or(parts) => {
                for p in parts {
                    p.collect_atoms(out);
                }
            }
        }
    }

    /// Evaluate with atom truth values supplied externally, in the order
    /// [`Self::atoms`] lists them. Used by the predicate compiler, which
    /// tracks each atom with a dedicated protocol component.
    pub fn eval_with(&self, values: &mut impl Iterator<Item = bool>) -> bool {
        match self {
            DomainPredicate::True => true,
            DomainPredicate::Atom(_) => values.next().expect("one value per atom"),
            DomainPredicate::Not(inner) => !inner.eval_with(values),
            DomainPredicate::And(parts) => {
                // No short-circuiting: every atom value must be consumed.
                parts.iter().fold(true, |acc, p| p.eval_with(values) && acc)
            }
            DomainPredicate::Or(parts) => {
                parts.iter().fold(false, |acc, p| p.eval_with(values) || acc)
            }
        }
    }
}

/// The affine part of one piece.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AffinePiece {
    input_arity: usize,
    output_arity: usize,
    /// Row-major `k x l`: `coeff[i*l + j]` scales input `i` in output `j`.
    coeff: Vec<i64>,
    denom: Vec<u64>,
    offset_b: Vec<u64>,
    offset_c: Vec<u64>,
}

/// Why a piece (or the whole function) has no value at some input.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("input {coordinate} is {value}, below the required offset {offset}")]
    InputBelowOffset { coordinate: usize, value: u64, offset: u64 },
    #[error("output {output}: numerator {numerator} is not divisible by {denominator}")]
    NotDivisible { output: usize, numerator: i128, denominator: u64 },
    #[error("output {output} evaluates to the negative value {value}")]
    NegativeOutput { output: usize, value: i128 },
    #[error("no piece domain holds at {0:?}")]
    NoPieceApplies(Vec<u64>),
    #[error("input has {got} coordinates, expected {want}")]
    InputArity { got: usize, want: usize },
}

/// Structural problems in a spec, caught at construction time.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpecError {
    #[error("a function spec needs at least one piece")]
    NoPieces,
    #[error("piece {piece}: field {field} has {got} entries, expected {want}")]
    FieldLength { piece: usize, field: &'static str, got: usize, want: usize },
    #[error("piece {piece}: denominators must be positive")]
    ZeroDenominator { piece: usize },
    #[error("piece {piece}: domain atom has arity {got}, expected {want}")]
    AtomArity { piece: usize, got: usize, want: usize },
    #[error("piece {piece}: modulus must be at least 2")]
    BadModulus { piece: usize },
    #[error("piece {piece}: residue {residue} is not below modulus {modulus}")]
    BadResidue { piece: usize, residue: u64, modulus: u64 },
    #[error("arities must be positive")]
    ZeroArity,
}

impl AffinePiece {
    pub fn new(
        input_arity: usize,
        output_arity: usize,
        coeff: Vec<i64>,
        denom: Vec<u64>,
        offset_b: Vec<u64>,
        offset_c: Vec<u64>,
    ) -> Result<Self, SpecError> {
        let piece = AffinePiece { input_arity, output_arity, coeff, denom, offset_b, offset_c };
        piece.check(0)?;
        Ok(piece)
    }

    fn check(&self, index: usize) -> Result<(), SpecError> {
        if self.input_arity == 0 || self.output_arity == 0 {
            return Err(SpecError::ZeroArity);
        }
        let want = |field, got, want| {
            if got != want {
                Err(SpecError::FieldLength { piece: index, field, got, want })
            } else {
                Ok(())
            }
        };
        want("coeff", self.coeff.len(), self.input_arity * self.output_arity)?;
        want("denom", self.denom.len(), self.output_arity)?;
        want("b", self.offset_b.len(), self.output_arity)?;
        want("c", self.offset_c.len(), self.input_arity)?;
        if self.denom.iter().any(|&d| d == 0) {
            return Err(SpecError::ZeroDenominator { piece: index });
        }
        Ok(())
    }

    pub fn input_arity(&self) -> usize {
        self.input_arity
    }

    pub fn output_arity(&self) -> usize {
        self.output_arity
    }

    pub fn coefficient(&self, input: usize, output: usize) -> i64 {
        self.coeff[input * self.output_arity + output]
    }

    pub fn denominator(&self, output: usize) -> u64 {
        self.denom[output]
    }

    pub fn offset_b(&self, output: usize) -> u64 {
        self.offset_b[output]
    }

    pub fn offset_c(&self, input: usize) -> u64 {
        self.offset_c[input]
    }

    /// Evaluate the piece at `x`, ignoring its domain predicate.
    pub fn eval(&self, x: &[u64]) -> Result<Vec<u64>, EvalError> {
        if x.len() != self.input_arity {
            return Err(EvalError::InputArity { got: x.len(), want: self.input_arity });
        }
        for (i, (&xi, &ci)) in x.iter().zip(&self.offset_c).enumerate() {
            if xi < ci {
                return Err(EvalError::InputBelowOffset { coordinate: i, value: xi, offset: ci });
            }
        }
        let mut out = Vec::with_capacity(self.output_arity);
        for j in 0..self.output_arity {
            let numerator: i128 = (0..self.input_arity)
                .map(|i| {
                    i128::from(self.coefficient(i, j))
                        * i128::from(x[i] - self.offset_c[i])
                })
                .sum();
            let d = i128::from(self.denom[j]);
            if numerator.rem_euclid(d) != 0 {
                return Err(EvalError::NotDivisible {
                    output: j,
                    numerator,
                    denominator: self.denom[j],
                });
            }
            let value = i128::from(self.offset_b[j]) + numerator / d;
            if value < 0 {
                return Err(EvalError::NegativeOutput { output: j, value });
            }
            out.push(u64::try_from(value).expect("outputs bounded by i128 checks"));
        }
        Ok(out)
    }
}

/// One piece: an affine map guarded by a domain predicate.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Piece {
    pub affine: AffinePiece,
    pub domain: DomainPredicate,
}

/// A complete piecewise affine function spec.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FunctionSpec {
    input_arity: usize,
    output_arity: usize,
    pieces: Vec<Piece>,
}

impl FunctionSpec {
    pub fn new(
        input_arity: usize,
        output_arity: usize,
        pieces: Vec<Piece>,
    ) -> Result<Self, SpecError> {
        if input_arity == 0 || output_arity == 0 {
            return Err(SpecError::ZeroArity);
        }
        if pieces.is_empty() {
            return Err(SpecError::NoPieces);
        }
        for (index, piece) in pieces.iter().enumerate() {
            let mut affine = piece.affine.clone();
            affine.input_arity = input_arity;
            affine.output_arity = output_arity;
            affine.check(index)?;
            for atom in piece.domain.atoms() {
                if atom.arity() != input_arity {
                    return Err(SpecError::AtomArity {
                        piece: index,
                        got: atom.arity(),
                        want: input_arity,
                    });
                }
                if let Atom::Mod { modulus, residue, .. } = atom {
                    if *modulus < 2 {
                        return Err(SpecError::BadModulus { piece: index });
                    }
                    if residue >= modulus {
                        return Err(SpecError::BadResidue {
                            piece: index,
                            residue: *residue,
                            modulus: *modulus,
                        });
                    }
                }
            }
        }
        Ok(FunctionSpec { input_arity, output_arity, pieces })
    }

    pub fn input_arity(&self) -> usize {
        self.input_arity
    }

    pub fn output_arity(&self) -> usize {
        self.output_arity
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Index of the piece that handles `x`: the first whose domain holds.
    pub fn piece_for(&self, x: &[u64]) -> Option<usize> {
        self.pieces.iter().position(|p| p.domain.eval(x))
    }

    /// Evaluate the function at `x` using first-match piece selection.
    pub fn eval(&self, x: &[u64]) -> Result<Vec<u64>, EvalError> {
        if x.len() != self.input_arity {
            return Err(EvalError::InputArity { got: x.len(), want: self.input_arity });
        }
        match self.piece_for(x) {
            Some(i) => self.pieces[i].affine.eval(x),
            None => Err(EvalError::NoPieceApplies(x.to_vec())),
        }
    }
}

/// Outcome of exhaustively checking a spec on the box `[0, bound]^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub bound: u64,
    pub points_checked: u64,
    pub first_failure: Option<(Vec<u64>, EvalError)>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.first_failure.is_none()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.first_failure {
            None => write!(f, "ok: {} points up to bound {}", self.points_checked, self.bound),
            Some((x, err)) => write!(f, "failed at {:?}: {}", x, err),
        }
    }
}

/// Check that every `x` in `[0, bound]^k` is covered by some piece and that
/// the selected piece evaluates cleanly (offsets satisfied, divisibility,
/// nonnegative outputs).
pub fn validate(spec: &FunctionSpec, bound: u64) -> ValidationReport {
    let k = spec.input_arity();
    let mut x = vec![0u64; k];
    let mut checked = 0u64;
    loop {
        checked += 1;
        if let Err(err) = spec.eval(&x) {
            return ValidationReport { bound, points_checked: checked, first_failure: Some((x, err)) };
        }
        // Odometer increment over the box.
        let mut pos = 0;
        loop {
            if pos == k {
                return ValidationReport { bound, points_checked: checked, first_failure: None };
            }
            if x[pos] < bound {
                x[pos] += 1;
                break;
            }
            x[pos] = 0;
            pos += 1;
        }
    }
}

// ---- text format ----

/// Parse failure for `.fnspec` documents, locating the offending line.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct FnSpecParseError {
    pub line: usize,
    pub message: String,
}

fn spec_fail<T>(line: usize, message: impl Into<String>) -> Result<T, FnSpecParseError> {
    Err(FnSpecParseError { line, message: message.into() })
}

struct Lines<'a> {
    // (line number, content) with comments and blanks removed
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .filter_map(|(i, raw)| {
                let content = raw.split('#').next().unwrap_or("").trim();
                if content.is_empty() { None } else { Some((i + 1, content)) }
            })
            .collect();
        Lines { items, pos: 0 }
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.items.get(self.pos).copied()
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let item = self.peek();
        self.pos += 1;
        item
    }

    fn last_line(&self) -> usize {
        self.items.last().map(|&(n, _)| n).unwrap_or(0)
    }
}

fn expect_field<'a>(lines: &mut Lines<'a>, key: &str) -> Result<(usize, &'a str), FnSpecParseError> {
    match lines.next() {
        Some((line, content)) => match content.split_once(':') {
            Some((k, rest)) if k.trim() == key => Ok((line, rest.trim())),
            _ => spec_fail(line, format!("expected `{key}:`, got {content:?}")),
        },
        None => spec_fail(0, format!("unexpected end of document, expected `{key}:`")),
    }
}

fn parse_ints<T: std::str::FromStr>(
    raw: &str,
    line: usize,
    field: &str,
) -> Result<Vec<T>, FnSpecParseError> {
    raw.split_whitespace()
        .map(|tok| {
            tok.parse::<T>()
                .map_err(|_| FnSpecParseError {
                    line,
                    message: format!("invalid integer {tok:?} in `{field}:`"),
                })
        })
        .collect()
}

fn parse_formula(raw: &str, line: usize) -> Result<DomainPredicate, FnSpecParseError> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for ch in raw.chars() {
        match ch {
            '(' | ')' => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
                tokens.push(ch.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    let mut pos = 0;
    let formula = parse_formula_tokens(&tokens, &mut pos, line)?;
    if pos != tokens.len() {
        return spec_fail(line, "trailing tokens after domain formula");
    }
    Ok(formula)
}

fn parse_formula_tokens(
    tokens: &[String],
    pos: &mut usize,
    line: usize,
) -> Result<DomainPredicate, FnSpecParseError> {
    let tok = match tokens.get(*pos) {
        Some(t) => t.as_str(),
        None => return spec_fail(line, "unexpected end of domain formula"),
    };
    *pos += 1;
    match tok {
        "true" => Ok(DomainPredicate::True),
        "(" => {
            let head = match tokens.get(*pos) {
                Some(t) => t.clone(),
                None => return spec_fail(line, "unexpected end of domain formula"),
            };
            *pos += 1;
            let result = match head.as_str() {
                "ge" | "mod" => {
                    let mut ints: Vec<i64> = Vec::new();
                    while let Some(t) = tokens.get(*pos) {
                        if t == ")" {
                            break;
                        }
                        match t.parse::<i64>() {
                            Ok(v) => ints.push(v),
                            Err(_) => {
                                return spec_fail(line, format!("invalid integer {t:?} in atom"))
                            }
                        }
                        *pos += 1;
                    }
                    if head == "ge" {
                        if ints.len() < 2 {
                            return spec_fail(line, "(ge ...) needs coefficients and a threshold");
                        }
                        let threshold = ints.pop().unwrap();
                        DomainPredicate::Atom(Atom::Threshold { coeffs: ints, threshold })
                    } else {
                        if ints.len() < 3 {
                            return spec_fail(
                                line,
                                "(mod ...) needs coefficients, a modulus, and a residue",
                            );
                        }
                        let residue = ints.pop().unwrap();
                        let modulus = ints.pop().unwrap();
                        if modulus < 2 {
                            return spec_fail(line, "modulus must be at least 2");
                        }
                        if residue < 0 || residue >= modulus {
                            return spec_fail(line, "residue must lie in [0, modulus)");
                        }
                        DomainPredicate::Atom(Atom::Mod {
                            coeffs: ints,
                            modulus: modulus as u64,
                            residue: residue as u64,
                        })
                    }
                }
                "and" | "or" => {
                    let mut parts = Vec::new();
                    while tokens.get(*pos).map(String::as_str) != Some(")") {
                        parts.push(parse_formula_tokens(tokens, pos, line)?);
                    }
                    if parts.is_empty() {
                        return spec_fail(line, format!("({head} ...) needs at least one operand"));
                    }
                    if head == "and" {
                        DomainPredicate::And(parts)
                    } else {
                        DomainPredicate::Or(parts)
                    }
                }
                "not" => {
                    let inner = parse_formula_tokens(tokens, pos, line)?;
                    DomainPredicate::Not(Box::new(inner))
                }
                other => return spec_fail(line, format!("unknown formula head {other:?}")),
            };
            match tokens.get(*pos).map(String::as_str) {
                Some(")") => {
                    *pos += 1;
                    Ok(result)
                }
                _ => spec_fail(line, "missing `)` in domain formula"),
            }
        }
        other => spec_fail(line, format!("unexpected token {other:?} in domain formula")),
    }
}

/// Parse a `.fnspec` document; see the module docs for the grammar.
pub fn parse_fnspec(text: &str) -> Result<FunctionSpec, FnSpecParseError> {
    let mut lines = Lines::new(text);
    let (line_in, raw) = expect_field(&mut lines, "arity_in")?;
    let input_arity: usize = match raw.parse() {
        Ok(v) if v >= 1 => v,
        _ => return spec_fail(line_in, "arity_in must be a positive integer"),
    };
    let (line_out, raw) = expect_field(&mut lines, "arity_out")?;
    let output_arity: usize = match raw.parse() {
        Ok(v) if v >= 1 => v,
        _ => return spec_fail(line_out, "arity_out must be a positive integer"),
    };

    let mut pieces = Vec::new();
    while let Some((line, content)) = lines.peek() {
        if content != "piece:" {
            return spec_fail(line, format!("expected `piece:`, got {content:?}"));
        }
        lines.next();
        let (l, raw) = expect_field(&mut lines, "coeff")?;
        let coeff: Vec<i64> = parse_ints(raw, l, "coeff")?;
        if coeff.len() != input_arity * output_arity {
            return spec_fail(
                l,
                format!("coeff needs {} integers, got {}", input_arity * output_arity, coeff.len()),
            );
        }
        let (l, raw) = expect_field(&mut lines, "denom")?;
        let denom: Vec<u64> = parse_ints(raw, l, "denom")?;
        if denom.iter().any(|&d| d == 0) {
            return spec_fail(l, "denominators must be positive");
        }
        let (l, raw) = expect_field(&mut lines, "b")?;
        let offset_b: Vec<u64> = parse_ints(raw, l, "b")?;
        let (l, raw) = expect_field(&mut lines, "c")?;
        let offset_c: Vec<u64> = parse_ints(raw, l, "c")?;
        let (l, raw) = expect_field(&mut lines, "domain")?;
        let domain = parse_formula(raw, l)?;
        let affine = AffinePiece { input_arity, output_arity, coeff, denom, offset_b, offset_c };
        pieces.push(Piece { affine, domain });
    }
    if pieces.is_empty() {
        return spec_fail(lines.last_line(), "a function spec needs at least one piece");
    }
    FunctionSpec::new(input_arity, output_arity, pieces).map_err(|e| FnSpecParseError {
        line: lines.last_line(),
        message: e.to_string(),
    })
}

fn write_formula(f: &DomainPredicate, out: &mut String) {
    match f {
        DomainPredicate::True => out.push_str("true"),
        DomainPredicate::Atom(Atom::Threshold { coeffs, threshold }) => {
            out.push_str("(ge");
            for a in coeffs {
                out.push_str(&format!(" {a}"));
            }
            out.push_str(&format!(" {threshold})"));
        }
        DomainPredicate::Atom(Atom::Mod { coeffs, modulus, residue }) => {
            out.push_str("(mod");
            for a in coeffs {
                out.push_str(&format!(" {a}"));
            }
            out.push_str(&format!(" {modulus} {residue})"));
        }
        DomainPredicate::Not(inner) => {
            out.push_str("(not ");
            write_formula(inner, out);
            out.push(')');
        }
        DomainPredicate::And(parts) | DomainPredicate::Or(parts) => {
            out.push_str(if matches!(f, DomainPredicate::And(_)) { "(and" } else { "(or" });
            for p in parts {
                out.push(' ');
                write_formula(p, out);
            }
            out.push(')');
        }
    }
}

/// Serialize a spec in the canonical `.fnspec` form.
pub fn serialize_fnspec(spec: &FunctionSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!("arity_in: {}\n", spec.input_arity()));
    out.push_str(&format!("arity_out: {}\n", spec.output_arity()));
    for piece in spec.pieces() {
        out.push_str("\npiece:\n");
        let ints = |values: &mut dyn Iterator<Item = String>| -> String {
            values.collect::<Vec<_>>().join(" ")
        };
        let a = &piece.affine;
        out.push_str(&format!(
            "coeff: {}\n",
            ints(&mut (0..a.input_arity * a.output_arity).map(|i| a.coeff[i].to_string()))
        ));
        out.push_str(&format!("denom: {}\n", ints(&mut a.denom.iter().map(u64::to_string))));
        out.push_str(&format!("b: {}\n", ints(&mut a.offset_b.iter().map(u64::to_string))));
        out.push_str(&format!("c: {}\n", ints(&mut a.offset_c.iter().map(u64::to_string))));
        let mut formula = String::new();
        write_formula(&piece.domain, &mut formula);
        out.push_str(&format!("domain: {formula}\n"));
    }
    out
}
