//! Compilation of one affine piece into a reaction fragment that
//! diff-represents its value: the fragment monotonically produces two output
//! species per output coordinate, an additive one and a subtractive one,
//! whose final difference equals the piece value.
//!
//! For a piece `y(j) = b_j + (1/d_j) * sum_a n_{a,j} * (x(a) - c_a)` the
//! fragment consists of, per input coordinate `a`:
//!
//! * a seeding reaction turning each input copy into a `c`-offset token plus
//!   a `B_j` token and `b_j` additive outputs per output coordinate,
//! * a merging table on the offset tokens that discards the first `c_a`
//!   copies and forwards the surplus,
//! * a fan-out giving each output coordinate its own copy,
//! * a coefficient step expanding each copy into `|n_{a,j}|` divider tokens
//!   (additive or subtractive by the sign of the coefficient),
//!
//! and per output coordinate `j`:
//!
//! * a merging table dividing the additive/subtractive token counts by `d_j`,
//! * a `B_j + B_j -> B_j + b_j(subtractive)` table that rebates the `b_j`
//!   seeded on all but one input molecule.
//!
//! All merging tables conserve a weighted token sum, so the final counts are
//! the same on every maximal execution; the fragment always terminates
//! because each reaction strictly decreases a lexicographic potential over
//! the processing stages.

use crate::checker::build_reachability_graph;
use crate::crn::{Crn, CrnBuilder};
use crate::semilinear::AffinePiece;

/// Reactant or product list as `(species, multiplicity)` pairs.
pub type Terms = Vec<(String, u32)>;

/// The compiled fragment for one piece, in string form so fragments can be
/// merged into a larger network before species interning.
#[derive(Clone, Debug)]
pub struct AffineFragment {
    pub piece_index: usize,
    /// Species consumed by the seeding reactions, one per input coordinate.
    pub input_aliases: Vec<String>,
    /// Additive output species per output coordinate; `None` when the piece
    /// can never produce it (zero coefficient column and zero offset).
    pub output_p: Vec<Option<String>>,
    /// Subtractive output species per output coordinate.
    pub output_c: Vec<Option<String>>,
    pub reactions: Vec<(Terms, Terms)>,
    /// Upper bound on fragment molecules alive per input molecule, at any
    /// time during any execution.
    pub gamma: u64,
}

fn alias(i: usize, a: usize) -> String {
    format!("X^aff_{i}_{a}")
}

fn offset_token(i: usize, a: usize, m: u64) -> String {
    format!("C_{i}_{a}_{m}")
}

fn surplus(i: usize, a: usize) -> String {
    format!("X'_{i}_{a}")
}

fn copy_for_output(i: usize, a: usize, j: usize) -> String {
    format!("X^cp_{i}_{a}_{j}")
}

fn divider(i: usize, j: usize, positive: bool, m: u64) -> String {
    let sign = if positive { "P" } else { "C" };
    format!("D^{sign}_{i}_{j}_{m}")
}

fn b_token(i: usize, j: usize) -> String {
    format!("B_{i}_{j}")
}

fn output_name(i: usize, j: usize, positive: bool) -> String {
    let sign = if positive { "P" } else { "C" };
    format!("Yh^{sign}_{i}_{j}")
}

fn push(reactions: &mut Vec<(Terms, Terms)>, reactants: Terms, products: Terms) {
    reactions.push((reactants, products));
}

/// Emit the merging table that turns `count` unit tokens into
/// `floor(count / divisor)` wrap outputs: pairs of partial sums combine, and
/// every time the running value reaches `divisor` one output is released.
fn merge_table(
    reactions: &mut Vec<(Terms, Terms)>,
    token: &dyn Fn(u64) -> String,
    divisor: u64,
    wrap_output: &str,
) {
    if divisor == 1 {
        push(
            reactions,
            vec![(token(1), 1)],
            vec![(wrap_output.to_string(), 1)],
        );
        return;
    }
    for m in 1..divisor {
        for p in m..divisor {
            let reactants = if m == p {
                vec![(token(m), 2)]
            } else {
                vec![(token(m), 1), (token(p), 1)]
            };
            let total = m + p;
            let mut products = Vec::new();
            if total < divisor {
                products.push((token(total), 1));
            } else {
                products.push((wrap_output.to_string(), 1));
                if total - divisor > 0 {
                    products.push((token(total - divisor), 1));
                }
            }
            push(reactions, reactants, products);
        }
    }
}

/// Compile one affine piece; `piece_index` is 1-based and namespaces every
/// fragment species.
pub fn compile_affine(piece: &AffinePiece, piece_index: usize) -> AffineFragment {
    let i = piece_index;
    let k = piece.input_arity();
    let l = piece.output_arity();
    let mut reactions: Vec<(Terms, Terms)> = Vec::new();

    let produces_p =
        |j: usize| piece.offset_b(j) > 0 || (0..k).any(|a| piece.coefficient(a, j) > 0);
    let produces_c =
        |j: usize| piece.offset_b(j) > 0 || (0..k).any(|a| piece.coefficient(a, j) < 0);

    // Seeding: every input molecule becomes an offset token and carries the
    // per-output payload (a B token and b_j additive outputs).
    for a in 0..k {
        let mut products: Terms = vec![(offset_token(i, a + 1, 1), 1)];
        for j in 0..l {
            let b = piece.offset_b(j);
            if b > 0 {
                products.push((b_token(i, j + 1), 1));
                products.push((output_name(i, j + 1, true), u32::try_from(b).expect("b fits")));
            }
        }
        push(&mut reactions, vec![(alias(i, a + 1), 1)], products);
    }

    // c-offset: the first c_a offset tokens are absorbed, the rest forward.
    for a in 0..k {
        let c = piece.offset_c(a);
        if c == 0 {
            push(
                &mut reactions,
                vec![(offset_token(i, a + 1, 1), 1)],
                vec![(surplus(i, a + 1), 1)],
            );
            continue;
        }
        for m in 1..=c {
            for p in m..=c {
                let reactants = if m == p {
                    vec![(offset_token(i, a + 1, m), 2)]
                } else {
                    vec![(offset_token(i, a + 1, m), 1), (offset_token(i, a + 1, p), 1)]
                };
                let total = m + p;
                let kept = total.min(c);
                let forwarded = total - kept;
                let mut products = vec![(offset_token(i, a + 1, kept), 1)];
                if forwarded > 0 {
                    products.push((surplus(i, a + 1), u32::try_from(forwarded).expect("small")));
                }
                push(&mut reactions, reactants, products);
            }
        }
    }

    // Fan-out: one copy of each surplus token per output coordinate.
    for a in 0..k {
        let products: Terms =
            (0..l).map(|j| (copy_for_output(i, a + 1, j + 1), 1)).collect();
        push(&mut reactions, vec![(surplus(i, a + 1), 1)], products);
    }

    // Coefficient step: each copy expands into |n| divider tokens of the
    // coefficient's sign (or vanishes on a zero coefficient).
    for a in 0..k {
        for j in 0..l {
            let n = piece.coefficient(a, j);
            let products: Terms = if n == 0 {
                Vec::new()
            } else {
                vec![(
                    divider(i, j + 1, n > 0, 1),
                    u32::try_from(n.unsigned_abs()).expect("coefficient fits"),
                )]
            };
            push(&mut reactions, vec![(copy_for_output(i, a + 1, j + 1), 1)], products);
        }
    }

    // Division: merge divider tokens, releasing one output per d_j units.
    for j in 0..l {
        let d = piece.denominator(j);
        for positive in [true, false] {
            let produced = (0..k).any(|a| {
                let n = piece.coefficient(a, j);
                if positive { n > 0 } else { n < 0 }
            });
            if !produced {
                continue;
            }
            let out = output_name(i, j + 1, positive);
            let token = |m: u64| divider(i, j + 1, positive, m);
            merge_table(&mut reactions, &token, d, &out);
        }
    }

    // b-offset rebate: the payload seeded b_j on every input molecule, but
    // the piece owes b_j only once; merging the B tokens down to one emits
    // b_j subtractive outputs per extra input molecule.
    for j in 0..l {
        let b = piece.offset_b(j);
        if b == 0 {
            continue;
        }
        push(
            &mut reactions,
            vec![(b_token(i, j + 1), 2)],
            vec![
                (b_token(i, j + 1), 1),
                (output_name(i, j + 1, false), u32::try_from(b).expect("b fits")),
            ],
        );
    }

    // Mass accounting per input molecule, maximized over its lifetime:
    //   1                  the input/offset/surplus token itself,
    //   beta + 2*B         B tokens (beta = #{j: b_j > 0}), the seeded
    //                      additive payload, and the rebate each B emits,
    //   P                  the widest post-fan-out stage, where
    //                      P = max_a sum_j max(|n_{a,j}|, 1).
    let beta: u64 = (0..l).filter(|&j| piece.offset_b(j) > 0).count() as u64;
    let b_sum: u64 = (0..l).map(|j| piece.offset_b(j)).sum();
    let width: u64 = (0..k)
        .map(|a| (0..l).map(|j| piece.coefficient(a, j).unsigned_abs().max(1)).sum::<u64>())
        .max()
        .unwrap_or(1);
    let gamma = 1 + beta + 2 * b_sum + width;

    AffineFragment {
        piece_index: i,
        input_aliases: (0..k).map(|a| alias(i, a + 1)).collect(),
        output_p: (0..l)
            .map(|j| produces_p(j).then(|| output_name(i, j + 1, true)))
            .collect(),
        output_c: (0..l)
            .map(|j| produces_c(j).then(|| output_name(i, j + 1, false)))
            .collect(),
        reactions,
        gamma,
    }
}

/// All species mentioned by the fragment, in first-mention order.
pub fn fragment_species(fragment: &AffineFragment) -> Vec<String> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    let mut note = |name: &String| {
        if seen.insert(name.clone()) {
            out.push(name.clone());
        }
    };
    for a in &fragment.input_aliases {
        note(a);
    }
    for (reactants, products) in &fragment.reactions {
        for (name, _) in reactants.iter().chain(products) {
            note(name);
        }
    }
    out
}

/// Wrap a fragment as a standalone network whose inputs are the aliases.
pub fn fragment_crn(fragment: &AffineFragment) -> Crn {
    let mut builder = CrnBuilder::default();
    for (reactants, products) in &fragment.reactions {
        let r: Vec<(&str, u32)> = reactants.iter().map(|(n, m)| (n.as_str(), *m)).collect();
        let p: Vec<(&str, u32)> = products.iter().map(|(n, m)| (n.as_str(), *m)).collect();
        builder = builder.reaction(&r, &p);
    }
    for a in &fragment.input_aliases {
        builder = builder.input(a);
    }
    builder.build().expect("fragments are well-formed networks")
}

/// Net change of `species` across one reaction.
fn net_of(reactants: &Terms, products: &Terms, species: &str) -> i64 {
    let count = |side: &Terms| -> i64 {
        side.iter().filter(|(n, _)| n == species).map(|(_, m)| i64::from(*m)).sum()
    };
    count(products) - count(reactants)
}

/// Statically verify that no reaction has a negative net effect on any
/// fragment output species: outputs are only ever produced.
pub fn check_monotone_outputs(fragment: &AffineFragment) -> Result<(), String> {
    let outputs: Vec<&String> = fragment
        .output_p
        .iter()
        .chain(&fragment.output_c)
        .flatten()
        .collect();
    for (reactants, products) in &fragment.reactions {
        for out in &outputs {
            let net = net_of(reactants, products, out);
            if net < 0 {
                let show = |side: &Terms| {
                    side.iter()
                        .map(|(n, m)| if *m == 1 { n.clone() } else { format!("{m}{n}") })
                        .collect::<Vec<_>>()
                        .join(" + ")
                };
                return Err(format!(
                    "reaction {} -> {} consumes output {out}",
                    show(reactants),
                    show(products)
                ));
            }
        }
    }
    Ok(())
}

/// The fragment's output counts at quiescence from input `x`, computed by
/// exhaustive exploration of all executions: returns the (additive,
/// subtractive) count vectors, which are identical at every terminal
/// configuration, or an error naming the divergence.
pub fn fragment_quiescent_output(
    fragment: &AffineFragment,
    x: &[u64],
    node_budget: usize,
) -> Result<(Vec<u64>, Vec<u64>), String> {
    let crn = fragment_crn(fragment);
    let init = crn.input_configuration(x).map_err(|e| e.to_string())?;
    let graph = build_reachability_graph(&crn, &init, node_budget).map_err(|e| e.to_string())?;
    if graph.capped() {
        return Err(format!("state space exceeds {node_budget} nodes"));
    }
    let read = |node: u32, names: &[Option<String>]| -> Vec<u64> {
        let cfg = graph.configuration(node);
        names
            .iter()
            .map(|n| {
                n.as_ref()
                    .and_then(|n| crn.species_id(n))
                    .map(|id| cfg.get(id))
                    .unwrap_or(0)
            })
            .collect()
    };
    let mut result: Option<(Vec<u64>, Vec<u64>)> = None;
    let mut terminals = 0u64;
    for node in 0..graph.node_count() as u32 {
        if !graph.successors(node).is_empty() {
            continue;
        }
        terminals += 1;
        let here = (read(node, &fragment.output_p), read(node, &fragment.output_c));
        match &result {
            None => result = Some(here),
            Some(prev) if *prev == here => {}
            Some(prev) => {
                return Err(format!(
                    "outputs diverge across executions: {prev:?} vs {here:?}"
                ));
            }
        }
    }
    if terminals == 0 {
        return Err("no terminal configuration found".to_string());
    }
    result.ok_or_else(|| "unreachable".to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semilinear::AffinePiece;

    fn diff(fragment: &AffineFragment, x: &[u64]) -> Vec<i64> {
        let (p, c) = fragment_quiescent_output(fragment, x, 500_000).unwrap();
        p.iter().zip(&c).map(|(&a, &b)| a as i64 - b as i64).collect()
    }

    #[test]
    fn increment_piece_compiles_to_the_documented_fragment() {
        // y = x + 1: seeding, offset pass-through, fan-out, coefficient,
        // division (d=1), and the B rebate: six reactions.
        let piece = AffinePiece::new(1, 1, vec![1], vec![1], vec![1], vec![0]).unwrap();
        let fragment = compile_affine(&piece, 1);
        assert_eq!(fragment.reactions.len(), 6);
        assert_eq!(fragment.input_aliases, vec!["X^aff_1_1"]);
        assert_eq!(fragment.output_p, vec![Some("Yh^P_1_1".to_string())]);
        assert_eq!(fragment.output_c, vec![Some("Yh^C_1_1".to_string())]);
        for x in 1..=4u64 {
            assert_eq!(diff(&fragment, &[x]), vec![x as i64 + 1], "x={x}");
        }
        // The additive/subtractive split at x=3: payload 3 + forwarded 3,
        // rebate 2.
        let (p, c) = fragment_quiescent_output(&fragment, &[3], 100_000).unwrap();
        assert_eq!((p, c), (vec![6], vec![2]));
    }

    #[test]
    fn identity_piece_uses_no_subtractive_machinery() {
        let piece = AffinePiece::new(1, 1, vec![1], vec![1], vec![0], vec![0]).unwrap();
        let fragment = compile_affine(&piece, 1);
        assert_eq!(fragment.output_c, vec![None]);
        let (p, c) = fragment_quiescent_output(&fragment, &[5], 100_000).unwrap();
        assert_eq!(p, vec![5]);
        assert_eq!(c, vec![0]);
    }

    #[test]
    fn negation_piece_produces_only_subtractive_outputs() {
        let piece = AffinePiece::new(1, 1, vec![-1], vec![1], vec![0], vec![0]).unwrap();
        let fragment = compile_affine(&piece, 1);
        assert_eq!(fragment.output_p, vec![None]);
        let (p, c) = fragment_quiescent_output(&fragment, &[2], 100_000).unwrap();
        assert_eq!(p, vec![0]);
        assert_eq!(c, vec![2]);
    }

    #[test]
    fn halving_piece_divides_by_merging() {
        let piece = AffinePiece::new(1, 1, vec![1], vec![2], vec![0], vec![0]).unwrap();
        let fragment = compile_affine(&piece, 1);
        assert_eq!(diff(&fragment, &[4]), vec![2]);
        assert_eq!(diff(&fragment, &[6]), vec![3]);
        // Odd inputs are outside the intended domain; the fragment still
        // terminates, flooring the division.
        assert_eq!(diff(&fragment, &[5]), vec![2]);
    }

    #[test]
    fn division_by_three_wraps_correctly() {
        let piece = AffinePiece::new(1, 1, vec![1], vec![3], vec![0], vec![0]).unwrap();
        let fragment = compile_affine(&piece, 1);
        for x in 0..=7u64 {
            assert_eq!(diff(&fragment, &[x]), vec![(x / 3) as i64], "x={x}");
        }
    }

    #[test]
    fn two_input_difference_piece() {
        let piece = AffinePiece::new(2, 1, vec![2, -1], vec![1], vec![0], vec![0, 0]).unwrap();
        let fragment = compile_affine(&piece, 1);
        assert_eq!(diff(&fragment, &[3, 2]), vec![4]);
        assert_eq!(diff(&fragment, &[1, 5]), vec![-3]);
        assert_eq!(diff(&fragment, &[0, 2]), vec![-2]);
    }

    #[test]
    fn c_offset_absorbs_exactly_c_tokens() {
        // y = x - 2 via c = 2, checked below and above the offset.
        let piece = AffinePiece::new(1, 1, vec![1], vec![1], vec![0], vec![2]).unwrap();
        let fragment = compile_affine(&piece, 1);
        for x in 0..=6u64 {
            let expect = x.saturating_sub(2) as i64;
            assert_eq!(diff(&fragment, &[x]), vec![expect], "x={x}");
        }
    }

    #[test]
    fn multi_output_pieces_fan_out_once_per_output() {
        // y1 = x, y2 = 2x + 1.
        let piece =
            AffinePiece::new(1, 2, vec![1, 2], vec![1, 1], vec![0, 1], vec![0]).unwrap();
        let fragment = compile_affine(&piece, 1);
        assert_eq!(diff(&fragment, &[3]), vec![3, 7]);
    }

    #[test]
    fn fragments_are_namespaced_by_piece_index() {
        let piece = AffinePiece::new(1, 1, vec![1], vec![1], vec![1], vec![0]).unwrap();
        let one = fragment_species(&compile_affine(&piece, 1));
        let two = fragment_species(&compile_affine(&piece, 2));
        for name in &one {
            assert!(!two.contains(name), "{name} leaked across fragments");
        }
    }

    #[test]
    fn outputs_are_never_consumed() {
        let pieces = [
            AffinePiece::new(1, 1, vec![1], vec![1], vec![1], vec![0]).unwrap(),
            AffinePiece::new(2, 1, vec![2, -1], vec![1], vec![0], vec![0, 0]).unwrap(),
            AffinePiece::new(1, 1, vec![1], vec![2], vec![0], vec![0]).unwrap(),
            AffinePiece::new(2, 2, vec![3, -2, 0, 5], vec![2, 3], vec![4, 0], vec![1, 2]).unwrap(),
        ];
        for (idx, piece) in pieces.iter().enumerate() {
            let fragment = compile_affine(piece, idx + 1);
            check_monotone_outputs(&fragment).unwrap();
        }
    }

    #[test]
    fn gamma_reflects_the_widest_stage() {
        let piece = AffinePiece::new(1, 1, vec![1], vec![1], vec![1], vec![0]).unwrap();
        // 1 + beta(1) + 2*b(1) + width(1) = 5.
        assert_eq!(compile_affine(&piece, 1).gamma, 5);
        let piece = AffinePiece::new(2, 1, vec![2, -1], vec![1], vec![0], vec![0, 0]).unwrap();
        // 1 + 0 + 0 + max(2, 1) = 3.
        assert_eq!(compile_affine(&piece, 1).gamma, 3);
    }
}
