//! Small bundled networks and function specs used by the examples, the
//! benchmark patterns, and the test suites.

use crate::crn::{Crn, CrnBuilder};
use crate::semilinear::{parse_fnspec, FunctionSpec};

/// `f(x) = x + 1` as a one-piece function spec document.
pub const INCREMENT_FNSPEC: &str = include_str!("../fnspec/x_plus_1.fnspec");
/// `f(x1, x2) = max(0, 2*x1 - x2)` with a threshold-guarded piece.
pub const MAX_FNSPEC: &str = include_str!("../fnspec/max_2x1_x2.fnspec");
/// `f(x) = x/2` on evens, `x + 1` on odds, guarded by a congruence atom.
pub const PARITY_SPLIT_FNSPEC: &str = include_str!("../fnspec/parity_split.fnspec");

/// Parsed form of [`INCREMENT_FNSPEC`].
pub fn increment_spec() -> FunctionSpec {
    parse_fnspec(INCREMENT_FNSPEC).expect("bundled spec parses")
}

/// Parsed form of [`MAX_FNSPEC`].
pub fn max_spec() -> FunctionSpec {
    parse_fnspec(MAX_FNSPEC).expect("bundled spec parses")
}

/// Parsed form of [`PARITY_SPLIT_FNSPEC`].
pub fn parity_split_spec() -> FunctionSpec {
    parse_fnspec(PARITY_SPLIT_FNSPEC).expect("bundled spec parses")
}

/// Hand-written network computing `f(x) = x + 1` stably.
///
/// ```text
/// X     -> B + 2Y
/// B + B -> B + K
/// Y + K -> (nothing)
/// ```
///
/// Every `X` yields two `Y` plus a token `B`; surplus `B` tokens pair off
/// into `K`, and each `K` cancels one `Y`. From `{X: n}` (with `n >= 1`) the
/// count of `Y` stabilizes at `n + 1` with a single `B` left over.
pub fn increment_crn() -> Crn {
    CrnBuilder::default()
        .reaction(&[("X", 1)], &[("B", 1), ("Y", 2)])
        .reaction(&[("B", 1), ("B", 1)], &[("B", 1), ("K", 1)])
        .reaction(&[("Y", 1), ("K", 1)], &[])
        .input("X")
        .output("Y")
        .build()
        .expect("preset network is well formed")
}

/// `X -> 2Y`: each input molecule independently converts.
pub fn double_crn() -> Crn {
    CrnBuilder::default()
        .reaction(&[("X", 1)], &[("Y", 2)])
        .input("X")
        .output("Y")
        .build()
        .expect("preset network is well formed")
}

/// `L + L -> L`: pairwise elimination down to a single survivor. Used as a
/// timing pattern; it declares no output species.
pub fn leader_election_crn() -> Crn {
    CrnBuilder::default()
        .reaction(&[("L", 2)], &[("L", 1)])
        .input("L")
        .build()
        .expect("preset network is well formed")
}

/// `C + A -> C + B`: conversion driven by a fixed catalyst population.
pub fn catalytic_crn() -> Crn {
    CrnBuilder::default()
        .reaction(&[("C", 1), ("A", 1)], &[("C", 1), ("B", 1)])
        .input("A")
        .output("B")
        .build()
        .expect("preset network is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_have_expected_shapes() {
        let inc = increment_crn();
        assert_eq!(inc.species_len(), 4);
        assert_eq!(inc.reactions().len(), 3);
        assert_eq!(double_crn().reactions().len(), 1);
        assert_eq!(leader_election_crn().reactions()[0].order(), 2);
        assert_eq!(catalytic_crn().species_len(), 3);
    }

    #[test]
    fn bundled_specs_parse() {
        assert_eq!(increment_spec().eval(&[5]).unwrap(), vec![6]);
        assert_eq!(max_spec().eval(&[3, 2]).unwrap(), vec![4]);
        assert_eq!(parity_split_spec().eval(&[6]).unwrap(), vec![3]);
    }
}
