//! Exhaustive stability checking: certify a correct network, then refute a
//! broken one and print the counterexample path.
//!
//! The checker enumerates every configuration reachable from the input,
//! finds the stable ones (those from which the observable can never change
//! again), and certifies only if a correct stable configuration stays
//! reachable from everywhere and no incorrect one is ever stable.

use crnc::checker::{check_stable_computation, Verdict, DEFAULT_NODE_BUDGET};
use crnc::presets::increment_spec;
use crnc::{compile, CompilerOptions, Crn};

fn main() {
    let compiled = compile(&increment_spec(), &CompilerOptions::default()).unwrap();
    println!("certifying the compiled x + 1 network:");
    for x in 1..=2u64 {
        let init = compiled.crn.input_configuration(&[x]).unwrap();
        let verdict =
            check_stable_computation(&compiled.crn, &init, &[x + 1], DEFAULT_NODE_BUDGET)
                .unwrap();
        println!("  x = {x}: {}", verdict.describe(&compiled.crn).lines().next().unwrap());
        assert!(verdict.is_certified());
    }

    // A plausible-looking but wrong design: double every input and elect a
    // leader among the copies. Some executions settle on the wrong count.
    let broken = Crn::builder()
        .reaction(&[("X", 1)], &[("Y", 2)])
        .reaction(&[("Y", 2)], &[("Y", 1)])
        .input("X")
        .output("Y")
        .build()
        .unwrap();
    println!("\nrefuting a network that races doubling against merging (claim: x + 1):");
    let init = broken.input_configuration(&[2]).unwrap();
    let verdict = check_stable_computation(&broken, &init, &[3], DEFAULT_NODE_BUDGET).unwrap();
    println!("{}", verdict.describe(&broken));
    assert!(matches!(verdict, Verdict::Refuted { .. }));
}
