//! Compile boolean predicates over input counts into all-voting deciders,
//! watch a population converge, and certify small instances exhaustively.
//!
//! Every input molecule becomes a voting agent; the network stabilizes when
//! all agents agree with the predicate's truth value on the input.

use crnc::checker::{check_stable_decision, DEFAULT_NODE_BUDGET};
use crnc::compiler::predicate::{compile_predicate, crd_crn};
use crnc::kinetics::{simulate, vote_status, SimOptions, StopRule, Volume};
use crnc::semilinear::{Atom, DomainPredicate};

fn main() {
    // "at least as many X1 as X2": x1 - x2 >= 0.
    let majority = DomainPredicate::Atom(Atom::Threshold { coeffs: vec![1, -1], threshold: 0 });
    let crd = compile_predicate(&majority, 2, 1, 4096);
    let crn = crd_crn(&crd);
    println!(
        "majority decider: {} agent states, {} transitions",
        crd.species.len(),
        crd.reactions.len()
    );

    let x = [40u64, 25];
    let init = crn.input_configuration(&x).unwrap();
    let volume = Volume::from_initial(&init);
    let options = SimOptions { stop: StopRule::Quiescence, ..SimOptions::default() };
    let traj = simulate(&crn, &init, volume, &options, 99).unwrap();
    println!(
        "population of {} settles {:?} after {} events (truth: {})",
        x[0] + x[1],
        vote_status(&crn, &traj.final_config),
        traj.event_count(),
        majority.eval(&x)
    );

    println!("\nexhaustive certification on small inputs:");
    let parity = DomainPredicate::Atom(Atom::Mod { coeffs: vec![1, 1], modulus: 2, residue: 0 });
    for (name, gate) in [("x1 >= x2", &majority), ("x1 + x2 even", &parity)] {
        let crd = compile_predicate(gate, 2, 1, 4096);
        let crn = crd_crn(&crd);
        let mut certified = 0;
        for x1 in 0..=3u64 {
            for x2 in 0..=3u64 {
                if x1 + x2 == 0 {
                    continue;
                }
                let init = crn.input_configuration(&[x1, x2]).unwrap();
                let verdict =
                    check_stable_decision(&crn, &init, gate.eval(&[x1, x2]), DEFAULT_NODE_BUDGET)
                        .unwrap();
                assert!(verdict.is_certified(), "{name} at ({x1},{x2})");
                certified += 1;
            }
        }
        println!("  {name}: certified on all {certified} inputs with 1 <= x1 + x2 <= 6");
    }
}
