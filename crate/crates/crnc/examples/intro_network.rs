//! Build a small network by hand, run one stochastic trajectory, and
//! certify that the network stably computes x + 1.
//!
//! The network seeds one blank `B` per input, doubles each input into two
//! outputs, elects a single blank leader, and lets the losers each cancel
//! one output:
//!
//!     X     -> B + 2Y
//!     B + B -> B + K
//!     Y + K -> (nothing)
//!
//! From `{X: n}` the settled output count is `2n - (n - 1) = n + 1` on every
//! execution, with no pre-seeded species.

use crnc::checker::{check_stable_computation, DEFAULT_NODE_BUDGET};
use crnc::kinetics::Volume;
use crnc::{simulate, Crn, SimOptions, StopRule};

fn main() {
    let crn = Crn::builder()
        .reaction(&[("X", 1)], &[("B", 1), ("Y", 2)])
        .reaction(&[("B", 2)], &[("B", 1), ("K", 1)])
        .reaction(&[("Y", 1), ("K", 1)], &[])
        .input("X")
        .output("Y")
        .build()
        .expect("well-formed network");

    println!("network:");
    for idx in 0..crn.reactions().len() {
        println!("  {}", crn.display_reaction(idx));
    }

    let x = 5u64;
    let init = crn.input_configuration(&[x]).unwrap();
    let volume = Volume::from_initial(&init);
    let options = SimOptions { stop: StopRule::Quiescence, ..SimOptions::default() };
    let traj = simulate(&crn, &init, volume, &options, 42).unwrap();
    println!(
        "\none trajectory from {{X: {x}}}: {} events, stopped {} at t={:.3}",
        traj.event_count(),
        traj.stop.as_str(),
        traj.end_time
    );
    println!("final: {}", crn.display_configuration(&traj.final_config));

    println!("\nexhaustive certification that the settled output is always x + 1:");
    for x in 1..=6u64 {
        let init = crn.input_configuration(&[x]).unwrap();
        let verdict =
            check_stable_computation(&crn, &init, &[x + 1], DEFAULT_NODE_BUDGET).unwrap();
        println!("  x = {x}: {}", verdict.describe(&crn).lines().next().unwrap());
        assert!(verdict.is_certified());
    }
}
