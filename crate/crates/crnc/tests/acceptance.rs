//! End-to-end acceptance suite: one test per shipped claim, each ending in a
//! single machine-greppable PASS line (`acceptance NN: PASS - ...`). A failed
//! assertion is the corresponding FAIL line. Tolerances and budgets are pinned
//! as constants below, not read from the environment.

use crnc::bench::{run_bench, BenchOptions, BenchPattern};
use crnc::checker::{check_stable_computation, check_stable_decision, Verdict};
use crnc::compiler::affine::{check_monotone_outputs, compile_affine, fragment_quiescent_output};
use crnc::compiler::predicate::{compile_predicate, crd_crn};
use crnc::compiler::{audit_invariant, audit_reaction_deltas, compile, CompilerOptions};
use crnc::kinetics::{replay, rng_from_seed, simulate, trial_seed, SimOptions, StopRule};
use crnc::presets;
use crnc::semilinear::{AffinePiece, Atom, DomainPredicate};
use rand::RngExt;

/// Relative tolerance on closed-form expected-time references.
const TIMING_TOL: f64 = 0.10;
/// Accepted log-log slope band for compiled-network settling times.
const SLOPE_LO: f64 = 0.7;
const SLOPE_HI: f64 = 1.3;
/// Node ceiling for every exhaustive certification in this suite.
const NODE_BUDGET: usize = 2_000_000;
/// Output-silence window per initial molecule for end-to-end runs.
const SILENCE_FACTOR: u64 = 50;
const MASTER_SEED: u64 = 1;

fn pass(tag: &str, detail: String) {
    println!("acceptance {tag}: PASS - {detail}");
}

/// All nonzero input vectors of the given arity with total count <= cap.
fn nonzero_inputs(arity: usize, cap: u64) -> Vec<Vec<u64>> {
    match arity {
        1 => (1..=cap).map(|x| vec![x]).collect(),
        2 => {
            let mut out = Vec::new();
            for a in 0..=cap {
                for b in 0..=(cap - a) {
                    if a + b > 0 {
                        out.push(vec![a, b]);
                    }
                }
            }
            out
        }
        _ => unreachable!("suite only uses arities 1 and 2"),
    }
}

#[test]
fn a01_introductory_networks_certified() {
    let increment = presets::increment_crn();
    for x in 1..=6u64 {
        let init = increment.input_configuration(&[x]).unwrap();
        let verdict = check_stable_computation(&increment, &init, &[x + 1], NODE_BUDGET).unwrap();
        assert!(
            verdict.is_certified(),
            "increment network at x={x}: {}",
            verdict.describe(&increment)
        );
    }
    let double = presets::double_crn();
    for x in 1..=8u64 {
        let init = double.input_configuration(&[x]).unwrap();
        let verdict = check_stable_computation(&double, &init, &[2 * x], NODE_BUDGET).unwrap();
        assert!(
            verdict.is_certified(),
            "doubling network at x={x}: {}",
            verdict.describe(&double)
        );
    }
    pass("01", "x+1 network certified for x in 1..=6, X->2Y for x in 1..=8".to_string());
}

#[test]
fn a02_affine_fragments_certified_on_their_domains() {
    // (piece, gate, label); every maximal execution from every nonzero
    // in-domain input with ||x|| <= 8 must end with #Yh^P - #Yh^C = f(x).
    // An empty seeding produces nothing, so the zero vector is out of scope.
    let cases: Vec<(AffinePiece, DomainPredicate, &str)> = vec![
        (
            AffinePiece::new(1, 1, vec![1], vec![1], vec![1], vec![0]).unwrap(),
            DomainPredicate::True,
            "x+1",
        ),
        (
            AffinePiece::new(1, 1, vec![1], vec![2], vec![0], vec![0]).unwrap(),
            DomainPredicate::Atom(Atom::Mod { coeffs: vec![1], modulus: 2, residue: 0 }),
            "x/2 on evens",
        ),
        (
            AffinePiece::new(2, 1, vec![2, -1], vec![1], vec![0], vec![0, 0]).unwrap(),
            DomainPredicate::Atom(Atom::Threshold { coeffs: vec![2, -1], threshold: 0 }),
            "2x1-x2",
        ),
    ];
    let mut coverage = Vec::new();
    for (piece, gate, label) in &cases {
        let fragment = compile_affine(piece, 1);
        let mut checked = 0u32;
        for x in nonzero_inputs(piece.input_arity(), 8) {
            if !gate.eval(&x) {
                continue;
            }
            let want = piece.eval(&x).unwrap();
            let (p, c) = fragment_quiescent_output(&fragment, &x, NODE_BUDGET)
                .unwrap_or_else(|e| panic!("{label} at {x:?}: {e}"));
            let diff: Vec<i64> =
                p.iter().zip(&c).map(|(&a, &b)| a as i64 - b as i64).collect();
            let want_i: Vec<i64> = want.iter().map(|&v| v as i64).collect();
            assert_eq!(diff, want_i, "{label} at {x:?}: plus {p:?} minus {c:?}");
            checked += 1;
        }
        assert!(checked > 0, "{label}: no in-domain inputs checked");
        coverage.push(format!("{label} on {checked} inputs"));
    }
    pass("02", format!("fragment difference equals the piece value: {}", coverage.join(", ")));
}

#[test]
fn a03_compiled_corpus_matches_oracle_on_random_inputs() {
    let specs = [
        ("x_plus_1", presets::increment_spec()),
        ("max_2x1_x2", presets::max_spec()),
        ("parity_split", presets::parity_split_spec()),
    ];
    let mut rng = rng_from_seed(MASTER_SEED);
    let mut runs = 0u64;
    for (spec_idx, (name, spec)) in specs.into_iter().enumerate() {
        let compiled = compile(&spec, &CompilerOptions::default()).unwrap();
        for case in 0..50u64 {
            // Multinomial split of a uniform total in 1..=200.
            let total = rng.random_range(1..=200u64);
            let mut x = vec![0u64; spec.input_arity()];
            for _ in 0..total {
                let coord = rng.random_range(0..x.len());
                x[coord] += 1;
            }
            let want = spec.eval(&x).unwrap();
            let init = compiled.crn.input_configuration(&x).unwrap();
            let window = SILENCE_FACTOR * init.total();
            let options = SimOptions {
                stop: StopRule::OutputSilence { window },
                ..SimOptions::default()
            };
            for trial in 0..100u64 {
                let seed = trial_seed(MASTER_SEED + spec_idx as u64, (case << 32) | trial);
                let traj =
                    simulate(&compiled.crn, &init, compiled.volume_for(&x), &options, seed)
                        .unwrap();
                let got: Vec<u64> = compiled
                    .crn
                    .outputs()
                    .iter()
                    .map(|id| traj.final_config.get(*id))
                    .collect();
                assert_eq!(
                    got, want,
                    "{name} at x={x:?}, trial {trial}, stopped {:?}",
                    traj.stop
                );
                runs += 1;
            }
        }
    }
    pass("03", format!("{runs} runs over 3 networks x 50 inputs x 100 trials, all exact"));
}

#[test]
fn a04_compiled_increment_certified_at_tiny_inputs() {
    let compiled = compile(&presets::increment_spec(), &CompilerOptions::default()).unwrap();
    let mut node_counts = Vec::new();
    let mut downgraded = false;
    for x in [1u64, 2] {
        let init = compiled.crn.input_configuration(&[x]).unwrap();
        match check_stable_computation(&compiled.crn, &init, &[x + 1], NODE_BUDGET).unwrap() {
            Verdict::Certified { nodes, .. } => node_counts.push(format!("x={x}: {nodes} nodes")),
            Verdict::Inconclusive { .. } => downgraded = true,
            refuted @ Verdict::Refuted { .. } => {
                panic!("compiled x+1 at x={x}: {}", refuted.describe(&compiled.crn))
            }
        }
    }
    if downgraded {
        // Fallback when the state space outgrows the budget: outputs must
        // still be exact and the audit identity must hold at every event of
        // 100 trajectories.
        for trial in 0..100u64 {
            let x = [2u64];
            let init = compiled.crn.input_configuration(&x).unwrap();
            let options = SimOptions::default();
            let traj = simulate(&compiled.crn, &init, compiled.volume_for(&x), &options, trial)
                .unwrap();
            replay(&compiled.crn, &traj, |_, _, cfg| {
                assert!(audit_invariant(&compiled, cfg), "audit identity broken (trial {trial})");
            })
            .unwrap();
            let y = compiled.crn.outputs()[0];
            assert_eq!(traj.final_config.get(y), 3, "trial {trial}");
        }
        pass("04", "budget exceeded; downgraded to exact outputs + audited trajectories".into());
    } else {
        pass("04", format!("compiled x+1 certified ({})", node_counts.join(", ")));
    }
}

#[test]
fn a05_conversion_completion_time_matches_harmonic_reference() {
    timing_criterion("05", BenchPattern::Unimolecular);
}

#[test]
fn a06_leader_election_time_matches_telescoping_reference() {
    timing_criterion("06", BenchPattern::LeaderElection);
}

#[test]
fn a07_catalytic_conversion_time_matches_reference() {
    timing_criterion("07", BenchPattern::Catalytic);
}

/// Shared body for the three closed-form timing checks: mean quiescence time
/// at n in {100, 1000} over 500 trials within TIMING_TOL of the reference.
fn timing_criterion(tag: &str, pattern: BenchPattern) {
    let options = BenchOptions { sizes: vec![100, 1000], trials: 500, seed: MASTER_SEED };
    let report = run_bench(&pattern, &options).unwrap();
    let mut details = Vec::new();
    for point in &report.points {
        let reference = point.reference.expect("pattern has a closed form");
        let rel = (point.mean - reference).abs() / reference;
        assert!(
            rel <= TIMING_TOL,
            "{} at n={}: mean {:.4} vs reference {:.4} ({:.1}% off)",
            pattern.name(),
            point.size,
            point.mean,
            reference,
            100.0 * rel
        );
        details.push(format!("n={}: {:.3} vs {:.3}", point.size, point.mean, reference));
    }
    pass(tag, format!("{} within 10%: {}", pattern.name(), details.join(", ")));
}

#[test]
fn a08_compiled_settling_time_scales_linearly() {
    let sizes = vec![50u64, 100, 200, 400, 800];
    let mut slopes = Vec::new();
    for (label, spec, ray) in [
        ("x+1", presets::increment_spec(), vec![1u64]),
        ("max(0,2x1-x2)", presets::max_spec(), vec![1, 1]),
    ] {
        let options = BenchOptions { sizes: sizes.clone(), trials: 100, seed: MASTER_SEED };
        let report = run_bench(&BenchPattern::Compiled { spec, ray }, &options).unwrap();
        assert!(
            report.slope_within(SLOPE_LO, SLOPE_HI),
            "{label}: slope {:.4} outside [{SLOPE_LO}, {SLOPE_HI}]",
            report.slope
        );
        slopes.push(format!("{label}: {:.3}", report.slope));
    }
    pass("08", format!("log-log slopes in [{SLOPE_LO}, {SLOPE_HI}]: {}", slopes.join(", ")));
}

#[test]
fn a09_static_invariants_hold_for_every_compiled_network() {
    let mut fragments = 0u32;
    for spec in
        [presets::increment_spec(), presets::max_spec(), presets::parity_split_spec()]
    {
        for (i, piece) in spec.pieces().iter().enumerate() {
            let fragment = compile_affine(&piece.affine, i + 1);
            check_monotone_outputs(&fragment).unwrap();
            fragments += 1;
        }
        let compiled = compile(&spec, &CompilerOptions::default()).unwrap();
        audit_reaction_deltas(&compiled).unwrap();
    }
    pass(
        "09",
        format!("{fragments} fragments monotone; audit identity preserved reaction-by-reaction"),
    );
}

#[test]
fn a10_predicate_deciders_certified_against_the_oracle() {
    let gates: Vec<(DomainPredicate, usize, &str)> = vec![
        (
            DomainPredicate::Atom(Atom::Threshold { coeffs: vec![1, -1], threshold: 0 }),
            2,
            "x1 >= x2",
        ),
        (
            DomainPredicate::Atom(Atom::Mod { coeffs: vec![1], modulus: 3, residue: 1 }),
            1,
            "x = 1 mod 3",
        ),
        (
            DomainPredicate::And(vec![
                DomainPredicate::Atom(Atom::Threshold { coeffs: vec![1], threshold: 2 }),
                DomainPredicate::Not(Box::new(DomainPredicate::Atom(Atom::Mod {
                    coeffs: vec![1],
                    modulus: 2,
                    residue: 0,
                }))),
            ]),
            1,
            "x >= 2 and x odd",
        ),
        (
            DomainPredicate::Or(vec![
                DomainPredicate::Atom(Atom::Threshold { coeffs: vec![1, 0], threshold: 1 }),
                DomainPredicate::Atom(Atom::Threshold { coeffs: vec![0, 1], threshold: 2 }),
            ]),
            2,
            "x1 >= 1 or x2 >= 2",
        ),
    ];
    let mut coverage = Vec::new();
    for (gate, arity, label) in &gates {
        let crd = compile_predicate(gate, *arity, 1, 4096);
        assert!(crd.warnings.is_empty(), "{label}: {:?}", crd.warnings);
        let crn = crd_crn(&crd);
        let mut checked = 0u32;
        for x in nonzero_inputs(*arity, 8) {
            let want = gate.eval(&x);
            let init = crn.input_configuration(&x).unwrap();
            let verdict = check_stable_decision(&crn, &init, want, NODE_BUDGET).unwrap();
            assert!(
                verdict.is_certified(),
                "{label} at {x:?} (expected {want}): {}",
                verdict.describe(&crn)
            );
            checked += 1;
        }
        coverage.push(format!("{label} on {checked} inputs"));
    }
    pass("10", format!("stable decision certified: {}", coverage.join("; ")));
}
