//! Fit log-log slopes of settling time against input size for compiled
//! networks, and contrast with a directly-built network.
//!
//! Compiled networks pay for generality with linear-time convergence
//! (slope near 1), driven by their pairwise merging stages; a hand-built
//! doubling network finishes in logarithmic time (slope near 0). Every
//! simulated output is checked against the source function, so a silent
//! mis-computation fails the run.

use crnc::bench::{run_bench, BenchOptions, BenchPattern};
use crnc::presets::{increment_spec, max_spec};

fn main() {
    let ladders = [
        ("compiled x + 1", BenchPattern::Compiled { spec: increment_spec(), ray: vec![1] }),
        ("compiled max(2x1 - x2, 0)", BenchPattern::Compiled { spec: max_spec(), ray: vec![1, 1] }),
        ("direct doubling", BenchPattern::Doubling),
    ];
    let options = BenchOptions { sizes: vec![25, 50, 100, 200], trials: 30, seed: 31 };

    for (label, pattern) in ladders {
        let report = run_bench(&pattern, &options).unwrap();
        println!("{label}:");
        for point in &report.points {
            println!("  n = {:3}: mean settling time {:8.2}", point.size, point.mean);
        }
        println!(
            "  slope {:.3} (approx. 95% interval [{:.3}, {:.3}])\n",
            report.slope, report.slope_ci.0, report.slope_ci.1
        );
    }
    println!("(larger ladders: crnc bench compiled --spec <file.fnspec> --sizes 50,...,800)");
}
