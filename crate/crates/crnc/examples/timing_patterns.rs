//! Compare measured completion times against their closed-form references
//! for the three classical patterns: independent conversions finish in
//! harmonic time, pairwise merging in linear time, and catalyzed conversion
//! in twice harmonic time.

use crnc::bench::{run_bench, BenchOptions, BenchPattern};

fn main() {
    let patterns =
        [BenchPattern::Unimolecular, BenchPattern::LeaderElection, BenchPattern::Catalytic];
    let options = BenchOptions { sizes: vec![100, 1000], trials: 200, seed: 2024 };

    for pattern in &patterns {
        let report = run_bench(pattern, &options).unwrap();
        println!("{}:", report.pattern);
        for point in &report.points {
            let reference = point.reference.unwrap();
            let err = 100.0 * (point.mean - reference).abs() / reference;
            println!(
                "  n = {:4}: mean {:9.3} +/- {:7.3}  reference {:9.3}  ({err:.1}% off)",
                point.size, point.mean, point.stddev, reference
            );
        }
    }
}
