//! Record one trajectory in each of the three CSV formats: full snapshots,
//! sparse deltas, and final counts only. Every artifact embeds the tool
//! version, seed, and volume, so a run can be reproduced from its file
//! alone.

use crnc::kinetics::{replay, write_trajectory_csv, Volume};
use crnc::presets::increment_crn;
use crnc::{simulate, RecordMode, SimOptions, StopRule};

fn main() {
    let crn = increment_crn();
    let init = crn.input_configuration(&[3]).unwrap();
    let options = SimOptions { stop: StopRule::Quiescence, ..SimOptions::default() };
    let traj = simulate(&crn, &init, Volume::from_initial(&init), &options, 17).unwrap();

    for mode in [RecordMode::Full, RecordMode::Sparse, RecordMode::Final] {
        let mut buffer = Vec::new();
        let note = "example=trajectory_formats".to_string();
        write_trajectory_csv(&crn, &traj, mode, &[note], &mut buffer).unwrap();
        println!("--- {mode:?} ---");
        print!("{}", String::from_utf8(buffer).unwrap());
        println!();
    }

    // The event list alone reconstructs every intermediate configuration.
    let mut states = 0u64;
    replay(&crn, &traj, |_, _, _| states += 1).unwrap();
    println!("replayed {} configurations (initial + one per event)", states);
}
