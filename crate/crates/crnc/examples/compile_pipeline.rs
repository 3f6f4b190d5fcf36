//! Compile a piecewise-affine function specification into a reaction
//! network, inspect the result, and simulate it at a few inputs.
//!
//! The bundled `parity_split` spec maps even x to x/2 and odd x to x + 1,
//! so the compiled network must decide parity and activate the right piece
//! with no pre-seeded species.

use crnc::compiler::{audit_reaction_deltas, metadata, metadata_to_toml};
use crnc::kinetics::{simulate, SimOptions, StopRule};
use crnc::presets::parity_split_spec;
use crnc::{compile, CompilerOptions};

fn main() {
    let spec = parity_split_spec();
    let compiled = compile(&spec, &CompilerOptions::default()).unwrap();

    println!(
        "compiled {} species, {} reactions, volume scale gamma = {}",
        compiled.crn.species_len(),
        compiled.crn.reactions().len(),
        compiled.gamma
    );
    for warning in &compiled.warnings {
        println!("warning: {warning}");
    }

    println!("\nper-piece voters:");
    for (i, (yes, no)) in
        compiled.piece_yes_voters.iter().zip(&compiled.piece_no_voters).enumerate()
    {
        println!("  piece {}: {} yes / {} no species", i + 1, yes.len(), no.len());
    }

    audit_reaction_deltas(&compiled).unwrap();
    println!("audit identity preserved by all {} reactions", compiled.crn.reactions().len());

    println!("\nsimulating to quiescence:");
    let options = SimOptions { stop: StopRule::Quiescence, ..SimOptions::default() };
    for x in [2u64, 3, 8, 9, 16] {
        let init = compiled.crn.input_configuration(&[x]).unwrap();
        let traj =
            simulate(&compiled.crn, &init, compiled.volume_for(&[x]), &options, 7).unwrap();
        let y = traj.final_config.get(compiled.crn.outputs()[0]);
        let want = spec.eval(&[x]).unwrap()[0];
        println!("  f({x}) = {y}  (expected {want}, {} events)", traj.event_count());
        assert_eq!(y, want);
    }

    let meta = metadata(&compiled);
    println!("\nmetadata sidecar (first lines):");
    for line in metadata_to_toml(&meta).lines().take(6) {
        println!("  {line}");
    }
}
