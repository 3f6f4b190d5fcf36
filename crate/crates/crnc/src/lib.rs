//! Compiler, stochastic simulator, and stability checker for leaderless
//! chemical reaction networks.

pub mod bench;
pub mod checker;
pub mod compiler;
pub mod crn;
pub mod kinetics;
pub mod parse;
pub mod presets;
pub mod semilinear;

pub use compiler::{compile, CompileError, CompiledCrn, CompilerOptions};
pub use crn::{Configuration, Crn, CrnBuilder, CrnError, Reaction, SpeciesId};
pub use kinetics::{
    simulate, stabilization_time, Event, RecordMode, SimOptions, StopReason, StopRule, Trajectory,
    Volume,
};
pub use parse::{parse_crn, serialize_crn, ParseError};
pub use semilinear::{parse_fnspec, serialize_fnspec, FunctionSpec};
