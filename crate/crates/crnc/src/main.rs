//! Command-line front end: compile function specifications, simulate and
//! model-check networks, and run timing benchmarks.
//!
//! Exit codes: 0 success, 2 unreadable or unparsable input, 3 validation
//! failure, 4 event-budget exhaustion, 5 stability refuted, 6 check
//! inconclusive, 7 benchmark slope outside the requested band.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crnc::bench::{run_bench, summary_toml, write_bench_csv, BenchOptions, BenchPattern};
use crnc::checker::{
    check_stable_computation, check_stable_decision, InconclusiveCause, Verdict,
    DEFAULT_NODE_BUDGET,
};
use crnc::compiler::{compile, metadata, metadata_from_toml, metadata_to_toml, CompilerOptions};
use crnc::kinetics::{
    simulate, write_trajectory_csv, RecordMode, SimOptions, StopReason, StopRule, Volume,
};
use crnc::parse::{parse_crn, serialize_crn};
use crnc::semilinear::parse_fnspec;
use crnc::Crn;

const EXIT_OK: u8 = 0;
const EXIT_PARSE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_BUDGET: u8 = 4;
const EXIT_REFUTED: u8 = 5;
const EXIT_INCONCLUSIVE: u8 = 6;
const EXIT_BAND: u8 = 7;

/// Default output directory, overridable per invocation.
const OUT_DIR_ENV: &str = "CRNC_OUT_DIR";

#[derive(Parser)]
#[command(name = "crnc", version, about = "Compile, simulate, and check reaction networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a .fnspec function specification to a .crn network plus a
    /// .toml metadata sidecar.
    Compile {
        spec: PathBuf,
        /// Output path; defaults to the spec name with extension .crn.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Exhaustively pre-validate the spec on [0, bound]^k.
        #[arg(long, default_value_t = 8)]
        bound: u64,
        #[arg(long, default_value_t = 4096)]
        species_budget: usize,
    },
    /// Simulate a .crn network with mass-action stochastic kinetics.
    Simulate {
        net: PathBuf,
        /// Initial counts, e.g. X1=5,X2=3; unlisted species start at 0.
        #[arg(long = "in", value_name = "COUNTS")]
        inputs: Option<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Reaction volume; defaults to gamma * inputs via the metadata
        /// sidecar when present, else to the total initial count.
        #[arg(long)]
        volume: Option<f64>,
        /// quiescence | horizon=<t> | events=<n> | silence=<w>.
        #[arg(long, default_value = "quiescence")]
        stop: String,
        /// full | sparse | final.
        #[arg(long, default_value = "sparse")]
        record: String,
        /// Trajectory CSV path; defaults to <net stem>.traj.csv.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Hard cap on simulated events.
        #[arg(long, default_value_t = 10_000_000)]
        event_budget: u64,
    },
    /// Exhaustively certify or refute stable computation from one input.
    Check {
        net: PathBuf,
        #[arg(long = "in", value_name = "COUNTS")]
        inputs: Option<String>,
        /// Expected settled output counts, e.g. 5 or 5,3.
        #[arg(long, value_name = "COUNTS", conflicts_with_all = ["expect_vote", "spec"])]
        expect: Option<String>,
        /// Expected consensus vote of a decider: yes | no.
        #[arg(long, value_name = "VOTE", conflicts_with = "spec")]
        expect_vote: Option<String>,
        /// Derive the expected outputs by evaluating this .fnspec.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Reachable-configuration budget before giving up.
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: usize,
    },
    /// Measure completion-time scaling over a ladder of input sizes.
    Bench {
        /// unimolecular | leader-election | catalytic | compiled | doubling.
        pattern: String,
        #[arg(long, default_value = "50,100,200,400,800")]
        sizes: String,
        #[arg(long, default_value_t = 100)]
        trials: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Function specification for the compiled pattern.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Input ray for the compiled pattern; input is ray * size.
        #[arg(long, default_value = "1")]
        ray: String,
        /// Fail (exit 7) unless the fitted slope lies in lo,hi.
        #[arg(long, value_name = "LO,HI")]
        band: Option<String>,
        /// Raw-sample CSV path; defaults to bench_<pattern>.csv.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Summary TOML path; defaults to stdout only.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

fn out_path(explicit: Option<PathBuf>, default_name: &str) -> PathBuf {
    explicit.unwrap_or_else(|| {
        let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_default();
        dir.join(default_name)
    })
}

fn read_to_string(path: &Path) -> Result<String, u8> {
    fs::read_to_string(path).map_err(|err| {
        eprintln!("error: cannot read {}: {err}", path.display());
        EXIT_PARSE
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), u8> {
    fs::write(path, contents).map_err(|err| {
        eprintln!("error: cannot write {}: {err}", path.display());
        EXIT_PARSE
    })
}

fn load_crn(path: &Path) -> Result<Crn, u8> {
    let text = read_to_string(path)?;
    parse_crn(&text).map_err(|err| {
        eprintln!("error: {}: {err}", path.display());
        EXIT_PARSE
    })
}

fn parse_counts(
    crn: &Crn,
    spec: Option<&str>,
) -> Result<crnc::Configuration, u8> {
    let mut pairs: Vec<(&str, u64)> = Vec::new();
    if let Some(spec) = spec {
        for part in spec.split(',').filter(|p| !p.is_empty()) {
            let Some((name, count)) = part.split_once('=') else {
                eprintln!("error: malformed count {part:?}, expected NAME=COUNT");
                return Err(EXIT_PARSE);
            };
            let Ok(count) = count.parse::<u64>() else {
                eprintln!("error: malformed count {part:?}, expected NAME=COUNT");
                return Err(EXIT_PARSE);
            };
            pairs.push((name, count));
        }
    }
    crn.configuration(&pairs).map_err(|err| {
        eprintln!("error: {err}");
        EXIT_VALIDATION
    })
}

fn parse_stop(text: &str, event_budget: u64) -> Result<StopRule, u8> {
    let rule = if text == "quiescence" {
        Some(StopRule::Quiescence)
    } else {
        match text.split_once('=') {
            Some(("horizon", v)) => v.parse().ok().map(StopRule::TimeHorizon),
            Some(("events", v)) => v.parse().ok().map(StopRule::EventCap),
            Some(("silence", v)) => {
                v.parse().ok().map(|window| StopRule::OutputSilence { window })
            }
            _ => None,
        }
    };
    match rule {
        Some(StopRule::EventCap(n)) => Ok(StopRule::EventCap(n.min(event_budget))),
        Some(rule) => Ok(rule),
        None => {
            eprintln!(
                "error: bad stop rule {text:?}: use quiescence, horizon=<t>, events=<n>, \
                 or silence=<w>"
            );
            Err(EXIT_PARSE)
        }
    }
}

fn parse_u64_list(text: &str) -> Option<Vec<u64>> {
    text.split(',').map(|p| p.trim().parse::<u64>().ok()).collect()
}

fn cmd_compile(spec: PathBuf, out: Option<PathBuf>, bound: u64, species_budget: usize) -> u8 {
    let text = match read_to_string(&spec) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let parsed = match parse_fnspec(&text) {
        Ok(s) => s,
        Err(err) => {
            eprintln!("error: {}: {err}", spec.display());
            return EXIT_PARSE;
        }
    };
    let options = CompilerOptions { validate_bound: bound, species_budget };
    let compiled = match compile(&parsed, &options) {
        Ok(c) => c,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_VALIDATION;
        }
    };
    for warning in &compiled.warnings {
        eprintln!("warning: {warning}");
    }
    let default_name = spec
        .file_stem()
        .map(|s| format!("{}.crn", s.to_string_lossy()))
        .unwrap_or_else(|| "out.crn".to_string());
    let out = out_path(out, &default_name);
    let sidecar = PathBuf::from(format!("{}.toml", out.display()));
    if write_file(&out, &serialize_crn(&compiled.crn)).is_err() {
        return EXIT_PARSE;
    }
    if write_file(&sidecar, &metadata_to_toml(&metadata(&compiled))).is_err() {
        return EXIT_PARSE;
    }
    println!(
        "compiled {} species, {} reactions, gamma {} -> {}",
        compiled.crn.species_len(),
        compiled.crn.reactions().len(),
        compiled.gamma,
        out.display()
    );
    EXIT_OK
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    net: PathBuf,
    inputs: Option<String>,
    seed: u64,
    volume: Option<f64>,
    stop: String,
    record: String,
    out: Option<PathBuf>,
    event_budget: u64,
) -> u8 {
    let crn = match load_crn(&net) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let init = match parse_counts(&crn, inputs.as_deref()) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let Some(record_mode) = RecordMode::parse(&record) else {
        eprintln!("error: bad record mode {record:?}: use full, sparse, or final");
        return EXIT_PARSE;
    };
    let stop_rule = match parse_stop(&stop, event_budget) {
        Ok(r) => r,
        Err(code) => return code,
    };

    let sidecar = PathBuf::from(format!("{}.toml", net.display()));
    let meta = fs::read_to_string(&sidecar).ok().and_then(|t| metadata_from_toml(&t).ok());
    let volume = match volume {
        Some(v) => match Volume::new(v) {
            Ok(v) => v,
            Err(err) => {
                eprintln!("error: {err}");
                return EXIT_VALIDATION;
            }
        },
        None => match &meta {
            Some(meta) => {
                let norm = init.total().max(1);
                Volume::new((meta.gamma * norm) as f64).expect("positive volume")
            }
            None => Volume::from_initial(&init),
        },
    };

    let options = SimOptions {
        stop: stop_rule,
        safety_event_cap: event_budget,
        mass_bound: None,
    };
    let traj = match simulate(&crn, &init, volume, &options, seed) {
        Ok(t) => t,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_VALIDATION;
        }
    };

    let out = out_path(out, &default_traj_name(&net));
    let flags = format!(
        "# cmd=simulate net={} in={} stop={} record={}",
        net.display(),
        inputs.as_deref().unwrap_or(""),
        stop,
        record
    );
    let mut buffer = Vec::new();
    if let Err(err) = write_trajectory_csv(&crn, &traj, record_mode, &[flags], &mut buffer) {
        eprintln!("error: {err}");
        return EXIT_PARSE;
    }
    if write_file(&out, &String::from_utf8_lossy(&buffer)).is_err() {
        return EXIT_PARSE;
    }

    println!(
        "stopped: {} after {} events at t={:.6}",
        traj.stop.as_str(),
        traj.event_count(),
        traj.end_time
    );
    println!("{}", crn.display_configuration(&traj.final_config));
    if traj.stop == StopReason::EventCapExhausted {
        eprintln!("error: event budget of {event_budget} exhausted before the stop rule");
        return EXIT_BUDGET;
    }
    EXIT_OK
}

fn default_traj_name(net: &Path) -> String {
    net.file_stem()
        .map(|s| format!("{}.traj.csv", s.to_string_lossy()))
        .unwrap_or_else(|| "trajectory.csv".to_string())
}

fn cmd_check(
    net: PathBuf,
    inputs: Option<String>,
    expect: Option<String>,
    expect_vote: Option<String>,
    spec: Option<PathBuf>,
    budget: usize,
) -> u8 {
    let crn = match load_crn(&net) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let init = match parse_counts(&crn, inputs.as_deref()) {
        Ok(c) => c,
        Err(code) => return code,
    };

    let verdict = if let Some(vote) = expect_vote {
        let expected = match vote.as_str() {
            "yes" => true,
            "no" => false,
            other => {
                eprintln!("error: bad vote {other:?}: use yes or no");
                return EXIT_PARSE;
            }
        };
        check_stable_decision(&crn, &init, expected, budget)
    } else {
        let expected: Vec<u64> = if let Some(expect) = &expect {
            match parse_u64_list(expect) {
                Some(v) => v,
                None => {
                    eprintln!("error: bad expected counts {expect:?}");
                    return EXIT_PARSE;
                }
            }
        } else if let Some(spec_path) = spec {
            let text = match read_to_string(&spec_path) {
                Ok(t) => t,
                Err(code) => return code,
            };
            let parsed = match parse_fnspec(&text) {
                Ok(s) => s,
                Err(err) => {
                    eprintln!("error: {}: {err}", spec_path.display());
                    return EXIT_PARSE;
                }
            };
            let x: Vec<u64> = crn.inputs().iter().map(|id| init.get(*id)).collect();
            match parsed.eval(&x) {
                Ok(y) => y,
                Err(err) => {
                    eprintln!("error: function undefined at {x:?}: {err}");
                    return EXIT_VALIDATION;
                }
            }
        } else {
            eprintln!("error: provide --expect, --expect-vote, or --spec");
            return EXIT_PARSE;
        };
        check_stable_computation(&crn, &init, &expected, budget)
    };

    let verdict = match verdict {
        Ok(v) => v,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_VALIDATION;
        }
    };
    println!("{}", verdict.describe(&crn));
    match verdict {
        Verdict::Certified { .. } => EXIT_OK,
        Verdict::Refuted { .. } => EXIT_REFUTED,
        Verdict::Inconclusive { cause: InconclusiveCause::NodeBudgetExceeded { .. }, .. }
        | Verdict::Inconclusive { .. } => EXIT_INCONCLUSIVE,
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    pattern: String,
    sizes: String,
    trials: u32,
    seed: u64,
    spec: Option<PathBuf>,
    ray: String,
    band: Option<String>,
    out: Option<PathBuf>,
    summary: Option<PathBuf>,
) -> u8 {
    let Some(sizes) = parse_u64_list(&sizes) else {
        eprintln!("error: bad sizes {sizes:?}");
        return EXIT_PARSE;
    };
    let pattern = match pattern.as_str() {
        "unimolecular" => BenchPattern::Unimolecular,
        "leader-election" => BenchPattern::LeaderElection,
        "catalytic" => BenchPattern::Catalytic,
        "doubling" => BenchPattern::Doubling,
        "compiled" => {
            let Some(spec_path) = spec else {
                eprintln!("error: the compiled pattern requires --spec");
                return EXIT_PARSE;
            };
            let text = match read_to_string(&spec_path) {
                Ok(t) => t,
                Err(code) => return code,
            };
            let parsed = match parse_fnspec(&text) {
                Ok(s) => s,
                Err(err) => {
                    eprintln!("error: {}: {err}", spec_path.display());
                    return EXIT_PARSE;
                }
            };
            let Some(ray) = parse_u64_list(&ray) else {
                eprintln!("error: bad ray {ray:?}");
                return EXIT_PARSE;
            };
            if ray.len() != parsed.input_arity() || ray.iter().all(|&r| r == 0) {
                eprintln!(
                    "error: ray must have {} nonzero-sum coordinates",
                    parsed.input_arity()
                );
                return EXIT_VALIDATION;
            }
            BenchPattern::Compiled { spec: parsed, ray }
        }
        other => {
            eprintln!(
                "error: unknown pattern {other:?}: use unimolecular, leader-election, \
                 catalytic, compiled, or doubling"
            );
            return EXIT_PARSE;
        }
    };
    let band = match band {
        None => None,
        Some(text) => {
            let parts: Vec<Option<f64>> =
                text.split(',').map(|p| p.trim().parse::<f64>().ok()).collect();
            match parts.as_slice() {
                [Some(lo), Some(hi)] if lo <= hi => Some((*lo, *hi)),
                _ => {
                    eprintln!("error: bad band {text:?}, expected LO,HI");
                    return EXIT_PARSE;
                }
            }
        }
    };

    let options = BenchOptions { sizes, trials, seed };
    let report = match run_bench(&pattern, &options) {
        Ok(r) => r,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_VALIDATION;
        }
    };

    let out = out_path(out, &format!("bench_{}.csv", report.pattern));
    let mut buffer = Vec::new();
    if write_bench_csv(&report, &mut buffer).is_err()
        || write_file(&out, &String::from_utf8_lossy(&buffer)).is_err()
    {
        return EXIT_PARSE;
    }
    let summary_text = summary_toml(&report);
    if let Some(summary) = summary {
        if write_file(&summary, &summary_text).is_err() {
            return EXIT_PARSE;
        }
    }
    print!("{summary_text}");

    if let Some((lo, hi)) = band {
        if !report.slope_within(lo, hi) {
            eprintln!(
                "error: slope {:.4} outside the required band [{lo}, {hi}] \
                 (report written to {})",
                report.slope,
                out.display()
            );
            return EXIT_BAND;
        }
    }
    EXIT_OK
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Compile { spec, out, bound, species_budget } => {
            cmd_compile(spec, out, bound, species_budget)
        }
        Command::Simulate { net, inputs, seed, volume, stop, record, out, event_budget } => {
            cmd_simulate(net, inputs, seed, volume, stop, record, out, event_budget)
        }
        Command::Check { net, inputs, expect, expect_vote, spec, budget } => {
            cmd_check(net, inputs, expect, expect_vote, spec, budget)
        }
        Command::Bench { pattern, sizes, trials, seed, spec, ray, band, out, summary } => {
            cmd_bench(pattern, sizes, trials, seed, spec, ray, band, out, summary)
        }
    };
    ExitCode::from(code)
}
