//! Timing benchmarks over input size, with analytic references for the
//! classical completion-time patterns and an empirical log-log slope fit for
//! compiled networks.
//!
//! Each pattern is simulated to quiescence at a ladder of sizes; trial seeds
//! derive deterministically from one master seed, so a report is bit-exact
//! reproducible. Raw samples export as CSV and the aggregate as TOML.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compiler::{compile, CompileError, CompiledCrn, CompilerOptions};
use crate::crn::{Crn, CrnBuilder, CrnError};
use crate::kinetics::{
    simulate, stabilization_time, trial_seed, SimError, SimOptions, StopRule, Volume,
};
use crate::semilinear::{EvalError, FunctionSpec};

/// `H_n`, the expected quiescence time of `n` independent unimolecular
/// conversions at unit rate.
pub fn harmonic(n: u64) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

#[derive(Clone, Debug)]
pub enum BenchPattern {
    /// `X -> Y` from `{X: n}` at volume `n`; completes in `H_n` expected time.
    Unimolecular,
    /// `L + L -> L` from `{L: n}` at volume `n`; completes in `2n(1 - 1/n)`.
    LeaderElection,
    /// `C + A -> C + B` from `{C: n, A: n}` at volume `2n`; completes in
    /// `2 H_n`.
    Catalytic,
    /// A compiled function along the input ray `x = ray * n`, measured to
    /// the last output change; settled outputs are checked against the
    /// function itself.
    Compiled { spec: FunctionSpec, ray: Vec<u64> },
    /// `X -> 2Y` from `{X: n}` at volume `n`: a direct (uncompiled) network
    /// whose completion time grows only logarithmically, for contrast with
    /// compiled linear-time networks.
    Doubling,
}

impl BenchPattern {
    pub fn name(&self) -> &'static str {
        match self {
            BenchPattern::Unimolecular => "unimolecular",
            BenchPattern::LeaderElection => "leader-election",
            BenchPattern::Catalytic => "catalytic",
            BenchPattern::Compiled { .. } => "compiled",
            BenchPattern::Doubling => "doubling",
        }
    }

    /// Expected completion time at size `n`, where known analytically.
    pub fn reference(&self, n: u64) -> Option<f64> {
        match self {
            BenchPattern::Unimolecular => Some(harmonic(n)),
            BenchPattern::LeaderElection => Some(2.0 * n as f64 * (1.0 - 1.0 / n as f64)),
            BenchPattern::Catalytic => Some(2.0 * harmonic(n)),
            BenchPattern::Compiled { .. } | BenchPattern::Doubling => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub sizes: Vec<u64>,
    pub trials: u32,
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("sizes must be nonempty, positive, and strictly increasing")]
    BadSizes,
    #[error("at least 30 trials per size are required, got {0}")]
    TooFewTrials(u32),
    #[error("compiled network settled on {got:?} for input {x:?}, expected {want:?}")]
    WrongOutput { x: Vec<u64>, got: Vec<u64>, want: Vec<u64> },
    #[error("function undefined at benchmark input {x:?}: {err}")]
    Oracle { x: Vec<u64>, err: EvalError },
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Structure(#[from] CrnError),
}

/// Aggregates for one size on the ladder.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SizePoint {
    pub size: u64,
    pub trials: u32,
    pub mean: f64,
    pub stddev: f64,
    pub reference: Option<f64>,
    #[serde(skip)]
    pub samples: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingReport {
    pub tool_version: String,
    pub pattern: String,
    pub seed: u64,
    pub points: Vec<SizePoint>,
    /// Ordinary least-squares slope of `ln(mean)` against `ln(size)`.
    pub slope: f64,
    /// Approximate 95% interval (slope +/- 2 standard errors).
    pub slope_ci: (f64, f64),
}

impl ScalingReport {
    pub fn slope_within(&self, lo: f64, hi: f64) -> bool {
        self.slope >= lo && self.slope <= hi
    }
}

fn conversion_crn() -> Crn {
    CrnBuilder::default()
        .reaction(&[("X", 1)], &[("Y", 1)])
        .input("X")
        .output("Y")
        .build()
        .expect("well-formed")
}

pub(crate) fn fit_loglog(points: &[(f64, f64)]) -> (f64, (f64, f64)) {
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    if points.len() <= 2 {
        return (slope, (slope, slope));
    }
    let intercept = mean_y - slope * mean_x;
    let rss: f64 = logs.iter().map(|p| (p.1 - (intercept + slope * p.0)).powi(2)).sum();
    let se = (rss / (n - 2.0) / sxx).sqrt();
    (slope, (slope - 2.0 * se, slope + 2.0 * se))
}

/// One completion-time sample.
fn measure(
    crn: &Crn,
    init: &crate::crn::Configuration,
    volume: Volume,
    seed: u64,
    to_last_output_change: bool,
) -> Result<(f64, crate::crn::Configuration), BenchError> {
    let options = SimOptions { stop: StopRule::Quiescence, ..SimOptions::default() };
    let traj = simulate(crn, init, volume, &options, seed)?;
    let time = if to_last_output_change {
        stabilization_time(crn, &traj)?
    } else {
        traj.end_time
    };
    Ok((time, traj.final_config))
}

pub fn run_bench(pattern: &BenchPattern, options: &BenchOptions) -> Result<ScalingReport, BenchError> {
    if options.sizes.is_empty()
        || options.sizes.iter().any(|&n| n == 0)
        || options.sizes.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(BenchError::BadSizes);
    }
    if options.trials < 30 {
        return Err(BenchError::TooFewTrials(options.trials));
    }

    let compiled: Option<CompiledCrn> = match pattern {
        BenchPattern::Compiled { spec, .. } => {
            Some(compile(spec, &CompilerOptions::default())?)
        }
        _ => None,
    };

    let mut points = Vec::with_capacity(options.sizes.len());
    for (size_index, &n) in options.sizes.iter().enumerate() {
        let (crn, init, volume, measure_stabilization, expected): (
            Crn,
            crate::crn::Configuration,
            Volume,
            bool,
            Option<Vec<u64>>,
        ) = match pattern {
            BenchPattern::Unimolecular => {
                let crn = conversion_crn();
                let init = crn.input_configuration(&[n])?;
                (crn, init, Volume::new(n as f64)?, false, None)
            }
            BenchPattern::LeaderElection => {
                let crn = crate::presets::leader_election_crn();
                let init = crn.input_configuration(&[n])?;
                (crn, init, Volume::new(n as f64)?, false, None)
            }
            BenchPattern::Catalytic => {
                let crn = crate::presets::catalytic_crn();
                let init = crn.configuration(&[("C", n), ("A", n)])?;
                (crn, init, Volume::new(2.0 * n as f64)?, false, None)
            }
            BenchPattern::Doubling => {
                let crn = crate::presets::double_crn();
                let init = crn.input_configuration(&[n])?;
                (crn, init, Volume::new(n as f64)?, false, None)
            }
            BenchPattern::Compiled { spec, ray } => {
                let compiled = compiled.as_ref().expect("compiled above");
                let x: Vec<u64> = ray.iter().map(|r| r * n).collect();
                let want = spec
                    .eval(&x)
                    .map_err(|err| BenchError::Oracle { x: x.clone(), err })?;
                let init = compiled.crn.input_configuration(&x)?;
                let volume = compiled.volume_for(&x);
                (compiled.crn.clone(), init, volume, true, Some(want))
            }
        };

        let mut samples = Vec::with_capacity(options.trials as usize);
        for trial in 0..options.trials {
            let seed = trial_seed(options.seed, ((size_index as u64) << 32) | trial as u64);
            let (time, final_config) =
                measure(&crn, &init, volume, seed, measure_stabilization)?;
            if let Some(want) = &expected {
                let got: Vec<u64> =
                    crn.outputs().iter().map(|id| final_config.get(*id)).collect();
                if got != *want {
                    let x: Vec<u64> = match pattern {
                        BenchPattern::Compiled { ray, .. } => {
                            ray.iter().map(|r| r * n).collect()
                        }
                        _ => unreachable!(),
                    };
                    return Err(BenchError::WrongOutput { x, got, want: want.clone() });
                }
            }
            samples.push(time);
        }

        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let var = samples.iter().map(|t| (t - mean).powi(2)).sum::<f64>()
            / (samples.len() - 1).max(1) as f64;
        points.push(SizePoint {
            size: n,
            trials: options.trials,
            mean,
            stddev: var.sqrt(),
            reference: pattern.reference(n),
            samples,
        });
    }

    let fit_input: Vec<(f64, f64)> =
        points.iter().map(|p| (p.size as f64, p.mean.max(f64::MIN_POSITIVE))).collect();
    let (slope, slope_ci) = if fit_input.len() >= 2 {
        fit_loglog(&fit_input)
    } else {
        (f64::NAN, (f64::NAN, f64::NAN))
    };

    Ok(ScalingReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        pattern: pattern.name().to_string(),
        seed: options.seed,
        points,
        slope,
        slope_ci,
    })
}

/// Raw samples: one row per trial, with a reproducibility preamble.
pub fn write_bench_csv(report: &ScalingReport, out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "# crnc v{}", report.tool_version)?;
    writeln!(out, "# pattern={} seed={}", report.pattern, report.seed)?;
    writeln!(out, "size,trial,time")?;
    for point in &report.points {
        for (trial, time) in point.samples.iter().enumerate() {
            writeln!(out, "{},{},{}", point.size, trial, time)?;
        }
    }
    Ok(())
}

/// Aggregate summary as TOML, including the slope fit and references.
pub fn summary_toml(report: &ScalingReport) -> String {
    #[derive(Serialize)]
    struct Summary<'a> {
        tool_version: &'a str,
        pattern: &'a str,
        seed: u64,
        slope: f64,
        slope_ci_low: f64,
        slope_ci_high: f64,
        points: Vec<BTreeMap<&'static str, toml::Value>>,
    }
    let points = report
        .points
        .iter()
        .map(|p| {
            let mut row = BTreeMap::new();
            row.insert("size", toml::Value::Integer(p.size as i64));
            row.insert("trials", toml::Value::Integer(p.trials as i64));
            row.insert("mean", toml::Value::Float(p.mean));
            row.insert("stddev", toml::Value::Float(p.stddev));
            if let Some(r) = p.reference {
                row.insert("reference", toml::Value::Float(r));
            }
            row
        })
        .collect();
    toml::to_string_pretty(&Summary {
        tool_version: &report.tool_version,
        pattern: &report.pattern,
        seed: report.seed,
        slope: report.slope,
        slope_ci_low: report.slope_ci.0,
        slope_ci_high: report.slope_ci.1,
        points,
    })
    .expect("summary serializes")
}
