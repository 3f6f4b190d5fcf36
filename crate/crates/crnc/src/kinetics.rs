//! Stochastic kinetics: propensities, exponential waiting times, and an
//! exact direct-method simulator.
//!
//! Every reaction has unit rate constant; what varies is the propensity
//! determined by the current configuration `c` and the volume `v`:
//!
//! * `X -> ...` fires at rate `c(X)`,
//! * `X + Y -> ...` (distinct species) at `c(X) * c(Y) / v`,
//! * `X + X -> ...` at `c(X) * (c(X) - 1) / (2v)`.
//!
//! The next reaction fires after an exponential delay with rate equal to the
//! total propensity, and is chosen with probability proportional to its own
//! propensity. A configuration where every propensity is zero is quiescent:
//! nothing can ever fire again.
//!
//! Simulations are deterministic in the seed: the same network, initial
//! configuration, volume, options, and seed replay the identical event
//! sequence. Independent trials should derive per-trial seeds with
//! [`trial_seed`].

use std::io;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::crn::{Configuration, Crn, CrnError, SpeciesId};

/// RNG used for all simulation; seeded explicitly for reproducibility.
pub type SimRng = ChaCha8Rng;

/// Build the simulation RNG for a master seed.
pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive the seed for one trial of a batch from a master seed, so trials
/// are independent streams but the whole batch replays from one number.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    let mut z = master.wrapping_add(trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Positive finite volume scaling bimolecular propensities.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Volume(f64);

impl Volume {
    pub fn new(v: f64) -> Result<Volume, SimError> {
        if v.is_finite() && v > 0.0 {
            Ok(Volume(v))
        } else {
            Err(SimError::BadVolume(v))
        }
    }

    /// The conventional choice for hand-written networks: the total molecule
    /// count of the initial configuration (at least 1).
    pub fn from_initial(cfg: &Configuration) -> Volume {
        Volume(cfg.total().max(1) as f64)
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("volume must be positive and finite, got {0}")]
    BadVolume(f64),
    #[error("total molecule count {total} exceeded the bound {bound} after event {event}")]
    MassBoundExceeded { event: u64, total: u64, bound: u64 },
    #[error(transparent)]
    Structure(#[from] CrnError),
}

/// Propensity of reaction `index` in configuration `cfg` at volume `v`.
pub fn propensity(crn: &Crn, cfg: &Configuration, index: usize, v: Volume) -> f64 {
    let reactants = crn.reaction(index).reactants();
    match reactants {
        [(s, 1)] => cfg.get(*s) as f64,
        [(s, 2)] => {
            let n = cfg.get(*s) as f64;
            n * (n - 1.0) / (2.0 * v.get())
        }
        [(s, 1), (t, 1)] => (cfg.get(*s) as f64) * (cfg.get(*t) as f64) / v.get(),
        _ => unreachable!("reactions are validated to be uni- or bimolecular"),
    }
}

/// Sum of all propensities; zero exactly when the configuration is quiescent.
pub fn total_propensity(crn: &Crn, cfg: &Configuration, v: Volume) -> f64 {
    (0..crn.reactions().len()).map(|i| propensity(crn, cfg, i, v)).sum()
}

/// When a simulation should give up waiting for more events.
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum StopRule {
    /// Run until no reaction is applicable.
    Quiescence,
    /// Run until simulated time passes the horizon.
    TimeHorizon(f64),
    /// Run for at most this many reaction events.
    EventCap(u64),
    /// Stop once this many consecutive events leave the output unchanged
    /// (output species counts, or the vote status for deciders).
    OutputSilence { window: u64 },
}

/// Why a simulation ended.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StopReason {
    Quiescent,
    HorizonReached,
    EventCapExhausted,
    OutputSilent,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Quiescent => "quiescent",
            StopReason::HorizonReached => "horizon",
            StopReason::EventCapExhausted => "event-cap",
            StopReason::OutputSilent => "output-silent",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimOptions {
    pub stop: StopRule,
    /// Hard ceiling on events regardless of the stop rule, so runs on
    /// non-quiescing networks always terminate.
    pub safety_event_cap: u64,
    /// Abort with an error if the total molecule count ever exceeds this.
    pub mass_bound: Option<u64>,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { stop: StopRule::Quiescence, safety_event_cap: 10_000_000, mass_bound: None }
    }
}

/// One fired reaction.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Event {
    /// Absolute simulated time at which the reaction fired.
    pub time: f64,
    /// Index into [`Crn::reactions`].
    pub reaction: u32,
}

/// A complete simulation record: enough to replay every configuration.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub seed: u64,
    pub volume: f64,
    pub initial: Configuration,
    pub events: Vec<Event>,
    pub final_config: Configuration,
    /// Simulated time at the end of the run; for horizon stops this is the
    /// horizon itself, otherwise the time of the last event (0 if none).
    pub end_time: f64,
    pub stop: StopReason,
}

impl Trajectory {
    pub fn event_count(&self) -> u64 {
        self.events.len() as u64
    }
}

/// The output signature observed by stop rules and stabilization times: the
/// output species counts, or the vote status for deciders.
#[derive(Clone, PartialEq, Eq, Debug)]
enum OutputSignature {
    Counts(Vec<u64>),
    Vote(VoteStatus),
}

/// The verdict a configuration's voters express.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum VoteStatus {
    Yes,
    No,
    /// Voters disagree: no verdict yet.
    Mixed,
    /// No molecules at all: no verdict.
    Empty,
}

/// Vote status of a configuration in a decider, where every species votes
/// and the yes side is `crn.yes_voters()`.
pub fn vote_status(crn: &Crn, cfg: &Configuration) -> VoteStatus {
    let yes = crn.yes_voters().expect("vote_status requires a decider");
    let total = cfg.total();
    if total == 0 {
        return VoteStatus::Empty;
    }
    let yes_total: u64 = yes.iter().map(|&s| cfg.get(s)).sum();
    if yes_total == 0 {
        VoteStatus::No
    } else if yes_total == total {
        VoteStatus::Yes
    } else {
        VoteStatus::Mixed
    }
}

fn output_signature(crn: &Crn, cfg: &Configuration) -> OutputSignature {
    if crn.is_decider() {
        OutputSignature::Vote(vote_status(crn, cfg))
    } else {
        OutputSignature::Counts(crn.outputs().iter().map(|&s| cfg.get(s)).collect())
    }
}

/// Uniform draw in the open interval (0, 1); never 0, so logs are safe.
fn open_unit(rng: &mut SimRng) -> f64 {
    ((rng.random::<u64>() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn exponential(rng: &mut SimRng, rate: f64) -> f64 {
    -open_unit(rng).ln() / rate
}

struct PropensityTable {
    values: Vec<f64>,
    total: f64,
    /// reactions that read each species as a reactant
    readers: Vec<Vec<u32>>,
    /// species whose count each reaction changes or reads
    touched: Vec<Vec<SpeciesId>>,
    events_since_rebuild: u32,
}

const REBUILD_PERIOD: u32 = 4096;

impl PropensityTable {
    fn new(crn: &Crn, cfg: &Configuration, v: Volume) -> Self {
        let mut readers = vec![Vec::new(); crn.species_len()];
        let mut touched = Vec::with_capacity(crn.reactions().len());
        for (i, rxn) in crn.reactions().iter().enumerate() {
            for &(s, _) in rxn.reactants() {
                readers[s.index()].push(i as u32);
            }
            let mut species: Vec<SpeciesId> = rxn
                .reactants()
                .iter()
                .chain(rxn.products())
                .map(|&(s, _)| s)
                .collect();
            species.sort_by_key(|s| s.index());
            species.dedup();
            touched.push(species);
        }
        let values: Vec<f64> =
            (0..crn.reactions().len()).map(|i| propensity(crn, cfg, i, v)).collect();
        let total = values.iter().sum();
        PropensityTable { values, total, readers, touched, events_since_rebuild: 0 }
    }

    fn rebuild(&mut self, crn: &Crn, cfg: &Configuration, v: Volume) {
        for i in 0..self.values.len() {
            self.values[i] = propensity(crn, cfg, i, v);
        }
        self.total = self.values.iter().sum();
        self.events_since_rebuild = 0;
    }

    /// Refresh the propensities of reactions affected by firing `fired`.
    fn update_after(&mut self, crn: &Crn, cfg: &Configuration, v: Volume, fired: usize) {
        self.events_since_rebuild += 1;
        if self.events_since_rebuild >= REBUILD_PERIOD {
            self.rebuild(crn, cfg, v);
            return;
        }
        // Species lists per reaction are tiny, so a linear dedup over the
        // affected reaction indices is cheaper than a hash set.
        let mut dirty: Vec<u32> = Vec::with_capacity(8);
        for &s in &self.touched[fired] {
            for &r in &self.readers[s.index()] {
                if !dirty.contains(&r) {
                    dirty.push(r);
                }
            }
        }
        for &r in &dirty {
            let fresh = propensity(crn, cfg, r as usize, v);
            self.total += fresh - self.values[r as usize];
            self.values[r as usize] = fresh;
        }
        if self.total < 1e-12 {
            // Resolve float dust: decide quiescence exactly.
            self.rebuild(crn, cfg, v);
        }
    }

    /// Sample a reaction with probability proportional to its propensity;
    /// `None` when no propensity is positive (the incrementally tracked
    /// total can hold float dust at true quiescence).
    fn pick(&self, rng: &mut SimRng) -> Option<usize> {
        let target = rng.random::<f64>() * self.total;
        let mut acc = 0.0;
        let mut last_positive = None;
        for (i, &p) in self.values.iter().enumerate() {
            if p > 0.0 {
                acc += p;
                last_positive = Some(i);
                if target < acc {
                    return Some(i);
                }
            }
        }
        last_positive
    }
}

fn apply_in_place(
    crn: &Crn,
    cfg: &mut Configuration,
    index: usize,
) -> Result<(), CrnError> {
    let rxn = crn.reaction(index);
    for &(s, m) in rxn.reactants() {
        let cur = cfg.get(s);
        let next = cur
            .checked_sub(u64::from(m))
            .ok_or(CrnError::Inapplicable { reaction: index })?;
        cfg.set(s, next);
    }
    for &(s, m) in rxn.products() {
        let cur = cfg.get(s);
        let next = cur
            .checked_add(u64::from(m))
            .ok_or(CrnError::CountOverflow { reaction: index })?;
        cfg.set(s, next);
    }
    Ok(())
}

/// Run one exact stochastic simulation.
pub fn simulate(
    crn: &Crn,
    initial: &Configuration,
    volume: Volume,
    options: &SimOptions,
    seed: u64,
) -> Result<Trajectory, SimError> {
    let mut rng = rng_from_seed(seed);
    let mut cfg = initial.clone();
    let mut table = PropensityTable::new(crn, &cfg, volume);
    let mut events: Vec<Event> = Vec::new();
    let mut time = 0.0_f64;
    let mut mass: u64 = cfg.total();
    let mass_delta: Vec<i64> = crn
        .reactions()
        .iter()
        .map(|r| {
            let gain: i64 = r.products().iter().map(|&(_, m)| i64::from(m)).sum();
            let loss: i64 = r.reactants().iter().map(|&(_, m)| i64::from(m)).sum();
            gain - loss
        })
        .collect();

    let mut signature = output_signature(crn, &cfg);
    let mut last_output_change: u64 = 0;

    let event_cap = match options.stop {
        StopRule::EventCap(cap) => cap.min(options.safety_event_cap),
        _ => options.safety_event_cap,
    };

    let stop = loop {
        if table.total <= 0.0 {
            break StopReason::Quiescent;
        }
        if events.len() as u64 >= event_cap {
            break StopReason::EventCapExhausted;
        }
        if let StopRule::OutputSilence { window } = options.stop {
            if events.len() as u64 - last_output_change >= window {
                break StopReason::OutputSilent;
            }
        }
        let dt = exponential(&mut rng, table.total);
        let next_time = time + dt;
        if let StopRule::TimeHorizon(horizon) = options.stop {
            if next_time > horizon {
                time = horizon;
                break StopReason::HorizonReached;
            }
        }
        let Some(fired) = table.pick(&mut rng) else {
            table.rebuild(crn, &cfg, volume);
            continue;
        };
        apply_in_place(crn, &mut cfg, fired)?;
        time = next_time;
        events.push(Event { time, reaction: fired as u32 });

        mass = mass.checked_add_signed(mass_delta[fired]).expect("mass fits u64 given count checks");
        if let Some(bound) = options.mass_bound {
            if mass > bound {
                return Err(SimError::MassBoundExceeded {
                    event: events.len() as u64,
                    total: mass,
                    bound,
                });
            }
        }

        let now = output_signature(crn, &cfg);
        if now != signature {
            signature = now;
            last_output_change = events.len() as u64;
        }
        table.update_after(crn, &cfg, volume, fired);
    };

    Ok(Trajectory {
        seed,
        volume: volume.get(),
        initial: initial.clone(),
        events,
        final_config: cfg,
        end_time: time,
        stop,
    })
}

/// Walk a trajectory, calling `visit` on the initial configuration (with
/// `event = None`) and after each event (with the event's index).
pub fn replay(
    crn: &Crn,
    traj: &Trajectory,
    mut visit: impl FnMut(f64, Option<Event>, &Configuration),
) -> Result<(), CrnError> {
    let mut cfg = traj.initial.clone();
    visit(0.0, None, &cfg);
    for &event in &traj.events {
        apply_in_place(crn, &mut cfg, event.reaction as usize)?;
        visit(event.time, Some(event), &cfg);
    }
    Ok(())
}

/// Time of the last event that changed the output signature (output counts,
/// or vote status for deciders); 0 if the output never changed. For runs cut
/// off by a cap or horizon this is relative to the observed prefix only.
pub fn stabilization_time(crn: &Crn, traj: &Trajectory) -> Result<f64, CrnError> {
    let mut last_change = 0.0_f64;
    let mut signature: Option<OutputSignature> = None;
    replay(crn, traj, |time, _event, cfg| {
        let now = output_signature(crn, cfg);
        match &signature {
            Some(prev) if *prev == now => {}
            Some(_) => {
                signature = Some(now);
                last_change = time;
            }
            None => signature = Some(now),
        }
    })?;
    Ok(last_change)
}

/// How much of a trajectory to record.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RecordMode {
    /// One row per event with every species count.
    Full,
    /// One row per species change per event.
    Sparse,
    /// Only the final configuration.
    Final,
}

impl RecordMode {
    pub fn parse(s: &str) -> Option<RecordMode> {
        match s {
            "full" => Some(RecordMode::Full),
            "sparse" => Some(RecordMode::Sparse),
            "final" => Some(RecordMode::Final),
            _ => None,
        }
    }
}

fn write_preamble(
    traj: &Trajectory,
    comments: &[String],
    out: &mut impl io::Write,
) -> io::Result<()> {
    writeln!(out, "# crnc v{}", env!("CARGO_PKG_VERSION"))?;
    writeln!(out, "# seed={} volume={}", traj.seed, traj.volume)?;
    writeln!(
        out,
        "# stop={} events={} end_time={}",
        traj.stop.as_str(),
        traj.event_count(),
        traj.end_time
    )?;
    for line in comments {
        writeln!(out, "# {line}")?;
    }
    Ok(())
}

/// Write a trajectory as CSV with `#` repro comments (tool version, seed,
/// volume, stop summary, plus any caller-supplied lines such as the exact
/// command that produced the run).
pub fn write_trajectory_csv(
    crn: &Crn,
    traj: &Trajectory,
    mode: RecordMode,
    comments: &[String],
    out: &mut impl io::Write,
) -> io::Result<()> {
    write_preamble(traj, comments, out)?;
    let mut io_err: Option<io::Error> = None;
    match mode {
        RecordMode::Full => {
            let names: Vec<&str> = crn.species_names().collect();
            writeln!(out, "time,reaction,{}", names.join(","))?;
            replay(crn, traj, |time, event, cfg| {
                if io_err.is_some() {
                    return;
                }
                let rxn = event.map(|e| e.reaction.to_string()).unwrap_or_default();
                let counts: Vec<String> =
                    cfg.counts().iter().map(|c| c.to_string()).collect();
                if let Err(e) = writeln!(out, "{time},{rxn},{}", counts.join(",")) {
                    io_err = Some(e);
                }
            })
            .expect("trajectory replays on its own network");
        }
        RecordMode::Sparse => {
            writeln!(out, "time,reaction,species,delta")?;
            let mut prev = traj.initial.clone();
            let mut first = true;
            replay(crn, traj, |time, event, cfg| {
                if io_err.is_some() {
                    return;
                }
                let rxn = event.map(|e| e.reaction.to_string()).unwrap_or_default();
                for (idx, (&now, &before)) in
                    cfg.counts().iter().zip(prev.counts()).enumerate()
                {
                    let delta = if first { now as i64 } else { now as i64 - before as i64 };
                    if delta != 0 {
                        let name = crn.name_of(SpeciesId(idx as u32));
                        if let Err(e) = writeln!(out, "{time},{rxn},{name},{delta}") {
                            io_err = Some(e);
                            return;
                        }
                    }
                }
                first = false;
                prev = cfg.clone();
            })
            .expect("trajectory replays on its own network");
        }
        RecordMode::Final => {
            writeln!(out, "species,count")?;
            let cfg = &traj.final_config;
            for (idx, name) in crn.species_names().enumerate() {
                let count = cfg.counts()[idx];
                if count > 0 {
                    writeln!(out, "{name},{count}")?;
                }
            }
        }
    }
    match io_err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    // Statistical checks run enough trials that these bands sit several
    // standard errors out; see the standard-error notes at each use.
    const EXP_MEAN_TOL: f64 = 0.03;
    const PICK_BALANCE_TOL: u64 = 250;

    #[test]
    fn propensity_follows_the_kinetic_model() {
        let crn = presets::increment_crn();
        let v = Volume::new(1.0).unwrap();
        // {B: 2, Y: 1, K: 1}: X -> .. has 0; B+B has 2*1/2 = 1; Y+K has 1.
        let cfg = crn.configuration(&[("B", 2), ("Y", 1), ("K", 1)]).unwrap();
        assert_eq!(propensity(&crn, &cfg, 0, v), 0.0);
        assert_eq!(propensity(&crn, &cfg, 1, v), 1.0);
        assert_eq!(propensity(&crn, &cfg, 2, v), 1.0);
        assert_eq!(total_propensity(&crn, &cfg, v), 2.0);
        // Volume scales bimolecular but not unimolecular propensities.
        let v4 = Volume::new(4.0).unwrap();
        let cfg = crn.configuration(&[("X", 5), ("B", 3), ("Y", 2), ("K", 2)]).unwrap();
        assert_eq!(propensity(&crn, &cfg, 0, v4), 5.0);
        assert_eq!(propensity(&crn, &cfg, 1, v4), 3.0 * 2.0 / (2.0 * 4.0));
        assert_eq!(propensity(&crn, &cfg, 2, v4), 2.0 * 2.0 / 4.0);
    }

    #[test]
    fn volume_must_be_positive_and_finite() {
        assert!(Volume::new(0.0).is_err());
        assert!(Volume::new(-1.0).is_err());
        assert!(Volume::new(f64::NAN).is_err());
        assert!(Volume::new(f64::INFINITY).is_err());
        let cfg = presets::double_crn().input_configuration(&[7]).unwrap();
        assert_eq!(Volume::from_initial(&cfg).get(), 7.0);
    }

    #[test]
    fn exponential_samples_have_the_right_mean() {
        let mut rng = rng_from_seed(11);
        let rate = 2.0;
        let n = 20_000;
        let mean: f64 = (0..n).map(|_| exponential(&mut rng, rate)).sum::<f64>() / n as f64;
        // se = (1/rate)/sqrt(n) ~ 0.0035, so 0.03 is ~8.5 sigma.
        assert!((mean - 0.5).abs() < EXP_MEAN_TOL, "mean {mean}");
    }

    #[test]
    fn reaction_choice_is_proportional_to_propensity() {
        let crn = crate::crn::Crn::builder()
            .reaction(&[("X", 1)], &[("A", 1)])
            .reaction(&[("Z", 1)], &[("B", 1)])
            .input("X")
            .output("A")
            .build()
            .unwrap();
        let cfg = crn.configuration(&[("X", 3), ("Z", 3)]).unwrap();
        let v = Volume::new(6.0).unwrap();
        let mut rng = rng_from_seed(5);
        let trials = 10_000u64;
        let mut first = 0u64;
        for _ in 0..trials {
            let table = PropensityTable::new(&crn, &cfg, v);
            if table.pick(&mut rng) == Some(0) {
                first += 1;
            }
        }
        // Binomial sd = sqrt(10000 * 0.25) = 50; 250 is 5 sigma.
        assert!(first.abs_diff(trials / 2) < PICK_BALANCE_TOL, "picked {first}");
    }

    #[test]
    fn drifted_totals_cannot_select_an_inapplicable_reaction() {
        // One leader left: the pair reaction has exactly zero propensity,
        // but incremental total updates can leave positive dust behind.
        let crn = presets::leader_election_crn();
        let cfg = crn.configuration(&[("L", 1)]).unwrap();
        let v = Volume::new(2.0).unwrap();
        let mut table = PropensityTable::new(&crn, &cfg, v);
        table.total = 1e-13;
        let mut rng = rng_from_seed(1);
        assert_eq!(table.pick(&mut rng), None);
    }

    #[test]
    fn increment_network_stabilizes_to_x_plus_1() {
        let crn = presets::increment_crn();
        let init = crn.input_configuration(&[5]).unwrap();
        let v = Volume::from_initial(&init);
        for seed in 0..20 {
            let traj = simulate(&crn, &init, v, &SimOptions::default(), seed).unwrap();
            assert_eq!(traj.stop, StopReason::Quiescent);
            let y = crn.species_id("Y").unwrap();
            let b = crn.species_id("B").unwrap();
            let k = crn.species_id("K").unwrap();
            assert_eq!(traj.final_config.get(y), 6, "seed {seed}");
            assert_eq!(traj.final_config.get(b), 1);
            assert_eq!(traj.final_config.get(k), 0);
        }
    }

    #[test]
    fn doubling_fires_once_per_input_molecule() {
        let crn = presets::double_crn();
        let init = crn.input_configuration(&[40]).unwrap();
        let traj =
            simulate(&crn, &init, Volume::from_initial(&init), &SimOptions::default(), 3).unwrap();
        assert_eq!(traj.event_count(), 40);
        assert_eq!(traj.final_config.get(crn.species_id("Y").unwrap()), 80);
        // Event times strictly increase.
        for pair in traj.events.windows(2) {
            assert!(pair[0].time < pair[1].time);
        }
    }

    #[test]
    fn leader_election_quiesces_at_one_survivor() {
        let crn = presets::leader_election_crn();
        let init = crn.input_configuration(&[9]).unwrap();
        let traj =
            simulate(&crn, &init, Volume::from_initial(&init), &SimOptions::default(), 7).unwrap();
        assert_eq!(traj.event_count(), 8);
        assert_eq!(traj.final_config.get(crn.species_id("L").unwrap()), 1);
    }

    #[test]
    fn same_seed_replays_identically_and_seeds_differ() {
        let crn = presets::increment_crn();
        let init = crn.input_configuration(&[30]).unwrap();
        let v = Volume::from_initial(&init);
        let a = simulate(&crn, &init, v, &SimOptions::default(), 42).unwrap();
        let b = simulate(&crn, &init, v, &SimOptions::default(), 42).unwrap();
        assert_eq!(a.events, b.events);
        assert_eq!(a.final_config, b.final_config);
        let c = simulate(&crn, &init, v, &SimOptions::default(), 43).unwrap();
        assert_ne!(a.events, c.events);
    }

    #[test]
    fn time_horizon_cuts_the_run_without_overshooting() {
        let crn = presets::double_crn();
        let init = crn.input_configuration(&[1000]).unwrap();
        let opts = SimOptions { stop: StopRule::TimeHorizon(0.001), ..SimOptions::default() };
        let traj = simulate(&crn, &init, Volume::from_initial(&init), &opts, 1).unwrap();
        assert_eq!(traj.stop, StopReason::HorizonReached);
        assert_eq!(traj.end_time, 0.001);
        assert!(traj.events.iter().all(|e| e.time <= 0.001));
        assert!(traj.event_count() < 1000);
    }

    #[test]
    fn event_cap_limits_the_run() {
        let crn = presets::double_crn();
        let init = crn.input_configuration(&[1000]).unwrap();
        let opts = SimOptions { stop: StopRule::EventCap(17), ..SimOptions::default() };
        let traj = simulate(&crn, &init, Volume::from_initial(&init), &opts, 1).unwrap();
        assert_eq!(traj.stop, StopReason::EventCapExhausted);
        assert_eq!(traj.event_count(), 17);
    }

    #[test]
    fn output_silence_stops_non_quiescing_networks() {
        // A <-> B flips forever and never changes the (absent) output.
        let crn = crate::crn::Crn::builder()
            .reaction(&[("A", 1)], &[("B", 1)])
            .reaction(&[("B", 1)], &[("A", 1)])
            .input("A")
            .output("W")
            .species("W")
            .build()
            .unwrap();
        let init = crn.configuration(&[("A", 5), ("B", 5)]).unwrap();
        let opts =
            SimOptions { stop: StopRule::OutputSilence { window: 200 }, ..SimOptions::default() };
        let traj = simulate(&crn, &init, Volume::new(10.0).unwrap(), &opts, 9).unwrap();
        assert_eq!(traj.stop, StopReason::OutputSilent);
        assert_eq!(traj.event_count(), 200);
    }

    #[test]
    fn safety_cap_guards_every_stop_rule() {
        let crn = crate::crn::Crn::builder()
            .reaction(&[("A", 1)], &[("B", 1)])
            .reaction(&[("B", 1)], &[("A", 1)])
            .input("A")
            .output("B")
            .build()
            .unwrap();
        let init = crn.input_configuration(&[3]).unwrap();
        let opts = SimOptions { safety_event_cap: 50, ..SimOptions::default() };
        let traj = simulate(&crn, &init, Volume::new(3.0).unwrap(), &opts, 2).unwrap();
        assert_eq!(traj.stop, StopReason::EventCapExhausted);
        assert_eq!(traj.event_count(), 50);
    }

    #[test]
    fn mass_bound_violations_are_errors() {
        let crn = crate::crn::Crn::builder()
            .reaction(&[("X", 1)], &[("X", 2)])
            .input("X")
            .species("W")
            .output("W")
            .build()
            .unwrap();
        let init = crn.input_configuration(&[4]).unwrap();
        let opts = SimOptions { mass_bound: Some(6), ..SimOptions::default() };
        let err = simulate(&crn, &init, Volume::new(4.0).unwrap(), &opts, 1).unwrap_err();
        match err {
            SimError::MassBoundExceeded { total, bound, .. } => {
                assert_eq!(total, 7);
                assert_eq!(bound, 6);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn empty_initial_configuration_is_immediately_quiescent() {
        let crn = presets::increment_crn();
        let init = crn.empty_configuration();
        let traj =
            simulate(&crn, &init, Volume::new(1.0).unwrap(), &SimOptions::default(), 0).unwrap();
        assert_eq!(traj.stop, StopReason::Quiescent);
        assert_eq!(traj.event_count(), 0);
        assert_eq!(traj.end_time, 0.0);
    }

    #[test]
    fn stabilization_time_tracks_the_last_output_change() {
        let crn = presets::double_crn();
        let init = crn.input_configuration(&[12]).unwrap();
        let traj =
            simulate(&crn, &init, Volume::from_initial(&init), &SimOptions::default(), 8).unwrap();
        // Every event changes Y, so stabilization happens at the last event.
        let expect = traj.events.last().unwrap().time;
        assert_eq!(stabilization_time(&crn, &traj).unwrap(), expect);

        // In the increment network only X -> B + 2Y and Y + K -> 0 touch Y.
        let crn = presets::increment_crn();
        let init = crn.input_configuration(&[20]).unwrap();
        let traj =
            simulate(&crn, &init, Volume::from_initial(&init), &SimOptions::default(), 8).unwrap();
        let expect = traj
            .events
            .iter()
            .filter(|e| e.reaction != 1)
            .map(|e| e.time)
            .fold(0.0, f64::max);
        assert_eq!(stabilization_time(&crn, &traj).unwrap(), expect);
        assert!(expect < traj.end_time || traj.events.last().unwrap().reaction != 1);
    }

    #[test]
    fn stabilization_time_for_deciders_tracks_vote_status() {
        let crn = crate::crn::Crn::builder()
            .reaction(&[("L", 2)], &[("L", 1)])
            .input("L")
            .yes_voters(["L"])
            .build()
            .unwrap();
        let init = crn.input_configuration(&[6]).unwrap();
        let traj =
            simulate(&crn, &init, Volume::from_initial(&init), &SimOptions::default(), 4).unwrap();
        // Only L is ever present, so the vote status never changes.
        assert_eq!(stabilization_time(&crn, &traj).unwrap(), 0.0);
    }

    #[test]
    fn vote_status_distinguishes_the_four_cases() {
        let crn = crate::crn::Crn::builder()
            .reaction(&[("T", 1), ("F", 1)], &[("T", 2)])
            .input("T")
            .yes_voters(["T"])
            .build()
            .unwrap();
        let yes = crn.configuration(&[("T", 3)]).unwrap();
        let no = crn.configuration(&[("F", 2)]).unwrap();
        let mixed = crn.configuration(&[("T", 1), ("F", 1)]).unwrap();
        let empty = crn.empty_configuration();
        assert_eq!(vote_status(&crn, &yes), VoteStatus::Yes);
        assert_eq!(vote_status(&crn, &no), VoteStatus::No);
        assert_eq!(vote_status(&crn, &mixed), VoteStatus::Mixed);
        assert_eq!(vote_status(&crn, &empty), VoteStatus::Empty);
    }

    #[test]
    fn trial_seeds_are_spread_out() {
        let seeds: std::collections::BTreeSet<u64> =
            (0..1000).map(|t| trial_seed(77, t)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(trial_seed(77, 0), trial_seed(78, 0));
    }

    #[test]
    fn csv_full_mode_replays_every_configuration() {
        let crn = presets::increment_crn();
        let init = crn.input_configuration(&[2]).unwrap();
        let traj =
            simulate(&crn, &init, Volume::from_initial(&init), &SimOptions::default(), 5).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&crn, &traj, RecordMode::Full, &[
            "cmd=test".to_string(),
        ], &mut buf)
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# crnc v"));
        assert!(text.contains("# seed=5"));
        assert!(text.contains("# cmd=test"));
        let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(header, "time,reaction,B,K,X,Y");
        let rows: Vec<&str> =
            text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("time")).collect();
        assert_eq!(rows.len(), traj.events.len() + 1);
        assert!(rows[0].starts_with("0,,"));
    }

    #[test]
    fn csv_sparse_and_final_modes_describe_the_run() {
        let crn = presets::double_crn();
        let init = crn.input_configuration(&[3]).unwrap();
        let traj =
            simulate(&crn, &init, Volume::from_initial(&init), &SimOptions::default(), 5).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&crn, &traj, RecordMode::Sparse, &[], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("time,reaction,species,delta"));
        assert!(text.contains("0,,X,3"));
        // Each doubling event produces two sparse rows: X -1 and Y +2.
        let event_rows =
            text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("time") && !l.starts_with("0,,")).count();
        assert_eq!(event_rows, 6);

        let mut buf = Vec::new();
        write_trajectory_csv(&crn, &traj, RecordMode::Final, &[], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("# stop=quiescent events=3"));
        assert!(text.contains("species,count"));
        assert!(text.contains("Y,6"));
        assert!(!text.contains("X,"));
    }
}
