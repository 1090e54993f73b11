//! Direct Gillespie simulation of the lattice process.
//!
//! Event rates come from the columns of the bond operators, so the simulated
//! process and the assembled generator share one source of rates. Replica `i`
//! of a run with base seed `s` uses a ChaCha8 stream seeded with `s + i`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generator::config_from_occupancy;
use crate::model::{ChainSpec, LocalOperator};

/// Largest lattice for which the full configuration histogram is kept.
pub const MAX_HISTOGRAM_SITES: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    occupancy: Vec<bool>,
    time: f64,
}

impl LatticeState {
    pub fn new(occupancy: Vec<bool>) -> Self {
        LatticeState { occupancy, time: 0.0 }
    }

    pub fn empty(sites: usize) -> Self {
        Self::new(vec![false; sites])
    }

    pub fn full(sites: usize) -> Self {
        Self::new(vec![true; sites])
    }

    /// Parse a string of '0'/'1' (site 1 first).
    pub fn from_bitstring(s: &str) -> Result<Self> {
        let occ = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("invalid site character {other:?}"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        if occ.is_empty() {
            return Err(Error::Parse("empty configuration".into()));
        }
        Ok(Self::new(occ))
    }

    pub fn sites(&self) -> usize {
        self.occupancy.len()
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupancy
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn particles(&self) -> usize {
        self.occupancy.iter().filter(|&&b| b).count()
    }

    /// Configuration index, site 1 most significant.
    pub fn config(&self) -> usize {
        config_from_occupancy(&self.occupancy)
    }

    fn bond_state(&self, k: usize) -> usize {
        2 * self.occupancy[k - 1] as usize + self.occupancy[k] as usize
    }

    fn set_bond_state(&mut self, k: usize, local: usize) {
        self.occupancy[k - 1] = local & 2 != 0;
        self.occupancy[k] = local & 1 != 0;
    }
}

impl fmt::Display for LatticeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.occupancy.iter().try_for_each(|&b| f.write_str(if b { "1" } else { "0" }))
    }
}

/// One enabled transition: bond (k, k+1) moves to local state `target`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub bond: usize,
    pub target: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EventTable {
    pub events: Vec<Event>,
}

impl EventTable {
    pub fn total_rate(&self) -> f64 {
        self.events.iter().map(|e| e.rate).sum()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

fn collect_events(state: &LatticeState, ops: &[LocalOperator], out: &mut EventTable) {
    out.events.clear();
    for (i, op) in ops.iter().enumerate() {
        let k = i + 1;
        let source = state.bond_state(k);
        for target in 0..4 {
            if target == source {
                continue;
            }
            let rate = op.entry(target, source);
            if rate > 0.0 {
                out.events.push(Event { bond: k, target, rate });
            }
        }
    }
}

/// Transitions available from `state` under `spec`.
pub fn enabled_events(state: &LatticeState, spec: &ChainSpec) -> Result<EventTable> {
    if state.sites() != spec.sites() {
        return Err(Error::Parse(format!("state has {} sites, spec has {}", state.sites(), spec.sites())));
    }
    let ops = spec.bond_operators()?;
    let mut table = EventTable::default();
    collect_events(state, &ops, &mut table);
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Events(u64),
    Time(f64),
}

/// Event count written as an integer or in float notation with an integral
/// value, e.g. "1000000", "1e6", "2.5e3".
pub fn parse_event_count(s: &str) -> Result<u64> {
    let s = s.trim();
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = s.parse().map_err(|_| Error::Parse(format!("invalid event count {s:?}")))?;
    if !(x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(64)) {
        return Err(Error::Parse(format!("event count {s:?} is not a nonnegative integer")));
    }
    Ok(x as u64)
}

impl FromStr for Horizon {
    type Err = Error;

    /// "t=<time>" or "time:<time>" for a time horizon, otherwise an event count.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let time = s.strip_prefix("t=").or_else(|| s.strip_prefix("time:"));
        match time {
            Some(t) => {
                let x: f64 = t.trim().parse().map_err(|_| Error::Parse(format!("invalid time {t:?}")))?;
                if !(x.is_finite() && x >= 0.0) {
                    return Err(Error::Parse(format!("time horizon must be finite and nonnegative, got {t:?}")));
                }
                Ok(Horizon::Time(x))
            }
            None => parse_event_count(s).map(Horizon::Events),
        }
    }
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Horizon::Events(n) => write!(f, "{n}"),
            Horizon::Time(t) => write!(f, "t={t}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub seed: u64,
    pub events: u64,
    pub time: f64,
    /// Reached a state with no enabled events.
    pub absorbed: bool,
    /// Time-weighted configuration probabilities (N ≤ 16). An absorbing state
    /// reached before an event horizon holds all the weight.
    pub histogram: Option<Vec<f64>>,
    /// Time-averaged occupation of each site.
    pub density: Vec<f64>,
    pub final_state: String,
}

fn exponential(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate
}

/// Simulate one trajectory from `initial` until `horizon`.
pub fn run(spec: &ChainSpec, initial: &LatticeState, horizon: Horizon, seed: u64) -> Result<Trajectory> {
    spec.ensure_valid()?;
    let n = spec.sites();
    if initial.sites() != n {
        return Err(Error::Parse(format!("initial state has {} sites, spec has {n}", initial.sites())));
    }
    if let Horizon::Time(t) = horizon {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Parse(format!("time horizon must be finite and nonnegative, got {t}")));
        }
    }
    let ops = spec.bond_operators()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = initial.clone();
    state.time = 0.0;
    let mut hist = (n <= MAX_HISTOGRAM_SITES).then(|| vec![0.0f64; 1 << n]);
    let mut occ_time = vec![0.0f64; n];
    let mut table = EventTable::default();
    let mut count = 0u64;
    let mut absorbed = false;

    let mut hold = |state: &LatticeState, dt: f64, hist: &mut Option<Vec<f64>>| {
        if let Some(h) = hist.as_mut() {
            h[state.config()] += dt;
        }
        for (acc, &b) in occ_time.iter_mut().zip(&state.occupancy) {
            if b {
                *acc += dt;
            }
        }
    };

    loop {
        if let Horizon::Events(max) = horizon {
            if count >= max {
                break;
            }
        }
        collect_events(&state, &ops, &mut table);
        let total = table.total_rate();
        if total <= 0.0 {
            absorbed = true;
            if let Horizon::Time(t) = horizon {
                hold(&state, t - state.time, &mut hist);
                state.time = t;
            }
            break;
        }
        let dt = exponential(&mut rng, total);
        if let Horizon::Time(t) = horizon {
            if state.time + dt >= t {
                hold(&state, t - state.time, &mut hist);
                state.time = t;
                break;
            }
        }
        hold(&state, dt, &mut hist);
        state.time += dt;
        let mut u = rng.random::<f64>() * total;
        let mut chosen = table.events[table.events.len() - 1];
        for e in &table.events {
            if u < e.rate {
                chosen = *e;
                break;
            }
            u -= e.rate;
        }
        state.set_bond_state(chosen.bond, chosen.target);
        count += 1;
    }

    let elapsed = state.time;
    let histogram = hist.map(|mut h| {
        let total: f64 = h.iter().sum();
        if absorbed && matches!(horizon, Horizon::Events(_)) || total <= 0.0 {
            h.iter_mut().for_each(|x| *x = 0.0);
            h[state.config()] = 1.0;
        } else {
            h.iter_mut().for_each(|x| *x /= total);
        }
        h
    });
    let density = if absorbed && matches!(horizon, Horizon::Events(_)) || elapsed <= 0.0 {
        state.occupancy.iter().map(|&b| b as u8 as f64).collect()
    } else {
        occ_time.iter().map(|x| x / elapsed).collect()
    };
    Ok(Trajectory { seed, events: count, time: state.time, absorbed, histogram, density, final_state: state.to_string() })
}

/// Seed of replica `index` for base seed `base`.
pub fn replica_seed(base: u64, index: u64) -> u64 {
    base.wrapping_add(index)
}

/// Independent replicas in parallel, returned in replica order.
pub fn run_replicas(
    spec: &ChainSpec,
    initial: &LatticeState,
    horizon: Horizon,
    base_seed: u64,
    replicas: u64,
) -> Result<Vec<Trajectory>> {
    (0..replicas)
        .into_par_iter()
        .map(|i| run(spec, initial, horizon, replica_seed(base_seed, i)))
        .collect()
}

/// Mean histogram and density over replicas.
pub fn aggregate(runs: &[Trajectory]) -> (Option<Vec<f64>>, Vec<f64>) {
    let Some(first) = runs.first() else {
        return (None, Vec::new());
    };
    let w = 1.0 / runs.len() as f64;
    let mut hist = first.histogram.as_ref().map(|h| vec![0.0; h.len()]);
    let mut density = vec![0.0; first.density.len()];
    for r in runs {
        if let (Some(acc), Some(h)) = (hist.as_mut(), r.histogram.as_ref()) {
            acc.iter_mut().zip(h).for_each(|(a, x)| *a += w * x);
        }
        density.iter_mut().zip(&r.density).for_each(|(a, x)| *a += w * x);
    }
    (hist, density)
}

/// ½ Σ |a − b|.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}
