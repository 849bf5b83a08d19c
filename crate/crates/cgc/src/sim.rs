//! Event-driven continuous-time simulation of an idealized CSMA network.
//!
//! Each link with a nonempty buffer draws an exponential backoff (mean
//! `E[t_tr] / rho_i`) and counts it down while the channel is idle; the
//! countdown freezes — the remaining time is recorded — whenever a neighbor
//! transmits and resumes afterwards. At expiry the link transmits for an
//! exponential duration (mean `E[t_tr]`, the time unit). After a
//! transmission the link draws a fresh backoff if its buffer is still
//! nonempty, and otherwise leaves channel competition until the next packet
//! arrives. Arrivals are Poisson with rate `f_i / E[t_tr]`, so the offered
//! load `f_i` is the long-run airtime a link asks for.
//!
//! Carrier sensing is idealized: backoff timers are continuous, so two
//! neighbors never finish counting down at the same instant (in finite
//! precision a deterministic tie-break preserves the guarantee), and
//! transmissions of neighboring links never overlap. The empirical
//! normalized throughput of a link is its transmit airtime after a warmup
//! prefix divided by the measured time.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ContentionGraph, SubnetworkMask};
use crate::mixture::OfferedLoadVector;
use crate::product_form::ThroughputVector;

pub const DEFAULT_DURATION: f64 = 1e6;
pub const DEFAULT_WARMUP_FRACTION: f64 = 0.10;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("duration must be positive, got {0}")]
    NonPositiveDuration(f64),
    #[error("warmup fraction must lie in [0, 0.5], got {0}")]
    WarmupOutOfRange(f64),
    #[error("mean transmission time must be positive and finite, got {0}")]
    InvalidMeanTxTime(f64),
    #[error("offered load has {got} entries for {expected} links")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Configuration of one simulation run.
///
/// `mean_tx_time` is the time unit: throughput, offered load, and arrival
/// rate all normalize against it. In saturated mode every competing buffer
/// is treated as permanently nonempty, arrivals are disabled, and
/// `offered_load` is ignored (it may be empty).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub mean_tx_time: f64,
    pub offered_load: OfferedLoadVector,
    pub saturated_mode: bool,
    pub duration: f64,
    pub warmup_fraction: f64,
    pub seed: u64,
    pub record_trace: bool,
}

impl SimConfig {
    /// Finite-load configuration pumping Poisson traffic at `offered_load`.
    pub fn for_load(offered_load: OfferedLoadVector) -> Self {
        Self {
            mean_tx_time: 1.0,
            offered_load,
            saturated_mode: false,
            duration: DEFAULT_DURATION,
            warmup_fraction: DEFAULT_WARMUP_FRACTION,
            seed: 0,
            record_trace: false,
        }
    }

    /// Saturated configuration: buffers never empty, no arrival process.
    pub fn saturated() -> Self {
        Self {
            saturated_mode: true,
            ..Self::for_load(OfferedLoadVector::zeros(0))
        }
    }

    pub fn with_duration(mut self, duration: f64) -> Self {
        self.duration = duration;
        self
    }

    pub fn with_warmup_fraction(mut self, warmup_fraction: f64) -> Self {
        self.warmup_fraction = warmup_fraction;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_trace(mut self, record_trace: bool) -> Self {
        self.record_trace = record_trace;
        self
    }

    pub fn validate(&self, n_links: usize) -> Result<(), SimError> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(SimError::NonPositiveDuration(self.duration));
        }
        if !(0.0..=0.5).contains(&self.warmup_fraction) {
            return Err(SimError::WarmupOutOfRange(self.warmup_fraction));
        }
        if !(self.mean_tx_time > 0.0 && self.mean_tx_time.is_finite()) {
            return Err(SimError::InvalidMeanTxTime(self.mean_tx_time));
        }
        if !self.saturated_mode && self.offered_load.len() != n_links {
            return Err(SimError::DimensionMismatch {
                expected: n_links,
                got: self.offered_load.len(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueueStats {
    /// Time-average number of packets in the system (buffer plus the one on
    /// the air). Zero in saturated mode, where no packets are modeled.
    pub mean_queue: f64,
    /// Fraction of measured time the link had nothing to send. A stable
    /// queue empties regularly; a value of zero after warmup marks a link
    /// receiving more load than it can carry.
    pub fraction_empty: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    Arrival,
    TxStart,
    TxEnd,
}

/// One entry of the optional event trace; `link` is 0-based here, while the
/// CSV rendering uses the 1-based numbering of topology files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub time: f64,
    pub link: usize,
    pub kind: TraceKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    /// Per-link empirical normalized throughput: transmit airtime after
    /// warmup divided by measured time.
    pub th_hat: ThroughputVector,
    pub queue_stats: Vec<QueueStats>,
    pub events_processed: u64,
    pub seed: u64,
    /// Length of the measurement window (duration minus warmup).
    pub measured_time: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<Vec<TraceEvent>>,
}

impl SimResult {
    /// Links whose buffers never emptied during the measurement window: an
    /// offered load above capacity leaves the queue growing without bound
    /// and the achieved throughput below the offered one.
    pub fn saturated_links(&self) -> Vec<usize> {
        self.queue_stats
            .iter()
            .enumerate()
            .filter(|(_, qs)| qs.fraction_empty < 1e-9)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn aggregate(&self) -> f64 {
        self.th_hat.aggregate()
    }
}

/// Simulates the network under `cfg` with every link participating
/// (links with zero offered load simply never have anything to send).
pub fn simulate(g: &ContentionGraph, cfg: &SimConfig) -> Result<SimResult, SimError> {
    cfg.validate(g.n())?;
    Ok(Engine::new(g, g.full_mask(), cfg).run())
}

/// Saturated stochastic oracle for the product-form throughputs: only the
/// links in `active` compete, each with an always-nonempty buffer.
pub fn simulate_saturated(
    g: &ContentionGraph,
    active: SubnetworkMask,
    cfg: &SimConfig,
) -> Result<SimResult, SimError> {
    let cfg = SimConfig {
        saturated_mode: true,
        ..cfg.clone()
    };
    cfg.validate(g.n())?;
    Ok(Engine::new(g, active, &cfg).run())
}

/// Runs one independent replication per seed (in parallel; results are in
/// seed order and independent of scheduling).
pub fn simulate_many(
    g: &ContentionGraph,
    cfg: &SimConfig,
    seeds: &[u64],
) -> Result<Vec<SimResult>, SimError> {
    cfg.validate(g.n())?;
    Ok(seeds
        .par_iter()
        .map(|&seed| {
            let run_cfg = cfg.clone().with_seed(seed);
            Engine::new(g, g.full_mask(), &run_cfg).run()
        })
        .collect())
}

/// Cross-seed summary of a set of replications.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PooledThroughput {
    /// Per-link mean of `th_hat` across seeds.
    pub mean: Vec<f64>,
    /// Per-link standard error of that mean (zero for a single seed).
    pub std_error: Vec<f64>,
    pub aggregate_mean: f64,
    pub aggregate_std_error: f64,
    pub n_seeds: usize,
}

/// Pools per-seed results into means and standard errors.
///
/// # Panics
/// If `results` is empty or the runs disagree on the number of links.
pub fn pool(results: &[SimResult]) -> PooledThroughput {
    assert!(!results.is_empty(), "cannot pool zero simulation runs");
    let n = results[0].th_hat.len();
    let k = results.len();
    assert!(
        results.iter().all(|r| r.th_hat.len() == n),
        "runs have inconsistent link counts"
    );

    let mut mean = vec![0.0; n];
    for r in results {
        for (m, &v) in mean.iter_mut().zip(r.th_hat.as_slice()) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= k as f64;
    }

    let mut std_error = vec![0.0; n];
    if k > 1 {
        for r in results {
            for (s, (&v, &m)) in std_error
                .iter_mut()
                .zip(r.th_hat.as_slice().iter().zip(&mean))
            {
                *s += (v - m) * (v - m);
            }
        }
        for s in std_error.iter_mut() {
            *s = (*s / (k - 1) as f64).sqrt() / (k as f64).sqrt();
        }
    }

    let aggregates: Vec<f64> = results.iter().map(SimResult::aggregate).collect();
    let aggregate_mean = aggregates.iter().sum::<f64>() / k as f64;
    let aggregate_std_error = if k > 1 {
        let var = aggregates
            .iter()
            .map(|a| (a - aggregate_mean) * (a - aggregate_mean))
            .sum::<f64>()
            / (k - 1) as f64;
        var.sqrt() / (k as f64).sqrt()
    } else {
        0.0
    };

    PooledThroughput {
        mean,
        std_error,
        aggregate_mean,
        aggregate_std_error,
        n_seeds: k,
    }
}

/// A violation found by the mutual-exclusion audit: two sensing links on the
/// air at once.
#[derive(Clone, Copy, Debug, Error, PartialEq)]
#[error("links {link} and {neighbor} transmit simultaneously at time {time}")]
pub struct ExclusionViolation {
    pub time: f64,
    pub link: usize,
    pub neighbor: usize,
}

/// Replays an event trace and checks that no two neighboring links ever
/// transmit at the same time. Also rejects malformed traces (a transmission
/// ending that never started, or starting twice).
pub fn audit_mutual_exclusion(
    g: &ContentionGraph,
    trace: &[TraceEvent],
) -> Result<(), ExclusionViolation> {
    let mut on_air: u32 = 0;
    for ev in trace {
        match ev.kind {
            TraceKind::Arrival => {}
            TraceKind::TxStart => {
                let bit = 1u32 << ev.link;
                assert_eq!(on_air & bit, 0, "link {} starts twice", ev.link);
                let conflict = on_air & g.neighbor_mask(ev.link);
                if conflict != 0 {
                    return Err(ExclusionViolation {
                        time: ev.time,
                        link: ev.link,
                        neighbor: conflict.trailing_zeros() as usize,
                    });
                }
                on_air |= bit;
            }
            TraceKind::TxEnd => {
                let bit = 1u32 << ev.link;
                assert_ne!(on_air & bit, 0, "link {} ends without starting", ev.link);
                on_air &= !bit;
            }
        }
    }
    Ok(())
}

/// Writes a trace as CSV (`time,link,event`), with links numbered from 1 as
/// in topology files.
pub fn write_trace_csv<W: Write>(mut w: W, trace: &[TraceEvent]) -> io::Result<()> {
    writeln!(w, "time,link,event")?;
    for ev in trace {
        let kind = match ev.kind {
            TraceKind::Arrival => "arrival",
            TraceKind::TxStart => "tx_start",
            TraceKind::TxEnd => "tx_end",
        };
        writeln!(w, "{},{},{}", ev.time, ev.link + 1, kind)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Engine internals
// ---------------------------------------------------------------------------

/// Event kinds in tie-break order: when timestamps collide (possible only
/// through finite precision), transmissions end before backoffs expire
/// before packets arrive, and lower link indices go first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum EventKind {
    TxEnd,
    BackoffExpiry,
    Arrival,
}

#[derive(Clone, Copy, Debug)]
struct Event {
    time: f64,
    kind: EventKind,
    link: usize,
    /// Backoff generation stamp; an expiry whose stamp is stale (the link
    /// froze or left competition since scheduling) is ignored.
    generation: u64,
    /// Insertion sequence, the final deterministic tie-break.
    seq: u64,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then_with(|| self.kind.cmp(&other.kind))
            .then_with(|| self.link.cmp(&other.link))
            .then_with(|| self.seq.cmp(&other.seq))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Phase {
    /// Not competing: nothing to send (or link outside the active set).
    Idle,
    /// Channel idle, backoff timer running.
    CountingDown {
        expiry: f64,
    },
    /// A neighbor is on the air; the remaining backoff time is recorded.
    Frozen {
        remaining: f64,
    },
    Transmitting {
        started: f64,
        end: f64,
    },
}

struct LinkState {
    phase: Phase,
    /// Packets in the system (buffer plus in-flight). Unused in saturated
    /// mode.
    queue: u64,
    /// How many neighbors are currently transmitting.
    busy_neighbors: u32,
    generation: u64,
    airtime: f64,
    queue_integral: f64,
    empty_time: f64,
    last_queue_change: f64,
}

struct Engine<'a> {
    g: &'a ContentionGraph,
    cfg: &'a SimConfig,
    active: SubnetworkMask,
    now: f64,
    warmup_end: f64,
    heap: BinaryHeap<std::cmp::Reverse<Event>>,
    links: Vec<LinkState>,
    rng: ChaCha8Rng,
    tx_dist: Exp<f64>,
    backoff_dists: Vec<Option<Exp<f64>>>,
    arrival_dists: Vec<Option<Exp<f64>>>,
    seq: u64,
    events_processed: u64,
    trace: Option<Vec<TraceEvent>>,
}

impl<'a> Engine<'a> {
    fn new(g: &'a ContentionGraph, active: SubnetworkMask, cfg: &'a SimConfig) -> Self {
        let n = g.n();
        let tx_rate = 1.0 / cfg.mean_tx_time;
        let backoff_dists = (0..n)
            .map(|i| {
                if active.contains(i) {
                    // E[t_cd] = E[t_tr] / rho_i, i.e. rate rho_i / E[t_tr].
                    Some(Exp::new(g.rho_of(i) / cfg.mean_tx_time).expect("positive rate"))
                } else {
                    None
                }
            })
            .collect();
        let arrival_dists = (0..n)
            .map(|i| {
                if cfg.saturated_mode || !active.contains(i) {
                    None
                } else {
                    let f = cfg.offered_load.as_slice()[i];
                    (f > 0.0).then(|| Exp::new(f / cfg.mean_tx_time).expect("positive rate"))
                }
            })
            .collect();
        let links = (0..n)
            .map(|_| LinkState {
                phase: Phase::Idle,
                queue: 0,
                busy_neighbors: 0,
                generation: 0,
                airtime: 0.0,
                queue_integral: 0.0,
                empty_time: 0.0,
                last_queue_change: 0.0,
            })
            .collect();
        Self {
            g,
            cfg,
            active,
            now: 0.0,
            warmup_end: cfg.duration * cfg.warmup_fraction,
            heap: BinaryHeap::new(),
            links,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            tx_dist: Exp::new(tx_rate).expect("positive rate"),
            backoff_dists,
            arrival_dists,
            seq: 0,
            events_processed: 0,
            trace: cfg.record_trace.then(Vec::new),
        }
    }

    fn schedule(&mut self, time: f64, kind: EventKind, link: usize, generation: u64) {
        if time > self.cfg.duration {
            // Nothing past the horizon is ever processed.
            return;
        }
        let seq = self.seq;
        self.seq += 1;
        self.heap.push(std::cmp::Reverse(Event {
            time,
            kind,
            link,
            generation,
            seq,
        }));
    }

    fn record(&mut self, link: usize, kind: TraceKind) {
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceEvent {
                time: self.now,
                link,
                kind,
            });
        }
    }

    fn draw_backoff(&mut self, link: usize) -> f64 {
        let dist = self.backoff_dists[link].expect("active link has a backoff distribution");
        self.rng.sample(dist)
    }

    fn has_traffic(&self, link: usize) -> bool {
        self.cfg.saturated_mode || self.links[link].queue > 0
    }

    /// Clipped accumulation of the queue-length and empty-time integrals up
    /// to `self.now`, using the queue value held since the last change.
    fn accrue_queue(&mut self, link: usize) {
        if self.cfg.saturated_mode {
            return;
        }
        let ls = &mut self.links[link];
        let lo = ls.last_queue_change.max(self.warmup_end);
        let hi = self.now.min(self.cfg.duration);
        if hi > lo {
            let dt = hi - lo;
            ls.queue_integral += ls.queue as f64 * dt;
            if ls.queue == 0 {
                ls.empty_time += dt;
            }
        }
        ls.last_queue_change = self.now;
    }

    /// A link that just acquired traffic (re)enters channel competition:
    /// it draws a backoff and either counts it down on an idle channel or
    /// holds it frozen until the neighbors fall silent.
    fn enter_competition(&mut self, link: usize) {
        debug_assert_eq!(self.links[link].phase, Phase::Idle);
        debug_assert!(self.has_traffic(link));
        let backoff = self.draw_backoff(link);
        let ls = &mut self.links[link];
        if ls.busy_neighbors == 0 {
            let expiry = self.now + backoff;
            ls.phase = Phase::CountingDown { expiry };
            let generation = ls.generation;
            self.schedule(expiry, EventKind::BackoffExpiry, link, generation);
        } else {
            ls.phase = Phase::Frozen { remaining: backoff };
        }
    }

    fn run(mut self) -> SimResult {
        // Saturated links compete from time zero; finite-load links wait for
        // their first arrival.
        for link in 0..self.g.n() {
            if !self.active.contains(link) {
                continue;
            }
            if self.cfg.saturated_mode {
                self.enter_competition(link);
            } else if self.arrival_dists[link].is_some() {
                let gap = self.rng.sample(self.arrival_dists[link].unwrap());
                self.schedule(self.now + gap, EventKind::Arrival, link, 0);
            }
        }

        while let Some(std::cmp::Reverse(ev)) = self.heap.pop() {
            debug_assert!(ev.time >= self.now, "events must be processed in order");
            self.now = ev.time;
            match ev.kind {
                EventKind::Arrival => self.on_arrival(ev.link),
                EventKind::BackoffExpiry => self.on_backoff_expiry(ev.link, ev.generation),
                EventKind::TxEnd => self.on_tx_end(ev.link),
            }
        }

        self.finish()
    }

    fn on_arrival(&mut self, link: usize) {
        self.events_processed += 1;
        self.record(link, TraceKind::Arrival);
        self.accrue_queue(link);
        self.links[link].queue += 1;
        if self.links[link].queue == 1 && self.links[link].phase == Phase::Idle {
            self.enter_competition(link);
        }
        let gap = self
            .rng
            .sample(self.arrival_dists[link].expect("arrivals enabled"));
        self.schedule(self.now + gap, EventKind::Arrival, link, 0);
    }

    fn on_backoff_expiry(&mut self, link: usize, generation: u64) {
        if generation != self.links[link].generation {
            return; // canceled by a freeze since it was scheduled
        }
        debug_assert!(matches!(self.links[link].phase, Phase::CountingDown { .. }));
        debug_assert_eq!(self.links[link].busy_neighbors, 0);
        self.events_processed += 1;

        // Transmission starts.
        self.record(link, TraceKind::TxStart);
        let length = self.rng.sample(self.tx_dist);
        let end = self.now + length;
        self.links[link].phase = Phase::Transmitting {
            started: self.now,
            end,
        };
        self.schedule(end, EventKind::TxEnd, link, 0);

        // Neighbors sense the carrier and freeze their countdowns.
        let mut neighbors = self.g.neighbor_mask(link);
        while neighbors != 0 {
            let nb = neighbors.trailing_zeros() as usize;
            neighbors &= neighbors - 1;
            let ls = &mut self.links[nb];
            ls.busy_neighbors += 1;
            if let Phase::CountingDown { expiry } = ls.phase {
                debug_assert_eq!(ls.busy_neighbors, 1);
                ls.phase = Phase::Frozen {
                    remaining: (expiry - self.now).max(0.0),
                };
                ls.generation += 1; // strands the scheduled expiry
            }
        }
    }

    fn on_tx_end(&mut self, link: usize) {
        self.events_processed += 1;
        let Phase::Transmitting { started, end } = self.links[link].phase else {
            unreachable!("tx_end for a link that is not transmitting");
        };
        debug_assert_eq!(end, self.now);
        self.record(link, TraceKind::TxEnd);
        self.links[link].airtime += clipped_span(started, end, self.warmup_end, self.cfg.duration);
        self.links[link].phase = Phase::Idle;
        if !self.cfg.saturated_mode {
            self.accrue_queue(link);
            self.links[link].queue -= 1; // the transmitted packet departs
        }

        // The carrier drops: neighbors with no other transmitting neighbor
        // resume their frozen countdowns where they left off.
        let mut neighbors = self.g.neighbor_mask(link);
        while neighbors != 0 {
            let nb = neighbors.trailing_zeros() as usize;
            neighbors &= neighbors - 1;
            let ls = &mut self.links[nb];
            ls.busy_neighbors -= 1;
            if ls.busy_neighbors == 0 {
                if let Phase::Frozen { remaining } = ls.phase {
                    let expiry = self.now + remaining;
                    ls.phase = Phase::CountingDown { expiry };
                    let generation = ls.generation;
                    self.schedule(expiry, EventKind::BackoffExpiry, nb, generation);
                }
            }
        }

        // The link itself rejoins competition if it still has traffic.
        if self.has_traffic(link) {
            self.enter_competition(link);
        }
    }

    fn finish(mut self) -> SimResult {
        // Close the books at the horizon: transmissions still on the air
        // contribute their clipped span, queue integrals run to the end.
        self.now = self.cfg.duration;
        for link in 0..self.g.n() {
            if let Phase::Transmitting { started, end } = self.links[link].phase {
                self.links[link].airtime +=
                    clipped_span(started, end, self.warmup_end, self.cfg.duration);
            }
            self.accrue_queue(link);
        }

        let measured_time = self.cfg.duration - self.warmup_end;
        let th_hat = ThroughputVector::new(
            self.links
                .iter()
                .map(|ls| ls.airtime / measured_time)
                .collect(),
        );
        let queue_stats = self
            .links
            .iter()
            .map(|ls| QueueStats {
                mean_queue: ls.queue_integral / measured_time,
                fraction_empty: ls.empty_time / measured_time,
            })
            .collect();
        SimResult {
            th_hat,
            queue_stats,
            events_processed: self.events_processed,
            seed: self.cfg.seed,
            measured_time,
            trace: self.trace,
        }
    }
}

/// Length of `[start, end] ∩ [lo, hi]`.
fn clipped_span(start: f64, end: f64, lo: f64, hi: f64) -> f64 {
    (end.min(hi) - start.max(lo)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::StateMask;
    use crate::product_form::saturated_throughputs;
    use crate::DEFAULT_ACCESS_INTENSITY as RHO;

    fn single() -> ContentionGraph {
        ContentionGraph::uniform(1, [], RHO).unwrap()
    }

    fn pair() -> ContentionGraph {
        ContentionGraph::uniform(2, [(0, 1)], RHO).unwrap()
    }

    fn chain3() -> ContentionGraph {
        ContentionGraph::uniform(3, [(0, 1), (1, 2)], RHO).unwrap()
    }

    fn four_ring() -> ContentionGraph {
        ContentionGraph::uniform(4, [(0, 2), (0, 3), (1, 2), (1, 3)], RHO).unwrap()
    }

    #[test]
    fn config_validation() {
        let g = pair();
        assert_eq!(
            SimConfig::saturated().with_duration(0.0).validate(g.n()),
            Err(SimError::NonPositiveDuration(0.0))
        );
        assert_eq!(
            SimConfig::saturated()
                .with_warmup_fraction(0.6)
                .validate(g.n()),
            Err(SimError::WarmupOutOfRange(0.6))
        );
        let short = SimConfig::for_load(OfferedLoadVector::zeros(1));
        assert_eq!(
            short.validate(g.n()),
            Err(SimError::DimensionMismatch {
                expected: 2,
                got: 1
            })
        );
        assert!(SimConfig::saturated().validate(g.n()).is_ok());
    }

    #[test]
    fn zero_offered_load_stays_silent() {
        let g = four_ring();
        let cfg = SimConfig::for_load(OfferedLoadVector::zeros(4)).with_duration(1e4);
        let r = simulate(&g, &cfg).unwrap();
        assert_eq!(r.th_hat.as_slice(), &[0.0; 4]);
        assert_eq!(r.events_processed, 0);
        for qs in &r.queue_stats {
            assert_eq!(qs.mean_queue, 0.0);
            assert!((qs.fraction_empty - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_active_set_is_all_zeros() {
        let g = four_ring();
        let cfg = SimConfig::saturated().with_duration(1e3);
        let r = simulate_saturated(&g, SubnetworkMask::EMPTY, &cfg).unwrap();
        assert_eq!(r.th_hat.as_slice(), &[0.0; 4]);
        assert_eq!(r.events_processed, 0);
    }

    #[test]
    fn single_link_saturated_matches_closed_form() {
        let cfg = SimConfig::saturated().with_duration(3e5).with_seed(7);
        let g = single();
        let r = simulate_saturated(&g, g.full_mask(), &cfg).unwrap();
        let expected = RHO / (1.0 + RHO);
        assert!(
            (r.th_hat[0] - expected).abs() < 0.01,
            "got {}, expected {expected}",
            r.th_hat[0]
        );
    }

    #[test]
    fn sensing_pair_saturated_matches_closed_form() {
        let cfg = SimConfig::saturated().with_duration(3e5).with_seed(11);
        let g = pair();
        let r = simulate_saturated(&g, g.full_mask(), &cfg).unwrap();
        let expected = RHO / (1.0 + 2.0 * RHO);
        for i in 0..2 {
            assert!(
                (r.th_hat[i] - expected).abs() < 0.01,
                "link {i}: got {}, expected {expected}",
                r.th_hat[i]
            );
        }
    }

    #[test]
    fn chain_saturated_matches_product_form() {
        let g = chain3();
        let cfg = SimConfig::saturated().with_duration(3e5).with_seed(3);
        let r = simulate_saturated(&g, g.full_mask(), &cfg).unwrap();
        let analytic = saturated_throughputs(&g, g.full_mask());
        for i in 0..3 {
            assert!(
                (r.th_hat[i] - analytic[i]).abs() < 0.012,
                "link {i}: got {}, expected {}",
                r.th_hat[i],
                analytic[i]
            );
        }
    }

    #[test]
    fn ring_saturated_matches_product_form() {
        let g = four_ring();
        let cfg = SimConfig::saturated().with_duration(3e5).with_seed(5);
        let r = simulate_saturated(&g, g.full_mask(), &cfg).unwrap();
        for i in 0..4 {
            assert!(
                (r.th_hat[i] - 0.42660).abs() < 0.012,
                "link {i}: got {}",
                r.th_hat[i]
            );
        }
    }

    #[test]
    fn restricted_active_set_runs_only_those_links() {
        let g = four_ring();
        let cfg = SimConfig::saturated().with_duration(2e5).with_seed(13);
        // Links 0 and 1 do not sense each other: both should saturate alone.
        let active = SubnetworkMask::from_bits(0b0011);
        let r = simulate_saturated(&g, active, &cfg).unwrap();
        let expected = RHO / (1.0 + RHO);
        assert!((r.th_hat[0] - expected).abs() < 0.01);
        assert!((r.th_hat[1] - expected).abs() < 0.01);
        assert_eq!(r.th_hat[2], 0.0);
        assert_eq!(r.th_hat[3], 0.0);
    }

    #[test]
    fn stable_queue_carries_its_offered_load() {
        let g = single();
        let f = OfferedLoadVector::new(vec![0.5]).unwrap();
        let cfg = SimConfig::for_load(f).with_duration(3e5).with_seed(17);
        let r = simulate(&g, &cfg).unwrap();
        assert!(
            (r.th_hat[0] - 0.5).abs() < 0.01,
            "stable link should carry what arrives, got {}",
            r.th_hat[0]
        );
        assert!(r.queue_stats[0].fraction_empty > 0.05);
        assert!(r.saturated_links().is_empty());
    }

    #[test]
    fn overloaded_link_is_flagged_and_capped() {
        let g = single();
        // 0.95 offered against a 0.843 ceiling: the queue never drains.
        let f = OfferedLoadVector::new(vec![0.95]).unwrap();
        let cfg = SimConfig::for_load(f).with_duration(3e5).with_seed(19);
        let r = simulate(&g, &cfg).unwrap();
        let ceiling = RHO / (1.0 + RHO);
        assert!((r.th_hat[0] - ceiling).abs() < 0.01);
        assert!(r.th_hat[0] < 0.95 - 0.05);
        assert_eq!(r.saturated_links(), vec![0]);
        assert!(r.queue_stats[0].mean_queue > 100.0, "queue should blow up");
    }

    #[test]
    fn ring_under_optimal_load_tracks_it() {
        let g = four_ring();
        let f = OfferedLoadVector::new(vec![0.4261, 0.4261, 0.4271, 0.4271]).unwrap();
        let cfg = SimConfig::for_load(f.clone())
            .with_duration(3e5)
            .with_seed(23);
        let r = simulate(&g, &cfg).unwrap();
        for i in 0..4 {
            assert!(
                (r.th_hat[i] - f.as_slice()[i]).abs() < 0.015,
                "link {i}: got {}, offered {}",
                r.th_hat[i],
                f.as_slice()[i]
            );
        }
    }

    #[test]
    fn seed_determinism_and_seed_sensitivity() {
        let g = four_ring();
        let f = OfferedLoadVector::new(vec![0.3, 0.3, 0.3, 0.3]).unwrap();
        let cfg = SimConfig::for_load(f)
            .with_duration(1e4)
            .with_seed(42)
            .with_trace(true);
        let a = simulate(&g, &cfg).unwrap();
        let b = simulate(&g, &cfg).unwrap();
        assert_eq!(a, b, "same seed must reproduce bit-identically");

        let c = simulate(&g, &cfg.clone().with_seed(43)).unwrap();
        assert_ne!(a.th_hat, c.th_hat, "different seeds should differ");
    }

    #[test]
    fn traces_pass_the_exclusion_audit() {
        let g = four_ring();
        let cfg = SimConfig::saturated()
            .with_duration(1e4)
            .with_seed(29)
            .with_trace(true);
        let r = simulate_saturated(&g, g.full_mask(), &cfg).unwrap();
        let trace = r.trace.as_ref().expect("trace was requested");
        assert!(!trace.is_empty());
        audit_mutual_exclusion(&g, trace).unwrap();

        let f = OfferedLoadVector::new(vec![0.4, 0.4, 0.4, 0.4]).unwrap();
        let cfg = SimConfig::for_load(f)
            .with_duration(1e4)
            .with_seed(31)
            .with_trace(true);
        let r = simulate(&g, &cfg).unwrap();
        audit_mutual_exclusion(&g, r.trace.as_ref().unwrap()).unwrap();
    }

    #[test]
    fn audit_rejects_overlapping_neighbors() {
        let g = pair();
        let bad = vec![
            TraceEvent {
                time: 1.0,
                link: 0,
                kind: TraceKind::TxStart,
            },
            TraceEvent {
                time: 1.5,
                link: 1,
                kind: TraceKind::TxStart,
            },
        ];
        let err = audit_mutual_exclusion(&g, &bad).unwrap_err();
        assert_eq!(err.link, 1);
        assert_eq!(err.neighbor, 0);
    }

    #[test]
    fn no_trace_unless_requested() {
        let g = single();
        let cfg = SimConfig::saturated().with_duration(1e3);
        let r = simulate_saturated(&g, g.full_mask(), &cfg).unwrap();
        assert!(r.trace.is_none());
    }

    #[test]
    fn degenerate_duration_is_well_formed() {
        let g = four_ring();
        let f = OfferedLoadVector::new(vec![0.4, 0.4, 0.4, 0.4]).unwrap();
        let cfg = SimConfig::for_load(f).with_duration(0.001);
        let r = simulate(&g, &cfg).unwrap();
        for i in 0..4 {
            assert!((0.0..=1.0).contains(&r.th_hat[i]));
        }
        assert!(r.measured_time > 0.0);
    }

    #[test]
    fn pooling_reports_means_and_standard_errors() {
        let g = pair();
        let cfg = SimConfig::saturated().with_duration(5e4);
        let results: Vec<SimResult> = (0..6)
            .map(|s| simulate_saturated(&g, g.full_mask(), &cfg.clone().with_seed(s)).unwrap())
            .collect();
        let pooled = pool(&results);
        assert_eq!(pooled.n_seeds, 6);
        let expected = RHO / (1.0 + 2.0 * RHO);
        for i in 0..2 {
            assert!((pooled.mean[i] - expected).abs() < 0.01);
            assert!(pooled.std_error[i] > 0.0);
            assert!(pooled.std_error[i] < 0.01);
        }
        assert!(pooled.aggregate_std_error > 0.0);
    }

    #[test]
    fn simulate_many_matches_individual_runs() {
        let g = chain3();
        let f = OfferedLoadVector::new(vec![0.3, 0.1, 0.3]).unwrap();
        let cfg = SimConfig::for_load(f).with_duration(2e4);
        let seeds = [1, 2, 3, 4];
        let many = simulate_many(&g, &cfg, &seeds).unwrap();
        assert_eq!(many.len(), 4);
        for (r, &s) in many.iter().zip(&seeds) {
            let lone = simulate(&g, &cfg.clone().with_seed(s)).unwrap();
            assert_eq!(*r, lone, "parallel runs must equal sequential ones");
        }
    }

    #[test]
    fn longer_runs_reduce_cross_seed_scatter() {
        let g = pair();
        let seeds: Vec<u64> = (100..108).collect();
        let spread = |duration: f64| {
            let cfg = SimConfig::saturated().with_duration(duration);
            let results: Vec<SimResult> = seeds
                .iter()
                .map(|&s| simulate_saturated(&g, g.full_mask(), &cfg.clone().with_seed(s)).unwrap())
                .collect();
            pool(&results).std_error[0]
        };
        assert!(
            spread(2e5) < spread(2e3),
            "a 100x longer run should scatter less across seeds"
        );
    }

    #[test]
    fn trace_csv_uses_one_based_links() {
        let trace = vec![
            TraceEvent {
                time: 0.25,
                link: 0,
                kind: TraceKind::TxStart,
            },
            TraceEvent {
                time: 1.5,
                link: 0,
                kind: TraceKind::TxEnd,
            },
        ];
        let mut out = Vec::new();
        write_trace_csv(&mut out, &trace).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "time,link,event\n0.25,1,tx_start\n1.5,1,tx_end\n");
    }

    // StateMask is used by sibling test modules through the prelude; this
    // keeps the import exercised here as well.
    #[test]
    fn full_mask_covers_all_links() {
        let g = four_ring();
        assert_eq!(g.full_mask().bits(), StateMask::all(4).bits());
    }
}
