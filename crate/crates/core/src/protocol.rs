//! Sender/receiver protocol.
//!
//! The sender encodes one bit per symbol by switching the idler detectors of
//! every telegraph (`on` = 1, `off` = 0). The receiver pools `M` screen hits
//! and runs a likelihood-ratio test between the coherent and incoherent
//! screen patterns. `N` telegraphs with random emission offsets in `[0, T)`
//! are merged into one stream of pairs, so a symbol needs roughly `MT/N`
//! time units.
//!
//! Two model modes are supported. [`ModelMode::NaiveCollapse`] gives the
//! screen the coherent pattern whenever the detectors are off.
//! [`ModelMode::UnitaryQM`] gives it the reduced state of the entangled pair,
//! which does not depend on the detector setting.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::{
    build_joint_state, coherent_distribution, incoherent_distribution, which_path_basis,
    DeviceConfig, Pipe, ScreenDistribution,
};
use crate::error::{Error, Result};
use crate::quantum::{born_collapse, born_probabilities, Subsystem};
use crate::rng::SeedStream;
use crate::sampling::DiscreteSampler;

/// Floor applied to probabilities before taking log-ratios.
pub const PROBABILITY_FLOOR: f64 = 1e-300;

/// Monte Carlo trials per hypothesis for each sample-size probe.
pub const PLANNER_TRIALS: usize = 10_000;

/// Below this total variation the hypotheses are treated as identical.
pub const INDISTINGUISHABLE_TV: f64 = 1e-6;

/// Symbols simulated by [`throughput_check`].
pub const THROUGHPUT_SYMBOLS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorConfig {
    On,
    Off,
}

impl DetectorConfig {
    /// Detectors on encode 1.
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            DetectorConfig::On
        } else {
            DetectorConfig::Off
        }
    }

    pub fn bit(self) -> bool {
        self == DetectorConfig::On
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelMode {
    NaiveCollapse,
    UnitaryQM,
}

impl std::str::FromStr for ModelMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "NaiveCollapse" => Ok(ModelMode::NaiveCollapse),
            "UnitaryQM" => Ok(ModelMode::UnitaryQM),
            _ => Err(Error::param("mode", "one of NaiveCollapse, UnitaryQM", s)),
        }
    }
}

impl std::fmt::Display for ModelMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelMode::NaiveCollapse => "NaiveCollapse",
            ModelMode::UnitaryQM => "UnitaryQM",
        })
    }
}

/// `M` pairs per symbol, pair period `T`, `N` telegraphs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionPlan {
    #[serde(rename = "M")]
    pairs_per_symbol: usize,
    #[serde(rename = "T")]
    period: f64,
    #[serde(rename = "N")]
    telegraphs: usize,
}

impl TransmissionPlan {
    pub fn new(pairs_per_symbol: usize, period: f64, telegraphs: usize) -> Result<Self> {
        if pairs_per_symbol < 1 {
            return Err(Error::param("M", "M >= 1", pairs_per_symbol));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::param("T", "T > 0", period));
        }
        if telegraphs < 1 {
            return Err(Error::param("N", "N >= 1", telegraphs));
        }
        Ok(TransmissionPlan {
            pairs_per_symbol,
            period,
            telegraphs,
        })
    }

    pub fn pairs_per_symbol(&self) -> usize {
        self.pairs_per_symbol
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn telegraphs(&self) -> usize {
        self.telegraphs
    }

    /// Ideal symbol time `MT/N`.
    pub fn ideal_symbol_time(&self) -> f64 {
        self.pairs_per_symbol as f64 * self.period / self.telegraphs as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HitRecord {
    pub telegraph_id: usize,
    pub time: f64,
    pub x: f64,
    /// Pipe reported by the idler detectors; `None` when they are off.
    pub idler_outcome: Option<Pipe>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Interference,
    NoInterference,
}

impl Verdict {
    /// Interference decodes to 0, its absence to 1.
    pub fn bit(self) -> bool {
        self == Verdict::NoInterference
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionResult {
    pub log_lr: f64,
    pub decided: Verdict,
    /// `|mean(exp(2i kappa x))|` over the hits; 0 for no hits.
    pub fringe_statistic: f64,
}

/// Screen statistics seen by the receiver for a detector setting.
pub fn screen_marginal(
    cfg: &DeviceConfig,
    det: DetectorConfig,
    mode: ModelMode,
) -> Result<ScreenDistribution> {
    match (mode, det) {
        (ModelMode::NaiveCollapse, DetectorConfig::Off) => coherent_distribution(cfg),
        (ModelMode::NaiveCollapse, DetectorConfig::On) => incoherent_distribution(cfg),
        // The idler is never touched on the receiver's side: the screen sees
        // the reduced state whatever the sender does.
        (ModelMode::UnitaryQM, _) => {
            let reduced =
                build_joint_state(cfg)?.reduced_density(cfg.joint_dims(), Subsystem::Second)?;
            ScreenDistribution::from_weights(reduced.probabilities()?)
        }
    }
}

/// `m` independent bin indices drawn from `dist`.
pub fn sample_bins<R: Rng + ?Sized>(
    dist: &ScreenDistribution,
    m: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let sampler = DiscreteSampler::new(dist.probabilities())?;
    Ok((0..m).map(|_| sampler.sample(rng)).collect())
}

/// `m` independent screen positions drawn from `dist`, reported at bin centres.
pub fn sample_hits<R: Rng + ?Sized>(
    cfg: &DeviceConfig,
    dist: &ScreenDistribution,
    m: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if dist.len() != cfg.bins {
        return Err(Error::DimensionMismatch {
            expected: cfg.bins,
            actual: dist.len(),
        });
    }
    Ok(sample_bins(dist, m, rng)?
        .into_iter()
        .map(|j| cfg.bin_center(j))
        .collect())
}

/// Likelihood-ratio receiver: coherent (interference) versus incoherent.
#[derive(Debug, Clone)]
pub struct Receiver {
    cfg: DeviceConfig,
    log_ratio: Vec<f64>,
    phasor: Vec<Complex64>,
}

impl Receiver {
    pub fn new(cfg: &DeviceConfig) -> Result<Self> {
        let pc = coherent_distribution(cfg)?;
        let pi = incoherent_distribution(cfg)?;
        let log_ratio = pc
            .probabilities()
            .iter()
            .zip(pi.probabilities())
            .map(|(c, i)| c.max(PROBABILITY_FLOOR).ln() - i.max(PROBABILITY_FLOOR).ln())
            .collect();
        let phasor = cfg
            .bin_centers()
            .into_iter()
            .map(|x| Complex64::from_polar(1.0, 2.0 * cfg.kappa * x))
            .collect();
        Ok(Receiver {
            cfg: *cfg,
            log_ratio,
            phasor,
        })
    }

    pub fn config(&self) -> &DeviceConfig {
        &self.cfg
    }

    fn bins_of(&self, hits: &[f64]) -> Result<Vec<usize>> {
        hits.iter()
            .map(|&x| {
                self.cfg
                    .bin_index(x)
                    .ok_or_else(|| Error::param("hit", "inside the screen grid", x))
            })
            .collect()
    }

    pub fn log_likelihood_ratio_bins(&self, bins: &[usize]) -> f64 {
        bins.iter().map(|&j| self.log_ratio[j]).sum()
    }

    pub fn decide_bins(&self, bins: &[usize]) -> DecisionResult {
        let log_lr = self.log_likelihood_ratio_bins(bins);
        let fringe_statistic = if bins.is_empty() {
            0.0
        } else {
            (bins.iter().map(|&j| self.phasor[j]).sum::<Complex64>() / bins.len() as f64).norm()
        };
        DecisionResult {
            log_lr,
            decided: if log_lr > 0.0 {
                Verdict::Interference
            } else {
                Verdict::NoInterference
            },
            fringe_statistic,
        }
    }

    pub fn log_likelihood_ratio(&self, hits: &[f64]) -> Result<f64> {
        Ok(self.log_likelihood_ratio_bins(&self.bins_of(hits)?))
    }

    pub fn decide(&self, hits: &[f64]) -> Result<DecisionResult> {
        Ok(self.decide_bins(&self.bins_of(hits)?))
    }
}

/// `sum_j ln(p_c(x_j) / p_i(x_j))` over the hits.
pub fn log_likelihood_ratio(hits: &[f64], cfg: &DeviceConfig) -> Result<f64> {
    Receiver::new(cfg)?.log_likelihood_ratio(hits)
}

pub fn decide_bit(hits: &[f64], cfg: &DeviceConfig) -> Result<DecisionResult> {
    Receiver::new(cfg)?.decide(hits)
}

/// Monte Carlo error rates of the receiver at one sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    #[serde(rename = "M")]
    pub sample_size: usize,
    /// Fraction of coherent trials decided as no interference.
    pub miss_rate: f64,
    /// Fraction of incoherent trials decided as interference.
    pub false_alarm_rate: f64,
}

impl Probe {
    pub fn max_error(&self) -> f64 {
        self.miss_rate.max(self.false_alarm_rate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSizePlan {
    pub alpha: f64,
    #[serde(rename = "M_star")]
    pub sample_size: usize,
    pub trials: usize,
    pub probes: Vec<Probe>,
}

/// Doubling-then-bisection search for the smallest sample size whose
/// Monte Carlo error rates are both at most `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleSizePlanner {
    pub trials: usize,
    pub max_sample_size: usize,
}

impl Default for SampleSizePlanner {
    fn default() -> Self {
        SampleSizePlanner {
            trials: PLANNER_TRIALS,
            max_sample_size: 1 << 14,
        }
    }
}

impl SampleSizePlanner {
    pub fn plan(
        &self,
        cfg: &DeviceConfig,
        alpha: f64,
        stream: SeedStream,
    ) -> Result<SampleSizePlan> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::param("alpha", "0 < alpha < 1", alpha));
        }
        let mut plan = SampleSizePlan {
            alpha,
            sample_size: 0,
            trials: self.trials,
            probes: Vec::new(),
        };
        if alpha >= 0.5 {
            return Ok(plan);
        }
        let pc = coherent_distribution(cfg)?;
        let pi = incoherent_distribution(cfg)?;
        let tv = pc.total_variation(&pi)?;
        if tv < INDISTINGUISHABLE_TV {
            return Err(Error::Indistinguishable(tv));
        }
        let receiver = Receiver::new(cfg)?;
        let coherent = DiscreteSampler::new(pc.probabilities())?;
        let incoherent = DiscreteSampler::new(pi.probabilities())?;
        let stream = stream.child("sample-size");
        let mut probe = |m: usize| {
            let p = self.probe(&receiver, &coherent, &incoherent, m, stream.index(m as u64));
            plan.probes.push(p);
            p.max_error() <= alpha
        };

        let mut hi = 1;
        while !probe(hi) {
            if hi >= self.max_sample_size {
                return Err(Error::SampleSizeExceeded(self.max_sample_size));
            }
            hi = (hi * 2).min(self.max_sample_size);
        }
        let mut lo = hi / 2;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if probe(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        plan.sample_size = hi;
        Ok(plan)
    }

    fn probe(
        &self,
        receiver: &Receiver,
        coherent: &DiscreteSampler,
        incoherent: &DiscreteSampler,
        m: usize,
        stream: SeedStream,
    ) -> Probe {
        let count = |sampler: &DiscreteSampler, name: &str, err: Verdict| -> usize {
            let s = stream.child(name);
            (0..self.trials)
                .into_par_iter()
                .filter(|&t| {
                    let mut rng = s.index(t as u64).rng();
                    let llr: f64 = (0..m)
                        .map(|_| receiver.log_ratio[sampler.sample(&mut rng)])
                        .sum();
                    let decided = if llr > 0.0 {
                        Verdict::Interference
                    } else {
                        Verdict::NoInterference
                    };
                    decided == err
                })
                .count()
        };
        let n = self.trials as f64;
        Probe {
            sample_size: m,
            miss_rate: count(coherent, "coherent", Verdict::NoInterference) as f64 / n,
            false_alarm_rate: count(incoherent, "incoherent", Verdict::Interference) as f64 / n,
        }
    }
}

/// Smallest `M` reaching error rate `alpha` on both hypotheses, with the
/// default planner settings.
pub fn required_sample_size(
    cfg: &DeviceConfig,
    alpha: f64,
    stream: SeedStream,
) -> Result<SampleSizePlan> {
    SampleSizePlanner::default().plan(cfg, alpha, stream)
}

/// Emission offsets of an ensemble of telegraphs; telegraph `n` emits at
/// `offsets[n] + j * period`, `j = 0, 1, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub period: f64,
    pub offsets: Vec<f64>,
}

impl Schedule {
    pub fn emission_time(&self, telegraph: usize, j: u64) -> f64 {
        self.offsets[telegraph] + j as f64 * self.period
    }

    /// Number of emissions with time in `[start, end)`.
    pub fn count_in(&self, start: f64, end: f64) -> usize {
        self.offsets
            .iter()
            .map(|&phi| {
                let first = ((start - phi) / self.period).ceil().max(0.0);
                let last = ((end - phi) / self.period).ceil().max(0.0);
                (last - first).max(0.0) as usize
            })
            .sum()
    }

    /// All emissions of the ensemble in time order.
    pub fn emissions(&self) -> Emissions<'_> {
        let heap = self
            .offsets
            .iter()
            .enumerate()
            .map(|(n, &t)| Pending {
                time: t,
                telegraph: n,
                j: 0,
            })
            .collect();
        Emissions {
            schedule: self,
            heap,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Pending {
    time: f64,
    telegraph: usize,
    j: u64,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    // reversed: BinaryHeap is a max-heap and we want the earliest emission
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.telegraph.cmp(&self.telegraph))
    }
}

/// Iterator over `(time, telegraph)` emissions, earliest first.
pub struct Emissions<'a> {
    schedule: &'a Schedule,
    heap: BinaryHeap<Pending>,
}

impl Iterator for Emissions<'_> {
    type Item = (f64, usize);

    fn next(&mut self) -> Option<Self::Item> {
        let next = self.heap.pop()?;
        let j = next.j + 1;
        self.heap.push(Pending {
            time: self.schedule.emission_time(next.telegraph, j),
            telegraph: next.telegraph,
            j,
        });
        Some((next.time, next.telegraph))
    }
}

/// Draws `n` offsets uniformly in `[0, period)`.
pub fn ensemble_schedule<R: Rng + ?Sized>(n: usize, period: f64, rng: &mut R) -> Result<Schedule> {
    if n < 1 {
        return Err(Error::param("N", "N >= 1", n));
    }
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::param("T", "T > 0", period));
    }
    let offsets = (0..n).map(|_| rng.random::<f64>() * period).collect();
    Ok(Schedule { period, offsets })
}

/// Emissions assigned to one symbol.
#[derive(Debug, Clone, PartialEq)]
struct SymbolSlot {
    start: f64,
    end: f64,
    emissions: Vec<(f64, usize)>,
}

fn symbol_timeline(schedule: &Schedule, symbols: usize, per_symbol: usize) -> Vec<SymbolSlot> {
    let mut stream = schedule.emissions();
    let mut start = 0.0;
    (0..symbols)
        .map(|_| {
            let emissions: Vec<(f64, usize)> = stream.by_ref().take(per_symbol).collect();
            let end = emissions.last().map_or(start, |e| e.0);
            let slot = SymbolSlot {
                start,
                end,
                emissions,
            };
            start = end;
            slot
        })
        .collect()
}

/// Per-setting hit generator. With detectors on, the idler is measured in
/// the which-path basis first and the screen position is drawn from the
/// collapsed state.
struct HitModel {
    off: DiscreteSampler,
    pipe: DiscreteSampler,
    given_pipe: [DiscreteSampler; 2],
}

impl HitModel {
    fn new(cfg: &DeviceConfig, mode: ModelMode) -> Result<Self> {
        let off =
            DiscreteSampler::new(screen_marginal(cfg, DetectorConfig::Off, mode)?.probabilities())?;
        let joint = build_joint_state(cfg)?;
        let basis = which_path_basis(cfg);
        let pipe = DiscreteSampler::new(&born_probabilities(&joint, &basis)?)?;
        let conditional = |k: usize| -> Result<DiscreteSampler> {
            let (_, collapsed) = born_collapse(&joint, &basis, k)?;
            let block = &collapsed.amplitudes()[k * cfg.bins..(k + 1) * cfg.bins];
            DiscreteSampler::new(&block.iter().map(|a| a.norm_sqr()).collect::<Vec<_>>())
        };
        Ok(HitModel {
            off,
            pipe,
            given_pipe: [conditional(0)?, conditional(1)?],
        })
    }

    fn draw<R: Rng + ?Sized>(&self, det: DetectorConfig, rng: &mut R) -> (usize, Option<Pipe>) {
        match det {
            DetectorConfig::Off => (self.off.sample(rng), None),
            DetectorConfig::On => {
                let k = self.pipe.sample(rng);
                let pipe = if k == 0 { Pipe::One } else { Pipe::Two };
                (self.given_pipe[k].sample(rng), Some(pipe))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolOutcome {
    pub index: usize,
    pub sent: bool,
    pub received: bool,
    /// Time at which collection for this symbol began.
    pub start: f64,
    /// Time needed to pool the symbol's hits.
    pub elapsed: f64,
    pub decision: DecisionResult,
    pub hits: Vec<HitRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transmission {
    pub plan: TransmissionPlan,
    pub mode: ModelMode,
    pub symbols: Vec<SymbolOutcome>,
}

impl Transmission {
    pub fn received_bits(&self) -> Vec<bool> {
        self.symbols.iter().map(|s| s.received).collect()
    }

    pub fn elapsed_times(&self) -> Vec<f64> {
        self.symbols.iter().map(|s| s.elapsed).collect()
    }

    /// Fraction of symbols decoded wrongly; 0 for an empty message.
    pub fn error_rate(&self) -> f64 {
        if self.symbols.is_empty() {
            return 0.0;
        }
        self.symbols.iter().filter(|s| s.sent != s.received).count() as f64
            / self.symbols.len() as f64
    }

    pub fn mean_symbol_time(&self) -> f64 {
        if self.symbols.is_empty() {
            return 0.0;
        }
        self.elapsed_times().iter().sum::<f64>() / self.symbols.len() as f64
    }

    pub fn hits(&self) -> impl Iterator<Item = &HitRecord> {
        self.symbols.iter().flat_map(|s| s.hits.iter())
    }

    pub fn transcript(&self, seed: u64) -> Transcript {
        Transcript {
            plan: self.plan,
            mode: self.mode,
            seed,
            symbols: self
                .symbols
                .iter()
                .map(|s| TranscriptSymbol {
                    index: s.index,
                    sent: u8::from(s.sent),
                    received: u8::from(s.received),
                    hit_count: s.hits.len(),
                    log_lr: s.decision.log_lr,
                    decided: s.decision.decided,
                    fringe_statistic: s.decision.fringe_statistic,
                    start: s.start,
                    elapsed: s.elapsed,
                })
                .collect(),
            error_rate: self.error_rate(),
            mean_symbol_time: self.mean_symbol_time(),
        }
    }
}

/// Serializable summary of a [`Transmission`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub plan: TransmissionPlan,
    pub mode: ModelMode,
    pub seed: u64,
    pub symbols: Vec<TranscriptSymbol>,
    pub error_rate: f64,
    pub mean_symbol_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptSymbol {
    pub index: usize,
    pub sent: u8,
    pub received: u8,
    pub hit_count: usize,
    pub log_lr: f64,
    pub decided: Verdict,
    pub fringe_statistic: f64,
    pub start: f64,
    pub elapsed: f64,
}

/// Hit dump with columns `telegraph_id,time,x`.
pub fn write_hits_csv<'a, W: Write>(
    hits: impl IntoIterator<Item = &'a HitRecord>,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let export = |e: csv::Error| Error::Export(e.to_string());
    w.write_record(["telegraph_id", "time", "x"])
        .map_err(export)?;
    for h in hits {
        w.write_record(&[
            h.telegraph_id.to_string(),
            h.time.to_string(),
            h.x.to_string(),
        ])
        .map_err(export)?;
    }
    w.flush().map_err(|e| Error::Export(e.to_string()))
}

/// Sends `bits` through the staggered ensemble.
///
/// Randomness: offsets come from `stream.child("schedule")`, the hits of
/// symbol `s` from `stream.child("hits").index(s)`.
pub fn transmit_message(
    bits: &[bool],
    plan: &TransmissionPlan,
    mode: ModelMode,
    cfg: &DeviceConfig,
    stream: SeedStream,
) -> Result<Transmission> {
    let mut out = Transmission {
        plan: *plan,
        mode,
        symbols: Vec::new(),
    };
    if bits.is_empty() {
        return Ok(out);
    }
    let schedule = ensemble_schedule(
        plan.telegraphs,
        plan.period,
        &mut stream.child("schedule").rng(),
    )?;
    let slots = symbol_timeline(&schedule, bits.len(), plan.pairs_per_symbol);
    let model = HitModel::new(cfg, mode)?;
    let receiver = Receiver::new(cfg)?;
    let hits_stream = stream.child("hits");

    out.symbols = slots
        .into_par_iter()
        .zip(bits.par_iter())
        .enumerate()
        .map(|(s, (slot, &bit))| {
            let det = DetectorConfig::from_bit(bit);
            let mut rng = hits_stream.index(s as u64).rng();
            let mut bins = Vec::with_capacity(slot.emissions.len());
            let hits = slot
                .emissions
                .iter()
                .map(|&(time, telegraph_id)| {
                    let (bin, idler_outcome) = model.draw(det, &mut rng);
                    bins.push(bin);
                    HitRecord {
                        telegraph_id,
                        time,
                        x: cfg.bin_center(bin),
                        idler_outcome,
                    }
                })
                .collect();
            let decision = receiver.decide_bins(&bins);
            SymbolOutcome {
                index: s,
                sent: bit,
                received: decision.decided.bit(),
                start: slot.start,
                elapsed: slot.end - slot.start,
                decision,
                hits,
            }
        })
        .collect();
    Ok(out)
}

/// Uniform random message bits from `stream.child("message")`.
pub fn random_bits(k: usize, stream: SeedStream) -> Vec<bool> {
    let mut rng = stream.child("message").rng();
    (0..k).map(|_| rng.random::<bool>()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub plan: TransmissionPlan,
    pub symbols: usize,
    pub mean_symbol_time: f64,
    /// `MT/N`.
    pub ideal_symbol_time: f64,
}

impl ThroughputReport {
    pub fn relative_error(&self) -> f64 {
        (self.mean_symbol_time - self.ideal_symbol_time).abs() / self.ideal_symbol_time
    }
}

/// Mean time to pool `M` hits over [`THROUGHPUT_SYMBOLS`] consecutive symbols.
pub fn throughput_check(plan: &TransmissionPlan, stream: SeedStream) -> Result<ThroughputReport> {
    let schedule = ensemble_schedule(
        plan.telegraphs,
        plan.period,
        &mut stream.child("schedule").rng(),
    )?;
    let slots = symbol_timeline(&schedule, THROUGHPUT_SYMBOLS, plan.pairs_per_symbol);
    let mean = slots.iter().map(|s| s.end - s.start).sum::<f64>() / slots.len() as f64;
    Ok(ThroughputReport {
        plan: *plan,
        symbols: slots.len(),
        mean_symbol_time: mean,
        ideal_symbol_time: plan.ideal_symbol_time(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::DensityMatrix;

    fn aligned() -> DeviceConfig {
        DeviceConfig {
            bins: 257,
            x_max: 8.03125,
            ..DeviceConfig::default()
        }
    }

    #[test]
    fn plan_validation() {
        assert!(TransmissionPlan::new(1, 1.0, 1).is_ok());
        assert!(TransmissionPlan::new(0, 1.0, 1).is_err());
        assert!(TransmissionPlan::new(1, 0.0, 1).is_err());
        match TransmissionPlan::new(1, 1.0, 0) {
            Err(Error::InvalidParameter { field, .. }) => assert_eq!(field, "N"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn marginals_by_mode() {
        let cfg = DeviceConfig::default();
        let pc = coherent_distribution(&cfg).unwrap();
        let pi = incoherent_distribution(&cfg).unwrap();
        assert_eq!(
            screen_marginal(&cfg, DetectorConfig::Off, ModelMode::NaiveCollapse).unwrap(),
            pc
        );
        assert_eq!(
            screen_marginal(&cfg, DetectorConfig::On, ModelMode::NaiveCollapse).unwrap(),
            pi
        );

        let on = screen_marginal(&cfg, DetectorConfig::On, ModelMode::UnitaryQM).unwrap();
        let off = screen_marginal(&cfg, DetectorConfig::Off, ModelMode::UnitaryQM).unwrap();
        assert_eq!(on, off);
        // cross-check against the partial trace of the full joint density matrix
        let rho = DensityMatrix::from_state(&build_joint_state(&cfg).unwrap()).unwrap();
        let diag = rho
            .partial_trace(cfg.joint_dims(), Subsystem::Second)
            .unwrap()
            .probabilities()
            .unwrap();
        for (a, b) in on.probabilities().iter().zip(&diag) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(on.max_abs_diff(&pi).unwrap() < 1e-12);
    }

    #[test]
    fn sampling_examples() {
        let cfg = DeviceConfig {
            bins: 4,
            ..Default::default()
        };
        let mut rng = SeedStream::new(1).rng();
        let point = ScreenDistribution::new(vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        assert!(sample_hits(&cfg, &point, 0, &mut rng).unwrap().is_empty());
        let hits = sample_hits(&cfg, &point, 100, &mut rng).unwrap();
        assert!(hits.iter().all(|&x| x == cfg.bin_center(2)));
        let wrong = ScreenDistribution::new(vec![0.5, 0.5]).unwrap();
        assert!(sample_hits(&cfg, &wrong, 1, &mut rng).is_err());
    }

    #[test]
    fn sampled_frequencies_within_multinomial_bounds() {
        let cfg = DeviceConfig::default();
        let pi = incoherent_distribution(&cfg).unwrap();
        let n = 100_000;
        let bins = sample_bins(&pi, n, &mut SeedStream::new(11).child("freq").rng()).unwrap();
        let mut counts = vec![0usize; cfg.bins];
        for b in bins {
            counts[b] += 1;
        }
        for (j, (&c, &p)) in counts.iter().zip(pi.probabilities()).enumerate() {
            let mean = n as f64 * p;
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            assert!(
                (c as f64 - mean).abs() <= 5.0 * sigma + 1e-9,
                "bin {j}: {c} vs {mean} ± {sigma}"
            );
        }
    }

    #[test]
    fn llr_examples() {
        let cfg = DeviceConfig::default();
        assert_eq!(log_likelihood_ratio(&[], &cfg).unwrap(), 0.0);
        let node = aligned();
        let llr = log_likelihood_ratio(&[0.5], &node).unwrap();
        assert!(llr <= -600.0, "{llr}");
        assert!(log_likelihood_ratio(&[100.0], &cfg).is_err());
    }

    #[test]
    fn llr_positive_on_coherent_data() {
        let cfg = DeviceConfig::default();
        let receiver = Receiver::new(&cfg).unwrap();
        let pc = coherent_distribution(&cfg).unwrap();
        let s = SeedStream::new(99).child("llr");
        let positive = (0..1000)
            .filter(|&t| {
                let bins = sample_bins(&pc, 1000, &mut s.index(t).rng()).unwrap();
                receiver.log_likelihood_ratio_bins(&bins) > 0.0
            })
            .count();
        assert!(positive >= 990, "{positive}");
    }

    #[test]
    fn fringe_statistic_examples() {
        let cfg = DeviceConfig::default();
        let s = SeedStream::new(5);
        let pc = coherent_distribution(&cfg).unwrap();
        let pi = incoherent_distribution(&cfg).unwrap();
        let hc = sample_hits(&cfg, &pc, 10_000, &mut s.child("c").rng()).unwrap();
        let hi = sample_hits(&cfg, &pi, 10_000, &mut s.child("i").rng()).unwrap();
        let dc = decide_bit(&hc, &cfg).unwrap();
        let di = decide_bit(&hi, &cfg).unwrap();
        assert!((dc.fringe_statistic - 0.5).abs() <= 0.03, "{dc:?}");
        assert_eq!(dc.decided, Verdict::Interference);
        assert!(di.fringe_statistic <= 0.05, "{di:?}");
        assert_eq!(di.decided, Verdict::NoInterference);
        let single = decide_bit(&[1.234], &cfg).unwrap();
        assert!((single.fringe_statistic - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ties_decide_no_interference() {
        let d = decide_bit(&[], &DeviceConfig::default()).unwrap();
        assert_eq!(d.log_lr, 0.0);
        assert_eq!(d.decided, Verdict::NoInterference);
        assert_eq!(d.fringe_statistic, 0.0);
    }

    #[test]
    fn planner_edge_cases() {
        let cfg = DeviceConfig::default();
        let s = SeedStream::new(1);
        for alpha in [0.5, 0.7] {
            assert_eq!(required_sample_size(&cfg, alpha, s).unwrap().sample_size, 0);
        }
        assert!(required_sample_size(&cfg, 0.0, s).is_err());
        assert!(required_sample_size(&cfg, 1.0, s).is_err());

        // one fringe spans far more than the grid
        let flat = DeviceConfig {
            kappa: 1e-5,
            ..Default::default()
        };
        let tv = coherent_distribution(&flat)
            .unwrap()
            .total_variation(&incoherent_distribution(&flat).unwrap())
            .unwrap();
        assert!(tv < 1e-6, "{tv}");
        assert!(matches!(
            required_sample_size(&flat, 0.01, s),
            Err(Error::Indistinguishable(_))
        ));
    }

    #[test]
    fn planner_cap_is_reported() {
        let planner = SampleSizePlanner {
            trials: 200,
            max_sample_size: 2,
        };
        let r = planner.plan(&DeviceConfig::default(), 1e-3, SeedStream::new(1));
        assert_eq!(r, Err(Error::SampleSizeExceeded(2)));
    }

    #[test]
    fn single_telegraph_schedule() {
        let s = ensemble_schedule(1, 2.5, &mut SeedStream::new(3).rng()).unwrap();
        let times: Vec<f64> = s.emissions().take(50).map(|e| e.0).collect();
        for w in times.windows(2) {
            assert!((w[1] - w[0] - 2.5).abs() < 1e-12);
        }
        assert!(ensemble_schedule(0, 1.0, &mut SeedStream::new(3).rng()).is_err());
        assert!(ensemble_schedule(1, 0.0, &mut SeedStream::new(3).rng()).is_err());
    }

    #[test]
    fn schedule_offsets_and_order() {
        let s = ensemble_schedule(50, 0.7, &mut SeedStream::new(4).rng()).unwrap();
        assert!(s.offsets.iter().all(|&o| (0.0..0.7).contains(&o)));
        let em: Vec<(f64, usize)> = s.emissions().take(500).collect();
        assert!(em.windows(2).all(|w| w[0].0 <= w[1].0));
        // every telegraph appears 10 times in the first 10 periods
        let mut per = [0; 50];
        em.iter().for_each(|e| per[e.1] += 1);
        assert!(per.iter().all(|&c| c == 10));
        assert_eq!(s.count_in(0.0, 7.0), 500);
    }

    #[test]
    fn window_counts_average_to_m() {
        // each telegraph lands floor(L/T) or floor(L/T)+1 emissions in a
        // window of length L; the extra one is Bernoulli(frac(L/T))
        let (m, n, t) = (100usize, 30usize, 1.0);
        let len = m as f64 * t / n as f64;
        let f = (len / t).fract();
        let schedules = 1000;
        let s = SeedStream::new(8).child("window");
        let total: usize = (0..schedules)
            .map(|i| {
                let sch = ensemble_schedule(n, t, &mut s.index(i).rng()).unwrap();
                sch.count_in(5.0, 5.0 + len)
            })
            .sum();
        let mean = total as f64 / schedules as f64;
        let sigma = (n as f64 * f * (1.0 - f) / schedules as f64).sqrt();
        assert!(
            (mean - m as f64).abs() <= 3.0 * sigma,
            "{mean} vs {m} ± {sigma}"
        );
    }

    #[test]
    fn empty_message() {
        let plan = TransmissionPlan::new(10, 1.0, 3).unwrap();
        let t = transmit_message(
            &[],
            &plan,
            ModelMode::NaiveCollapse,
            &DeviceConfig::default(),
            SeedStream::new(1),
        )
        .unwrap();
        assert!(t.symbols.is_empty());
        assert_eq!(t.mean_symbol_time(), 0.0);
    }

    #[test]
    fn transmission_bookkeeping() {
        let plan = TransmissionPlan::new(20, 1.0, 4).unwrap();
        let cfg = DeviceConfig::default();
        let bits = [true, false, true, true, false];
        let t = transmit_message(
            &bits,
            &plan,
            ModelMode::NaiveCollapse,
            &cfg,
            SeedStream::new(2),
        )
        .unwrap();
        assert_eq!(t.symbols.len(), 5);
        let mut prev_end = 0.0;
        for s in &t.symbols {
            assert_eq!(s.hits.len(), 20);
            assert_eq!(s.start, prev_end);
            prev_end = s.start + s.elapsed;
            assert!(s
                .hits
                .iter()
                .all(|h| h.time >= s.start && h.time <= prev_end));
            assert!(s.hits.iter().all(|h| h.idler_outcome.is_some() == s.sent));
            assert!(s
                .hits
                .iter()
                .all(|h| cfg.bin_index(h.x).is_some() && h.time >= 0.0));
        }
        assert_eq!(t.received_bits().len(), 5);
        let tr = t.transcript(2);
        assert_eq!(tr.symbols[0].hit_count, 20);
        let json = serde_json::to_value(&tr).unwrap();
        assert_eq!(json["plan"]["M"], 20);
        assert_eq!(json["mode"], "NaiveCollapse");
        assert!(
            json["symbols"][1]["decided"] == "interference"
                || json["symbols"][1]["decided"] == "no-interference"
        );

        let mut csv = Vec::new();
        write_hits_csv(t.hits(), &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("telegraph_id,time,x\n"));
        assert_eq!(text.lines().count(), 101);
    }

    #[test]
    fn transmission_is_deterministic_across_thread_counts() {
        let plan = TransmissionPlan::new(30, 1.0, 7).unwrap();
        let cfg = DeviceConfig::default();
        let bits = random_bits(200, SeedStream::new(77));
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    transmit_message(
                        &bits,
                        &plan,
                        ModelMode::NaiveCollapse,
                        &cfg,
                        SeedStream::new(77),
                    )
                    .unwrap()
                })
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a, b);
        assert_eq!(
            a,
            transmit_message(
                &bits,
                &plan,
                ModelMode::NaiveCollapse,
                &cfg,
                SeedStream::new(77)
            )
            .unwrap()
        );
    }

    #[test]
    fn throughput_examples() {
        let s = SeedStream::new(12);
        let one = throughput_check(&TransmissionPlan::new(100, 1.0, 1).unwrap(), s).unwrap();
        assert!((one.mean_symbol_time - 100.0).abs() <= 15.0, "{one:?}");
        let hundred = throughput_check(&TransmissionPlan::new(100, 1.0, 100).unwrap(), s).unwrap();
        assert!(
            (hundred.mean_symbol_time - 1.0).abs() <= 0.15,
            "{hundred:?}"
        );
        let thousand =
            throughput_check(&TransmissionPlan::new(100, 1.0, 1000).unwrap(), s).unwrap();
        assert!(
            (thousand.mean_symbol_time - 0.1).abs() <= 0.015,
            "{thousand:?}"
        );
        assert!(thousand.mean_symbol_time < hundred.mean_symbol_time);
    }

    #[test]
    fn throughput_is_monotone_in_n() {
        let s = SeedStream::new(13);
        let times: Vec<f64> = [1, 10, 100, 1000]
            .iter()
            .map(|&n| {
                throughput_check(&TransmissionPlan::new(200, 1.0, n).unwrap(), s)
                    .unwrap()
                    .mean_symbol_time
            })
            .collect();
        assert!(times.windows(2).all(|w| w[1] <= w[0]), "{times:?}");
    }
}
