//! Multi-receiver broadcast harness.
//!
//! A transmitter encodes `c` feature streams with a shared session seed and
//! emits one interleaved symbol schedule, polling streams with probability
//! proportional to their prior entropy. Every receiver takes a prefix of
//! that single schedule — the length set by its own noise level and budget
//! knobs — corrupts it with its own channel, and decodes with its own
//! iteration budget. Total transmitted symbols therefore equal the largest
//! individual budget, never the sum: the rateless broadcast property.
//!
//! The budget knobs `(alpha, beta)` map to the rate scale `gamma` and the
//! iteration budget `eta` through a monotone interpolation table standing in
//! for a learned scaling function.

use rayon::prelude::*;

use crate::bp::{decode, measured_complexity, DecodeGraph};
use crate::channel::{capacity, demodulate_default, modulate, transmit, ChannelParams};
use crate::design::{reliability, selection_weights, DegreeDistribution, SelectionWeights};
use crate::error::{Error, Result};
use crate::lt::{encode_symbol, GeneratorStream};
use crate::num::Real;
use crate::rng;
use crate::source::{BitBlock, SyntheticConfig};

const SCHEDULE_TAG: u64 = 0x7363_6865_6421;
const NOISE_TAG: u64 = 0x6e6f_6973_6521;
const SOURCE_TAG: u64 = 0x736f_7572_6365;

// ---------------------------------------------------------------------------
// Scaling table
// ---------------------------------------------------------------------------

/// Piecewise-linear stand-in for the learned budget-to-parameter map:
/// `alpha -> gamma` (rate scale) and `beta -> eta` (iterations), both
/// non-increasing, clamped at the table edges.
#[derive(Debug, Clone)]
pub struct ScalingTable<T: Real = f64> {
    alpha_gamma: Vec<(T, T)>,
    beta_eta: Vec<(T, T)>,
}

impl<T: Real> Default for ScalingTable<T> {
    /// gamma falls from 2.0 at alpha = 0 to 0.5 at alpha = 4; eta falls
    /// from 16 at beta = 0 to 1 at beta = 16.
    fn default() -> Self {
        let c = T::from_f64_lossy;
        Self {
            alpha_gamma: vec![(c(0.0), c(2.0)), (c(4.0), c(0.5))],
            beta_eta: vec![(c(0.0), c(16.0)), (c(16.0), c(1.0))],
        }
    }
}

impl<T: Real> ScalingTable<T> {
    pub fn new(alpha_gamma: Vec<(T, T)>, beta_eta: Vec<(T, T)>) -> Result<Self> {
        validate_axis(&alpha_gamma, "alpha -> gamma")?;
        validate_axis(&beta_eta, "beta -> eta")?;
        if beta_eta.iter().any(|&(_, eta)| eta < T::one()) {
            return Err(Error::Config("eta values must be at least 1".into()));
        }
        if alpha_gamma.iter().any(|&(_, g)| !(g > T::zero())) {
            return Err(Error::Config("gamma values must be positive".into()));
        }
        Ok(Self {
            alpha_gamma,
            beta_eta,
        })
    }

    /// `(gamma, eta) = f(alpha, beta)`.
    pub fn map(&self, alpha: T, beta: T) -> (T, T) {
        (
            interpolate(&self.alpha_gamma, alpha),
            interpolate(&self.beta_eta, beta),
        )
    }
}

fn validate_axis<T: Real>(points: &[(T, T)], name: &str) -> Result<()> {
    if points.is_empty() {
        return Err(Error::Config(format!("{name} table is empty")));
    }
    for w in points.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::Config(format!(
                "{name} table abscissae must be strictly increasing"
            )));
        }
        if w[1].1 > w[0].1 {
            return Err(Error::Config(format!(
                "{name} table must be non-increasing"
            )));
        }
    }
    Ok(())
}

fn interpolate<T: Real>(points: &[(T, T)], x: T) -> T {
    if x <= points[0].0 {
        return points[0].1;
    }
    if x >= points[points.len() - 1].0 {
        return points[points.len() - 1].1;
    }
    for w in points.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        if x <= x1 {
            let t = (x - x0) / (x1 - x0);
            return y0 + t * (y1 - y0);
        }
    }
    points[points.len() - 1].1
}

// ---------------------------------------------------------------------------
// Receiver profile
// ---------------------------------------------------------------------------

/// One broadcast user: a channel, budget knobs, and the derived
/// transmission and iteration budgets.
#[derive(Debug, Clone)]
pub struct ReceiverProfile<T: Real = f64> {
    pub sigma2: T,
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub eta: T,
    /// Channel noise seed of this receiver.
    pub seed: u64,
}

impl<T: Real> ReceiverProfile<T> {
    pub fn new(sigma2: T, alpha: T, beta: T, table: &ScalingTable<T>, seed: u64) -> Result<Self> {
        if !(sigma2 > T::zero()) || !sigma2.is_finite() {
            return Err(Error::Config(format!(
                "receiver noise variance {sigma2} must be positive"
            )));
        }
        let (gamma, eta) = table.map(alpha, beta);
        Ok(Self {
            sigma2,
            alpha,
            beta,
            gamma,
            eta,
            seed,
        })
    }
}

// ---------------------------------------------------------------------------
// Stream set
// ---------------------------------------------------------------------------

/// The `c` feature streams of one transmission session. All streams share
/// the length `k`; each has its own generator derived from the session seed.
#[derive(Debug, Clone)]
pub struct StreamSet<T: Real = f64> {
    blocks: Vec<BitBlock<T>>,
    generators: Vec<GeneratorStream>,
    session_seed: u64,
}

impl<T: Real> StreamSet<T> {
    /// Streams with explicit per-stream selection weights.
    pub fn with_weights(
        blocks: Vec<BitBlock<T>>,
        omega: &DegreeDistribution<T>,
        weights: &[SelectionWeights<T>],
        session_seed: u64,
    ) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Config("stream set needs at least one stream".into()));
        }
        if weights.len() != blocks.len() {
            return Err(Error::Structural(format!(
                "{} weight vectors for {} streams",
                weights.len(),
                blocks.len()
            )));
        }
        let k = blocks[0].len();
        if blocks.iter().any(|b| b.len() != k) {
            return Err(Error::Structural("streams must share one length".into()));
        }
        let generators = weights
            .iter()
            .enumerate()
            .map(|(j, w)| GeneratorStream::new(rng::derive(session_seed, j as u64), omega, w, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            blocks,
            generators,
            session_seed,
        })
    }

    /// Streams with reliability-tilted weights at a common `lambda`
    /// (zero gives uniform selection).
    pub fn new(
        blocks: Vec<BitBlock<T>>,
        omega: &DegreeDistribution<T>,
        lambda: T,
        session_seed: u64,
    ) -> Result<Self> {
        let weights: Vec<SelectionWeights<T>> = blocks
            .iter()
            .map(|b| selection_weights(&reliability(b.prior()), lambda))
            .collect();
        Self::with_weights(blocks, omega, &weights, session_seed)
    }

    pub fn stream_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn k(&self) -> usize {
        self.blocks[0].len()
    }

    pub fn blocks(&self) -> &[BitBlock<T>] {
        &self.blocks
    }

    pub fn generators(&self) -> &[GeneratorStream] {
        &self.generators
    }

    pub fn session_seed(&self) -> u64 {
        self.session_seed
    }

    /// Total source bits `c * k`.
    pub fn source_bits(&self) -> usize {
        self.blocks.len() * self.k()
    }

    /// Prior entropy of each stream in bits; the polling weights.
    pub fn entropies(&self) -> Vec<f64> {
        self.blocks.iter().map(stream_entropy_bits).collect()
    }
}

/// `H2(sigmoid(mu_i))` summed over the stream, in bits.
pub fn stream_entropy_bits<T: Real>(block: &BitBlock<T>) -> f64 {
    block
        .prior()
        .values()
        .iter()
        .map(|&m| binary_entropy_bits(m.to_f64().unwrap().sigmoid()))
        .sum()
}

fn binary_entropy_bits(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

// ---------------------------------------------------------------------------
// Rate allocation and polling
// ---------------------------------------------------------------------------

/// How the per-stream bit cost is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMode {
    /// Deployment default: the allocator sees only priors and charges the
    /// prior entropy.
    Entropy,
    /// Test mirror of the literal allocation rule: charges the realized
    /// bits their prior log-probabilities.
    BitConditional,
}

/// Symbols granted to one stream: `ceil(gamma / Cap(sigma) * cost)` where
/// `cost` is the summed negative log-probability of the stream under its
/// priors.
pub fn allocate_rate<T: Real>(
    block: &BitBlock<T>,
    gamma: T,
    sigma2: T,
    mode: RateMode,
) -> Result<usize> {
    if !(gamma > T::zero()) {
        return Err(Error::Config(format!("gamma {gamma} must be positive")));
    }
    let cost_bits: f64 = match mode {
        RateMode::Entropy => stream_entropy_bits(block),
        RateMode::BitConditional => block
            .bits()
            .iter()
            .zip(block.prior().values())
            .map(|(&b, &m)| {
                let p_match = m.to_f64().unwrap().abs().sigmoid();
                let matches = (m >= T::zero()) == (b == 0);
                let p = if matches { p_match } else { 1.0 - p_match };
                -p.log2()
            })
            .sum(),
    };
    let cap = capacity(sigma2).to_f64().unwrap();
    Ok((gamma.to_f64().unwrap() / cap * cost_bits).ceil() as usize)
}

/// Draws the stream to transmit next, with probability proportional to
/// each stream's prior entropy. Falls back to a uniform draw (with a
/// logged warning) when every stream is fully determined by its priors.
pub fn poll_stream<T: Real>(streams: &StreamSet<T>, session: &mut rng::Stream) -> usize {
    poll_with_weights(&streams.entropies(), session)
}

fn poll_with_weights(weights: &[f64], session: &mut rng::Stream) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng::uniform_open(session);
    if total <= 0.0 {
        log::warn!("all stream entropies are zero; polling uniformly");
        return ((u * weights.len() as f64) as usize).min(weights.len() - 1);
    }
    let mut acc = 0.0;
    for (j, &w) in weights.iter().enumerate() {
        acc += w / total;
        if u <= acc {
            return j;
        }
    }
    weights.len() - 1
}

// ---------------------------------------------------------------------------
// Broadcast execution
// ---------------------------------------------------------------------------

/// Per-receiver outcome of one broadcast session.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRecord {
    pub receiver: usize,
    pub sigma2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub eta: f64,
    /// Symbols this receiver collected.
    pub bits_received: usize,
    pub iterations: usize,
    pub ber: f64,
    /// Mean |p1 - b| over all source bits.
    pub soft_distortion: f64,
    pub ops: u64,
    pub bits_per_source_bit: f64,
    pub ops_per_source_bit: f64,
    /// Prior entropy of the side information, in bits.
    pub side_info_bits: f64,
    /// Set when the budget was cut to the session's symbol cap.
    pub truncated: bool,
}

/// Everything a broadcast session produced.
#[derive(Debug, Clone, PartialEq)]
pub struct BroadcastOutcome {
    pub records: Vec<SimulationRecord>,
    /// Symbols the transmitter actually emitted: the largest receiver
    /// budget, shared by everyone.
    pub total_transmitted: usize,
}

/// Runs one shared-schedule broadcast session.
///
/// The transmitter polls streams and emits each coded symbol exactly once;
/// receiver `r` takes the first `n_r` schedule entries, where `n_r` is its
/// entropy-mode rate allocation summed over streams (truncated to
/// `max_symbols` with a flag). Each receiver then corrupts its prefix with
/// its own noise seed and decodes every stream at its own iteration budget.
pub fn run_broadcast<T: Real>(
    streams: &StreamSet<T>,
    receivers: &[ReceiverProfile<T>],
    max_symbols: usize,
    trial_seed: u64,
) -> Result<BroadcastOutcome> {
    if receivers.is_empty() {
        return Err(Error::Config("no receivers".into()));
    }
    let c = streams.stream_count();
    let k = streams.k();

    // Budgets. The schedule only needs to cover the largest one.
    let mut budgets = Vec::with_capacity(receivers.len());
    for profile in receivers {
        let mut n_r = 0usize;
        for block in streams.blocks() {
            n_r += allocate_rate(block, profile.gamma, profile.sigma2, RateMode::Entropy)?;
        }
        budgets.push((n_r.min(max_symbols), n_r > max_symbols));
    }
    let total = budgets.iter().map(|&(n, _)| n).max().unwrap();

    // Shared schedule: which stream owns each slot, and the coded bit.
    let mut schedule_rng = rng::at(rng::derive(trial_seed, SCHEDULE_TAG), 0);
    let entropies = streams.entropies();
    let mut slot_stream = Vec::with_capacity(total);
    let mut slot_bit = Vec::with_capacity(total);
    let mut emitted = vec![0u64; c];
    for _ in 0..total {
        let j = poll_with_weights(&entropies, &mut schedule_rng);
        let spec = streams.generators()[j].spec_at(emitted[j]);
        slot_bit.push(encode_symbol(&streams.blocks()[j], &spec)?);
        slot_stream.push(j);
        emitted[j] += 1;
    }
    let waveform: Vec<T> = modulate(&slot_bit);

    let side_info_bits: f64 = entropies.iter().sum();
    let mut records = Vec::with_capacity(receivers.len());
    for (r, profile) in receivers.iter().enumerate() {
        let (n_r, truncated) = budgets[r];
        let noise_seed = rng::derive(rng::derive(trial_seed, NOISE_TAG), profile.seed);
        let channel = ChannelParams::new(profile.sigma2, noise_seed)?;
        let received = transmit(&waveform[..n_r], &channel);
        let llr = demodulate_default(&received, profile.sigma2);

        // Route prefix LLRs back to their streams; slot order preserves
        // each stream's symbol order.
        let mut per_stream_llr: Vec<Vec<T>> = vec![Vec::new(); c];
        for (slot, &j) in slot_stream[..n_r].iter().enumerate() {
            per_stream_llr[j].push(llr.values()[slot]);
        }

        let mut errors = 0usize;
        let mut soft_sum = 0.0f64;
        let mut ops = 0u64;
        let mut iterations = 0usize;
        for j in 0..c {
            let count = per_stream_llr[j].len();
            let specs = streams.generators()[j].specs(count);
            let graph = DecodeGraph::new(
                &specs,
                crate::channel::LlrVector::from_raw(
                    per_stream_llr[j].clone(),
                    T::from_f64_lossy(crate::DEFAULT_LLR_CAP),
                ),
                streams.blocks()[j].prior().clone(),
            )?;
            let result = decode(&graph, profile.eta.to_f64().unwrap(), None)?;
            iterations = result.iterations_run;
            ops += measured_complexity(&result);
            let truth = streams.blocks()[j].bits();
            for (i, &b) in result.hard_decisions().iter().enumerate() {
                if b != truth[i] {
                    errors += 1;
                }
            }
            for (i, &p1) in result.soft_bits.iter().enumerate() {
                soft_sum += (p1.to_f64().unwrap() - truth[i] as f64).abs();
            }
        }

        let source_bits = (c * k) as f64;
        records.push(SimulationRecord {
            receiver: r,
            sigma2: profile.sigma2.to_f64().unwrap(),
            alpha: profile.alpha.to_f64().unwrap(),
            beta: profile.beta.to_f64().unwrap(),
            gamma: profile.gamma.to_f64().unwrap(),
            eta: profile.eta.to_f64().unwrap(),
            bits_received: n_r,
            iterations,
            ber: errors as f64 / source_bits,
            soft_distortion: soft_sum / source_bits,
            ops,
            bits_per_source_bit: n_r as f64 / source_bits,
            ops_per_source_bit: ops as f64 / source_bits,
            side_info_bits,
            truncated,
        });
    }
    Ok(BroadcastOutcome {
        records,
        total_transmitted: total,
    })
}

// ---------------------------------------------------------------------------
// Single-stream trials
// ---------------------------------------------------------------------------

/// Outcome of one explicit-budget trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub ber: f64,
    pub soft_distortion: f64,
    pub ops: u64,
}

/// Encode `n` symbols of one stream, corrupt, decode. The building block
/// for sweeps and comparative experiments at pinned `(n, eta, sigma2)`.
pub fn single_stream_trial<T: Real>(
    block: &BitBlock<T>,
    weights: &SelectionWeights<T>,
    omega: &DegreeDistribution<T>,
    n: usize,
    eta: f64,
    sigma2: T,
    code_seed: u64,
    noise_seed: u64,
) -> Result<TrialOutcome> {
    let generator = GeneratorStream::new(code_seed, omega, weights, block.len())?;
    let (bits, specs) = crate::lt::encode_stream(block, &generator, n)?;
    let channel = ChannelParams::new(sigma2, noise_seed)?;
    let received = transmit(&modulate::<T>(&bits), &channel);
    let llr = demodulate_default(&received, sigma2);
    let graph = DecodeGraph::new(&specs, llr, block.prior().clone())?;
    let result = decode(&graph, eta, None)?;

    let truth = block.bits();
    let errors = result
        .hard_decisions()
        .iter()
        .zip(truth)
        .filter(|(a, b)| a != b)
        .count();
    let soft: f64 = result
        .soft_bits
        .iter()
        .zip(truth)
        .map(|(&p, &b)| (p.to_f64().unwrap() - b as f64).abs())
        .sum();
    Ok(TrialOutcome {
        ber: errors as f64 / block.len() as f64,
        soft_distortion: soft / block.len() as f64,
        ops: measured_complexity(&result),
    })
}

// ---------------------------------------------------------------------------
// Sweep
// ---------------------------------------------------------------------------

/// One grid point; explicit `n` or `eta` override the table-derived values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub sigma2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub n_override: Option<usize>,
    pub eta_override: Option<f64>,
}

/// Shared configuration of a sweep run.
#[derive(Debug, Clone)]
pub struct SweepConfig<T: Real = f64> {
    /// Fresh synthetic source per trial.
    pub synth: SyntheticConfig<T>,
    pub streams: usize,
    pub omega: DegreeDistribution<T>,
    /// Selection skew; zero means uniform.
    pub lambda: T,
    pub table: ScalingTable<T>,
    pub max_symbols: usize,
    pub seed: u64,
}

/// Trial-averaged results at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sigma2: f64,
    pub snr_db: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub eta: f64,
    pub n_total: f64,
    pub ber_mean: f64,
    pub ber_stderr: f64,
    pub soft_distortion_mean: f64,
    pub ops_mean: f64,
    pub bits_per_source_bit: f64,
    pub ops_per_source_bit: f64,
    pub trials: usize,
}

/// Averages broadcast records over `trials` sessions per grid point.
///
/// Trial seeds are shared across grid points (common random numbers), so
/// comparisons along the grid see the same sources and noise. Trials run
/// in parallel and are merged in deterministic order.
pub fn sweep<T: Real>(
    config: &SweepConfig<T>,
    points: &[SweepPoint],
    trials: usize,
) -> Result<Vec<SweepRow>> {
    if points.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    if trials == 0 {
        return Err(Error::Config("sweep needs at least one trial".into()));
    }
    let mut rows = Vec::with_capacity(points.len());
    for point in points {
        let sigma2 = T::from_f64_lossy(point.sigma2);
        let table_pair = config
            .table
            .map(T::from_f64_lossy(point.alpha), T::from_f64_lossy(point.beta));
        let gamma = table_pair.0;
        let eta = point.eta_override.unwrap_or_else(|| table_pair.1.to_f64().unwrap());

        let outcomes: Vec<(SimulationRecord, usize)> = (0..trials)
            .into_par_iter()
            .map(|t| -> Result<(SimulationRecord, usize)> {
                let trial_seed = rng::derive(config.seed, t as u64);
                let blocks = (0..config.streams)
                    .map(|j| {
                        config
                            .synth
                            .generate(rng::derive(rng::derive(trial_seed, SOURCE_TAG), j as u64))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let streams =
                    StreamSet::new(blocks, &config.omega, config.lambda, trial_seed)?;
                let mut profile = ReceiverProfile::new(
                    sigma2,
                    T::from_f64_lossy(point.alpha),
                    T::from_f64_lossy(point.beta),
                    &config.table,
                    rng::derive(trial_seed, 1),
                )?;
                profile.eta = T::from_f64_lossy(eta);
                let outcome = match point.n_override {
                    // Budget pinned: bypass the allocator by an explicit
                    // per-stream trial at n/streams symbols each.
                    Some(n) => {
                        let per_stream = n / streams.stream_count().max(1);
                        let mut errors = 0.0;
                        let mut soft = 0.0;
                        let mut ops = 0u64;
                        for (j, block) in streams.blocks().iter().enumerate() {
                            let w = selection_weights(
                                &reliability(block.prior()),
                                config.lambda,
                            );
                            let trial = single_stream_trial(
                                block,
                                &w,
                                &config.omega,
                                per_stream,
                                eta,
                                sigma2,
                                rng::derive(trial_seed, j as u64),
                                rng::derive(rng::derive(trial_seed, NOISE_TAG), j as u64),
                            )?;
                            errors += trial.ber * block.len() as f64;
                            soft += trial.soft_distortion * block.len() as f64;
                            ops += trial.ops;
                        }
                        let source_bits = streams.source_bits() as f64;
                        (
                            SimulationRecord {
                                receiver: 0,
                                sigma2: point.sigma2,
                                alpha: point.alpha,
                                beta: point.beta,
                                gamma: gamma.to_f64().unwrap(),
                                eta,
                                bits_received: n,
                                iterations: eta.ceil() as usize,
                                ber: errors / source_bits,
                                soft_distortion: soft / source_bits,
                                ops,
                                bits_per_source_bit: n as f64 / source_bits,
                                ops_per_source_bit: ops as f64 / source_bits,
                                side_info_bits: streams.entropies().iter().sum(),
                                truncated: false,
                            },
                            n,
                        )
                    }
                    None => {
                        let mut out =
                            run_broadcast(&streams, &[profile], config.max_symbols, trial_seed)?;
                        let record = out.records.remove(0);
                        let total = out.total_transmitted;
                        (record, total)
                    }
                };
                Ok(outcome)
            })
            .collect::<Result<Vec<_>>>()?;

        let tf = trials as f64;
        let ber_mean = outcomes.iter().map(|(r, _)| r.ber).sum::<f64>() / tf;
        let ber_stderr = if trials > 1 {
            let var = outcomes
                .iter()
                .map(|(r, _)| (r.ber - ber_mean) * (r.ber - ber_mean))
                .sum::<f64>()
                / (tf - 1.0);
            (var / tf).sqrt()
        } else {
            0.0
        };
        rows.push(SweepRow {
            sigma2: point.sigma2,
            snr_db: 10.0 * (1.0 / point.sigma2).log10(),
            alpha: point.alpha,
            beta: point.beta,
            gamma: gamma.to_f64().unwrap(),
            eta,
            n_total: outcomes.iter().map(|&(_, n)| n as f64).sum::<f64>() / tf,
            ber_mean,
            ber_stderr,
            soft_distortion_mean: outcomes.iter().map(|(r, _)| r.soft_distortion).sum::<f64>()
                / tf,
            ops_mean: outcomes.iter().map(|(r, _)| r.ops as f64).sum::<f64>() / tf,
            bits_per_source_bit: outcomes
                .iter()
                .map(|(r, _)| r.bits_per_source_bit)
                .sum::<f64>()
                / tf,
            ops_per_source_bit: outcomes
                .iter()
                .map(|(r, _)| r.ops_per_source_bit)
                .sum::<f64>()
                / tf,
            trials,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
