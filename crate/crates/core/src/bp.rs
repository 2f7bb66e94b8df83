//! Soft belief-propagation decoding with exact operation accounting.
//!
//! The decoder runs a flooding schedule on the sparse bipartite graph built
//! from the coded-symbol specifications. One iteration first updates every
//! output-to-input message
//!
//! ```text
//! tanh(m_oi / 2) = tanh(v_o / 2) * prod_{i' != i} tanh(m_i'o / 2)
//! ```
//!
//! and then every input-to-output message `m_io = mu_i + sum_{o' != o} m_o'i`,
//! with per-bit marginals `M_i = mu_i + sum_o m_oi`. Input messages start at
//! the prior. No damping and no early stopping: the ceiling of the iteration
//! budget is the complexity contract, and the arithmetic performed per
//! iteration is tallied exactly (per iteration: `tanh` E+n, `atanh` E,
//! `/` 2E+n, `*` 2E+n, `+` E+k, `-` E, for E edges, n outputs, k inputs).
//!
//! Division-free exclusion tricks are deliberately not used; the census
//! above assumes the total-product-divided-by-one-factor form.

use crate::channel::LlrVector;
use crate::design::DegreeDistribution;
use crate::error::{Error, Result};
use crate::lt::CodedSymbolSpec;
use crate::num::Real;
use crate::source::PriorVector;

// ---------------------------------------------------------------------------
// Graph
// ---------------------------------------------------------------------------

/// Sparse bipartite decoding graph plus the decoder's inputs: channel LLRs
/// for the `n` outputs and priors for the `k` inputs.
///
/// Edges are grouped by output node; the input adjacency is a CSR view onto
/// the same edge ids. Specs are validated on construction, so edges between
/// one input/output pair are never duplicated.
#[derive(Debug, Clone)]
pub struct DecodeGraph<T: Real = f64> {
    k: usize,
    /// Edge target input, grouped by output.
    edge_input: Vec<u32>,
    /// Edge range of each output.
    output_start: Vec<usize>,
    /// CSR of edge ids per input.
    input_start: Vec<usize>,
    input_edges: Vec<u32>,
    channel_llr: LlrVector<T>,
    prior: PriorVector<T>,
}

impl<T: Real> DecodeGraph<T> {
    pub fn new(
        specs: &[CodedSymbolSpec],
        channel_llr: LlrVector<T>,
        prior: PriorVector<T>,
    ) -> Result<Self> {
        if specs.len() != channel_llr.len() {
            return Err(Error::Structural(format!(
                "{} specs but {} channel LLRs",
                specs.len(),
                channel_llr.len()
            )));
        }
        let k = prior.len();
        let mut edge_input = Vec::new();
        let mut output_start = Vec::with_capacity(specs.len() + 1);
        output_start.push(0);
        for spec in specs {
            spec.validate(k)?;
            edge_input.extend(spec.indices.iter().copied());
            output_start.push(edge_input.len());
        }

        let mut degree = vec![0usize; k];
        for &i in &edge_input {
            degree[i as usize] += 1;
        }
        let mut input_start = Vec::with_capacity(k + 1);
        input_start.push(0);
        for &d in &degree {
            input_start.push(input_start.last().unwrap() + d);
        }
        let mut cursor = input_start.clone();
        let mut input_edges = vec![0u32; edge_input.len()];
        for (e, &i) in edge_input.iter().enumerate() {
            input_edges[cursor[i as usize]] = e as u32;
            cursor[i as usize] += 1;
        }

        Ok(Self {
            k,
            edge_input,
            output_start,
            input_start,
            input_edges,
            channel_llr,
            prior,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.output_start.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.edge_input.len()
    }

    pub fn prior(&self) -> &PriorVector<T> {
        &self.prior
    }

    pub fn channel_llr(&self) -> &LlrVector<T> {
        &self.channel_llr
    }

    fn output_edges(&self, o: usize) -> std::ops::Range<usize> {
        self.output_start[o]..self.output_start[o + 1]
    }

    fn input_edge_ids(&self, i: usize) -> &[u32] {
        &self.input_edges[self.input_start[i]..self.input_start[i + 1]]
    }
}

// ---------------------------------------------------------------------------
// Operation accounting
// ---------------------------------------------------------------------------

/// Tally of arithmetic operations performed by the decoder.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounter {
    pub tanh: u64,
    pub atanh: u64,
    pub mul: u64,
    pub div: u64,
    pub add: u64,
    pub sub: u64,
}

impl OpCounter {
    pub fn total(&self) -> u64 {
        self.tanh + self.atanh + self.mul + self.div + self.add + self.sub
    }
}

/// Expected operation count for `ceil(eta)` iterations of a code with the
/// given degree distribution: `ceil(eta) * (8 n E[d] + 3 n + k)`.
pub fn predicted_complexity<T: Real>(
    n: usize,
    k: usize,
    omega: &DegreeDistribution<T>,
    eta: f64,
) -> f64 {
    let iterations = eta.max(0.0).ceil();
    let mean_degree = omega.mean_degree().to_f64().unwrap();
    iterations * (8.0 * n as f64 * mean_degree + 3.0 * n as f64 + k as f64)
}

/// Total operations actually performed by a decode.
pub fn measured_complexity<T: Real>(result: &DecodeResult<T>) -> u64 {
    result.ops.total()
}

// ---------------------------------------------------------------------------
// Decoding
// ---------------------------------------------------------------------------

/// Output of one decode.
#[derive(Debug, Clone)]
pub struct DecodeResult<T: Real = f64> {
    /// Posterior LLRs `M_i`.
    pub marginals: Vec<T>,
    /// `p(b_i = 1) = 1 - sigmoid(M_i)`.
    pub soft_bits: Vec<T>,
    pub iterations_run: usize,
    pub ops: OpCounter,
    /// Mean input-to-output message before iterating and after each
    /// iteration (length `iterations_run + 1`). Sign-aligned with the true
    /// bits when they were supplied, otherwise a mean of magnitudes.
    pub message_mean_trace: Vec<T>,
    /// Mean output-to-input message after each iteration.
    pub output_message_mean_trace: Vec<T>,
    /// Whether the traces are sign-aligned by reference bits.
    pub trace_is_signed: bool,
    /// Realized edge count of the decoded graph.
    pub edge_count: usize,
    pub n_outputs: usize,
    pub k_inputs: usize,
}

impl<T: Real> DecodeResult<T> {
    /// Hard decisions from the marginals (`M_i < 0` decodes to 1).
    pub fn hard_decisions(&self) -> Vec<u8> {
        self.marginals
            .iter()
            .map(|&m| u8::from(m < T::zero()))
            .collect()
    }

    /// Operations of one iteration for the realized graph: `8E + 3n + k`.
    pub fn ops_per_iteration(&self) -> u64 {
        8 * self.edge_count as u64 + 3 * self.n_outputs as u64 + self.k_inputs as u64
    }
}

/// Runs `ceil(eta)` iterations of sum-product message passing.
///
/// `reference_bits`, when given, sign-aligns the message traces to the
/// all-zero convention so their means are comparable across trials; it has
/// no influence on the decoding itself.
pub fn decode<T: Real>(
    graph: &DecodeGraph<T>,
    eta: f64,
    reference_bits: Option<&[u8]>,
) -> Result<DecodeResult<T>> {
    if !(eta >= 1.0) {
        return Err(Error::Config(format!("eta {eta} must be at least 1")));
    }
    if let Some(bits) = reference_bits {
        if bits.len() != graph.k() {
            return Err(Error::Structural(format!(
                "{} reference bits for k = {}",
                bits.len(),
                graph.k()
            )));
        }
    }
    let iterations = eta.ceil() as usize;
    let k = graph.k();
    let n = graph.n();
    let e = graph.edge_count();
    let two = T::from_f64_lossy(2.0);

    // Sign alignment per edge for the traces.
    let edge_flip: Option<Vec<T>> = reference_bits.map(|bits| {
        graph
            .edge_input
            .iter()
            .map(|&i| {
                if bits[i as usize] == 0 {
                    T::one()
                } else {
                    -T::one()
                }
            })
            .collect()
    });
    let trace_mean = |msgs: &[T]| -> T {
        if msgs.is_empty() {
            return T::zero();
        }
        let total: T = match &edge_flip {
            Some(flip) => msgs.iter().zip(flip).map(|(&m, &f)| m * f).sum(),
            None => msgs.iter().map(|m| m.abs()).sum(),
        };
        total / T::from_f64_lossy(msgs.len() as f64)
    };

    // Saturation guards; scaled to the precision of T.
    let tanh_limit = T::one() - T::from_f64_lossy(1e-12).max(T::epsilon() * T::from_f64_lossy(8.0));
    let tanh_floor = T::min_positive_value().sqrt();
    let msg_cap = T::from_f64_lossy(crate::DEFAULT_LLR_CAP);

    let prior = graph.prior.values();
    let llr = graph.channel_llr.values();

    let mut m_in: Vec<T> = graph
        .edge_input
        .iter()
        .map(|&i| prior[i as usize])
        .collect();
    let mut m_out = vec![T::zero(); e];
    let mut edge_tanh = vec![T::zero(); e];
    let mut marginals: Vec<T> = prior.to_vec();

    let mut ops = OpCounter::default();
    let mut message_mean_trace = Vec::with_capacity(iterations + 1);
    let mut output_message_mean_trace = Vec::with_capacity(iterations);
    message_mean_trace.push(trace_mean(&m_in));

    for _ in 0..iterations {
        // Output update. Products fold the channel term into a unit
        // accumulator, and each edge message is the total product divided
        // by the edge's own factor.
        for o in 0..n {
            let range = graph.output_edges(o);
            let th_ch = (llr[o] / two).tanh();
            for edge in range.clone() {
                let mut t = (m_in[edge] / two).tanh();
                t = num_traits::clamp(t, -tanh_limit, tanh_limit);
                if t.abs() < tanh_floor {
                    t = if t.is_sign_negative() { -tanh_floor } else { tanh_floor };
                }
                edge_tanh[edge] = t;
            }
            let mut product = T::one();
            product *= th_ch;
            for edge in range.clone() {
                product *= edge_tanh[edge];
            }
            for edge in range {
                let excluded = product / edge_tanh[edge];
                let clamped = num_traits::clamp(excluded, -tanh_limit, tanh_limit);
                let msg = two * odd_atanh(clamped);
                m_out[edge] = num_traits::clamp(msg, -msg_cap, msg_cap);
            }
        }
        ops.tanh += (e + n) as u64;
        ops.div += (e + n) as u64; // halving before each tanh
        ops.mul += (e + n) as u64; // product folds, channel included
        ops.div += e as u64; // exclusion divisions
        ops.atanh += e as u64;
        ops.mul += e as u64; // doubling after each atanh

        // Input update: message sums, marginals, and extrinsic subtraction.
        for i in 0..k {
            let mut acc = T::zero();
            for &edge in graph.input_edge_ids(i) {
                acc += m_out[edge as usize];
            }
            let marginal = prior[i] + acc;
            marginals[i] = marginal;
            for &edge in graph.input_edge_ids(i) {
                let msg = marginal - m_out[edge as usize];
                m_in[edge as usize] = num_traits::clamp(msg, -msg_cap, msg_cap);
            }
        }
        ops.add += (e + k) as u64;
        ops.sub += e as u64;

        message_mean_trace.push(trace_mean(&m_in));
        output_message_mean_trace.push(trace_mean(&m_out));
    }

    let soft_bits = marginals.iter().map(|&m| T::one() - m.sigmoid()).collect();
    Ok(DecodeResult {
        marginals,
        soft_bits,
        iterations_run: iterations,
        ops,
        message_mean_trace,
        output_message_mean_trace,
        trace_is_signed: reference_bits.is_some(),
        edge_count: e,
        n_outputs: n,
        k_inputs: k,
    })
}

/// Per-iteration mean increments of the input-to-output messages.
///
/// Empty when fewer than two iterations ran. With reference bits the means
/// are in the all-zero convention, so positive deltas indicate the decoder
/// moving toward the transmitted word; without them the deltas are of mean
/// magnitudes.
pub fn message_increase_diagnostic<T: Real>(result: &DecodeResult<T>) -> Vec<T> {
    if result.iterations_run < 2 {
        return Vec::new();
    }
    result
        .message_mean_trace
        .windows(2)
        .map(|w| w[1] - w[0])
        .collect()
}

// ---------------------------------------------------------------------------
// Exact marginal oracle
// ---------------------------------------------------------------------------

/// Brute-force posterior marginals by enumerating all `2^k` input words.
///
/// Each word is weighted by its prior likelihood times the channel
/// likelihood of the coded bits it implies; computation is carried out in
/// `f64` log-space regardless of the graph's scalar type. Streams longer
/// than 16 bits are refused.
pub fn exact_marginals<T: Real>(graph: &DecodeGraph<T>) -> Result<Vec<T>> {
    let k = graph.k();
    if k > 16 {
        return Err(Error::Config(format!(
            "exact marginals enumerate 2^k words; k = {k} is too large"
        )));
    }
    let n = graph.n();
    let masks: Vec<u64> = (0..n)
        .map(|o| {
            graph.output_edges(o).fold(0u64, |m, e| {
                m | (1u64 << graph.edge_input[e])
            })
        })
        .collect();
    let prior: Vec<f64> = graph
        .prior
        .values()
        .iter()
        .map(|m| m.to_f64().unwrap())
        .collect();
    let llr: Vec<f64> = graph
        .channel_llr
        .values()
        .iter()
        .map(|v| v.to_f64().unwrap())
        .collect();

    // ln p(b = 0) = -softplus(-mu), ln p(b = 1) = -softplus(mu).
    let softplus = |x: f64| {
        if x > 30.0 {
            x
        } else {
            x.exp().ln_1p()
        }
    };
    let mut log_zero = vec![f64::NEG_INFINITY; k];
    let mut log_one = vec![f64::NEG_INFINITY; k];
    for word in 0u64..(1u64 << k) {
        let mut logw = 0.0;
        for (i, &mu) in prior.iter().enumerate() {
            logw -= if word >> i & 1 == 0 {
                softplus(-mu)
            } else {
                softplus(mu)
            };
        }
        for (o, &mask) in masks.iter().enumerate() {
            let coded = (word & mask).count_ones() & 1;
            // Symmetric channel likelihood: ln p(y | c) = (1 - 2c) v / 2
            // up to a constant that cancels in the marginal ratio.
            let sign = if coded == 0 { 0.5 } else { -0.5 };
            logw += sign * llr[o];
        }
        for i in 0..k {
            let slot = if word >> i & 1 == 0 {
                &mut log_zero[i]
            } else {
                &mut log_one[i]
            };
            *slot = log_add_exp(*slot, logw);
        }
    }
    Ok((0..k)
        .map(|i| T::from_f64_lossy(log_zero[i] - log_one[i]))
        .collect())
}

/// `atanh` with exactly odd symmetry; the libm version is not
/// sign-symmetric at the last ulp, which would break the decoder's gauge
/// invariance.
fn odd_atanh<T: Real>(x: T) -> T {
    let a = x.abs().atanh();
    if x.is_sign_negative() {
        -a
    } else {
        a
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
