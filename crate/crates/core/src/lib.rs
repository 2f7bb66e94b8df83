//! Rateless source-channel coding with unequal error protection.
//!
//! This crate simulates a transmission chain in which a stream of message
//! bits, each annotated with a prior log-likelihood ratio (side information
//! available losslessly at the decoder), is protected by a seeded LT code and
//! sent over a BIAWGN channel. The decoder runs soft belief propagation that
//! fuses the channel LLRs with the per-bit priors and reports soft marginals
//! instead of hard decisions.
//!
//! The crate is organized around the stages of that chain:
//!
//! - [`source`] — prior-annotated bit blocks, the priors file formats, and
//!   the sign-flipping transform used by the all-zero analysis convention.
//! - [`channel`] — BPSK modulation, AWGN corruption, LLR demodulation, and
//!   BIAWGN capacity via Gauss–Hermite quadrature.
//! - [`design`] — the reliability statistic `U`, exponential selection
//!   weights, the monotone subset statistic `Ψ(λ)` with bisection tuning,
//!   and the initialization / per-symbol-information bounds that constrain
//!   the selection skew.
//! - [`lt`] — seeded degree and index sampling, XOR encoding, and
//!   bit-identical graph reconstruction from the shared seed.
//! - [`bp`] — the sum-product decoder with exact arithmetic-operation
//!   accounting, plus a brute-force marginal oracle for small instances.
//! - [`broadcast`] — a multi-receiver harness with per-channel rate
//!   allocation, stream polling, and rate/complexity/distortion sweeps.
//!
//! All numeric kernels are generic over the scalar type through the
//! [`Real`] trait (`f32` or `f64`); every public type defaults to `f64`,
//! which is what the CLI and all file formats use.
//!
//! Every randomized computation takes an explicit 64-bit seed and is a pure
//! function of its inputs, so whole experiments replay bit-exactly.

pub mod bp;
pub mod broadcast;
pub mod channel;
pub mod design;
mod error;
pub mod lt;
mod num;
pub mod rng;
pub mod source;

pub use bp::{DecodeGraph, DecodeResult, OpCounter};
pub use broadcast::{ReceiverProfile, ScalingTable, SimulationRecord, StreamSet, SweepPoint};
pub use channel::{ChannelParams, LlrVector};
pub use design::{DegreeDistribution, PsiEstimator, ReliabilityProfile, SelectionWeights};
pub use error::{Error, Result};
pub use lt::{CodedSymbolSpec, GeneratorStream};
pub use num::Real;
pub use source::{BitBlock, FlippedPrior, PriorVector};

/// Scalar type used by the CLI pipeline and by all on-disk formats.
pub type Scalar = f64;

/// Default floor on prior magnitudes; keeps every reliability value `U_i`
/// strictly positive so the initialization analysis applies.
pub const DEFAULT_MU_FLOOR: f64 = 1e-3;

/// Cap on log-likelihood ratios, in natural-log units. `tanh(30/2)` is 1.0
/// within double precision, so larger magnitudes carry no extra information
/// and only risk overflow in `atanh`.
pub const DEFAULT_LLR_CAP: f64 = 30.0;

/// Configure the global worker pool used for parallel trial execution.
///
/// Call at most once, before any parallel work runs; later calls fail.
pub fn configure_threads(jobs: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))
}
